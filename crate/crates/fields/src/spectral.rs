//! Periodic 1D grids and Fourier-multiplier operators.

use std::fmt;
use std::sync::Arc;

use metriplex_core::{MetriplexError, Result};
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

/// Smallest supported number of grid points.
pub const MIN_POINTS: usize = 8;

pub(crate) fn check_points(n: usize, what: &str) -> Result<()> {
    if n < MIN_POINTS || !n.is_power_of_two() {
        return Err(MetriplexError::InvalidParameter(format!("{what} must be a power of two of at least {MIN_POINTS}, got {n}")));
    }
    Ok(())
}

pub(crate) fn check_length(length: f64) -> Result<()> {
    if !(length > 0.0 && length.is_finite()) {
        return Err(MetriplexError::InvalidParameter(format!("domain length must be positive, got {length}")));
    }
    Ok(())
}

/// Signed mode number of FFT bin `m`, or `None` for the Nyquist bin.
pub(crate) fn mode_number(m: usize, n: usize) -> Option<f64> {
    match m.cmp(&(n / 2)) {
        std::cmp::Ordering::Less => Some(m as f64),
        std::cmp::Ordering::Equal => None,
        std::cmp::Ordering::Greater => Some(m as f64 - n as f64),
    }
}

/// Uniform periodic grid `x_j = j·L/n` on `[0, L)`.
#[derive(Clone)]
pub struct Grid1D {
    n: usize,
    length: f64,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Grid1D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid1D").field("n", &self.n).field("length", &self.length).finish()
    }
}

impl PartialEq for Grid1D {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.length == other.length
    }
}

impl Grid1D {
    pub fn new(n: usize, length: f64) -> Result<Self> {
        check_points(n, "number of grid points")?;
        check_length(length)?;
        let mut planner = FftPlanner::new();
        Ok(Self { n, length, forward: planner.plan_fft_forward(n), inverse: planner.plan_fft_inverse(n) })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn dx(&self) -> f64 {
        self.length / self.n as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        j as f64 * self.dx()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.x(j)).collect()
    }

    /// Samples `f` at the grid points.
    pub fn sample(&self, f: impl Fn(f64) -> f64) -> FieldState1D {
        FieldState1D { u: self.points().into_iter().map(f).collect() }
    }

    /// Wavenumber `2πm/L` of bin `m`, `None` at Nyquist.
    pub fn wavenumber(&self, m: usize) -> Option<f64> {
        mode_number(m, self.n).map(|k| 2.0 * std::f64::consts::PI * k / self.length)
    }

    /// `Σ_j a_j b_j dx`, the discrete `∫ a b`.
    pub fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(a, b)| a * b).sum::<f64>() * self.dx()
    }

    /// `Σ_j a_j dx`.
    pub fn integrate(&self, a: &[f64]) -> f64 {
        a.iter().sum::<f64>() * self.dx()
    }

    /// Applies a Fourier multiplier that vanishes on the zero mode.
    ///
    /// The first sample is subtracted before transforming, so constant
    /// inputs map to exactly zero.
    pub(crate) fn apply_mean_free(&self, u: &[f64], symbol: impl Fn(f64) -> Complex<f64>) -> Vec<f64> {
        debug_assert_eq!(u.len(), self.n);
        let shift = u[0];
        let mut buf: Vec<Complex<f64>> = u.iter().map(|x| Complex::new(x - shift, 0.0)).collect();
        self.forward.process(&mut buf);
        for (m, c) in buf.iter_mut().enumerate() {
            *c = match self.wavenumber(m) {
                Some(k) if m != 0 => *c * symbol(k),
                _ => Complex::new(0.0, 0.0),
            };
        }
        self.inverse.process(&mut buf);
        let scale = 1.0 / self.n as f64;
        buf.iter().map(|c| c.re * scale).collect()
    }

    /// `∂^order u` by Fourier collocation; the Nyquist mode is dropped so
    /// that odd orders are skew-symmetric and order `2p` equals order 1 applied `2p` times.
    pub fn derivative(&self, u: &[f64], order: u32) -> Vec<f64> {
        if order == 0 {
            return u.to_vec();
        }
        let i = Complex::new(0.0, 1.0);
        self.apply_mean_free(u, |k| (i * k).powu(order))
    }

    /// Hilbert transform, multiplier `−i·sgn(k)`; zero and Nyquist modes map to 0.
    pub fn hilbert(&self, u: &[f64]) -> Vec<f64> {
        self.apply_mean_free(u, |k| Complex::new(0.0, -k.signum()))
    }
}

/// Samples of a periodic field `u(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState1D {
    pub u: Vec<f64>,
}

impl FieldState1D {
    pub fn new(u: Vec<f64>) -> Result<Self> {
        if u.iter().any(|x| !x.is_finite()) {
            return Err(MetriplexError::NonFinite("field samples".into()));
        }
        Ok(Self { u })
    }

    pub(crate) fn check(&self, grid: &Grid1D) -> Result<()> {
        if self.u.len() != grid.n() {
            return Err(MetriplexError::DimensionMismatch { expected: grid.n(), found: self.u.len() });
        }
        Ok(())
    }
}

/// Fourier-collocation derivative of the given order.
pub fn spectral_derivative(grid: &Grid1D, u: &FieldState1D, order: u32) -> Result<FieldState1D> {
    u.check(grid)?;
    Ok(FieldState1D { u: grid.derivative(&u.u, order) })
}

/// Hilbert transform with multiplier `−i·sgn(k)`.
pub fn hilbert_transform(grid: &Grid1D, u: &FieldState1D) -> Result<FieldState1D> {
    u.check(grid)?;
    Ok(FieldState1D { u: grid.hilbert(&u.u) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn max_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn grid_validation() {
        assert!(Grid1D::new(4, 1.0).is_err());
        assert!(Grid1D::new(12, 1.0).is_err());
        assert!(Grid1D::new(16, 0.0).is_err());
        let g = Grid1D::new(16, 2.0).unwrap();
        assert_eq!(g.dx(), 0.125);
        assert_eq!(g.wavenumber(8), None);
        assert!((g.wavenumber(15).unwrap() + PI).abs() < 1e-15);
    }

    #[test]
    fn derivative_examples() {
        let g = Grid1D::new(64, 3.0).unwrap();
        let k = 2.0 * PI / 3.0;
        let u = g.sample(|x| (k * x).sin());
        let du = spectral_derivative(&g, &u, 1).unwrap();
        assert!(max_diff(&du.u, &g.sample(|x| k * (k * x).cos()).u) <= 1e-10);
        let c = g.sample(|_| 2.5);
        assert!(g.derivative(&c.u, 1).iter().all(|x| *x == 0.0));
        let d2 = g.derivative(&u.u, 2);
        assert!(max_diff(&d2, &g.sample(|x| -k * k * (k * x).sin()).u) <= 1e-10);
        assert!(max_diff(&d2, &g.derivative(&du.u, 1)) <= 1e-12);
        assert!(spectral_derivative(&g, &FieldState1D { u: vec![0.0; 8] }, 1).is_err());
    }

    #[test]
    fn hilbert_examples() {
        let g = Grid1D::new(32, 5.0).unwrap();
        let k = 2.0 * PI / 5.0;
        assert!(g.hilbert(&vec![1.0; 32]).iter().all(|x| *x == 0.0));
        let h = g.hilbert(&g.sample(|x| (k * x).cos()).u);
        assert!(max_diff(&h, &g.sample(|x| (k * x).sin()).u) <= 1e-12);
        let u = g.sample(|x| (k * x).sin() + 0.3 * (3.0 * k * x).cos() + 1.0).u;
        assert!(max_diff(&g.hilbert(&g.derivative(&u, 1)), &g.derivative(&g.hilbert(&u), 1)) <= 1e-10);
    }
}
