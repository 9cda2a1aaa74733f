//! Vorticity dynamics on a doubly periodic box.
//!
//! With `[f, g] = f_x g_y − f_y g_x`, `∇²ψ = ω` and `H = ½∫ωψ`:
//!
//! - Hamiltonian flow `ω_t = −[ω, ψ]`;
//! - double bracket `ω_t = −λ[ω, [ω, ψ]]`, from the 4-bracket `λ∫[F,K][G,N]`
//!   with both slots filled by the enstrophy;
//! - metriplectic `ω_t = λ[ψ, [ω, ψ]]`, which keeps `H` and changes the
//!   enstrophy `S = ½∫ω²` at rate `λ∫[ω, ψ]²`.
//!
//! Since `H = −½∫|∇ψ|² ≤ 0`, the double bracket raises `H` for `λ > 0`
//! and lowers it for `λ < 0`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use metriplex_core::{MetriplexError, Result};
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::spectral::{check_length, check_points, mode_number};

/// Relative size of the mean vorticity treated as zero.
pub const MEAN_TOL: f64 = 1e-10;

/// Doubly periodic grid on `[0, Lx) × [0, Ly)`, stored row-major with `x` fastest.
#[derive(Clone)]
pub struct Grid2D {
    nx: usize,
    ny: usize,
    lx: f64,
    ly: f64,
    fx: Arc<dyn Fft<f64>>,
    ix: Arc<dyn Fft<f64>>,
    fy: Arc<dyn Fft<f64>>,
    iy: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Grid2D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid2D").field("nx", &self.nx).field("ny", &self.ny).field("lx", &self.lx).field("ly", &self.ly).finish()
    }
}

impl Grid2D {
    pub fn new(nx: usize, ny: usize, lx: f64, ly: f64) -> Result<Self> {
        check_points(nx, "nx")?;
        check_points(ny, "ny")?;
        check_length(lx)?;
        check_length(ly)?;
        let mut p = FftPlanner::new();
        Ok(Self { nx, ny, lx, ly, fx: p.plan_fft_forward(nx), ix: p.plan_fft_inverse(nx), fy: p.plan_fft_forward(ny), iy: p.plan_fft_inverse(ny) })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn lengths(&self) -> (f64, f64) {
        (self.lx, self.ly)
    }

    pub fn spacing(&self) -> (f64, f64) {
        (self.lx / self.nx as f64, self.ly / self.ny as f64)
    }

    pub fn cell_area(&self) -> f64 {
        let (dx, dy) = self.spacing();
        dx * dy
    }

    pub fn point(&self, idx: usize) -> (f64, f64) {
        let (dx, dy) = self.spacing();
        ((idx % self.nx) as f64 * dx, (idx / self.nx) as f64 * dy)
    }

    pub fn sample(&self, f: impl Fn(f64, f64) -> f64) -> FieldState2D {
        FieldState2D { omega: (0..self.len()).map(|i| self.point(i)).map(|(x, y)| f(x, y)).collect() }
    }

    pub fn integrate(&self, a: &[f64]) -> f64 {
        a.iter().sum::<f64>() * self.cell_area()
    }

    pub fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(a, b)| a * b).sum::<f64>() * self.cell_area()
    }

    fn wavenumbers(&self, mx: usize, my: usize) -> (Option<f64>, Option<f64>) {
        let tau = 2.0 * std::f64::consts::PI;
        (mode_number(mx, self.nx).map(|k| tau * k / self.lx), mode_number(my, self.ny).map(|k| tau * k / self.ly))
    }

    /// True when the mode survives the 2/3 truncation: `3|m| < n` in both directions.
    fn resolved(&self, mx: usize, my: usize) -> bool {
        let keep = |m: usize, n: usize| mode_number(m, n).is_some_and(|k| 3.0 * k.abs() < n as f64);
        keep(mx, self.nx) && keep(my, self.ny)
    }

    fn forward(&self, a: &[f64]) -> Vec<Complex<f64>> {
        let (nx, ny) = (self.nx, self.ny);
        let mut buf: Vec<Complex<f64>> = a.iter().map(|x| Complex::new(*x, 0.0)).collect();
        for row in buf.chunks_mut(nx) {
            self.fx.process(row);
        }
        let mut col = vec![Complex::new(0.0, 0.0); ny];
        for mx in 0..nx {
            for my in 0..ny {
                col[my] = buf[my * nx + mx];
            }
            self.fy.process(&mut col);
            for my in 0..ny {
                buf[my * nx + mx] = col[my];
            }
        }
        buf
    }

    fn inverse(&self, mut buf: Vec<Complex<f64>>) -> Vec<f64> {
        let (nx, ny) = (self.nx, self.ny);
        let mut col = vec![Complex::new(0.0, 0.0); ny];
        for mx in 0..nx {
            for my in 0..ny {
                col[my] = buf[my * nx + mx];
            }
            self.iy.process(&mut col);
            for my in 0..ny {
                buf[my * nx + mx] = col[my];
            }
        }
        for row in buf.chunks_mut(nx) {
            self.ix.process(row);
        }
        let scale = 1.0 / self.len() as f64;
        buf.iter().map(|c| c.re * scale).collect()
    }

    /// Multiplies Fourier coefficients by `symbol(mx, my)`.
    fn apply(&self, a: &[f64], symbol: impl Fn(usize, usize) -> Complex<f64>) -> Vec<f64> {
        let mut buf = self.forward(a);
        for (idx, c) in buf.iter_mut().enumerate() {
            *c *= symbol(idx % self.nx, idx / self.nx);
        }
        self.inverse(buf)
    }

    /// Removes the modes outside the 2/3 band.
    pub fn dealias(&self, a: &[f64]) -> Vec<f64> {
        self.apply(a, |mx, my| if self.resolved(mx, my) { Complex::new(1.0, 0.0) } else { Complex::new(0.0, 0.0) })
    }

    /// Spectral `∂_x a` and `∂_y a` (Nyquist modes dropped).
    pub fn gradient(&self, a: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let i = Complex::new(0.0, 1.0);
        let dx = self.apply(a, |mx, my| match self.wavenumbers(mx, my) {
            (Some(kx), Some(_)) => i * kx,
            _ => Complex::new(0.0, 0.0),
        });
        let dy = self.apply(a, |mx, my| match self.wavenumbers(mx, my) {
            (Some(_), Some(ky)) => i * ky,
            _ => Complex::new(0.0, 0.0),
        });
        (dx, dy)
    }

    /// Solves `∇²ψ = ω` with zero-mean `ψ`; errors when `ω` has nonzero mean.
    pub fn stream_function(&self, omega: &[f64]) -> Result<Vec<f64>> {
        self.check_len(omega)?;
        let mean = omega.iter().sum::<f64>() / self.len() as f64;
        let scale = omega.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1.0);
        if !(mean.abs() <= MEAN_TOL * scale) {
            return Err(MetriplexError::InvalidState(format!("vorticity must have zero mean on a periodic domain, mean is {mean:.3e}")));
        }
        let tau = 2.0 * std::f64::consts::PI;
        Ok(self.apply(omega, |mx, my| {
            if mx == 0 && my == 0 {
                return Complex::new(0.0, 0.0);
            }
            let kx = tau * (mode_number(mx, self.nx).unwrap_or(self.nx as f64 / 2.0)) / self.lx;
            let ky = tau * (mode_number(my, self.ny).unwrap_or(self.ny as f64 / 2.0)) / self.ly;
            Complex::new(-1.0 / (kx * kx + ky * ky), 0.0)
        }))
    }

    pub(crate) fn check_len(&self, a: &[f64]) -> Result<()> {
        if a.len() != self.len() {
            return Err(MetriplexError::DimensionMismatch { expected: self.len(), found: a.len() });
        }
        Ok(())
    }
}

/// Vorticity samples on a [`Grid2D`].
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState2D {
    pub omega: Vec<f64>,
}

impl FieldState2D {
    pub fn new(omega: Vec<f64>) -> Result<Self> {
        if omega.iter().any(|x| !x.is_finite()) {
            return Err(MetriplexError::NonFinite("vorticity samples".into()));
        }
        Ok(Self { omega })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum JacobianScheme {
    /// Pseudo-spectral products with 2/3 truncation of inputs and output.
    #[default]
    Spectral,
    /// Arakawa's second-order energy- and enstrophy-conserving stencil.
    Arakawa,
}

impl FromStr for JacobianScheme {
    type Err = MetriplexError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spectral" => Ok(Self::Spectral),
            "arakawa" => Ok(Self::Arakawa),
            _ => Err(MetriplexError::InvalidParameter(format!("unknown Jacobian scheme '{s}' (expected spectral or arakawa)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Euler2DKind {
    Hamiltonian,
    DoubleBracket,
    Metriplectic,
}

impl Euler2DKind {
    pub const ALL: [Euler2DKind; 3] = [Self::Hamiltonian, Self::DoubleBracket, Self::Metriplectic];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Hamiltonian => "hamiltonian",
            Self::DoubleBracket => "double_bracket",
            Self::Metriplectic => "metriplectic",
        }
    }
}

impl fmt::Display for Euler2DKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Euler2DKind {
    type Err = MetriplexError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| MetriplexError::InvalidParameter(format!("unknown 2D Euler mode '{s}' (expected hamiltonian, double_bracket or metriplectic)")))
    }
}

/// Discrete 2D Euler brackets on a fixed grid and Jacobian scheme.
#[derive(Debug, Clone)]
pub struct Euler2D {
    grid: Grid2D,
    scheme: JacobianScheme,
}

impl Euler2D {
    pub fn new(grid: Grid2D, scheme: JacobianScheme) -> Self {
        Self { grid, scheme }
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn scheme(&self) -> JacobianScheme {
        self.scheme
    }

    /// Maps a state into the space the scheme evolves: zero mean, and
    /// 2/3-truncated for the spectral scheme.
    pub fn prepare(&self, omega: &[f64]) -> Result<FieldState2D> {
        self.grid.check_len(omega)?;
        let mean = omega.iter().sum::<f64>() / omega.len() as f64;
        let centered: Vec<f64> = omega.iter().map(|x| x - mean).collect();
        FieldState2D::new(match self.scheme {
            JacobianScheme::Spectral => self.grid.dealias(&centered),
            JacobianScheme::Arakawa => centered,
        })
    }

    /// `[a, b] = a_x b_y − a_y b_x`.
    pub fn jacobian(&self, a: &[f64], b: &[f64]) -> Vec<f64> {
        match self.scheme {
            JacobianScheme::Spectral => {
                let g = &self.grid;
                let (ax, ay) = g.gradient(&g.dealias(a));
                let (bx, by) = g.gradient(&g.dealias(b));
                let prod: Vec<f64> = (0..g.len()).map(|i| ax[i] * by[i] - ay[i] * bx[i]).collect();
                g.dealias(&prod)
            }
            JacobianScheme::Arakawa => arakawa(&self.grid, a, b),
        }
    }

    pub fn stream_function(&self, omega: &[f64]) -> Result<Vec<f64>> {
        self.grid.stream_function(omega)
    }

    /// Vector field of the chosen flow.
    pub fn rhs(&self, kind: Euler2DKind, omega: &FieldState2D, lambda: f64) -> Result<FieldState2D> {
        let w = &omega.omega;
        let psi = self.stream_function(w)?;
        let j = self.jacobian(w, &psi);
        let out = match kind {
            Euler2DKind::Hamiltonian => j.iter().map(|x| -x).collect(),
            Euler2DKind::DoubleBracket => self.jacobian(w, &j).iter().map(|x| -lambda * x).collect(),
            Euler2DKind::Metriplectic => self.jacobian(&psi, &j).iter().map(|x| lambda * x).collect(),
        };
        Ok(FieldState2D { omega: out })
    }

    /// [`Self::rhs`] plus the advection `−[ω, ψ]` for the dissipative kinds.
    pub fn rhs_with_advection(&self, kind: Euler2DKind, omega: &FieldState2D, lambda: f64) -> Result<FieldState2D> {
        let mut r = self.rhs(kind, omega, lambda)?;
        if kind != Euler2DKind::Hamiltonian {
            let h = self.rhs(Euler2DKind::Hamiltonian, omega, lambda)?;
            r.omega.iter_mut().zip(&h.omega).for_each(|(a, b)| *a += b);
        }
        Ok(r)
    }

    /// `H = ½∫ωψ`.
    pub fn energy(&self, omega: &[f64]) -> Result<f64> {
        let psi = self.stream_function(omega)?;
        Ok(0.5 * self.grid.inner(omega, &psi))
    }

    /// `S = ½∫ω²`.
    pub fn enstrophy(&self, omega: &[f64]) -> f64 {
        0.5 * self.grid.inner(omega, omega)
    }

    /// `∫ω`.
    pub fn circulation(&self, omega: &[f64]) -> f64 {
        self.grid.integrate(omega)
    }

    /// `∫ω^m`.
    pub fn moment(&self, omega: &[f64], m: i32) -> f64 {
        self.grid.integrate(&omega.iter().map(|x| x.powi(m)).collect::<Vec<_>>())
    }
}

/// Arakawa's Jacobian `(J++ + J+× + J×+)/3` with centered differences.
fn arakawa(g: &Grid2D, a: &[f64], b: &[f64]) -> Vec<f64> {
    let (nx, ny) = (g.nx, g.ny);
    let (dx, dy) = g.spacing();
    let at = |v: &[f64], i: isize, j: isize| v[(j.rem_euclid(ny as isize) as usize) * nx + i.rem_euclid(nx as isize) as usize];
    let mut out = vec![0.0; nx * ny];
    for j in 0..ny as isize {
        for i in 0..nx as isize {
            let a_ = |di: isize, dj: isize| at(a, i + di, j + dj);
            let b_ = |di: isize, dj: isize| at(b, i + di, j + dj);
            let jpp = (a_(1, 0) - a_(-1, 0)) * (b_(0, 1) - b_(0, -1)) - (a_(0, 1) - a_(0, -1)) * (b_(1, 0) - b_(-1, 0));
            let jpx = a_(1, 0) * (b_(1, 1) - b_(1, -1)) - a_(-1, 0) * (b_(-1, 1) - b_(-1, -1)) - a_(0, 1) * (b_(1, 1) - b_(-1, 1))
                + a_(0, -1) * (b_(1, -1) - b_(-1, -1));
            let jxp = b_(0, 1) * (a_(1, 1) - a_(-1, 1)) - b_(0, -1) * (a_(1, -1) - a_(-1, -1)) - b_(1, 0) * (a_(1, 1) - a_(1, -1))
                + b_(-1, 0) * (a_(-1, 1) - a_(-1, -1));
            out[j as usize * nx + i as usize] = (jpp + jpx + jxp) / (12.0 * dx * dy);
        }
    }
    out
}
