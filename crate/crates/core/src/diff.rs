//! Central finite differences used wherever an analytic derivative is not supplied.

use crate::tensor::PhaseState;

/// Step for first derivatives of exactly evaluated quantities: `cbrt(eps)·max(1, |z_i|)`.
pub fn step(z_i: f64) -> f64 {
    f64::EPSILON.cbrt() * z_i.abs().max(1.0)
}

/// Step for derivatives of quantities that are themselves finite-difference
/// approximations. Their `O(eps^(2/3))` noise moves the optimum to `eps^(2/9)`.
pub fn nested_step(z_i: f64) -> f64 {
    f64::EPSILON.powf(2.0 / 9.0) * z_i.abs().max(1.0)
}

/// `∂f/∂z^i` for every `i`, with `f` vector valued. Returns `[i][component]`.
pub fn central_jacobian<F>(z: &PhaseState, h: impl Fn(f64) -> f64, f: F) -> Vec<Vec<f64>>
where
    F: Fn(&PhaseState) -> Vec<f64>,
{
    (0..z.dim())
        .map(|i| {
            let hi = h(z[i]);
            let plus = f(&z.shifted(i, hi));
            let minus = f(&z.shifted(i, -hi));
            // effective step after rounding of z_i ± h
            let span = (z[i] + hi) - (z[i] - hi);
            plus.iter().zip(&minus).map(|(p, m)| (p - m) / span).collect()
        })
        .collect()
}

/// Central-difference gradient of a scalar function.
pub fn central_gradient<F>(z: &PhaseState, f: F) -> Vec<f64>
where
    F: Fn(&PhaseState) -> f64,
{
    central_jacobian(z, step, |p| vec![f(p)]).into_iter().map(|d| d[0]).collect()
}
