//! Fixed-step explicit one-step methods on flat state vectors.

use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    #[default]
    Rk4,
    Euler,
}

fn axpy(y: &[f64], a: f64, k: &[f64]) -> Vec<f64> {
    y.iter().zip(k).map(|(y, k)| y + a * k).collect()
}

/// One step `y ← y + h·Φ(y)` of the chosen method for the autonomous system `ẏ = f(y)`.
pub fn step<F>(method: Method, f: &mut F, y: &[f64], h: f64) -> Result<Vec<f64>>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    let k1 = f(y)?;
    step_with_slope(method, f, y, &k1, h)
}

/// As [`step`], reusing an already evaluated `k1 = f(y)`.
pub fn step_with_slope<F>(method: Method, f: &mut F, y: &[f64], k1: &[f64], h: f64) -> Result<Vec<f64>>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    match method {
        Method::Euler => Ok(axpy(y, h, k1)),
        Method::Rk4 => {
            let k2 = f(&axpy(y, 0.5 * h, k1))?;
            let k3 = f(&axpy(y, 0.5 * h, &k2))?;
            let k4 = f(&axpy(y, h, &k3))?;
            Ok(y.iter().enumerate().map(|(i, y)| y + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])).collect())
        }
    }
}

/// Number of equal steps covering `t_end` with step at most `dt`.
pub fn step_count(t_end: f64, dt: f64) -> usize {
    ((t_end / dt) * (1.0 - 1e-12)).ceil().max(1.0) as usize
}
