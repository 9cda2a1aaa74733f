use crate::error::{MetriplexError, Result};
use crate::field::ScalarField;
use crate::tensor::{check_dims, PhaseState, Rank2Value, SymmetryTag};

/// Gradients smaller than this are treated as vanishing.
const MIN_GRADIENT: f64 = 1e-12;

fn entropy_gradient(s: &(impl ScalarField + ?Sized), z: &PhaseState) -> Result<Vec<f64>> {
    check_dims(s.dim(), &[z.dim()])?;
    let ds = s.gradient(z);
    let norm = ds.norm();
    if !(norm > MIN_GRADIENT) {
        return Err(MetriplexError::VanishingGradient { norm });
    }
    Ok(ds.into_inner())
}

/// Rank-one friction matrix `Ĝ^{ij} = Y^i ∂_j S / |∇S|²`, so that `Ĝ ∇S = Y`.
pub fn generic_linearize(y: impl Fn(&PhaseState) -> Vec<f64>, s: &(impl ScalarField + ?Sized), z: &PhaseState) -> Result<Rank2Value> {
    let ds = entropy_gradient(s, z)?;
    let yz = y(z);
    check_dims(z.dim(), &[yz.len()])?;
    let n2: f64 = ds.iter().map(|x| x * x).sum();
    Ok(Rank2Value::from_fn(z.dim(), SymmetryTag::None, |i, j| yz[i] * ds[j] / n2))
}

/// Symmetric `G` with `G ∇S = Ĝ ∇S`.
///
/// A Householder reflection `P` maps `∇S` onto the first axis. In that frame
/// the lower triangle of `P Ĝ P` (diagonal included) is kept and mirrored,
/// which leaves the first column untouched; rotating back gives `G`.
pub fn generic_symmetrize(ghat: &Rank2Value, s: &(impl ScalarField + ?Sized), z: &PhaseState) -> Result<Rank2Value> {
    let ds = entropy_gradient(s, z)?;
    let n = ds.len();
    check_dims(n, &[ghat.dim()])?;
    let norm = ds.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut v: Vec<f64> = ds.iter().map(|x| x / norm).collect();
    // add rather than subtract e1 when that avoids cancellation
    v[0] += if v[0] > 0.0 { 1.0 } else { -1.0 };
    let vv: f64 = v.iter().map(|x| x * x).sum();
    let p = Rank2Value::from_fn(n, SymmetryTag::Symmetric, |i, j| if i == j { 1.0 } else { 0.0 } - 2.0 * v[i] * v[j] / vv);
    let rotated = p.matmul(ghat).matmul(&p);
    let filled = Rank2Value::from_fn(n, SymmetryTag::Symmetric, |i, j| if i >= j { rotated.get(i, j) } else { rotated.get(j, i) });
    Ok(p.matmul(&filled).matmul(&p).symmetrized())
}
