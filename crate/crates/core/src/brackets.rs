//! Pointwise evaluation of Poisson brackets, 4-brackets and their reductions.

use serde::{Deserialize, Serialize};

use crate::error::{MetriplexError, Result};
use crate::field::{FourBracketField, PoissonField, ScalarField};
use crate::tensor::{check_dims, contract4_raw, max_abs, CovectorValue, PhaseState, Rank2Value, SymmetryTag};

/// Tolerance on the Jacobi identity of structure constants.
pub const JACOBI_TOL: f64 = 1e-12;

/// `ε_{ijk}` for 0-based indices in three dimensions.
pub fn levi_civita_symbol(i: usize, j: usize, k: usize) -> f64 {
    match (i, j, k) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

/// Lie-algebra structure constants `c^{ij}_k`, stored at `(i, j, k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawConstants", into = "RawConstants")]
pub struct StructureConstants {
    n: usize,
    c: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawConstants {
    n: usize,
    c: Vec<f64>,
}

impl TryFrom<RawConstants> for StructureConstants {
    type Error = MetriplexError;
    fn try_from(r: RawConstants) -> Result<Self> {
        Self::new(r.n, r.c)
    }
}

impl From<StructureConstants> for RawConstants {
    fn from(s: StructureConstants) -> Self {
        RawConstants { n: s.n, c: s.c }
    }
}

impl StructureConstants {
    /// Validates exact antisymmetry and the Jacobi identity.
    pub fn new(n: usize, c: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(MetriplexError::InvalidParameter("structure constants need N >= 1".into()));
        }
        if c.len() != n.pow(3) {
            return Err(MetriplexError::DimensionMismatch { expected: n.pow(3), found: c.len() });
        }
        if c.iter().any(|x| !x.is_finite()) {
            return Err(MetriplexError::NonFinite("structure constants".into()));
        }
        let s = Self { n, c };
        let anti = s.antisymmetry_defect();
        if anti > 0.0 {
            return Err(MetriplexError::SymmetryViolation { what: "antisymmetry c^{ij}_k = -c^{ji}_k".into(), defect: anti, tolerance: 0.0 });
        }
        let jac = s.jacobi_defect();
        if jac > JACOBI_TOL {
            return Err(MetriplexError::SymmetryViolation { what: "Jacobi identity of the structure constants".into(), defect: jac, tolerance: JACOBI_TOL });
        }
        Ok(s)
    }

    /// Builds from `(i, j, k, c^{ij}_k)` entries (0-based); the partner
    /// `c^{ji}_k = -c^{ij}_k` is filled in. Repeated entries must agree.
    pub fn from_triples(n: usize, triples: &[(usize, usize, usize, f64)]) -> Result<Self> {
        let mut c = vec![f64::NAN; n.pow(3)];
        let idx = |i: usize, j: usize, k: usize| (i * n + j) * n + k;
        for &(i, j, k, v) in triples {
            if i >= n || j >= n || k >= n {
                return Err(MetriplexError::InvalidParameter(format!("structure-constant index ({i},{j},{k}) out of range for N={n}")));
            }
            if i == j && v != 0.0 {
                return Err(MetriplexError::InvalidParameter(format!("c^{{{i}{i}}}_{k} must vanish")));
            }
            for (a, b, val) in [(i, j, v), (j, i, -v)] {
                let slot = &mut c[idx(a, b, k)];
                if !slot.is_nan() && *slot != val {
                    return Err(MetriplexError::InvalidParameter(format!("conflicting values for c^{{{a}{b}}}_{k}")));
                }
                *slot = val;
            }
        }
        for x in c.iter_mut().filter(|x| x.is_nan()) {
            *x = 0.0;
        }
        Self::new(n, c)
    }

    /// `so(3)`: `c^{ij}_k = -ε_{ijk}`, so that `J^{ij} = -ε_{ijk} z^k`.
    pub fn so3() -> Self {
        let mut c = vec![0.0; 27];
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    c[(i * 3 + j) * 3 + k] = -levi_civita_symbol(i, j, k);
                }
            }
        }
        Self { n: 3, c }
    }

    /// The `sl(2,R)` constants of the Kida vortex Poisson tensor
    /// `J = [[0, z3, -z2], [-z3, 0, -z1], [z2, z1, 0]]`.
    pub fn kida() -> Self {
        Self::from_triples(3, &[(0, 1, 2, 1.0), (0, 2, 1, -1.0), (1, 2, 0, -1.0)]).expect("Kida constants are a Lie algebra")
    }

    /// The abelian algebra (all constants zero).
    pub fn abelian(n: usize) -> Self {
        Self { n, c: vec![0.0; n.pow(3)] }
    }

    /// Reads `c^{ij}_k = J(e_k)^{ij} - J(0)^{ij}` off a Poisson tensor that
    /// is linear in the state, then validates the result.
    pub fn from_linear_poisson(j: &(impl PoissonField + ?Sized)) -> Result<Self> {
        let n = j.dim();
        let origin = PhaseState::new(vec![0.0; n])?;
        let j0 = j.eval(&origin);
        let mut c = vec![0.0; n.pow(3)];
        for k in 0..n {
            let jk = j.eval(&origin.shifted(k, 1.0));
            for a in 0..n {
                for b in 0..n {
                    c[(a * n + b) * n + k] = jk.get(a, b) - j0.get(a, b);
                }
            }
        }
        Self::new(n, c)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.c[(i * self.n + j) * self.n + k]
    }

    pub fn entries(&self) -> &[f64] {
        &self.c
    }

    pub fn is_abelian(&self) -> bool {
        self.c.iter().all(|&x| x == 0.0)
    }

    fn antisymmetry_defect(&self) -> f64 {
        let n = self.n;
        let mut d: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    d = d.max((self.get(i, j, k) + self.get(j, i, k)).abs());
                }
            }
        }
        d
    }

    /// `max |Σ_r c^{ij}_r c^{rk}_s + c^{jk}_r c^{ri}_s + c^{ki}_r c^{rj}_s|`.
    pub fn jacobi_defect(&self) -> f64 {
        let n = self.n;
        let mut d: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for s in 0..n {
                        let v: f64 = (0..n)
                            .map(|r| {
                                self.get(i, j, r) * self.get(r, k, s)
                                    + self.get(j, k, r) * self.get(r, i, s)
                                    + self.get(k, i, r) * self.get(r, j, s)
                            })
                            .sum();
                        d = d.max(v.abs());
                    }
                }
            }
        }
        d
    }
}

/// `J^{ij}(z) = c^{ij}_k z^k`.
pub fn lie_poisson_tensor(c: &StructureConstants, z: &PhaseState) -> Rank2Value {
    let n = c.dim();
    // c is exactly antisymmetric, so the sum is too
    Rank2Value::from_fn(n, SymmetryTag::Antisymmetric, |i, j| (0..n).map(|k| c.get(i, j, k) * z[k]).sum())
}

fn check_field_dims(n: usize, z: &PhaseState, dims: &[usize]) -> Result<()> {
    check_dims(n, &[z.dim()])?;
    check_dims(n, dims)
}

/// `{f, g}(z) = ∇f · J · ∇g`.
pub fn poisson_bracket(
    j: &(impl PoissonField + ?Sized),
    f: &(impl ScalarField + ?Sized),
    g: &(impl ScalarField + ?Sized),
    z: &PhaseState,
) -> Result<f64> {
    check_field_dims(j.dim(), z, &[f.dim(), g.dim()])?;
    Ok(j.eval(z).bilinear(f.gradient(z).entries(), g.gradient(z).entries()))
}

/// The 4-bracket `(f, k; g, n)(z)`.
pub fn four_bracket(
    r: &(impl FourBracketField + ?Sized),
    f: &(impl ScalarField + ?Sized),
    k: &(impl ScalarField + ?Sized),
    g: &(impl ScalarField + ?Sized),
    n: &(impl ScalarField + ?Sized),
    z: &PhaseState,
) -> Result<f64> {
    check_field_dims(r.dim(), z, &[f.dim(), k.dim(), g.dim(), n.dim()])?;
    let t = r.eval(z)?;
    Ok(contract4_raw(&t, f.gradient(z).entries(), k.gradient(z).entries(), g.gradient(z).entries(), n.gradient(z).entries()))
}

/// Checks the declared symmetry of a contraction within `atol·max(1, |M|)`
/// and returns its exact (anti)symmetric part.
fn project(m: Rank2Value, tag: SymmetryTag, atol: f64, what: &str) -> Result<Rank2Value> {
    let (defect, scale) = match tag {
        SymmetryTag::Symmetric => (m.symmetry_defect(), m.max_abs()),
        SymmetryTag::Antisymmetric => (m.antisymmetry_defect(), m.max_abs()),
        SymmetryTag::None => return Ok(m),
    };
    let tolerance = atol * scale.max(1.0);
    if defect > tolerance {
        return Err(MetriplexError::SymmetryViolation { what: what.into(), defect, tolerance });
    }
    let n = m.dim();
    let sign = if tag == SymmetryTag::Symmetric { 1.0 } else { -1.0 };
    Ok(Rank2Value::from_fn(n, tag, |i, j| 0.5 * (m.get(i, j) + sign * m.get(j, i))))
}

/// G-metric `G^{ik} = R^{ijkl} ∂_j H ∂_l H` for a given gradient `h`.
pub fn g_metric_from_gradient(r: &(impl FourBracketField + ?Sized), h: &[f64], z: &PhaseState) -> Result<Rank2Value> {
    check_field_dims(r.dim(), z, &[h.len()])?;
    let t = r.eval(z)?;
    let n = r.dim();
    let entries = t.contract_24(h);
    let g = Rank2Value::from_fn(n, SymmetryTag::None, |i, k| entries[i * n + k]);
    project(g, SymmetryTag::Symmetric, r.symmetry_tolerance(), "symmetry of the G-metric")
}

/// G-metric `G^{ik}(z) = R^{ijkl} ∂_j H ∂_l H`; annihilates `∇H`.
pub fn g_metric(r: &(impl FourBracketField + ?Sized), h: &(impl ScalarField + ?Sized), z: &PhaseState) -> Result<Rank2Value> {
    check_dims(r.dim(), &[h.dim()])?;
    g_metric_from_gradient(r, h.gradient(z).entries(), z)
}

/// The dissipative 2-bracket `(f, g)_H = (f, H; g, H)`.
pub fn two_bracket(
    r: &(impl FourBracketField + ?Sized),
    h: &(impl ScalarField + ?Sized),
    f: &(impl ScalarField + ?Sized),
    g: &(impl ScalarField + ?Sized),
    z: &PhaseState,
) -> Result<f64> {
    check_field_dims(r.dim(), z, &[h.dim(), f.dim(), g.dim()])?;
    Ok(g_metric(r, h, z)?.bilinear(f.gradient(z).entries(), g.gradient(z).entries()))
}

/// KM tensor `J_KM^{ij} = R^{ijkl} ∂_k S ∂_l H` from gradients.
pub fn km_tensor_from_gradients(r: &(impl FourBracketField + ?Sized), s: &[f64], h: &[f64], z: &PhaseState) -> Result<Rank2Value> {
    check_field_dims(r.dim(), z, &[s.len(), h.len()])?;
    let n = r.dim();
    let t = r.eval(z)?;
    let e = t.contract_34(s, h);
    let m = Rank2Value::from_fn(n, SymmetryTag::None, |i, j| e[i * n + j]);
    project(m, SymmetryTag::Antisymmetric, r.symmetry_tolerance(), "antisymmetry of the KM tensor")
}

/// KM tensor `J_KM^{ij} = R^{ijkl} ∂_k S ∂_l H`, so that `[f, g]_S = (f, g; S, H)`.
pub fn km_tensor(
    r: &(impl FourBracketField + ?Sized),
    s: &(impl ScalarField + ?Sized),
    h: &(impl ScalarField + ?Sized),
    z: &PhaseState,
) -> Result<Rank2Value> {
    check_dims(r.dim(), &[s.dim(), h.dim()])?;
    km_tensor_from_gradients(r, s.gradient(z).entries(), h.gradient(z).entries(), z)
}

/// `D^{ij} = J^{ik} g_{kl} J^{jl}`.
pub fn double_bracket_tensor(j: &(impl PoissonField + ?Sized), g: &Rank2Value, z: &PhaseState) -> Result<Rank2Value> {
    check_field_dims(j.dim(), z, &[g.dim()])?;
    if g.tag() != SymmetryTag::Symmetric {
        Rank2Value::new(g.dim(), g.entries().to_vec(), SymmetryTag::Symmetric)?;
    }
    let jz = j.eval(z);
    let d = jz.matmul(g).matmul(&jz.transpose());
    project(d, SymmetryTag::Symmetric, crate::tensor::DEFAULT_ATOL, "symmetry of the double-bracket tensor")
}

/// Unnormalized contravariant sectional curvature `K(a, b) = R(a, b, a, b)`.
pub fn sectional_curvature(r: &(impl FourBracketField + ?Sized), a: &CovectorValue, b: &CovectorValue, z: &PhaseState) -> Result<f64> {
    check_field_dims(r.dim(), z, &[a.dim(), b.dim()])?;
    let t = r.eval(z)?;
    Ok(contract4_raw(&t, a.entries(), b.entries(), a.entries(), b.entries()))
}

/// `max_i |v_i|`, for defect reporting.
pub fn max_norm(v: &[f64]) -> f64 {
    max_abs(v.iter().copied())
}
