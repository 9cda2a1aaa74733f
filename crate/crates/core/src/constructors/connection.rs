//! Christoffel symbols and the curvature tensors built from them.
//!
//! Covariant symbols `Γ^l_{jk}` are stored at `(l, j, k)`; contravariant
//! symbols `Γ^{ij}_k` at `(i, j, k)`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::diff::nested_step;
use crate::error::{MetriplexError, Result};
use crate::field::{FourBracketField, FourBracketFlags, MetricField, PoissonField, Rank2Derivative};
use crate::tensor::{check_dims, PhaseState, Rank2Value, Rank4Value};

/// Symmetry tolerance for tensors that need finite-difference second derivatives.
const FD_CURVATURE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConnectionKind {
    /// `Γ^i_{jk}`
    Covariant,
    /// `Γ^{ij}_k`
    Contravariant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChristoffelValue {
    n: usize,
    entries: Vec<f64>,
    kind: ConnectionKind,
}

impl ChristoffelValue {
    pub fn new(n: usize, entries: Vec<f64>, kind: ConnectionKind) -> Result<Self> {
        if entries.len() != n.pow(3) {
            return Err(MetriplexError::DimensionMismatch { expected: n.pow(3), found: entries.len() });
        }
        if entries.iter().any(|x| !x.is_finite()) {
            return Err(MetriplexError::NonFinite("Christoffel symbols".into()));
        }
        Ok(Self { n, entries, kind })
    }

    pub fn zeros(n: usize, kind: ConnectionKind) -> Self {
        Self { n, entries: vec![0.0; n.pow(3)], kind }
    }

    pub fn from_fn(n: usize, kind: ConnectionKind, f: impl Fn(usize, usize, usize) -> f64) -> Self {
        let mut entries = Vec::with_capacity(n.pow(3));
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    entries.push(f(a, b, c));
                }
            }
        }
        Self { n, entries, kind }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> ConnectionKind {
        self.kind
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize, c: usize) -> f64 {
        self.entries[(a * self.n + b) * self.n + c]
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn max_difference(&self, other: &ChristoffelValue) -> f64 {
        self.entries.iter().zip(&other.entries).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// `max |Γ^a_{bc} − Γ^a_{cb}|`: zero for a torsion-free covariant connection.
    pub fn lower_symmetry_defect(&self) -> f64 {
        let n = self.n;
        let mut d: f64 = 0.0;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    d = d.max((self.get(a, b, c) - self.get(a, c, b)).abs());
                }
            }
        }
        d
    }
}

pub trait ChristoffelField: Send + Sync {
    fn dim(&self) -> usize;

    fn kind(&self) -> ConnectionKind;

    fn eval(&self, z: &PhaseState) -> Result<ChristoffelValue>;

    fn analytic_derivative(&self, _z: &PhaseState) -> Option<Result<Vec<ChristoffelValue>>> {
        None
    }

    /// `∂_s Γ`, indexed `[s]`. Falls back to central differences of `eval`.
    fn derivative(&self, z: &PhaseState) -> Result<Vec<ChristoffelValue>> {
        if let Some(d) = self.analytic_derivative(z) {
            return d;
        }
        let n = self.dim();
        (0..n)
            .map(|s| {
                let h = nested_step(z[s]);
                let plus = self.eval(&z.shifted(s, h))?;
                let minus = self.eval(&z.shifted(s, -h))?;
                let span = (z[s] + h) - (z[s] - h);
                let e = plus.entries.iter().zip(&minus.entries).map(|(p, m)| (p - m) / span).collect();
                ChristoffelValue::new(n, e, self.kind())
            })
            .collect()
    }

    /// True when `derivative` is exact rather than finite-differenced.
    fn has_analytic_derivative(&self, z: &PhaseState) -> bool {
        self.analytic_derivative(z).is_some()
    }
}

/// A state-independent connection.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstantConnection {
    value: ChristoffelValue,
}

impl ConstantConnection {
    pub fn new(value: ChristoffelValue) -> Self {
        Self { value }
    }
}

impl ChristoffelField for ConstantConnection {
    fn dim(&self) -> usize {
        self.value.n
    }

    fn kind(&self) -> ConnectionKind {
        self.value.kind
    }

    fn eval(&self, _z: &PhaseState) -> Result<ChristoffelValue> {
        Ok(self.value.clone())
    }

    fn analytic_derivative(&self, _z: &PhaseState) -> Option<Result<Vec<ChristoffelValue>>> {
        Some(Ok(vec![ChristoffelValue::zeros(self.value.n, self.value.kind); self.value.n]))
    }
}

fn require_pd(g: &(impl MetricField + ?Sized)) -> Result<()> {
    match g.definiteness() {
        crate::field::Definiteness::PositiveDefinite => Ok(()),
        other => Err(MetriplexError::InvalidParameter(format!("Levi-Civita connection needs a positive-definite metric, got {other:?}"))),
    }
}

/// `B_{rjk} = ∂_j g_{rk} + ∂_k g_{rj} − ∂_r g_{jk}`.
fn lc_combination(dg: &[Rank2Value], n: usize) -> Vec<f64> {
    let mut b = vec![0.0; n * n * n];
    for r in 0..n {
        for j in 0..n {
            for k in 0..n {
                b[(r * n + j) * n + k] = dg[j].get(r, k) + dg[k].get(r, j) - dg[r].get(j, k);
            }
        }
    }
    b
}

fn raise_first(ginv: &Rank2Value, b: &[f64], n: usize) -> ChristoffelValue {
    ChristoffelValue::from_fn(n, ConnectionKind::Covariant, |l, j, k| {
        0.5 * (0..n).map(|r| ginv.get(l, r) * b[(r * n + j) * n + k]).sum::<f64>()
    })
}

/// Levi-Civita connection of a covariant metric `g_{ij}`.
#[derive(Clone)]
pub struct LeviCivitaField {
    g: Arc<dyn MetricField>,
}

impl LeviCivitaField {
    pub fn new(g: Arc<dyn MetricField>) -> Result<Self> {
        require_pd(g.as_ref())?;
        Ok(Self { g })
    }
}

impl ChristoffelField for LeviCivitaField {
    fn dim(&self) -> usize {
        self.g.dim()
    }

    fn kind(&self) -> ConnectionKind {
        ConnectionKind::Covariant
    }

    fn eval(&self, z: &PhaseState) -> Result<ChristoffelValue> {
        let n = self.dim();
        let ginv = self.g.eval(z).inverse()?;
        let dg = self.g.derivative(z);
        Ok(raise_first(&ginv, &lc_combination(&dg, n), n))
    }

    fn analytic_derivative(&self, z: &PhaseState) -> Option<Result<Vec<ChristoffelValue>>> {
        let dg = self.g.analytic_derivative(z)?;
        let d2g = self.g.analytic_second_derivative(z)?;
        let n = self.dim();
        Some((|| {
            let ginv = self.g.eval(z).inverse()?;
            let b = lc_combination(&dg, n);
            Ok((0..n)
                .map(|s| {
                    // ∂_s g^{-1} = −g^{-1} ∂_s g g^{-1}
                    let dginv = ginv.matmul(&dg[s]).matmul(&ginv).scale(-1.0);
                    let db = lc_combination(&d2g[s], n);
                    let a = raise_first(&dginv, &b, n);
                    let c = raise_first(&ginv, &db, n);
                    ChristoffelValue::from_fn(n, ConnectionKind::Covariant, |l, j, k| a.get(l, j, k) + c.get(l, j, k))
                })
                .collect())
        })())
    }
}

/// Levi-Civita symbols `Γ^l_{jk} = ½ g^{lr}(∂_j g_{rk} + ∂_k g_{rj} − ∂_r g_{jk})` at `z`.
pub fn levi_civita(g: Arc<dyn MetricField>, z: &PhaseState) -> Result<ChristoffelValue> {
    check_dims(g.dim(), &[z.dim()])?;
    LeviCivitaField::new(g)?.eval(z)
}

/// `R^{ijkl} = g^{jr} g^{ks} g^{lt} R^i_{rst}` with
/// `R^i_{jkl} = Γ^i_{rk}Γ^r_{jl} − Γ^i_{rl}Γ^r_{jk} + ∂_kΓ^i_{jl} − ∂_lΓ^i_{jk}`.
pub fn riemann_from_affine(gamma: &(impl ChristoffelField + ?Sized), g: &(impl MetricField + ?Sized), z: &PhaseState) -> Result<Rank4Value> {
    if gamma.kind() != ConnectionKind::Covariant {
        return Err(MetriplexError::InvalidParameter("riemann_from_affine needs covariant Christoffel symbols".into()));
    }
    let n = gamma.dim();
    check_dims(n, &[g.dim(), z.dim()])?;
    let ginv = g.eval(z).inverse()?;
    let gm = gamma.eval(z)?;
    let dgm = gamma.derivative(z)?;
    let mut low = Rank4Value::zeros(n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let mut v = dgm[k].get(i, j, l) - dgm[l].get(i, j, k);
                    for r in 0..n {
                        v += gm.get(i, r, k) * gm.get(r, j, l) - gm.get(i, r, l) * gm.get(r, j, k);
                    }
                    low.set(i, j, k, l, v);
                }
            }
        }
    }
    Ok(raise_last_three(&low, &ginv))
}

fn raise_last_three(low: &Rank4Value, ginv: &Rank2Value) -> Rank4Value {
    let n = low.dim();
    let a = Rank4Value::from_fn(n, |i, j, k, l| (0..n).map(|t| ginv.get(l, t) * low.get(i, j, k, t)).sum());
    let b = Rank4Value::from_fn(n, |i, j, k, l| (0..n).map(|s| ginv.get(k, s) * a.get(i, j, s, l)).sum());
    Rank4Value::from_fn(n, |i, j, k, l| (0..n).map(|r| ginv.get(j, r) * b.get(i, r, k, l)).sum())
}

/// Riemann curvature of the Levi-Civita connection of `g`, as a 4-bracket field.
#[derive(Clone)]
pub struct RiemannField {
    g: Arc<dyn MetricField>,
    gamma: LeviCivitaField,
    flags: FourBracketFlags,
}

impl RiemannField {
    pub fn new(g: Arc<dyn MetricField>) -> Result<Self> {
        let gamma = LeviCivitaField::new(g.clone())?;
        Ok(Self { g, gamma, flags: FourBracketFlags { algebraic: true, psd: false } })
    }

    pub fn with_flags(mut self, flags: FourBracketFlags) -> Self {
        self.flags = flags;
        self
    }
}

impl FourBracketField for RiemannField {
    fn dim(&self) -> usize {
        self.g.dim()
    }

    fn eval(&self, z: &PhaseState) -> Result<Rank4Value> {
        riemann_from_affine(&self.gamma, self.g.as_ref(), z)
    }

    fn flags(&self) -> FourBracketFlags {
        self.flags
    }

    fn symmetry_tolerance(&self) -> f64 {
        FD_CURVATURE_TOL
    }
}

/// `Σ_s J^{is}∂_s g^{jk} − J^{ks}∂_s g^{ij} + J^{js}∂_s g^{ik}`, stored at `(i, j, k)`.
fn j_dg_part(j: &Rank2Value, dg: &[Rank2Value], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n * n * n];
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                let mut v = 0.0;
                for s in 0..n {
                    v += j.get(a, s) * dg[s].get(b, c) - j.get(c, s) * dg[s].get(a, b) + j.get(b, s) * dg[s].get(a, c);
                }
                out[(a * n + b) * n + c] = v;
            }
        }
    }
    out
}

/// `Σ_s g^{ks}∂_s J^{ij} − g^{si}∂_s J^{jk} − g^{sj}∂_s J^{ik}`, stored at `(i, j, k)`.
fn g_dj_part(g: &Rank2Value, dj: &[Rank2Value], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n * n * n];
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                let mut v = 0.0;
                for s in 0..n {
                    v += g.get(c, s) * dj[s].get(a, b) - g.get(s, a) * dj[s].get(b, c) - g.get(s, b) * dj[s].get(a, c);
                }
                out[(a * n + b) * n + c] = v;
            }
        }
    }
    out
}

/// `½ g_{kl} A^{ijk}`, with `glow` the inverse of the contravariant metric.
fn lower_last(glow: &Rank2Value, a: &[f64], n: usize) -> ChristoffelValue {
    ChristoffelValue::from_fn(n, ConnectionKind::Contravariant, |i, j, l| {
        0.5 * (0..n).map(|k| glow.get(k, l) * a[(i * n + j) * n + k]).sum::<f64>()
    })
}

/// Contravariant Christoffel symbols `Γ^{ij}_l` of a Poisson tensor `J`
/// and a contravariant metric `g^{ij}`.
#[derive(Clone)]
pub struct ContravariantChristoffelField {
    j: Arc<dyn PoissonField>,
    g: Arc<dyn MetricField>,
}

impl ContravariantChristoffelField {
    pub fn new(j: Arc<dyn PoissonField>, g: Arc<dyn MetricField>) -> Result<Self> {
        check_dims(j.dim(), &[g.dim()])?;
        Ok(Self { j, g })
    }

    pub fn poisson(&self) -> &Arc<dyn PoissonField> {
        &self.j
    }

    pub fn metric(&self) -> &Arc<dyn MetricField> {
        &self.g
    }

    fn assemble(&self, jz: &Rank2Value, dj: &Rank2Derivative, gz: &Rank2Value, dg: &Rank2Derivative, glow: &Rank2Value) -> ChristoffelValue {
        let n = self.dim();
        let a1 = j_dg_part(jz, dg, n);
        let a2 = g_dj_part(gz, dj, n);
        let a: Vec<f64> = a1.iter().zip(&a2).map(|(x, y)| x + y).collect();
        lower_last(glow, &a, n)
    }
}

impl ChristoffelField for ContravariantChristoffelField {
    fn dim(&self) -> usize {
        self.j.dim()
    }

    fn kind(&self) -> ConnectionKind {
        ConnectionKind::Contravariant
    }

    fn eval(&self, z: &PhaseState) -> Result<ChristoffelValue> {
        let gz = self.g.eval(z);
        let glow = gz.inverse()?;
        Ok(self.assemble(&self.j.eval(z), &self.j.derivative(z), &gz, &self.g.derivative(z), &glow))
    }

    fn analytic_derivative(&self, z: &PhaseState) -> Option<Result<Vec<ChristoffelValue>>> {
        let dj = self.j.analytic_derivative(z)?;
        let d2j = self.j.analytic_second_derivative(z)?;
        let dg = self.g.analytic_derivative(z)?;
        let d2g = self.g.analytic_second_derivative(z)?;
        let n = self.dim();
        Some((|| {
            let (jz, gz) = (self.j.eval(z), self.g.eval(z));
            let glow = gz.inverse()?;
            let a: Vec<f64> = j_dg_part(&jz, &dg, n).iter().zip(g_dj_part(&gz, &dj, n)).map(|(x, y)| x + y).collect();
            Ok((0..n)
                .map(|t| {
                    // product rule on both factors of A and on g_{kl}
                    let da: Vec<f64> = [
                        j_dg_part(&dj[t], &dg, n),
                        j_dg_part(&jz, &d2g[t], n),
                        g_dj_part(&dg[t], &dj, n),
                        g_dj_part(&gz, &d2j[t], n),
                    ]
                    .iter()
                    .fold(vec![0.0; n * n * n], |acc, p| acc.iter().zip(p).map(|(x, y)| x + y).collect());
                    let dglow = glow.matmul(&dg[t]).matmul(&glow).scale(-1.0);
                    let p = lower_last(&dglow, &a, n);
                    let q = lower_last(&glow, &da, n);
                    ChristoffelValue::from_fn(n, ConnectionKind::Contravariant, |i, j, l| p.get(i, j, l) + q.get(i, j, l))
                })
                .collect())
        })())
    }
}

/// `Γ^{ij}_l` at `z` for Poisson tensor `J` and contravariant metric `g`.
pub fn contravariant_christoffel(j: Arc<dyn PoissonField>, g: Arc<dyn MetricField>, z: &PhaseState) -> Result<ChristoffelValue> {
    check_dims(j.dim(), &[z.dim()])?;
    ContravariantChristoffelField::new(j, g)?.eval(z)
}

/// Curvature 4-tensor of the contravariant connection of `(J, g)`.
///
/// With `R^{ijk}_l = Γ^{jk}_s Γ^{is}_l − Γ^{ik}_s Γ^{js}_l − ∂_sJ^{ij} Γ^{sk}_l
/// + J^{is}∂_sΓ^{jk}_l − J^{js}∂_sΓ^{ik}_l` the components of `R(dz^i, dz^j) dz^k`,
/// the bracket tensor is `R^{ijkl} = R^{ijl}_s g^{sk}`.
#[derive(Clone)]
pub struct ContravariantCurvatureField {
    gamma: ContravariantChristoffelField,
    flags: FourBracketFlags,
}

impl ContravariantCurvatureField {
    pub fn new(j: Arc<dyn PoissonField>, g: Arc<dyn MetricField>) -> Result<Self> {
        Ok(Self { gamma: ContravariantChristoffelField::new(j, g)?, flags: FourBracketFlags { algebraic: true, psd: false } })
    }

    pub fn with_flags(mut self, flags: FourBracketFlags) -> Self {
        self.flags = flags;
        self
    }

    pub fn connection(&self) -> &ContravariantChristoffelField {
        &self.gamma
    }
}

impl FourBracketField for ContravariantCurvatureField {
    fn dim(&self) -> usize {
        self.gamma.dim()
    }

    fn eval(&self, z: &PhaseState) -> Result<Rank4Value> {
        let n = self.dim();
        check_dims(n, &[z.dim()])?;
        let j = self.gamma.poisson();
        let (jz, dj) = (j.eval(z), j.derivative(z));
        let gz = self.gamma.metric().eval(z);
        let gm = self.gamma.eval(z)?;
        let dgm = self.gamma.derivative(z)?;
        // mixed[i][j][k][l] = R^{ijk}_l
        let mut mixed = Rank4Value::zeros(n);
        for i in 0..n {
            for jj in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let mut v = 0.0;
                        for s in 0..n {
                            v += gm.get(jj, k, s) * gm.get(i, s, l) - gm.get(i, k, s) * gm.get(jj, s, l) - dj[s].get(i, jj) * gm.get(s, k, l)
                                + jz.get(i, s) * dgm[s].get(jj, k, l)
                                - jz.get(jj, s) * dgm[s].get(i, k, l);
                        }
                        mixed.set(i, jj, k, l, v);
                    }
                }
            }
        }
        Ok(Rank4Value::from_fn(n, |i, jj, k, l| (0..n).map(|s| mixed.get(i, jj, l, s) * gz.get(s, k)).sum()))
    }

    fn flags(&self) -> FourBracketFlags {
        self.flags
    }

    fn symmetry_tolerance(&self) -> f64 {
        let j = self.gamma.poisson();
        let g = self.gamma.metric();
        let n = self.dim();
        let origin = PhaseState::new(vec![0.0; n]).expect("n >= 1");
        let analytic = j.analytic_second_derivative(&origin).is_some() && g.analytic_second_derivative(&origin).is_some();
        if analytic {
            crate::tensor::DEFAULT_ATOL
        } else {
            FD_CURVATURE_TOL
        }
    }
}

/// Curvature 4-tensor of `(J, g)` at `z`.
pub fn contravariant_curvature(j: Arc<dyn PoissonField>, g: Arc<dyn MetricField>, z: &PhaseState) -> Result<Rank4Value> {
    ContravariantCurvatureField::new(j, g)?.eval(z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::brackets::{levi_civita_symbol as eps, StructureConstants};
    use crate::field::{ConstantMetric, ConstantPoisson, Definiteness, FnMetric, FnPoisson, LiePoisson};
    use crate::tensor::{symmetry_defects, SymmetryTag};

    fn delta(i: usize, j: usize) -> f64 {
        if i == j {
            1.0
        } else {
            0.0
        }
    }

    fn so3() -> Arc<dyn PoissonField> {
        Arc::new(LiePoisson::new(StructureConstants::so3()))
    }

    fn euclid() -> Arc<dyn MetricField> {
        Arc::new(ConstantMetric::euclidean(3))
    }

    /// `diag(1, (z¹)²)`, the polar-coordinate metric of the plane.
    fn polar() -> FnMetric {
        FnMetric::new(2, Definiteness::PositiveDefinite, |z| Rank2Value::diagonal(&[1.0, z[0] * z[0]]))
    }

    #[test]
    fn levi_civita_examples() {
        let z = PhaseState::new(vec![2.0, 0.0]).unwrap();
        let g = levi_civita(Arc::new(ConstantMetric::euclidean(2)), &z).unwrap();
        assert_eq!(g.max_abs(), 0.0);
        let g = levi_civita(Arc::new(polar()), &z).unwrap();
        assert!((g.get(1, 0, 1) - 0.5).abs() < 1e-9);
        assert!((g.get(1, 1, 0) - 0.5).abs() < 1e-9);
        assert!((g.get(0, 1, 1) + 2.0).abs() < 1e-9);
        assert_eq!(g.lower_symmetry_defect(), 0.0);
    }

    #[test]
    fn flat_polar_coordinates_have_zero_curvature() {
        let g: Arc<dyn MetricField> = Arc::new(polar());
        let gamma = LeviCivitaField::new(g.clone()).unwrap();
        let r = riemann_from_affine(&gamma, g.as_ref(), &PhaseState::new(vec![1.5, 0.3]).unwrap()).unwrap();
        assert!(r.max_abs() < 1e-6, "{}", r.max_abs());
    }

    #[test]
    fn constant_affine_connection_uses_quadratic_terms_only() {
        let n = 2;
        let gm = ChristoffelValue::from_fn(n, ConnectionKind::Covariant, |a, b, c| 0.1 * (a + 2 * b + 3 * c) as f64 - 0.3);
        let gamma = ConstantConnection::new(gm.clone());
        let metric = ConstantMetric::euclidean(n);
        let r = riemann_from_affine(&gamma, &metric, &PhaseState::new(vec![0.0; n]).unwrap()).unwrap();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let mut v = 0.0;
                        for s in 0..n {
                            v += gm.get(i, s, k) * gm.get(s, j, l) - gm.get(i, s, l) * gm.get(s, j, k);
                        }
                        assert!((r.get(i, j, k, l) - v).abs() < 1e-15);
                    }
                }
            }
        }
    }

    #[test]
    fn so3_contravariant_christoffel() {
        let z = PhaseState::from([0.4, -0.2, 0.9]);
        let g = contravariant_christoffel(so3(), euclid(), &z).unwrap();
        let want = ChristoffelValue::from_fn(3, ConnectionKind::Contravariant, |i, j, k| -0.5 * eps(i, j, k));
        assert!(g.max_difference(&want) < 1e-15);
        let zero_j: Arc<dyn PoissonField> = Arc::new(ConstantPoisson::new(Rank2Value::zeros(3, SymmetryTag::Antisymmetric)).unwrap());
        assert_eq!(contravariant_christoffel(zero_j, euclid(), &z).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn euclidean_lie_poisson_christoffel_formula() {
        let c = StructureConstants::kida();
        let z = PhaseState::from([0.1, 0.7, -0.3]);
        let g = contravariant_christoffel(Arc::new(LiePoisson::new(c.clone())), euclid(), &z).unwrap();
        let want = ChristoffelValue::from_fn(3, ConnectionKind::Contravariant, |i, j, k| 0.5 * (c.get(i, j, k) - c.get(j, k, i) + c.get(k, i, j)));
        assert!(g.max_difference(&want) < 1e-15);
    }

    #[test]
    fn so3_curvature_is_quarter_delta_delta() {
        let dd = Rank4Value::from_fn(3, |i, j, k, l| 0.25 * (delta(i, k) * delta(j, l) - delta(i, l) * delta(j, k)));
        let z = PhaseState::from([0.4, -0.2, 0.9]);
        let r = contravariant_curvature(so3(), euclid(), &z).unwrap();
        assert!(r.max_difference(&dd) < 1e-15);
        // pure finite-difference path
        let lp = LiePoisson::new(StructureConstants::so3());
        let fd_j: Arc<dyn PoissonField> = Arc::new(FnPoisson::new(3, move |z| lp.eval(z)));
        let fd_g: Arc<dyn MetricField> = Arc::new(FnMetric::new(3, Definiteness::PositiveDefinite, |_| Rank2Value::identity(3)));
        let r = contravariant_curvature(fd_j, fd_g, &z).unwrap();
        assert!(r.max_difference(&dd) < 1e-6, "{}", r.max_difference(&dd));
    }

    #[test]
    fn canonical_poisson_with_constant_metric_is_flat() {
        let j: Arc<dyn PoissonField> = Arc::new(ConstantPoisson::canonical(2));
        let g = Rank2Value::from_rows(
            &[vec![2.0, 0.1, 0.0, 0.0], vec![0.1, 1.0, 0.0, 0.3], vec![0.0, 0.0, 1.5, 0.0], vec![0.0, 0.3, 0.0, 1.0]],
            SymmetryTag::Symmetric,
        )
        .unwrap();
        let r = contravariant_curvature(j, Arc::new(ConstantMetric::new(g).unwrap()), &PhaseState::new(vec![0.2; 4]).unwrap()).unwrap();
        assert_eq!(r.max_abs(), 0.0);
    }

    #[test]
    fn analytic_and_finite_difference_connections_agree() {
        // a state-dependent metric with a hand-written derivative
        let eval = |z: &PhaseState| Rank2Value::diagonal(&[1.0 + z[0] * z[0], 2.0 + z[1], 1.0 + 0.5 * z[2] * z[2]]);
        let deriv = |z: &PhaseState| -> Rank2Derivative {
            vec![Rank2Value::diagonal(&[2.0 * z[0], 0.0, 0.0]), Rank2Value::diagonal(&[0.0, 1.0, 0.0]), Rank2Value::diagonal(&[0.0, 0.0, z[2]])]
        };
        let second = |_: &PhaseState| {
            let mut d = vec![vec![Rank2Value::zeros(3, SymmetryTag::Symmetric); 3]; 3];
            d[0][0] = Rank2Value::diagonal(&[2.0, 0.0, 0.0]);
            d[2][2] = Rank2Value::diagonal(&[0.0, 0.0, 1.0]);
            d
        };
        let analytic: Arc<dyn MetricField> =
            Arc::new(FnMetric::new(3, Definiteness::PositiveDefinite, eval).with_derivative(deriv).with_second_derivative(second));
        let fd: Arc<dyn MetricField> = Arc::new(FnMetric::new(3, Definiteness::PositiveDefinite, eval));
        let z = PhaseState::from([0.3, 0.5, -0.8]);
        let a = ContravariantChristoffelField::new(so3(), analytic.clone()).unwrap();
        let f = ContravariantChristoffelField::new(so3(), fd.clone()).unwrap();
        assert!(a.has_analytic_derivative(&z) && !f.has_analytic_derivative(&z));
        assert!(a.eval(&z).unwrap().max_difference(&f.eval(&z).unwrap()) < 1e-8);
        for (x, y) in a.derivative(&z).unwrap().iter().zip(f.derivative(&z).unwrap()) {
            assert!(x.max_difference(&y) < 1e-5);
        }
        let la = LeviCivitaField::new(analytic.clone()).unwrap();
        let lf = LeviCivitaField::new(fd.clone()).unwrap();
        for (x, y) in la.derivative(&z).unwrap().iter().zip(lf.derivative(&z).unwrap()) {
            assert!(x.max_difference(&y) < 1e-5);
        }
        let r = ContravariantCurvatureField::new(so3(), analytic).unwrap();
        let d = symmetry_defects(&r.eval(&z).unwrap());
        assert!(d.max() < 1e-10, "{d:?}");
    }

    #[test]
    fn levi_civita_rejects_indefinite_metric() {
        let g = ConstantMetric::new(Rank2Value::diagonal(&[1.0, -1.0])).unwrap();
        assert!(LeviCivitaField::new(Arc::new(g)).is_err());
    }
}
