//! Dense small-dimension tensor values and the index-symmetry algebra.
//!
//! All tensors are stored densely in row-major order. Rank-4 entries are
//! indexed `(i, j, k, l)` in the bracket slot order `(f, k; g, n)`, so
//! `contract4(R, df, dk, dg, dn)` evaluates the 4-bracket `(f, k; g, n)`.

use std::fmt;
use std::ops::{Add, Index, Mul, Sub};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{MetriplexError, Result};

/// Absolute tolerance used for symmetry tags unless a call overrides it.
pub const DEFAULT_ATOL: f64 = 1e-10;

/// A point `z = (z^1, ..., z^N)` of phase space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseState(Vec<f64>);

impl PhaseState {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(MetriplexError::InvalidState("phase state must have N >= 1".into()));
        }
        if let Some(i) = coords.iter().position(|x| !x.is_finite()) {
            return Err(MetriplexError::InvalidState(format!("coordinate {} is not finite", i + 1)));
        }
        Ok(Self(coords))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// Copy of this state with coordinate `i` shifted by `delta`.
    pub fn shifted(&self, i: usize, delta: f64) -> Self {
        let mut c = self.0.clone();
        c[i] += delta;
        Self(c)
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

impl Index<usize> for PhaseState {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl From<[f64; 3]> for PhaseState {
    fn from(v: [f64; 3]) -> Self {
        Self(v.to_vec())
    }
}

/// Components of a 1-form, typically a gradient `∂f/∂z^i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovectorValue(Vec<f64>);

impl CovectorValue {
    pub fn new(entries: Vec<f64>) -> Self {
        Self(entries)
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    /// The coordinate 1-form `dz^i` in `n` dimensions.
    pub fn basis(n: usize, i: usize) -> Self {
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        Self(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn dot(&self, other: &[f64]) -> f64 {
        dot(&self.0, other)
    }

    pub fn norm(&self) -> f64 {
        self.dot(&self.0).sqrt()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self(self.0.iter().map(|x| s * x).collect())
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }
}

impl Index<usize> for CovectorValue {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl Add for &CovectorValue {
    type Output = CovectorValue;
    fn add(self, rhs: &CovectorValue) -> CovectorValue {
        CovectorValue(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn max_abs(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Index-symmetry declared for a rank-2 value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SymmetryTag {
    Antisymmetric,
    Symmetric,
    None,
}

impl fmt::Display for SymmetryTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SymmetryTag::Antisymmetric => f.write_str("antisymmetric"),
            SymmetryTag::Symmetric => f.write_str("symmetric"),
            SymmetryTag::None => f.write_str("none"),
        }
    }
}

/// An `N×N` matrix value (Poisson tensor, G-metric, metric) with a symmetry tag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rank2Value {
    n: usize,
    entries: Vec<f64>,
    tag: SymmetryTag,
}

impl Rank2Value {
    /// Builds a value and checks the tag against [`DEFAULT_ATOL`].
    pub fn new(n: usize, entries: Vec<f64>, tag: SymmetryTag) -> Result<Self> {
        Self::with_tolerance(n, entries, tag, DEFAULT_ATOL)
    }

    pub fn with_tolerance(n: usize, entries: Vec<f64>, tag: SymmetryTag, atol: f64) -> Result<Self> {
        if entries.len() != n * n {
            return Err(MetriplexError::DimensionMismatch { expected: n * n, found: entries.len() });
        }
        if entries.iter().any(|x| !x.is_finite()) {
            return Err(MetriplexError::NonFinite("rank-2 entries".into()));
        }
        let v = Self { n, entries, tag: SymmetryTag::None };
        let defect = match tag {
            SymmetryTag::Antisymmetric => v.antisymmetry_defect(),
            SymmetryTag::Symmetric => v.symmetry_defect(),
            SymmetryTag::None => 0.0,
        };
        if defect > atol {
            return Err(MetriplexError::SymmetryViolation { what: format!("{tag} rank-2 tag"), defect, tolerance: atol });
        }
        Ok(Self { tag, ..v })
    }

    pub fn from_rows(rows: &[Vec<f64>], tag: SymmetryTag) -> Result<Self> {
        let n = rows.len();
        if let Some(r) = rows.iter().find(|r| r.len() != n) {
            return Err(MetriplexError::DimensionMismatch { expected: n, found: r.len() });
        }
        Self::new(n, rows.concat(), tag)
    }

    pub fn from_fn(n: usize, tag: SymmetryTag, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                entries.push(f(i, j));
            }
        }
        Self { n, entries, tag }
    }

    pub fn zeros(n: usize, tag: SymmetryTag) -> Self {
        Self { n, entries: vec![0.0; n * n], tag }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, SymmetryTag::Symmetric, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn diagonal(d: &[f64]) -> Self {
        Self::from_fn(d.len(), SymmetryTag::Symmetric, |i, j| if i == j { d[i] } else { 0.0 })
    }

    /// The canonical symplectic tensor `[[0, I], [-I, 0]]` in `2m` dimensions.
    pub fn canonical(m: usize) -> Self {
        Self::from_fn(2 * m, SymmetryTag::Antisymmetric, |i, j| {
            if j == i + m {
                1.0
            } else if i == j + m {
                -1.0
            } else {
                0.0
            }
        })
    }

    /// `a ⊗ b`.
    pub fn outer(a: &[f64], b: &[f64], tag: SymmetryTag) -> Self {
        let n = a.len();
        Self::from_fn(n, tag, |i, j| a[i] * b[j])
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn tag(&self) -> SymmetryTag {
        self.tag
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    pub fn symmetry_defect(&self) -> f64 {
        self.pair_defect(|a, b| a - b)
    }

    pub fn antisymmetry_defect(&self) -> f64 {
        self.pair_defect(|a, b| a + b)
    }

    fn pair_defect(&self, op: impl Fn(f64, f64) -> f64) -> f64 {
        let n = self.n;
        let mut d: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                d = d.max(op(self.get(i, j), self.get(j, i)).abs());
            }
        }
        d
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(self.entries.iter().copied())
    }

    /// `M v` (contracting the second index).
    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.n).map(|i| dot(self.row(i), v)).collect()
    }

    /// `a_i M^{ij} b_j`.
    ///
    /// Antisymmetric tensors pair `(i, j)` with `(j, i)`, so `M(a, a)` is
    /// exactly zero.
    pub fn bilinear(&self, a: &[f64], b: &[f64]) -> f64 {
        if self.tag == SymmetryTag::Antisymmetric {
            let mut s = 0.0;
            for i in 0..self.n {
                for j in i + 1..self.n {
                    s += self.get(i, j) * (a[i] * b[j] - a[j] * b[i]);
                }
            }
            return s;
        }
        dot(a, &self.matvec(b))
    }

    pub fn transpose(&self) -> Self {
        let tag = self.tag;
        Self::from_fn(self.n, tag, |i, j| self.get(j, i))
    }

    pub fn matmul(&self, other: &Rank2Value) -> Rank2Value {
        let n = self.n;
        Self::from_fn(n, SymmetryTag::None, |i, j| (0..n).map(|k| self.get(i, k) * other.get(k, j)).sum())
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { n: self.n, entries: self.entries.iter().map(|x| s * x).collect(), tag: self.tag }
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.n, self.n, &self.entries)
    }

    pub fn from_matrix(m: &DMatrix<f64>, tag: SymmetryTag) -> Self {
        let n = m.nrows();
        Self::from_fn(n, tag, |i, j| m[(i, j)])
    }

    /// Matrix inverse; fails when the matrix is numerically singular.
    pub fn inverse(&self) -> Result<Rank2Value> {
        let m = self.to_matrix();
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        let svd = m.clone().svd(false, false);
        let smin = svd.singular_values.iter().copied().fold(f64::INFINITY, f64::min);
        if smin <= 1e-12 * scale {
            return Err(MetriplexError::SingularMetric { smallest_singular_value: smin });
        }
        let inv = m.try_inverse().ok_or(MetriplexError::SingularMetric { smallest_singular_value: smin })?;
        let mut out = Self::from_matrix(&inv, self.tag);
        if self.tag == SymmetryTag::Symmetric {
            out = out.symmetrized();
        }
        Ok(out)
    }

    /// `(M + Mᵀ)/2`, tagged symmetric.
    pub fn symmetrized(&self) -> Rank2Value {
        Self::from_fn(self.n, SymmetryTag::Symmetric, |i, j| 0.5 * (self.get(i, j) + self.get(j, i)))
    }

    /// Eigenvalues of the symmetric part, ascending.
    pub fn symmetric_eigenvalues(&self) -> Vec<f64> {
        let m = self.symmetrized().to_matrix();
        let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }
}

impl Add for &Rank2Value {
    type Output = Rank2Value;
    fn add(self, rhs: &Rank2Value) -> Rank2Value {
        let tag = if self.tag == rhs.tag { self.tag } else { SymmetryTag::None };
        Rank2Value::from_fn(self.n, tag, |i, j| self.get(i, j) + rhs.get(i, j))
    }
}

impl Sub for &Rank2Value {
    type Output = Rank2Value;
    fn sub(self, rhs: &Rank2Value) -> Rank2Value {
        let tag = if self.tag == rhs.tag { self.tag } else { SymmetryTag::None };
        Rank2Value::from_fn(self.n, tag, |i, j| self.get(i, j) - rhs.get(i, j))
    }
}

/// A dense `N^4` array indexed `(i, j, k, l)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rank4Value {
    n: usize,
    entries: Vec<f64>,
}

impl Rank4Value {
    pub fn new(n: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != n.pow(4) {
            return Err(MetriplexError::DimensionMismatch { expected: n.pow(4), found: entries.len() });
        }
        if entries.iter().any(|x| !x.is_finite()) {
            return Err(MetriplexError::NonFinite("rank-4 entries".into()));
        }
        Ok(Self { n, entries })
    }

    pub fn zeros(n: usize) -> Self {
        Self { n, entries: vec![0.0; n.pow(4)] }
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize, usize, usize) -> f64) -> Self {
        let mut entries = Vec::with_capacity(n.pow(4));
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        entries.push(f(i, j, k, l));
                    }
                }
            }
        }
        Self { n, entries }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    #[inline]
    fn offset(&self, i: usize, j: usize, k: usize, l: usize) -> usize {
        ((i * self.n + j) * self.n + k) * self.n + l
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.entries[self.offset(i, j, k, l)]
    }

    pub fn set(&mut self, i: usize, j: usize, k: usize, l: usize, v: f64) {
        let o = self.offset(i, j, k, l);
        self.entries[o] = v;
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(self.entries.iter().copied())
    }

    /// Largest entrywise difference to `other`.
    pub fn max_difference(&self, other: &Rank4Value) -> f64 {
        max_abs(self.entries.iter().zip(&other.entries).map(|(a, b)| a - b))
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { n: self.n, entries: self.entries.iter().map(|x| s * x).collect() }
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().all(|x| x.is_finite())
    }

    /// Contracts the second and fourth slots with `h`: `R^{ijkl} h_j h_l`.
    pub fn contract_24(&self, h: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                let mut s = 0.0;
                for j in 0..n {
                    if h[j] == 0.0 {
                        continue;
                    }
                    for l in 0..n {
                        s += self.get(i, j, k, l) * h[j] * h[l];
                    }
                }
                out[i * n + k] = s;
            }
        }
        out
    }

    /// Contracts the third and fourth slots: `R^{ijkl} a_k b_l`.
    pub fn contract_34(&self, a: &[f64], b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let mut s = 0.0;
                for k in 0..n {
                    for l in 0..n {
                        s += self.get(i, j, k, l) * a[k] * b[l];
                    }
                }
                out[i * n + j] = s;
            }
        }
        out
    }
}

impl Add for &Rank4Value {
    type Output = Rank4Value;
    fn add(self, rhs: &Rank4Value) -> Rank4Value {
        Rank4Value { n: self.n, entries: self.entries.iter().zip(&rhs.entries).map(|(a, b)| a + b).collect() }
    }
}

impl Sub for &Rank4Value {
    type Output = Rank4Value;
    fn sub(self, rhs: &Rank4Value) -> Rank4Value {
        Rank4Value { n: self.n, entries: self.entries.iter().zip(&rhs.entries).map(|(a, b)| a - b).collect() }
    }
}

impl Mul<f64> for &Rank4Value {
    type Output = Rank4Value;
    fn mul(self, s: f64) -> Rank4Value {
        self.scale(s)
    }
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(MetriplexError::DimensionMismatch { expected, found });
    }
    Ok(())
}

pub(crate) fn check_dims(expected: usize, found: &[usize]) -> Result<()> {
    found.iter().try_for_each(|&f| check_dim(expected, f))
}

/// `Σ R^{ijkl} a_i b_j c_k d_l`.
pub fn contract4(r: &Rank4Value, a: &CovectorValue, b: &CovectorValue, c: &CovectorValue, d: &CovectorValue) -> Result<f64> {
    check_dims(r.dim(), &[a.dim(), b.dim(), c.dim(), d.dim()])?;
    Ok(contract4_raw(r, a.entries(), b.entries(), c.entries(), d.entries()))
}

pub(crate) fn contract4_raw(r: &Rank4Value, a: &[f64], b: &[f64], c: &[f64], d: &[f64]) -> f64 {
    let n = r.dim();
    let mut total = 0.0;
    for i in 0..n {
        if a[i] == 0.0 {
            continue;
        }
        for j in 0..n {
            if b[j] == 0.0 {
                continue;
            }
            let ab = a[i] * b[j];
            for k in 0..n {
                if c[k] == 0.0 {
                    continue;
                }
                let mut s = 0.0;
                for l in 0..n {
                    s += r.get(i, j, k, l) * d[l];
                }
                total += ab * c[k] * s;
            }
        }
    }
    total
}

/// Maximal violations of the four algebraic curvature identities.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SymmetryDefects {
    /// `max |R^{ijkl} + R^{jikl}|`
    pub d12: f64,
    /// `max |R^{ijkl} + R^{ijlk}|`
    pub d34: f64,
    /// `max |R^{ijkl} - R^{klij}|`
    pub dpair: f64,
    /// `max |R^{ijkl} + R^{iklj} + R^{iljk}|`
    pub dcyclic: f64,
}

impl SymmetryDefects {
    /// Largest of the three defects that define a minimal metriplectic tensor.
    pub fn minimal(&self) -> f64 {
        self.d12.max(self.d34).max(self.dpair)
    }

    pub fn max(&self) -> f64 {
        self.minimal().max(self.dcyclic)
    }

    pub fn merge(&self, other: &SymmetryDefects) -> SymmetryDefects {
        SymmetryDefects {
            d12: self.d12.max(other.d12),
            d34: self.d34.max(other.d34),
            dpair: self.dpair.max(other.dpair),
            dcyclic: self.dcyclic.max(other.dcyclic),
        }
    }
}

pub fn symmetry_defects(r: &Rank4Value) -> SymmetryDefects {
    let n = r.dim();
    let mut d = SymmetryDefects::default();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let v = r.get(i, j, k, l);
                    d.d12 = d.d12.max((v + r.get(j, i, k, l)).abs());
                    d.d34 = d.d34.max((v + r.get(i, j, l, k)).abs());
                    d.dpair = d.dpair.max((v - r.get(k, l, i, j)).abs());
                    d.dcyclic = d.dcyclic.max((v + r.get(i, k, l, j) + r.get(i, l, j, k)).abs());
                }
            }
        }
    }
    d
}

/// Fails with the first minimal-metriplectic identity that `r` violates beyond `atol`.
pub fn require_minimal_metriplectic(r: &Rank4Value, atol: f64) -> Result<SymmetryDefects> {
    let d = symmetry_defects(r);
    for (what, defect) in [
        ("antisymmetry in the first pair", d.d12),
        ("antisymmetry in the second pair", d.d34),
        ("pair-interchange symmetry", d.dpair),
    ] {
        if defect > atol {
            return Err(MetriplexError::SymmetryViolation { what: what.into(), defect, tolerance: atol });
        }
    }
    Ok(d)
}

/// The totally antisymmetric cyclic part `T^{ijkl} = (A^{ijkl} + A^{iklj} + A^{iljk}) / 3`.
///
/// `A` must be minimal metriplectic within `atol`; otherwise `T` is not
/// totally antisymmetric and the call fails naming the broken identity.
pub fn cyclic_part(a: &Rank4Value, atol: f64) -> Result<Rank4Value> {
    require_minimal_metriplectic(a, atol)?;
    Ok(Rank4Value::from_fn(a.dim(), |i, j, k, l| {
        (a.get(i, j, k, l) + a.get(i, k, l, j) + a.get(i, l, j, k)) / 3.0
    }))
}

/// Max violation of total antisymmetry over all transpositions.
pub fn total_antisymmetry_defect(t: &Rank4Value) -> f64 {
    let n = t.dim();
    let mut d: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let v = t.get(i, j, k, l);
                    d = d
                        .max((v + t.get(j, i, k, l)).abs())
                        .max((v + t.get(i, k, j, l)).abs())
                        .max((v + t.get(i, j, l, k)).abs())
                        .max((v + t.get(l, j, k, i)).abs());
                }
            }
        }
    }
    d
}
