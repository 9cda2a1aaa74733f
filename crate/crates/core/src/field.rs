//! State-dependent scalar and tensor fields over phase space.
//!
//! Every field reports its dimension and evaluates pointwise. Derivative
//! oracles are optional; when absent, central finite differences are used
//! (see [`crate::diff`]).

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::brackets::StructureConstants;
use crate::diff::{self, central_gradient, central_jacobian};
use crate::error::Result;
use crate::tensor::{CovectorValue, PhaseState, Rank2Value, Rank4Value, SymmetryTag};

/// `∂_s T` for `s = 0..N`, each entry an `N×N` value.
pub type Rank2Derivative = Vec<Rank2Value>;
/// `∂_s ∂_t T`, indexed `[s][t]`.
pub type Rank2SecondDerivative = Vec<Vec<Rank2Value>>;

pub trait ScalarField: Send + Sync {
    fn dim(&self) -> usize;

    fn value(&self, z: &PhaseState) -> f64;

    /// Exact gradient, when the field knows it.
    fn analytic_gradient(&self, _z: &PhaseState) -> Option<CovectorValue> {
        None
    }

    fn gradient(&self, z: &PhaseState) -> CovectorValue {
        self.analytic_gradient(z).unwrap_or_else(|| self.fd_gradient(z))
    }

    fn fd_gradient(&self, z: &PhaseState) -> CovectorValue {
        CovectorValue::new(central_gradient(z, |p| self.value(p)))
    }
}

/// A real polynomial `Σ c_m Π z_i^{p_i}` with exact gradient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    dim: usize,
    terms: Vec<Monomial>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub coeff: f64,
    pub powers: Vec<u32>,
}

impl Polynomial {
    pub fn new(dim: usize, terms: Vec<Monomial>) -> Result<Self> {
        if let Some(t) = terms.iter().find(|t| t.powers.len() != dim) {
            return Err(crate::MetriplexError::DimensionMismatch { expected: dim, found: t.powers.len() });
        }
        Ok(Self { dim, terms })
    }

    pub fn zero(dim: usize) -> Self {
        Self { dim, terms: Vec::new() }
    }

    pub fn constant(dim: usize, c: f64) -> Self {
        Self { dim, terms: vec![Monomial { coeff: c, powers: vec![0; dim] }] }
    }

    /// The coordinate function `z^i`.
    pub fn coordinate(dim: usize, i: usize) -> Self {
        Self::linear(&CovectorValue::basis(dim, i).into_inner())
    }

    pub fn linear(b: &[f64]) -> Self {
        let dim = b.len();
        let terms = b
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0.0)
            .map(|(i, &c)| {
                let mut powers = vec![0; dim];
                powers[i] = 1;
                Monomial { coeff: c, powers }
            })
            .collect();
        Self { dim, terms }
    }

    /// `½ zᵀ Q z` for a symmetric `Q`.
    pub fn quadratic(q: &Rank2Value) -> Self {
        let n = q.dim();
        let mut terms = Vec::new();
        for i in 0..n {
            for j in i..n {
                let c = if i == j { 0.5 * q.get(i, i) } else { 0.5 * (q.get(i, j) + q.get(j, i)) };
                if c == 0.0 {
                    continue;
                }
                let mut powers = vec![0; n];
                powers[i] += 1;
                powers[j] += 1;
                terms.push(Monomial { coeff: c, powers });
            }
        }
        Self { dim: n, terms }
    }

    /// `|z|^(2p)`, expanded.
    pub fn norm_squared_power(dim: usize, p: u32) -> Self {
        let base = Self::quadratic(&Rank2Value::identity(dim).scale(2.0));
        (1..p).fold(base.clone(), |acc, _| acc.mul(&base))
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Self { dim: self.dim, terms }
    }

    pub fn scale(&self, s: f64) -> Polynomial {
        Self { dim: self.dim, terms: self.terms.iter().map(|t| Monomial { coeff: s * t.coeff, powers: t.powers.clone() }).collect() }
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                terms.push(Monomial { coeff: a.coeff * b.coeff, powers: a.powers.iter().zip(&b.powers).map(|(x, y)| x + y).collect() });
            }
        }
        Self { dim: self.dim, terms }
    }

    pub fn terms(&self) -> &[Monomial] {
        &self.terms
    }
}

impl ScalarField for Polynomial {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, z: &PhaseState) -> f64 {
        self.terms
            .iter()
            .map(|t| t.coeff * t.powers.iter().enumerate().map(|(i, &p)| z[i].powi(p as i32)).product::<f64>())
            .sum()
    }

    fn analytic_gradient(&self, z: &PhaseState) -> Option<CovectorValue> {
        let mut g = vec![0.0; self.dim];
        for t in &self.terms {
            for (i, gi) in g.iter_mut().enumerate() {
                let p = t.powers[i];
                if p == 0 {
                    continue;
                }
                let mut prod = t.coeff * p as f64;
                for (m, &q) in t.powers.iter().enumerate() {
                    let e = if m == i { q - 1 } else { q };
                    prod *= z[m].powi(e as i32);
                }
                *gi += prod;
            }
        }
        Some(CovectorValue::new(g))
    }
}

type ValueFn = dyn Fn(&PhaseState) -> f64 + Send + Sync;
type GradFn = dyn Fn(&PhaseState) -> Vec<f64> + Send + Sync;

/// A scalar field backed by closures; the gradient is optional.
#[derive(Clone)]
pub struct FnField {
    dim: usize,
    value: Arc<ValueFn>,
    gradient: Option<Arc<GradFn>>,
}

impl FnField {
    pub fn new(dim: usize, value: impl Fn(&PhaseState) -> f64 + Send + Sync + 'static) -> Self {
        Self { dim, value: Arc::new(value), gradient: None }
    }

    pub fn with_gradient(mut self, gradient: impl Fn(&PhaseState) -> Vec<f64> + Send + Sync + 'static) -> Self {
        self.gradient = Some(Arc::new(gradient));
        self
    }
}

impl fmt::Debug for FnField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnField").field("dim", &self.dim).field("analytic_gradient", &self.gradient.is_some()).finish()
    }
}

impl ScalarField for FnField {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, z: &PhaseState) -> f64 {
        (self.value)(z)
    }

    fn analytic_gradient(&self, z: &PhaseState) -> Option<CovectorValue> {
        self.gradient.as_ref().map(|g| CovectorValue::new(g(z)))
    }
}

/// Finite-difference `∂_s T` for a rank-2 valued map.
pub fn fd_rank2_derivative(z: &PhaseState, tag: SymmetryTag, nested: bool, f: impl Fn(&PhaseState) -> Rank2Value) -> Rank2Derivative {
    let n = z.dim();
    let h = if nested { diff::nested_step } else { diff::step };
    central_jacobian(z, h, |p| f(p).entries().to_vec())
        .into_iter()
        .map(|d| Rank2Value::from_fn(n, tag, |i, j| d[i * n + j]))
        .collect()
}

/// The Poisson tensor `J^{ij}(z)`.
pub trait PoissonField: Send + Sync {
    fn dim(&self) -> usize;

    fn eval(&self, z: &PhaseState) -> Rank2Value;

    fn analytic_derivative(&self, _z: &PhaseState) -> Option<Rank2Derivative> {
        None
    }

    fn analytic_second_derivative(&self, _z: &PhaseState) -> Option<Rank2SecondDerivative> {
        None
    }

    /// `∂_s J^{ij}`, indexed `[s]`.
    fn derivative(&self, z: &PhaseState) -> Rank2Derivative {
        self.analytic_derivative(z)
            .unwrap_or_else(|| fd_rank2_derivative(z, SymmetryTag::Antisymmetric, false, |p| self.eval(p)))
    }
}

/// Lie–Poisson tensor `J^{ij} = c^{ij}_k z^k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiePoisson {
    constants: StructureConstants,
}

impl LiePoisson {
    pub fn new(constants: StructureConstants) -> Self {
        Self { constants }
    }

    pub fn constants(&self) -> &StructureConstants {
        &self.constants
    }
}

impl PoissonField for LiePoisson {
    fn dim(&self) -> usize {
        self.constants.dim()
    }

    fn eval(&self, z: &PhaseState) -> Rank2Value {
        crate::brackets::lie_poisson_tensor(&self.constants, z)
    }

    fn analytic_derivative(&self, _z: &PhaseState) -> Option<Rank2Derivative> {
        let c = &self.constants;
        let n = c.dim();
        Some((0..n).map(|s| Rank2Value::from_fn(n, SymmetryTag::Antisymmetric, |i, j| c.get(i, j, s))).collect())
    }

    fn analytic_second_derivative(&self, _z: &PhaseState) -> Option<Rank2SecondDerivative> {
        let n = self.dim();
        Some(vec![vec![Rank2Value::zeros(n, SymmetryTag::Antisymmetric); n]; n])
    }
}

/// A state-independent Poisson tensor, e.g. the canonical symplectic form.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstantPoisson {
    j: Rank2Value,
}

impl ConstantPoisson {
    pub fn new(j: Rank2Value) -> Result<Self> {
        let j = Rank2Value::new(j.dim(), j.entries().to_vec(), SymmetryTag::Antisymmetric)?;
        Ok(Self { j })
    }

    pub fn canonical(m: usize) -> Self {
        Self { j: Rank2Value::canonical(m) }
    }
}

impl PoissonField for ConstantPoisson {
    fn dim(&self) -> usize {
        self.j.dim()
    }

    fn eval(&self, _z: &PhaseState) -> Rank2Value {
        self.j.clone()
    }

    fn analytic_derivative(&self, _z: &PhaseState) -> Option<Rank2Derivative> {
        Some(vec![Rank2Value::zeros(self.dim(), SymmetryTag::Antisymmetric); self.dim()])
    }

    fn analytic_second_derivative(&self, _z: &PhaseState) -> Option<Rank2SecondDerivative> {
        let n = self.dim();
        Some(vec![vec![Rank2Value::zeros(n, SymmetryTag::Antisymmetric); n]; n])
    }
}

type Rank2Fn = dyn Fn(&PhaseState) -> Rank2Value + Send + Sync;
type Rank2DerivFn = dyn Fn(&PhaseState) -> Rank2Derivative + Send + Sync;
type Rank2SecondFn = dyn Fn(&PhaseState) -> Rank2SecondDerivative + Send + Sync;

/// A Poisson tensor given by a closure; derivatives are finite-differenced.
#[derive(Clone)]
pub struct FnPoisson {
    dim: usize,
    eval: Arc<Rank2Fn>,
}

impl FnPoisson {
    pub fn new(dim: usize, eval: impl Fn(&PhaseState) -> Rank2Value + Send + Sync + 'static) -> Self {
        Self { dim, eval: Arc::new(eval) }
    }
}

impl fmt::Debug for FnPoisson {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnPoisson").field("dim", &self.dim).finish()
    }
}

impl PoissonField for FnPoisson {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, z: &PhaseState) -> Rank2Value {
        (self.eval)(z)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Definiteness {
    PositiveDefinite,
    PositiveSemidefinite,
    Indefinite,
}

impl Definiteness {
    /// Classifies the symmetric part of `g` by its eigenvalues.
    pub fn classify(g: &Rank2Value) -> Self {
        let ev = g.symmetric_eigenvalues();
        let scale = ev.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(f64::MIN_POSITIVE);
        let tol = 1e-12 * scale;
        if ev.iter().all(|&x| x > tol) {
            Definiteness::PositiveDefinite
        } else if ev.iter().all(|&x| x >= -tol) {
            Definiteness::PositiveSemidefinite
        } else {
            Definiteness::Indefinite
        }
    }

    pub fn is_psd(self) -> bool {
        !matches!(self, Definiteness::Indefinite)
    }
}

/// A symmetric rank-2 metric field. Which index placement it represents
/// (`g_{ij}` or `g^{ij}`) is fixed by the constructor that consumes it.
pub trait MetricField: Send + Sync {
    fn dim(&self) -> usize;

    fn eval(&self, z: &PhaseState) -> Rank2Value;

    fn definiteness(&self) -> Definiteness;

    fn analytic_derivative(&self, _z: &PhaseState) -> Option<Rank2Derivative> {
        None
    }

    fn analytic_second_derivative(&self, _z: &PhaseState) -> Option<Rank2SecondDerivative> {
        None
    }

    fn derivative(&self, z: &PhaseState) -> Rank2Derivative {
        self.analytic_derivative(z)
            .unwrap_or_else(|| fd_rank2_derivative(z, SymmetryTag::Symmetric, false, |p| self.eval(p)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstantMetric {
    g: Rank2Value,
    definiteness: Definiteness,
}

impl ConstantMetric {
    pub fn new(g: Rank2Value) -> Result<Self> {
        let g = Rank2Value::new(g.dim(), g.entries().to_vec(), SymmetryTag::Symmetric)?;
        let definiteness = Definiteness::classify(&g);
        Ok(Self { g, definiteness })
    }

    pub fn euclidean(n: usize) -> Self {
        Self { g: Rank2Value::identity(n), definiteness: Definiteness::PositiveDefinite }
    }

    pub fn value(&self) -> &Rank2Value {
        &self.g
    }
}

impl MetricField for ConstantMetric {
    fn dim(&self) -> usize {
        self.g.dim()
    }

    fn eval(&self, _z: &PhaseState) -> Rank2Value {
        self.g.clone()
    }

    fn definiteness(&self) -> Definiteness {
        self.definiteness
    }

    fn analytic_derivative(&self, _z: &PhaseState) -> Option<Rank2Derivative> {
        Some(vec![Rank2Value::zeros(self.dim(), SymmetryTag::Symmetric); self.dim()])
    }

    fn analytic_second_derivative(&self, _z: &PhaseState) -> Option<Rank2SecondDerivative> {
        let n = self.dim();
        Some(vec![vec![Rank2Value::zeros(n, SymmetryTag::Symmetric); n]; n])
    }
}

/// A metric given by closures; first and second derivatives are optional.
#[derive(Clone)]
pub struct FnMetric {
    dim: usize,
    definiteness: Definiteness,
    eval: Arc<Rank2Fn>,
    derivative: Option<Arc<Rank2DerivFn>>,
    second: Option<Arc<Rank2SecondFn>>,
}

impl FnMetric {
    pub fn new(dim: usize, definiteness: Definiteness, eval: impl Fn(&PhaseState) -> Rank2Value + Send + Sync + 'static) -> Self {
        Self { dim, definiteness, eval: Arc::new(eval), derivative: None, second: None }
    }

    pub fn with_derivative(mut self, d: impl Fn(&PhaseState) -> Rank2Derivative + Send + Sync + 'static) -> Self {
        self.derivative = Some(Arc::new(d));
        self
    }

    pub fn with_second_derivative(mut self, d: impl Fn(&PhaseState) -> Rank2SecondDerivative + Send + Sync + 'static) -> Self {
        self.second = Some(Arc::new(d));
        self
    }
}

impl fmt::Debug for FnMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnMetric")
            .field("dim", &self.dim)
            .field("definiteness", &self.definiteness)
            .field("analytic_derivative", &self.derivative.is_some())
            .finish()
    }
}

impl MetricField for FnMetric {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, z: &PhaseState) -> Rank2Value {
        (self.eval)(z)
    }

    fn definiteness(&self) -> Definiteness {
        self.definiteness
    }

    fn analytic_derivative(&self, z: &PhaseState) -> Option<Rank2Derivative> {
        self.derivative.as_ref().map(|d| d(z))
    }

    fn analytic_second_derivative(&self, z: &PhaseState) -> Option<Rank2SecondDerivative> {
        self.second.as_ref().map(|d| d(z))
    }
}

/// Properties a 4-bracket field declares about itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct FourBracketFlags {
    /// Satisfies the cyclic identity in addition to the minimal symmetries.
    pub algebraic: bool,
    /// Nonnegative sectional curvature (checked statistically, never proven).
    pub psd: bool,
}

/// The 4-tensor `R^{ijkl}(z)` of a metriplectic 4-bracket.
pub trait FourBracketField: Send + Sync {
    fn dim(&self) -> usize;

    fn eval(&self, z: &PhaseState) -> Result<Rank4Value>;

    /// State-independent (Lie-metriplectic) tensor.
    fn is_constant(&self) -> bool {
        false
    }

    fn flags(&self) -> FourBracketFlags;

    /// Absolute tolerance on the curvature symmetries of `eval`. Tensors
    /// assembled from finite-difference derivatives override this.
    fn symmetry_tolerance(&self) -> f64 {
        crate::tensor::DEFAULT_ATOL
    }
}

/// A state-independent 4-tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstantFourBracket {
    r: Rank4Value,
    flags: FourBracketFlags,
}

impl ConstantFourBracket {
    pub fn new(r: Rank4Value, flags: FourBracketFlags) -> Self {
        Self { r, flags }
    }

    pub fn tensor(&self) -> &Rank4Value {
        &self.r
    }
}

impl FourBracketField for ConstantFourBracket {
    fn dim(&self) -> usize {
        self.r.dim()
    }

    fn eval(&self, _z: &PhaseState) -> Result<Rank4Value> {
        Ok(self.r.clone())
    }

    fn is_constant(&self) -> bool {
        true
    }

    fn flags(&self) -> FourBracketFlags {
        self.flags
    }
}

type Rank4Fn = dyn Fn(&PhaseState) -> Result<Rank4Value> + Send + Sync;

#[derive(Clone)]
pub struct FnFourBracket {
    dim: usize,
    flags: FourBracketFlags,
    eval: Arc<Rank4Fn>,
}

impl FnFourBracket {
    pub fn new(dim: usize, flags: FourBracketFlags, eval: impl Fn(&PhaseState) -> Result<Rank4Value> + Send + Sync + 'static) -> Self {
        Self { dim, flags, eval: Arc::new(eval) }
    }
}

impl fmt::Debug for FnFourBracket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnFourBracket").field("dim", &self.dim).field("flags", &self.flags).finish()
    }
}

impl FourBracketField for FnFourBracket {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, z: &PhaseState) -> Result<Rank4Value> {
        (self.eval)(z)
    }

    fn flags(&self) -> FourBracketFlags {
        self.flags
    }
}
