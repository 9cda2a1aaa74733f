//! Sampled property checks certifying a `(J, R, H, S)` bundle.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::brackets::{g_metric_from_gradient, max_norm};
use crate::dynamics::MetriplecticSystem;
use crate::error::{MetriplexError, Result};
use crate::field::{FourBracketField, PoissonField, ScalarField};
use crate::tensor::{check_dims, contract4_raw, symmetry_defects, PhaseState, SymmetryDefects, DEFAULT_ATOL};

/// Default Jacobiator tolerance; `∂J` is finite-differenced unless supplied.
pub const JACOBI_TOL: f64 = 1e-8;
/// Default relative tolerance between analytic and finite-difference gradients.
pub const GRADIENT_TOL: f64 = 1e-5;
/// Cyclic-identity tolerance for tensors flagged algebraic.
pub const CYCLIC_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub max_defect: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub sample_count: usize,
}

impl Check {
    pub fn new(name: impl Into<String>, max_defect: f64, tolerance: f64, sample_count: usize) -> Self {
        // NaN defects fail
        let pass = max_defect <= tolerance;
        Self { name: name.into(), max_defect, tolerance, pass, sample_count }
    }
}

/// Outcome of one or more suites. `verdict` is the conjunction of the
/// pass flags in `checks`; `informational` entries do not count.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct VerificationReport {
    pub checks: Vec<Check>,
    pub informational: Vec<Check>,
    pub verdict: bool,
}

impl VerificationReport {
    pub fn new() -> Self {
        Self { checks: Vec::new(), informational: Vec::new(), verdict: true }
    }

    pub fn push(&mut self, check: Check) {
        self.verdict &= check.pass;
        self.checks.push(check);
    }

    pub fn note(&mut self, check: Check) {
        self.informational.push(check);
    }

    pub fn merge(&mut self, other: VerificationReport) {
        for c in other.checks {
            self.push(c);
        }
        self.informational.extend(other.informational);
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().chain(&self.informational).find(|c| c.name == name)
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let tag = if c.pass { "PASS" } else { "FAIL" };
            writeln!(f, "{tag}  {:<52} defect {:.3e}  tol {:.1e}  samples {}", c.name, c.max_defect, c.tolerance, c.sample_count)?;
        }
        for c in &self.informational {
            writeln!(f, "INFO  {:<52} value  {:.3e}  ref {:.1e}  samples {}", c.name, c.max_defect, c.tolerance, c.sample_count)?;
        }
        write!(f, "verdict: {}", if self.verdict { "PASS" } else { "FAIL" })
    }
}

/// Axis-aligned box `[lo_i, hi_i]` from which states are drawn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl SampleBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        check_dims(lo.len(), &[hi.len()])?;
        if lo.is_empty() || lo.iter().zip(&hi).any(|(l, h)| !(l <= h) || !l.is_finite() || !h.is_finite()) {
            return Err(MetriplexError::InvalidParameter("sample box needs finite lo <= hi in every coordinate".into()));
        }
        Ok(Self { lo, hi })
    }

    pub fn cube(n: usize, lo: f64, hi: f64) -> Self {
        Self { lo: vec![lo; n], hi: vec![hi; n] }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    /// `count` states drawn uniformly with a ChaCha8 stream seeded by `seed`.
    pub fn sample(&self, count: usize, seed: u64) -> Vec<PhaseState> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|_| {
                let c = self.lo.iter().zip(&self.hi).map(|(&l, &h)| if l == h { l } else { rng.random_range(l..h) }).collect();
                PhaseState::new(c).expect("finite box")
            })
            .collect()
    }
}

/// Sampling parameters shared by the suites.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplingSettings {
    pub seed: u64,
    pub states: usize,
    pub covector_pairs: usize,
}

impl Default for SamplingSettings {
    fn default() -> Self {
        Self { seed: 0, states: 100, covector_pairs: 1000 }
    }
}

fn jacobiator_defect(j: &(impl PoissonField + ?Sized), z: &PhaseState) -> f64 {
    let n = j.dim();
    let jz = j.eval(z);
    let dj = j.derivative(z);
    let mut d: f64 = 0.0;
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                let v: f64 = (0..n)
                    .map(|l| jz.get(a, l) * dj[l].get(b, c) + jz.get(b, l) * dj[l].get(c, a) + jz.get(c, l) * dj[l].get(a, b))
                    .sum();
                d = d.max(v.abs());
            }
        }
    }
    d
}

/// Antisymmetry of `J` and the Jacobi identity
/// `J^{il}∂_l J^{jk} + J^{jl}∂_l J^{ki} + J^{kl}∂_l J^{ij} = 0`.
pub fn verify_jacobi(j: &(impl PoissonField + ?Sized), samples: &[PhaseState]) -> VerificationReport {
    verify_jacobi_with_tolerance(j, samples, JACOBI_TOL)
}

pub fn verify_jacobi_with_tolerance(j: &(impl PoissonField + ?Sized), samples: &[PhaseState], tol: f64) -> VerificationReport {
    let mut anti: f64 = 0.0;
    let mut jac: f64 = 0.0;
    for z in samples {
        anti = anti.max(j.eval(z).antisymmetry_defect());
        jac = jac.max(jacobiator_defect(j, z));
    }
    let mut r = VerificationReport::new();
    r.push(Check::new("verify_jacobi.antisymmetry", anti, DEFAULT_ATOL, samples.len()));
    r.push(Check::new("verify_jacobi.jacobiator", jac, tol, samples.len()));
    r
}

/// Curvature symmetries at every sample plus sampled sectional-curvature
/// positivity. The cyclic identity counts only for tensors flagged algebraic.
pub fn verify_minimal_metriplectic(
    r: &(impl FourBracketField + ?Sized),
    samples: &[PhaseState],
    covector_pairs: usize,
    seed: u64,
) -> Result<VerificationReport> {
    let n = r.dim();
    let tol = r.symmetry_tolerance();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_c0de);
    let mut defects = SymmetryDefects::default();
    let mut min_k = f64::INFINITY;
    for z in samples {
        let t = r.eval(z)?;
        defects = defects.merge(&symmetry_defects(&t));
        for _ in 0..covector_pairs {
            let a: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let b: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            min_k = min_k.min(contract4_raw(&t, &a, &b, &a, &b));
        }
    }
    let count = samples.len();
    let mut rep = VerificationReport::new();
    rep.push(Check::new("verify_minimal_metriplectic.antisymmetry_first_pair", defects.d12, tol, count));
    rep.push(Check::new("verify_minimal_metriplectic.antisymmetry_second_pair", defects.d34, tol, count));
    rep.push(Check::new("verify_minimal_metriplectic.pair_interchange", defects.dpair, tol, count));
    let negativity = if min_k.is_finite() { (-min_k).max(0.0) } else { 0.0 };
    rep.push(Check::new("verify_minimal_metriplectic.sectional_curvature_nonnegative", negativity, tol, count * covector_pairs));
    let cyclic = Check::new("verify_minimal_metriplectic.cyclic_identity", defects.dcyclic, tol.max(CYCLIC_TOL), count);
    if r.flags().algebraic {
        rep.push(cyclic);
    } else {
        rep.note(cyclic);
    }
    Ok(rep)
}

/// `|J∇S|` and `|G∇H|` over the samples.
pub fn verify_degeneracy(system: &MetriplecticSystem, samples: &[PhaseState]) -> Result<VerificationReport> {
    let tol = system.tolerances().degeneracy;
    let (mut js, mut gh): (f64, f64) = (0.0, 0.0);
    for z in samples {
        let dh = system.hamiltonian().gradient(z);
        if let Some(j) = system.poisson() {
            js = js.max(max_norm(&j.eval(z).matvec(system.entropy().gradient(z).entries())));
        }
        if let Some(r) = system.four_bracket() {
            gh = gh.max(max_norm(&g_metric_from_gradient(r.as_ref(), dh.entries(), z)?.matvec(dh.entries())));
        }
    }
    let mut rep = VerificationReport::new();
    if system.poisson().is_some() {
        rep.push(Check::new("verify_degeneracy.J_grad_S", js, tol, samples.len()));
    }
    if system.four_bracket().is_some() {
        rep.push(Check::new("verify_degeneracy.G_grad_H", gh, tol, samples.len()));
    }
    Ok(rep)
}

/// `max_i |a_i − fd_i| / max(|a|_∞, 1)` per sample, against [`GRADIENT_TOL`].
pub fn verify_gradient(name: &str, f: &(impl ScalarField + ?Sized), samples: &[PhaseState]) -> Result<VerificationReport> {
    let mut worst: f64 = 0.0;
    for z in samples {
        let a = f.analytic_gradient(z).ok_or_else(|| MetriplexError::MissingComponent {
            mode: "verify_gradient".into(),
            component: format!("analytic gradient of {name}"),
        })?;
        let fd = f.fd_gradient(z);
        let diff = a.entries().iter().zip(fd.entries()).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
        let scale = max_norm(a.entries()).max(1.0);
        worst = worst.max(diff / scale);
    }
    let mut rep = VerificationReport::new();
    rep.push(Check::new(format!("verify_gradient.{name}"), worst, GRADIENT_TOL, samples.len()));
    Ok(rep)
}

/// Every applicable suite for a system, sampled from its box.
pub fn verify_system(system: &MetriplecticSystem, settings: &SamplingSettings) -> Result<VerificationReport> {
    let samples = system.sample_box().sample(settings.states, settings.seed);
    let mut rep = VerificationReport::new();
    if let Some(j) = system.poisson() {
        rep.merge(verify_jacobi(j.as_ref(), &samples));
    }
    if let Some(r) = system.four_bracket() {
        rep.merge(verify_minimal_metriplectic(r.as_ref(), &samples, settings.covector_pairs, settings.seed)?);
    }
    rep.merge(verify_degeneracy(system, &samples)?);
    let z0 = &samples[0];
    let fields = [("H", system.hamiltonian()), ("S", system.entropy())];
    for (name, f) in fields.into_iter().chain(system.casimirs().iter().map(|c| (c.name.as_str(), &c.field))) {
        if f.analytic_gradient(z0).is_some() {
            rep.merge(verify_gradient(name, f.as_ref(), &samples)?);
        }
    }
    Ok(rep)
}
