//! JSON run configuration.
//!
//! Indices in structure constants and metric entries are 1-based, matching
//! the usual `z¹, z², …` labelling of coordinates.

use std::fs;
use std::path::{Path, PathBuf};

use metriplex_core::field::{Monomial, Polynomial};
use metriplex_core::{Method, Rank2Value, StructureConstants, SymmetryTag};
use metriplex_fields::{DissipationKind, JacobianScheme};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    /// Name of the run directory; defaults to the config file stem.
    #[serde(default)]
    pub name: Option<String>,
    pub system: SystemSpec,
    /// Flow to integrate. ODE systems accept `full`, `hamiltonian`,
    /// `dissipative`, `km` and `double_bracket`; `field1d` accepts
    /// `dissipative` and `full`; `euler2d` accepts `hamiltonian`,
    /// `double_bracket` and `metriplectic`.
    #[serde(default)]
    pub mode: Option<String>,
    /// Initial state of an ODE system; drawn from the sample box when absent.
    #[serde(default)]
    pub initial_state: Option<Vec<f64>>,
    #[serde(default)]
    pub integrator: IntegratorSpec,
    #[serde(default)]
    pub verification: VerificationSpec,
    #[serde(default)]
    pub tolerances: Option<TolerancesSpec>,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SystemSpec {
    RigidBody {
        #[serde(default = "default_inertia")]
        inertia: [f64; 3],
        #[serde(default = "default_lambda")]
        lambda: f64,
    },
    Kida {
        #[serde(default = "default_lambda")]
        lambda: f64,
        /// Defaults to a stand-in quadratic; the bracket does not fix `H`.
        #[serde(default)]
        hamiltonian: Option<ScalarSpec>,
    },
    LiePoisson {
        /// `[i, j, k, c^{ij}_k]`; the antisymmetric partner is implied.
        structure_constants: Vec<(usize, usize, usize, f64)>,
        dim: usize,
        /// Metric `g^{rs}` of the 4-bracket.
        metric: MetricSpec,
        hamiltonian: ScalarSpec,
        entropy: ScalarSpec,
        #[serde(default)]
        double_bracket_metric: Option<MetricSpec>,
        #[serde(default)]
        casimirs: Vec<NamedScalar>,
    },
    Field1d {
        dissipation: String,
        #[serde(default = "default_points")]
        n: usize,
        #[serde(default = "default_length")]
        length: f64,
        #[serde(default = "one")]
        nu: f64,
        #[serde(default = "one")]
        weight: f64,
        #[serde(default)]
        c: f64,
        initial: Initial1D,
    },
    Euler2d {
        #[serde(default = "default_grid2d")]
        n: usize,
        #[serde(default)]
        scheme: Option<String>,
        #[serde(default = "default_lambda")]
        lambda: f64,
        #[serde(default)]
        initial: Initial2D,
    },
}

impl SystemSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::RigidBody { .. } => "rigid_body",
            Self::Kida { .. } => "kida",
            Self::LiePoisson { .. } => "lie_poisson",
            Self::Field1d { .. } => "field1d",
            Self::Euler2d { .. } => "euler2d",
        }
    }
}

fn default_inertia() -> [f64; 3] {
    [1.0, 2.0, 3.0]
}
fn default_lambda() -> f64 {
    0.1
}
fn default_points() -> usize {
    128
}
fn default_length() -> f64 {
    std::f64::consts::TAU
}
fn default_grid2d() -> usize {
    32
}
fn one() -> f64 {
    1.0
}

/// A scalar function on phase space.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ScalarSpec {
    /// `Σ b_i z^i`.
    Linear(Vec<f64>),
    /// `½ zᵀ Q z`, `Q` given by rows.
    Quadratic(Vec<Vec<f64>>),
    /// `|z|^(2p)`, given as `[dim, p]`.
    NormSquaredPower(usize, u32),
    Terms { dim: usize, terms: Vec<Monomial> },
}

impl ScalarSpec {
    pub fn polynomial(&self) -> Result<Polynomial, CliError> {
        Ok(match self {
            Self::Linear(b) => Polynomial::linear(b),
            Self::Quadratic(rows) => Polynomial::quadratic(&Rank2Value::from_rows(rows, SymmetryTag::Symmetric).map_err(CliError::config)?),
            Self::NormSquaredPower(dim, p) => Polynomial::norm_squared_power(*dim, *p),
            Self::Terms { dim, terms } => Polynomial::new(*dim, terms.clone()).map_err(CliError::config)?,
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedScalar {
    pub name: String,
    pub function: ScalarSpec,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum MetricSpec {
    /// `s·δ`.
    Identity(f64),
    Diagonal(Vec<f64>),
    Matrix(Vec<Vec<f64>>),
    /// Symmetric entries `[i, j, value]` on top of zero.
    Entries(Vec<(usize, usize, f64)>),
    /// Cartan–Killing form with the given scale.
    CartanKilling(f64),
    /// Inverse of the scaled Cartan–Killing form.
    InverseCartanKilling(f64),
}

impl MetricSpec {
    pub fn resolve(&self, c: &StructureConstants) -> Result<Rank2Value, CliError> {
        let n = c.dim();
        let g = match self {
            Self::Identity(s) => Rank2Value::identity(n).scale(*s),
            Self::Diagonal(d) => Rank2Value::diagonal(d),
            Self::Matrix(rows) => Rank2Value::from_rows(rows, SymmetryTag::Symmetric).map_err(CliError::config)?,
            Self::Entries(e) => {
                let mut m = vec![0.0; n * n];
                for &(i, j, v) in e {
                    let (i, j) = (one_based(i, n)?, one_based(j, n)?);
                    m[i * n + j] = v;
                    m[j * n + i] = v;
                }
                Rank2Value::new(n, m, SymmetryTag::Symmetric).map_err(CliError::config)?
            }
            Self::CartanKilling(s) => metriplex_core::constructors::cartan_killing(c, *s),
            Self::InverseCartanKilling(s) => metriplex_core::constructors::cartan_killing(c, *s).inverse().map_err(CliError::config)?.symmetrized(),
        };
        if g.dim() != n {
            return Err(CliError::Config(format!("metric has dimension {}, the algebra has {n}", g.dim())));
        }
        Ok(g)
    }
}

pub fn one_based(i: usize, n: usize) -> Result<usize, CliError> {
    if i == 0 || i > n {
        return Err(CliError::Config(format!("index {i} out of range 1..={n}")));
    }
    Ok(i - 1)
}

pub fn structure_constants(dim: usize, triples: &[(usize, usize, usize, f64)]) -> Result<StructureConstants, CliError> {
    let zero_based = triples
        .iter()
        .map(|&(i, j, k, v)| Ok((one_based(i, dim)?, one_based(j, dim)?, one_based(k, dim)?, v)))
        .collect::<Result<Vec<_>, CliError>>()?;
    StructureConstants::from_triples(dim, &zero_based).map_err(CliError::config)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Initial1D {
    /// `12α² sech²(α(x − center))`.
    Soliton { alpha: f64, center: f64 },
    /// `offset + Σ a cos(2πmx/L) + b sin(2πmx/L)` over `[m, a, b]`.
    Fourier {
        #[serde(default)]
        offset: f64,
        modes: Vec<(u32, f64, f64)>,
    },
    /// Modes `1..=modes` with coefficients uniform in `±amplitude`, drawn from the run seed.
    Random {
        modes: u32,
        amplitude: f64,
        #[serde(default)]
        offset: f64,
    },
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Initial2D {
    /// A few interacting low modes.
    #[default]
    Default,
    /// `Σ a cos(kx·x + ky·y) + b sin(kx·x + ky·y)` over `[kx, ky, a, b]`, on `[0, 2π)²`.
    Fourier(Vec<(i32, i32, f64, f64)>),
    /// Modes with `|kx|, |ky| ≤ modes`, coefficients uniform in `±amplitude`.
    Random { modes: u32, amplitude: f64 },
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSpec {
    pub dt: f64,
    pub t_end: f64,
    #[serde(default)]
    pub method: Method,
    #[serde(default = "one_usize")]
    pub record_every: usize,
}

fn one_usize() -> usize {
    1
}

impl Default for IntegratorSpec {
    fn default() -> Self {
        Self { dt: 1e-2, t_end: 10.0, method: Method::Rk4, record_every: 1 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerificationSpec {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_states")]
    pub states: usize,
    #[serde(default = "default_pairs")]
    pub covector_pairs: usize,
    #[serde(default)]
    pub sample_box: Option<BoxSpec>,
}

fn default_states() -> usize {
    100
}
fn default_pairs() -> usize {
    100
}

impl Default for VerificationSpec {
    fn default() -> Self {
        Self { seed: 0, states: default_states(), covector_pairs: default_pairs(), sample_box: None }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxSpec {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TolerancesSpec {
    /// Relative energy drift allowed per 100 time units.
    pub h_drift: f64,
    /// Largest per-step entropy decrease tolerated.
    pub s_step: f64,
    #[serde(default = "default_degeneracy")]
    pub degeneracy: f64,
}

fn default_degeneracy() -> f64 {
    1e-10
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub dir: Option<PathBuf>,
}

/// Runs the same config once per value, substituting `values[i]` at the
/// JSON pointer `parameter` (for example `/system/lambda`).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub parameter: String,
    pub values: Vec<Value>,
}

impl RunConfig {
    pub fn from_value(v: Value) -> Result<Self, CliError> {
        let version = v.get("schema_version").and_then(Value::as_u64);
        match version {
            Some(x) if x == u64::from(SCHEMA_VERSION) => {}
            Some(x) => return Err(CliError::Config(format!("unsupported schema_version {x} (expected {SCHEMA_VERSION})"))),
            None => return Err(CliError::Config("missing integer field 'schema_version'".into())),
        }
        let cfg: RunConfig = serde_json::from_value(v).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        Self::from_value(serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg = Self::from_json(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            e => e,
        })?;
        if cfg.name.is_none() {
            cfg.name = path.file_stem().map(|s| s.to_string_lossy().into_owned());
        }
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        let i = &self.integrator;
        if !(i.dt > 0.0 && i.dt.is_finite()) {
            return Err(CliError::Config(format!("integrator.dt must be positive, got {}", i.dt)));
        }
        if !(i.t_end > 0.0 && i.t_end.is_finite()) {
            return Err(CliError::Config(format!("integrator.t_end must be positive, got {}", i.t_end)));
        }
        if i.record_every == 0 {
            return Err(CliError::Config("integrator.record_every must be at least 1".into()));
        }
        if self.verification.states == 0 {
            return Err(CliError::Config("verification.states must be at least 1".into()));
        }
        if let SystemSpec::Field1d { dissipation, .. } = &self.system {
            dissipation.parse::<DissipationKind>().map_err(CliError::config)?;
        }
        if let SystemSpec::Euler2d { scheme: Some(s), .. } = &self.system {
            s.parse::<JacobianScheme>().map_err(CliError::config)?;
        }
        if let Some(s) = &self.sweep {
            if s.values.is_empty() {
                return Err(CliError::Config("sweep.values is empty".into()));
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        self.name.as_deref().unwrap_or(self.system.kind())
    }

    /// One config per sweep value (or just this one), with `sweep` removed.
    pub fn expand(&self) -> Result<Vec<RunConfig>, CliError> {
        let Some(sweep) = &self.sweep else { return Ok(vec![self.clone()]) };
        let mut base = serde_json::to_value(RunConfig { sweep: None, ..self.clone() }).map_err(|e| CliError::Config(e.to_string()))?;
        if base.pointer(&sweep.parameter).is_none() {
            // allow sweeping a field left at its default
            let (parent, key) = sweep.parameter.rsplit_once('/').ok_or_else(|| CliError::Config(format!("bad sweep pointer '{}'", sweep.parameter)))?;
            match base.pointer_mut(parent).and_then(Value::as_object_mut) {
                Some(obj) => {
                    obj.insert(key.to_string(), Value::Null);
                }
                None => return Err(CliError::Config(format!("sweep parameter '{}' does not name a config field", sweep.parameter))),
            }
        }
        sweep
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let mut raw = base.clone();
                *raw.pointer_mut(&sweep.parameter).expect("checked above") = v.clone();
                let mut cfg = Self::from_value(raw)?;
                cfg.name = Some(format!("{}/run_{i:03}", self.name()));
                Ok(cfg)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const RIGID: &str = r#"{"schema_version": 1, "system": {"kind": "rigid_body"}, "integrator": {"dt": 0.01, "t_end": 1}}"#;

    #[test]
    fn defaults_fill_in() {
        let c = RunConfig::from_json(RIGID).unwrap();
        assert!(matches!(c.system, SystemSpec::RigidBody { inertia: [1.0, 2.0, 3.0], .. }));
        assert_eq!(c.integrator.method, Method::Rk4);
        assert_eq!(c.verification.states, 100);
        assert_eq!(c.name(), "rigid_body");
    }

    #[test]
    fn rejects_bad_input() {
        assert!(RunConfig::from_json(r#"{"system": {"kind": "rigid_body"}}"#).is_err());
        assert!(RunConfig::from_json(r#"{"schema_version": 2, "system": {"kind": "rigid_body"}}"#).is_err());
        assert!(RunConfig::from_json(r#"{"schema_version": 1, "system": {"kind": "rigid_body"}, "integrator": {"dt": 0, "t_end": 1}}"#).is_err());
        assert!(RunConfig::from_json(r#"{"schema_version": 1, "system": {"kind": "warp_drive"}}"#).is_err());
        assert!(RunConfig::from_json(r#"{"schema_version": 1, "system": {"kind": "rigid_body"}, "colour": 3}"#).is_err());
        let bad_kind = r#"{"schema_version": 1, "system": {"kind": "field1d", "dissipation": "magic", "initial": {"soliton": {"alpha": 1, "center": 0}}}}"#;
        assert!(RunConfig::from_json(bad_kind).is_err());
    }

    #[test]
    fn one_based_structure_constants() {
        let so3 = structure_constants(3, &[(1, 2, 3, -1.0), (2, 3, 1, -1.0), (3, 1, 2, -1.0)]).unwrap();
        assert_eq!(so3, StructureConstants::so3());
        assert!(structure_constants(3, &[(0, 1, 2, 1.0)]).is_err());
        assert!(structure_constants(3, &[(1, 2, 4, 1.0)]).is_err());
    }

    #[test]
    fn metric_entries_are_symmetric() {
        let g = MetricSpec::Entries(vec![(1, 1, 1.0), (1, 2, 0.5), (2, 2, 1.0), (3, 3, 2.0)]).resolve(&StructureConstants::so3()).unwrap();
        assert_eq!(g.get(1, 0), 0.5);
        let ck = MetricSpec::InverseCartanKilling(-0.5).resolve(&StructureConstants::so3()).unwrap();
        assert!((ck.get(0, 0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sweep_expands_into_named_runs() {
        let text = r#"{"schema_version": 1, "name": "s", "system": {"kind": "rigid_body"},
            "sweep": {"parameter": "/system/lambda", "values": [0.1, 0.2]}}"#;
        let runs = RunConfig::from_json(text).unwrap().expand().unwrap();
        assert_eq!(runs.len(), 2);
        assert!(matches!(runs[1].system, SystemSpec::RigidBody { lambda, .. } if lambda == 0.2));
        assert_eq!(runs[1].name(), "s/run_001");
        assert!(runs[0].sweep.is_none());
        let bad = r#"{"schema_version": 1, "system": {"kind": "rigid_body"}, "sweep": {"parameter": "/nowhere/x", "values": [1]}}"#;
        assert!(RunConfig::from_json(bad).unwrap().expand().is_err());
    }
}
