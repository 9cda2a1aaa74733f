//! The metriplectic flow `ż = J∇H + G∇S`, its restrictions, and fixed-step
//! integration with First/Second Law monitors.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::brackets::{double_bracket_tensor, g_metric_from_gradient, km_tensor_from_gradients};
use crate::error::{MetriplexError, Result};
use crate::field::{FourBracketField, PoissonField, ScalarField};
use crate::integrators::{step_count, step_with_slope, Method};
use crate::tensor::{check_dims, PhaseState, Rank2Value};
use crate::verify::SampleBox;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    Full,
    Hamiltonian,
    Dissipative,
    Km,
    DoubleBracket,
}

impl Mode {
    pub const ALL: [Mode; 5] = [Mode::Full, Mode::Hamiltonian, Mode::Dissipative, Mode::Km, Mode::DoubleBracket];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Full => "full",
            Mode::Hamiltonian => "hamiltonian",
            Mode::Dissipative => "dissipative",
            Mode::Km => "km",
            Mode::DoubleBracket => "double_bracket",
        }
    }

    /// Modes under which the entropy is expected to be nondecreasing.
    pub fn produces_entropy(self) -> bool {
        matches!(self, Mode::Full | Mode::Dissipative | Mode::Km)
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = MetriplexError;
    fn from_str(s: &str) -> Result<Self> {
        Mode::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| MetriplexError::InvalidParameter(format!("unknown mode '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Relative energy drift allowed per 100 time units.
    pub h_drift: f64,
    /// Largest per-step entropy decrease tolerated.
    pub s_step: f64,
    /// Bound on `|J∇S|` and `|G∇H|` when verifying degeneracy.
    pub degeneracy: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { h_drift: 1e-8, s_step: 1e-12, degeneracy: 1e-10 }
    }
}

#[derive(Clone)]
pub struct NamedField {
    pub name: String,
    pub field: Arc<dyn ScalarField>,
}

/// The bundle `(J, R, H, S)` consumed by the integrator. `J` and `R` are
/// optional; modes that need a missing component fail.
#[derive(Clone)]
pub struct MetriplecticSystem {
    name: String,
    dim: usize,
    poisson: Option<Arc<dyn PoissonField>>,
    four_bracket: Option<Arc<dyn FourBracketField>>,
    hamiltonian: Arc<dyn ScalarField>,
    entropy: Arc<dyn ScalarField>,
    casimirs: Vec<NamedField>,
    double_bracket_metric: Option<Rank2Value>,
    tolerances: Tolerances,
    sample_box: SampleBox,
}

impl fmt::Debug for MetriplecticSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MetriplecticSystem")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("poisson", &self.poisson.is_some())
            .field("four_bracket", &self.four_bracket.is_some())
            .field("casimirs", &self.casimirs.iter().map(|c| c.name.as_str()).collect::<Vec<_>>())
            .field("tolerances", &self.tolerances)
            .finish()
    }
}

impl MetriplecticSystem {
    pub fn new(name: impl Into<String>, hamiltonian: Arc<dyn ScalarField>, entropy: Arc<dyn ScalarField>) -> Result<Self> {
        let dim = hamiltonian.dim();
        check_dims(dim, &[entropy.dim()])?;
        Ok(Self {
            name: name.into(),
            dim,
            poisson: None,
            four_bracket: None,
            hamiltonian,
            entropy,
            casimirs: Vec::new(),
            double_bracket_metric: None,
            tolerances: Tolerances::default(),
            sample_box: SampleBox::cube(dim, -1.0, 1.0),
        })
    }

    pub fn with_poisson(mut self, j: Arc<dyn PoissonField>) -> Result<Self> {
        check_dims(self.dim, &[j.dim()])?;
        self.poisson = Some(j);
        Ok(self)
    }

    pub fn with_four_bracket(mut self, r: Arc<dyn FourBracketField>) -> Result<Self> {
        check_dims(self.dim, &[r.dim()])?;
        self.four_bracket = Some(r);
        Ok(self)
    }

    pub fn with_casimir(mut self, name: impl Into<String>, c: Arc<dyn ScalarField>) -> Result<Self> {
        check_dims(self.dim, &[c.dim()])?;
        self.casimirs.push(NamedField { name: name.into(), field: c });
        Ok(self)
    }

    /// Metric `g_{kl}` of the double bracket `D = J g Jᵀ`.
    pub fn with_double_bracket_metric(mut self, g: Rank2Value) -> Result<Self> {
        check_dims(self.dim, &[g.dim()])?;
        Rank2Value::new(g.dim(), g.entries().to_vec(), crate::tensor::SymmetryTag::Symmetric)?;
        self.double_bracket_metric = Some(g);
        Ok(self)
    }

    pub fn with_tolerances(mut self, t: Tolerances) -> Self {
        self.tolerances = t;
        self
    }

    pub fn with_sample_box(mut self, b: SampleBox) -> Result<Self> {
        check_dims(self.dim, &[b.dim()])?;
        self.sample_box = b;
        Ok(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn poisson(&self) -> Option<&Arc<dyn PoissonField>> {
        self.poisson.as_ref()
    }

    pub fn four_bracket(&self) -> Option<&Arc<dyn FourBracketField>> {
        self.four_bracket.as_ref()
    }

    pub fn hamiltonian(&self) -> &Arc<dyn ScalarField> {
        &self.hamiltonian
    }

    pub fn entropy(&self) -> &Arc<dyn ScalarField> {
        &self.entropy
    }

    pub fn casimirs(&self) -> &[NamedField] {
        &self.casimirs
    }

    pub fn double_bracket_metric(&self) -> Option<&Rank2Value> {
        self.double_bracket_metric.as_ref()
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tolerances
    }

    pub fn sample_box(&self) -> &SampleBox {
        &self.sample_box
    }

    fn missing(mode: Mode, component: &str) -> MetriplexError {
        MetriplexError::MissingComponent { mode: mode.to_string(), component: component.into() }
    }

    fn require_poisson(&self, mode: Mode) -> Result<&Arc<dyn PoissonField>> {
        self.poisson.as_ref().ok_or_else(|| Self::missing(mode, "Poisson tensor"))
    }

    fn require_four_bracket(&self, mode: Mode) -> Result<&Arc<dyn FourBracketField>> {
        self.four_bracket.as_ref().ok_or_else(|| Self::missing(mode, "4-bracket tensor"))
    }

    /// `ż` at `z` under the requested mode.
    pub fn vector_field(&self, z: &PhaseState, mode: Mode) -> Result<Vec<f64>> {
        check_dims(self.dim, &[z.dim()])?;
        let dh = self.hamiltonian.gradient(z);
        let v = match mode {
            Mode::Hamiltonian => self.require_poisson(mode)?.eval(z).matvec(dh.entries()),
            Mode::Dissipative => {
                let r = self.require_four_bracket(mode)?;
                g_metric_from_gradient(r.as_ref(), dh.entries(), z)?.matvec(self.entropy.gradient(z).entries())
            }
            Mode::Full => {
                let ham = self.vector_field(z, Mode::Hamiltonian)?;
                let dis = self.vector_field(z, Mode::Dissipative)?;
                ham.iter().zip(&dis).map(|(a, b)| a + b).collect()
            }
            Mode::Km => {
                let r = self.require_four_bracket(mode)?;
                let ds = self.entropy.gradient(z);
                km_tensor_from_gradients(r.as_ref(), ds.entries(), dh.entries(), z)?.matvec(dh.entries())
            }
            Mode::DoubleBracket => {
                let j = self.require_poisson(mode)?;
                let g = self.double_bracket_metric.as_ref().ok_or_else(|| Self::missing(mode, "double-bracket metric"))?;
                double_bracket_tensor(j.as_ref(), g, z)?.matvec(dh.entries())
            }
        };
        if v.iter().any(|x| !x.is_finite()) {
            return Err(MetriplexError::NonFinite(format!("{mode} vector field")));
        }
        Ok(v)
    }

    pub fn integrate(&self, z0: &PhaseState, settings: &IntegrationSettings) -> Result<Trajectory> {
        settings.validate()?;
        Ok(self.run(z0, settings, None)?.0)
    }

    /// Integrates until `|ż| ≤ stop_speed` or `max_time`. Not converging is
    /// not an error: the partial trajectory comes back with `converged = false`.
    pub fn relax_to_equilibrium(&self, z0: &PhaseState, settings: &RelaxSettings) -> Result<Relaxation> {
        let s = IntegrationSettings {
            t_end: settings.max_time,
            dt: settings.dt,
            mode: settings.mode,
            method: settings.method,
            record_every: settings.record_every,
        };
        s.validate()?;
        if !(settings.stop_speed >= 0.0) {
            return Err(MetriplexError::InvalidParameter("stop_speed must be nonnegative".into()));
        }
        let (trajectory, converged) = self.run(z0, &s, Some(settings.stop_speed))?;
        let final_state = PhaseState::new(trajectory.states.last().expect("nonempty").clone())?;
        Ok(Relaxation { final_state, trajectory, converged })
    }

    fn run(&self, z0: &PhaseState, settings: &IntegrationSettings, stop_speed: Option<f64>) -> Result<(Trajectory, bool)> {
        check_dims(self.dim, &[z0.dim()])?;
        let mode = settings.mode;
        let n_steps = step_count(settings.t_end, settings.dt);
        let h = settings.t_end / n_steps as f64;
        let mut traj = Trajectory::new(self, mode, settings.t_end);
        let mut rhs = |y: &[f64]| self.vector_field(&PhaseState::new(y.to_vec())?, mode);
        let mut y = z0.coords().to_vec();
        let mut t = 0.0;
        let mut s_prev = self.entropy.value(z0);
        let h0 = self.hamiltonian.value(z0);
        let diverged = |t: f64, y: &[f64]| MetriplexError::Diverged { time: t, last_state: y.to_vec() };
        for k in 0..=n_steps {
            let k1 = match rhs(&y) {
                Ok(v) => v,
                Err(MetriplexError::NonFinite(_)) | Err(MetriplexError::InvalidState(_)) => return Err(diverged(t, &y)),
                Err(e) => return Err(e),
            };
            let speed = k1.iter().map(|x| x * x).sum::<f64>().sqrt();
            let stop = stop_speed.is_some_and(|s| speed <= s);
            if k % settings.record_every == 0 || k == n_steps || stop {
                traj.record(self, t, &y, speed);
            }
            if stop {
                traj.finish(h0);
                return Ok((traj, true));
            }
            if k == n_steps {
                break;
            }
            let next = step_with_slope(settings.method, &mut rhs, &y, &k1, h).map_err(|e| match e {
                MetriplexError::NonFinite(_) | MetriplexError::InvalidState(_) => diverged(t, &y),
                e => e,
            })?;
            if next.iter().any(|x| !x.is_finite()) {
                return Err(diverged(t, &y));
            }
            y = next;
            t = (k + 1) as f64 * h;
            let z = PhaseState::new(y.clone())?;
            let (hv, sv) = (self.hamiltonian.value(&z), self.entropy.value(&z));
            if !hv.is_finite() || !sv.is_finite() {
                return Err(diverged(t, &y));
            }
            traj.monitor(hv, h0, sv - s_prev);
            s_prev = sv;
        }
        traj.finish(h0);
        Ok((traj, stop_speed.is_none()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegrationSettings {
    pub t_end: f64,
    pub dt: f64,
    pub mode: Mode,
    pub method: Method,
    /// Record every `record_every`-th step (the last state is always kept).
    pub record_every: usize,
}

impl IntegrationSettings {
    pub fn new(t_end: f64, dt: f64, mode: Mode) -> Self {
        Self { t_end, dt, mode, method: Method::Rk4, record_every: 1 }
    }

    fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(MetriplexError::InvalidParameter(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(MetriplexError::InvalidParameter(format!("t_end must be positive, got {}", self.t_end)));
        }
        if self.record_every == 0 {
            return Err(MetriplexError::InvalidParameter("record_every must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelaxSettings {
    pub mode: Mode,
    pub max_time: f64,
    pub stop_speed: f64,
    pub dt: f64,
    pub method: Method,
    pub record_every: usize,
}

#[derive(Debug, Clone)]
pub struct Relaxation {
    pub final_state: PhaseState,
    pub trajectory: Trajectory,
    pub converged: bool,
}

/// Recorded states and diagnostic series of one integration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub mode: Mode,
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub energy: Vec<f64>,
    pub entropy: Vec<f64>,
    pub casimir_names: Vec<String>,
    /// `casimirs[m][c]`: Casimir `c` at recorded state `m`.
    pub casimirs: Vec<Vec<f64>>,
    pub speed: Vec<f64>,
    pub monitors: Monitors,
}

/// Per-step conservation and production monitors, over every step taken.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Monitors {
    pub steps: usize,
    /// `max |H(t) − H(0)| / |H(0)|` (absolute when `H(0) = 0`).
    pub h_drift: f64,
    pub h_drift_exceeded: bool,
    /// Steps with `S_{n+1} < S_n − tol_S`.
    pub s_violations: usize,
    /// `max (S_n − S_{n+1})`, clamped at 0.
    pub max_s_decrease: f64,
    /// True when the mode should produce entropy and some step violated it.
    pub s_monotonicity_flagged: bool,
    h_abs_drift: f64,
    tol_h: f64,
    tol_s: f64,
}

impl Trajectory {
    fn new(sys: &MetriplecticSystem, mode: Mode, t_end: f64) -> Self {
        Self {
            mode,
            times: Vec::new(),
            states: Vec::new(),
            energy: Vec::new(),
            entropy: Vec::new(),
            casimir_names: sys.casimirs.iter().map(|c| c.name.clone()).collect(),
            casimirs: Vec::new(),
            speed: Vec::new(),
            monitors: Monitors {
                tol_h: sys.tolerances.h_drift * (t_end / 100.0).max(1.0),
                tol_s: sys.tolerances.s_step,
                ..Monitors::default()
            },
        }
    }

    fn record(&mut self, sys: &MetriplecticSystem, t: f64, y: &[f64], speed: f64) {
        let z = PhaseState::new(y.to_vec()).expect("finite state");
        self.times.push(t);
        self.states.push(y.to_vec());
        self.energy.push(sys.hamiltonian.value(&z));
        self.entropy.push(sys.entropy.value(&z));
        self.casimirs.push(sys.casimirs.iter().map(|c| c.field.value(&z)).collect());
        self.speed.push(speed);
    }

    fn monitor(&mut self, h: f64, h0: f64, ds: f64) {
        let m = &mut self.monitors;
        m.steps += 1;
        m.h_abs_drift = m.h_abs_drift.max((h - h0).abs());
        if ds < -m.tol_s {
            m.s_violations += 1;
        }
        m.max_s_decrease = m.max_s_decrease.max(-ds);
    }

    fn finish(&mut self, h0: f64) {
        let m = &mut self.monitors;
        m.h_drift = if h0 != 0.0 { m.h_abs_drift / h0.abs() } else { m.h_abs_drift };
        m.h_drift_exceeded = m.h_drift > m.tol_h;
        m.s_monotonicity_flagged = self.mode.produces_entropy() && m.s_violations > 0;
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state(&self) -> &[f64] {
        self.states.last().map(Vec::as_slice).unwrap_or(&[])
    }

    /// Largest relative change of each Casimir over the recorded states.
    pub fn casimir_drift(&self) -> Vec<f64> {
        let Some(first) = self.casimirs.first() else { return Vec::new() };
        (0..first.len())
            .map(|c| {
                let c0 = first[c];
                let d = self.casimirs.iter().map(|row| (row[c] - c0).abs()).fold(0.0, f64::max);
                if c0 != 0.0 {
                    d / c0.abs()
                } else {
                    d
                }
            })
            .collect()
    }

    /// CSV with columns `t, z1..zN, H, S, C1..Ck, speed`, 17 significant digits.
    pub fn write_csv(&self, mut w: impl Write) -> io::Result<()> {
        let n = self.states.first().map_or(0, Vec::len);
        let mut header = vec!["t".to_string()];
        header.extend((1..=n).map(|i| format!("z{i}")));
        header.extend(["H".to_string(), "S".to_string()]);
        header.extend((1..=self.casimir_names.len()).map(|i| format!("C{i}")));
        header.push("speed".into());
        writeln!(w, "{}", header.join(","))?;
        for m in 0..self.len() {
            let mut row = vec![self.times[m]];
            row.extend(&self.states[m]);
            row.extend([self.energy[m], self.entropy[m]]);
            row.extend(&self.casimirs[m]);
            row.push(self.speed[m]);
            let cells: Vec<String> = row.iter().map(|x| format!("{x:.16e}")).collect();
            writeln!(w, "{}", cells.join(","))?;
        }
        Ok(())
    }
}
