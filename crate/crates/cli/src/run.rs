//! Verification suites and simulations for built models.

use std::collections::BTreeMap;
use std::io::Write;

use metriplex_core::dynamics::{IntegrationSettings, Tolerances};
use metriplex_core::systems::nearest_principal_axis;
use metriplex_core::verify::{verify_system, Check, SampleBox, SamplingSettings};
use metriplex_core::{MetriplexError, Mode, VerificationReport};
use metriplex_fields::evolve::{write_snapshot_1d, write_snapshot_2d};
use metriplex_fields::{
    dissipative_rhs_1d, evolve, kdv_dissipation, DissipationKind, Euler2DKind, EvolveSettings, FieldDiagnostics, FieldSeries, FieldState1D, FieldState2D,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::build::{Euler2dModel, Field1dModel, Model, OdeModel};
use crate::config::{IntegratorSpec, RunConfig};
use crate::error::CliError;

/// Relative tolerance on the discrete pairings `⟨H_u, rhs⟩`.
pub const FIRST_LAW_TOL: f64 = 1e-8;
/// Bound on negative entropy production, relative to `max(‖S_u‖‖rhs‖, 1)`.
pub const SECOND_LAW_TOL: f64 = 1e-10;
pub const ANTI_ADJOINT_TOL: f64 = 1e-12;
/// Absolute `|Ṡ|` below which a KdV state counts as quiescent.
pub const KDV_QUIESCENCE: f64 = 1e-10;

fn norm(v: &[f64], cell: f64) -> f64 {
    (v.iter().map(|x| x * x).sum::<f64>() * cell).sqrt()
}

fn dot(a: &[f64], b: &[f64], cell: f64) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() * cell
}

/// `|⟨a, b⟩| / (‖a‖‖b‖)`, 0 when either vanishes.
fn relative_pairing(a: &[f64], b: &[f64], cell: f64) -> f64 {
    let s = norm(a, cell) * norm(b, cell);
    if s == 0.0 {
        0.0
    } else {
        dot(a, b, cell).abs() / s
    }
}

/// How far `⟨a, b⟩` falls below zero, relative to `max(‖a‖‖b‖, 1)`.
fn negativity(a: &[f64], b: &[f64], cell: f64) -> f64 {
    (-dot(a, b, cell)).max(0.0) / (norm(a, cell) * norm(b, cell)).max(1.0)
}

pub fn verify(model: &Model, cfg: &RunConfig, seed: u64) -> Result<VerificationReport, CliError> {
    let v = &cfg.verification;
    match model {
        Model::Ode(m) => {
            let settings = SamplingSettings { seed, states: v.states, covector_pairs: v.covector_pairs };
            verify_system(&m.system, &settings).map_err(CliError::config)
        }
        Model::Field1d(m) => verify_field1d(m, v.states, seed),
        Model::Euler2d(m) => verify_euler2d(m, v.states, seed),
    }
}

/// The initial state followed by random smooth perturbations of its mean.
fn field_samples(u0: &[f64], count: usize, seed: u64, smooth: impl Fn(&[f64]) -> Vec<f64>) -> Vec<Vec<f64>> {
    let mean = u0.iter().sum::<f64>() / u0.len() as f64;
    let scale = u0.iter().fold(0.0f64, |m, x| m.max((x - mean).abs())).max(1.0);
    let mut out = vec![u0.to_vec()];
    for i in 1..count {
        let c = SampleBox::cube(16, -scale, scale).sample(1, seed.wrapping_add(i as u64)).remove(0).into_inner();
        out.push(smooth(&c).into_iter().map(|x| x + mean).collect());
    }
    out
}

fn field1d_rhs(m: &Field1dModel, u: &[f64]) -> Result<Vec<f64>, MetriplexError> {
    let state = FieldState1D { u: u.to_vec() };
    if m.full {
        Ok(metriplex_fields::kn1d::viscous_metriplectic_rhs(&m.grid, &state, m.params.nu)?.u)
    } else {
        Ok(dissipative_rhs_1d(m.kind, &m.grid, &state, &m.params)?.u)
    }
}

fn verify_field1d(m: &Field1dModel, count: usize, seed: u64) -> Result<VerificationReport, CliError> {
    let g = &m.grid;
    let k = std::f64::consts::TAU / g.length();
    let smooth = |c: &[f64]| g.sample(|x| (0..8).map(|j| (c[2 * j] * (k * (j + 1) as f64 * x).cos() + c[2 * j + 1] * (k * (j + 1) as f64 * x).sin()) / (j + 1) as f64).sum()).u;
    let mut samples = field_samples(&m.u0, count, seed, smooth);
    if m.full {
        // the 1/u² flow is defined for positive data only
        for u in &mut samples {
            let lo = u.iter().copied().fold(f64::INFINITY, f64::min);
            if lo <= 0.5 {
                u.iter_mut().for_each(|x| *x += 0.5 - lo);
            }
        }
    }
    let (mut first, mut second, mut hamiltonian_casimir) = (0.0f64, 0.0f64, 0.0f64);
    for u in &samples {
        let state = FieldState1D::new(u.clone()).map_err(CliError::config)?;
        let dissipative = dissipative_rhs_1d(m.kind, g, &state, &m.params).map_err(CliError::config)?.u;
        let total = field1d_rhs(m, u).map_err(CliError::config)?;
        first = first.max(relative_pairing(&m.kind.hamiltonian_gradient(g, u, &m.params), &total, g.dx()));
        second = second.max(negativity(&m.kind.entropy_gradient(u), &dissipative, g.dx()));
        if m.full {
            let ham: Vec<f64> = total.iter().zip(&dissipative).map(|(a, b)| a - b).collect();
            hamiltonian_casimir = hamiltonian_casimir.max(relative_pairing(u, &ham, g.dx()));
        }
    }
    let n = samples.len();
    let mut rep = VerificationReport::new();
    rep.push(Check::new("verify_field.first_law", first, FIRST_LAW_TOL, n));
    rep.push(Check::new("verify_field.second_law", second, SECOND_LAW_TOL, n));
    if m.kind == DissipationKind::OttSudan {
        let mut worst = 0.0f64;
        for pair in samples.windows(2) {
            let (f, h) = (&pair[0], &pair[1]);
            let d = dot(f, &g.hilbert(h), g.dx()) + dot(&g.hilbert(f), h, g.dx());
            worst = worst.max(d.abs() / (norm(f, g.dx()) * norm(h, g.dx())).max(1.0));
        }
        rep.push(Check::new("verify_field.hilbert_anti_self_adjoint", worst, ANTI_ADJOINT_TOL, n.saturating_sub(1).max(1)));
    }
    if m.kind == DissipationKind::KdvConserving {
        let sdot = kdv_dissipation(g, &FieldState1D { u: m.u0.clone() }, &m.params).map_err(CliError::config)?;
        rep.note(Check::new("verify_field.kdv_dissipation_at_initial_state", sdot.abs(), KDV_QUIESCENCE, 1));
    }
    if m.full {
        // ⟨u, ∂(u⁻²)⟩ vanishes only up to aliasing on the grid
        rep.note(Check::new("verify_field.entropy_pairing_of_hamiltonian_part", hamiltonian_casimir, FIRST_LAW_TOL, n));
    }
    Ok(rep)
}

fn verify_euler2d(m: &Euler2dModel, count: usize, seed: u64) -> Result<VerificationReport, CliError> {
    let model = &m.model;
    let g = model.grid();
    let cell = g.cell_area();
    let smooth = |c: &[f64]| {
        let waves = [(1, 0), (0, 1), (1, 1), (1, -1), (2, 0), (0, 2), (2, 1), (1, 2)];
        g.sample(|x, y| waves.iter().enumerate().map(|(i, &(kx, ky))| {
            let p = kx as f64 * x + ky as f64 * y;
            c[2 * i] * p.cos() + c[2 * i + 1] * p.sin()
        }).sum())
        .omega
    };
    let samples = field_samples(&m.omega0.omega, count, seed, smooth);
    let (mut energy, mut enstrophy, mut production, mut circulation) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for raw in &samples {
        let w = model.prepare(raw).map_err(CliError::config)?;
        let psi = model.stream_function(&w.omega).map_err(CliError::config)?;
        let r = model.rhs_with_advection(m.kind, &w, m.lambda).map_err(CliError::config)?.omega;
        energy = energy.max(relative_pairing(&psi, &r, cell));
        enstrophy = enstrophy.max(relative_pairing(&w.omega, &r, cell));
        production = production.max(match m.kind {
            Euler2DKind::Hamiltonian => 0.0,
            Euler2DKind::Metriplectic => negativity(&w.omega, &r, cell),
            // energy must not increase
            Euler2DKind::DoubleBracket => negativity(&psi.iter().map(|x| -x).collect::<Vec<_>>(), &r, cell),
        });
        let area = g.lengths().0 * g.lengths().1;
        circulation = circulation.max(model.circulation(&r).abs() / (norm(&r, cell) * area.sqrt()).max(f64::MIN_POSITIVE));
    }
    let n = samples.len();
    let mut rep = VerificationReport::new();
    if m.kind != Euler2DKind::DoubleBracket {
        rep.push(Check::new("verify_euler2d.energy_conservation", energy, FIRST_LAW_TOL, n));
    }
    if m.kind != Euler2DKind::Metriplectic {
        rep.push(Check::new("verify_euler2d.enstrophy_conservation", enstrophy, FIRST_LAW_TOL, n));
    }
    match m.kind {
        Euler2DKind::Metriplectic => rep.push(Check::new("verify_euler2d.enstrophy_production", production, SECOND_LAW_TOL, n)),
        Euler2DKind::DoubleBracket => rep.push(Check::new("verify_euler2d.energy_decrease", production, SECOND_LAW_TOL, n)),
        Euler2DKind::Hamiltonian => {}
    }
    rep.push(Check::new("verify_euler2d.circulation", circulation, SECOND_LAW_TOL, n));
    Ok(rep)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuantitySummary {
    pub initial: f64,
    #[serde(rename = "final")]
    pub last: f64,
    /// `max |q(t) − q(0)| / |q(0)|` (absolute when `q(0) = 0`).
    pub drift: f64,
    /// Largest increase between consecutive samples.
    pub max_increase: f64,
    /// Largest decrease between consecutive samples.
    pub max_decrease: f64,
}

impl QuantitySummary {
    fn of(v: &[f64]) -> Self {
        let v0 = v.first().copied().unwrap_or(0.0);
        let d = v.iter().map(|x| (x - v0).abs()).fold(0.0, f64::max);
        Self {
            initial: v0,
            last: v.last().copied().unwrap_or(0.0),
            drift: if v0 != 0.0 { d / v0.abs() } else { d },
            max_increase: v.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max),
            max_decrease: v.windows(2).map(|w| w[0] - w[1]).fold(0.0, f64::max),
        }
    }
}

/// Outcome of a simulation, written as `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub name: String,
    pub system: String,
    pub mode: String,
    /// `ok`, `violation` or `diverged`.
    pub status: String,
    pub violations: Vec<String>,
    pub t_end: f64,
    pub steps: usize,
    pub recorded: usize,
    pub energy: QuantitySummary,
    pub entropy: QuantitySummary,
    /// Number of steps with an entropy decrease beyond tolerance (ODE runs).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub entropy_step_violations: Option<usize>,
    pub casimirs: BTreeMap<String, QuantitySummary>,
    pub conservation_tolerance: f64,
    pub monotonicity_tolerance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub final_state: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diverged_at: Option<f64>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub extras: BTreeMap<String, Value>,
}

impl Summary {
    pub fn is_clean(&self) -> bool {
        self.status == "ok"
    }
}

/// Data written by a simulation besides the summary.
pub struct Simulation {
    pub summary: Summary,
    /// Trajectory or diagnostic series CSV; empty after divergence.
    pub csv: Vec<u8>,
    /// Final field snapshot CSV, for field models.
    pub snapshot: Option<Vec<u8>>,
}

fn conservation_tol(t: &Tolerances, t_end: f64) -> f64 {
    t.h_drift * (t_end / 100.0).max(1.0)
}

fn step_count(i: &IntegratorSpec) -> usize {
    metriplex_core::integrators::step_count(i.t_end, i.dt)
}

fn diverged(name: &str, system: &str, mode: &str, i: &IntegratorSpec, time: f64, last_state: Vec<f64>, field: bool) -> Simulation {
    let empty = QuantitySummary::of(&[]);
    let mut extras = BTreeMap::new();
    if field {
        extras.insert("last_state_l2".into(), json!(last_state.iter().map(|x| x * x).sum::<f64>().sqrt()));
    }
    Simulation {
        summary: Summary {
            name: name.into(),
            system: system.into(),
            mode: mode.into(),
            status: "diverged".into(),
            violations: vec![format!("integration diverged at t = {time}")],
            t_end: i.t_end,
            steps: step_count(i),
            recorded: 0,
            energy: empty.clone(),
            entropy: empty,
            entropy_step_violations: None,
            casimirs: BTreeMap::new(),
            conservation_tolerance: 0.0,
            monotonicity_tolerance: 0.0,
            final_state: if field { None } else { Some(last_state) },
            diverged_at: Some(time),
            extras,
        },
        csv: Vec::new(),
        snapshot: None,
    }
}

fn status(violations: &[String]) -> String {
    if violations.is_empty() { "ok" } else { "violation" }.into()
}

pub fn simulate(model: &Model, cfg: &RunConfig) -> Result<Simulation, CliError> {
    match model {
        Model::Ode(m) => simulate_ode(m, cfg),
        Model::Field1d(m) => simulate_field1d(m, cfg),
        Model::Euler2d(m) => simulate_euler2d(m, cfg),
    }
}

fn simulate_ode(m: &OdeModel, cfg: &RunConfig) -> Result<Simulation, CliError> {
    let i = &cfg.integrator;
    let settings = IntegrationSettings { t_end: i.t_end, dt: i.dt, mode: m.mode, method: i.method, record_every: i.record_every };
    let kind = cfg.system.kind();
    let traj = match m.system.integrate(&m.z0, &settings) {
        Ok(t) => t,
        Err(MetriplexError::Diverged { time, last_state }) => return Ok(diverged(cfg.name(), kind, m.mode.as_str(), i, time, last_state, false)),
        Err(e) => return Err(CliError::config(e)),
    };
    let tol = m.system.tolerances();
    let (ctol, stol) = (conservation_tol(tol, i.t_end), tol.s_step);
    let energy = QuantitySummary::of(&traj.energy);
    let entropy = QuantitySummary::of(&traj.entropy);
    let casimirs: BTreeMap<String, QuantitySummary> =
        traj.casimir_names.iter().enumerate().map(|(c, name)| (name.clone(), QuantitySummary::of(&traj.casimirs.iter().map(|r| r[c]).collect::<Vec<_>>()))).collect();
    let mut violations = Vec::new();
    if m.mode == Mode::DoubleBracket {
        if energy.max_increase > stol {
            violations.push(format!("energy increased by {:.3e}", energy.max_increase));
        }
        for (name, q) in &casimirs {
            if q.drift > ctol {
                violations.push(format!("Casimir {name} drifted by {:.3e}", q.drift));
            }
        }
    } else if traj.monitors.h_drift_exceeded {
        violations.push(format!("energy drift {:.3e} exceeds {ctol:.1e}", traj.monitors.h_drift));
    }
    if traj.monitors.s_monotonicity_flagged {
        violations.push(format!("entropy decreased on {} steps (max {:.3e})", traj.monitors.s_violations, traj.monitors.max_s_decrease));
    }
    if m.mode == Mode::Hamiltonian && entropy.drift > ctol {
        violations.push(format!("entropy drift {:.3e} under the Hamiltonian flow exceeds {ctol:.1e}", entropy.drift));
    }
    let mut extras = BTreeMap::new();
    if kind == "rigid_body" {
        let (axis, angle) = nearest_principal_axis(traj.final_state());
        extras.insert("principal_axis".into(), json!({ "axis": axis + 1, "angle_rad": angle }));
    }
    let mut csv = Vec::new();
    traj.write_csv(&mut csv).expect("write to memory");
    Ok(Simulation {
        summary: Summary {
            name: cfg.name().into(),
            system: kind.into(),
            mode: m.mode.as_str().into(),
            status: status(&violations),
            violations,
            t_end: i.t_end,
            steps: traj.monitors.steps,
            recorded: traj.len(),
            energy,
            entropy,
            entropy_step_violations: Some(traj.monitors.s_violations),
            casimirs,
            conservation_tolerance: ctol,
            monotonicity_tolerance: stol,
            final_state: Some(traj.final_state().to_vec()),
            diverged_at: None,
            extras,
        },
        csv,
        snapshot: None,
    })
}

/// What a field run must conserve and which way its entropy must move.
struct FieldLaws {
    conserve_energy: bool,
    conserve_entropy: bool,
    entropy_nondecreasing: bool,
    energy_nonincreasing: bool,
}

fn field_summary(cfg: &RunConfig, mode: &str, series: &FieldSeries, laws: FieldLaws, tol: &Tolerances, extras: BTreeMap<String, Value>) -> Summary {
    let i = &cfg.integrator;
    let (ctol, stol) = (conservation_tol(tol, i.t_end), tol.s_step);
    let energy = QuantitySummary::of(&series.energy);
    let entropy = QuantitySummary::of(&series.entropy);
    let casimirs = series.casimir_names.iter().enumerate().map(|(c, n)| (n.clone(), QuantitySummary::of(&series.casimirs.iter().map(|r| r[c]).collect::<Vec<_>>()))).collect();
    let mut violations = Vec::new();
    if laws.conserve_energy && energy.drift > ctol {
        violations.push(format!("energy drift {:.3e} exceeds {ctol:.1e}", energy.drift));
    }
    if laws.conserve_entropy && entropy.drift > ctol {
        violations.push(format!("entropy drift {:.3e} exceeds {ctol:.1e}", entropy.drift));
    }
    if laws.entropy_nondecreasing && entropy.max_decrease > stol {
        violations.push(format!("entropy decreased by {:.3e}", entropy.max_decrease));
    }
    if laws.energy_nonincreasing && energy.max_increase > stol {
        violations.push(format!("energy increased by {:.3e}", energy.max_increase));
    }
    Summary {
        name: cfg.name().into(),
        system: cfg.system.kind().into(),
        mode: mode.into(),
        status: status(&violations),
        violations,
        t_end: i.t_end,
        steps: step_count(i),
        recorded: series.len(),
        energy,
        entropy,
        entropy_step_violations: None,
        casimirs,
        conservation_tolerance: ctol,
        monotonicity_tolerance: stol,
        final_state: None,
        diverged_at: None,
        extras,
    }
}

fn evolve_settings(i: &IntegratorSpec) -> EvolveSettings {
    EvolveSettings { t_end: i.t_end, dt: i.dt, method: i.method, record_every: i.record_every }
}

fn simulate_field1d(m: &Field1dModel, cfg: &RunConfig) -> Result<Simulation, CliError> {
    let i = &cfg.integrator;
    let g = &m.grid;
    let mode = if m.full { "full" } else { "dissipative" };
    let run = evolve(
        &m.u0,
        g.dx(),
        &evolve_settings(i),
        &[],
        |u| field1d_rhs(m, u),
        |u| Ok(FieldDiagnostics { energy: m.kind.hamiltonian(g, u, &m.params), entropy: m.kind.entropy(g, u), casimirs: vec![] }),
    );
    let run = match run {
        Ok(r) => r,
        Err(MetriplexError::Diverged { time, last_state }) => return Ok(diverged(cfg.name(), "field1d", mode, i, time, last_state, true)),
        Err(e) => return Err(CliError::config(e)),
    };
    let mut extras = BTreeMap::new();
    extras.insert("dissipation".into(), json!(m.kind.as_str()));
    if m.kind == DissipationKind::KdvConserving {
        let s0 = kdv_dissipation(g, &FieldState1D { u: m.u0.clone() }, &m.params).map_err(CliError::config)?;
        let s1 = kdv_dissipation(g, &FieldState1D { u: run.final_state.clone() }, &m.params).map_err(CliError::config)?;
        extras.insert(
            "kdv_dissipation".into(),
            json!({ "initial": s0, "final": s1, "threshold": KDV_QUIESCENCE, "below_threshold": s0.abs() <= KDV_QUIESCENCE }),
        );
    }
    let laws = FieldLaws { conserve_energy: true, conserve_entropy: false, entropy_nondecreasing: true, energy_nonincreasing: false };
    let summary = field_summary(cfg, mode, &run.series, laws, &m.tolerances, extras);
    let mut csv = Vec::new();
    run.series.write_csv(&mut csv).expect("write to memory");
    let mut snap = Vec::new();
    write_snapshot_1d(g, &run.final_state, &mut snap).expect("write to memory");
    Ok(Simulation { summary, csv, snapshot: Some(snap) })
}

fn simulate_euler2d(m: &Euler2dModel, cfg: &RunConfig) -> Result<Simulation, CliError> {
    let i = &cfg.integrator;
    let model = &m.model;
    let mode = m.kind.as_str();
    let run = evolve(
        &m.omega0.omega,
        model.grid().cell_area(),
        &evolve_settings(i),
        &["circulation"],
        |w| Ok(model.rhs_with_advection(m.kind, &FieldState2D { omega: w.to_vec() }, m.lambda)?.omega),
        |w| Ok(FieldDiagnostics { energy: model.energy(w)?, entropy: model.enstrophy(w), casimirs: vec![model.circulation(w)] }),
    );
    let run = match run {
        Ok(r) => r,
        Err(MetriplexError::Diverged { time, last_state }) => return Ok(diverged(cfg.name(), "euler2d", mode, i, time, last_state, true)),
        Err(e) => return Err(CliError::config(e)),
    };
    let laws = match m.kind {
        Euler2DKind::Hamiltonian => FieldLaws { conserve_energy: true, conserve_entropy: true, entropy_nondecreasing: false, energy_nonincreasing: false },
        Euler2DKind::Metriplectic => FieldLaws { conserve_energy: true, conserve_entropy: false, entropy_nondecreasing: true, energy_nonincreasing: false },
        Euler2DKind::DoubleBracket => FieldLaws { conserve_energy: false, conserve_entropy: true, entropy_nondecreasing: false, energy_nonincreasing: true },
    };
    let mut extras = BTreeMap::new();
    extras.insert("scheme".into(), json!(format!("{:?}", model.scheme()).to_lowercase()));
    extras.insert("lambda".into(), json!(m.lambda));
    let summary = field_summary(cfg, mode, &run.series, laws, &m.tolerances, extras);
    let mut csv = Vec::new();
    run.series.write_csv(&mut csv).expect("write to memory");
    let mut snap = Vec::new();
    write_snapshot_2d(model.grid(), &run.final_state, &mut snap).expect("write to memory");
    Ok(Simulation { summary, csv, snapshot: Some(snap) })
}

/// Pretty JSON with a trailing newline.
pub fn to_json(v: &impl Serialize) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(v).expect("serializable");
    out.write_all(b"\n").expect("write to memory");
    out
}
