//! Turns a [`RunConfig`] into something that can be verified and integrated.

use std::f64::consts::TAU;
use std::sync::Arc;

use metriplex_core::constructors::lie_metriplectic_bracket;
use metriplex_core::dynamics::Tolerances;
use metriplex_core::field::LiePoisson;
use metriplex_core::systems::{kida, kida_placeholder_hamiltonian, rigid_body, KidaParams, RigidBodyParams};
use metriplex_core::verify::SampleBox;
use metriplex_core::{MetriplecticSystem, Mode, PhaseState, Rank2Value, ScalarField};
use metriplex_fields::{DissipationKind, Euler2D, Euler2DKind, FieldState2D, Grid1D, Grid2D, JacobianScheme, KdvSoliton, Params1D};

use crate::config::{structure_constants, Initial1D, Initial2D, RunConfig, SystemSpec};
use crate::error::CliError;

pub struct OdeModel {
    pub system: MetriplecticSystem,
    pub mode: Mode,
    pub z0: PhaseState,
}

pub struct Field1dModel {
    pub grid: Grid1D,
    pub kind: DissipationKind,
    pub params: Params1D,
    /// Adds the Hamiltonian part `∂(u⁻²)` to the viscous flow.
    pub full: bool,
    pub u0: Vec<f64>,
    pub tolerances: Tolerances,
}

pub struct Euler2dModel {
    pub model: Euler2D,
    pub kind: Euler2DKind,
    pub lambda: f64,
    pub omega0: FieldState2D,
    pub tolerances: Tolerances,
}

pub enum Model {
    Ode(OdeModel),
    Field1d(Field1dModel),
    Euler2d(Euler2dModel),
}

fn tolerances(cfg: &RunConfig) -> Tolerances {
    cfg.tolerances.map_or_else(Tolerances::default, |t| Tolerances { h_drift: t.h_drift, s_step: t.s_step, degeneracy: t.degeneracy })
}

/// Builds the model; `seed` drives any randomly drawn initial data.
pub fn build(cfg: &RunConfig, seed: u64) -> Result<Model, CliError> {
    let mode = cfg.mode.as_deref();
    match &cfg.system {
        SystemSpec::RigidBody { .. } | SystemSpec::Kida { .. } | SystemSpec::LiePoisson { .. } => build_ode(cfg, seed).map(Model::Ode),
        SystemSpec::Field1d { dissipation, n, length, nu, weight, c, initial } => {
            let grid = Grid1D::new(*n, *length).map_err(CliError::config)?;
            let kind: DissipationKind = dissipation.parse().map_err(CliError::config)?;
            let full = match mode.unwrap_or("dissipative") {
                "dissipative" => false,
                "full" if kind == DissipationKind::Viscous => true,
                "full" => return Err(CliError::Config(format!("mode 'full' exists only for the viscous kind, not {kind}"))),
                m => return Err(CliError::Config(format!("unknown field1d mode '{m}' (expected dissipative or full)"))),
            };
            let u0 = initial_1d(&grid, initial, seed)?;
            if full && u0.iter().any(|x| !(*x > 0.0)) {
                return Err(CliError::Config("mode 'full' needs strictly positive initial data".into()));
            }
            Ok(Model::Field1d(Field1dModel { grid, kind, params: Params1D { nu: *nu, weight: *weight, c: *c }, full, u0, tolerances: tolerances(cfg) }))
        }
        SystemSpec::Euler2d { n, scheme, lambda, initial } => {
            let scheme: JacobianScheme = scheme.as_deref().unwrap_or("spectral").parse().map_err(CliError::config)?;
            let kind: Euler2DKind = mode.unwrap_or("metriplectic").parse().map_err(CliError::config)?;
            if !lambda.is_finite() {
                return Err(CliError::Config("lambda must be finite".into()));
            }
            let model = Euler2D::new(Grid2D::new(*n, *n, TAU, TAU).map_err(CliError::config)?, scheme);
            let raw = initial_2d(model.grid(), initial, seed);
            let omega0 = model.prepare(&raw).map_err(CliError::config)?;
            Ok(Model::Euler2d(Euler2dModel { model, kind, lambda: *lambda, omega0, tolerances: tolerances(cfg) }))
        }
    }
}

fn build_ode(cfg: &RunConfig, seed: u64) -> Result<OdeModel, CliError> {
    // D = J g Jᵀ lowers H only for negative g, as for the Killing form of a compact algebra
    let system = match &cfg.system {
        SystemSpec::RigidBody { inertia, lambda } => rigid_body(RigidBodyParams { inertia: *inertia, lambda: *lambda })
            .and_then(|s| s.with_double_bracket_metric(Rank2Value::identity(3).scale(-1.0)))
            .map_err(CliError::config)?,
        SystemSpec::Kida { lambda, hamiltonian } => {
            let h: Arc<dyn ScalarField> = match hamiltonian {
                Some(spec) => Arc::new(spec.polynomial()?),
                None => Arc::new(kida_placeholder_hamiltonian()),
            };
            kida(KidaParams { hamiltonian: h, lambda: *lambda })
                .and_then(|s| s.with_double_bracket_metric(Rank2Value::identity(3).scale(-1.0)))
                .map_err(CliError::config)?
        }
        SystemSpec::LiePoisson { structure_constants: triples, dim, metric, hamiltonian, entropy, double_bracket_metric, casimirs } => {
            let c = structure_constants(*dim, triples)?;
            let g4 = metric.resolve(&c)?;
            // the entropy is deliberately not required to be a Casimir here:
            // verification reports it instead of refusing to build
            let mut sys = MetriplecticSystem::new("lie_poisson", Arc::new(hamiltonian.polynomial()?), Arc::new(entropy.polynomial()?))
                .and_then(|s| s.with_poisson(Arc::new(LiePoisson::new(c.clone()))))
                .and_then(|s| s.with_four_bracket(Arc::new(lie_metriplectic_bracket(&c, &g4)?)))
                .map_err(CliError::config)?;
            if let Some(m) = double_bracket_metric {
                sys = sys.with_double_bracket_metric(m.resolve(&c)?).map_err(CliError::config)?;
            }
            for named in casimirs {
                sys = sys.with_casimir(named.name.clone(), Arc::new(named.function.polynomial()?)).map_err(CliError::config)?;
            }
            sys
        }
        _ => unreachable!("field systems are built elsewhere"),
    };
    let mut system = system.with_tolerances(tolerances(cfg));
    if let Some(b) = &cfg.verification.sample_box {
        system = system.with_sample_box(SampleBox::new(b.lo.clone(), b.hi.clone()).map_err(CliError::config)?).map_err(CliError::config)?;
    }
    let mode: Mode = cfg.mode.as_deref().unwrap_or("full").parse().map_err(CliError::config)?;
    let z0 = match &cfg.initial_state {
        Some(z) => PhaseState::new(z.clone()).map_err(CliError::config)?,
        None => system.sample_box().sample(1, seed.wrapping_add(1)).remove(0),
    };
    if z0.dim() != system.dim() {
        return Err(CliError::Config(format!("initial_state has {} entries, the system has dimension {}", z0.dim(), system.dim())));
    }
    Ok(OdeModel { system, mode, z0 })
}

/// `count` coefficients uniform in `±amplitude` from the seeded sampler.
fn coefficients(count: usize, amplitude: f64, seed: u64) -> Vec<f64> {
    if count == 0 {
        return Vec::new();
    }
    SampleBox::cube(count, -amplitude.abs(), amplitude.abs()).sample(1, seed).remove(0).into_inner()
}

fn initial_1d(grid: &Grid1D, initial: &Initial1D, seed: u64) -> Result<Vec<f64>, CliError> {
    let k = TAU / grid.length();
    let fourier = |offset: f64, modes: &[(u32, f64, f64)]| {
        grid.sample(|x| offset + modes.iter().map(|&(m, a, b)| a * (k * m as f64 * x).cos() + b * (k * m as f64 * x).sin()).sum::<f64>()).u
    };
    Ok(match initial {
        Initial1D::Soliton { alpha, center } => {
            if !(*alpha > 0.0) {
                return Err(CliError::Config("soliton alpha must be positive".into()));
            }
            KdvSoliton { alpha: *alpha, center: *center }.sample(grid).u
        }
        Initial1D::Fourier { offset, modes } => fourier(*offset, modes),
        Initial1D::Random { modes, amplitude, offset } => {
            let c = coefficients(2 * *modes as usize, *amplitude, seed);
            let list: Vec<(u32, f64, f64)> = (0..*modes).map(|m| (m + 1, c[2 * m as usize], c[2 * m as usize + 1])).collect();
            fourier(*offset, &list)
        }
    })
}

fn initial_2d(grid: &Grid2D, initial: &Initial2D, seed: u64) -> Vec<f64> {
    let fourier = |modes: &[(i32, i32, f64, f64)]| {
        grid.sample(|x, y| {
            modes
                .iter()
                .map(|&(kx, ky, a, b)| {
                    let p = kx as f64 * x + ky as f64 * y;
                    a * p.cos() + b * p.sin()
                })
                .sum()
        })
        .omega
    };
    match initial {
        Initial2D::Default => grid
            .sample(|x, y| x.sin() * y.cos() + 0.6 * (2.0 * x).cos() + 0.4 * (x + 2.0 * y).sin() + 0.3 * (3.0 * y).cos() * x.sin())
            .omega,
        Initial2D::Fourier(modes) => fourier(modes),
        Initial2D::Random { modes, amplitude } => {
            let m = *modes as i32;
            let waves: Vec<(i32, i32)> = (-m..=m).flat_map(|kx| (-m..=m).map(move |ky| (kx, ky))).filter(|&(kx, ky)| kx > 0 || (kx == 0 && ky > 0)).collect();
            let c = coefficients(2 * waves.len(), *amplitude, seed);
            let list: Vec<_> = waves.iter().enumerate().map(|(i, &(kx, ky))| (kx, ky, c[2 * i], c[2 * i + 1])).collect();
            fourier(&list)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(text: &str) -> RunConfig {
        RunConfig::from_json(text).unwrap()
    }

    #[test]
    fn ode_systems_build() {
        let m = build(&cfg(r#"{"schema_version": 1, "system": {"kind": "rigid_body"}, "initial_state": [1, 1, 1]}"#), 0).unwrap();
        let Model::Ode(m) = m else { panic!() };
        assert_eq!(m.mode, Mode::Full);
        assert_eq!(m.z0.coords(), &[1.0, 1.0, 1.0]);
        assert!(m.system.vector_field(&m.z0, Mode::DoubleBracket).is_ok());
        let lp = r#"{"schema_version": 1, "system": {"kind": "lie_poisson", "dim": 3,
            "structure_constants": [[1,2,3,-1],[2,3,1,-1],[3,1,2,-1]],
            "metric": {"identity": 1}, "hamiltonian": {"quadratic": [[1,0,0],[0,0.5,0],[0,0,0.25]]},
            "entropy": {"linear": [1,0,0]}}, "mode": "km"}"#;
        assert!(matches!(build(&cfg(lp), 0).unwrap(), Model::Ode(OdeModel { mode: Mode::Km, .. })));
    }

    #[test]
    fn random_initial_data_follows_the_seed() {
        let text = r#"{"schema_version": 1, "system": {"kind": "field1d", "dissipation": "viscous", "n": 32,
            "initial": {"random": {"modes": 3, "amplitude": 1}}}}"#;
        let u = |seed| match build(&cfg(text), seed).unwrap() {
            Model::Field1d(m) => m.u0,
            _ => unreachable!(),
        };
        assert_eq!(u(4), u(4));
        assert_ne!(u(4), u(5));
        let k = |seed| match build(&cfg(r#"{"schema_version": 1, "system": {"kind": "kida"}}"#), seed).unwrap() {
            Model::Ode(m) => m.z0,
            _ => unreachable!(),
        };
        assert_eq!(k(1), k(1));
        assert_ne!(k(1), k(2));
    }

    #[test]
    fn field_models_validate() {
        let e = r#"{"schema_version": 1, "system": {"kind": "euler2d", "n": 16, "initial": {"random": {"modes": 2, "amplitude": 1}}}, "mode": "double_bracket"}"#;
        let Model::Euler2d(m) = build(&cfg(e), 0).unwrap() else { panic!() };
        assert_eq!(m.kind, Euler2DKind::DoubleBracket);
        assert!(m.model.circulation(&m.omega0.omega).abs() < 1e-12);
        let bad_mode = r#"{"schema_version": 1, "system": {"kind": "euler2d"}, "mode": "full"}"#;
        assert!(build(&cfg(bad_mode), 0).is_err());
        let kdv_full = r#"{"schema_version": 1, "system": {"kind": "field1d", "dissipation": "kdv_conserving",
            "initial": {"soliton": {"alpha": 0.5, "center": 3}}}, "mode": "full"}"#;
        assert!(build(&cfg(kdv_full), 0).is_err());
        let negative = r#"{"schema_version": 1, "system": {"kind": "field1d", "dissipation": "viscous",
            "initial": {"fourier": {"offset": 0, "modes": [[1, 1, 0]]}}}, "mode": "full"}"#;
        assert!(build(&cfg(negative), 0).is_err());
    }
}
