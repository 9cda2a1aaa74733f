//! Ready-made systems: the dissipative free rigid body, the Kida vortex and
//! user-defined Lie-metriplectic systems.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::brackets::{max_norm, StructureConstants};
use crate::constructors::{lie_metriplectic_bracket, space_form};
use crate::dynamics::MetriplecticSystem;
use crate::error::{MetriplexError, Result};
use crate::field::{ConstantFourBracket, FourBracketFlags, LiePoisson, Polynomial, PoissonField, ScalarField};
use crate::tensor::{check_dims, Rank2Value};
use crate::verify::SampleBox;

/// Largest `|J∇S|` tolerated for an entropy to count as a Casimir.
pub const CASIMIR_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RigidBodyParams {
    /// Principal moments of inertia `(I1, I2, I3)`.
    pub inertia: [f64; 3],
    /// Dissipation strength.
    pub lambda: f64,
}

/// `H = Σ L_i² / (2 I_i)`.
pub fn rigid_body_hamiltonian(inertia: [f64; 3]) -> Polynomial {
    Polynomial::quadratic(&Rank2Value::diagonal(&inertia.map(|i| 1.0 / i)))
}

/// `|L|²`.
pub fn angular_momentum_squared() -> Polynomial {
    Polynomial::norm_squared_power(3, 1)
}

/// Free rigid body with `J` the `so(3)` Lie–Poisson tensor, `R = λ(δδ − δδ)`,
/// `S = |L|²` and `|L|²` monitored as a Casimir.
pub fn rigid_body(params: RigidBodyParams) -> Result<MetriplecticSystem> {
    if params.inertia.iter().any(|i| !(*i > 0.0 && i.is_finite())) {
        return Err(MetriplexError::InvalidParameter(format!("moments of inertia must be positive, got {:?}", params.inertia)));
    }
    if !params.lambda.is_finite() {
        return Err(MetriplexError::InvalidParameter("lambda must be finite".into()));
    }
    let r = ConstantFourBracket::new(space_form(&Rank2Value::identity(3), params.lambda)?, FourBracketFlags { algebraic: true, psd: params.lambda >= 0.0 });
    let s: Arc<dyn ScalarField> = Arc::new(angular_momentum_squared());
    MetriplecticSystem::new("rigid_body", Arc::new(rigid_body_hamiltonian(params.inertia)), s.clone())?
        .with_poisson(Arc::new(LiePoisson::new(StructureConstants::so3())))?
        .with_four_bracket(Arc::new(r))?
        .with_casimir("|L|^2", s)
}

/// Index of the principal axis nearest to `l` and the angle to it, in radians.
pub fn nearest_principal_axis(l: &[f64]) -> (usize, f64) {
    let n2: f64 = l.iter().map(|x| x * x).sum();
    let (axis, along) = l.iter().enumerate().map(|(i, x)| (i, x.abs())).fold((0, -1.0), |b, c| if c.1 > b.1 { c } else { b });
    let across = (n2 - along * along).max(0.0).sqrt();
    (axis, across.atan2(along))
}

#[derive(Clone)]
pub struct KidaParams {
    /// The Hamiltonian; it is not fixed by the bracket structure.
    pub hamiltonian: Arc<dyn ScalarField>,
    pub lambda: f64,
}

/// The Casimir `C = (z¹)² − (z²)² − (z³)²` of the Kida Poisson tensor.
pub fn kida_casimir() -> Polynomial {
    Polynomial::quadratic(&Rank2Value::diagonal(&[2.0, -2.0, -2.0]))
}

/// Stand-in Hamiltonian `½((z¹)² + (z³)²)`, independent of `z²`.
///
/// Not a physical vortex energy: it only exercises the bracket structure
/// when no Hamiltonian is supplied.
pub fn kida_placeholder_hamiltonian() -> Polynomial {
    Polynomial::quadratic(&Rank2Value::diagonal(&[1.0, 0.0, 1.0]))
}

/// Kida vortex: `J = [[0, z3, −z2], [−z3, 0, −z1], [z2, z1, 0]]` (an
/// `sl(2,R)` Lie–Poisson tensor), `R = λ(δδ − δδ)`, `S = C`.
pub fn kida(params: KidaParams) -> Result<MetriplecticSystem> {
    check_dims(3, &[params.hamiltonian.dim()])?;
    if !params.lambda.is_finite() {
        return Err(MetriplexError::InvalidParameter("lambda must be finite".into()));
    }
    let r = ConstantFourBracket::new(space_form(&Rank2Value::identity(3), params.lambda)?, FourBracketFlags { algebraic: true, psd: params.lambda >= 0.0 });
    let c: Arc<dyn ScalarField> = Arc::new(kida_casimir());
    MetriplecticSystem::new("kida", params.hamiltonian, c.clone())?
        .with_poisson(Arc::new(LiePoisson::new(StructureConstants::kida())))?
        .with_four_bracket(Arc::new(r))?
        .with_casimir("C", c)
}

/// Lie-metriplectic system: Lie–Poisson `J` from `c` and the torsion-free
/// part of `c^{ij}_r c^{kl}_s g4^{rs}` as `R`. `S` must be a Casimir of `J`
/// on `[−1, 1]^N`.
pub fn lie_poisson_system(
    c: &StructureConstants,
    g4: &Rank2Value,
    hamiltonian: Arc<dyn ScalarField>,
    entropy: Arc<dyn ScalarField>,
) -> Result<MetriplecticSystem> {
    let n = c.dim();
    check_dims(n, &[g4.dim(), hamiltonian.dim(), entropy.dim()])?;
    let j = LiePoisson::new(c.clone());
    let defect = SampleBox::cube(n, -1.0, 1.0)
        .sample(100, 0)
        .iter()
        .map(|z| max_norm(&j.eval(z).matvec(entropy.gradient(z).entries())))
        .fold(0.0, f64::max);
    if !(defect <= CASIMIR_TOL) {
        return Err(MetriplexError::NotCasimir("entropy".into(), defect));
    }
    let r = lie_metriplectic_bracket(c, g4)?;
    MetriplecticSystem::new("lie_poisson", hamiltonian, entropy.clone())?
        .with_poisson(Arc::new(j))?
        .with_four_bracket(Arc::new(r))?
        .with_casimir("S", entropy)
}
