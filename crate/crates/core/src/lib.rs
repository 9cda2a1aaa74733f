//! Metriplectic 4-brackets on finite-dimensional phase spaces.
//!
//! A metriplectic system evolves by `ż = J∇H + G∇S`, where the Poisson
//! tensor `J` conserves the energy `H` and annihilates the entropy `S`, and
//! the symmetric G-metric `G^{ik} = R^{ijkl} ∂_j H ∂_l H` comes from a
//! curvature-like 4-tensor `R`. The crate builds such tensors, checks their
//! symmetries, reduces them to 2-brackets, KM brackets and double brackets,
//! and integrates the resulting flows.

pub mod brackets;
pub mod constructors;
pub mod diff;
pub mod dynamics;
pub mod error;
pub mod field;
pub mod integrators;
pub mod systems;
pub mod tensor;
pub mod verify;

pub use brackets::StructureConstants;
pub use dynamics::{MetriplecticSystem, Mode, Trajectory};
pub use error::{MetriplexError, Result};
pub use field::{FourBracketField, MetricField, PoissonField, ScalarField};
pub use integrators::Method;
pub use tensor::{CovectorValue, PhaseState, Rank2Value, Rank4Value, SymmetryTag};
pub use verify::VerificationReport;
