//! Metriplectic field theories discretized on periodic grids.
//!
//! One-dimensional Kulkarni–Nomizu 4-brackets (viscous, KdV-preserving and
//! Hilbert-transform dissipation) and two-dimensional Euler vorticity with
//! its enstrophy 4-bracket, double-bracket and metriplectic reductions.
//! Operators act on grid samples directly; no matrices are formed.

pub mod euler2d;
pub mod evolve;
pub mod kn1d;
pub mod spectral;

pub use euler2d::{Euler2D, Euler2DKind, FieldState2D, Grid2D, JacobianScheme};
pub use evolve::{evolve, EvolveSettings, FieldDiagnostics, FieldRun, FieldSeries};
pub use kn1d::{dissipative_rhs_1d, kdv_dissipation, DissipationKind, KdvSoliton, KnBracket1D, Params1D, SigmaKind};
pub use spectral::{hilbert_transform, spectral_derivative, FieldState1D, Grid1D};
