//! Recipes producing minimal-metriplectic and algebraic-curvature 4-tensors,
//! plus the conversion of a GENERIC friction matrix to metriplectic form.

mod algebraic;
mod connection;
mod generic;

pub use algebraic::{
    b_tensor, cartan_killing, ck_4tensor, kn_product, lie_algebra_4tensor, lie_metriplectic_bracket, space_form, torsion_removal,
};
pub use connection::{
    contravariant_christoffel, contravariant_curvature, levi_civita, riemann_from_affine, ChristoffelField, ChristoffelValue,
    ConnectionKind, ConstantConnection, ContravariantChristoffelField, ContravariantCurvatureField, LeviCivitaField, RiemannField,
};
pub use generic::{generic_linearize, generic_symmetrize};
