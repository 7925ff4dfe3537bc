//! Floquet theory toolkit for Hill operators `-ψ'' + V ψ = z ψ` with complex
//! 2π-periodic trigonometric-polynomial potentials.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod monodromy;
pub mod ode;
pub mod parse;
pub mod picard;
pub mod potential;
pub mod report;
pub mod spectrum;

pub use monodromy::{
    discriminant, discriminant_derivative, discriminant_jet, integrate_monodromy, multipliers,
    reference_discriminant, DiscriminantJet, MonodromyError, MonodromyMatrix, MultiplierPair,
};
pub use ode::IntegratorConfig;
pub use potential::{FourierPotential, PotentialDocument, PotentialError};
