//! Numerical experiments for the semilinear heat equation
//! `∂ₜu = Δu + f(u, t)` on hyperbolic space and rotationally symmetric
//! model manifolds: blow-up versus global existence of small solutions.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod comparison;
pub mod error;
pub mod field;
pub mod geometry;
pub mod heat_kernel;
pub mod nonlinearity;
pub mod ode;
pub mod quad;
pub mod solver;
pub mod spectral;
pub mod sweep;

pub use error::{Error, Result};
pub use field::RadialField;
pub use geometry::{ManifoldModel, WarpSpec};
pub use nonlinearity::{Nonlinearity, TypeOneSpec, TypeTwoSpec};
