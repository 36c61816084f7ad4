//! Numerical laboratory for the small-time behaviour of `E_t = -t log p_t`
//! near the cut locus of closed-form model manifolds (circle, round sphere,
//! flat torus).
//!
//! The modules mirror the pipeline: exact geometry ([`manifold`]), exact heat
//! kernels and their derivatives ([`heatkernel`]), minimal geodesics and the
//! midpoint set ([`geodesy`]), Laplace-type integrals ([`laplace`]) and the
//! singular part of the Hessian ([`cutanalysis`]).

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::type_complexity, clippy::too_many_arguments)]

pub mod acceptance;
pub mod cli;
pub mod cutanalysis;
pub mod error;
pub mod geodesy;
pub mod heatkernel;
pub mod laplace;
pub mod manifold;
pub mod numerics;

pub use error::{Error, Result};
pub use manifold::{ModelManifold, Point, PolarDirection, TangentVector};
