//! Moment-map geometry of linear actions of compact groups. Stability under
//! the complexified group is decided by Kempf-Ness flows, and approximate
//! zeros of nonlinear moment maps on equivariant slices are perturbed to
//! certified zeros.

pub mod algebra;
pub mod cli;
pub mod error;
pub mod hull;
pub mod invariants;
pub mod models;
pub mod moment;
pub mod perturb;
pub mod rational;
pub mod report;
pub mod sampling;
pub mod spec;
pub mod stability;

pub use algebra::{
    ops_limit, q_operator, stabilizer, ExpDirection, GroupAction, LieAlgebraBasis, OneParameterSubgroup, QOperator,
    StabilizerData, StatePoint, C64,
};
pub use error::{Error, Result};
pub use moment::{linear_moment, moment_derivative, slice_moment, MomentMap, MomentValue, PolynomialMap, SliceModel};
pub use stability::{kempf_ness_flow, torus_polystability, FlowOptions, StabilityClass, StabilityVerdict};
pub use perturb::{check_certificate, lambda_bound, perturb_to_zero, scaling_search, ZeroCertificate};
