//! Split-form SBP solver for the non-conservative GLM-MHD equations with
//! subcell finite-volume blending and invariant-domain limiting.

#![allow(
    clippy::needless_range_loop,
    clippy::neg_cmp_op_on_partial_ord,
    clippy::too_many_arguments
)]

pub mod benchmarks;
pub mod driver;
pub mod error;
pub mod flux_diff;
pub mod fluxes;
pub mod limiting;
pub mod mesh;
pub mod physics;
pub mod sbp_ops;
pub mod semidisc;
pub mod solver;
pub mod time_integration;
pub mod verification;

pub use error::{Error, Result};
