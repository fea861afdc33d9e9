//! Symmetry-reduced Lindblad dynamics for boundary-driven XXZ spin chains.
//!
//! Everything numeric is generic over [`scalar::Real`] (`f32` or `f64`);
//! the aliases below fix `f64`.
#![allow(
    clippy::neg_cmp_op_on_partial_ord,
    clippy::type_complexity,
    clippy::needless_range_loop,
    clippy::large_enum_variant
)]

pub mod error;
pub mod experiment;
pub mod linalg;
pub mod liouvillian;
pub mod models;
pub mod observables;
pub mod operator;
pub mod scalar;
pub mod spectra;
pub mod steadystate;
pub mod symmetry;
pub mod trajectories;

pub use error::{Error, Result};

pub type Operator = operator::SparseOperator<f64>;
pub type Density = operator::DensityMatrix<f64>;
pub type Model = models::OpenModel<f64>;
pub type Generator = liouvillian::Superoperator<f64>;
