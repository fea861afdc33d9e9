//! Spin-1/2 many-body basis and sparse complex operator algebra.
//!
//! Basis ordering: site 1 is the most significant bit of the basis index, so
//! for `n = 3` the index of `|a_1 a_2 a_3⟩` is `4 a_1 + 2 a_2 + a_3`. The
//! `σ^z_i` eigenvalue of a basis state is `1 - 2 a_i`.

mod basis;
mod density;
mod site;
mod sparse;

pub use basis::BasisState;
pub use density::{expectation, DensityMatrix};
pub use site::{site_operator, SiteKind};
pub use sparse::{hs_inner, SparseOperator, PRUNE_EPS};
