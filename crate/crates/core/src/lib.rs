//! Meshless Hermite-HDMR finite differences for Dirichlet problems
//! `0.5 Laplacian u = phi` in high dimensions.
//!
//! The pipeline: enumerate the truncated index set ([`index_set`]), pick the
//! Gaussian scale from the node density ([`stencil::select_lambda`]), build a
//! weighted least-squares Laplacian stencil per interior node
//! ([`stencil`]), assemble the sparse reduced system ([`assembly`]) and solve
//! it iteratively ([`solver`]). [`experiment`] wraps the pipeline in the
//! repeated random-node benchmark protocol.

pub mod assembly;
pub mod error;
pub mod experiment;
pub mod geometry;
pub mod hermite;
pub mod index_set;
pub mod problems;
pub mod solver;
pub mod stencil;

pub use error::{Error, Result};
