#![allow(clippy::neg_cmp_op_on_partial_ord)]
//! Effective partition function and measure of states of a harmonically
//! bound charge in a photon field.

pub mod error;
pub mod exec;
pub mod quad;
pub mod special;

pub use error::{Error, Result};
pub use exec::Execution;
pub use quad::PrecisionPolicy;
pub mod model;
pub mod partition;
pub mod density;
pub mod discretization;
pub mod transforms;
pub mod verify;
