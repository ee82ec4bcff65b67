//! Two-step reconciliation for CV-QKD with multidimensional mapping.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod campaign;
pub mod channel;
pub mod error;
pub mod ldpc;
pub mod multidim;
pub mod protocol;
pub mod skr;

pub use error::{Error, Result};
