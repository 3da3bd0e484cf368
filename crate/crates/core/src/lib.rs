// `!(x < 1.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod herglotz;
pub mod livsic;
pub mod model_space;
pub mod numerics;
pub mod orders;
pub mod partial_isometry;

pub use error::{Error, Result};
pub use numerics::{CMatrix, Tolerance};
pub use orders::{OrderVerdict, Outcome, Relation};
pub use partial_isometry::{CnuStatus, PartialIsometry};
