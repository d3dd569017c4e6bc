// Written as `!(x > 0.0)` on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod detect;
pub mod error;
pub mod eval;
pub mod model;
pub mod pipeline;
pub mod preprocess;
pub mod rootcause;
pub mod seed;
pub mod series;
pub mod sim;

pub use error::{Error, Result};
