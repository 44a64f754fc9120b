// Negated comparisons are used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod detector;
pub mod error;
pub mod eval;
pub mod scoring;
pub mod stream_io;
pub mod tensor_sketch;

pub use error::{Error, Result};
