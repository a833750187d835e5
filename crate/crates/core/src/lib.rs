// `!(x > 0.0)` also rejects NaN, which is the point of those checks
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod estimation;
pub mod exponents;
pub mod kernel;
pub mod mc;
pub mod quad;
pub mod special;

pub use error::{Result, RieszError};
pub mod operator;
pub mod profile;
