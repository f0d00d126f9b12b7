//! Samplers, exact engines and a verification harness for tied-down
//! occupation-time limits: Mittag-Leffler and tied-down Mittag-Leffler
//! processes, renewal shifts, and intermittent interval maps.

// `!(x < y)` is used on purpose so that NaN inputs are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod error;
pub mod dynamics;
pub mod exec;
pub mod numeric;
pub mod paths;
pub mod processes;
pub mod renewal;
pub mod stats;

pub use error::{Error, Result};
