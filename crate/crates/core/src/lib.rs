//! Ultradifferentiable weight sequences, weighted seminorms and
//! short-time Fourier transform certificates.
//!
//! Comparisons such as `!(x > 0.0)` are written to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod commands;
pub mod config;
pub mod error;
pub mod export;
pub mod hermite;
pub mod komatsu;
pub mod numeric;
pub mod report;
pub mod seminorm;
pub mod sequence;
pub mod stft;
pub mod verify;
pub mod weights;

pub use error::{Error, Result};
