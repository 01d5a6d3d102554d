//! Classification of heavy-tailed noise by whether its variance is finite,
//! using the empirical cumulative fourth moment of the signal and of its
//! spectrogram sub-signals.

// `!(x > 0.0)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod distributions;
pub mod ecfm;
pub mod error;
pub mod gof;
pub mod io;
pub mod rng;
pub mod segment;
pub mod sim;
pub mod stats;
pub mod tfr;
pub mod verdict;

pub use error::{Error, Result};
