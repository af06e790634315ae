//! Desk-scale laboratory for uniform-circular-array air-to-ground channels.
//!
//! The crate covers the full chain from synthetic array CIRs to
//! ensemble channel statistics:
//!
//! - [`channel`]: UCA steering vectors, the system shape function `u(τ)`
//!   and the `(antenna, snapshot, tap)` CIR tensor with its file format.
//! - [`synth`]: CIR synthesis from explicit path lists, scenario channel
//!   draws from per-height statistics, and calibration recordings.
//! - [`hrpe`]: SAGE-style multipath estimation with per-antenna
//!   amplitudes, model-order trimming and shape/Doppler calibration.
//! - [`clustering`]: multipath component distance and threshold
//!   clustering with CH/DB threshold selection.
//! - [`stats`]: composite and cluster-level statistics and ensemble
//!   summaries.
//! - [`pipeline`]: batch orchestration behind the `a2glab` binary.
//!
//! The `examples/` directory has one runnable program per capability.

// `!(x >= lo)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod clustering;
pub mod hrpe;
pub mod pipeline;
pub mod stats;
pub mod synth;

pub mod error;

pub use error::{Error, Result};
