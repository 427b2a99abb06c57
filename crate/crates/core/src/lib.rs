//! Prime rasters on the Ulam spiral, block datasets for inpainting
//! experiments, and class-decomposed scoring with bootstrap intervals and
//! ratio-aligned random baselines.
//!
//! The modules follow the data flow:
//!
//! * [`primes`] sieves `[lo, hi)` windows into a [`primes::PrimalityBitmap`].
//! * [`spiral`] maps integers to spiral coordinates and renders a
//!   [`spiral::BitGrid`] for a [`spiral::RangeSpec`].
//! * [`dataset`] places disjoint in-band blocks, splits them into roles and
//!   generates reveal masks.
//! * [`metrics`] scores [`metrics::ProbMap`]s against ground truth.
//! * [`stats`] adds bootstrap intervals and the random baseline.
//! * [`report`] runs the cross-evaluation and writes tables.

pub mod bits;
pub mod config;
pub mod dataset;
pub mod error;
pub mod metrics;
pub mod pgm;
pub mod primes;
pub mod report;
pub mod spiral;
pub mod stats;

pub use error::{Error, Result};
