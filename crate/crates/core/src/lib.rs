//! Pore architecture characterisation and luminance sonification for
//! grayscale volumetric slice stacks.
//!
//! The crate is organised as a set of pipeline stages:
//!
//! * [`volume`] and [`tiles`]: slice-stack ingest, bit-depth conversion,
//!   cropping, downsampling and tiling.
//! * [`segmentation`]: Otsu binarisation, majority filtering, Euclidean
//!   distance transform, median filtering and marker-based watershed.
//! * [`metrics`]: porosity, equivalent-sphere pore sizes, dilation-based
//!   connectivity and geometric tortuosity over the pore network.
//! * [`sonify`]: histogram-driven additive synthesis, per-pixel pitch mode,
//!   WAV encoding and a spectral peak picker.
//! * [`stats`]: MSE, luminance statistics and original-vs-generated reports.
//! * [`synthetic`]: phantom volumes with known ground truth plus brute-force
//!   reference implementations.
//! * [`pipeline`]: the on-disk stages wired together by the CLI.

pub mod error;
pub mod fsutil;
pub mod imageio;
pub mod manifest;
pub mod metrics;
pub mod pipeline;
pub mod segmentation;
pub mod selftest;
pub mod sonify;
pub mod stats;
pub mod synthetic;
pub mod tiles;
pub mod volume;

pub use error::{Error, Result};
pub use volume::{GrayImage, GrayVolume};
