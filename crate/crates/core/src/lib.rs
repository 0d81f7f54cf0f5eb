//! Landfall forecasting engine for tropical cyclones.
//!
//! The crate is `no_std` (with `alloc`) so the numerical pieces can be embedded
//! anywhere; file formats, ingestion and the command line live in the `tclf`
//! companion crate.
//!
//! Pipeline, bottom-up:
//!
//! * [`geo`]: great-circle distance and bearing.
//! * [`preprocess`]: 3-hourly gap filling, motion features, standard scaling, IMD grades.
//! * [`windows`]: fixed-length observation windows with landfall targets.
//! * [`nn`]: dense / LSTM / BiLSTM / GRU layers with backpropagation through time and Adam.
//! * [`models`]: the intensity-time and location regressors plus ANN/GRU baselines.
//! * [`eval`]: MAE/RMSE, cyclone-level k-fold cross-validation, sliding evaluation.
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod error;
pub mod eval;
pub mod geo;
pub mod matrix;
pub mod models;
pub mod nn;
pub mod preprocess;
pub mod track;
pub mod windows;

pub use error::{Error, Result};
pub use geo::GeoPoint;
pub use matrix::Matrix;
pub use track::{CycloneTrack, Observation, TrackPoint};

/// Number of per-step input features.
pub const FEATURE_COUNT: usize = 7;

/// Input feature names in window column order.
pub const FEATURE_NAMES: [&str; FEATURE_COUNT] = [
    "msws", "ecp", "sst", "distance", "direction", "latitude", "longitude",
];

/// Hours between consecutive best-track observations.
pub const STEP_HOURS: i64 = 3;
