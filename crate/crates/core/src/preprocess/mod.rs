//! Track cleaning and feature engineering.

mod grade;
mod interpolate;
mod motion;
mod scaler;

pub use grade::{grade_of, Grade};
pub use interpolate::interpolate_gaps;
pub use motion::derive_motion;
pub use scaler::{fit_scaler, Scaler};

use alloc::string::String;

use crate::error::Result;
use crate::track::{CycloneTrack, Observation};

/// Gap-fills a landfall-truncated series and derives its motion features.
pub fn build_track(cyclone_id: impl Into<String>, origin: i64, observations: &[Observation]) -> Result<CycloneTrack> {
    let filled = interpolate_gaps(observations)?;
    let points = derive_motion(&filled)?;
    CycloneTrack::new(cyclone_id, origin, points)
}
