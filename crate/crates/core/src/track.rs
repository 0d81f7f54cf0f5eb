//! Track records shared by preprocessing, windowing and evaluation.

use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geo::GeoPoint;
use crate::{FEATURE_COUNT, STEP_HOURS};

/// A raw observation positioned in hours since the first record of its cyclone.
///
/// Hours are multiples of [`STEP_HOURS`]; gaps are allowed and are filled by
/// [`crate::preprocess::interpolate_gaps`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub hour: i64,
    pub latitude: f64,
    pub longitude: f64,
    pub msws: f64,
    pub ecp: f64,
    pub sst: f64,
    pub landfall: bool,
}

/// One 3-hourly point of a cleaned track, with its motion since the previous point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackPoint {
    /// Hours since the start of the track.
    pub t: i64,
    pub msws: f64,
    pub ecp: f64,
    pub sst: f64,
    /// Kilometres moved since the previous point.
    pub distance: f64,
    /// Initial bearing from the previous point, degrees in [0, 360).
    pub direction: f64,
    pub latitude: f64,
    pub longitude: f64,
}

impl TrackPoint {
    /// Feature vector in window column order (see [`crate::FEATURE_NAMES`]).
    pub fn features(&self) -> [f64; FEATURE_COUNT] {
        [
            self.msws,
            self.ecp,
            self.sst,
            self.distance,
            self.direction,
            self.latitude,
            self.longitude,
        ]
    }

    pub fn position(&self) -> Result<GeoPoint> {
        GeoPoint::new(self.latitude, self.longitude)
    }
}

/// A cleaned cyclone track ending at its landfall observation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycloneTrack {
    cyclone_id: String,
    /// Unix seconds of the first point; 0 when unknown.
    origin: i64,
    points: Vec<TrackPoint>,
}

impl CycloneTrack {
    /// Checks the track invariants: at least two points, exact 3-hour spacing
    /// from t = 0, finite fields and a zero-motion first point.
    pub fn new(cyclone_id: impl Into<String>, origin: i64, points: Vec<TrackPoint>) -> Result<Self> {
        let cyclone_id = cyclone_id.into();
        if points.len() < 2 {
            return Err(Error::invalid(alloc::format!(
                "track {cyclone_id} has {} points, need at least 2",
                points.len()
            )));
        }
        for (i, p) in points.iter().enumerate() {
            if p.t != i as i64 * STEP_HOURS {
                return Err(Error::invalid(alloc::format!(
                    "track {cyclone_id}: point {i} at {}h, expected {}h",
                    p.t,
                    i as i64 * STEP_HOURS
                )));
            }
            if !p.features().iter().all(|v| v.is_finite()) {
                return Err(Error::invalid(alloc::format!(
                    "track {cyclone_id}: point {i} has a non-finite field"
                )));
            }
            if p.distance < 0.0 || !(0.0..360.0).contains(&p.direction) {
                return Err(Error::invalid(alloc::format!(
                    "track {cyclone_id}: point {i} has invalid motion ({}, {})",
                    p.distance,
                    p.direction
                )));
            }
            p.position()?;
        }
        if points[0].distance != 0.0 || points[0].direction != 0.0 {
            return Err(Error::invalid(alloc::format!(
                "track {cyclone_id}: first point must have zero motion"
            )));
        }
        Ok(CycloneTrack {
            cyclone_id,
            origin,
            points,
        })
    }

    pub fn cyclone_id(&self) -> &str {
        &self.cyclone_id
    }

    pub fn origin(&self) -> i64 {
        self.origin
    }

    pub fn points(&self) -> &[TrackPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Index of the landfall observation, always the last point.
    pub fn landfall_index(&self) -> usize {
        self.points.len() - 1
    }

    pub fn landfall(&self) -> &TrackPoint {
        &self.points[self.landfall_index()]
    }
}
