use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::cv::{clamp_point, score, Regressor};
use crate::error::{Error, Result};
use crate::geo::{haversine_km, GeoPoint};
use crate::models::TargetSet;
use crate::track::CycloneTrack;
use crate::windows::{make_windows, WindowSample};
use crate::STEP_HOURS;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    /// 1-based index of the window's first observation.
    pub start_index: usize,
    pub window_start_hour: i64,
    pub window_end_hour: i64,
    /// Plotting position of the forecast, `3 (k + T)` hours since track start
    /// for the 1-based start index `k`: a window over hours 0..21 (T = 8) is
    /// plotted at hour 27, one 24-hour block plus one step.
    pub hour_of_prediction: i64,
    pub predicted: [f64; 2],
    pub actual: [f64; 2],
    pub distance_km: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlidingReport {
    pub cyclone_id: String,
    pub target_set: TargetSet,
    pub window_len: usize,
    pub trace: Vec<TraceRow>,
    pub mae: [f64; 2],
    pub rmse: [f64; 2],
    pub mean_distance_km: Option<f64>,
    /// The cyclone was part of the model's training data.
    pub seen_in_training: bool,
}

/// Slides a `window_len` window along one cyclone, forecasting from every
/// position, and scores the forecasts against the true landfall.
pub fn sliding_eval<R: Regressor>(track: &CycloneTrack, model: &R, window_len: usize) -> Result<SlidingReport> {
    let windows = make_windows(track, window_len)?;
    if windows.is_empty() {
        return Err(Error::EmptyDataset(alloc::format!(
            "cyclone {} has {} observations, fewer than the window length {window_len}",
            track.cyclone_id(),
            track.len()
        )));
    }
    let seen = model.training_cyclones().is_some_and(|ids| ids.iter().any(|id| id == track.cyclone_id()));
    if seen {
        log::warn!("cyclone {} was part of the training data; scores are optimistic", track.cyclone_id());
    }
    let target_set = model.target_set();
    let refs: Vec<&WindowSample> = windows.iter().collect();
    let preds = model.predict_samples(&refs)?;
    let (mae, rmse, mean_distance_km) = score(target_set, &refs, &preds)?;
    let mut trace = Vec::with_capacity(windows.len());
    for (w, p) in windows.iter().zip(&preds) {
        let (start, end) = w.hour_span();
        let distance_km = match target_set {
            TargetSet::Location => Some(haversine_km(clamp_point(p[0], p[1])?, GeoPoint::new(w.targets.latitude, w.targets.longitude)?)),
            TargetSet::IntensityTime => None,
        };
        trace.push(TraceRow {
            start_index: w.start_index,
            window_start_hour: start,
            window_end_hour: end,
            hour_of_prediction: STEP_HOURS * (w.start_index + window_len) as i64,
            predicted: *p,
            actual: target_set.extract(&w.targets),
            distance_km,
        });
    }
    Ok(SlidingReport {
        cyclone_id: track.cyclone_id().into(),
        target_set,
        window_len,
        trace,
        mae,
        rmse,
        mean_distance_km,
        seen_in_training: seen,
    })
}
