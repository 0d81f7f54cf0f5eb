//! Supervised samples: fixed-length observation windows with landfall targets.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::preprocess::{fit_scaler, Scaler};
use crate::track::CycloneTrack;
use crate::{FEATURE_COUNT, FEATURE_NAMES, STEP_HOURS};

/// Landfall targets attached to every window of a cyclone.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Targets {
    pub msws: f64,
    pub latitude: f64,
    pub longitude: f64,
    /// Hours from the window's last observation to landfall.
    pub hours_to_landfall: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowSample {
    pub cyclone_id: String,
    /// 1-based position of the window's first row within the track.
    pub start_index: usize,
    /// `T x 7` raw features in [`FEATURE_NAMES`] order.
    pub x: Matrix,
    pub targets: Targets,
}

impl WindowSample {
    pub fn window_len(&self) -> usize {
        self.x.rows()
    }

    /// Hours since track start of the window's first and last rows.
    pub fn hour_span(&self) -> (i64, i64) {
        let first = (self.start_index as i64 - 1) * STEP_HOURS;
        (first, first + (self.window_len() as i64 - 1) * STEP_HOURS)
    }
}

/// Emits the `T_L - T + 1` windows of a track; tracks shorter than `T` yield none.
pub fn make_windows(track: &CycloneTrack, window_len: usize) -> Result<Vec<WindowSample>> {
    if window_len < 2 {
        return Err(Error::invalid(alloc::format!(
            "window length must be at least 2, got {window_len}"
        )));
    }
    let total = track.len();
    if total < window_len {
        return Ok(Vec::new());
    }
    let landfall = track.landfall();
    let points = track.points();
    let mut out = Vec::with_capacity(total - window_len + 1);
    for k in 1..=total - window_len + 1 {
        let mut x = Matrix::zeros(window_len, FEATURE_COUNT);
        for (r, p) in points[k - 1..k - 1 + window_len].iter().enumerate() {
            x.row_mut(r).copy_from_slice(&p.features());
        }
        let last_row = k + window_len - 1;
        out.push(WindowSample {
            cyclone_id: track.cyclone_id().into(),
            start_index: k,
            x,
            targets: Targets {
                msws: landfall.msws,
                latitude: landfall.latitude,
                longitude: landfall.longitude,
                hours_to_landfall: (STEP_HOURS * (total - last_row) as i64) as f64,
            },
        });
    }
    Ok(out)
}

/// A track that produced no windows because it is shorter than `T`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkipRecord {
    pub cyclone_id: String,
    pub track_len: usize,
    pub window_len: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    window_len: usize,
    samples: Vec<WindowSample>,
    feature_scaler: Scaler,
}

impl Dataset {
    /// Windows every track (sorted by cyclone id, then start index) and fits
    /// the feature scaler on the stacked rows of all windows.
    pub fn from_tracks(tracks: &[&CycloneTrack], window_len: usize) -> Result<(Dataset, Vec<SkipRecord>)> {
        let mut ordered: Vec<&CycloneTrack> = tracks.to_vec();
        ordered.sort_by(|a, b| a.cyclone_id().cmp(b.cyclone_id()));
        let mut samples = Vec::new();
        let mut skipped = Vec::new();
        for t in ordered {
            let w = make_windows(t, window_len)?;
            if w.is_empty() {
                skipped.push(SkipRecord {
                    cyclone_id: t.cyclone_id().into(),
                    track_len: t.len(),
                    window_len,
                });
            }
            samples.extend(w);
        }
        if samples.is_empty() {
            return Err(Error::EmptyDataset(alloc::format!(
                "no track has at least {window_len} points"
            )));
        }
        let feature_scaler = fit_feature_scaler(&samples)?;
        Ok((
            Dataset {
                window_len,
                samples,
                feature_scaler,
            },
            skipped,
        ))
    }

    pub fn window_len(&self) -> usize {
        self.window_len
    }

    pub fn samples(&self) -> &[WindowSample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn feature_scaler(&self) -> &Scaler {
        &self.feature_scaler
    }

    /// Distinct cyclone ids present in the samples, sorted.
    pub fn cyclone_ids(&self) -> Vec<String> {
        let set: BTreeSet<&str> = self.samples.iter().map(|s| s.cyclone_id.as_str()).collect();
        set.into_iter().map(String::from).collect()
    }

    /// Scaler over the (latitude, longitude) targets of the samples.
    pub fn location_target_scaler(&self) -> Result<Scaler> {
        let rows: Vec<[f64; 2]> = self
            .samples
            .iter()
            .map(|s| [s.targets.latitude, s.targets.longitude])
            .collect();
        fit_scaler(&Matrix::from_rows(&rows)?, &["lat_landfall", "lon_landfall"])
    }

    /// SHA-256 over window length, cyclone ids, start indices and the bit
    /// patterns of every feature and target.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        h.update((self.window_len as u64).to_le_bytes());
        for s in &self.samples {
            h.update(s.cyclone_id.as_bytes());
            h.update([0u8]);
            h.update((s.start_index as u64).to_le_bytes());
            for v in s.x.as_slice() {
                h.update(v.to_bits().to_le_bytes());
            }
            let t = s.targets;
            for v in [t.msws, t.latitude, t.longitude, t.hours_to_landfall] {
                h.update(v.to_bits().to_le_bytes());
            }
        }
        h.finalize().iter().map(|b| alloc::format!("{b:02x}")).collect()
    }
}

fn fit_feature_scaler(samples: &[WindowSample]) -> Result<Scaler> {
    let rows: usize = samples.iter().map(|s| s.x.rows()).sum();
    let mut data = Vec::with_capacity(rows * FEATURE_COUNT);
    for s in samples {
        data.extend_from_slice(s.x.as_slice());
    }
    fit_scaler(&Matrix::from_vec(rows, FEATURE_COUNT, data)?, &FEATURE_NAMES)
}

/// Training dataset plus the held-out tracks and bookkeeping.
#[derive(Debug, Clone)]
pub struct DatasetBuild {
    pub dataset: Dataset,
    pub holdout: Vec<CycloneTrack>,
    pub skipped: Vec<SkipRecord>,
    /// Requested holdout ids that matched no track.
    pub unknown_holdout: Vec<String>,
}

/// Splits off the holdout cyclones and builds the training dataset from the rest.
pub fn build_dataset(tracks: &[CycloneTrack], window_len: usize, holdout_ids: &BTreeSet<String>) -> Result<DatasetBuild> {
    let (held, train): (Vec<&CycloneTrack>, Vec<&CycloneTrack>) =
        tracks.iter().partition(|t| holdout_ids.contains(t.cyclone_id()));
    let present: BTreeSet<&str> = tracks.iter().map(|t| t.cyclone_id()).collect();
    let unknown_holdout: Vec<String> = holdout_ids
        .iter()
        .filter(|id| !present.contains(id.as_str()))
        .cloned()
        .collect();
    for id in &unknown_holdout {
        log::warn!("holdout cyclone {id} not present in tracks");
    }
    let (dataset, skipped) = Dataset::from_tracks(&train, window_len)?;
    log::info!("dataset size for T={}: {} windows", window_len, dataset.len());
    Ok(DatasetBuild {
        dataset,
        holdout: held.into_iter().cloned().collect(),
        skipped,
        unknown_holdout,
    })
}
