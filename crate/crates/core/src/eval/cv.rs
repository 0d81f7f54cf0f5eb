use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::folds::FoldPlan;
use super::metrics::{distance_error_km, mae, mean_and_std, rmse};
use crate::error::{Error, Result};
use crate::geo::GeoPoint;
use crate::models::{train, ModelConfig, TargetSet, TrainedModel};
use crate::track::CycloneTrack;
use crate::windows::{make_windows, Dataset, WindowSample};

/// Anything that maps windows to natural-unit target pairs.
pub trait Regressor {
    fn target_set(&self) -> TargetSet;

    fn predict_samples(&self, samples: &[&WindowSample]) -> Result<Vec<[f64; 2]>>;

    /// Cyclones seen during fitting, when known.
    fn training_cyclones(&self) -> Option<&[String]> {
        None
    }
}

/// Fits a fresh [`Regressor`] on one training split.
pub trait Trainer {
    type Model: Regressor;

    fn name(&self) -> String;

    fn target_set(&self) -> TargetSet;

    fn fit(&self, dataset: &Dataset) -> Result<Self::Model>;
}

impl Regressor for TrainedModel {
    fn target_set(&self) -> TargetSet {
        self.config.target_set
    }

    fn predict_samples(&self, samples: &[&WindowSample]) -> Result<Vec<[f64; 2]>> {
        let xs: Vec<_> = samples.iter().map(|s| &s.x).collect();
        self.predict_batch(&xs)
    }

    fn training_cyclones(&self) -> Option<&[String]> {
        Some(&self.metadata.training_cyclones)
    }
}

impl Trainer for ModelConfig {
    type Model = TrainedModel;

    fn name(&self) -> String {
        self.kind_name().into()
    }

    fn target_set(&self) -> TargetSet {
        self.target_set
    }

    fn fit(&self, dataset: &Dataset) -> Result<TrainedModel> {
        train(self, dataset)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    /// Population standard deviation across folds.
    pub std: f64,
}

impl Summary {
    fn of(values: &[f64]) -> Summary {
        let (mean, std) = mean_and_std(values);
        Summary { mean, std }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetSummary {
    pub target: String,
    pub mae: Summary,
    pub rmse: Summary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldMetrics {
    pub fold: usize,
    pub train_cyclones: usize,
    pub test_cyclones: usize,
    pub train_samples: usize,
    pub test_samples: usize,
    /// Per target, in target-set order.
    pub mae: [f64; 2],
    pub rmse: [f64; 2],
    /// Mean great-circle error of the landfall point (location models only).
    pub distance_km: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub model: String,
    pub target_set: TargetSet,
    pub window_len: usize,
    pub k: usize,
    pub seed: u64,
    pub folds: Vec<FoldMetrics>,
    pub targets: Vec<TargetSummary>,
    pub distance_km: Option<Summary>,
    pub total_samples: usize,
}

/// Per-target MAE/RMSE and mean distance error of predictions against windows.
pub(crate) fn score(target_set: TargetSet, samples: &[&WindowSample], preds: &[[f64; 2]]) -> Result<([f64; 2], [f64; 2], Option<f64>)> {
    if preds.len() != samples.len() {
        return Err(Error::invalid(alloc::format!(
            "{} predictions for {} windows",
            preds.len(),
            samples.len()
        )));
    }
    let mut m = [0.0; 2];
    let mut r = [0.0; 2];
    for j in 0..2 {
        let p: Vec<f64> = preds.iter().map(|v| v[j]).collect();
        let a: Vec<f64> = samples.iter().map(|s| target_set.extract(&s.targets)[j]).collect();
        m[j] = mae(&p, &a)?;
        r[j] = rmse(&p, &a)?;
    }
    let distance = match target_set {
        TargetSet::Location => {
            let mut total = 0.0;
            for (s, p) in samples.iter().zip(preds) {
                total += distance_error_km(clamp_point(p[0], p[1])?, GeoPoint::new(s.targets.latitude, s.targets.longitude)?);
            }
            Some(total / samples.len() as f64)
        }
        TargetSet::IntensityTime => None,
    };
    Ok((m, r, distance))
}

/// Predictions may stray outside the valid coordinate ranges; latitude is
/// clamped and longitude wrapped before measuring distance.
pub(crate) fn clamp_point(lat: f64, lon: f64) -> Result<GeoPoint> {
    if !lat.is_finite() || !lon.is_finite() {
        return Err(Error::NonFiniteInput("predicted position is not finite".into()));
    }
    let lon = if (-180.0..=180.0).contains(&lon) {
        lon
    } else {
        let mut wrapped = libm::fmod(lon + 180.0, 360.0);
        if wrapped < 0.0 {
            wrapped += 360.0;
        }
        wrapped - 180.0
    };
    GeoPoint::new(lat.clamp(-90.0, 90.0), lon)
}

/// Cyclone-level k-fold cross-validation. Each fold refits the feature (and
/// target) scalers on its own training windows only; metrics are reported
/// in natural units.
pub fn cross_validate<T: Trainer>(tracks: &[CycloneTrack], window_len: usize, trainer: &T, plan: &FoldPlan) -> Result<MetricReport> {
    let ids: BTreeSet<&str> = tracks.iter().map(|t| t.cyclone_id()).collect();
    if ids.len() != tracks.len() {
        return Err(Error::invalid("duplicate cyclone ids in cross-validation input"));
    }
    for id in &ids {
        if plan.fold_of(id).is_none() {
            return Err(Error::invalid(alloc::format!("cyclone {id} is not in the fold plan")));
        }
    }
    let target_set = trainer.target_set();
    let mut folds = Vec::with_capacity(plan.k);
    let mut total = 0;
    for fold in 0..plan.k {
        let (test, train_tracks): (Vec<&CycloneTrack>, Vec<&CycloneTrack>) =
            tracks.iter().partition(|t| plan.fold_of(t.cyclone_id()) == Some(fold));
        let (dataset, _) = Dataset::from_tracks(&train_tracks, window_len)?;
        let mut test_windows = Vec::new();
        for t in &test {
            test_windows.extend(make_windows(t, window_len)?);
        }
        if test_windows.is_empty() {
            return Err(Error::EmptyDataset(alloc::format!("fold {fold} has no test windows")));
        }
        log::info!(
            "fold {}/{}: {} training windows, {} test windows",
            fold + 1,
            plan.k,
            dataset.len(),
            test_windows.len()
        );
        let model = trainer.fit(&dataset)?;
        let refs: Vec<&WindowSample> = test_windows.iter().collect();
        let preds = model.predict_samples(&refs)?;
        let (m, r, d) = score(target_set, &refs, &preds)?;
        total += test_windows.len();
        folds.push(FoldMetrics {
            fold,
            train_cyclones: train_tracks.len(),
            test_cyclones: test.len(),
            train_samples: dataset.len(),
            test_samples: test_windows.len(),
            mae: m,
            rmse: r,
            distance_km: d,
        });
    }
    let targets = target_set
        .names()
        .iter()
        .enumerate()
        .map(|(j, name)| TargetSummary {
            target: (*name).into(),
            mae: Summary::of(&folds.iter().map(|f| f.mae[j]).collect::<Vec<_>>()),
            rmse: Summary::of(&folds.iter().map(|f| f.rmse[j]).collect::<Vec<_>>()),
        })
        .collect();
    let distance_km = match target_set {
        TargetSet::Location => Some(Summary::of(&folds.iter().filter_map(|f| f.distance_km).collect::<Vec<_>>())),
        TargetSet::IntensityTime => None,
    };
    Ok(MetricReport {
        model: trainer.name(),
        target_set,
        window_len,
        k: plan.k,
        seed: plan.seed,
        folds,
        targets,
        distance_km,
        total_samples: total,
    })
}
