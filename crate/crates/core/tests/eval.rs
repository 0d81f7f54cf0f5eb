mod common;

use std::cell::RefCell;

use tclf_core::eval::{cross_validate, plan_folds, sliding_eval, Regressor, Trainer};
use tclf_core::models::{ModelConfig, TargetSet};
use tclf_core::windows::{Dataset, WindowSample};
use tclf_core::Result;

/// Returns each window's own targets.
struct Oracle(TargetSet);

impl Regressor for Oracle {
    fn target_set(&self) -> TargetSet {
        self.0
    }

    fn predict_samples(&self, samples: &[&WindowSample]) -> Result<Vec<[f64; 2]>> {
        Ok(samples.iter().map(|s| self.0.extract(&s.targets)).collect())
    }
}

/// Records what each fold trained on, then hands back an oracle.
struct Recorder {
    target_set: TargetSet,
    seen: RefCell<Vec<(Vec<String>, Vec<f64>)>>,
}

impl Trainer for Recorder {
    type Model = Oracle;

    fn name(&self) -> String {
        "oracle".into()
    }

    fn target_set(&self) -> TargetSet {
        self.target_set
    }

    fn fit(&self, dataset: &Dataset) -> Result<Oracle> {
        self.seen.borrow_mut().push((dataset.cyclone_ids(), dataset.feature_scaler().means().to_vec()));
        Ok(Oracle(self.target_set))
    }
}

/// Predicts a fixed offset from the truth.
struct Biased(f64);

impl Regressor for Biased {
    fn target_set(&self) -> TargetSet {
        TargetSet::IntensityTime
    }

    fn predict_samples(&self, samples: &[&WindowSample]) -> Result<Vec<[f64; 2]>> {
        Ok(samples.iter().map(|s| [s.targets.msws + self.0, s.targets.hours_to_landfall - self.0]).collect())
    }
}

#[test]
fn perfect_predictor_scores_zero_everywhere() {
    let tracks = common::corpus(10, |i| 8 + i % 3);
    let ids: Vec<&str> = tracks.iter().map(|t| t.cyclone_id()).collect();
    let plan = plan_folds(&ids, 5, 1).unwrap();
    for ts in [TargetSet::IntensityTime, TargetSet::Location] {
        let rec = Recorder { target_set: ts, seen: RefCell::new(Vec::new()) };
        let report = cross_validate(&tracks, 6, &rec, &plan).unwrap();
        assert_eq!(report.folds.len(), 5);
        for f in &report.folds {
            assert_eq!(f.mae, [0.0, 0.0]);
            assert_eq!(f.rmse, [0.0, 0.0]);
        }
        for t in &report.targets {
            assert_eq!((t.mae.mean, t.mae.std, t.rmse.mean, t.rmse.std), (0.0, 0.0, 0.0, 0.0));
        }
        match ts {
            TargetSet::Location => assert_eq!(report.distance_km.unwrap().mean, 0.0),
            TargetSet::IntensityTime => assert!(report.distance_km.is_none()),
        }
        for track in &tracks {
            let s = sliding_eval(track, &Oracle(ts), 6).unwrap();
            assert_eq!(s.mae, [0.0, 0.0]);
            assert_eq!(s.rmse, [0.0, 0.0]);
            assert!(s.mean_distance_km.unwrap_or(0.0) == 0.0);
        }
    }
}

#[test]
fn folds_refit_on_their_own_training_cyclones() {
    let tracks = common::corpus(10, |_| 8);
    let ids: Vec<&str> = tracks.iter().map(|t| t.cyclone_id()).collect();
    let plan = plan_folds(&ids, 5, 7).unwrap();
    let rec = Recorder { target_set: TargetSet::IntensityTime, seen: RefCell::new(Vec::new()) };
    let report = cross_validate(&tracks, 4, &rec, &plan).unwrap();
    let seen = rec.seen.into_inner();
    assert_eq!(seen.len(), 5);
    for (fold, (train_ids, means)) in seen.iter().enumerate() {
        let test = plan.test_ids(fold);
        assert_eq!(train_ids.len() + test.len(), 10);
        assert!(train_ids.iter().all(|id| !test.contains(&id.as_str())));
        let refs: Vec<_> = tracks.iter().filter(|t| !test.contains(&t.cyclone_id())).collect();
        let (expected, _) = Dataset::from_tracks(&refs, 4).unwrap();
        assert_eq!(means, expected.feature_scaler().means());
        assert_eq!(report.folds[fold].train_samples, expected.len());
        assert_eq!(report.folds[fold].test_samples, test.len() * 5);
    }
    assert_eq!(report.total_samples, 50);
}

#[test]
fn sliding_trace_layout() {
    let track = common::track("X", 12, 0.2);
    let s = sliding_eval(&track, &Biased(2.0), 8).unwrap();
    assert_eq!(s.trace.len(), 12 - 8 + 1);
    assert!(!s.seen_in_training);
    for (i, row) in s.trace.iter().enumerate() {
        let k = i as i64 + 1;
        assert_eq!(row.start_index, i + 1);
        assert_eq!(row.window_start_hour, 3 * (k - 1));
        assert_eq!(row.window_end_hour, 3 * (k + 6));
        assert_eq!(row.hour_of_prediction, 3 * (k + 8));
        assert_eq!(row.actual[1], (3 * (12 - (k + 7))) as f64);
        assert_eq!(row.predicted[0] - row.actual[0], 2.0);
    }
    assert_eq!(s.trace[0].hour_of_prediction, 27);
    assert_eq!(s.mae, [2.0, 2.0]);
    assert_eq!(s.rmse, [2.0, 2.0]);
    assert!(sliding_eval(&common::track("S", 5, 0.0), &Biased(0.0), 8).is_err());
}

#[test]
fn sliding_flags_training_cyclones() {
    let tracks = common::corpus(3, |_| 6);
    let refs: Vec<_> = tracks.iter().collect();
    let (ds, _) = Dataset::from_tracks(&refs, 4).unwrap();
    let m = tclf_core::models::train(&ModelConfig::intensity_time(4).with_hidden_width(4).with_epochs(1), &ds).unwrap();
    assert!(sliding_eval(&tracks[0], &m, 4).unwrap().seen_in_training);
    assert!(!sliding_eval(&common::track("new", 6, 0.9), &m, 4).unwrap().seen_in_training);
}

#[test]
fn figure_axis_positions() {
    let track = common::track("long", 30, 0.1);
    let s = sliding_eval(&track, &Biased(0.0), 8).unwrap();
    let at = |h: i64| s.trace.iter().find(|r| r.hour_of_prediction == h).unwrap();
    assert_eq!(at(27).window_start_hour, 0);
    assert_eq!(at(75).window_start_hour, 48);
}

#[test]
fn landfall_length_track_gives_one_prediction() {
    let track = common::track("short", 8, 0.1);
    let s = sliding_eval(&track, &Biased(1.0), 8).unwrap();
    assert_eq!(s.trace.len(), 1);
    assert_eq!(s.trace[0].actual[1], 0.0);
}
