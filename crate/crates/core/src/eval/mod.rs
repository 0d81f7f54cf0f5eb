//! Error metrics, cyclone-level k-fold cross-validation and per-cyclone
//! sliding-window evaluation.

mod cv;
mod folds;
mod metrics;
mod sliding;

pub use cv::{cross_validate, FoldMetrics, MetricReport, Regressor, Summary, TargetSummary, Trainer};
pub use folds::{plan_folds, FoldPlan};
pub use metrics::{distance_error_km, mae, mean_and_std, rmse};
pub use sliding::{sliding_eval, SlidingReport, TraceRow};
