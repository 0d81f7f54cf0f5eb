//! The landfall regressors: configurations, training and prediction.
//!
//! * intensity-time: three stacked LSTM layers (swish, beta = 2) and a dense
//!   head emitting (MSWS knots, hours to landfall); targets stay in natural units.
//! * location: three stacked BiLSTM layers (ReLU) and a dense head emitting
//!   (latitude, longitude); targets are standardized for training.
//! * ANN and GRU baselines for either target set.

mod config;
mod train;

pub use config::{
    baseline_config, Architecture, BaselineKind, ModelConfig, TargetSet, DEFAULT_BATCH, DEFAULT_EPOCHS, DEFAULT_HIDDEN,
    DEFAULT_LEARNING_RATE,
};
pub use train::{train, train_with_progress, TrainedModel, TrainingMetadata};
