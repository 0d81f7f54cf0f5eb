use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::{ModelConfig, TargetSet};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::nn::{clip_global_norm, init_params, mse_loss, AdamState, Network};
use crate::preprocess::{fit_scaler, Scaler};
use crate::windows::Dataset;
use crate::FEATURE_COUNT;

/// Keeps the shuffling stream independent of the initialization stream.
const SHUFFLE_STREAM: u64 = 0x5348_5546_464c_4531;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingMetadata {
    /// Mean training loss of each epoch, in the (possibly scaled) target space.
    pub epoch_losses: Vec<f64>,
    pub data_fingerprint: String,
    pub training_cyclones: Vec<String>,
    pub samples: usize,
}

impl TrainingMetadata {
    pub fn final_loss(&self) -> Option<f64> {
        self.epoch_losses.last().copied()
    }
}

/// A self-contained regressor: network, scalers and training record.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub config: ModelConfig,
    pub network: Network,
    pub feature_scaler: Scaler,
    pub target_scaler: Option<Scaler>,
    pub metadata: TrainingMetadata,
}

pub fn train(config: &ModelConfig, dataset: &Dataset) -> Result<TrainedModel> {
    train_with_progress(config, dataset, |_, _| {})
}

/// Trains for exactly `config.epochs` passes of shuffled mini-batch Adam on
/// the MSE loss, calling `progress(epoch, loss)` after each epoch.
pub fn train_with_progress(config: &ModelConfig, dataset: &Dataset, mut progress: impl FnMut(usize, f64)) -> Result<TrainedModel> {
    config.validate()?;
    if dataset.is_empty() {
        return Err(Error::invalid("cannot train on an empty dataset"));
    }
    if dataset.window_len() != config.window_len {
        return Err(Error::invalid(alloc::format!(
            "dataset windows have {} steps, config expects {}",
            dataset.window_len(),
            config.window_len
        )));
    }
    let feature_scaler = dataset.feature_scaler().clone();
    let raw_targets: Vec<[f64; 2]> = dataset
        .samples()
        .iter()
        .map(|s| config.target_set.extract(&s.targets))
        .collect();
    let target_scaler = if config.scale_targets {
        let names = config.target_set.names();
        Some(fit_scaler(&Matrix::from_rows(&raw_targets)?, &names)?)
    } else {
        None
    };
    let inputs: Vec<Matrix> = dataset
        .samples()
        .iter()
        .map(|s| feature_scaler.transform(&s.x))
        .collect::<Result<_>>()?;
    let targets: Vec<[f64; 2]> = raw_targets
        .iter()
        .map(|t| {
            let mut t = *t;
            if let Some(ts) = &target_scaler {
                ts.transform_row(&mut t);
            }
            t
        })
        .collect();

    let mut network = init_params(&config.layers, config.seed)?;
    let mut adam = AdamState::new(config.adam(), &network.params());
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ SHUFFLE_STREAM);
    let mut order: Vec<usize> = (0..inputs.len()).collect();
    let mut epoch_losses = Vec::with_capacity(config.epochs);

    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for batch in order.chunks(config.batch_size) {
            let xs = time_major(batch.iter().map(|&i| &inputs[i]), batch.len(), config.window_len);
            let y: Vec<f64> = batch.iter().flat_map(|&i| targets[i]).collect();
            let (pred, cache) = network.forward(&xs)?;
            let (loss, grad) = mse_loss(pred.as_slice(), &y)?;
            if !loss.is_finite() {
                return Err(Error::TrainingFault {
                    epoch,
                    reason: alloc::format!("loss became {loss}"),
                });
            }
            let grad = Matrix::from_vec(batch.len(), 2, grad)?;
            let mut grads = network.backward(&cache, &grad)?;
            if let Some(max) = config.clip_norm {
                clip_global_norm(&mut grads, max);
            }
            network.set_gradients(&grads);
            adam.step(&mut network.params_mut()).map_err(|e| match e {
                Error::TrainingFault { reason, .. } => Error::TrainingFault { epoch, reason },
                other => other,
            })?;
            total += loss * batch.len() as f64;
        }
        let mean = total / inputs.len() as f64;
        epoch_losses.push(mean);
        progress(epoch, mean);
    }

    Ok(TrainedModel {
        config: config.clone(),
        network,
        feature_scaler,
        target_scaler,
        metadata: TrainingMetadata {
            epoch_losses,
            data_fingerprint: dataset.fingerprint(),
            training_cyclones: dataset.cyclone_ids(),
            samples: dataset.len(),
        },
    })
}

/// Packs `batch` windows of `steps x 7` into one `batch x 7` matrix per step.
fn time_major<'a>(windows: impl Iterator<Item = &'a Matrix>, batch: usize, steps: usize) -> Vec<Matrix> {
    let mut xs: Vec<Matrix> = (0..steps).map(|_| Matrix::zeros(batch, FEATURE_COUNT)).collect();
    for (b, w) in windows.enumerate() {
        for (t, x) in xs.iter_mut().enumerate() {
            x.row_mut(b).copy_from_slice(w.row(t));
        }
    }
    xs
}

impl TrainedModel {
    pub fn target_set(&self) -> TargetSet {
        self.config.target_set
    }

    pub fn window_len(&self) -> usize {
        self.config.window_len
    }

    /// Natural-unit predictions for raw `T x 7` windows, in target-set order.
    pub fn predict_batch(&self, windows: &[&Matrix]) -> Result<Vec<[f64; 2]>> {
        if windows.is_empty() {
            return Ok(Vec::new());
        }
        let mut scaled = Vec::with_capacity(windows.len());
        for w in windows {
            if w.rows() != self.window_len() || w.cols() != FEATURE_COUNT {
                return Err(Error::invalid(alloc::format!(
                    "window is {}x{}, model expects {}x{}",
                    w.rows(),
                    w.cols(),
                    self.window_len(),
                    FEATURE_COUNT
                )));
            }
            if !w.is_finite() {
                return Err(Error::NonFiniteInput("window contains NaN or infinite values".into()));
            }
            scaled.push(self.feature_scaler.transform(w)?);
        }
        let xs = time_major(scaled.iter(), scaled.len(), self.window_len());
        let out = self.network.predict(&xs)?;
        Ok((0..out.rows())
            .map(|b| {
                let mut y = [out.get(b, 0), out.get(b, 1)];
                if let Some(ts) = &self.target_scaler {
                    ts.inverse_row(&mut y);
                }
                y
            })
            .collect())
    }

    pub fn predict(&self, window: &Matrix) -> Result<[f64; 2]> {
        Ok(self.predict_batch(&[window])?[0])
    }

    /// `(msws knots, hours to landfall)`.
    pub fn predict_intensity_time(&self, window: &Matrix) -> Result<(f64, f64)> {
        if self.target_set() != TargetSet::IntensityTime {
            return Err(Error::Usage("model predicts location, not intensity/time".into()));
        }
        let [m, h] = self.predict(window)?;
        Ok((m, h))
    }

    /// `(latitude, longitude)` in degrees.
    pub fn predict_location(&self, window: &Matrix) -> Result<(f64, f64)> {
        if self.target_set() != TargetSet::Location {
            return Err(Error::Usage("model predicts intensity/time, not location".into()));
        }
        let [la, lo] = self.predict(window)?;
        Ok((la, lo))
    }
}
