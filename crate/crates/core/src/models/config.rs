use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::{Activation, AdamConfig, LayerKind, LayerSpec};
use crate::windows::Targets;
use crate::FEATURE_COUNT;

pub const DEFAULT_EPOCHS: usize = 150;
pub const DEFAULT_HIDDEN: usize = 64;
pub const DEFAULT_BATCH: usize = 32;
pub const DEFAULT_LEARNING_RATE: f64 = 0.01;
const ANN_HIDDEN: [usize; 5] = [1024, 512, 256, 128, 32];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetSet {
    /// (MSWS at landfall in knots, hours to landfall)
    IntensityTime,
    /// (latitude, longitude) of landfall in degrees
    Location,
}

impl TargetSet {
    pub fn names(self) -> [&'static str; 2] {
        match self {
            TargetSet::IntensityTime => ["msws_kt", "hours_to_landfall"],
            TargetSet::Location => ["lat_deg", "lon_deg"],
        }
    }

    pub fn extract(self, t: &Targets) -> [f64; 2] {
        match self {
            TargetSet::IntensityTime => [t.msws, t.hours_to_landfall],
            TargetSet::Location => [t.latitude, t.longitude],
        }
    }

    fn primary_activation(self) -> Activation {
        match self {
            TargetSet::IntensityTime => Activation::swish(2.0).expect("beta 2 is valid"),
            TargetSet::Location => Activation::RELU,
        }
    }
}

impl fmt::Display for TargetSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TargetSet::IntensityTime => "intensity-time",
            TargetSet::Location => "location",
        })
    }
}

impl FromStr for TargetSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "intensity-time" | "intensity_time" => Ok(TargetSet::IntensityTime),
            "location" => Ok(TargetSet::Location),
            other => Err(Error::Usage(alloc::format!("unknown target set '{other}'"))),
        }
    }
}

/// Network family, used to validate the layer stack.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Architecture {
    /// LSTM stack for intensity-time, BiLSTM stack for location.
    Recurrent,
    Ann,
    Gru,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BaselineKind {
    Ann,
    Gru,
    Cnn1d,
}

impl FromStr for BaselineKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ann" => Ok(BaselineKind::Ann),
            "gru" => Ok(BaselineKind::Gru),
            "1d-cnn" | "cnn" | "cnn1d" => Ok(BaselineKind::Cnn1d),
            other => Err(Error::Usage(alloc::format!("unknown baseline '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub target_set: TargetSet,
    pub architecture: Architecture,
    pub window_len: usize,
    pub layers: Vec<LayerSpec>,
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub seed: u64,
    pub scale_targets: bool,
    /// Global gradient-norm cap; off unless set.
    pub clip_norm: Option<f64>,
    /// Skips the stack-shape checks in [`ModelConfig::validate`].
    pub research_mode: bool,
}

fn recurrent_stack(kind: LayerKind, hidden: usize, activation: Activation) -> Vec<LayerSpec> {
    let width = if kind == LayerKind::Bilstm { 2 * hidden } else { hidden };
    vec![
        LayerSpec::recurrent(kind, FEATURE_COUNT, hidden, true, activation),
        LayerSpec::recurrent(kind, width, hidden, true, activation),
        LayerSpec::recurrent(kind, width, hidden, false, activation),
        LayerSpec::dense(width, 2, Activation::LINEAR),
    ]
}

impl ModelConfig {
    fn base(target_set: TargetSet, architecture: Architecture, window_len: usize, layers: Vec<LayerSpec>) -> Self {
        ModelConfig {
            target_set,
            architecture,
            window_len,
            layers,
            epochs: DEFAULT_EPOCHS,
            learning_rate: DEFAULT_LEARNING_RATE,
            batch_size: DEFAULT_BATCH,
            seed: 0,
            scale_targets: target_set == TargetSet::Location,
            clip_norm: None,
            research_mode: false,
        }
    }

    /// Three stacked LSTM layers (swish, beta = 2) and a width-2 dense head;
    /// targets are not scaled.
    pub fn intensity_time(window_len: usize) -> Self {
        let act = TargetSet::IntensityTime.primary_activation();
        Self::base(
            TargetSet::IntensityTime,
            Architecture::Recurrent,
            window_len,
            recurrent_stack(LayerKind::Lstm, DEFAULT_HIDDEN, act),
        )
    }

    /// Three stacked BiLSTM layers (ReLU) and a width-2 dense head; latitude
    /// and longitude targets are standardized.
    pub fn location(window_len: usize) -> Self {
        let act = TargetSet::Location.primary_activation();
        Self::base(
            TargetSet::Location,
            Architecture::Recurrent,
            window_len,
            recurrent_stack(LayerKind::Bilstm, DEFAULT_HIDDEN, act),
        )
    }

    pub fn primary(target_set: TargetSet, window_len: usize) -> Self {
        match target_set {
            TargetSet::IntensityTime => Self::intensity_time(window_len),
            TargetSet::Location => Self::location(window_len),
        }
    }

    /// Rebuilds the recurrent stack with `hidden` units per layer (per
    /// direction for BiLSTM). The ANN layer sizes are fixed and unaffected.
    pub fn with_hidden_width(mut self, hidden: usize) -> Self {
        let act = self.layers[0].activation;
        self.layers = match self.architecture {
            Architecture::Ann => return self,
            Architecture::Gru => recurrent_stack(LayerKind::Gru, hidden, act),
            Architecture::Recurrent => match self.target_set {
                TargetSet::IntensityTime => recurrent_stack(LayerKind::Lstm, hidden, act),
                TargetSet::Location => recurrent_stack(LayerKind::Bilstm, hidden, act),
            },
        };
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_epochs(mut self, epochs: usize) -> Self {
        self.epochs = epochs;
        self
    }

    pub fn adam(&self) -> AdamConfig {
        AdamConfig {
            learning_rate: self.learning_rate,
            ..AdamConfig::default()
        }
    }

    /// Short name used on the command line and in reports.
    pub fn kind_name(&self) -> &'static str {
        match (self.architecture, self.target_set) {
            (Architecture::Recurrent, TargetSet::IntensityTime) => "intensity-time",
            (Architecture::Recurrent, TargetSet::Location) => "location",
            (Architecture::Ann, _) => "ann",
            (Architecture::Gru, _) => "gru",
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.window_len < 2 {
            return Err(Error::config("window length must be at least 2"));
        }
        if self.batch_size == 0 {
            return Err(Error::config("batch size must be positive"));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::config("learning rate must be positive"));
        }
        if let Some(c) = self.clip_norm {
            if !(c.is_finite() && c > 0.0) {
                return Err(Error::config("clip norm must be positive"));
            }
        }
        let Some(last) = self.layers.last() else {
            return Err(Error::config("empty layer stack"));
        };
        let first = &self.layers[0];
        let input = if first.kind.is_recurrent() {
            FEATURE_COUNT
        } else {
            FEATURE_COUNT * self.window_len
        };
        if first.input_size != input {
            return Err(Error::config(alloc::format!(
                "first layer takes {} inputs, windows provide {input}",
                first.input_size
            )));
        }
        if self.research_mode {
            return Ok(());
        }
        if last.kind != LayerKind::Dense || last.activation != Activation::LINEAR || last.output_size != 2 {
            return Err(Error::config("model must end in a linear dense layer of width 2"));
        }
        let body = &self.layers[..self.layers.len() - 1];
        let expected_kind = match (self.architecture, self.target_set) {
            (Architecture::Recurrent, TargetSet::IntensityTime) => Some(LayerKind::Lstm),
            (Architecture::Recurrent, TargetSet::Location) => Some(LayerKind::Bilstm),
            (Architecture::Gru, _) => Some(LayerKind::Gru),
            (Architecture::Ann, _) => None,
        };
        match expected_kind {
            Some(kind) => {
                if body.len() != 3 || body.iter().any(|l| l.kind != kind) {
                    return Err(Error::config(alloc::format!(
                        "{} model needs exactly 3 {:?} layers and 1 dense output",
                        self.kind_name(),
                        kind
                    )));
                }
            }
            None => {
                if body.iter().any(|l| l.kind != LayerKind::Dense) {
                    return Err(Error::config("ann model must be dense only"));
                }
            }
        }
        if self.scale_targets != (self.target_set == TargetSet::Location) {
            return Err(Error::config(
                "location models scale their targets; intensity-time models do not",
            ));
        }
        Ok(())
    }
}

/// Baseline networks: a 5-hidden-layer dense network over the flattened
/// window, or the primary recurrent stack with GRU layers.
pub fn baseline_config(kind: BaselineKind, target_set: TargetSet, window_len: usize) -> Result<ModelConfig> {
    match kind {
        BaselineKind::Ann => {
            let act = Activation::swish(2.0)?;
            let mut layers = Vec::with_capacity(ANN_HIDDEN.len() + 1);
            let mut input = FEATURE_COUNT * window_len;
            for &h in &ANN_HIDDEN {
                layers.push(LayerSpec::dense(input, h, act));
                input = h;
            }
            layers.push(LayerSpec::dense(input, 2, Activation::LINEAR));
            Ok(ModelConfig::base(target_set, Architecture::Ann, window_len, layers))
        }
        BaselineKind::Gru => Ok(ModelConfig::base(
            target_set,
            Architecture::Gru,
            window_len,
            recurrent_stack(LayerKind::Gru, DEFAULT_HIDDEN, target_set.primary_activation()),
        )),
        BaselineKind::Cnn1d => Err(Error::UnsupportedBaseline("1d-cnn".into())),
    }
}
