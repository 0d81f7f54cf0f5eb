use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActivationKind {
    Linear,
    Sigmoid,
    Tanh,
    Relu,
    Swish,
}

/// Activation function; `beta` is set exactly when the kind is swish.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Activation {
    kind: ActivationKind,
    beta: Option<f64>,
}

#[inline]
pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + libm::exp(-x))
    } else {
        let e = libm::exp(x);
        e / (1.0 + e)
    }
}

impl Activation {
    pub const LINEAR: Activation = Activation { kind: ActivationKind::Linear, beta: None };
    pub const SIGMOID: Activation = Activation { kind: ActivationKind::Sigmoid, beta: None };
    pub const TANH: Activation = Activation { kind: ActivationKind::Tanh, beta: None };
    pub const RELU: Activation = Activation { kind: ActivationKind::Relu, beta: None };

    /// `x * sigmoid(beta * x)`.
    pub fn swish(beta: f64) -> Result<Self> {
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::config(alloc::format!("swish beta must be positive, got {beta}")));
        }
        Ok(Activation { kind: ActivationKind::Swish, beta: Some(beta) })
    }

    pub fn new(kind: ActivationKind, beta: Option<f64>) -> Result<Self> {
        match (kind, beta) {
            (ActivationKind::Swish, Some(b)) => Activation::swish(b),
            (ActivationKind::Swish, None) => Err(Error::config("swish requires beta")),
            (k, None) => Ok(Activation { kind: k, beta: None }),
            (_, Some(_)) => Err(Error::config("beta is only valid for swish")),
        }
    }

    pub fn kind(&self) -> ActivationKind {
        self.kind
    }

    pub fn beta(&self) -> Option<f64> {
        self.beta
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        match self.kind {
            ActivationKind::Linear => x,
            ActivationKind::Sigmoid => sigmoid(x),
            ActivationKind::Tanh => libm::tanh(x),
            ActivationKind::Relu => {
                if x > 0.0 {
                    x
                } else {
                    0.0
                }
            }
            ActivationKind::Swish => x * sigmoid(self.beta.unwrap_or(1.0) * x),
        }
    }

    /// Derivative with respect to the pre-activation `x`.
    #[inline]
    pub fn grad(&self, x: f64) -> f64 {
        match self.kind {
            ActivationKind::Linear => 1.0,
            ActivationKind::Sigmoid => {
                let s = sigmoid(x);
                s * (1.0 - s)
            }
            ActivationKind::Tanh => {
                let t = libm::tanh(x);
                1.0 - t * t
            }
            ActivationKind::Relu => {
                if x > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            ActivationKind::Swish => {
                let b = self.beta.unwrap_or(1.0);
                let s = sigmoid(b * x);
                s + b * x * s * (1.0 - s)
            }
        }
    }
}
