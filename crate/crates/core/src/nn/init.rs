use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::network::{Layer, LayerSpec, Network};
use super::param::Parameter;
use crate::error::Result;

/// Builds a network with seeded Glorot-uniform kernels.
///
/// Every input, recurrent and dense kernel is drawn from
/// `U(-sqrt(6 / (fan_in + fan_out)), +...)` with the fans taken from the
/// `input x output` orientation; biases are zero except the LSTM forget-gate
/// block, which starts at 1.
pub fn init_params(specs: &[LayerSpec], seed: u64) -> Result<Network> {
    let mut net = Network::zeros(specs)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for layer in net.layers_mut() {
        match layer {
            Layer::Dense(d) => glorot(&mut d.weight, &mut rng),
            Layer::Lstm { cell, .. } => {
                glorot(&mut cell.kernel, &mut rng);
                glorot(&mut cell.recurrent, &mut rng);
                forget_bias(&mut cell.bias);
            }
            Layer::Bilstm { forward, backward, .. } => {
                for cell in [forward, backward] {
                    glorot(&mut cell.kernel, &mut rng);
                    glorot(&mut cell.recurrent, &mut rng);
                    forget_bias(&mut cell.bias);
                }
            }
            Layer::Gru { cell, .. } => {
                glorot(&mut cell.kernel, &mut rng);
                glorot(&mut cell.recurrent, &mut rng);
            }
        }
    }
    Ok(net)
}

fn glorot(p: &mut Parameter, rng: &mut ChaCha8Rng) {
    // stored as output x input
    let (fan_out, fan_in) = (p.rows as f64, p.cols as f64);
    let limit = libm::sqrt(6.0 / (fan_in + fan_out));
    let dist = Uniform::new_inclusive(-limit, limit);
    for v in p.values.iter_mut() {
        *v = dist.sample(rng);
    }
}

fn forget_bias(bias: &mut Parameter) {
    let h = bias.cols / 4;
    bias.values[h..2 * h].iter_mut().for_each(|b| *b = 1.0);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{Activation, LayerKind};

    fn specs() -> [LayerSpec; 3] {
        [
            LayerSpec::recurrent(LayerKind::Lstm, 7, 4, true, Activation::TANH),
            LayerSpec::recurrent(LayerKind::Bilstm, 4, 3, false, Activation::TANH),
            LayerSpec::dense(6, 2, Activation::LINEAR),
        ]
    }

    #[test]
    fn seeded_init_is_reproducible() {
        let a = init_params(&specs(), 7).unwrap();
        let b = init_params(&specs(), 7).unwrap();
        let c = init_params(&specs(), 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn forget_gate_bias_is_one_and_kernels_bounded() {
        let net = init_params(&specs(), 1).unwrap();
        for (name, p) in net.param_names().iter().zip(net.params()) {
            if name.ends_with("bias") && !name.starts_with("2/") {
                let h = p.cols / 4;
                for (i, &b) in p.values.iter().enumerate() {
                    let expected = if (h..2 * h).contains(&i) { 1.0 } else { 0.0 };
                    assert_eq!(b, expected, "{name}[{i}]");
                }
            } else if name.ends_with("bias") {
                assert!(p.values.iter().all(|&b| b == 0.0));
            } else {
                let limit = (6.0 / (p.rows + p.cols) as f64).sqrt();
                assert!(p.values.iter().all(|v| v.abs() <= limit));
                assert!(p.values.iter().any(|&v| v != 0.0));
            }
        }
    }
}
