use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::activation::Activation;
use super::param::Parameter;
use crate::matrix::{add_column_sums, gemm, Matrix, Op};

/// Fully connected layer `y = act(x W^T + b)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    pub(crate) activation: Activation,
    /// `output x input`
    pub weight: Parameter,
    /// `1 x output`
    pub bias: Parameter,
}

#[derive(Debug, Clone)]
pub(crate) struct DenseCache {
    input: Matrix,
    pre: Vec<f64>,
}

impl Dense {
    pub fn zeros(input: usize, output: usize, activation: Activation) -> Self {
        Dense {
            activation,
            weight: Parameter::zeros("weight", output, input),
            bias: Parameter::zeros("bias", 1, output),
        }
    }

    pub fn input_size(&self) -> usize {
        self.weight.cols
    }

    pub fn output_size(&self) -> usize {
        self.weight.rows
    }

    pub(crate) fn forward(&self, x: &Matrix) -> (Matrix, DenseCache) {
        let batch = x.rows();
        let out = self.output_size();
        let mut pre = vec![0.0; batch * out];
        for row in pre.chunks_exact_mut(out) {
            row.copy_from_slice(&self.bias.values);
        }
        gemm(
            1.0,
            x.as_slice(),
            batch,
            x.cols(),
            Op::N,
            &self.weight.values,
            out,
            self.input_size(),
            Op::T,
            1.0,
            &mut pre,
        );
        let y: Vec<f64> = pre.iter().map(|&z| self.activation.eval(z)).collect();
        (
            Matrix::from_vec(batch, out, y).expect("dense output shape"),
            DenseCache { input: x.clone(), pre },
        )
    }

    /// Accumulates `[d weight, d bias]` into `grads` and returns the input gradient.
    pub(crate) fn backward(&self, cache: &DenseCache, dy: &Matrix, grads: &mut [Vec<f64>]) -> Matrix {
        let batch = dy.rows();
        let out = self.output_size();
        let inp = self.input_size();
        let dpre: Vec<f64> = dy
            .as_slice()
            .iter()
            .zip(&cache.pre)
            .map(|(&d, &z)| d * self.activation.grad(z))
            .collect();
        let (gw, gb) = grads.split_at_mut(1);
        gemm(1.0, &dpre, batch, out, Op::T, cache.input.as_slice(), batch, inp, Op::N, 1.0, &mut gw[0]);
        add_column_sums(&dpre, out, &mut gb[0]);
        let mut dx = Matrix::zeros(batch, inp);
        gemm(1.0, &dpre, batch, out, Op::N, &self.weight.values, out, inp, Op::N, 0.0, dx.as_mut_slice());
        dx
    }
}
