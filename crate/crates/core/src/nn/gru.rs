use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::activation::{sigmoid, Activation};
use super::param::Parameter;
use crate::error::{Error, Result};
use crate::matrix::{add_column_sums, gemm, Matrix, Op};

/// Gated recurrent unit with the reset gate applied before the recurrent
/// product:
///
/// ```text
/// z = sigmoid(x Wz + h Uz + bz)
/// r = sigmoid(x Wr + h Ur + br)
/// n = act(x Wn + (r * h) Un + bn)
/// h' = (1 - z) * n + z * h
/// ```
///
/// Blocks are laid out `[update | reset | candidate]` along the `3H` axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gru {
    pub(crate) activation: Activation,
    /// `3H x input`
    pub kernel: Parameter,
    /// `3H x H`
    pub recurrent: Parameter,
    /// `1 x 3H`
    pub bias: Parameter,
}

#[derive(Debug, Clone)]
struct StepCache {
    x: Matrix,
    h_prev: Matrix,
    z: Vec<f64>,
    r: Vec<f64>,
    rh: Vec<f64>,
    n_pre: Vec<f64>,
    n: Vec<f64>,
}

#[derive(Debug, Clone)]
pub(crate) struct GruCache {
    steps: Vec<StepCache>,
}

impl Gru {
    pub fn zeros(input: usize, hidden: usize, activation: Activation) -> Self {
        Gru {
            activation,
            kernel: Parameter::zeros("kernel", 3 * hidden, input),
            recurrent: Parameter::zeros("recurrent_kernel", 3 * hidden, hidden),
            bias: Parameter::zeros("bias", 1, 3 * hidden),
        }
    }

    pub fn input_size(&self) -> usize {
        self.kernel.cols
    }

    pub fn hidden_size(&self) -> usize {
        self.recurrent.cols
    }

    fn step(&self, x: &Matrix, h_prev: &Matrix) -> (Matrix, StepCache) {
        let batch = x.rows();
        let hs = self.hidden_size();
        let g3 = 3 * hs;
        let mut ax = vec![0.0; batch * g3];
        for row in ax.chunks_exact_mut(g3) {
            row.copy_from_slice(&self.bias.values);
        }
        gemm(1.0, x.as_slice(), batch, x.cols(), Op::N, &self.kernel.values, g3, self.input_size(), Op::T, 1.0, &mut ax);
        let rec_zr = &self.recurrent.values[..2 * hs * hs];
        let rec_n = &self.recurrent.values[2 * hs * hs..];
        let mut ah = vec![0.0; batch * 2 * hs];
        gemm(1.0, h_prev.as_slice(), batch, hs, Op::N, rec_zr, 2 * hs, hs, Op::T, 0.0, &mut ah);

        let mut z = vec![0.0; batch * hs];
        let mut r = vec![0.0; batch * hs];
        let mut rh = vec![0.0; batch * hs];
        let hp = h_prev.as_slice();
        for b in 0..batch {
            for j in 0..hs {
                let k = b * hs + j;
                z[k] = sigmoid(ax[b * g3 + j] + ah[b * 2 * hs + j]);
                r[k] = sigmoid(ax[b * g3 + hs + j] + ah[b * 2 * hs + hs + j]);
                rh[k] = r[k] * hp[k];
            }
        }
        let mut n_pre = vec![0.0; batch * hs];
        for b in 0..batch {
            n_pre[b * hs..(b + 1) * hs].copy_from_slice(&ax[b * g3 + 2 * hs..(b + 1) * g3]);
        }
        gemm(1.0, &rh, batch, hs, Op::N, rec_n, hs, hs, Op::T, 1.0, &mut n_pre);
        let n: Vec<f64> = n_pre.iter().map(|&v| self.activation.eval(v)).collect();
        let h: Vec<f64> = (0..batch * hs).map(|k| (1.0 - z[k]) * n[k] + z[k] * hp[k]).collect();
        let cache = StepCache {
            x: x.clone(),
            h_prev: h_prev.clone(),
            z,
            r,
            rh,
            n_pre,
            n,
        };
        (Matrix::from_vec(batch, hs, h).expect("gru h shape"), cache)
    }

    pub(crate) fn forward(&self, xs: &[Matrix]) -> (Vec<Matrix>, GruCache) {
        let batch = xs.first().map_or(0, |x| x.rows());
        let mut h = Matrix::zeros(batch, self.hidden_size());
        let mut out = Vec::with_capacity(xs.len());
        let mut steps = Vec::with_capacity(xs.len());
        for x in xs {
            let (h2, sc) = self.step(x, &h);
            steps.push(sc);
            out.push(h2.clone());
            h = h2;
        }
        (out, GruCache { steps })
    }

    pub(crate) fn backward(&self, cache: &GruCache, dhs: &[Matrix], grads: &mut [Vec<f64>]) -> Vec<Matrix> {
        let steps = cache.steps.len();
        let batch = cache.steps.first().map_or(0, |s| s.x.rows());
        let hs = self.hidden_size();
        let g3 = 3 * hs;
        let inp = self.input_size();
        let rec_zr = &self.recurrent.values[..2 * hs * hs];
        let rec_n = &self.recurrent.values[2 * hs * hs..];
        let (gk, rest) = grads.split_at_mut(1);
        let (gr, gb) = rest.split_at_mut(1);
        let (gr_zr, gr_n) = gr[0].split_at_mut(2 * hs * hs);

        let mut dh_next = vec![0.0; batch * hs];
        let mut dxs = vec![Matrix::zeros(0, 0); steps];
        let mut da = vec![0.0; batch * g3];
        let mut da_zr = vec![0.0; batch * 2 * hs];
        let mut da_n = vec![0.0; batch * hs];
        let mut d_rh = vec![0.0; batch * hs];
        for t in (0..steps).rev() {
            let s = &cache.steps[t];
            let up = dhs[t].as_slice();
            let hp = s.h_prev.as_slice();
            let mut dh_prev = vec![0.0; batch * hs];
            for k in 0..batch * hs {
                let dh = up[k] + dh_next[k];
                let dn = dh * (1.0 - s.z[k]);
                let dz = dh * (hp[k] - s.n[k]);
                dh_prev[k] = dh * s.z[k];
                da_n[k] = dn * self.activation.grad(s.n_pre[k]);
                let b = k / hs;
                let j = k % hs;
                da_zr[b * 2 * hs + j] = dz * s.z[k] * (1.0 - s.z[k]);
            }
            gemm(1.0, &da_n, batch, hs, Op::N, rec_n, hs, hs, Op::N, 0.0, &mut d_rh);
            for k in 0..batch * hs {
                let b = k / hs;
                let j = k % hs;
                let dr = d_rh[k] * hp[k];
                dh_prev[k] += d_rh[k] * s.r[k];
                da_zr[b * 2 * hs + hs + j] = dr * s.r[k] * (1.0 - s.r[k]);
            }
            for b in 0..batch {
                da[b * g3..b * g3 + 2 * hs].copy_from_slice(&da_zr[b * 2 * hs..(b + 1) * 2 * hs]);
                da[b * g3 + 2 * hs..(b + 1) * g3].copy_from_slice(&da_n[b * hs..(b + 1) * hs]);
            }
            gemm(1.0, &da, batch, g3, Op::T, s.x.as_slice(), batch, inp, Op::N, 1.0, &mut gk[0]);
            add_column_sums(&da, g3, &mut gb[0]);
            gemm(1.0, &da_zr, batch, 2 * hs, Op::T, hp, batch, hs, Op::N, 1.0, gr_zr);
            gemm(1.0, &da_n, batch, hs, Op::T, &s.rh, batch, hs, Op::N, 1.0, gr_n);
            gemm(1.0, &da_zr, batch, 2 * hs, Op::N, rec_zr, 2 * hs, hs, Op::N, 1.0, &mut dh_prev);
            let mut dx = Matrix::zeros(batch, inp);
            gemm(1.0, &da, batch, g3, Op::N, &self.kernel.values, g3, inp, Op::N, 0.0, dx.as_mut_slice());
            dxs[t] = dx;
            dh_next = dh_prev;
        }
        dxs
    }
}

/// Single-sample GRU step returning `h_t`.
pub fn gru_cell_step(cell: &Gru, x_t: &[f64], h_prev: &[f64]) -> Result<Vec<f64>> {
    let hs = cell.hidden_size();
    if x_t.len() != cell.input_size() || h_prev.len() != hs {
        return Err(Error::config(alloc::format!(
            "gru cell expects input {} and state {}, got {} and {}",
            cell.input_size(),
            hs,
            x_t.len(),
            h_prev.len()
        )));
    }
    let x = Matrix::from_vec(1, x_t.len(), x_t.to_vec())?;
    let h = Matrix::from_vec(1, hs, h_prev.to_vec())?;
    Ok(cell.step(&x, &h).0.into_vec())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig(x: f64) -> f64 {
        1.0 / (1.0 + (-x).exp())
    }

    #[test]
    fn zero_weights_halve_the_state() {
        let cell = Gru::zeros(2, 3, Activation::TANH);
        let h = gru_cell_step(&cell, &[0.0, 0.0], &[0.4, -1.0, 2.0]).unwrap();
        assert_eq!(h, vec![0.2, -0.5, 1.0]);
        let h0 = gru_cell_step(&cell, &[0.0, 0.0], &[0.0; 3]).unwrap();
        assert_eq!(h0, vec![0.0; 3]);
    }

    #[test]
    fn scalar_cell_matches_hand_calculation() {
        let (wz, uz, bz) = (0.4, -0.7, 0.05);
        let (wr, ur, br) = (-0.3, 0.6, 0.1);
        let (wn, un, bn) = (0.8, 0.5, -0.2);
        let mut cell = Gru::zeros(1, 1, Activation::TANH);
        cell.kernel.values = vec![wz, wr, wn];
        cell.recurrent.values = vec![uz, ur, un];
        cell.bias.values = vec![bz, br, bn];
        let (x, h0) = (1.3, -0.45);
        let z = sig(wz * x + uz * h0 + bz);
        let r = sig(wr * x + ur * h0 + br);
        let n = (wn * x + un * (r * h0) + bn).tanh();
        let h = (1.0 - z) * n + z * h0;
        let out = gru_cell_step(&cell, &[x], &[h0]).unwrap();
        assert!((out[0] - h).abs() < 1e-12);
    }

    #[test]
    fn dimension_mismatch_is_a_config_error() {
        let cell = Gru::zeros(2, 3, Activation::TANH);
        assert!(matches!(gru_cell_step(&cell, &[0.0; 2], &[0.0; 2]), Err(Error::Config(_))));
    }
}
