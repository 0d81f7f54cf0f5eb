use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::activation::{sigmoid, Activation};
use super::param::Parameter;
use crate::error::{Error, Result};
use crate::matrix::{add_column_sums, gemm, Matrix, Op};

/// One LSTM direction.
///
/// Gate blocks are laid out `[input | forget | candidate | output]` along the
/// `4H` axis. Gates use the sigmoid; the configured activation is applied to
/// the candidate and to the cell state on the way out
/// (`h = o * act(c)`), which is tanh in the textbook cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lstm {
    pub(crate) activation: Activation,
    /// `4H x input`
    pub kernel: Parameter,
    /// `4H x H`
    pub recurrent: Parameter,
    /// `1 x 4H`
    pub bias: Parameter,
}

#[derive(Debug, Clone)]
struct StepCache {
    x: Matrix,
    h_prev: Matrix,
    c_prev: Matrix,
    /// post-activation gates, `B x 4H`
    gates: Vec<f64>,
    g_pre: Vec<f64>,
    c: Vec<f64>,
    act_c: Vec<f64>,
}

#[derive(Debug, Clone)]
pub(crate) struct LstmCache {
    steps: Vec<StepCache>,
}

impl Lstm {
    pub fn zeros(input: usize, hidden: usize, activation: Activation) -> Self {
        Lstm {
            activation,
            kernel: Parameter::zeros("kernel", 4 * hidden, input),
            recurrent: Parameter::zeros("recurrent_kernel", 4 * hidden, hidden),
            bias: Parameter::zeros("bias", 1, 4 * hidden),
        }
    }

    pub fn input_size(&self) -> usize {
        self.kernel.cols
    }

    pub fn hidden_size(&self) -> usize {
        self.recurrent.cols
    }

    fn step(&self, x: &Matrix, h_prev: &Matrix, c_prev: &Matrix) -> (Matrix, Matrix, StepCache) {
        let batch = x.rows();
        let hs = self.hidden_size();
        let g4 = 4 * hs;
        let mut z = vec![0.0; batch * g4];
        for row in z.chunks_exact_mut(g4) {
            row.copy_from_slice(&self.bias.values);
        }
        gemm(1.0, x.as_slice(), batch, x.cols(), Op::N, &self.kernel.values, g4, self.input_size(), Op::T, 1.0, &mut z);
        gemm(1.0, h_prev.as_slice(), batch, hs, Op::N, &self.recurrent.values, g4, hs, Op::T, 1.0, &mut z);

        let mut g_pre = vec![0.0; batch * hs];
        let mut c = vec![0.0; batch * hs];
        let mut act_c = vec![0.0; batch * hs];
        let mut h = vec![0.0; batch * hs];
        for b in 0..batch {
            let zr = &mut z[b * g4..(b + 1) * g4];
            for j in 0..hs {
                let i_g = sigmoid(zr[j]);
                let f_g = sigmoid(zr[hs + j]);
                let gp = zr[2 * hs + j];
                let g = self.activation.eval(gp);
                let o_g = sigmoid(zr[3 * hs + j]);
                zr[j] = i_g;
                zr[hs + j] = f_g;
                zr[2 * hs + j] = g;
                zr[3 * hs + j] = o_g;
                let k = b * hs + j;
                g_pre[k] = gp;
                let ct = f_g * c_prev.as_slice()[k] + i_g * g;
                c[k] = ct;
                let ac = self.activation.eval(ct);
                act_c[k] = ac;
                h[k] = o_g * ac;
            }
        }
        let h = Matrix::from_vec(batch, hs, h).expect("lstm h shape");
        let c_m = Matrix::from_vec(batch, hs, c.clone()).expect("lstm c shape");
        let cache = StepCache {
            x: x.clone(),
            h_prev: h_prev.clone(),
            c_prev: c_prev.clone(),
            gates: z,
            g_pre,
            c,
            act_c,
        };
        (h, c_m, cache)
    }

    /// Runs the sequence from zero state and returns every hidden state.
    pub(crate) fn forward(&self, xs: &[Matrix]) -> (Vec<Matrix>, LstmCache) {
        let batch = xs.first().map_or(0, |x| x.rows());
        let hs = self.hidden_size();
        let mut h = Matrix::zeros(batch, hs);
        let mut c = Matrix::zeros(batch, hs);
        let mut out = Vec::with_capacity(xs.len());
        let mut steps = Vec::with_capacity(xs.len());
        for x in xs {
            let (h2, c2, sc) = self.step(x, &h, &c);
            steps.push(sc);
            out.push(h2.clone());
            h = h2;
            c = c2;
        }
        (out, LstmCache { steps })
    }

    /// Backpropagation through time. `dhs[t]` is the loss gradient reaching
    /// hidden state `t` from above. Accumulates `[kernel, recurrent, bias]`
    /// gradients and returns the input gradient for every step.
    pub(crate) fn backward(&self, cache: &LstmCache, dhs: &[Matrix], grads: &mut [Vec<f64>]) -> Vec<Matrix> {
        let steps = cache.steps.len();
        let batch = cache.steps.first().map_or(0, |s| s.x.rows());
        let hs = self.hidden_size();
        let g4 = 4 * hs;
        let inp = self.input_size();
        let mut dh_next = vec![0.0; batch * hs];
        let mut dc_next = vec![0.0; batch * hs];
        let mut dxs = vec![Matrix::zeros(0, 0); steps];
        let mut da = vec![0.0; batch * g4];
        let (gk, rest) = grads.split_at_mut(1);
        let (gr, gb) = rest.split_at_mut(1);
        for t in (0..steps).rev() {
            let s = &cache.steps[t];
            let up = dhs[t].as_slice();
            for b in 0..batch {
                let gr_ = &s.gates[b * g4..(b + 1) * g4];
                let dar = &mut da[b * g4..(b + 1) * g4];
                for j in 0..hs {
                    let k = b * hs + j;
                    let (i_g, f_g, g, o_g) = (gr_[j], gr_[hs + j], gr_[2 * hs + j], gr_[3 * hs + j]);
                    let dh = up[k] + dh_next[k];
                    let d_o = dh * s.act_c[k];
                    let dc = dc_next[k] + dh * o_g * self.activation.grad(s.c[k]);
                    let d_i = dc * g;
                    let d_g = dc * i_g;
                    let d_f = dc * s.c_prev.as_slice()[k];
                    dc_next[k] = dc * f_g;
                    dar[j] = d_i * i_g * (1.0 - i_g);
                    dar[hs + j] = d_f * f_g * (1.0 - f_g);
                    dar[2 * hs + j] = d_g * self.activation.grad(s.g_pre[k]);
                    dar[3 * hs + j] = d_o * o_g * (1.0 - o_g);
                }
            }
            gemm(1.0, &da, batch, g4, Op::T, s.x.as_slice(), batch, inp, Op::N, 1.0, &mut gk[0]);
            gemm(1.0, &da, batch, g4, Op::T, s.h_prev.as_slice(), batch, hs, Op::N, 1.0, &mut gr[0]);
            add_column_sums(&da, g4, &mut gb[0]);
            let mut dx = Matrix::zeros(batch, inp);
            gemm(1.0, &da, batch, g4, Op::N, &self.kernel.values, g4, inp, Op::N, 0.0, dx.as_mut_slice());
            gemm(1.0, &da, batch, g4, Op::N, &self.recurrent.values, g4, hs, Op::N, 0.0, &mut dh_next);
            dxs[t] = dx;
        }
        dxs
    }
}

/// Single-sample LSTM step returning `(h_t, c_t)`.
pub fn lstm_cell_step(cell: &Lstm, x_t: &[f64], h_prev: &[f64], c_prev: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let hs = cell.hidden_size();
    if x_t.len() != cell.input_size() || h_prev.len() != hs || c_prev.len() != hs {
        return Err(Error::config(alloc::format!(
            "lstm cell expects input {} and state {}, got {}, {}, {}",
            cell.input_size(),
            hs,
            x_t.len(),
            h_prev.len(),
            c_prev.len()
        )));
    }
    let x = Matrix::from_vec(1, x_t.len(), x_t.to_vec())?;
    let h = Matrix::from_vec(1, hs, h_prev.to_vec())?;
    let c = Matrix::from_vec(1, hs, c_prev.to_vec())?;
    let (h, c, _) = cell.step(&x, &h, &c);
    Ok((h.into_vec(), c.into_vec()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig(x: f64) -> f64 {
        1.0 / (1.0 + (-x).exp())
    }

    #[test]
    fn zero_cell_stays_at_zero() {
        let cell = Lstm::zeros(3, 2, Activation::TANH);
        let (h, c) = lstm_cell_step(&cell, &[0.0; 3], &[0.0; 2], &[0.0; 2]).unwrap();
        assert_eq!(h, vec![0.0, 0.0]);
        assert_eq!(c, vec![0.0, 0.0]);
    }

    #[test]
    fn scalar_cell_matches_hand_calculation() {
        // one unit, one input; weights per gate (w_x, w_h, b)
        let (wi, ui, bi) = (0.5, -0.3, 0.1);
        let (wf, uf, bf) = (-0.2, 0.4, 1.0);
        let (wg, ug, bg) = (0.9, 0.25, -0.05);
        let (wo, uo, bo) = (0.3, -0.6, 0.2);
        let mut cell = Lstm::zeros(1, 1, Activation::TANH);
        cell.kernel.values = vec![wi, wf, wg, wo];
        cell.recurrent.values = vec![ui, uf, ug, uo];
        cell.bias.values = vec![bi, bf, bg, bo];
        let (x, h0, c0) = (0.7, -0.2, 0.35);
        let i = sig(wi * x + ui * h0 + bi);
        let f = sig(wf * x + uf * h0 + bf);
        let g = (wg * x + ug * h0 + bg).tanh();
        let o = sig(wo * x + uo * h0 + bo);
        let c = f * c0 + i * g;
        let h = o * c.tanh();
        let (hh, cc) = lstm_cell_step(&cell, &[x], &[h0], &[c0]).unwrap();
        assert!((hh[0] - h).abs() < 1e-12);
        assert!((cc[0] - c).abs() < 1e-12);
    }

    #[test]
    fn saturated_forget_gate_keeps_the_cell() {
        let mut cell = Lstm::zeros(1, 1, Activation::TANH);
        cell.bias.values = vec![0.3, 50.0, 0.0, 0.0];
        cell.kernel.values = vec![0.0, 0.0, 1.0, 0.0];
        let c_prev = 0.8;
        let x: f64 = 0.6;
        let i = sig(0.3);
        let g = x.tanh();
        let (_, c) = lstm_cell_step(&cell, &[x], &[0.0], &[c_prev]).unwrap();
        assert!((c[0] - (c_prev + i * g)).abs() < 1e-12);
    }

    #[test]
    fn dimension_mismatch_is_a_config_error() {
        let cell = Lstm::zeros(2, 3, Activation::TANH);
        assert!(matches!(
            lstm_cell_step(&cell, &[0.0], &[0.0; 3], &[0.0; 3]),
            Err(Error::Config(_))
        ));
    }
}
