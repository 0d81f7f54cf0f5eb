use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::activation::Activation;
use super::dense::{Dense, DenseCache};
use super::gru::{Gru, GruCache};
use super::lstm::{Lstm, LstmCache};
use super::param::Parameter;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LayerKind {
    Dense,
    Lstm,
    Bilstm,
    Gru,
}

impl LayerKind {
    pub fn is_recurrent(self) -> bool {
        !matches!(self, LayerKind::Dense)
    }
}

/// Shape and behaviour of one layer.
///
/// `output_size` is the per-direction width for `bilstm`, whose emitted width
/// is twice that. A dense layer fed a sequence sees it flattened row-major.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LayerSpec {
    pub kind: LayerKind,
    pub input_size: usize,
    pub output_size: usize,
    pub returns_sequence: bool,
    pub activation: Activation,
}

impl LayerSpec {
    pub fn dense(input_size: usize, output_size: usize, activation: Activation) -> Self {
        LayerSpec {
            kind: LayerKind::Dense,
            input_size,
            output_size,
            returns_sequence: false,
            activation,
        }
    }

    pub fn recurrent(kind: LayerKind, input_size: usize, output_size: usize, returns_sequence: bool, activation: Activation) -> Self {
        LayerSpec {
            kind,
            input_size,
            output_size,
            returns_sequence,
            activation,
        }
    }

    /// Width of each emitted vector.
    pub fn emitted_width(&self) -> usize {
        match self.kind {
            LayerKind::Bilstm => 2 * self.output_size,
            _ => self.output_size,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Layer {
    Dense(Dense),
    Lstm { cell: Lstm, returns_sequence: bool },
    Bilstm { forward: Lstm, backward: Lstm, returns_sequence: bool },
    Gru { cell: Gru, returns_sequence: bool },
}

impl Layer {
    fn zeros(spec: &LayerSpec) -> Layer {
        let (i, o, a) = (spec.input_size, spec.output_size, spec.activation);
        let rs = spec.returns_sequence;
        match spec.kind {
            LayerKind::Dense => Layer::Dense(Dense::zeros(i, o, a)),
            LayerKind::Lstm => Layer::Lstm { cell: Lstm::zeros(i, o, a), returns_sequence: rs },
            LayerKind::Bilstm => Layer::Bilstm {
                forward: Lstm::zeros(i, o, a),
                backward: Lstm::zeros(i, o, a),
                returns_sequence: rs,
            },
            LayerKind::Gru => Layer::Gru { cell: Gru::zeros(i, o, a), returns_sequence: rs },
        }
    }

    pub fn params(&self) -> Vec<&Parameter> {
        match self {
            Layer::Dense(d) => vec![&d.weight, &d.bias],
            Layer::Lstm { cell, .. } => vec![&cell.kernel, &cell.recurrent, &cell.bias],
            Layer::Bilstm { forward, backward, .. } => vec![
                &forward.kernel,
                &forward.recurrent,
                &forward.bias,
                &backward.kernel,
                &backward.recurrent,
                &backward.bias,
            ],
            Layer::Gru { cell, .. } => vec![&cell.kernel, &cell.recurrent, &cell.bias],
        }
    }

    pub fn params_mut(&mut self) -> Vec<&mut Parameter> {
        match self {
            Layer::Dense(d) => vec![&mut d.weight, &mut d.bias],
            Layer::Lstm { cell, .. } => vec![&mut cell.kernel, &mut cell.recurrent, &mut cell.bias],
            Layer::Bilstm { forward, backward, .. } => vec![
                &mut forward.kernel,
                &mut forward.recurrent,
                &mut forward.bias,
                &mut backward.kernel,
                &mut backward.recurrent,
                &mut backward.bias,
            ],
            Layer::Gru { cell, .. } => vec![&mut cell.kernel, &mut cell.recurrent, &mut cell.bias],
        }
    }
}

/// Data flowing between layers.
#[derive(Debug, Clone, PartialEq)]
pub enum Signal {
    /// One `batch x width` matrix per time step.
    Sequence(Vec<Matrix>),
    Flat(Matrix),
}

#[derive(Debug, Clone)]
enum LayerCache {
    Dense { cache: DenseCache, flattened: Option<(usize, usize)> },
    Lstm(LstmCache),
    Bilstm { forward: LstmCache, backward: LstmCache },
    Gru(GruCache),
}

/// Intermediates retained by [`Network::forward`] for the backward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    layers: Vec<LayerCache>,
    batch: usize,
    steps: usize,
    output_width: usize,
}

impl ForwardCache {
    pub fn batch(&self) -> usize {
        self.batch
    }

    pub fn steps(&self) -> usize {
        self.steps
    }
}

/// Per-parameter gradient buffers in [`Network::params`] order.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub buffers: Vec<Vec<f64>>,
}

impl Gradients {
    pub fn zeros_like(net: &Network) -> Self {
        Gradients {
            buffers: net.params().iter().map(|p| vec![0.0; p.len()]).collect(),
        }
    }

    pub fn add_assign(&mut self, other: &Gradients) {
        for (a, b) in self.buffers.iter_mut().zip(&other.buffers) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
    }

    pub fn global_norm(&self) -> f64 {
        libm::sqrt(self.buffers.iter().flatten().map(|g| g * g).sum::<f64>())
    }

    pub fn is_finite(&self) -> bool {
        self.buffers.iter().flatten().all(|g| g.is_finite())
    }

    pub fn scale(&mut self, factor: f64) {
        self.buffers.iter_mut().flatten().for_each(|g| *g *= factor);
    }
}

/// A validated stack of layers.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    specs: Vec<LayerSpec>,
    layers: Vec<Layer>,
}

impl Network {
    /// Checks the layer chain and builds it with all-zero parameters.
    pub fn zeros(specs: &[LayerSpec]) -> Result<Self> {
        validate_chain(specs)?;
        Ok(Network {
            specs: specs.to_vec(),
            layers: specs.iter().map(Layer::zeros).collect(),
        })
    }

    pub fn specs(&self) -> &[LayerSpec] {
        &self.specs
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    pub fn output_width(&self) -> usize {
        self.specs.last().map_or(0, |s| s.emitted_width())
    }

    pub fn params(&self) -> Vec<&Parameter> {
        self.layers.iter().flat_map(|l| l.params()).collect()
    }

    pub fn params_mut(&mut self) -> Vec<&mut Parameter> {
        self.layers.iter_mut().flat_map(|l| l.params_mut()).collect()
    }

    /// `layer_index/param_name` for every parameter, in order.
    pub fn param_names(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (i, l) in self.layers.iter().enumerate() {
            let prefix = match l {
                Layer::Bilstm { .. } => ["forward/", "forward/", "forward/", "backward/", "backward/", "backward/"].as_slice(),
                _ => ["", "", ""].as_slice(),
            };
            for (p, pre) in l.params().iter().zip(prefix) {
                out.push(alloc::format!("{i}/{pre}{}", p.name));
            }
        }
        out
    }

    pub fn param_count(&self) -> usize {
        self.params().iter().map(|p| p.len()).sum()
    }

    /// Copies gradient buffers into each parameter's `grad`.
    pub fn set_gradients(&mut self, grads: &Gradients) {
        for (p, g) in self.params_mut().into_iter().zip(&grads.buffers) {
            p.grad.clear();
            p.grad.extend_from_slice(g);
        }
    }

    /// Runs a batch. `xs` holds one `batch x input` matrix per time step.
    pub fn forward(&self, xs: &[Matrix]) -> Result<(Matrix, ForwardCache)> {
        let (batch, steps) = self.check_input(xs)?;
        let mut signal = Signal::Sequence(xs.to_vec());
        let mut caches = Vec::with_capacity(self.layers.len());
        for layer in &self.layers {
            let (next, cache) = forward_layer(layer, signal);
            caches.push(cache);
            signal = next;
        }
        let out = match signal {
            Signal::Flat(m) => m,
            Signal::Sequence(_) => return Err(Error::config("network must end in a non-sequence layer")),
        };
        let output_width = out.cols();
        Ok((
            out,
            ForwardCache {
                layers: caches,
                batch,
                steps,
                output_width,
            },
        ))
    }

    pub fn predict(&self, xs: &[Matrix]) -> Result<Matrix> {
        self.forward(xs).map(|(y, _)| y)
    }

    /// Backpropagation through the cached batch given `d loss / d output`.
    pub fn backward(&self, cache: &ForwardCache, d_output: &Matrix) -> Result<Gradients> {
        if cache.layers.len() != self.layers.len()
            || d_output.rows() != cache.batch
            || d_output.cols() != cache.output_width
        {
            return Err(Error::Usage(alloc::format!(
                "forward cache ({} layers, batch {}, width {}) does not match this network/gradient ({} layers, {}x{})",
                cache.layers.len(),
                cache.batch,
                cache.output_width,
                self.layers.len(),
                d_output.rows(),
                d_output.cols()
            )));
        }
        let mut grads = Gradients::zeros_like(self);
        let mut offsets = Vec::with_capacity(self.layers.len());
        let mut off = 0;
        for l in &self.layers {
            offsets.push(off);
            off += l.params().len();
        }
        let mut delta = Signal::Flat(d_output.clone());
        for (idx, layer) in self.layers.iter().enumerate().rev() {
            let n = layer.params().len();
            let slot = &mut grads.buffers[offsets[idx]..offsets[idx] + n];
            delta = backward_layer(layer, &cache.layers[idx], delta, cache.steps, slot)?;
        }
        Ok(grads)
    }

    fn check_input(&self, xs: &[Matrix]) -> Result<(usize, usize)> {
        let Some(first) = xs.first() else {
            return Err(Error::config("empty input sequence"));
        };
        let batch = first.rows();
        let width = first.cols();
        if batch == 0 {
            return Err(Error::config("empty batch"));
        }
        if xs.iter().any(|x| x.rows() != batch || x.cols() != width) {
            return Err(Error::config("input steps differ in shape"));
        }
        let spec = &self.specs[0];
        let expected = if spec.kind.is_recurrent() { width } else { width * xs.len() };
        if spec.input_size != expected {
            return Err(Error::config(alloc::format!(
                "first layer expects input width {}, got {} ({} steps of {})",
                spec.input_size,
                expected,
                xs.len(),
                width
            )));
        }
        // a dense layer after a sequence-returning layer depends on T
        let mut seq = true;
        let mut w = width;
        for s in &self.specs {
            if s.kind == LayerKind::Dense && seq {
                if s.input_size != w * xs.len() {
                    return Err(Error::config(alloc::format!(
                        "dense layer expects {} inputs, flattened sequence has {}",
                        s.input_size,
                        w * xs.len()
                    )));
                }
                seq = false;
            } else if s.kind.is_recurrent() {
                seq = s.returns_sequence;
            }
            w = s.emitted_width();
        }
        Ok((batch, xs.len()))
    }
}

/// Static chain checks: sizes, recurrent layers fed by sequences, widths
/// matching between recurrent layers and a non-sequence final output.
fn validate_chain(specs: &[LayerSpec]) -> Result<()> {
    if specs.is_empty() {
        return Err(Error::config("empty layer stack"));
    }
    let mut seq = true;
    let mut prev_width: Option<usize> = None;
    for (i, s) in specs.iter().enumerate() {
        if s.input_size == 0 || s.output_size == 0 {
            return Err(Error::config(alloc::format!("layer {i} has a zero size")));
        }
        if s.kind == LayerKind::Dense && s.returns_sequence {
            return Err(Error::config(alloc::format!("dense layer {i} cannot return a sequence")));
        }
        if s.kind.is_recurrent() {
            if !seq {
                return Err(Error::config(alloc::format!(
                    "recurrent layer {i} follows a layer that does not return a sequence"
                )));
            }
            if let Some(w) = prev_width {
                if w != s.input_size {
                    return Err(Error::config(alloc::format!(
                        "layer {i} expects width {}, previous layer emits {w}",
                        s.input_size
                    )));
                }
            }
            seq = s.returns_sequence;
        } else {
            if !seq {
                if let Some(w) = prev_width {
                    if w != s.input_size {
                        return Err(Error::config(alloc::format!(
                            "layer {i} expects width {}, previous layer emits {w}",
                            s.input_size
                        )));
                    }
                }
            }
            seq = false;
        }
        prev_width = Some(s.emitted_width());
    }
    if seq {
        return Err(Error::config("final layer must not return a sequence"));
    }
    Ok(())
}

fn flatten(xs: &[Matrix]) -> Matrix {
    let batch = xs[0].rows();
    let w = xs[0].cols();
    let mut out = Matrix::zeros(batch, w * xs.len());
    for b in 0..batch {
        let row = out.row_mut(b);
        for (t, x) in xs.iter().enumerate() {
            row[t * w..(t + 1) * w].copy_from_slice(x.row(b));
        }
    }
    out
}

fn unflatten(m: &Matrix, steps: usize, width: usize) -> Vec<Matrix> {
    (0..steps)
        .map(|t| {
            let mut x = Matrix::zeros(m.rows(), width);
            for b in 0..m.rows() {
                x.row_mut(b).copy_from_slice(&m.row(b)[t * width..(t + 1) * width]);
            }
            x
        })
        .collect()
}

fn concat_cols(a: &Matrix, b: &Matrix) -> Matrix {
    let mut out = Matrix::zeros(a.rows(), a.cols() + b.cols());
    for r in 0..a.rows() {
        let row = out.row_mut(r);
        row[..a.cols()].copy_from_slice(a.row(r));
        row[a.cols()..].copy_from_slice(b.row(r));
    }
    out
}

fn split_cols(m: &Matrix, left: usize) -> (Matrix, Matrix) {
    let mut a = Matrix::zeros(m.rows(), left);
    let mut b = Matrix::zeros(m.rows(), m.cols() - left);
    for r in 0..m.rows() {
        a.row_mut(r).copy_from_slice(&m.row(r)[..left]);
        b.row_mut(r).copy_from_slice(&m.row(r)[left..]);
    }
    (a, b)
}

fn sequence_of(signal: Signal) -> Vec<Matrix> {
    match signal {
        Signal::Sequence(xs) => xs,
        Signal::Flat(m) => vec![m],
    }
}

fn emit(hs: Vec<Matrix>, returns_sequence: bool) -> Signal {
    if returns_sequence {
        Signal::Sequence(hs)
    } else {
        Signal::Flat(hs.into_iter().last().expect("non-empty sequence"))
    }
}

fn forward_layer(layer: &Layer, input: Signal) -> (Signal, LayerCache) {
    match layer {
        Layer::Dense(d) => {
            let (x, flattened) = match input {
                Signal::Flat(m) => (m, None),
                Signal::Sequence(xs) => {
                    let shape = (xs.len(), xs[0].cols());
                    (flatten(&xs), Some(shape))
                }
            };
            let (y, cache) = d.forward(&x);
            (Signal::Flat(y), LayerCache::Dense { cache, flattened })
        }
        Layer::Lstm { cell, returns_sequence } => {
            let xs = sequence_of(input);
            let (hs, cache) = cell.forward(&xs);
            (emit(hs, *returns_sequence), LayerCache::Lstm(cache))
        }
        Layer::Gru { cell, returns_sequence } => {
            let xs = sequence_of(input);
            let (hs, cache) = cell.forward(&xs);
            (emit(hs, *returns_sequence), LayerCache::Gru(cache))
        }
        Layer::Bilstm {
            forward,
            backward,
            returns_sequence,
        } => {
            let xs = sequence_of(input);
            let rev: Vec<Matrix> = xs.iter().rev().cloned().collect();
            let (hf, cf) = forward.forward(&xs);
            let (hb, cb) = backward.forward(&rev);
            let steps = xs.len();
            let out = if *returns_sequence {
                Signal::Sequence((0..steps).map(|t| concat_cols(&hf[t], &hb[steps - 1 - t])).collect())
            } else {
                Signal::Flat(concat_cols(&hf[steps - 1], &hb[steps - 1]))
            };
            (out, LayerCache::Bilstm { forward: cf, backward: cb })
        }
    }
}

/// Expands an upstream gradient into one matrix per step.
fn step_gradients(delta: Signal, steps: usize) -> Result<Vec<Matrix>> {
    match delta {
        Signal::Sequence(ds) if ds.len() == steps => Ok(ds),
        Signal::Sequence(ds) => Err(Error::Usage(alloc::format!("gradient has {} steps, expected {steps}", ds.len()))),
        Signal::Flat(d) => {
            let mut out: Vec<Matrix> = (0..steps - 1).map(|_| Matrix::zeros(d.rows(), d.cols())).collect();
            out.push(d);
            Ok(out)
        }
    }
}

fn backward_layer(layer: &Layer, cache: &LayerCache, delta: Signal, steps: usize, grads: &mut [Vec<f64>]) -> Result<Signal> {
    let mismatch = || Error::Usage("forward cache does not belong to this layer".into());
    match (layer, cache) {
        (Layer::Dense(d), LayerCache::Dense { cache, flattened }) => {
            let Signal::Flat(dy) = delta else {
                return Err(Error::Usage("dense layer received a sequence gradient".into()));
            };
            let dx = d.backward(cache, &dy, grads);
            Ok(match flattened {
                Some((t, w)) => Signal::Sequence(unflatten(&dx, *t, *w)),
                None => Signal::Flat(dx),
            })
        }
        (Layer::Lstm { cell, .. }, LayerCache::Lstm(c)) => {
            let dhs = step_gradients(delta, steps)?;
            Ok(Signal::Sequence(cell.backward(c, &dhs, grads)))
        }
        (Layer::Gru { cell, .. }, LayerCache::Gru(c)) => {
            let dhs = step_gradients(delta, steps)?;
            Ok(Signal::Sequence(cell.backward(c, &dhs, grads)))
        }
        (Layer::Bilstm { forward, backward, .. }, LayerCache::Bilstm { forward: cf, backward: cb }) => {
            let hs = forward.hidden_size();
            // backward-direction gradients are indexed in its processing order
            let (df, db) = match delta {
                Signal::Flat(d) => {
                    let (a, b) = split_cols(&d, hs);
                    let zeros = || Matrix::zeros(d.rows(), hs);
                    let mut df: Vec<Matrix> = (0..steps - 1).map(|_| zeros()).collect();
                    df.push(a);
                    let mut db: Vec<Matrix> = (0..steps - 1).map(|_| zeros()).collect();
                    db.push(b);
                    (df, db)
                }
                seq => {
                    let dhs = step_gradients(seq, steps)?;
                    let mut df = Vec::with_capacity(steps);
                    let mut db = vec![Matrix::zeros(0, 0); steps];
                    for (t, d) in dhs.iter().enumerate() {
                        let (a, b) = split_cols(d, hs);
                        df.push(a);
                        db[steps - 1 - t] = b;
                    }
                    (df, db)
                }
            };
            let (gf, gb) = grads.split_at_mut(3);
            let dxf = forward.backward(cf, &df, gf);
            let dxb = backward.backward(cb, &db, gb);
            let mut dx = dxf;
            for (t, m) in dx.iter_mut().enumerate() {
                let other = &dxb[steps - 1 - t];
                for (a, b) in m.as_mut_slice().iter_mut().zip(other.as_slice()) {
                    *a += b;
                }
            }
            Ok(Signal::Sequence(dx))
        }
        _ => Err(mismatch()),
    }
}
