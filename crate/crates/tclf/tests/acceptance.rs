//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Run with `cargo test -p tclf --test acceptance`.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tclf::cli::{main_with_args, EvaluationReport};
use tclf::formats::read_tracks;
use tclf::model_file::{load_model, parameter_digest, save_model};
use tclf_core::eval::{cross_validate, plan_folds, sliding_eval, Regressor, Trainer};
use tclf_core::geo::{haversine_km, initial_bearing_deg, GeoPoint};
use tclf_core::matrix::Matrix;
use tclf_core::models::{train, ModelConfig, TargetSet};
use tclf_core::nn::{init_params, Activation, AdamConfig, AdamState, LayerKind, LayerSpec, Network, Parameter};
use tclf_core::preprocess::{build_track, fit_scaler, interpolate_gaps};
use tclf_core::windows::{make_windows, Dataset, WindowSample};
use tclf_core::{CycloneTrack, Observation, FEATURE_COUNT, FEATURE_NAMES};

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn cli(args: &[&str]) -> Result<(), String> {
    let mut full = vec!["tclf"];
    full.extend_from_slice(args);
    match main_with_args(full) {
        0 => Ok(()),
        code => Err(format!("`tclf {}` exited with {code}", args.join(" "))),
    }
}

fn synthetic_tracks(dir: &Path, cyclones: usize, seed: u64, extra: &[&str]) -> Result<Vec<CycloneTrack>, String> {
    let raw = dir.join(format!("synth-{cyclones}-{seed}.csv"));
    let cleaned = dir.join(format!("tracks-{cyclones}-{seed}.csv"));
    let (n, s) = (cyclones.to_string(), seed.to_string());
    let mut args = vec!["synth", "--cyclones", &n, "--seed", &s, "--out", raw.to_str().unwrap()];
    args.extend_from_slice(extra);
    cli(&args)?;
    cli(&["ingest", "--best-track", raw.to_str().unwrap(), "--out", cleaned.to_str().unwrap()])?;
    read_tracks(&cleaned).map_err(|e| e.to_string())
}

// 1 -------------------------------------------------------------------------

fn random_stack(rng: &mut ChaCha8Rng, must_have: LayerKind, steps: usize) -> Vec<LayerSpec> {
    let acts = [Activation::TANH, Activation::SIGMOID, Activation::swish(1.5).unwrap(), Activation::LINEAR];
    let recurrent = [LayerKind::Lstm, LayerKind::Bilstm, LayerKind::Gru];
    let mut specs = Vec::new();
    let mut width = rng.gen_range(1..=8);
    if must_have != LayerKind::Dense {
        let depth = rng.gen_range(1..=2);
        let slot = rng.gen_range(0..depth);
        for i in 0..depth {
            let kind = if i == slot { must_have } else { recurrent[rng.gen_range(0..3)] };
            let out = rng.gen_range(1..=8);
            let returns = i + 1 < depth || rng.gen_bool(0.5);
            let spec = LayerSpec::recurrent(kind, width, out, returns, acts[rng.gen_range(0..acts.len())]);
            width = spec.emitted_width();
            specs.push(spec);
        }
        if specs.last().unwrap().returns_sequence {
            width *= steps;
        }
    } else {
        width *= steps;
    }
    for _ in 0..rng.gen_range(1..=2) {
        let out = rng.gen_range(1..=8);
        specs.push(LayerSpec::dense(width, out, acts[rng.gen_range(0..acts.len())]));
        width = out;
    }
    specs
}

fn weighted_sum(net: &Network, xs: &[Matrix], r: &Matrix) -> f64 {
    let out = net.predict(xs).unwrap();
    out.as_slice().iter().zip(r.as_slice()).map(|(a, b)| a * b).sum()
}

fn gradient_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let kinds = [LayerKind::Dense, LayerKind::Lstm, LayerKind::Bilstm, LayerKind::Gru];
    let (mut stacks, mut checked, mut worst) = (0, 0usize, 0.0f64);
    for round in 0..6 {
        for &kind in &kinds {
            let steps = rng.gen_range(1..=5);
            let batch = rng.gen_range(1..=3);
            let specs = random_stack(&mut rng, kind, steps);
            let mut net = init_params(&specs, round as u64 * 31 + stacks as u64).map_err(|e| e.to_string())?;
            for p in net.params_mut() {
                p.values.iter_mut().for_each(|v| *v = rng.gen_range(-0.8..0.8));
            }
            let input_width = if specs[0].kind == LayerKind::Dense { specs[0].input_size / steps } else { specs[0].input_size };
            let xs: Vec<Matrix> = (0..steps)
                .map(|_| Matrix::from_vec(batch, input_width, (0..batch * input_width).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap())
                .collect();
            let (out, cache) = net.forward(&xs).map_err(|e| e.to_string())?;
            let r = Matrix::from_vec(out.rows(), out.cols(), (0..out.rows() * out.cols()).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
            let grads = net.backward(&cache, &r).map_err(|e| e.to_string())?;
            let h = 1e-5;
            for (pi, buf) in grads.buffers.iter().enumerate() {
                for (j, &analytic) in buf.iter().enumerate() {
                    let orig = net.params()[pi].values[j];
                    net.params_mut()[pi].values[j] = orig + h;
                    let up = weighted_sum(&net, &xs, &r);
                    net.params_mut()[pi].values[j] = orig - h;
                    let down = weighted_sum(&net, &xs, &r);
                    net.params_mut()[pi].values[j] = orig;
                    let numeric = (up - down) / (2.0 * h);
                    let rel = (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-6);
                    worst = worst.max(rel);
                    checked += 1;
                    ensure!(
                        rel <= 1e-4,
                        "stack {specs:?}, parameter {} entry {j}: analytic {analytic} vs numeric {numeric}",
                        net.param_names()[pi]
                    );
                }
            }
            stacks += 1;
        }
    }
    let elapsed = start.elapsed();
    ensure!(stacks >= 20, "only {stacks} stacks");
    ensure!(elapsed < Duration::from_secs(60), "took {elapsed:?}");
    Ok(format!("{stacks} stacks, {checked} gradient entries, worst relative error {worst:.2e}, {elapsed:.1?}"))
}

// 2 -------------------------------------------------------------------------

fn adam_oracle() -> Outcome {
    let config = AdamConfig::default();
    ensure!(
        (config.learning_rate, config.beta1, config.beta2, config.epsilon) == (0.01, 0.9, 0.999, 1e-8),
        "unexpected defaults {config:?}"
    );
    // f(w) = w^2 from w = 1, evaluated by hand in 40-digit arithmetic
    #[allow(clippy::excessive_precision)]
    let expected = [0.990_000_000_049_999_999_75, 0.980_002_745_996_147_379_7];
    let mut w = Parameter::zeros("w", 1, 1);
    w.values[0] = 1.0;
    let mut adam = AdamState::new(config, &[&w]);
    for (i, e) in expected.iter().enumerate() {
        w.grad = vec![2.0 * w.values[0]];
        adam.step(&mut [&mut w]).map_err(|e| e.to_string())?;
        ensure!((w.values[0] - e).abs() <= 1e-12, "step {}: {} vs {e}", i + 1, w.values[0]);
    }
    Ok(format!("w after two steps = {:.15}", w.values[0]))
}

// 3 -------------------------------------------------------------------------

fn line_track(id: &str, n: usize) -> CycloneTrack {
    let obs: Vec<Observation> = (0..n)
        .map(|i| Observation {
            hour: 3 * i as i64,
            latitude: 12.0 + 0.2 * i as f64,
            longitude: 88.0 - 0.05 * i as f64,
            msws: 25.0 + i as f64,
            ecp: 1004.0 - 0.5 * i as f64,
            sst: 28.5,
            landfall: i + 1 == n,
        })
        .collect();
    build_track(id, 0, &obs).unwrap()
}

fn window_arithmetic(dir: &Path) -> Outcome {
    let amphan = make_windows(&line_track("AMPHAN", 36), 4).map_err(|e| e.to_string())?;
    ensure!(amphan.len() == 33, "36 points, T = 4 gave {} windows", amphan.len());
    let tracks = synthetic_tracks(dir, 40, 3, &[])?;
    let mut windows = 0;
    for t in &tracks {
        for len in [4, 6, 8, 12] {
            let w = make_windows(t, len).map_err(|e| e.to_string())?;
            ensure!(w.len() == (t.len() + 1).saturating_sub(len), "{}: {} windows at T = {len}", t.cyclone_id(), w.len());
            for pair in w.windows(2) {
                ensure!(
                    pair[0].targets.hours_to_landfall - pair[1].targets.hours_to_landfall == 3.0,
                    "{} hours do not step by 3",
                    t.cyclone_id()
                );
            }
            if let Some(last) = w.last() {
                ensure!(last.targets.hours_to_landfall == 0.0, "last window of {} is not at landfall", t.cyclone_id());
            }
            windows += w.len();
        }
    }
    Ok(format!("33 windows for 36/4; {windows} windows checked on {} synthetic tracks", tracks.len()))
}

// 4 -------------------------------------------------------------------------

fn obs(hour: i64, v: f64) -> Observation {
    Observation { hour, latitude: v, longitude: v, msws: v, ecp: v, sst: v, landfall: false }
}

fn interpolation() -> Outcome {
    let filled = interpolate_gaps(&[obs(0, 10.0), obs(9, 16.0)]).map_err(|e| e.to_string())?;
    let values: Vec<f64> = filled.iter().map(|o| o.msws).collect();
    ensure!(filled.len() == 4, "expected 4 rows, got {}", filled.len());
    for (got, want) in values.iter().zip([10.0, 12.0, 14.0, 16.0]) {
        ensure!((got - want).abs() <= 1e-12, "{values:?}");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut gaps = 0;
    for _ in 0..2000 {
        let n = rng.gen_range(2..30);
        let full: Vec<f64> = (0..n).map(|_| rng.gen_range(-50.0..50.0)).collect();
        let mut keep: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.6)).collect();
        if keep.first() != Some(&0) {
            keep.insert(0, 0);
        }
        if keep.last() != Some(&(n - 1)) {
            keep.push(n - 1);
        }
        let sparse: Vec<Observation> = keep.iter().map(|&i| obs(3 * i as i64, full[i])).collect();
        let filled = interpolate_gaps(&sparse).map_err(|e| e.to_string())?;
        ensure!(filled.len() == n, "length {} vs {n}", filled.len());
        for pair in keep.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let step = (full[b] - full[a]) / (b - a) as f64;
            for k in a..=b {
                let want = full[a] + (k - a) as f64 * step;
                ensure!((filled[k].msws - want).abs() <= 1e-9, "row {k}: {} vs {want}", filled[k].msws);
            }
            gaps += usize::from(b - a > 1);
        }
    }
    Ok(format!("10, 12, 14, 16 exact; constant increments on {gaps} random gaps"))
}

// 5 -------------------------------------------------------------------------

fn geodesy() -> Outcome {
    let p = |lat, lon| GeoPoint::new(lat, lon).unwrap();
    let quarter = haversine_km(p(0.0, 0.0), p(90.0, 0.0));
    ensure!((quarter - 10007.55).abs() <= 0.01, "quarter meridian {quarter}");
    for (to, want) in [(p(1.0, 0.0), 0.0), (p(0.0, 1.0), 90.0), (p(-1.0, 0.0), 180.0), (p(0.0, -1.0), 270.0)] {
        let b = initial_bearing_deg(p(0.0, 0.0), to);
        ensure!(b == want, "bearing {b} vs {want}");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut random = || p(rng.gen_range(-90.0..=90.0), rng.gen_range(-180.0..=180.0));
    for _ in 0..10_000 {
        let (a, b, c) = (random(), random(), random());
        let ab = haversine_km(a, b);
        ensure!((ab - haversine_km(b, a)).abs() <= 1e-9, "asymmetric for {a:?} {b:?}");
        ensure!(haversine_km(a, c) <= ab + haversine_km(b, c) + 1e-9, "triangle inequality fails for {a:?} {b:?} {c:?}");
    }
    Ok(format!("quarter meridian {quarter:.3} km; 10^4 symmetric pairs and triangles"))
}

// 6 -------------------------------------------------------------------------

fn scaler() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let rows = 500;
    let scales = [(60.0, 30.0), (990.0, 15.0), (28.0, 1.0), (40.0, 20.0), (180.0, 100.0), (15.0, 5.0), (85.0, 6.0)];
    let data: Vec<f64> = (0..rows).flat_map(|_| scales.map(|(m, s)| m + s * rng.gen_range(-1.7..1.7))).collect();
    let x = Matrix::from_vec(rows, FEATURE_COUNT, data).unwrap();
    let s = fit_scaler(&x, &FEATURE_NAMES).map_err(|e| e.to_string())?;
    let z = s.transform(&x).map_err(|e| e.to_string())?;
    for j in 0..FEATURE_COUNT {
        let col = z.column(j);
        let mean = col.iter().sum::<f64>() / rows as f64;
        let std = (col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / rows as f64).sqrt();
        ensure!(mean.abs() < 1e-9 && (std - 1.0).abs() < 1e-9, "column {j}: mean {mean}, std {std}");
    }
    let back = s.inverse_transform(&z).map_err(|e| e.to_string())?;
    let worst = back.as_slice().iter().zip(x.as_slice()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    ensure!(worst <= 1e-9, "round trip error {worst}");
    Ok(format!("standardized moments within 1e-9; round-trip error {worst:.1e}"))
}

// 7 -------------------------------------------------------------------------

fn training_sanity(dir: &Path) -> Outcome {
    let tracks = synthetic_tracks(dir, 8, 7, &["--min-points", "8", "--max-points", "8"])?;
    let refs: Vec<&CycloneTrack> = tracks.iter().collect();
    let (ds, _) = Dataset::from_tracks(&refs, 8).map_err(|e| e.to_string())?;
    ensure!(ds.len() == 8, "dataset has {} samples", ds.len());
    let mut notes = Vec::new();
    for cfg in [ModelConfig::intensity_time(8), ModelConfig::location(8)] {
        let cfg = cfg.with_epochs(500).with_seed(7);
        let start = Instant::now();
        let m = train(&cfg, &ds).map_err(|e| e.to_string())?;
        let elapsed = start.elapsed();
        let loss = m.metadata.final_loss().unwrap();
        ensure!(loss < 1e-2, "{} final MSE {loss}", cfg.kind_name());
        ensure!(elapsed < Duration::from_secs(60), "{} took {elapsed:?}", cfg.kind_name());
        notes.push(format!("{} MSE {loss:.2e} in {elapsed:.1?}", cfg.kind_name()));
    }
    Ok(notes.join("; "))
}

// 8 -------------------------------------------------------------------------

fn determinism(dir: &Path) -> Outcome {
    let tracks = dir.join("tracks-12-8.csv");
    synthetic_tracks(dir, 12, 8, &[])?;
    let t = tracks.to_str().unwrap();
    let model = |name: &str, seed: &str| -> Result<Vec<u8>, String> {
        let out = dir.join(name);
        cli(&["train", "--tracks", t, "--model", "location", "--window-length", "6", "--epochs", "3", "--seed", seed, "--out", out.to_str().unwrap()])?;
        std::fs::read(out).map_err(|e| e.to_string())
    };
    let (a, b, c) = (model("a.tclf", "1")?, model("b.tclf", "1")?, model("c.tclf", "2")?);
    ensure!(a == b, "same seed gave different model files");
    let digest = |bytes: &[u8]| load_model(bytes).map(|m| parameter_digest(&m)).map_err(|e| e.to_string());
    ensure!(digest(&a)? != digest(&c)?, "different seeds gave identical parameters");
    let report = |name: &str| -> Result<Vec<u8>, String> {
        let out = dir.join(name);
        cli(&[
            "evaluate", "--tracks", t, "--window-length", "6", "--folds", "3", "--epochs", "2", "--hidden-width", "8", "--seed", "5",
            "--out", out.to_str().unwrap(),
        ])?;
        std::fs::read(out).map_err(|e| e.to_string())
    };
    ensure!(report("r1.json")? == report("r2.json")?, "same seed gave different metric reports");
    Ok("model files and metric reports byte-identical; seeds 1 and 2 differ".into())
}

// 9 -------------------------------------------------------------------------

fn end_to_end(dir: &Path) -> Outcome {
    let start = Instant::now();
    // generator and evaluation defaults throughout (seed 0, 150 epochs, width 64)
    synthetic_tracks(dir, 40, 0, &[])?;
    let out = dir.join("cv.json");
    cli(&["evaluate", "--tracks", dir.join("tracks-40-0.csv").to_str().unwrap(), "--window-length", "8", "--folds", "5", "--out", out.to_str().unwrap()])?;
    let elapsed = start.elapsed();
    let report: EvaluationReport = serde_json::from_slice(&std::fs::read(&out).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    ensure!(elapsed < Duration::from_secs(600), "took {elapsed:?}");
    let sections: Vec<String> = report.reports.iter().map(|r| format!("{}/{}", r.model, r.target_set)).collect();
    ensure!(
        sections == ["intensity-time/intensity-time", "location/location", "ann/intensity-time", "ann/location", "gru/intensity-time", "gru/location"],
        "sections {sections:?}"
    );
    for r in &report.reports {
        ensure!(r.folds.len() == 5, "{} has {} folds", r.model, r.folds.len());
        ensure!(r.targets.len() == 2, "{} has {} targets", r.model, r.targets.len());
        for t in &r.targets {
            let values = [t.mae.mean, t.mae.std, t.rmse.mean, t.rmse.std];
            ensure!(values.iter().all(|v| v.is_finite() && *v >= 0.0), "{} {}: {values:?}", r.model, t.target);
            ensure!(t.rmse.mean >= t.mae.mean, "{} {}: RMSE {} < MAE {}", r.model, t.target, t.rmse.mean, t.mae.mean);
        }
        for f in &r.folds {
            for j in 0..2 {
                ensure!(f.rmse[j] >= f.mae[j], "{} fold {}: RMSE below MAE", r.model, f.fold);
            }
        }
        match r.target_set {
            TargetSet::Location => ensure!(r.distance_km.is_some_and(|d| d.mean.is_finite() && d.std >= 0.0), "{} lacks distance error", r.model),
            TargetSet::IntensityTime => ensure!(r.distance_km.is_none(), "{} has a distance error", r.model),
        }
    }
    Ok(format!("{} sections, {} windows per model, {elapsed:.1?}", report.reports.len(), report.reports[0].total_samples))
}

// 10 ------------------------------------------------------------------------

struct Perfect(TargetSet);

impl Regressor for Perfect {
    fn target_set(&self) -> TargetSet {
        self.0
    }

    fn predict_samples(&self, samples: &[&WindowSample]) -> tclf_core::Result<Vec<[f64; 2]>> {
        Ok(samples.iter().map(|s| self.0.extract(&s.targets)).collect())
    }
}

impl Trainer for Perfect {
    type Model = Perfect;

    fn name(&self) -> String {
        "perfect".into()
    }

    fn target_set(&self) -> TargetSet {
        self.0
    }

    fn fit(&self, _: &Dataset) -> tclf_core::Result<Perfect> {
        Ok(Perfect(self.0))
    }
}

fn stub_oracle(dir: &Path) -> Outcome {
    let tracks = synthetic_tracks(dir, 40, 3, &[])?;
    let ids: Vec<&str> = tracks.iter().map(|t| t.cyclone_id()).collect();
    let plan = plan_folds(&ids, 5, 10).map_err(|e| e.to_string())?;
    let mut traces = 0;
    for ts in [TargetSet::IntensityTime, TargetSet::Location] {
        let r = cross_validate(&tracks, 8, &Perfect(ts), &plan).map_err(|e| e.to_string())?;
        for f in &r.folds {
            ensure!(f.mae == [0.0; 2] && f.rmse == [0.0; 2], "fold {} of {ts} is non-zero", f.fold);
            ensure!(f.distance_km.unwrap_or(0.0) == 0.0, "fold {} distance non-zero", f.fold);
        }
        for t in &tracks {
            let s = sliding_eval(t, &Perfect(ts), 8).map_err(|e| e.to_string())?;
            ensure!(s.mae == [0.0; 2] && s.rmse == [0.0; 2], "{} sliding errors non-zero", t.cyclone_id());
            ensure!(s.trace.iter().all(|row| row.distance_km.unwrap_or(0.0) == 0.0), "{} distance non-zero", t.cyclone_id());
            traces += s.trace.len();
        }
    }
    Ok(format!("all fold and sliding errors exactly zero ({traces} sliding predictions)"))
}

// 11 ------------------------------------------------------------------------

fn serialization(dir: &Path) -> Outcome {
    let tracks = synthetic_tracks(dir, 40, 3, &[])?;
    let refs: Vec<&CycloneTrack> = tracks.iter().collect();
    let (ds, _) = Dataset::from_tracks(&refs, 6).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let ranges = [(10.0, 140.0), (900.0, 1010.0), (25.0, 31.0), (0.0, 60.0), (0.0, 360.0), (5.0, 22.0), (78.0, 95.0)];
    let windows: Vec<Matrix> = (0..100)
        .map(|_| Matrix::from_vec(6, FEATURE_COUNT, (0..6).flat_map(|_| ranges.map(|(a, b)| rng.gen_range(a..b))).collect()).unwrap())
        .collect();
    let refs: Vec<&Matrix> = windows.iter().collect();
    for cfg in [ModelConfig::intensity_time(6), ModelConfig::location(6)] {
        let m = train(&cfg.with_hidden_width(8).with_epochs(5), &ds).map_err(|e| e.to_string())?;
        let loaded = load_model(&save_model(&m).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        let a = m.predict_batch(&refs).map_err(|e| e.to_string())?;
        let b = loaded.predict_batch(&refs).map_err(|e| e.to_string())?;
        let same = a.iter().zip(&b).all(|(x, y)| x[0].to_bits() == y[0].to_bits() && x[1].to_bits() == y[1].to_bits());
        ensure!(same, "{} predictions changed after reload", m.config.kind_name());
    }
    Ok("100 random windows bit-identical after reload for both models".into())
}

fn main() {
    let dir = tempfile::tempdir().expect("temporary directory");
    let d = dir.path();
    let criteria: Vec<Criterion> = vec![
        ("gradient oracle", Box::new(gradient_oracle)),
        ("adam oracle", Box::new(adam_oracle)),
        ("window arithmetic", Box::new(|| window_arithmetic(d))),
        ("interpolation", Box::new(interpolation)),
        ("geodesy", Box::new(geodesy)),
        ("scaler", Box::new(scaler)),
        ("training sanity", Box::new(|| training_sanity(d))),
        ("determinism", Box::new(|| determinism(d))),
        ("end-to-end cross-validation", Box::new(|| end_to_end(d))),
        ("stub-oracle equivalence", Box::new(|| stub_oracle(d))),
        ("serialization", Box::new(|| serialization(d))),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let n = i + 1;
        if !filter.is_empty() && !filter.iter().any(|f| *f == n.to_string() || name.contains(f.as_str())) {
            continue;
        }
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        match outcome {
            Ok(detail) => println!("criterion {n:>2} {name}: PASS ({detail})"),
            Err(why) => {
                failed += 1;
                println!("criterion {n:>2} {name}: FAIL ({why})");
            }
        }
    }
    println!("criterion 12 (real-data accuracy bands) is a documented recipe, not run here");
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
