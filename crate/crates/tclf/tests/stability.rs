//! Training stability on the default synthetic corpus: the 20-epoch moving
//! average of the epoch loss must never rise.

use tclf::ingest::clean;
use tclf::synth::{generate, SynthOptions};
use tclf_core::models::{train, ModelConfig};
use tclf_core::windows::Dataset;
use tclf_core::CycloneTrack;

const SPAN: usize = 20;

fn moving_average(losses: &[f64]) -> Vec<f64> {
    losses.windows(SPAN).map(|w| w.iter().sum::<f64>() / SPAN as f64).collect()
}

fn check(config: ModelConfig) {
    let records = generate(&SynthOptions::default()).unwrap();
    let tracks = clean(&records).tracks;
    let refs: Vec<&CycloneTrack> = tracks.iter().collect();
    let (ds, _) = Dataset::from_tracks(&refs, config.window_len).unwrap();
    let model = train(&config, &ds).unwrap();
    let ma = moving_average(&model.metadata.epoch_losses);
    assert_eq!(ma.len(), config.epochs - SPAN + 1);
    let rises: Vec<String> = ma
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[1] > w[0])
        .map(|(i, w)| format!("epoch {}: {:.3e} -> {:.3e}", i + SPAN, w[0], w[1]))
        .collect();
    assert!(rises.is_empty(), "{} moving average rose {} times:\n{}", config.kind_name(), rises.len(), rises.join("\n"));
}

#[test]
fn intensity_time_loss_is_stable() {
    check(ModelConfig::intensity_time(8));
}

#[test]
fn location_loss_is_stable() {
    check(ModelConfig::location(8));
}

#[test]
fn moving_average_of_a_ramp() {
    let losses: Vec<f64> = (0..25).map(|e| 50.0 - e as f64).collect();
    let ma = moving_average(&losses);
    assert_eq!(ma.len(), 6);
    assert_eq!(ma[0], 40.5);
    assert!(ma.windows(2).all(|w| w[1] - w[0] == -1.0));
}
