#![allow(dead_code)]

use tclf_core::preprocess::build_track;
use tclf_core::{CycloneTrack, Observation};

/// A smooth, deterministic track of `n` 3-hourly points ending at landfall.
pub fn track(id: &str, n: usize, phase: f64) -> CycloneTrack {
    let obs: Vec<Observation> = (0..n)
        .map(|i| {
            let s = i as f64;
            Observation {
                hour: 3 * i as i64,
                latitude: 10.0 + 0.3 * s + phase,
                longitude: 85.0 + 0.1 * s * (1.0 + phase).sin(),
                msws: 30.0 + 4.0 * s + 5.0 * phase,
                ecp: 1000.0 - 3.0 * s,
                sst: 28.0 + 0.1 * phase,
                landfall: i == n - 1,
            }
        })
        .collect();
    build_track(id, 0, &obs).unwrap()
}

pub fn corpus(count: usize, len: impl Fn(usize) -> usize) -> Vec<CycloneTrack> {
    (0..count).map(|i| track(&format!("C{i:02}"), len(i), i as f64 * 0.37)).collect()
}
