//! Deterministic synthetic best-track corpus.
//!
//! Paths curve gently toward a sinusoidal coastline and are built backward
//! from the landfall point, so the landfall row is exactly where the path
//! meets the coast and every earlier row is at sea. A few inland rows follow.

use std::f64::consts::FRAC_PI_2;

use chrono::{DateTime, Duration, Utc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::ingest::RawRecord;

const KM_PER_DEG: f64 = 111.195;
pub const MSWS_RANGE: (f64, f64) = (10.0, 140.0);

#[derive(Debug, Clone, PartialEq)]
pub struct SynthOptions {
    pub cyclones: usize,
    pub seed: u64,
    /// Range of the number of records up to and including landfall.
    pub min_points: usize,
    pub max_points: usize,
    /// Inland records after landfall are drawn from `0..=post_landfall`.
    pub post_landfall: usize,
}

impl Default for SynthOptions {
    fn default() -> Self {
        SynthOptions { cyclones: 40, seed: 0, min_points: 9, max_points: 14, post_landfall: 3 }
    }
}

/// Latitude of the synthetic coastline at a longitude.
pub fn coast_latitude(lon: f64) -> f64 {
    17.0 + 2.0 * (lon / 4.0).sin()
}

fn sst_field(lat: f64, lon: f64, offset: f64) -> f64 {
    29.0 - 0.12 * (lat - 12.0) + 0.6 * (lon / 5.0).sin() + offset
}

fn round(v: f64, places: i32) -> f64 {
    let f = 10f64.powi(places);
    (v * f).round() / f
}

fn step(lat: f64, lon: f64, bearing_deg: f64, km: f64) -> (f64, f64) {
    let b = bearing_deg.to_radians();
    let lat2 = lat + km * b.cos() / KM_PER_DEG;
    let lon2 = lon + km * b.sin() / (KM_PER_DEG * lat.to_radians().cos());
    (lat2, lon2)
}

fn intensity(s: f64, start: f64, peak: f64, at_landfall: f64, peak_at: f64) -> f64 {
    if s <= peak_at {
        start + (peak - start) * (FRAC_PI_2 * s / peak_at).sin()
    } else {
        peak + (at_landfall - peak) * (FRAC_PI_2 * (s - peak_at) / (1.0 - peak_at)).sin()
    }
}

pub fn generate(opts: &SynthOptions) -> Result<Vec<RawRecord>> {
    if opts.cyclones < 1 {
        return Err(Error::Usage("need at least one cyclone".into()));
    }
    if opts.min_points < 2 || opts.max_points < opts.min_points {
        return Err(Error::Usage(format!(
            "track length range {}..={} is invalid (minimum 2)",
            opts.min_points, opts.max_points
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut start: DateTime<Utc> = DateTime::from_timestamp(946_684_800, 0).expect("2000-01-01");
    let mut out = Vec::new();
    for c in 0..opts.cyclones {
        start += Duration::days(rng.gen_range(5..40)) + Duration::hours(3 * rng.gen_range(0..8));
        let n = rng.gen_range(opts.min_points..=opts.max_points);
        let post = rng.gen_range(0..=opts.post_landfall);
        let lon_l = rng.gen_range(80.0..92.0);
        let heading_l: f64 = rng.gen_range(-30.0..30.0);
        let turn: f64 = rng.gen_range(-4.0..4.0);
        let speed = rng.gen_range(30.0..50.0);
        let heading = |k: f64| (heading_l + turn * k).clamp(-45.0, 45.0);

        // positions[n - 1] is the landfall point; walk backward to the genesis point
        let mut positions = vec![(coast_latitude(lon_l), lon_l); n];
        for i in (0..n - 1).rev() {
            let (lat, lon) = positions[i + 1];
            positions[i] = step(lat, lon, heading(i as f64 + 1.0 - (n - 1) as f64) + 180.0, speed);
        }
        for k in 1..=post {
            let (lat, lon) = *positions.last().expect("non-empty");
            positions.push(step(lat, lon, heading(k as f64), speed));
        }

        let peak_at = rng.gen_range(0.4..0.8);
        let genesis = rng.gen_range(20.0..30.0);
        let peak = rng.gen_range(50.0..130.0);
        let at_landfall = peak * rng.gen_range(0.55..0.9);
        let sst_offset = rng.gen_range(-0.5..0.5);
        for (i, &(lat, lon)) in positions.iter().enumerate() {
            let base = if i < n {
                intensity(i as f64 / (n - 1) as f64, genesis, peak, at_landfall, peak_at)
            } else {
                at_landfall * 0.75f64.powi((i + 1 - n) as i32)
            };
            let msws = round((base + rng.gen_range(-1.0..1.0)).clamp(MSWS_RANGE.0, MSWS_RANGE.1), 1);
            let ecp = round(1010.0 - msws * msws / 180.0 + rng.gen_range(-0.5..0.5), 1);
            out.push(RawRecord {
                cyclone_id: format!("SYN{:03}", c + 1),
                timestamp: start + Duration::hours(3 * i as i64),
                latitude: round(lat, 3),
                longitude: round(lon, 3),
                msws,
                ecp,
                sst: Some(round(sst_field(lat, lon, sst_offset), 2)),
                landfall: Some(i == n - 1),
            });
        }
    }
    Ok(out)
}
