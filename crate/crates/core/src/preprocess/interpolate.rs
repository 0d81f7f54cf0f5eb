use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::track::Observation;
use crate::STEP_HOURS;

const FIELDS: usize = 5;

fn fields(o: &Observation) -> [f64; FIELDS] {
    [o.latitude, o.longitude, o.msws, o.ecp, o.sst]
}

fn set_fields(o: &mut Observation, v: [f64; FIELDS]) {
    o.latitude = v[0];
    o.longitude = v[1];
    o.msws = v[2];
    o.ecp = v[3];
    o.sst = v[4];
}

/// Fills missing 3-hour slots (and missing NaN fields) by linear steps between
/// the bracketing known values.
///
/// For a value known at `t0` and `t0 + 3n` hours the increment is
/// `D = (d_end - d_start) / n` and slot `k` receives `d_start + k * D`. Each of
/// latitude, longitude, MSWS, ECP and SST is filled independently. Known values
/// are copied through untouched; filled rows never carry a landfall flag.
pub fn interpolate_gaps(observations: &[Observation]) -> Result<Vec<Observation>> {
    if observations.len() < 2 {
        return Err(Error::CannotInterpolate(alloc::format!(
            "need at least 2 observations, got {}",
            observations.len()
        )));
    }
    let start = observations[0].hour;
    for w in observations.windows(2) {
        if w[1].hour <= w[0].hour {
            return Err(Error::invalid(alloc::format!(
                "hours must be strictly increasing ({} then {})",
                w[0].hour,
                w[1].hour
            )));
        }
    }
    for o in observations {
        if (o.hour - start) % STEP_HOURS != 0 {
            return Err(Error::invalid(alloc::format!(
                "hour {} is not on the 3-hour grid starting at {}",
                o.hour,
                start
            )));
        }
    }
    let end = observations[observations.len() - 1].hour;
    let slots = ((end - start) / STEP_HOURS) as usize + 1;

    let mut known: Vec<Option<[f64; FIELDS]>> = vec![None; slots];
    let mut out: Vec<Observation> = (0..slots)
        .map(|i| Observation {
            hour: start + i as i64 * STEP_HOURS,
            latitude: f64::NAN,
            longitude: f64::NAN,
            msws: f64::NAN,
            ecp: f64::NAN,
            sst: f64::NAN,
            landfall: false,
        })
        .collect();
    for o in observations {
        let i = ((o.hour - start) / STEP_HOURS) as usize;
        known[i] = Some(fields(o));
        out[i].landfall = o.landfall;
    }

    let mut columns = [(); FIELDS].map(|_| vec![f64::NAN; slots]);
    for (i, k) in known.iter().enumerate() {
        if let Some(v) = k {
            for f in 0..FIELDS {
                columns[f][i] = v[f];
            }
        }
    }
    for (f, column) in columns.iter_mut().enumerate() {
        fill_column(column).map_err(|slot| {
            Error::CannotInterpolate(alloc::format!(
                "{} missing at {}h without a bracketing value",
                ["latitude", "longitude", "msws", "ecp", "sst"][f],
                start + slot as i64 * STEP_HOURS
            ))
        })?;
    }
    for (i, o) in out.iter_mut().enumerate() {
        set_fields(o, [0, 1, 2, 3, 4].map(|f| columns[f][i]));
    }
    Ok(out)
}

/// Linear fill of NaN runs; returns the first unbracketed slot on failure.
fn fill_column(column: &mut [f64]) -> core::result::Result<(), usize> {
    let n = column.len();
    let mut i = 0;
    while i < n {
        if column[i].is_finite() {
            i += 1;
            continue;
        }
        if i == 0 {
            return Err(0);
        }
        let left = i - 1;
        let mut right = i;
        while right < n && !column[right].is_finite() {
            right += 1;
        }
        if right == n {
            return Err(i);
        }
        let steps = (right - left) as f64;
        let d0 = column[left];
        let delta = (column[right] - d0) / steps;
        for k in 1..(right - left) {
            column[left + k] = d0 + k as f64 * delta;
        }
        i = right + 1;
    }
    Ok(())
}
