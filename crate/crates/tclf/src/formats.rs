//! Plain-text file formats and atomic output.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use chrono::DateTime;
use tclf_core::eval::SlidingReport;
use tclf_core::matrix::Matrix;
use tclf_core::models::TargetSet;
use tclf_core::windows::WindowSample;
use tclf_core::{CycloneTrack, FEATURE_COUNT, FEATURE_NAMES};

use crate::error::{Error, Result};
use crate::ingest::{clean, format_timestamp, parse_best_track, RawRecord, Schema};

/// Writes to a temporary file beside `path` and renames it into place.
pub fn atomic_write(path: &Path, write: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    {
        let mut buf = std::io::BufWriter::new(tmp.as_file_mut());
        write(&mut buf).map_err(|e| Error::io(path, e))?;
        buf.flush().map_err(|e| Error::io(path, e))?;
    }
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

pub fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

const BEST_TRACK_HEADER: [&str; 8] = ["cyclone_id", "timestamp", "lat", "lon", "msws_kt", "ecp_hpa", "sst_c", "landfall"];

/// Raw records in best-track layout; absent optional fields are left empty.
pub fn write_best_track(out: &mut dyn Write, records: &[RawRecord]) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(BEST_TRACK_HEADER)?;
    for r in records {
        w.write_record([
            r.cyclone_id.clone(),
            format_timestamp(r.timestamp),
            r.latitude.to_string(),
            r.longitude.to_string(),
            r.msws.to_string(),
            r.ecp.to_string(),
            r.sst.map_or_else(String::new, |v| v.to_string()),
            r.landfall.map_or("", |f| if f { "1" } else { "0" }).to_string(),
        ])?;
    }
    w.flush()
}

const TRACK_HEADER: [&str; 10] =
    ["cyclone_id", "timestamp", "lat", "lon", "msws_kt", "ecp_hpa", "sst_c", "landfall", "distance_km", "direction_deg"];

/// Cleaned tracks in best-track layout plus the derived motion columns; the
/// file is itself valid best-track input, and floats round-trip exactly.
pub fn write_tracks(out: &mut dyn Write, tracks: &[CycloneTrack]) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRACK_HEADER)?;
    for t in tracks {
        let origin = DateTime::from_timestamp(t.origin(), 0).expect("origin within chrono range");
        for (i, p) in t.points().iter().enumerate() {
            w.write_record([
                t.cyclone_id().to_string(),
                format_timestamp(origin + chrono::Duration::hours(p.t)),
                p.latitude.to_string(),
                p.longitude.to_string(),
                p.msws.to_string(),
                p.ecp.to_string(),
                p.sst.to_string(),
                if i == t.landfall_index() { "1" } else { "0" }.to_string(),
                p.distance.to_string(),
                p.direction.to_string(),
            ])?;
        }
    }
    w.flush()
}

/// Loads tracks from a cleaned or raw best-track file; cyclones without a
/// landfall or otherwise unusable are skipped with a warning.
pub fn read_tracks(path: &Path) -> Result<Vec<CycloneTrack>> {
    let bytes = read_file(path)?;
    let parsed = parse_best_track(bytes.as_slice(), &Schema::default())?;
    if !parsed.errors.is_empty() {
        return Err(Error::Rows { source_name: path.display().to_string(), errors: parsed.errors });
    }
    let cleaned = clean(&parsed.records);
    for r in &cleaned.rejections {
        log::warn!("skipping cyclone {}: {}", r.cyclone_id, r.reason);
    }
    Ok(cleaned.tracks)
}

/// One row per window: `x{row}_{feature}` columns then the four targets.
/// A leading comment line names the window length.
pub fn write_dataset(out: &mut dyn Write, window_len: usize, samples: &[WindowSample]) -> std::io::Result<()> {
    writeln!(out, "# window_length={window_len}")?;
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["cyclone_id".to_string(), "start_index".to_string()];
    for r in 0..window_len {
        header.extend(FEATURE_NAMES.iter().map(|f| format!("x{r}_{f}")));
    }
    header.extend(["msws_kt", "lat_deg", "lon_deg", "hours_to_landfall"].map(String::from));
    w.write_record(&header)?;
    for s in samples {
        let mut row = vec![s.cyclone_id.clone(), s.start_index.to_string()];
        row.extend(s.x.as_slice().iter().map(f64::to_string));
        let t = &s.targets;
        row.extend([t.msws, t.latitude, t.longitude, t.hours_to_landfall].map(|v| v.to_string()));
        w.write_record(&row)?;
    }
    w.flush()
}

/// Accepted spellings of each feature column in a window file.
const FEATURE_ALIASES: [[&str; 2]; FEATURE_COUNT] = [
    ["msws", "msws_kt"],
    ["ecp", "ecp_hpa"],
    ["sst", "sst_c"],
    ["distance", "distance_km"],
    ["direction", "direction_deg"],
    ["latitude", "lat"],
    ["longitude", "lon"],
];

/// Reads a `T x 7` window. Columns are matched by name, so rows copied from
/// a cleaned tracks file work as-is.
pub fn read_window<R: Read>(source: R, source_name: &str) -> Result<Matrix> {
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(source);
    let headers = reader.headers().map_err(|e| Error::Schema(format!("{source_name}: {e}")))?.clone();
    let mut idx = [0usize; FEATURE_COUNT];
    for (j, aliases) in FEATURE_ALIASES.iter().enumerate() {
        idx[j] = headers
            .iter()
            .position(|h| aliases.iter().any(|a| h.trim().eq_ignore_ascii_case(a)))
            .ok_or_else(|| Error::Schema(format!("{source_name}: missing feature column '{}'", aliases[0])))?;
    }
    let mut data = Vec::new();
    let mut rows = 0;
    for (n, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Schema(format!("{source_name}: {e}")))?;
        for (j, &i) in idx.iter().enumerate() {
            let s = record.get(i).unwrap_or("").trim();
            let v = s.parse::<f64>().map_err(|_| Error::Rows {
                source_name: source_name.into(),
                errors: vec![crate::error::RowError {
                    line: record.position().map_or(n as u64 + 2, |p| p.line()),
                    column: Some(FEATURE_ALIASES[j][0].into()),
                    message: format!("'{s}' is not a number"),
                }],
            })?;
            data.push(v);
        }
        rows += 1;
    }
    Ok(Matrix::from_vec(rows, FEATURE_COUNT, data)?)
}

/// Prediction-versus-actual trace of a sliding evaluation.
pub fn write_trace(out: &mut dyn Write, report: &SlidingReport) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let names = report.target_set.names();
    let mut header = vec!["hour_of_prediction".to_string(), "window_start_hour".into(), "window_end_hour".into()];
    for n in names {
        header.push(format!("predicted_{n}"));
        header.push(format!("actual_{n}"));
    }
    if report.target_set == TargetSet::Location {
        header.push("distance_km".into());
    }
    w.write_record(&header)?;
    for r in &report.trace {
        let mut row = vec![r.hour_of_prediction.to_string(), r.window_start_hour.to_string(), r.window_end_hour.to_string()];
        for j in 0..2 {
            row.push(r.predicted[j].to_string());
            row.push(r.actual[j].to_string());
        }
        if let Some(d) = r.distance_km {
            row.push(d.to_string());
        }
        w.write_record(&row)?;
    }
    w.flush()
}
