//! Best-track parsing and cleaning into landfall-truncated 3-hourly tracks.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Read;

use chrono::{DateTime, NaiveDate, NaiveDateTime, Utc};
use tclf_core::preprocess::build_track;
use tclf_core::{CycloneTrack, Observation, STEP_HOURS};

use crate::error::{Error, Result, RowError};

#[derive(Debug, Clone, PartialEq)]
pub struct RawRecord {
    pub cyclone_id: String,
    pub timestamp: DateTime<Utc>,
    pub latitude: f64,
    /// Degrees in [-180, 180]; east longitudes above 180 are wrapped on read.
    pub longitude: f64,
    pub msws: f64,
    pub ecp: f64,
    pub sst: Option<f64>,
    pub landfall: Option<bool>,
}

impl RawRecord {
    pub fn label(&self) -> String {
        format!("{}@{}", self.cyclone_id, format_timestamp(self.timestamp))
    }
}

/// Column names of a best-track file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schema {
    pub cyclone_id: String,
    pub timestamp: String,
    pub latitude: String,
    pub longitude: String,
    pub msws: String,
    pub ecp: String,
    pub sst: String,
    pub landfall: String,
}

impl Default for Schema {
    fn default() -> Self {
        Schema {
            cyclone_id: "cyclone_id".into(),
            timestamp: "timestamp".into(),
            latitude: "lat".into(),
            longitude: "lon".into(),
            msws: "msws_kt".into(),
            ecp: "ecp_hpa".into(),
            sst: "sst_c".into(),
            landfall: "landfall".into(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParsedBestTrack {
    /// Sorted by `(cyclone_id, timestamp)`.
    pub records: Vec<RawRecord>,
    pub errors: Vec<RowError>,
    /// Exact duplicate rows that were dropped.
    pub duplicates: usize,
}

pub fn parse_timestamp(s: &str) -> Option<DateTime<Utc>> {
    if let Ok(t) = DateTime::parse_from_rfc3339(s) {
        return Some(t.with_timezone(&Utc));
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S", "%Y-%m-%dT%H:%M", "%Y-%m-%d %H:%M"] {
        if let Ok(t) = NaiveDateTime::parse_from_str(s, fmt) {
            return Some(t.and_utc());
        }
    }
    NaiveDate::parse_from_str(s, "%Y-%m-%d").ok().map(|d| d.and_hms_opt(0, 0, 0).expect("midnight").and_utc())
}

pub fn format_timestamp(t: DateTime<Utc>) -> String {
    t.format("%Y-%m-%dT%H:%M:%SZ").to_string()
}

pub(crate) fn header_index(headers: &csv::ByteRecord, name: &str) -> Option<usize> {
    headers.iter().position(|h| std::str::from_utf8(h).is_ok_and(|h| h.trim().eq_ignore_ascii_case(name)))
}

struct Columns {
    id: usize,
    timestamp: usize,
    latitude: usize,
    longitude: usize,
    msws: usize,
    ecp: usize,
    sst: Option<usize>,
    landfall: Option<usize>,
}

struct Row<'a> {
    record: &'a csv::ByteRecord,
    line: u64,
    schema: &'a Schema,
}

impl Row<'_> {
    fn err(&self, column: &str, message: impl Into<String>) -> RowError {
        RowError { line: self.line, column: Some(column.into()), message: message.into() }
    }

    fn text(&self, idx: usize, column: &str) -> Result<&str, RowError> {
        let raw = self.record.get(idx).ok_or_else(|| self.err(column, "missing value"))?;
        std::str::from_utf8(raw).map(str::trim).map_err(|_| self.err(column, "not valid UTF-8"))
    }

    fn optional(&self, idx: Option<usize>, column: &str) -> Result<Option<&str>, RowError> {
        match idx {
            None => Ok(None),
            Some(i) if self.record.get(i).is_none() => Ok(None),
            Some(i) => self.text(i, column).map(|s| (!s.is_empty()).then_some(s)),
        }
    }

    fn number(&self, idx: usize, column: &str) -> Result<f64, RowError> {
        let s = self.text(idx, column)?;
        match s.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(self.err(column, format!("'{s}' is not a finite number"))),
        }
    }

    fn parse(&self, c: &Columns) -> Result<RawRecord, RowError> {
        let s = self.schema;
        let cyclone_id = self.text(c.id, &s.cyclone_id)?;
        if cyclone_id.is_empty() {
            return Err(self.err(&s.cyclone_id, "empty cyclone id"));
        }
        let ts = self.text(c.timestamp, &s.timestamp)?;
        let timestamp = parse_timestamp(ts).ok_or_else(|| self.err(&s.timestamp, format!("'{ts}' is not an ISO-8601 timestamp")))?;
        let latitude = self.number(c.latitude, &s.latitude)?;
        if !(-90.0..=90.0).contains(&latitude) {
            return Err(self.err(&s.latitude, format!("{latitude} is outside [-90, 90]")));
        }
        let mut longitude = self.number(c.longitude, &s.longitude)?;
        if longitude > 180.0 && longitude <= 360.0 {
            longitude -= 360.0;
        }
        if !(-180.0..=180.0).contains(&longitude) {
            return Err(self.err(&s.longitude, format!("{longitude} is outside [-180, 360]")));
        }
        let msws = self.number(c.msws, &s.msws)?;
        if msws < 0.0 {
            return Err(self.err(&s.msws, format!("{msws} is negative")));
        }
        let ecp = self.number(c.ecp, &s.ecp)?;
        if !(ecp > 800.0 && ecp < 1100.0) {
            return Err(self.err(&s.ecp, format!("{ecp} is outside (800, 1100)")));
        }
        let sst = match self.optional(c.sst, &s.sst)? {
            None => None,
            Some(v) => match v.parse::<f64>() {
                Ok(x) if x.is_finite() => Some(x),
                _ => return Err(self.err(&s.sst, format!("'{v}' is not a finite number"))),
            },
        };
        let landfall = match self.optional(c.landfall, &s.landfall)? {
            None => None,
            Some("1") | Some("true") => Some(true),
            Some("0") | Some("false") => Some(false),
            Some(v) => return Err(self.err(&s.landfall, format!("'{v}' is not 0 or 1"))),
        };
        Ok(RawRecord { cyclone_id: cyclone_id.into(), timestamp, latitude, longitude, msws, ecp, sst, landfall })
    }
}

/// Parses a comma-delimited best-track stream. Bad rows are reported, not
/// fatal; only a missing column or conflicting duplicates fail the parse.
pub fn parse_best_track<R: Read>(source: R, schema: &Schema) -> Result<ParsedBestTrack> {
    let mut reader = csv::ReaderBuilder::new().flexible(true).has_headers(true).from_reader(source);
    let headers = reader.byte_headers().map_err(|e| Error::Schema(format!("cannot read header row: {e}")))?.clone();
    if headers.is_empty() || headers.iter().all(|h| h.is_empty()) {
        return Err(Error::Schema("missing header row".into()));
    }
    let required = |name: &str| header_index(&headers, name).ok_or_else(|| Error::Schema(format!("missing required column '{name}'")));
    let columns = Columns {
        id: required(&schema.cyclone_id)?,
        timestamp: required(&schema.timestamp)?,
        latitude: required(&schema.latitude)?,
        longitude: required(&schema.longitude)?,
        msws: required(&schema.msws)?,
        ecp: required(&schema.ecp)?,
        sst: header_index(&headers, &schema.sst),
        landfall: header_index(&headers, &schema.landfall),
    };
    let mut parsed = ParsedBestTrack::default();
    let mut record = csv::ByteRecord::new();
    loop {
        match reader.read_byte_record(&mut record) {
            Ok(false) => break,
            Ok(true) => {
                let line = record.position().map_or(0, |p| p.line());
                if record.iter().all(|f| f.iter().all(u8::is_ascii_whitespace)) {
                    continue;
                }
                match (Row { record: &record, line, schema }).parse(&columns) {
                    Ok(r) => parsed.records.push(r),
                    Err(e) => parsed.errors.push(e),
                }
            }
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line());
                parsed.errors.push(RowError { line, column: None, message: e.to_string() });
                if matches!(e.kind(), csv::ErrorKind::Io(_)) {
                    break;
                }
            }
        }
    }
    parsed.records.sort_by(|a, b| (&a.cyclone_id, a.timestamp).cmp(&(&b.cyclone_id, b.timestamp)));
    let mut kept: Vec<RawRecord> = Vec::with_capacity(parsed.records.len());
    for r in parsed.records.drain(..) {
        match kept.last() {
            Some(prev) if prev.cyclone_id == r.cyclone_id && prev.timestamp == r.timestamp => {
                if *prev == r {
                    parsed.duplicates += 1;
                } else {
                    return Err(Error::Conflict(format!("{} has differing values", r.label())));
                }
            }
            _ => kept.push(r),
        }
    }
    if parsed.duplicates > 0 {
        log::warn!("dropped {} exact duplicate row(s)", parsed.duplicates);
    }
    parsed.records = kept;
    Ok(parsed)
}

#[derive(Debug, Clone, PartialEq)]
pub enum RejectReason {
    NoLandfall,
    TooShort { retained: usize },
    Invalid(String),
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RejectReason::NoLandfall => f.write_str("no landfall"),
            RejectReason::TooShort { retained } => write!(f, "too short: {retained} record(s) up to landfall, need at least 2"),
            RejectReason::Invalid(m) => f.write_str(m),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rejection {
    pub cyclone_id: String,
    pub reason: RejectReason,
}

/// Keeps one cyclone's records up to and including the first flagged
/// landfall, then fills gaps and derives motion. Missing SST values are
/// interpolated like any other field.
pub fn truncate_at_landfall(records: &[RawRecord]) -> Result<CycloneTrack, Rejection> {
    let id = records.first().map(|r| r.cyclone_id.clone()).unwrap_or_default();
    let reject = |reason| Rejection { cyclone_id: id.clone(), reason };
    if records.iter().any(|r| r.cyclone_id != id) {
        return Err(reject(RejectReason::Invalid("records of several cyclones".into())));
    }
    let Some(landfall) = records.iter().position(|r| r.landfall == Some(true)) else {
        return Err(reject(RejectReason::NoLandfall));
    };
    if landfall < 1 {
        return Err(reject(RejectReason::TooShort { retained: landfall + 1 }));
    }
    let kept = &records[..=landfall];
    let origin = kept[0].timestamp;
    let step = STEP_HOURS * 3600;
    let mut observations = Vec::with_capacity(kept.len());
    for r in kept {
        let secs = (r.timestamp - origin).num_seconds();
        if secs % step != 0 {
            return Err(reject(RejectReason::Invalid(format!("{} is not on the 3-hour grid of the first record", r.label()))));
        }
        observations.push(Observation {
            hour: secs / 3600,
            latitude: r.latitude,
            longitude: r.longitude,
            msws: r.msws,
            ecp: r.ecp,
            sst: r.sst.unwrap_or(f64::NAN),
            landfall: r.landfall == Some(true),
        });
    }
    build_track(id.clone(), origin.timestamp(), &observations).map_err(|e| reject(RejectReason::Invalid(e.to_string())))
}

#[derive(Debug, Clone, Default)]
pub struct Cleaned {
    pub tracks: Vec<CycloneTrack>,
    pub rejections: Vec<Rejection>,
    pub records_in: usize,
    pub records_out: usize,
}

/// Groups sorted records by cyclone and truncates each at landfall.
pub fn clean(records: &[RawRecord]) -> Cleaned {
    let mut groups: BTreeMap<&str, Vec<RawRecord>> = BTreeMap::new();
    for r in records {
        groups.entry(&r.cyclone_id).or_default().push(r.clone());
    }
    let mut out = Cleaned { records_in: records.len(), ..Cleaned::default() };
    for group in groups.values() {
        match truncate_at_landfall(group) {
            Ok(track) => {
                out.records_out += track.len();
                out.tracks.push(track);
            }
            Err(r) => out.rejections.push(r),
        }
    }
    out
}
