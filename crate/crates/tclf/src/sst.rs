//! Sea-surface temperature grids and nearest-cell lookup.

use std::collections::BTreeMap;
use std::io::Read;

use chrono::NaiveDate;
use tclf_core::geo::{haversine_km, GeoPoint, EARTH_RADIUS_KM};

use crate::error::{Error, Result, RowError};
use crate::ingest::{header_index, RawRecord};

/// Furthest a record may be from the cell supplying its SST.
pub const MAX_DISTANCE_DEG: f64 = 5.0;
/// Oldest grid date, in days before the record, that may supply its SST.
pub const MAX_AGE_DAYS: i64 = 31;

#[derive(Debug, Clone, PartialEq)]
pub struct SstGrid {
    resolution: f64,
    /// Per date, `(lat, lon, sst)` cells in file order.
    cells: BTreeMap<NaiveDate, Vec<(f64, f64, f64)>>,
}

fn aligned(v: f64, resolution: f64) -> bool {
    let q = v / resolution;
    (q - q.round()).abs() < 1e-9
}

impl SstGrid {
    pub fn new(resolution: f64) -> Result<Self> {
        if !(resolution.is_finite() && resolution > 0.0) {
            return Err(Error::Usage(format!("grid resolution must be positive, got {resolution}")));
        }
        Ok(SstGrid { resolution, cells: BTreeMap::new() })
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn insert(&mut self, date: NaiveDate, lat: f64, lon: f64, sst: f64) -> Result<(), String> {
        if !(-90.0..=90.0).contains(&lat) || !(-180.0..=180.0).contains(&lon) {
            return Err(format!("cell ({lat}, {lon}) is out of range"));
        }
        if !aligned(lat, self.resolution) || !aligned(lon, self.resolution) {
            return Err(format!("cell ({lat}, {lon}) is not aligned to {} degrees", self.resolution));
        }
        if !(sst > -5.0 && sst < 40.0) {
            return Err(format!("SST {sst} is outside (-5, 40)"));
        }
        self.cells.entry(date).or_default().push((lat, lon, sst));
        Ok(())
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// SST of the nearest cell on the latest date at or before `date`, within
    /// the distance and age limits.
    pub fn lookup(&self, date: NaiveDate, point: GeoPoint) -> Option<f64> {
        let max_km = MAX_DISTANCE_DEG.to_radians() * EARTH_RADIUS_KM;
        let oldest = date - chrono::Duration::days(MAX_AGE_DAYS);
        for (_, cells) in self.cells.range(oldest..=date).rev() {
            let mut best: Option<(f64, f64)> = None;
            for &(lat, lon, sst) in cells {
                let d = haversine_km(point, GeoPoint::new(lat, lon).expect("validated on insert"));
                if d <= max_km && best.is_none_or(|(bd, _)| d < bd) {
                    best = Some((d, sst));
                }
            }
            if let Some((_, sst)) = best {
                return Some(sst);
            }
        }
        None
    }
}

/// Reads `date,lat,lon,sst_c` rows; any bad row fails the whole grid.
pub fn parse_sst_grid<R: Read>(source: R, resolution: f64, source_name: &str) -> Result<SstGrid> {
    let mut grid = SstGrid::new(resolution)?;
    let mut reader = csv::ReaderBuilder::new().flexible(true).from_reader(source);
    let headers = reader.byte_headers().map_err(|e| Error::Schema(format!("cannot read header row: {e}")))?.clone();
    let col = |name: &str| header_index(&headers, name).ok_or_else(|| Error::Schema(format!("missing required column '{name}'")));
    let (date_col, lat_col, lon_col, sst_col) = (col("date")?, col("lat")?, col("lon")?, col("sst_c")?);
    let mut errors = Vec::new();
    for row in reader.byte_records() {
        let row = match row {
            Ok(r) => r,
            Err(e) => {
                errors.push(RowError { line: e.position().map_or(0, |p| p.line()), column: None, message: e.to_string() });
                continue;
            }
        };
        let line = row.position().map_or(0, |p| p.line());
        let field = |i: usize, name: &str| -> Result<&str, RowError> {
            row.get(i)
                .and_then(|b| std::str::from_utf8(b).ok())
                .map(str::trim)
                .ok_or_else(|| RowError { line, column: Some(name.into()), message: "missing or non-UTF-8 value".into() })
        };
        let num = |i: usize, name: &str| -> Result<f64, RowError> {
            let s = field(i, name)?;
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| RowError { line, column: Some(name.into()), message: format!("'{s}' is not a finite number") })
        };
        let parsed = (|| {
            let d = field(date_col, "date")?;
            let date = NaiveDate::parse_from_str(d, "%Y-%m-%d")
                .map_err(|_| RowError { line, column: Some("date".into()), message: format!("'{d}' is not an ISO-8601 date") })?;
            let mut lon = num(lon_col, "lon")?;
            if lon > 180.0 && lon <= 360.0 {
                lon -= 360.0;
            }
            Ok((date, num(lat_col, "lat")?, lon, num(sst_col, "sst_c")?))
        })();
        match parsed {
            Ok((date, lat, lon, sst)) => {
                if let Err(message) = grid.insert(date, lat, lon, sst) {
                    errors.push(RowError { line, column: None, message });
                }
            }
            Err(e) => errors.push(e),
        }
    }
    if !errors.is_empty() {
        return Err(Error::Rows { source_name: source_name.into(), errors });
    }
    if grid.is_empty() {
        return Err(Error::Schema(format!("{source_name} contains no SST cells")));
    }
    Ok(grid)
}

/// Fills missing SST values from the grid; records that carry SST are untouched.
pub fn attach_sst(records: &[RawRecord], grid: &SstGrid) -> Result<Vec<RawRecord>> {
    if grid.is_empty() {
        return Err(Error::Usage("SST grid is empty".into()));
    }
    let mut out = records.to_vec();
    let mut unresolved = Vec::new();
    for r in out.iter_mut().filter(|r| r.sst.is_none()) {
        let point = GeoPoint::new(r.latitude, r.longitude)?;
        match grid.lookup(r.timestamp.date_naive(), point) {
            Some(sst) => r.sst = Some(sst),
            None => unresolved.push(r.label()),
        }
    }
    if !unresolved.is_empty() {
        return Err(Error::UnresolvedSst(unresolved));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::parse_timestamp;

    fn record(lat: f64, lon: f64, ts: &str, sst: Option<f64>) -> RawRecord {
        RawRecord {
            cyclone_id: "A".into(),
            timestamp: parse_timestamp(ts).unwrap(),
            latitude: lat,
            longitude: lon,
            msws: 30.0,
            ecp: 1000.0,
            sst,
            landfall: None,
        }
    }

    fn grid(rows: &str) -> SstGrid {
        parse_sst_grid(format!("date,lat,lon,sst_c\n{rows}").as_bytes(), 1.0, "grid").unwrap()
    }

    #[test]
    fn exact_cell() {
        let g = grid("2020-05-16,10,85,28.5\n2020-05-16,11,85,27.0\n");
        let out = attach_sst(&[record(10.0, 85.0, "2020-05-16T06:00:00Z", None)], &g).unwrap();
        assert_eq!(out[0].sst, Some(28.5));
    }

    #[test]
    fn nearest_cell() {
        // (10.4, 85.4) is 0.4 deg from both axes of (10, 85) and 0.6 from the others
        let g = grid("2020-05-16,10,85,1\n2020-05-16,11,85,2\n2020-05-16,10,86,3\n2020-05-16,11,86,4\n");
        let out = attach_sst(&[record(10.4, 85.4, "2020-05-16T00:00:00Z", None)], &g).unwrap();
        assert_eq!(out[0].sst, Some(1.0));
    }

    #[test]
    fn existing_sst_untouched() {
        let g = grid("2020-05-16,10,85,28.5\n");
        let r = record(10.0, 85.0, "2020-05-16T00:00:00Z", Some(27.0));
        assert_eq!(attach_sst(std::slice::from_ref(&r), &g).unwrap(), vec![r]);
    }

    #[test]
    fn falls_back_to_earlier_dates() {
        let g = grid("2020-05-01,10,85,26\n2020-05-20,10,85,30\n2020-05-10,30,85,20\n");
        let out = attach_sst(&[record(10.0, 85.0, "2020-05-16T00:00:00Z", None)], &g).unwrap();
        assert_eq!(out[0].sst, Some(26.0));
    }

    #[test]
    fn limits() {
        let g = grid("2020-04-01,10,85,26\n2020-05-16,20,85,26\n");
        let err = attach_sst(&[record(10.0, 85.0, "2020-05-16T00:00:00Z", None)], &g).unwrap_err();
        match err {
            Error::UnresolvedSst(list) => assert_eq!(list, ["A@2020-05-16T00:00:00Z"]),
            other => panic!("{other}"),
        }
    }

    #[test]
    fn grid_validation() {
        let bad = parse_sst_grid("date,lat,lon,sst_c\n2020-05-16,10.5,85,28\n2020-05-16,10,85,45\n".as_bytes(), 1.0, "g").unwrap_err();
        match bad {
            Error::Rows { errors, .. } => assert_eq!(errors.len(), 2),
            other => panic!("{other}"),
        }
        assert!(parse_sst_grid("date,lat,lon,sst_c\n2020-05-16,10.5,85,28\n".as_bytes(), 0.5, "g").is_ok());
    }

    proptest::proptest! {
        #[test]
        fn only_sst_changes(lat in 5.0f64..25.0, lon in 75.0f64..95.0) {
            let g = grid("2020-05-16,15,85,28\n");
            let r = record(lat, lon, "2020-05-16T00:00:00Z", None);
            if let Ok(out) = attach_sst(std::slice::from_ref(&r), &g) {
                proptest::prop_assert_eq!(RawRecord { sst: None, ..out[0].clone() }, r);
                proptest::prop_assert_eq!(out[0].sst, Some(28.0));
            }
        }
    }
}
