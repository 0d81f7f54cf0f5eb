use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geo::{haversine_km, initial_bearing_deg, GeoPoint};
use crate::track::{Observation, TrackPoint};
use crate::STEP_HOURS;

/// Converts a complete 3-hourly series into track points carrying the distance
/// and bearing from the previous point. The first point gets (0, 0).
pub fn derive_motion(series: &[Observation]) -> Result<Vec<TrackPoint>> {
    let Some(first) = series.first() else {
        return Ok(Vec::new());
    };
    let mut out = Vec::with_capacity(series.len());
    let mut prev: Option<GeoPoint> = None;
    for (i, o) in series.iter().enumerate() {
        let t = o.hour - first.hour;
        if t != i as i64 * STEP_HOURS {
            return Err(Error::invalid(alloc::format!(
                "series is not complete: point {i} at +{t}h"
            )));
        }
        let here = GeoPoint::new(o.latitude, o.longitude)?;
        let (distance, direction) = match prev {
            Some(p) => (haversine_km(p, here), initial_bearing_deg(p, here)),
            None => (0.0, 0.0),
        };
        prev = Some(here);
        out.push(TrackPoint {
            t,
            msws: o.msws,
            ecp: o.ecp,
            sst: o.sst,
            distance,
            direction,
            latitude: o.latitude,
            longitude: o.longitude,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn at(hour: i64, lat: f64, lon: f64) -> Observation {
        Observation {
            hour,
            latitude: lat,
            longitude: lon,
            msws: 30.0,
            ecp: 995.0,
            sst: 28.0,
            landfall: false,
        }
    }

    #[test]
    fn stationary_track_has_zero_motion() {
        let pts = derive_motion(&[at(0, 12.0, 85.0), at(3, 12.0, 85.0)]).unwrap();
        assert_eq!((pts[0].distance, pts[0].direction), (0.0, 0.0));
        assert_eq!((pts[1].distance, pts[1].direction), (0.0, 0.0));
    }

    #[test]
    fn one_degree_east_on_the_equator() {
        let pts = derive_motion(&[at(0, 0.0, 0.0), at(3, 0.0, 1.0)]).unwrap();
        assert!((pts[1].distance - 111.19).abs() < 0.01, "{}", pts[1].distance);
        assert_eq!(pts[1].direction, 90.0);
    }

    #[test]
    fn only_later_points_get_motion() {
        let pts = derive_motion(&[at(0, 10.0, 85.0), at(3, 10.5, 85.2), at(6, 11.0, 85.1)]).unwrap();
        assert_eq!((pts[0].distance, pts[0].direction), (0.0, 0.0));
        assert!(pts[1].distance > 0.0 && pts[2].distance > 0.0);
        assert!(pts[2].direction > 270.0);
        assert_eq!(pts.iter().map(|p| p.t).collect::<Vec<_>>(), vec![0, 3, 6]);
    }

    #[test]
    fn gaps_are_rejected() {
        assert!(derive_motion(&[at(0, 10.0, 85.0), at(6, 10.0, 85.0)]).is_err());
    }

    proptest! {
        #[test]
        fn distances_are_invariant_under_longitude_shift(
            lats in proptest::collection::vec(-60.0f64..60.0, 2..6),
            lons in proptest::collection::vec(-100.0f64..100.0, 6),
            shift in -79.0f64..79.0,
        ) {
            let a: Vec<_> = lats.iter().enumerate().map(|(i, &la)| at(3 * i as i64, la, lons[i])).collect();
            let b: Vec<_> = lats.iter().enumerate().map(|(i, &la)| at(3 * i as i64, la, lons[i] + shift)).collect();
            let pa = derive_motion(&a).unwrap();
            let pb = derive_motion(&b).unwrap();
            for (x, y) in pa.iter().zip(&pb) {
                prop_assert!((x.distance - y.distance).abs() < 1e-6);
            }
        }
    }
}
