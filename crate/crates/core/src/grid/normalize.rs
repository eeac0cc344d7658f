use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::point_io::{GeoPoint, PointCloud};

/// Digits at or above the `1 / TRUNCATION_DIVISOR` place are dropped from y and x.
pub const TRUNCATION_DIVISOR: f64 = 1e3;

/// Scale applied to the truncated residue so the 4th decimal becomes the units digit.
pub const NORMALIZE_SCALE: f64 = 1e4;

/// `(v - floor(v * 10^3) / 10^3) * 10^4`.
///
/// For `41.1234567` this keeps `0.0004567` and returns `4.567`. The result
/// lies in `[0, 10)` up to rounding.
pub fn truncation_residue(v: f64) -> f64 {
    (v - truncation_prefix(v)) * NORMALIZE_SCALE
}

fn truncation_prefix(v: f64) -> f64 {
    (v * TRUNCATION_DIVISOR).floor() / TRUNCATION_DIVISOR
}

/// A normalized cloud and which horizontal axes needed the fallback mapping.
#[derive(Debug, Clone, PartialEq)]
pub struct Normalized {
    pub cloud: PointCloud,
    pub fallback: AxisFallback,
    /// Per-axis `(y, x)` offsets: source `v = v' / 10^4 + offset`.
    pub offsets: [f64; 2],
}

impl Normalized {
    /// Map a position in the normalized frame back to source coordinates.
    pub fn restore(&self, p: &GeoPoint) -> GeoPoint {
        GeoPoint {
            y: p.y / NORMALIZE_SCALE + self.offsets[0],
            x: p.x / NORMALIZE_SCALE + self.offsets[1],
            ..*p
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct AxisFallback {
    pub y: bool,
    pub x: bool,
}

impl AxisFallback {
    pub fn any(&self) -> bool {
        self.y || self.x
    }
}

/// Map y and x onto their sub-millimetre residues scaled by `10^4`; z is untouched.
///
/// The residue map is a translation plus scale only while every point on an
/// axis shares the same truncated prefix. When the prefixes differ the
/// residues would wrap around and reorder points, so that axis falls back
/// to `(v - v_min) * 10^4` instead.
pub fn normalize(cloud: &PointCloud) -> Result<Normalized> {
    cloud.require_non_empty()?;
    let shared_prefix = |get: fn(&GeoPoint) -> f64| {
        let first = truncation_prefix(get(&cloud.points[0]));
        cloud
            .points
            .iter()
            .all(|p| truncation_prefix(get(p)) == first)
    };
    let fallback = AxisFallback {
        y: !shared_prefix(|p| p.y),
        x: !shared_prefix(|p| p.x),
    };
    let y_min = cloud.points.iter().map(|p| p.y).fold(f64::INFINITY, f64::min);
    let x_min = cloud.points.iter().map(|p| p.x).fold(f64::INFINITY, f64::min);
    let offset = |wide: bool, min: f64, first: f64| {
        if wide {
            min
        } else {
            truncation_prefix(first)
        }
    };
    let offsets = [
        offset(fallback.y, y_min, cloud.points[0].y),
        offset(fallback.x, x_min, cloud.points[0].x),
    ];
    let map = |v: f64, wide: bool, min: f64| {
        if wide {
            (v - min) * NORMALIZE_SCALE
        } else {
            truncation_residue(v)
        }
    };
    let points = cloud
        .points
        .iter()
        .map(|p| {
            let mut q = *p;
            q.y = map(p.y, fallback.y, y_min);
            q.x = map(p.x, fallback.x, x_min);
            q
        })
        .collect();
    Ok(Normalized {
        cloud: PointCloud::new(points, cloud.axis_order),
        fallback,
        offsets,
    })
}
