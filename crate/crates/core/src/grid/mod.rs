//! Bounding cuboid, integer cell addressing, coordinate normalization and
//! the occupancy octree.
//!
//! A level-`l` slice of the root cuboid has `2^l` cells per edge. Cells are
//! half-open `[lo, hi)` along every axis except that the upper face of the
//! root belongs to the last cell, so every in-box point has exactly one
//! address. Cell boundaries are computed by [`BoundingBox::boundary`] and
//! are shared by tree descent and by direct addressing.

mod normalize;
mod octree;

pub use normalize::{
    normalize, truncation_residue, AxisFallback, Normalized, NORMALIZE_SCALE, TRUNCATION_DIVISOR,
};
pub use octree::{
    build_octree, level_stats, occupied_leaves, LevelStats, OccupancyOctree, OccupiedLeaf,
    OctreeBuilder, DEFAULT_LEVEL_CAP, MAX_SUPPORTED_LEVEL,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::point_io::{GeoPoint, PointCloud};

/// Axis selector in geographic order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Y = 0,
    X = 1,
    Z = 2,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::Y, Axis::X, Axis::Z];
}

/// Per-axis extent of a cloud; the root cuboid of the octree.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub y_min: f64,
    pub y_max: f64,
    pub x_min: f64,
    pub x_max: f64,
    pub z_min: f64,
    pub z_max: f64,
}

impl BoundingBox {
    pub fn from_corners(min: [f64; 3], max: [f64; 3]) -> Self {
        BoundingBox {
            y_min: min[0],
            y_max: max[0],
            x_min: min[1],
            x_max: max[1],
            z_min: min[2],
            z_max: max[2],
        }
    }

    pub fn min(&self) -> [f64; 3] {
        [self.y_min, self.x_min, self.z_min]
    }

    pub fn max(&self) -> [f64; 3] {
        [self.y_max, self.x_max, self.z_max]
    }

    pub fn range(&self, axis: Axis) -> (f64, f64) {
        match axis {
            Axis::Y => (self.y_min, self.y_max),
            Axis::X => (self.x_min, self.x_max),
            Axis::Z => (self.z_min, self.z_max),
        }
    }

    pub fn extent(&self, axis: Axis) -> f64 {
        let (lo, hi) = self.range(axis);
        hi - lo
    }

    pub fn contains(&self, p: &GeoPoint) -> bool {
        Axis::ALL.iter().zip(p.yxz()).all(|(&axis, v)| {
            let (lo, hi) = self.range(axis);
            lo <= v && v <= hi
        })
    }

    /// Lower boundary of cell `idx` along `axis` at `level`.
    ///
    /// `boundary(level, idx) == boundary(level + 1, 2 * idx)` holds exactly,
    /// and the sequence is non-decreasing in `idx`.
    pub fn boundary(&self, axis: Axis, level: u8, idx: u32) -> f64 {
        let (lo, hi) = self.range(axis);
        if idx == 0 {
            return lo;
        }
        let cells = (1u64 << level) as f64;
        if f64::from(idx) >= cells {
            return hi;
        }
        lo + (hi - lo) * (f64::from(idx) / cells)
    }

    /// Closed extent of a cell as `[lower corner, upper corner]`, each `[y, x, z]`.
    pub fn cell_bounds(&self, addr: &CuboidAddress) -> [[f64; 3]; 2] {
        let mut lo = [0.0; 3];
        let mut hi = [0.0; 3];
        for (n, (&axis, idx)) in Axis::ALL.iter().zip(addr.indices()).enumerate() {
            lo[n] = self.boundary(axis, addr.level, idx);
            hi[n] = self.boundary(axis, addr.level, idx + 1);
        }
        [lo, hi]
    }

    pub fn cell_center(&self, addr: &CuboidAddress) -> [f64; 3] {
        let [lo, hi] = self.cell_bounds(addr);
        [
            0.5 * (lo[0] + hi[0]),
            0.5 * (lo[1] + hi[1]),
            0.5 * (lo[2] + hi[2]),
        ]
    }
}

/// Exact per-axis minimum and maximum over the cloud.
pub fn compute_bbox(cloud: &PointCloud) -> Result<BoundingBox> {
    cloud.require_non_empty()?;
    let first = cloud.points[0].yxz();
    let (min, max) = cloud
        .points
        .iter()
        .fold((first, first), |(mut min, mut max), p| {
            for (n, v) in p.yxz().into_iter().enumerate() {
                min[n] = min[n].min(v);
                max[n] = max[n].max(v);
            }
            (min, max)
        });
    Ok(BoundingBox::from_corners(min, max))
}

/// Integer grid address of a cuboid: `level` plus indices along y, x and z.
///
/// The derived ordering is lexicographic on `(level, i, j, k)`, which groups
/// cells of a level by vertical column and sorts each column bottom-up.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CuboidAddress {
    pub level: u8,
    pub i: u32,
    pub j: u32,
    pub k: u32,
}

impl CuboidAddress {
    pub const ROOT: CuboidAddress = CuboidAddress {
        level: 0,
        i: 0,
        j: 0,
        k: 0,
    };

    pub fn new(level: u8, i: u32, j: u32, k: u32) -> Self {
        CuboidAddress { level, i, j, k }
    }

    pub fn indices(&self) -> [u32; 3] {
        [self.i, self.j, self.k]
    }

    /// Cells per edge at this address's level.
    pub fn cells_per_edge(&self) -> u64 {
        1u64 << self.level
    }

    pub fn parent(&self) -> Option<CuboidAddress> {
        (self.level > 0).then(|| CuboidAddress {
            level: self.level - 1,
            i: self.i >> 1,
            j: self.j >> 1,
            k: self.k >> 1,
        })
    }

    pub fn column(&self) -> (u32, u32) {
        (self.i, self.j)
    }
}

/// Address of the level-`level` cell containing `p`, by direct arithmetic.
///
/// `idx = min(floor((v - min) / s), 2^level - 1)` per axis with
/// `s = extent / 2^level`, snapped onto [`BoundingBox::boundary`] so the
/// result agrees exactly with tree descent. Zero-extent axes give index 0.
pub fn cell_address(p: &GeoPoint, bbox: &BoundingBox, level: u8) -> Result<CuboidAddress> {
    if u32::from(level) > MAX_SUPPORTED_LEVEL {
        return Err(Error::LevelOutOfRange {
            level: level.into(),
            cap: MAX_SUPPORTED_LEVEL,
        });
    }
    if !bbox.contains(p) {
        return Err(Error::OutsideBox(format!(
            "point ({}, {}, {})",
            p.y, p.x, p.z
        )));
    }
    let cells = 1u64 << level;
    let mut idx = [0u32; 3];
    for (n, (&axis, v)) in Axis::ALL.iter().zip(p.yxz()).enumerate() {
        let (lo, hi) = bbox.range(axis);
        let extent = hi - lo;
        if extent <= 0.0 {
            continue;
        }
        let step = extent / cells as f64;
        let raw = ((v - lo) / step).floor();
        let mut i = raw.clamp(0.0, (cells - 1) as f64) as u32;
        while i > 0 && v < bbox.boundary(axis, level, i) {
            i -= 1;
        }
        while u64::from(i) + 1 < cells && v >= bbox.boundary(axis, level, i + 1) {
            i += 1;
        }
        idx[n] = i;
    }
    Ok(CuboidAddress::new(level, idx[0], idx[1], idx[2]))
}
