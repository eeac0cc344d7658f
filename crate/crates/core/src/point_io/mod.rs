//! Point cloud types plus Wavefront OBJ and ASCII PLY import/export.
//!
//! Positions are stored in geographic order: `y` (northing) first, `x`
//! (easting) second, `z` (elevation) third. [`AxisOrder`] records how a
//! source file listed them so that exports can reproduce the same layout.

mod obj;
mod ply;

use std::fmt;
use std::str::FromStr;

pub use obj::{load_obj, parse_obj, save_obj, write_obj, write_obj_boxes};
pub use ply::{load_ply, parse_ply, save_ply, save_ply_vertices, write_ply, write_ply_vertices};

use crate::classifier::{CellClass, ClassifiedGrid};
use crate::error::{Error, Result};
use crate::grid::BoundingBox;

/// Number of decimals used for every coordinate written to text formats.
pub const DECIMALS: usize = 6;

/// RGB color with channels in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rgb {
    pub r: f64,
    pub g: f64,
    pub b: f64,
}

impl Rgb {
    pub fn new(r: f64, g: f64, b: f64) -> Option<Self> {
        let ok = |c: f64| (0.0..=1.0).contains(&c);
        (ok(r) && ok(g) && ok(b)).then_some(Rgb { r, g, b })
    }

    pub fn from_u8([r, g, b]: [u8; 3]) -> Self {
        Rgb {
            r: f64::from(r) / 255.0,
            g: f64::from(g) / 255.0,
            b: f64::from(b) / 255.0,
        }
    }

    pub fn to_u8(self) -> [u8; 3] {
        let q = |c: f64| (c.clamp(0.0, 1.0) * 255.0).round() as u8;
        [q(self.r), q(self.g), q(self.b)]
    }
}

/// One input vertex.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeoPoint {
    /// Northing, the first axis in geographic order.
    pub y: f64,
    /// Easting.
    pub x: f64,
    /// Elevation.
    pub z: f64,
    pub color: Option<Rgb>,
}

impl GeoPoint {
    pub fn new(y: f64, x: f64, z: f64) -> Self {
        GeoPoint {
            y,
            x,
            z,
            color: None,
        }
    }

    pub fn with_color(mut self, color: Rgb) -> Self {
        self.color = Some(color);
        self
    }

    /// Coordinates as `[y, x, z]`.
    pub fn yxz(&self) -> [f64; 3] {
        [self.y, self.x, self.z]
    }

    pub fn is_finite(&self) -> bool {
        self.y.is_finite() && self.x.is_finite() && self.z.is_finite()
    }
}

/// Order in which a file lists the three coordinates of a vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AxisOrder {
    /// `y x z`, the usual geographic (northing first) layout.
    #[default]
    GeoYxz,
    /// `x y z`.
    Xyz,
}

impl AxisOrder {
    /// Map the three numbers read from a file onto `(y, x, z)`.
    pub fn to_yxz(self, a: f64, b: f64, c: f64) -> [f64; 3] {
        match self {
            AxisOrder::GeoYxz => [a, b, c],
            AxisOrder::Xyz => [b, a, c],
        }
    }

    /// Inverse of [`AxisOrder::to_yxz`].
    pub fn from_yxz(self, p: &GeoPoint) -> [f64; 3] {
        match self {
            AxisOrder::GeoYxz => [p.y, p.x, p.z],
            AxisOrder::Xyz => [p.x, p.y, p.z],
        }
    }
}

impl FromStr for AxisOrder {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "yxz" | "geo" | "geo_yxz" => Ok(AxisOrder::GeoYxz),
            "xyz" => Ok(AxisOrder::Xyz),
            other => Err(format!("unknown axis order `{other}` (expected yxz or xyz)")),
        }
    }
}

impl fmt::Display for AxisOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AxisOrder::GeoYxz => "yxz",
            AxisOrder::Xyz => "xyz",
        })
    }
}

/// An ordered sequence of points; index `n` is the `n`th vertex of the source.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PointCloud {
    pub points: Vec<GeoPoint>,
    pub axis_order: AxisOrder,
}

impl PointCloud {
    pub fn new(points: Vec<GeoPoint>, axis_order: AxisOrder) -> Self {
        PointCloud { points, axis_order }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub(crate) fn require_non_empty(&self) -> Result<()> {
        if self.is_empty() {
            Err(Error::EmptyCloud)
        } else {
            Ok(())
        }
    }
}

impl FromIterator<GeoPoint> for PointCloud {
    fn from_iter<I: IntoIterator<Item = GeoPoint>>(iter: I) -> Self {
        PointCloud::new(iter.into_iter().collect(), AxisOrder::default())
    }
}

/// A position with an 8-bit color, the unit written to PLY files.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ColoredVertex {
    pub y: f64,
    pub x: f64,
    pub z: f64,
    pub color: [u8; 3],
}

/// Color used for points that carry no color of their own.
pub const UNCOLORED: [u8; 3] = [255, 255, 255];

impl From<&GeoPoint> for ColoredVertex {
    fn from(p: &GeoPoint) -> Self {
        ColoredVertex {
            y: p.y,
            x: p.x,
            z: p.z,
            color: p.color.map_or(UNCOLORED, Rgb::to_u8),
        }
    }
}

/// Class to color map for classified exports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClassColors {
    pub surface: [u8; 3],
    pub above: [u8; 3],
    pub gap: [u8; 3],
}

impl Default for ClassColors {
    fn default() -> Self {
        ClassColors {
            surface: [0, 255, 0],
            above: [255, 0, 0],
            gap: [0, 0, 255],
        }
    }
}

impl ClassColors {
    pub fn color(&self, class: CellClass) -> [u8; 3] {
        match class {
            CellClass::Surface => self.surface,
            CellClass::Above => self.above,
            CellClass::Gap => self.gap,
        }
    }
}

fn parse_hex_color(s: &str) -> std::result::Result<[u8; 3], String> {
    let hex = s.trim().trim_start_matches('#');
    if hex.len() != 6 || !hex.is_ascii() {
        return Err(format!("invalid color `{s}` (expected rrggbb hex)"));
    }
    let channel = |i: usize| {
        u8::from_str_radix(&hex[i..i + 2], 16).map_err(|_| format!("invalid color `{s}`"))
    };
    Ok([channel(0)?, channel(2)?, channel(4)?])
}

impl FromStr for ClassColors {
    type Err = String;

    /// Parses `surface,above,gap` as three `rrggbb` hex triples.
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(',').collect();
        if parts.len() != 3 {
            return Err(format!(
                "color map `{s}` must list three colors: surface,above,gap"
            ));
        }
        Ok(ClassColors {
            surface: parse_hex_color(parts[0])?,
            above: parse_hex_color(parts[1])?,
            gap: parse_hex_color(parts[2])?,
        })
    }
}

/// One vertex per classified cell, placed at the cell center and colored by class.
pub fn classified_vertices(
    grid: &ClassifiedGrid,
    bbox: &BoundingBox,
    colors: &ClassColors,
) -> Vec<ColoredVertex> {
    grid.iter()
        .map(|(addr, class)| {
            let [y, x, z] = bbox.cell_center(addr);
            ColoredVertex {
                y,
                x,
                z,
                color: colors.color(class),
            }
        })
        .collect()
}
