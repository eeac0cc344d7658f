//! Synthetic georeferenced clouds with known cuboid occupancy.
//!
//! A fixture is designed in cell space: a set of occupied level-`L` cells is
//! chosen first, then each cell receives a few points placed away from its
//! faces. Two anchor points pin the bounding box to exactly `2^L` cells per
//! edge, so the pipeline recovers the designed cells regardless of
//! normalization. The expected counts are derived from the designed cell set
//! by ancestor enumeration and a bottom-up boolean column scan.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::point_io::{AxisOrder, GeoPoint, PointCloud, Rgb};

/// South-west-bottom corner of every fixture, in UTM-like metres.
pub const ORIGIN: [f64; 3] = [4_612_345.0, 512_345.0, 812.0];

/// Edge lengths of one max-level cell along y, x and z.
pub const CELL: [f64; 3] = [0.25, 0.125, 0.1];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FixtureKind {
    /// Stepped ground, one or two cells thick, no overhangs.
    Terraced,
    /// Terraced ground with a floating two-layer canopy over the centre.
    Canopy,
    /// Terraced ground with sparse isolated cells above it.
    Noise,
    /// A single column occupied at `k = 0, 1, 2, 5, 6, 9`; needs level >= 4.
    Column,
}

impl FromStr for FixtureKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "terraced" => Ok(FixtureKind::Terraced),
            "canopy" => Ok(FixtureKind::Canopy),
            "noise" => Ok(FixtureKind::Noise),
            "column" => Ok(FixtureKind::Column),
            other => Err(format!(
                "unknown fixture `{other}` (expected terraced, canopy, noise or column)"
            )),
        }
    }
}

impl fmt::Display for FixtureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FixtureKind::Terraced => "terraced",
            FixtureKind::Canopy => "canopy",
            FixtureKind::Noise => "noise",
            FixtureKind::Column => "column",
        })
    }
}

/// Occupied heights of the single-column fixture.
pub const COLUMN_HEIGHTS: [u32; 6] = [0, 1, 2, 5, 6, 9];

#[derive(Debug, Clone, Copy)]
pub struct FixtureSpec {
    pub kind: FixtureKind,
    pub level: u8,
    pub seed: u64,
    /// Each designed cell receives between 1 and this many points.
    pub max_points_per_cell: u32,
}

impl FixtureSpec {
    pub fn new(kind: FixtureKind, level: u8) -> Self {
        FixtureSpec {
            kind,
            level,
            seed: 1,
            max_points_per_cell: 3,
        }
    }
}

/// Counts a correct pipeline must report for a fixture.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixtureExpectation {
    pub kind: String,
    pub level: u8,
    pub point_count: usize,
    pub level_counts: Vec<usize>,
    pub total_cuboids: usize,
    pub occupied_leaves: usize,
    pub surface: usize,
    pub above: usize,
    pub gap: usize,
    /// Occupied max-level cells as `[i, j, k]`, sorted.
    pub occupied_cells: Vec<[u32; 3]>,
}

#[derive(Debug, Clone)]
pub struct Fixture {
    pub cloud: PointCloud,
    pub expected: FixtureExpectation,
}

fn terrace_height(i: u32, n: u32) -> u32 {
    let step = (n / 8).max(1);
    ((i * 4 / n) * step).min(n - 1)
}

fn design(kind: FixtureKind, n: u32, rng: &mut ChaCha8Rng) -> BTreeSet<[u32; 3]> {
    let mut cells = BTreeSet::new();
    if kind == FixtureKind::Column {
        for k in COLUMN_HEIGHTS {
            cells.insert([0, 0, k.min(n - 1)]);
        }
        return cells;
    }
    let centre = n as f64 / 2.0;
    for i in 0..n {
        for j in 0..n {
            let ground = terrace_height(i, n);
            let thickness = 1 + (i + j) % 2;
            let top = (ground + thickness - 1).min(n - 1);
            for k in ground..=top {
                cells.insert([i, j, k]);
            }
            match kind {
                FixtureKind::Canopy => {
                    let r = ((i as f64 + 0.5 - centre).powi(2) + (j as f64 + 0.5 - centre).powi(2)).sqrt();
                    if r < n as f64 / 4.0 {
                        let lower = top + 2 + n / 4;
                        let upper = lower + 2 + (i + j) % 2;
                        for k in [lower, lower + 1, upper] {
                            if k < n {
                                cells.insert([i, j, k]);
                            }
                        }
                    }
                }
                FixtureKind::Noise if top + 2 < n && rng.random_bool(0.08) => {
                    cells.insert([i, j, rng.random_range(top + 2..n)]);
                }
                _ => {}
            }
        }
    }
    cells
}

/// Bottom-up scan of a materialized boolean column.
fn scan_column(occupied: &[bool]) -> (usize, usize, usize) {
    let Some(kmin) = occupied.iter().position(|&o| o) else {
        return (0, 0, 0);
    };
    let kmax = occupied.iter().rposition(|&o| o).unwrap();
    let (mut surface, mut above, mut gap) = (0, 0, 0);
    let mut in_surface = true;
    for &cell in &occupied[kmin..=kmax] {
        match (cell, in_surface) {
            (true, true) => surface += 1,
            (true, false) => above += 1,
            (false, _) => {
                in_surface = false;
                gap += 1;
            }
        }
    }
    (surface, above, gap)
}

fn expectation(kind: FixtureKind, level: u8, cells: &BTreeSet<[u32; 3]>, points: usize) -> FixtureExpectation {
    let n = 1usize << level;
    let mut per_level: Vec<BTreeSet<[u32; 3]>> = vec![BTreeSet::new(); level as usize + 1];
    for &c in cells {
        for (l, set) in per_level.iter_mut().enumerate() {
            let shift = level as usize - l;
            set.insert(c.map(|v| v >> shift));
        }
    }
    let mut columns: BTreeMap<(u32, u32), Vec<bool>> = BTreeMap::new();
    for &[i, j, k] in cells {
        columns.entry((i, j)).or_insert_with(|| vec![false; n])[k as usize] = true;
    }
    let (mut surface, mut above, mut gap) = (0, 0, 0);
    for col in columns.values() {
        let (s, a, g) = scan_column(col);
        surface += s;
        above += a;
        gap += g;
    }
    let level_counts: Vec<usize> = per_level.iter().map(BTreeSet::len).collect();
    FixtureExpectation {
        kind: kind.to_string(),
        level,
        point_count: points,
        total_cuboids: level_counts.iter().sum(),
        occupied_leaves: cells.len(),
        level_counts,
        surface,
        above,
        gap,
        occupied_cells: cells.iter().copied().collect(),
    }
}

fn ground_color(rng: &mut ChaCha8Rng) -> Rgb {
    Rgb {
        r: 0.45 + rng.random_range(0.0..0.1),
        g: 0.35 + rng.random_range(0.0..0.1),
        b: 0.2 + rng.random_range(0.0..0.1),
    }
}

fn foliage_color(rng: &mut ChaCha8Rng) -> Rgb {
    Rgb {
        r: 0.1 + rng.random_range(0.0..0.1),
        g: 0.5 + rng.random_range(0.0..0.2),
        b: 0.1 + rng.random_range(0.0..0.1),
    }
}

/// Generate a fixture cloud and the counts a correct pipeline must report.
///
/// # Panics
///
/// If `level > 10`, or for [`FixtureKind::Column`] with `level < 4`.
pub fn generate(spec: &FixtureSpec) -> Fixture {
    assert!(spec.level <= 10, "fixture level {} too deep", spec.level);
    assert!(
        spec.kind != FixtureKind::Column || spec.level >= 4,
        "column fixture needs level >= 4"
    );
    let n = 1u32 << spec.level;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut cells = design(spec.kind, n, &mut rng);

    // Anchors pin the box to exactly n cells per edge.
    let min_corner = GeoPoint::new(ORIGIN[0], ORIGIN[1], ORIGIN[2]);
    let max_corner = GeoPoint::new(
        ORIGIN[0] + f64::from(n) * CELL[0],
        ORIGIN[1] + f64::from(n) * CELL[1],
        ORIGIN[2] + f64::from(n) * CELL[2],
    );
    cells.insert([0, 0, 0]);
    cells.insert([n - 1, n - 1, n - 1]);

    let mut points = vec![min_corner, max_corner];
    for &[i, j, k] in &cells {
        let count = rng.random_range(1..=spec.max_points_per_cell.max(1));
        let is_ground = k <= terrace_height(i, n) + 1;
        for _ in 0..count {
            let at = |idx: u32, axis: usize, rng: &mut ChaCha8Rng| {
                ORIGIN[axis] + (f64::from(idx) + rng.random_range(0.2..0.8)) * CELL[axis]
            };
            let y = at(i, 0, &mut rng);
            let x = at(j, 1, &mut rng);
            let z = at(k, 2, &mut rng);
            let color = if is_ground {
                ground_color(&mut rng)
            } else {
                foliage_color(&mut rng)
            };
            points.push(GeoPoint::new(y, x, z).with_color(color));
        }
    }
    let expected = expectation(spec.kind, spec.level, &cells, points.len());
    Fixture {
        cloud: PointCloud::new(points, AxisOrder::GeoYxz),
        expected,
    }
}

/// A large unstructured cloud: rolling ground over a 3.5 x 6.5 m plot with
/// a share of points scattered up to 3 m above it.
pub fn survey_cloud(points: usize, seed: u64) -> PointCloud {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..points)
        .map(|_| {
            let dy: f64 = rng.random_range(0.0..3.5);
            let dx: f64 = rng.random_range(0.0..6.5);
            let ground = 0.4 * (dy * 1.3).sin() + 0.25 * (dx * 0.9).cos() - 0.6 * (dy > 1.5 && dy < 2.5) as u8 as f64;
            let (z, color) = if rng.random_bool(0.15) {
                (ground + rng.random_range(0.5..3.0), foliage_color(&mut rng))
            } else {
                (ground + rng.random_range(0.0..0.03), ground_color(&mut rng))
            };
            GeoPoint::new(ORIGIN[0] + dy, ORIGIN[1] + dx, ORIGIN[2] + z).with_color(color)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scan_worked_column() {
        let mut col = vec![false; 16];
        for k in COLUMN_HEIGHTS {
            col[k as usize] = true;
        }
        assert_eq!(scan_column(&col), (3, 3, 4));
    }

    #[test]
    fn generation_is_deterministic() {
        let spec = FixtureSpec::new(FixtureKind::Noise, 4);
        let a = generate(&spec);
        let b = generate(&spec);
        assert_eq!(a.cloud, b.cloud);
        assert_eq!(a.expected, b.expected);
    }

    #[test]
    fn terraced_has_no_gaps_below_the_anchor() {
        let f = generate(&FixtureSpec::new(FixtureKind::Terraced, 5));
        // Only the max-corner anchor column rises off the ground.
        assert_eq!(f.expected.above, 1);
        assert_eq!(f.expected.level_counts[0], 1);
        assert_eq!(f.expected.surface + f.expected.above, f.expected.occupied_leaves);
    }

    #[test]
    fn canopy_has_above_and_gaps() {
        let f = generate(&FixtureSpec::new(FixtureKind::Canopy, 5));
        assert!(f.expected.above > 10);
        assert!(f.expected.gap > f.expected.above);
    }

    #[test]
    fn column_fixture_gaps() {
        let f = generate(&FixtureSpec::new(FixtureKind::Column, 4));
        assert_eq!(f.expected.gap, 4);
        assert_eq!(f.expected.occupied_leaves, 7);
    }
}
