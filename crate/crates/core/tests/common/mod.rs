//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use geoctree::point_io::{GeoPoint, PointCloud};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Classes of one column as sorted k-lists, computed by materializing the
/// full boolean column and scanning it from the bottom.
#[derive(Debug, Default, PartialEq, Eq)]
pub struct ColumnClasses {
    pub surface: Vec<u32>,
    pub above: Vec<u32>,
    pub gap: Vec<u32>,
}

pub fn scan_column(occupied: &BTreeSet<u32>, height: u32) -> ColumnClasses {
    let mut col = vec![false; height as usize];
    for &k in occupied {
        col[k as usize] = true;
    }
    let mut out = ColumnClasses::default();
    let Some(bottom) = col.iter().position(|&c| c) else {
        return out;
    };
    let top = col.iter().rposition(|&c| c).unwrap();
    let mut seen_empty = false;
    for (k, &filled) in col.iter().enumerate().take(top + 1).skip(bottom) {
        let kk = k as u32;
        if !filled {
            seen_empty = true;
            out.gap.push(kk);
        } else if seen_empty {
            out.above.push(kk);
        } else {
            out.surface.push(kk);
        }
    }
    out
}

/// Random occupied k-set within `[0, height)`, never empty.
pub fn random_column(rng: &mut ChaCha8Rng, height: u32) -> BTreeSet<u32> {
    let density: f64 = rng.random_range(0.05..0.95);
    let mut set: BTreeSet<u32> = (0..height).filter(|_| rng.random_bool(density)).collect();
    if set.is_empty() {
        set.insert(rng.random_range(0..height));
    }
    set
}

pub fn random_cloud(rng: &mut ChaCha8Rng, n: usize) -> PointCloud {
    let origin = [
        rng.random_range(-1000.0..1000.0),
        rng.random_range(-1000.0..1000.0),
        rng.random_range(0.0..500.0),
    ];
    let extent = [
        rng.random_range(0.01..50.0),
        rng.random_range(0.01..50.0),
        rng.random_range(0.01..30.0),
    ];
    (0..n)
        .map(|_| {
            GeoPoint::new(
                origin[0] + rng.random::<f64>() * extent[0],
                origin[1] + rng.random::<f64>() * extent[1],
                origin[2] + rng.random::<f64>() * extent[2],
            )
        })
        .collect()
}

/// Bucket points by a key function; each bucket holds ascending indices.
pub fn bucket_by<K: Ord>(n: usize, mut key: impl FnMut(usize) -> K) -> BTreeMap<K, Vec<usize>> {
    let mut map: BTreeMap<K, Vec<usize>> = BTreeMap::new();
    for i in 0..n {
        map.entry(key(i)).or_default().push(i);
    }
    map
}

/// Straight mean of the listed points.
pub fn centroid(cloud: &PointCloud, members: &[usize]) -> [f64; 3] {
    let mut s = [0.0; 3];
    for &i in members {
        let p = &cloud.points[i];
        s[0] += p.y;
        s[1] += p.x;
        s[2] += p.z;
    }
    let n = members.len() as f64;
    [s[0] / n, s[1] / n, s[2] / n]
}

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
