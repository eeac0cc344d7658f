mod common;

use std::collections::BTreeSet;

use geoctree::grid::{
    build_octree, cell_address, compute_bbox, normalize, CuboidAddress, OctreeBuilder,
};
use geoctree::point_io::{GeoPoint, PointCloud};
use proptest::prelude::*;
use rand::Rng;

use common::{random_cloud, seeded};

fn leaf_set(cloud: &PointCloud, level: u32) -> BTreeSet<CuboidAddress> {
    build_octree(cloud, level)
        .unwrap()
        .occupied_leaves()
        .iter()
        .map(|l| l.address)
        .collect()
}

fn direct_set(cloud: &PointCloud, level: u8) -> BTreeSet<CuboidAddress> {
    let bbox = compute_bbox(cloud).unwrap();
    cloud
        .points
        .iter()
        .map(|p| cell_address(p, &bbox, level).unwrap())
        .collect()
}

#[test]
fn five_thousand_points_match_direct_addressing() {
    let cloud = random_cloud(&mut seeded(42), 5000);
    assert_eq!(leaf_set(&cloud, 4), direct_set(&cloud, 4));
}

#[test]
fn corner_cloud_fills_level_one() {
    let cloud: PointCloud = (0..8)
        .map(|c| GeoPoint::new((c & 1) as f64 * 3.0, ((c >> 1) & 1) as f64, ((c >> 2) & 1) as f64 * 7.0))
        .collect();
    let tree = build_octree(&cloud, 1).unwrap();
    let leaves = tree.occupied_leaves();
    assert_eq!(leaves.len(), 8);
    let mut all: Vec<usize> = leaves.iter().flat_map(|l| l.points.iter().copied()).collect();
    all.sort_unstable();
    assert_eq!(all, (0..8).collect::<Vec<_>>());
}

#[test]
fn midpoint_descends_to_upper_octant() {
    let cloud: PointCloud = vec![
        GeoPoint::new(0.0, 0.0, 0.0),
        GeoPoint::new(2.0, 4.0, 6.0),
        GeoPoint::new(1.0, 2.0, 3.0),
    ]
    .into_iter()
    .collect();
    let tree = build_octree(&cloud, 1).unwrap();
    let mid = &cloud.points[2];
    assert_eq!(tree.descend(mid), Some(CuboidAddress::new(1, 1, 1, 1)));
    assert_eq!(cell_address(mid, tree.bbox(), 1).unwrap(), CuboidAddress::new(1, 1, 1, 1));
}

#[test]
fn normalization_preserves_indices_without_fallback() {
    let mut rng = seeded(9);
    let cloud: PointCloud = (0..3000)
        .map(|_| {
            GeoPoint::new(
                41.1231 + rng.random::<f64>() * 0.0008,
                44.7651 + rng.random::<f64>() * 0.0008,
                812.0 + rng.random::<f64>() * 2.0,
            )
        })
        .collect();
    let normalized = normalize(&cloud).unwrap();
    assert!(!normalized.fallback.any());
    for level in 0..=6u8 {
        let before = compute_bbox(&cloud).unwrap();
        let after = compute_bbox(&normalized.cloud).unwrap();
        for (p, q) in cloud.points.iter().zip(&normalized.cloud.points) {
            assert_eq!(
                cell_address(p, &before, level).unwrap(),
                cell_address(q, &after, level).unwrap()
            );
        }
    }
}

#[test]
fn normalization_fallback_preserves_indices() {
    let cloud = random_cloud(&mut seeded(10), 3000);
    let normalized = normalize(&cloud).unwrap();
    assert!(normalized.fallback.y && normalized.fallback.x);
    let before = compute_bbox(&cloud).unwrap();
    let after = compute_bbox(&normalized.cloud).unwrap();
    for (p, q) in cloud.points.iter().zip(&normalized.cloud.points) {
        assert_eq!(
            cell_address(p, &before, 5).unwrap(),
            cell_address(q, &after, 5).unwrap()
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tree_invariants(seed in any::<u64>(), n in 1usize..600, level in 0u32..=6) {
        let cloud = random_cloud(&mut seeded(seed), n);
        let tree = build_octree(&cloud, level).unwrap();

        // Descent and arithmetic agree point by point.
        for p in &cloud.points {
            prop_assert_eq!(tree.descend(p), Some(cell_address(p, tree.bbox(), level as u8).unwrap()));
        }

        // Leaves partition the index set.
        let mut seen = vec![0u32; n];
        for leaf in tree.occupied_leaves() {
            prop_assert_eq!(leaf.address.level as u32, level);
            for &i in leaf.points {
                seen[i] += 1;
            }
        }
        prop_assert!(seen.iter().all(|&c| c == 1));

        // Occupancy grows monotonically and by at most 8x per level.
        let stats = tree.level_stats();
        prop_assert_eq!(stats.per_level[0], 1);
        for w in stats.per_level.windows(2) {
            prop_assert!(w[1] >= w[0] && w[1] <= 8 * w[0]);
        }
        prop_assert!(stats.occupied_leaves <= n.min(8usize.pow(level)));
        prop_assert_eq!(stats.per_level.iter().sum::<usize>(), stats.total);

        // Every stored node's parent is stored too.
        let nodes: BTreeSet<CuboidAddress> = tree.node_addresses().collect();
        for a in &nodes {
            if let Some(parent) = a.parent() {
                prop_assert!(nodes.contains(&parent));
            }
        }
    }

    #[test]
    fn fixed_bbox_is_honored(seed in any::<u64>(), n in 1usize..200) {
        let cloud = random_cloud(&mut seeded(seed), n);
        let tight = compute_bbox(&cloud).unwrap();
        let wide = geoctree::grid::BoundingBox::from_corners(
            tight.min().map(|v| v - 1.0),
            tight.max().map(|v| v + 1.0),
        );
        let tree = OctreeBuilder::new(3).bbox(wide).build(&cloud).unwrap();
        prop_assert_eq!(*tree.bbox(), wide);
        for p in &cloud.points {
            prop_assert_eq!(tree.descend(p), Some(cell_address(p, &wide, 3).unwrap()));
        }
    }
}
