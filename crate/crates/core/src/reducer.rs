//! Size reduction: every occupied max-level cuboid collapses to one point.

use crate::error::{Error, Result};
use crate::grid::{CuboidAddress, OccupancyOctree};
use crate::point_io::{AxisOrder, GeoPoint, PointCloud, Rgb};

/// Representative of the points sharing one occupied cuboid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MergedPoint {
    /// Unweighted centroid of the member positions.
    pub position: GeoPoint,
    /// Number of source points merged.
    pub multiplicity: usize,
    pub cell: CuboidAddress,
}

/// One [`MergedPoint`] per occupied leaf, in address order.
///
/// Member positions are accumulated in ascending index order. The color is
/// the mean over members that carry one, absent if none do. The centroid is
/// clamped to the members' per-axis range so rounding never moves it out of
/// its cuboid.
pub fn reduce(cloud: &PointCloud, tree: &OccupancyOctree) -> Result<Vec<MergedPoint>> {
    if tree.point_count() != cloud.len() {
        return Err(Error::TreeMismatch(format!(
            "tree holds {} points, cloud has {}",
            tree.point_count(),
            cloud.len()
        )));
    }
    tree.occupied_leaves()
        .into_iter()
        .map(|leaf| {
            let mut sum = [0.0f64; 3];
            let mut lo = [f64::INFINITY; 3];
            let mut hi = [f64::NEG_INFINITY; 3];
            let mut rgb = [0.0f64; 3];
            let mut colored = 0usize;
            for &idx in leaf.points {
                let p = cloud.points.get(idx).ok_or_else(|| {
                    Error::TreeMismatch(format!("point index {idx} out of range"))
                })?;
                for (n, v) in p.yxz().into_iter().enumerate() {
                    sum[n] += v;
                    lo[n] = lo[n].min(v);
                    hi[n] = hi[n].max(v);
                }
                if let Some(c) = p.color {
                    rgb[0] += c.r;
                    rgb[1] += c.g;
                    rgb[2] += c.b;
                    colored += 1;
                }
            }
            let count = leaf.points.len();
            let mean = |n: usize| (sum[n] / count as f64).clamp(lo[n], hi[n]);
            let color = (colored > 0).then(|| {
                let m = |s: f64| (s / colored as f64).clamp(0.0, 1.0);
                Rgb {
                    r: m(rgb[0]),
                    g: m(rgb[1]),
                    b: m(rgb[2]),
                }
            });
            Ok(MergedPoint {
                position: GeoPoint {
                    y: mean(0),
                    x: mean(1),
                    z: mean(2),
                    color,
                },
                multiplicity: count,
                cell: leaf.address,
            })
        })
        .collect()
}

/// `|merged| / |cloud|`.
pub fn reduction_ratio(cloud: &PointCloud, merged: &[MergedPoint]) -> Result<f64> {
    cloud.require_non_empty()?;
    Ok(merged.len() as f64 / cloud.len() as f64)
}

/// The merged representatives as a cloud, keeping the source axis order.
pub fn merged_cloud(merged: &[MergedPoint], axis_order: AxisOrder) -> PointCloud {
    PointCloud::new(merged.iter().map(|m| m.position).collect(), axis_order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_octree, OctreeBuilder};

    #[test]
    fn duplicates_merge_into_one() {
        let p = GeoPoint::new(1.5, -2.25, 812.0);
        let cloud: PointCloud = std::iter::repeat_n(p, 7).collect();
        let tree = build_octree(&cloud, 5).unwrap();
        let merged = reduce(&cloud, &tree).unwrap();
        assert_eq!(merged.len(), 1);
        assert_eq!(merged[0].multiplicity, 7);
        assert_eq!(merged[0].position, p);
        assert!((reduction_ratio(&cloud, &merged).unwrap() - 1.0 / 7.0).abs() < 1e-15);
    }

    #[test]
    fn singleton_cells_are_identity() {
        let cloud: PointCloud = (0..8)
            .map(|c| GeoPoint::new((c & 1) as f64, ((c >> 1) & 1) as f64, ((c >> 2) & 1) as f64))
            .collect();
        let tree = build_octree(&cloud, 1).unwrap();
        let merged = reduce(&cloud, &tree).unwrap();
        assert_eq!(merged.len(), 8);
        for m in &merged {
            assert_eq!(m.multiplicity, 1);
            assert!(cloud.points.contains(&m.position));
        }
        assert_eq!(reduction_ratio(&cloud, &merged).unwrap(), 1.0);
    }

    #[test]
    fn color_mean_skips_uncolored_members() {
        let cloud: PointCloud = vec![
            GeoPoint::new(0.0, 0.0, 0.0).with_color(Rgb::new(1.0, 0.0, 0.0).unwrap()),
            GeoPoint::new(0.1, 0.1, 0.1),
            GeoPoint::new(0.2, 0.2, 0.2).with_color(Rgb::new(0.0, 0.0, 1.0).unwrap()),
        ]
        .into_iter()
        .collect();
        let merged = reduce(&cloud, &build_octree(&cloud, 0).unwrap()).unwrap();
        assert_eq!(merged[0].position.color, Rgb::new(0.5, 0.0, 0.5));
        assert!((merged[0].position.y - 0.1).abs() < 1e-12);

        let plain: PointCloud = vec![GeoPoint::new(0.0, 0.0, 0.0)].into_iter().collect();
        let merged = reduce(&plain, &build_octree(&plain, 0).unwrap()).unwrap();
        assert_eq!(merged[0].position.color, None);
    }

    #[test]
    fn mismatched_tree_is_rejected() {
        let a: PointCloud = vec![GeoPoint::new(0.0, 0.0, 0.0), GeoPoint::new(1.0, 1.0, 1.0)]
            .into_iter()
            .collect();
        let b: PointCloud = vec![GeoPoint::new(0.0, 0.0, 0.0)].into_iter().collect();
        let tree = OctreeBuilder::new(1).build(&a).unwrap();
        assert!(matches!(reduce(&b, &tree), Err(Error::TreeMismatch(_))));
    }

    #[test]
    fn ratio_of_empty_cloud_fails() {
        assert!(matches!(
            reduction_ratio(&PointCloud::default(), &[]),
            Err(Error::EmptyCloud)
        ));
    }
}
