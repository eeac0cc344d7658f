use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::{compute_bbox, Axis, BoundingBox, CuboidAddress};
use crate::error::{Error, Result};
use crate::point_io::{GeoPoint, PointCloud};

/// Default upper bound on the subdivision depth.
pub const DEFAULT_LEVEL_CAP: u32 = 10;

/// Hard limit imposed by 32-bit cell indices.
pub const MAX_SUPPORTED_LEVEL: u32 = 30;

type NodeId = u32;

#[derive(Debug, Clone)]
enum NodeContent {
    Branch([Option<NodeId>; 8]),
    /// Range into the tree's permuted point index array.
    Leaf(Range<usize>),
}

#[derive(Debug, Clone)]
struct Node {
    address: CuboidAddress,
    content: NodeContent,
}

/// Occupancy octree over a point cloud.
///
/// Only occupied cuboids are materialized; every stored node holds at least
/// one point. Nodes at `max_level` are leaves carrying the indices of their
/// points in ascending order.
#[derive(Debug, Clone)]
pub struct OccupancyOctree {
    bbox: BoundingBox,
    max_level: u8,
    nodes: Vec<Node>,
    order: Vec<usize>,
}

/// An occupied max-level cuboid and the indices of the points inside it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OccupiedLeaf<'a> {
    pub address: CuboidAddress,
    pub points: &'a [usize],
}

/// Occupied cuboid counts per level.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelStats {
    /// `per_level[l]` is the number of occupied cuboids at level `l`.
    pub per_level: Vec<usize>,
    pub occupied_leaves: usize,
    pub total: usize,
}

/// Configures and runs octree construction.
#[derive(Debug, Clone, Copy)]
pub struct OctreeBuilder {
    level: u32,
    level_cap: u32,
    bbox: Option<BoundingBox>,
}

impl OctreeBuilder {
    pub fn new(level: u32) -> Self {
        OctreeBuilder {
            level,
            level_cap: DEFAULT_LEVEL_CAP,
            bbox: None,
        }
    }

    /// Raise or lower the depth guard (never above [`MAX_SUPPORTED_LEVEL`]).
    pub fn level_cap(mut self, cap: u32) -> Self {
        self.level_cap = cap.min(MAX_SUPPORTED_LEVEL);
        self
    }

    /// Use a fixed root cuboid instead of the cloud's own bounding box.
    pub fn bbox(mut self, bbox: BoundingBox) -> Self {
        self.bbox = Some(bbox);
        self
    }

    pub fn build(&self, cloud: &PointCloud) -> Result<OccupancyOctree> {
        if self.level > self.level_cap {
            return Err(Error::LevelOutOfRange {
                level: self.level,
                cap: self.level_cap,
            });
        }
        let bbox = match self.bbox {
            Some(b) => b,
            None => compute_bbox(cloud)?,
        };
        cloud.require_non_empty()?;
        if let Some(n) = cloud.points.iter().position(|p| !bbox.contains(p)) {
            return Err(Error::OutsideBox(format!("point {n}")));
        }
        Ok(subdivide(&cloud.points, bbox, self.level as u8))
    }
}

/// Build the tree over the cloud's bounding box down to `level` (at most 10).
pub fn build_octree(cloud: &PointCloud, level: u32) -> Result<OccupancyOctree> {
    OctreeBuilder::new(level).build(cloud)
}

/// Planes halving the cuboid at `addr` along y, x and z.
fn split_planes(bbox: &BoundingBox, addr: &CuboidAddress) -> [f64; 3] {
    let child_level = addr.level + 1;
    [
        bbox.boundary(Axis::Y, child_level, 2 * addr.i + 1),
        bbox.boundary(Axis::X, child_level, 2 * addr.j + 1),
        bbox.boundary(Axis::Z, child_level, 2 * addr.k + 1),
    ]
}

fn subdivide(points: &[GeoPoint], bbox: BoundingBox, max_level: u8) -> OccupancyOctree {
    let n = points.len();
    let mut order: Vec<usize> = (0..n).collect();
    let mut scratch = vec![0usize; n];
    let mut octant_of = vec![0u8; n];
    let flat: [bool; 3] = Axis::ALL.map(|a| bbox.extent(a) <= 0.0);

    let mut nodes = vec![Node {
        address: CuboidAddress::ROOT,
        content: NodeContent::Leaf(0..n),
    }];
    let mut pending: Vec<(NodeId, Range<usize>)> = vec![(0, 0..n)];

    while let Some((id, range)) = pending.pop() {
        let addr = nodes[id as usize].address;
        if addr.level == max_level {
            nodes[id as usize].content = NodeContent::Leaf(range);
            continue;
        }
        let child_level = addr.level + 1;
        let split = split_planes(&bbox, &addr);

        // Stable counting sort of the node's points into its 8 octants.
        let mut counts = [0usize; 8];
        for pos in range.clone() {
            let v = points[order[pos]].yxz();
            let mut octant = 0u8;
            for axis in 0..3 {
                if !flat[axis] && v[axis] >= split[axis] {
                    octant |= 4 >> axis;
                }
            }
            octant_of[pos] = octant;
            counts[octant as usize] += 1;
        }
        let mut starts = [0usize; 8];
        let mut acc = range.start;
        for (o, c) in counts.iter().enumerate() {
            starts[o] = acc;
            acc += c;
        }
        let mut cursor = starts;
        for pos in range.clone() {
            let o = octant_of[pos] as usize;
            scratch[cursor[o]] = order[pos];
            cursor[o] += 1;
        }
        order[range.clone()].copy_from_slice(&scratch[range.clone()]);

        let mut children = [None; 8];
        for o in (0..8).rev() {
            if counts[o] == 0 {
                continue;
            }
            let child = CuboidAddress {
                level: child_level,
                i: 2 * addr.i + ((o >> 2) & 1) as u32,
                j: 2 * addr.j + ((o >> 1) & 1) as u32,
                k: 2 * addr.k + (o & 1) as u32,
            };
            let child_id = nodes.len() as NodeId;
            nodes.push(Node {
                address: child,
                content: NodeContent::Leaf(starts[o]..starts[o] + counts[o]),
            });
            children[o] = Some(child_id);
            pending.push((child_id, starts[o]..starts[o] + counts[o]));
        }
        nodes[id as usize].content = NodeContent::Branch(children);
    }

    OccupancyOctree {
        bbox,
        max_level,
        nodes,
        order,
    }
}

impl OccupancyOctree {
    pub fn bbox(&self) -> &BoundingBox {
        &self.bbox
    }

    pub fn max_level(&self) -> u8 {
        self.max_level
    }

    /// Number of points the tree was built from.
    pub fn point_count(&self) -> usize {
        self.order.len()
    }

    /// Addresses of every stored (occupied) node, in construction order.
    pub fn node_addresses(&self) -> impl Iterator<Item = CuboidAddress> + '_ {
        self.nodes.iter().map(|n| n.address)
    }

    /// Occupied max-level cuboids sorted by address.
    pub fn occupied_leaves(&self) -> Vec<OccupiedLeaf<'_>> {
        let mut leaves: Vec<OccupiedLeaf<'_>> = self
            .nodes
            .iter()
            .filter_map(|node| match &node.content {
                NodeContent::Leaf(range) if node.address.level == self.max_level => {
                    Some(OccupiedLeaf {
                        address: node.address,
                        points: &self.order[range.clone()],
                    })
                }
                _ => None,
            })
            .collect();
        leaves.sort_unstable_by_key(|l| l.address);
        leaves
    }

    /// Descend from the root toward `p`, choosing a child by comparing
    /// against each node's split planes. Returns the max-level address
    /// reached, or `None` if the path enters an unoccupied octant.
    pub fn descend(&self, p: &GeoPoint) -> Option<CuboidAddress> {
        if !self.bbox.contains(p) {
            return None;
        }
        let flat: [bool; 3] = Axis::ALL.map(|a| self.bbox.extent(a) <= 0.0);
        let v = p.yxz();
        let mut id = 0usize;
        loop {
            let node = &self.nodes[id];
            match &node.content {
                NodeContent::Leaf(_) => return Some(node.address),
                NodeContent::Branch(children) => {
                    let split = self.split_planes(&node.address);
                    let mut octant = 0usize;
                    for axis in 0..3 {
                        if !flat[axis] && v[axis] >= split[axis] {
                            octant |= 4 >> axis;
                        }
                    }
                    id = children[octant]? as usize;
                }
            }
        }
    }

    fn split_planes(&self, addr: &CuboidAddress) -> [f64; 3] {
        split_planes(&self.bbox, addr)
    }

    pub fn level_stats(&self) -> LevelStats {
        let mut per_level = vec![0usize; self.max_level as usize + 1];
        for node in &self.nodes {
            per_level[node.address.level as usize] += 1;
        }
        LevelStats {
            occupied_leaves: per_level[self.max_level as usize],
            total: per_level.iter().sum(),
            per_level,
        }
    }
}

pub fn occupied_leaves(tree: &OccupancyOctree) -> Vec<OccupiedLeaf<'_>> {
    tree.occupied_leaves()
}

pub fn level_stats(tree: &OccupancyOctree) -> LevelStats {
    tree.level_stats()
}
