//! Column-wise labeling of occupied max-level cuboids.
//!
//! Cells sharing an `(i, j)` footprint form a column scanned bottom-up along
//! `k`. Two occupied cells are "touching" when their `k` indices are
//! consecutive; any larger step leaves at least one empty cell between them.
//!
//! * [`classify_surface`] walks consecutive pairs and marks the lowest
//!   touching run of each column as [`CellClass::Surface`].
//! * [`classify_full`] additionally marks every occupied cell above the first
//!   empty step as [`CellClass::Above`] and fills every empty step from then
//!   on with [`CellClass::Gap`] cells.
//!
//! Both produce the same Surface set; [`agreement_check`] verifies it.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::CuboidAddress;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellClass {
    Surface,
    Above,
    Gap,
}

impl fmt::Display for CellClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CellClass::Surface => "surface",
            CellClass::Above => "above",
            CellClass::Gap => "gap",
        })
    }
}

/// Occupied cells sharing one `(i, j)` footprint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Column {
    pub level: u8,
    pub key: (u32, u32),
    /// Strictly increasing z indices of the occupied cells.
    pub occupied_k: Vec<u32>,
}

impl Column {
    fn address(&self, k: u32) -> CuboidAddress {
        CuboidAddress::new(self.level, self.key.0, self.key.1, k)
    }
}

/// The occupied pair `(below, above)` whose empty step produced a Gap cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GapSource {
    pub below: u32,
    pub above: u32,
}

/// Class per max-level cuboid, ordered by address.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ClassifiedGrid {
    cells: BTreeMap<CuboidAddress, CellClass>,
    gap_sources: BTreeMap<CuboidAddress, GapSource>,
}

impl ClassifiedGrid {
    pub fn get(&self, addr: &CuboidAddress) -> Option<CellClass> {
        self.cells.get(addr).copied()
    }

    /// Cells in address order: columns lexicographically by `(i, j)`, then `k` upward.
    pub fn iter(&self) -> impl Iterator<Item = (&CuboidAddress, CellClass)> + '_ {
        self.cells.iter().map(|(a, c)| (a, *c))
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn count(&self, class: CellClass) -> usize {
        self.cells.values().filter(|&&c| c == class).count()
    }

    pub fn cells_of(&self, class: CellClass) -> impl Iterator<Item = CuboidAddress> + '_ {
        self.cells
            .iter()
            .filter(move |(_, &c)| c == class)
            .map(|(a, _)| *a)
    }

    /// Which occupied pair induced the Gap cell at `addr`.
    pub fn gap_source(&self, addr: &CuboidAddress) -> Option<GapSource> {
        self.gap_sources.get(addr).copied()
    }

    fn mark(&mut self, addr: CuboidAddress, class: CellClass) {
        self.cells.insert(addr, class);
    }
}

/// Group addresses by `(i, j)` and sort each column's `k` ascending.
///
/// Duplicate addresses collapse. All addresses must share one level.
pub fn columnize<'a, I>(leaves: I) -> Result<Vec<Column>>
where
    I: IntoIterator<Item = &'a CuboidAddress>,
{
    let mut level = None;
    let mut groups: BTreeMap<(u32, u32), Vec<u32>> = BTreeMap::new();
    for addr in leaves {
        match level {
            None => level = Some(addr.level),
            Some(l) if l != addr.level => {
                return Err(Error::MixedLevels {
                    first: l,
                    other: addr.level,
                })
            }
            Some(_) => {}
        }
        groups.entry(addr.column()).or_default().push(addr.k);
    }
    let Some(level) = level else {
        return Ok(Vec::new());
    };
    Ok(groups
        .into_iter()
        .map(|(key, mut ks)| {
            ks.sort_unstable();
            ks.dedup();
            Column {
                level,
                key,
                occupied_k: ks,
            }
        })
        .collect())
}

fn touching(below: u32, above: u32) -> bool {
    above == below + 1
}

/// Length of the Surface run at the bottom of a column, by the pair walk:
/// every pair marks its first cell; an empty step stops the walk; a walk
/// that never stops also marks the topmost cell.
fn surface_run_len(ks: &[u32]) -> usize {
    if ks.len() == 1 {
        return 1;
    }
    let mut marked = 0;
    for pair in ks.windows(2) {
        marked += 1;
        if !touching(pair[0], pair[1]) {
            return marked;
        }
    }
    marked + 1
}

/// Surface cells only.
pub fn classify_surface(columns: &[Column]) -> ClassifiedGrid {
    let mut grid = ClassifiedGrid::default();
    for column in columns {
        let run = surface_run_len(&column.occupied_k);
        for &k in &column.occupied_k[..run] {
            grid.mark(column.address(k), CellClass::Surface);
        }
    }
    grid
}

/// Surface, Above and Gap cells.
pub fn classify_full(columns: &[Column]) -> ClassifiedGrid {
    let mut grid = ClassifiedGrid::default();
    for column in columns {
        let ks = &column.occupied_k;
        let mut first_above = ks.len();
        for (n, pair) in ks.windows(2).enumerate() {
            let (below, above) = (pair[0], pair[1]);
            if touching(below, above) {
                continue;
            }
            first_above = first_above.min(n + 1);
            for k in below + 1..above {
                let addr = column.address(k);
                grid.mark(addr, CellClass::Gap);
                grid.gap_sources.insert(addr, GapSource { below, above });
            }
        }
        for (n, &k) in ks.iter().enumerate() {
            let class = if n >= first_above {
                CellClass::Above
            } else {
                CellClass::Surface
            };
            grid.mark(column.address(k), class);
        }
    }
    debug_assert!(grid.gap_sources.iter().all(|(addr, src)| {
        let below = CuboidAddress::new(addr.level, addr.i, addr.j, src.below);
        let above = CuboidAddress::new(addr.level, addr.i, addr.j, src.above);
        !(grid.get(&below) == Some(CellClass::Surface) && grid.get(&above) == Some(CellClass::Surface))
    }));
    grid
}

/// True when both grids mark exactly the same cells as Surface.
pub fn agreement_check(surface_only: &ClassifiedGrid, full: &ClassifiedGrid) -> bool {
    surface_only
        .cells_of(CellClass::Surface)
        .eq(full.cells_of(CellClass::Surface))
}
