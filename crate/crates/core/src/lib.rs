//! Occupancy octree toolkit for georeferenced point clouds.
//!
//! The pipeline reads vertices ([`point_io`]), optionally normalizes the
//! horizontal coordinates and builds an occupancy octree ([`grid`]),
//! labels the occupied max-level cuboids column by column ([`classifier`]),
//! merges the points of each cuboid into one ([`reducer`]) and summarizes a
//! run ([`report`]). [`cli`] wires these together behind the `geoctree`
//! binary, and [`synth`] generates synthetic fixtures with known answers.

pub mod classifier;
pub mod cli;
pub mod error;
pub mod grid;
pub mod point_io;
pub mod reducer;
pub mod report;
pub mod synth;

pub use error::{Error, Result};
