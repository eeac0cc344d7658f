//! Run statistics: cuboid counts per level, class tallies, reduction ratio
//! and per-stage timings.
//!
//! Two renderings are provided. The text form is meant for people and reads
//! like "N cuboids on levels 0-L, M occupied at level L"; the structured form
//! is JSON with stable key names. Both parse back into an equal
//! [`RunReport`].

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::classifier::{CellClass, ClassifiedGrid};
use crate::error::{Error, Result};
use crate::grid::LevelStats;
use crate::reducer::MergedPoint;

/// Wall-clock seconds spent in each pipeline stage.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTimings {
    pub parse: f64,
    pub normalize: f64,
    pub build: f64,
    pub classify: f64,
    pub reduce: f64,
    pub export: f64,
}

impl StageTimings {
    const NAMES: [&'static str; 6] = ["parse", "normalize", "build", "classify", "reduce", "export"];

    fn values(&self) -> [f64; 6] {
        [
            self.parse,
            self.normalize,
            self.build,
            self.classify,
            self.reduce,
            self.export,
        ]
    }

    fn slot(&mut self, name: &str) -> Option<&mut f64> {
        Some(match name {
            "parse" => &mut self.parse,
            "normalize" => &mut self.normalize,
            "build" => &mut self.build,
            "classify" => &mut self.classify,
            "reduce" => &mut self.reduce,
            "export" => &mut self.export,
            _ => return None,
        })
    }

    pub fn total(&self) -> f64 {
        self.values().iter().sum()
    }
}

/// Converts a measured duration into report seconds.
pub fn seconds(d: Duration) -> f64 {
    d.as_secs_f64()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub input_points: usize,
    pub level: u8,
    /// Occupied cuboids per level, index = level.
    pub level_counts: Vec<usize>,
    pub total_cuboids: usize,
    pub occupied_leaves: usize,
    pub surface: usize,
    pub above: usize,
    pub gap: usize,
    pub merged_points: Option<usize>,
    pub reduction_ratio: Option<f64>,
    pub normalization_fallback: bool,
    pub timings: StageTimings,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReportFormat {
    #[default]
    Text,
    Structured,
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "text" => Ok(ReportFormat::Text),
            "structured" | "json" => Ok(ReportFormat::Structured),
            other => Err(format!("unknown report format `{other}` (expected text or structured)")),
        }
    }
}

/// Assemble a report from one pipeline run, checking that the pieces agree.
pub fn build_report(
    input_points: usize,
    stats: &LevelStats,
    grid: &ClassifiedGrid,
    merged: Option<&[MergedPoint]>,
    timings: StageTimings,
    normalization_fallback: bool,
) -> Result<RunReport> {
    let integrity = |msg: String| Err(Error::Integrity(msg));
    if stats.per_level.first() != Some(&1) {
        return integrity(format!("level 0 holds {:?} cuboids", stats.per_level.first()));
    }
    if stats.per_level.iter().sum::<usize>() != stats.total {
        return integrity("per-level counts do not sum to the total".into());
    }
    if stats.per_level.last() != Some(&stats.occupied_leaves) {
        return integrity("occupied leaf count differs from the last level".into());
    }
    let surface = grid.count(CellClass::Surface);
    let above = grid.count(CellClass::Above);
    let gap = grid.count(CellClass::Gap);
    if surface + above != stats.occupied_leaves {
        return integrity(format!(
            "surface {surface} + above {above} != occupied leaves {}",
            stats.occupied_leaves
        ));
    }
    if stats.occupied_leaves > input_points {
        return integrity("more occupied leaves than points".into());
    }
    let (merged_points, reduction_ratio) = match merged {
        Some(m) => {
            if m.len() != stats.occupied_leaves {
                return integrity(format!(
                    "{} merged points for {} occupied leaves",
                    m.len(),
                    stats.occupied_leaves
                ));
            }
            let members: usize = m.iter().map(|p| p.multiplicity).sum();
            if members != input_points {
                return integrity(format!(
                    "merged multiplicities sum to {members}, expected {input_points}"
                ));
            }
            (Some(m.len()), Some(m.len() as f64 / input_points as f64))
        }
        None => (None, None),
    };
    Ok(RunReport {
        input_points,
        level: (stats.per_level.len() - 1) as u8,
        level_counts: stats.per_level.clone(),
        total_cuboids: stats.total,
        occupied_leaves: stats.occupied_leaves,
        surface,
        above,
        gap,
        merged_points,
        reduction_ratio,
        normalization_fallback,
        timings,
    })
}

const NOT_AVAILABLE: &str = "n/a";

pub fn render_report(report: &RunReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Text => render_text(report),
        ReportFormat::Structured => {
            let mut s = serde_json::to_string_pretty(report).expect("report serializes");
            s.push('\n');
            s
        }
    }
}

fn render_text(r: &RunReport) -> String {
    let mut out = String::new();
    let mut line = |key: &str, value: String| {
        let _ = writeln!(out, "{key}: {value}");
    };
    line("input points", r.input_points.to_string());
    line("level", r.level.to_string());
    for (l, count) in r.level_counts.iter().enumerate() {
        line(&format!("cuboids at level {l}"), count.to_string());
    }
    line(&format!("cuboids on levels 0-{}", r.level), r.total_cuboids.to_string());
    line(
        &format!("occupied cuboids at level {}", r.level),
        r.occupied_leaves.to_string(),
    );
    line("surface", r.surface.to_string());
    line("above", r.above.to_string());
    line("gap", r.gap.to_string());
    line(
        "merged points",
        r.merged_points
            .map_or_else(|| NOT_AVAILABLE.to_string(), |m| m.to_string()),
    );
    line(
        "reduction ratio",
        r.reduction_ratio
            .map_or_else(|| NOT_AVAILABLE.to_string(), |v| v.to_string()),
    );
    line("normalization fallback", r.normalization_fallback.to_string());
    for (name, secs) in StageTimings::NAMES.iter().zip(r.timings.values()) {
        line(&format!("time {name} [s]"), secs.to_string());
    }
    out
}

impl RunReport {
    pub fn from_structured(text: &str) -> Result<RunReport> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            message: e.to_string(),
        })
    }

    /// Parse the output of [`render_report`] with [`ReportFormat::Text`].
    pub fn from_text(text: &str) -> Result<RunReport> {
        let mut fields: BTreeMap<String, (usize, String)> = BTreeMap::new();
        let mut level_counts: Vec<(usize, usize)> = Vec::new();
        let mut timings = StageTimings::default();
        let mut total = None;
        let mut occupied = None;
        for (n, raw) in text.lines().enumerate() {
            let line_no = n + 1;
            if raw.trim().is_empty() {
                continue;
            }
            let (key, value) = raw.split_once(": ").ok_or_else(|| Error::Parse {
                line: line_no,
                message: "expected `key: value`".into(),
            })?;
            let num = |v: &str| {
                v.parse::<usize>().map_err(|_| Error::Parse {
                    line: line_no,
                    message: format!("`{v}` is not a count"),
                })
            };
            if let Some(l) = key.strip_prefix("cuboids at level ") {
                level_counts.push((num(l)?, num(value)?));
            } else if key.starts_with("cuboids on levels ") {
                total = Some(num(value)?);
            } else if key.starts_with("occupied cuboids at level ") {
                occupied = Some(num(value)?);
            } else if let Some(stage) = key
                .strip_prefix("time ")
                .and_then(|k| k.strip_suffix(" [s]"))
            {
                let slot = timings.slot(stage).ok_or_else(|| Error::Parse {
                    line: line_no,
                    message: format!("unknown stage `{stage}`"),
                })?;
                *slot = value.parse().map_err(|_| Error::Parse {
                    line: line_no,
                    message: format!("`{value}` is not a duration"),
                })?;
            } else {
                fields.insert(key.to_string(), (line_no, value.to_string()));
            }
        }

        let get = |key: &str| {
            fields.get(key).ok_or_else(|| Error::Parse {
                line: 0,
                message: format!("missing `{key}`"),
            })
        };
        fn parse_as<T: FromStr>(key: &str, (line, v): &(usize, String)) -> Result<T> {
            v.parse().map_err(|_| Error::Parse {
                line: *line,
                message: format!("invalid value `{v}` for `{key}`"),
            })
        }
        fn optional<T: FromStr>(key: &str, entry: &(usize, String)) -> Result<Option<T>> {
            if entry.1 == NOT_AVAILABLE {
                Ok(None)
            } else {
                parse_as(key, entry).map(Some)
            }
        }

        level_counts.sort_unstable();
        if level_counts.iter().enumerate().any(|(n, (l, _))| n != *l) {
            return Err(Error::Parse {
                line: 0,
                message: "per-level counts are not contiguous from level 0".into(),
            });
        }
        let missing = |what: &str| Error::Parse {
            line: 0,
            message: format!("missing {what}"),
        };
        Ok(RunReport {
            input_points: parse_as("input points", get("input points")?)?,
            level: parse_as("level", get("level")?)?,
            level_counts: level_counts.into_iter().map(|(_, c)| c).collect(),
            total_cuboids: total.ok_or_else(|| missing("total cuboid count"))?,
            occupied_leaves: occupied.ok_or_else(|| missing("occupied cuboid count"))?,
            surface: parse_as("surface", get("surface")?)?,
            above: parse_as("above", get("above")?)?,
            gap: parse_as("gap", get("gap")?)?,
            merged_points: optional("merged points", get("merged points")?)?,
            reduction_ratio: optional("reduction ratio", get("reduction ratio")?)?,
            normalization_fallback: parse_as(
                "normalization fallback",
                get("normalization fallback")?,
            )?,
            timings,
        })
    }
}
