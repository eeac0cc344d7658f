//! Command-line front end: ingest, normalize, subdivide, classify, reduce,
//! export and report.
//!
//! Exit codes: 0 success, 2 usage or configuration, 3 parse, 4 I/O,
//! 5 integrity.
//!
//! Exported coordinates are always in the source frame and axis order;
//! normalization only affects how cuboids are computed.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::classifier::{classify_full, columnize, ClassifiedGrid};
use crate::error::{Error, Result};
use crate::grid::{normalize, BoundingBox, CuboidAddress, LevelStats, Normalized, OctreeBuilder};
use crate::point_io::{
    self, classified_vertices, AxisOrder, ClassColors, ColoredVertex, GeoPoint, PointCloud,
};
use crate::reducer::{merged_cloud, reduce, MergedPoint};
use crate::report::{build_report, render_report, seconds, ReportFormat, RunReport, StageTimings};
use crate::synth::{self, FixtureKind, FixtureSpec};

#[derive(Debug, Parser)]
#[command(name = "geoctree", version, about = "Occupancy octree analysis of point clouds")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run through classification and print the report.
    Stats(RunConfig),
    /// Export every classified cell as a class-colored vertex.
    Classify(RunConfig),
    /// Merge the points of each occupied cell and export the result.
    Reduce(RunConfig),
    /// Export occupied cells as center points or, with --boxes, as OBJ boxes.
    Voxelize(RunConfig),
    /// Write a synthetic fixture cloud and its expected counts.
    Generate(GenerateConfig),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Ply,
    Obj,
}

impl FromStr for ExportFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "ply" => Ok(ExportFormat::Ply),
            "obj" => Ok(ExportFormat::Obj),
            other => Err(format!("unknown format `{other}` (expected ply or obj)")),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct RunConfig {
    /// Wavefront OBJ file to read.
    #[arg(long)]
    pub input: PathBuf,
    /// Export file (required by classify, reduce and voxelize).
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Maximal subdivision depth.
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u8).range(0..=10))]
    pub level: u8,
    /// Coordinate order of the input vertices.
    #[arg(long, default_value = "yxz")]
    pub axis_order: AxisOrder,
    /// Skip horizontal coordinate normalization.
    #[arg(long)]
    pub no_normalize: bool,
    /// Export format; inferred from the output extension when omitted.
    #[arg(long)]
    pub format: Option<ExportFormat>,
    /// Voxelize: write each cell as an 8-corner box (OBJ only).
    #[arg(long)]
    pub boxes: bool,
    /// Report rendering.
    #[arg(long, default_value = "text")]
    pub report: ReportFormat,
    /// Write the report here instead of standard output.
    #[arg(long)]
    pub report_file: Option<PathBuf>,
    /// Class colors as `surface,above,gap` hex triples.
    #[arg(long, default_value = "00ff00,ff0000,0000ff")]
    pub color_map: ClassColors,
}

impl RunConfig {
    pub fn new(input: impl Into<PathBuf>) -> Self {
        RunConfig {
            input: input.into(),
            output: None,
            level: 5,
            axis_order: AxisOrder::GeoYxz,
            no_normalize: false,
            format: None,
            boxes: false,
            report: ReportFormat::Text,
            report_file: None,
            color_map: ClassColors::default(),
        }
    }

    fn output_path(&self) -> Result<&Path> {
        match self.output.as_deref() {
            Some(p) if !p.as_os_str().is_empty() => Ok(p),
            _ => Err(Error::Usage("--output is required for this command".into())),
        }
    }

    fn export_format(&self) -> Result<ExportFormat> {
        let inferred = match self.output.as_ref().and_then(|p| p.extension()) {
            Some(ext) if ext.eq_ignore_ascii_case("obj") => ExportFormat::Obj,
            _ if self.boxes => ExportFormat::Obj,
            _ => ExportFormat::Ply,
        };
        let format = self.format.unwrap_or(inferred);
        if self.boxes && format != ExportFormat::Obj {
            return Err(Error::Usage("--boxes requires OBJ output".into()));
        }
        Ok(format)
    }
}

#[derive(Debug, Clone, Args)]
pub struct GenerateConfig {
    /// terraced, canopy, noise, column, or survey (large unstructured cloud).
    #[arg(long, default_value = "canopy")]
    pub kind: String,
    /// Fixture cell depth (designed cells are at this level).
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u8).range(0..=10))]
    pub level: u8,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Point count for the survey kind.
    #[arg(long, default_value_t = 100_000)]
    pub points: usize,
    /// OBJ file to write.
    #[arg(long)]
    pub output: PathBuf,
    /// JSON file receiving the expected counts.
    #[arg(long)]
    pub expect: Option<PathBuf>,
    #[arg(long, default_value = "yxz")]
    pub axis_order: AxisOrder,
}

/// Everything one pipeline run produced.
#[derive(Debug)]
pub struct PipelineRun {
    pub source: PointCloud,
    pub normalized: Option<Normalized>,
    /// Root cuboid in the working (possibly normalized) frame.
    pub bbox: BoundingBox,
    pub stats: LevelStats,
    pub leaves: Vec<CuboidAddress>,
    pub grid: ClassifiedGrid,
    pub merged: Option<Vec<MergedPoint>>,
    pub timings: StageTimings,
}

impl PipelineRun {
    /// Working-frame point mapped back to source coordinates.
    fn to_source(&self, p: GeoPoint) -> GeoPoint {
        match &self.normalized {
            Some(n) => n.restore(&p),
            None => p,
        }
    }

    fn fallback(&self) -> bool {
        self.normalized.as_ref().is_some_and(|n| n.fallback.any())
    }

    pub fn report(&self) -> Result<RunReport> {
        build_report(
            self.source.len(),
            &self.stats,
            &self.grid,
            self.merged.as_deref(),
            self.timings,
            self.fallback(),
        )
    }
}

/// Read, normalize, subdivide and classify; merge when `with_reduce`.
pub fn run_pipeline(config: &RunConfig, with_reduce: bool) -> Result<PipelineRun> {
    let mut timings = StageTimings::default();

    let t = Instant::now();
    let source = point_io::load_obj(&config.input, config.axis_order)?;
    timings.parse = seconds(t.elapsed());

    process_cloud(source, config, with_reduce, timings)
}

/// The pipeline after ingestion.
pub fn process_cloud(
    source: PointCloud,
    config: &RunConfig,
    with_reduce: bool,
    mut timings: StageTimings,
) -> Result<PipelineRun> {
    let t = Instant::now();
    let normalized = if config.no_normalize {
        None
    } else {
        Some(normalize(&source)?)
    };
    timings.normalize = seconds(t.elapsed());
    let working = normalized.as_ref().map_or(&source, |n| &n.cloud);

    let t = Instant::now();
    let tree = OctreeBuilder::new(u32::from(config.level)).build(working)?;
    let stats = tree.level_stats();
    let leaves: Vec<CuboidAddress> = tree.occupied_leaves().iter().map(|l| l.address).collect();
    timings.build = seconds(t.elapsed());

    let t = Instant::now();
    let grid = classify_full(&columnize(&leaves)?);
    timings.classify = seconds(t.elapsed());

    let merged = if with_reduce {
        let t = Instant::now();
        let m = reduce(working, &tree)?;
        timings.reduce = seconds(t.elapsed());
        Some(m)
    } else {
        None
    };

    Ok(PipelineRun {
        bbox: *tree.bbox(),
        source,
        normalized,
        stats,
        leaves,
        grid,
        merged,
        timings,
    })
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

fn with_path<T>(path: &Path, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Stream(source) => Error::io(path, source),
        other => other,
    })
}

fn export_vertices(
    vertices: &[ColoredVertex],
    path: &Path,
    format: ExportFormat,
    axis_order: AxisOrder,
) -> Result<()> {
    match format {
        ExportFormat::Ply => point_io::save_ply_vertices(vertices, path),
        ExportFormat::Obj => {
            let cloud = PointCloud::new(
                vertices
                    .iter()
                    .map(|v| GeoPoint::new(v.y, v.x, v.z).with_color(point_io::Rgb::from_u8(v.color)))
                    .collect(),
                axis_order,
            );
            point_io::save_obj(&cloud, path, axis_order)
        }
    }
}

fn export_timed(run: &mut PipelineRun, f: impl FnOnce(&PipelineRun) -> Result<()>) -> Result<()> {
    let t = Instant::now();
    f(run)?;
    run.timings.export = seconds(t.elapsed());
    Ok(())
}

pub fn cmd_stats(config: &RunConfig) -> Result<RunReport> {
    run_pipeline(config, false)?.report()
}

pub fn cmd_classify(config: &RunConfig) -> Result<RunReport> {
    let path = config.output_path()?.to_path_buf();
    let format = config.export_format()?;
    let mut run = run_pipeline(config, false)?;
    export_timed(&mut run, |run| {
        let vertices: Vec<ColoredVertex> = classified_vertices(&run.grid, &run.bbox, &config.color_map)
            .into_iter()
            .map(|v| {
                let p = run.to_source(GeoPoint::new(v.y, v.x, v.z));
                ColoredVertex { y: p.y, x: p.x, z: p.z, ..v }
            })
            .collect();
        export_vertices(&vertices, &path, format, config.axis_order)
    })?;
    run.report()
}

pub fn cmd_reduce(config: &RunConfig) -> Result<RunReport> {
    let path = config.output_path()?.to_path_buf();
    let format = config.export_format()?;
    let mut run = run_pipeline(config, true)?;
    export_timed(&mut run, |run| {
        let merged = run.merged.as_deref().unwrap_or_default();
        let cloud = PointCloud::new(
            merged_cloud(merged, config.axis_order)
                .points
                .into_iter()
                .map(|p| run.to_source(p))
                .collect(),
            config.axis_order,
        );
        match format {
            ExportFormat::Ply => point_io::save_ply(&cloud, &path),
            ExportFormat::Obj => point_io::save_obj(&cloud, &path, config.axis_order),
        }
    })?;
    run.report()
}

pub fn cmd_voxelize(config: &RunConfig) -> Result<RunReport> {
    let path = config.output_path()?.to_path_buf();
    let format = config.export_format()?;
    let mut run = run_pipeline(config, false)?;
    export_timed(&mut run, |run| {
        if config.boxes {
            let boxes: Vec<[[f64; 2]; 3]> = run
                .leaves
                .iter()
                .map(|addr| {
                    let [lo, hi] = run.bbox.cell_bounds(addr);
                    let lo = run.to_source(GeoPoint::new(lo[0], lo[1], lo[2]));
                    let hi = run.to_source(GeoPoint::new(hi[0], hi[1], hi[2]));
                    [[lo.y, hi.y], [lo.x, hi.x], [lo.z, hi.z]]
                })
                .collect();
            let mut w = create(&path)?;
            with_path(&path, point_io::write_obj_boxes(&boxes, &mut w, config.axis_order))
        } else {
            let vertices: Vec<ColoredVertex> = run
                .leaves
                .iter()
                .map(|addr| {
                    let [y, x, z] = run.bbox.cell_center(addr);
                    ColoredVertex::from(&run.to_source(GeoPoint::new(y, x, z)))
                })
                .collect();
            export_vertices(&vertices, &path, format, config.axis_order)
        }
    })?;
    run.report()
}

pub fn cmd_generate(config: &GenerateConfig) -> Result<()> {
    let (cloud, expected) = if config.kind == "survey" {
        (synth::survey_cloud(config.points, config.seed), None)
    } else {
        let kind: FixtureKind = config.kind.parse().map_err(Error::Usage)?;
        if kind == FixtureKind::Column && config.level < 4 {
            return Err(Error::Usage("the column fixture needs --level 4 or deeper".into()));
        }
        let mut spec = FixtureSpec::new(kind, config.level);
        spec.seed = config.seed;
        let fixture = synth::generate(&spec);
        (fixture.cloud, Some(fixture.expected))
    };
    point_io::save_obj(&cloud, &config.output, config.axis_order)?;
    if let Some(path) = &config.expect {
        let Some(expected) = expected else {
            return Err(Error::Usage("--expect is not available for survey clouds".into()));
        };
        let mut w = create(path)?;
        let json = serde_json::to_string_pretty(&expected).expect("expectation serializes");
        writeln!(w, "{json}").and_then(|_| w.flush()).map_err(|e| Error::io(path, e))?;
    }
    Ok(())
}

fn emit_report(config: &RunConfig, report: &RunReport, stdout: &mut dyn Write) -> Result<()> {
    let text = render_report(report, config.report);
    match &config.report_file {
        Some(path) => {
            let mut w = create(path)?;
            w.write_all(text.as_bytes())
                .and_then(|_| w.flush())
                .map_err(|e| Error::io(path, e))
        }
        None => stdout.write_all(text.as_bytes()).map_err(Error::Stream),
    }
}

/// Execute a parsed command line, writing the report to `stdout`.
pub fn run(cli: &Cli, stdout: &mut dyn Write) -> Result<()> {
    let (config, report) = match &cli.command {
        Command::Generate(g) => return cmd_generate(g),
        Command::Stats(c) => (c, cmd_stats(c)?),
        Command::Classify(c) => (c, cmd_classify(c)?),
        Command::Reduce(c) => (c, cmd_reduce(c)?),
        Command::Voxelize(c) => (c, cmd_voxelize(c)?),
    };
    emit_report(config, &report, stdout)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_documented_flags() {
        let cli = Cli::try_parse_from([
            "geoctree",
            "classify",
            "--input",
            "in.obj",
            "--output",
            "out.ply",
            "--level",
            "3",
            "--axis-order",
            "xyz",
            "--no-normalize",
            "--format",
            "ply",
            "--report",
            "structured",
            "--color-map",
            "ffffff,000000,808080",
        ])
        .unwrap();
        let Command::Classify(c) = cli.command else {
            panic!("wrong subcommand");
        };
        assert_eq!(c.level, 3);
        assert_eq!(c.axis_order, AxisOrder::Xyz);
        assert!(c.no_normalize);
        assert_eq!(c.report, ReportFormat::Structured);
        assert_eq!(c.color_map.gap, [128, 128, 128]);
    }

    #[test]
    fn defaults_follow_the_reference_experiment() {
        let cli = Cli::try_parse_from(["geoctree", "stats", "--input", "a.obj"]).unwrap();
        let Command::Stats(c) = cli.command else {
            panic!("wrong subcommand");
        };
        assert_eq!(c.level, 5);
        assert_eq!(c.axis_order, AxisOrder::GeoYxz);
        assert!(!c.no_normalize);
        assert_eq!(c.color_map, ClassColors::default());
    }

    #[test]
    fn level_out_of_range_is_a_usage_error() {
        let err = Cli::try_parse_from(["geoctree", "stats", "--input", "a.obj", "--level", "11"])
            .unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn export_format_inference() {
        let mut c = RunConfig::new("a.obj");
        c.output = Some("out.OBJ".into());
        assert_eq!(c.export_format().unwrap(), ExportFormat::Obj);
        c.output = Some("out.ply".into());
        assert_eq!(c.export_format().unwrap(), ExportFormat::Ply);
        c.boxes = true;
        c.output = Some("boxes".into());
        assert_eq!(c.export_format().unwrap(), ExportFormat::Obj);
        c.format = Some(ExportFormat::Ply);
        assert!(matches!(c.export_format(), Err(Error::Usage(_))));
    }

    #[test]
    fn missing_output_is_a_usage_error() {
        let c = RunConfig::new("a.obj");
        assert_eq!(cmd_classify(&c).unwrap_err().exit_code(), 2);
    }
}
