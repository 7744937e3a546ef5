//! Command-line entry points: measure, eval, synth, calibrate.
//!
//! Exit codes: 0 success, 1 input/load error, 2 empty or degenerate result.
//! Output files are written to a temp name and renamed into place, so a
//! failing run never leaves partial outputs.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::eval::{evaluate, render_table, GroundTruthRow, GroundTruthTable, TruthSource};
use crate::manifest::{MaskEntry, ScanManifest};
use crate::measure::{
    measure_scan, measurements_from_csv, measurements_to_csv, ExtentConfig, Method,
};
use crate::plane::RansacConfig;
use crate::synth::{generate_leaf_patch, LeafSpec};
use crate::{calibrate, mask, ply, svg};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT_ERROR: i32 = 1;
pub const EXIT_EMPTY_RESULT: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "leafmetric",
    about = "Leaf size measurement from 3D point-cloud scans",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Measure every leaf in a scan manifest
    Measure(MeasureArgs),
    /// Score a measurements CSV against a ground-truth CSV
    Eval(EvalArgs),
    /// Generate a synthetic scan (cloud, masks, manifest, truth) from a spec
    Synth(SynthArgs),
    /// Estimate the edge of a reference-cube scan and report the error
    Calibrate(CalibrateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ReportFormat {
    Csv,
    Json,
    Svg,
    Table,
}

impl std::fmt::Display for ReportFormat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ReportFormat::Csv => "csv",
            ReportFormat::Json => "json",
            ReportFormat::Svg => "svg",
            ReportFormat::Table => "table",
        })
    }
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Output directory
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,

    /// Estimator: plain, refined, combined or selected
    #[arg(long, default_value = "selected")]
    pub method: Method,

    /// RANSAC iteration budget
    #[arg(long, default_value_t = 1000)]
    pub iterations: usize,

    /// RANSAC inlier distance threshold, mm
    #[arg(long = "threshold-mm", default_value_t = 2.0)]
    pub threshold_mm: f64,

    /// RNG seed (falls back to LEAFMETRIC_SEED, then 0)
    #[arg(long, env = "LEAFMETRIC_SEED", default_value_t = 0)]
    pub seed: u64,

    /// Quantile trimmed off each end of the extent, in [0, 0.5)
    #[arg(long, default_value_t = 0.0)]
    pub trim: f64,

    /// Report formats to emit
    #[arg(long, value_delimiter = ',', default_values_t = [ReportFormat::Json, ReportFormat::Table])]
    pub format: Vec<ReportFormat>,
}

impl CommonArgs {
    fn extent_config(&self) -> ExtentConfig<f64> {
        ExtentConfig {
            trim_percentile: self.trim,
            ransac: RansacConfig {
                iterations: self.iterations,
                distance_threshold: self.threshold_mm,
                seed: self.seed,
                ..RansacConfig::default()
            },
        }
    }
}

#[derive(Debug, Args)]
pub struct MeasureArgs {
    /// Scan manifest JSON
    pub manifest: PathBuf,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Measurements CSV (as written by `measure`)
    pub measurements: PathBuf,
    /// Ground-truth CSV: leaf_id,length_mm,width_mm,source
    pub truth: PathBuf,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Synthetic scan spec JSON
    pub spec: PathBuf,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    /// Cube scan PLY
    pub cube_ply: PathBuf,
    /// True edge length of the physical cube, mm
    #[arg(long = "true-edge-mm", default_value_t = 50.0)]
    pub true_edge_mm: f64,
    #[command(flatten)]
    pub common: CommonArgs,
}

/// Write via a temp file in the same directory, then rename into place.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let name = path
        .file_name()
        .ok_or_else(|| Error::InvalidSpec(format!("bad output path {}", path.display())))?;
    let tmp = path.with_file_name(format!(".{}.tmp", name.to_string_lossy()));
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

pub fn run(cli: Cli) -> i32 {
    let outcome = match cli.command {
        Command::Measure(args) => cmd_measure(&args),
        Command::Eval(args) => cmd_eval(&args),
        Command::Synth(args) => cmd_synth(&args),
        Command::Calibrate(args) => cmd_calibrate(&args),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INPUT_ERROR
        }
    }
}

pub fn cmd_measure(args: &MeasureArgs) -> Result<i32> {
    let manifest = ScanManifest::load(&args.manifest)?;
    let base_dir = args
        .manifest
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."));
    let config = args.common.extent_config();
    let result = measure_scan::<f64>(&manifest, &base_dir, &config, args.common.method)?;

    std::fs::create_dir_all(&args.common.out_dir)?;
    let out = &args.common.out_dir;
    write_atomic(
        &out.join("measurements.csv"),
        measurements_to_csv(&result.measurements).as_bytes(),
    )?;
    write_atomic(
        &out.join("measurements.json"),
        serde_json::to_string_pretty(&result.measurements)?.as_bytes(),
    )?;
    write_atomic(
        &out.join("skips.json"),
        serde_json::to_string_pretty(&result.skips)?.as_bytes(),
    )?;

    for skip in &result.skips {
        eprintln!("skipped {}: {}", skip.leaf_id, skip.error);
    }
    println!(
        "measured {} of {} leaves",
        result.measurements.len(),
        manifest.masks.len()
    );
    Ok(if result.measurements.is_empty() {
        EXIT_EMPTY_RESULT
    } else {
        EXIT_OK
    })
}

pub fn cmd_eval(args: &EvalArgs) -> Result<i32> {
    let measurements = measurements_from_csv(&std::fs::read_to_string(&args.measurements)?)?;
    let truth = GroundTruthTable::from_csv(&std::fs::read_to_string(&args.truth)?)?;
    let report = match evaluate(&measurements, &truth) {
        Ok(r) => r,
        Err(Error::TooFewMatches { got }) => {
            eprintln!("only {got} leaf ids match; nothing to evaluate");
            return Ok(EXIT_EMPTY_RESULT);
        }
        Err(e) => return Err(e),
    };

    std::fs::create_dir_all(&args.common.out_dir)?;
    let out = &args.common.out_dir;
    for format in &args.common.format {
        match format {
            ReportFormat::Json => write_atomic(
                &out.join("report.json"),
                serde_json::to_string_pretty(&report)?.as_bytes(),
            )?,
            ReportFormat::Table => {
                write_atomic(&out.join("report.txt"), render_table(&report).as_bytes())?
            }
            ReportFormat::Csv => {
                let mut csv =
                    String::from("dimension,rmse_mm,r_squared,error_percentage,n\n");
                for (name, d) in [("length", &report.length), ("width", &report.width)] {
                    csv.push_str(&format!(
                        "{},{},{},{},{}\n",
                        name, d.rmse, d.r_squared, d.error_percentage, d.n
                    ));
                }
                write_atomic(&out.join("report.csv"), csv.as_bytes())?;
            }
            ReportFormat::Svg => {
                let ids: Vec<&String> =
                    report.length.residuals.iter().map(|(id, _)| id).collect();
                let join = |pick: fn(&crate::measure::LeafMeasurement<f64>) -> f64,
                            tru: fn(&GroundTruthRow) -> f64| {
                    let mut pred = Vec::new();
                    let mut t = Vec::new();
                    for id in &ids {
                        let m = measurements.iter().find(|m| &&m.leaf_id == id).unwrap();
                        let r = truth.rows.iter().find(|r| &&r.leaf_id == id).unwrap();
                        pred.push(pick(m));
                        t.push(tru(r));
                    }
                    (pred, t)
                };
                let (pred, tru) = join(|m| m.length, |r| r.length);
                write_atomic(
                    &out.join("scatter_length.svg"),
                    &svg::scatter_svg(&pred, &tru, "Leaf length: predicted vs truth"),
                )?;
                let (pred, tru) = join(|m| m.width, |r| r.width);
                write_atomic(
                    &out.join("scatter_width.svg"),
                    &svg::scatter_svg(&pred, &tru, "Leaf width: predicted vs truth"),
                )?;
            }
        }
    }
    print!("{}", render_table(&report));
    Ok(EXIT_OK)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SynthLeafEntry {
    pub leaf_id: String,
    #[serde(flatten)]
    pub spec: LeafSpec,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SynthSpec {
    pub scan_id: String,
    #[serde(default = "default_date")]
    pub date: String,
    #[serde(default)]
    pub seed: u64,
    pub leaves: Vec<SynthLeafEntry>,
}

fn default_date() -> String {
    "1970-01-01".into()
}

/// Pixel gap between leaf patches in the synthetic organized image.
const PATCH_GAP: u32 = 2;

pub fn cmd_synth(args: &SynthArgs) -> Result<i32> {
    let text = std::fs::read_to_string(&args.spec)?;
    let spec: SynthSpec = serde_json::from_str(&text)?;
    if spec.leaves.is_empty() {
        eprintln!("error: spec lists no leaves");
        return Ok(EXIT_INPUT_ERROR);
    }
    let scan_seed = if args.common.seed != 0 {
        args.common.seed
    } else {
        spec.seed
    };

    let patches: Vec<_> = spec
        .leaves
        .iter()
        .enumerate()
        .map(|(i, entry)| {
            let leaf_spec = LeafSpec {
                seed: scan_seed
                    .wrapping_add(entry.spec.seed)
                    .wrapping_add((i as u64).wrapping_mul(0x9e3779b97f4a7c15)),
                ..entry.spec.clone()
            };
            generate_leaf_patch(&leaf_spec).map(|p| (entry.leaf_id.clone(), p))
        })
        .collect::<Result<_>>()?;

    // lay patches side by side inside a 1-pixel border; uncovered pixels
    // become NaN (invalid) points
    let width: u32 =
        2 + patches.iter().map(|(_, p)| p.cols).sum::<u32>() + PATCH_GAP * (patches.len() as u32 - 1);
    let height: u32 = 2 + patches.iter().map(|(_, p)| p.rows).max().unwrap();
    let mut points = vec![[f64::NAN; 3]; (width as usize) * (height as usize)];
    let mut masks = Vec::new();
    let mut truth_rows = Vec::new();
    let mut col_off = 1u32;
    for (leaf_id, patch) in &patches {
        let mut pixels = Vec::new();
        for r in 0..patch.rows {
            for c in 0..patch.cols {
                if let Some(p) = patch.cells[(r * patch.cols + c) as usize] {
                    let row = 1 + r;
                    let col = col_off + c;
                    points[(row * width + col) as usize] = p;
                    pixels.push((row, col));
                }
            }
        }
        masks.push(crate::cloud::LeafMask::new(
            width,
            height,
            pixels,
            leaf_id.clone(),
        )?);
        truth_rows.push(GroundTruthRow {
            leaf_id: leaf_id.clone(),
            length: patch.truth.0,
            width: patch.truth.1,
            source: TruthSource::Synthetic,
        });
        col_off += patch.cols + PATCH_GAP;
    }

    let cloud = PointCloud::new(points).with_grid(width, height);
    let manifest = ScanManifest {
        cloud: "scan.ply".into(),
        masks: masks
            .iter()
            .map(|m| MaskEntry {
                leaf_id: m.leaf_id.clone(),
                path: format!("mask_{}.pgm", m.leaf_id),
            })
            .collect(),
        scan_id: spec.scan_id.clone(),
        date: spec.date.clone(),
    };
    let truth = GroundTruthTable::new(truth_rows)?;

    std::fs::create_dir_all(&args.common.out_dir)?;
    let out = &args.common.out_dir;
    write_atomic(
        &out.join("scan.ply"),
        &ply::write_ply(&cloud, ply::PlyFormat::BinaryLittleEndian),
    )?;
    for m in &masks {
        write_atomic(&out.join(format!("mask_{}.pgm", m.leaf_id)), &mask::write_mask(m))?;
    }
    write_atomic(&out.join("manifest.json"), manifest.to_json().as_bytes())?;
    write_atomic(&out.join("truth.csv"), truth.to_csv().as_bytes())?;
    println!(
        "wrote scan.ply ({}x{}), {} masks, manifest.json, truth.csv",
        width,
        height,
        masks.len()
    );
    Ok(EXIT_OK)
}

pub fn cmd_calibrate(args: &CalibrateArgs) -> Result<i32> {
    let bytes = std::fs::read(&args.cube_ply)?;
    let cloud: PointCloud<f64> = ply::parse_ply(&bytes)?;
    let config = RansacConfig {
        iterations: args.common.iterations,
        distance_threshold: args.common.threshold_mm,
        seed: args.common.seed,
        refine: true,
        ..RansacConfig::default()
    };
    let cal = match calibrate::estimate_cube_edge(&cloud, &config) {
        Ok(c) => c,
        Err(e @ (Error::Calibration(_) | Error::TooFewPoints { .. })) => {
            eprintln!("error: {e}");
            return Ok(EXIT_EMPTY_RESULT);
        }
        Err(e) => return Err(e),
    };
    println!(
        "estimated edge: {:.3} mm (true {:.3} mm), error {:.2}%",
        cal.edge_mm,
        args.true_edge_mm,
        cal.error_percentage(args.true_edge_mm)
    );
    for (i, f) in cal.faces.iter().enumerate() {
        println!(
            "face {}: rms {:.3} mm, {} inliers, normal [{:.4}, {:.4}, {:.4}]",
            i + 1,
            f.rms_distance,
            f.inlier_count,
            f.normal[0],
            f.normal[1],
            f.normal[2]
        );
    }
    Ok(EXIT_OK)
}
