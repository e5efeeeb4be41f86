//! Command-line front end. Exit codes: 0 success, 2 bad input, 3 numeric
//! failure.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::cusp::{cusps_to_json, find_cusps_with, round_json, CuspMode, CuspOptions};
use crate::error::{Error, Result};
use crate::geometry::{inverse_kinematics, ManipulatorGeometry, PlatformPose};
use crate::kinematics::{default_eps_cluster, direct_kinematics_with};
use crate::singular_slice::{
    label_regions, sig, slice_svg, trace_slice_curves, write_slice_csv, GridSpec, Marker, DEFAULT_RESOLUTION,
};
use crate::surface::{export_mesh, stabilization, sweep_samples, write_summary_csv, MeshFormat, SweepOptions};

/// Environment variable holding the worker thread count.
pub const THREADS_ENV: &str = "RPR_CUSPS_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "rpr-cusps",
    version,
    about = "Singular curves and cusp points of planar 3-RPR manipulators"
)]
pub struct Cli {
    /// Geometry JSON file.
    #[arg(long, short, global = true)]
    pub geometry: Option<PathBuf>,

    /// Decimal digits carried by the algebraic root isolation; printed
    /// values keep at most 17.
    #[arg(long, global = true, default_value_t = 90)]
    pub digits: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Trace the singular curves of one slice.
    Slice(SliceArgs),
    /// Cusp points of one slice.
    Cusps(CuspArgs),
    /// All assembly modes for given rod lengths.
    Dk(DkArgs),
    /// Rod lengths and angles for a platform pose.
    Ik(IkArgs),
    /// Assembly-mode counts on a grid of one slice.
    Regions(RegionArgs),
    /// Sweep rho1 and export the singularity surface.
    Surface(SurfaceArgs),
}

#[derive(Debug, Args)]
pub struct SliceArgs {
    #[arg(long)]
    pub rho1: f64,
    #[arg(long, default_value_t = DEFAULT_RESOLUTION)]
    pub resolution: usize,
    /// Slice CSV output.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub svg: Option<PathBuf>,
    /// Draw the cusps of the slice on the SVG.
    #[arg(long)]
    pub mark_cusps: bool,
}

#[derive(Debug, Args)]
pub struct CuspArgs {
    #[arg(long)]
    pub rho1: f64,
    /// algebraic, full-resultant or numeric.
    #[arg(long, default_value = "algebraic")]
    pub mode: CuspMode,
    /// JSON output; the count is always printed.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// α-columns for the numeric mode.
    #[arg(long, default_value_t = crate::cusp::numeric::DEFAULT_RESOLUTION)]
    pub resolution: usize,
    #[arg(long)]
    pub eps_cluster: Option<f64>,
    #[arg(long, default_value_t = crate::cusp::TOL_E1)]
    pub tol_e1: f64,
}

#[derive(Debug, Args)]
pub struct DkArgs {
    #[arg(long, num_args = 3, value_names = ["RHO1", "RHO2", "RHO3"], allow_negative_numbers = true)]
    pub lengths: Vec<f64>,
    #[arg(long)]
    pub eps_cluster: Option<f64>,
}

#[derive(Debug, Args)]
pub struct IkArgs {
    #[arg(long, num_args = 3, value_names = ["X", "Y", "ALPHA_DEG"], allow_negative_numbers = true)]
    pub pose: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct RegionArgs {
    #[arg(long)]
    pub rho1: f64,
    /// Cells per side.
    #[arg(long, default_value_t = 200)]
    pub grid: usize,
    /// rho2 and rho3 ranges; defaults to [0, 1.2 × curve extent].
    #[arg(long, num_args = 4, value_names = ["RHO2_MIN", "RHO2_MAX", "RHO3_MIN", "RHO3_MAX"])]
    pub bounds: Option<Vec<f64>>,
    #[arg(long, default_value_t = DEFAULT_RESOLUTION)]
    pub resolution: usize,
    /// CSV of `rho2,rho3,count`.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SurfaceArgs {
    #[arg(long = "rho1-range", num_args = 2, value_names = ["MIN", "MAX"])]
    pub rho1_range: Vec<f64>,
    #[arg(long, default_value_t = 50)]
    pub steps: usize,
    /// Mesh output.
    #[arg(long)]
    pub out: PathBuf,
    /// Summary CSV; defaults to the mesh path with a `.csv` extension.
    #[arg(long)]
    pub summary: Option<PathBuf>,
    #[arg(long, default_value = "obj")]
    pub format: String,
    #[arg(long, default_value = "algebraic")]
    pub mode: CuspMode,
    #[arg(long, default_value_t = DEFAULT_RESOLUTION)]
    pub resolution: usize,
}

/// Parses the process arguments, runs the command and returns the exit code.
pub fn main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return 2;
    }
    let stdout = std::io::stdout();
    match run(&cli, &mut stdout.lock()) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Numeric(_) | Error::RankDeficientAdjoint | Error::DegreeCapExceeded { .. } => 3,
        _ => 2,
    }
}

fn configure_threads() -> Result<()> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .map_err(|_| Error::InvalidInput(format!("{THREADS_ENV} must be a positive integer, got {v:?}")))?;
    if n == 0 {
        return Err(Error::InvalidInput(format!("{THREADS_ENV} must be positive")));
    }
    // A pool built earlier in the process stays in place.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn positive(name: &str, x: f64) -> Result<f64> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(Error::InvalidInput(format!("{name} must be positive, got {x}")))
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

/// Root-enclosure width matching `digits` decimal digits.
pub fn precision_bits(digits: usize) -> u32 {
    ((digits as f64) * std::f64::consts::LOG2_10).ceil().max(64.0) as u32
}

/// Runs one parsed command, writing console output to `out`.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    let path = cli
        .geometry
        .as_ref()
        .ok_or_else(|| Error::InvalidInput("--geometry is required".into()))?;
    let geom = ManipulatorGeometry::load(path)?;
    if cli.digits == 0 {
        return Err(Error::InvalidInput("--digits must be positive".into()));
    }
    let shown = cli.digits.min(17);
    match &cli.command {
        Command::Slice(a) => {
            let rho1 = positive("--rho1", a.rho1)?;
            let curves = trace_slice_curves(&geom, rho1, a.resolution)?;
            let mut w = create(&a.out)?;
            write_slice_csv(&curves, &mut w, shown)?;
            w.flush()?;
            if let Some(svg) = &a.svg {
                let markers: Vec<Marker> = if a.mark_cusps {
                    let opts = CuspOptions {
                        precision_bits: precision_bits(cli.digits),
                        ..CuspOptions::default()
                    };
                    find_cusps_with(&geom, rho1, &opts)?
                        .cusps
                        .iter()
                        .map(|c| Marker {
                            rho2: c.rho2,
                            rho3: c.rho3,
                        })
                        .collect()
                } else {
                    Vec::new()
                };
                std::fs::write(svg, slice_svg(&curves, &markers, None))?;
            }
            writeln!(
                out,
                "{} branches, {} vertices",
                curves.branches.len(),
                curves.vertex_count()
            )?;
        }
        Command::Cusps(a) => {
            let rho1 = positive("--rho1", a.rho1)?;
            if let Some(e) = a.eps_cluster {
                positive("--eps-cluster", e)?;
            }
            positive("--tol-e1", a.tol_e1)?;
            let opts = CuspOptions {
                mode: a.mode,
                precision_bits: precision_bits(cli.digits),
                tol_e1: a.tol_e1,
                eps_cluster: a.eps_cluster,
                resolution: a.resolution,
            };
            let report = find_cusps_with(&geom, rho1, &opts)?;
            if let Some(p) = &a.out {
                let mut w = create(p)?;
                serde_json::to_writer_pretty(&mut w, &cusps_to_json(&report, shown))?;
                writeln!(w)?;
                w.flush()?;
            }
            writeln!(out, "{}", report.cusps.len())?;
        }
        Command::Dk(a) => {
            let rods = [a.lengths[0], a.lengths[1], a.lengths[2]];
            for (i, r) in rods.iter().enumerate() {
                if !(r.is_finite() && *r >= 0.0) {
                    return Err(Error::InvalidInput(format!(
                        "rod length {} must be non-negative, got {r}",
                        i + 1
                    )));
                }
            }
            let eps = match a.eps_cluster {
                Some(e) => positive("--eps-cluster", e)?,
                None => default_eps_cluster(&geom),
            };
            let set = direct_kinematics_with(&geom, &rods, eps);
            let poses: Vec<_> = set
                .poses
                .iter()
                .map(|p| {
                    json!({
                        "x": p.pose.b1.x,
                        "y": p.pose.b1.y,
                        "alpha_deg": p.pose.alpha.to_degrees(),
                        "theta1_deg": p.theta1.to_degrees(),
                        "residual": p.residual,
                    })
                })
                .collect();
            let mut v = json!({
                "lengths": rods,
                "count": set.distinct(),
                "poses": poses,
                "clusters": set.clusters,
                "max_multiplicity": set.max_multiplicity(),
                "eps_cluster": set.eps_cluster,
            });
            round_json(&mut v, shown);
            writeln!(out, "{}", serde_json::to_string_pretty(&v)?)?;
        }
        Command::Ik(a) => {
            if a.pose.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidInput("pose values must be finite".into()));
            }
            let pose = PlatformPose::new(a.pose[0], a.pose[1], a.pose[2].to_radians());
            let c = inverse_kinematics(&geom, &pose)?;
            let mut v = json!({
                "lengths": c.rho,
                "theta_deg": c.theta.map(f64::to_degrees),
            });
            round_json(&mut v, shown);
            writeln!(out, "{}", serde_json::to_string_pretty(&v)?)?;
        }
        Command::Regions(a) => {
            let rho1 = positive("--rho1", a.rho1)?;
            if a.grid == 0 {
                return Err(Error::InvalidInput("--grid must be positive".into()));
            }
            let curves = trace_slice_curves(&geom, rho1, a.resolution)?;
            let grid = match &a.bounds {
                Some(b) => GridSpec {
                    rho2_min: b[0],
                    rho2_max: b[1],
                    rho3_min: b[2],
                    rho3_max: b[3],
                    n2: a.grid,
                    n3: a.grid,
                },
                None => GridSpec::around(&curves, a.grid),
            };
            let map = label_regions(&geom, rho1, &grid, Some(&curves))?;
            let mut w = create(&a.out)?;
            writeln!(w, "rho2,rho3,count")?;
            for i in 0..grid.n2 {
                for j in 0..grid.n3 {
                    let (r2, r3) = grid.cell_center(i, j);
                    writeln!(
                        w,
                        "{},{},{}",
                        sig(r2, shown.max(12)),
                        sig(r3, shown.max(12)),
                        map.counts[i][j]
                    )?;
                }
            }
            w.flush()?;
            if let Some(svg) = &a.svg {
                std::fs::write(svg, slice_svg(&curves, &[], Some(&map)))?;
            }
            let counts: Vec<String> = map.interior_counts().iter().map(u8::to_string).collect();
            writeln!(out, "counts: {}", counts.join(" "))?;
        }
        Command::Surface(a) => {
            let (lo, hi) = (a.rho1_range[0], a.rho1_range[1]);
            positive("rho1 range start", lo)?;
            if a.steps == 0 {
                return Err(Error::InvalidInput("--steps must be positive".into()));
            }
            let format: MeshFormat = a.format.parse()?;
            let samples: Vec<f64> = if a.steps == 1 {
                vec![lo]
            } else {
                if !(hi > lo && hi.is_finite()) {
                    return Err(Error::InvalidInput(format!(
                        "rho1 range must be increasing, got {lo} {hi}"
                    )));
                }
                (0..a.steps)
                    .map(|k| lo + (hi - lo) * k as f64 / (a.steps - 1) as f64)
                    .collect()
            };
            let opts = SweepOptions {
                cusp: CuspOptions {
                    mode: a.mode,
                    precision_bits: precision_bits(cli.digits),
                    ..CuspOptions::default()
                },
                resolution: a.resolution,
            };
            let sweep = sweep_samples(&geom, &samples, &opts)?;
            let mut w = create(&a.out)?;
            let stats = export_mesh(&sweep, format, &mut w)?;
            w.flush()?;
            let summary = a.summary.clone().unwrap_or_else(|| a.out.with_extension("csv"));
            let mut w = create(&summary)?;
            write_summary_csv(&sweep, &mut w, shown.max(12))?;
            w.flush()?;
            writeln!(
                out,
                "{} samples, {} vertices, {} triangles",
                sweep.samples.len(),
                stats.vertices,
                stats.triangles
            )?;
            match stabilization(&samples, &sweep.cusp_counts()) {
                Some(t) => writeln!(
                    out,
                    "cusp count stable from rho1 = {} at {}",
                    sig(t, 6),
                    sweep.cusp_counts().last().unwrap()
                )?,
                None => writeln!(out, "cusp count not stable over the range")?,
            }
        }
    }
    Ok(())
}
