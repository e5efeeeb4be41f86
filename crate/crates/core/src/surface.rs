//! Sweeps of `ρ₁`: per-slice singular curves and cusp counts, stacked into
//! the joint-space singularity surface.

use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::cusp::{find_cusps_with, CuspMode, CuspOptions, CuspPoint};
use crate::error::{Error, Result};
use crate::geometry::ManipulatorGeometry;
use crate::singular_slice::{sig, trace_slice_curves, Branch, SingularCurveSet};

/// Trailing samples that must share a cusp count before the pattern is
/// called stable.
pub const STABLE_RUN: usize = 5;

#[derive(Debug, Clone, Serialize)]
pub struct SliceSample {
    pub rho1: f64,
    pub curves: SingularCurveSet,
    pub cusps: Vec<CuspPoint>,
}

impl SliceSample {
    pub fn cusp_count(&self) -> usize {
        self.cusps.len()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SurfaceSweep {
    pub samples: Vec<SliceSample>,
    /// Smallest sample from which the cusp count stays constant to the end
    /// of the range, when that final run has at least [`STABLE_RUN`] samples.
    pub stabilization_threshold: Option<f64>,
}

impl SurfaceSweep {
    pub fn rho1_samples(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.rho1).collect()
    }

    pub fn cusp_counts(&self) -> Vec<usize> {
        self.samples.iter().map(SliceSample::cusp_count).collect()
    }

    pub fn vertex_count(&self) -> usize {
        self.samples.iter().map(|s| s.curves.vertex_count()).sum()
    }

    /// Consecutive sample pairs between which the cusp count changes.
    pub fn transitions(&self) -> Vec<(f64, f64, usize, usize)> {
        self.samples
            .windows(2)
            .filter(|w| w[0].cusp_count() != w[1].cusp_count())
            .map(|w| (w[0].rho1, w[1].rho1, w[0].cusp_count(), w[1].cusp_count()))
            .collect()
    }
}

/// Options for a sweep.
#[derive(Debug, Clone)]
pub struct SweepOptions {
    pub cusp: CuspOptions,
    /// α-columns per traced slice.
    pub resolution: usize,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            cusp: CuspOptions::default(),
            resolution: crate::singular_slice::DEFAULT_RESOLUTION,
        }
    }
}

/// `steps` evenly spaced samples over `[rho1_min, rho1_max]`.
pub fn sweep(
    geom: &ManipulatorGeometry,
    rho1_min: f64,
    rho1_max: f64,
    steps: usize,
    mode: CuspMode,
) -> Result<SurfaceSweep> {
    let opts = SweepOptions {
        cusp: CuspOptions {
            mode,
            ..CuspOptions::default()
        },
        ..SweepOptions::default()
    };
    sweep_with(geom, rho1_min, rho1_max, steps, &opts)
}

pub fn sweep_with(
    geom: &ManipulatorGeometry,
    rho1_min: f64,
    rho1_max: f64,
    steps: usize,
    opts: &SweepOptions,
) -> Result<SurfaceSweep> {
    if !(rho1_min > 0.0 && rho1_max > rho1_min && rho1_max.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "need 0 < rho1_min < rho1_max, got {rho1_min} and {rho1_max}"
        )));
    }
    if steps < 2 {
        return Err(Error::InvalidInput(format!(
            "a sweep needs at least 2 steps, got {steps}"
        )));
    }
    let samples: Vec<f64> = (0..steps)
        .map(|k| rho1_min + (rho1_max - rho1_min) * k as f64 / (steps - 1) as f64)
        .collect();
    sweep_samples(geom, &samples, opts)
}

/// Sweep over explicit samples, which must be positive and increasing.
pub fn sweep_samples(geom: &ManipulatorGeometry, rho1: &[f64], opts: &SweepOptions) -> Result<SurfaceSweep> {
    if rho1.is_empty() {
        return Err(Error::InvalidInput("no rho1 samples".into()));
    }
    if rho1.iter().any(|r| !(*r > 0.0 && r.is_finite())) || rho1.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput(
            "rho1 samples must be positive and strictly increasing".into(),
        ));
    }
    let samples = rho1
        .par_iter()
        .map(|&r| {
            Ok(SliceSample {
                rho1: r,
                curves: trace_slice_curves(geom, r, opts.resolution)?,
                cusps: find_cusps_with(geom, r, &opts.cusp)?.cusps,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let counts: Vec<usize> = samples.iter().map(SliceSample::cusp_count).collect();
    Ok(SurfaceSweep {
        stabilization_threshold: stabilization(rho1, &counts),
        samples,
    })
}

/// Start of the final constant run of `counts`, if it is long enough.
pub fn stabilization(rho1: &[f64], counts: &[usize]) -> Option<f64> {
    let last = *counts.last()?;
    let run = counts.iter().rev().take_while(|&&c| c == last).count();
    (run >= STABLE_RUN).then(|| rho1[counts.len() - run])
}

/// `rho1,cusp_count,branch_count,vertex_count`.
pub fn write_summary_csv(sweep: &SurfaceSweep, mut out: impl Write, digits: usize) -> Result<()> {
    writeln!(out, "rho1,cusp_count,branch_count,vertex_count")?;
    for s in &sweep.samples {
        writeln!(
            out,
            "{},{},{},{}",
            sig(s.rho1, digits),
            s.cusp_count(),
            s.curves.branches.len(),
            s.curves.vertex_count()
        )?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    /// Text polygon format with `v`, `l` and `f` records.
    Obj,
}

impl FromStr for MeshFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "obj" => Ok(MeshFormat::Obj),
            other => Err(Error::UnsupportedFormat(other.to_string())),
        }
    }
}

/// Significant digits of mesh coordinates.
pub const MESH_DIGITS: usize = 12;

/// Counts of what [`export_mesh`] wrote.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct MeshStats {
    pub vertices: usize,
    pub polylines: usize,
    pub triangles: usize,
    /// Adjacent-slice branch pairs that were stitched.
    pub stitched: usize,
}

/// Writes every traced vertex as `(ρ₁, ρ₂, ρ₃)`, each branch as a polyline,
/// and triangles between branches of adjacent slices that match one to one.
pub fn export_mesh(sweep: &SurfaceSweep, format: MeshFormat, mut out: impl Write) -> Result<MeshStats> {
    let MeshFormat::Obj = format;
    if sweep.samples.is_empty() {
        return Err(Error::InvalidInput("empty sweep".into()));
    }
    let p = MESH_DIGITS;
    let mut stats = MeshStats::default();
    writeln!(out, "# joint-space singular surface: x = rho1, y = rho2, z = rho3")?;
    // 1-based index of each branch's first vertex.
    let mut offsets: Vec<Vec<usize>> = Vec::new();
    for s in &sweep.samples {
        let mut offs = Vec::new();
        for b in &s.curves.branches {
            offs.push(stats.vertices + 1);
            for v in &b.vertices {
                writeln!(out, "v {} {} {}", sig(s.rho1, p), sig(v.rho2, p), sig(v.rho3, p))?;
            }
            stats.vertices += b.vertices.len();
        }
        offsets.push(offs);
    }
    for (k, s) in sweep.samples.iter().enumerate() {
        for (bi, b) in s.curves.branches.iter().enumerate() {
            if b.vertices.len() < 2 {
                continue;
            }
            let o = offsets[k][bi];
            let mut line = String::from("l");
            for i in 0..b.vertices.len() {
                line.push_str(&format!(" {}", o + i));
            }
            if b.closed {
                line.push_str(&format!(" {o}"));
            }
            writeln!(out, "{line}")?;
            stats.polylines += 1;
        }
    }
    for k in 0..sweep.samples.len().saturating_sub(1) {
        let (a, b) = (&sweep.samples[k], &sweep.samples[k + 1]);
        let spacing = b.rho1 - a.rho1;
        for (ia, ib) in match_branches(&a.curves.branches, &b.curves.branches, 2.0 * spacing) {
            let tris = stitch(&a.curves.branches[ia], &b.curves.branches[ib]);
            let (oa, ob) = (offsets[k][ia], offsets[k + 1][ib]);
            for t in &tris {
                let idx = t.map(|(side, i)| if side == 0 { oa + i } else { ob + i });
                writeln!(out, "f {} {} {}", idx[0], idx[1], idx[2])?;
            }
            stats.triangles += tris.len();
            stats.stitched += 1;
        }
    }
    Ok(stats)
}

const HAUSDORFF_SAMPLES: usize = 200;

fn image_points(b: &Branch) -> Vec<[f64; 2]> {
    let n = b.vertices.len();
    let step = n.div_ceil(HAUSDORFF_SAMPLES).max(1);
    b.vertices.iter().step_by(step).map(|v| [v.rho2, v.rho3]).collect()
}

/// Symmetric Hausdorff distance between subsampled images.
fn hausdorff(a: &[[f64; 2]], b: &[[f64; 2]]) -> f64 {
    let one_way = |x: &[[f64; 2]], y: &[[f64; 2]]| {
        x.iter()
            .map(|p| {
                y.iter()
                    .map(|q| (p[0] - q[0]).hypot(p[1] - q[1]))
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0f64, f64::max)
    };
    one_way(a, b).max(one_way(b, a))
}

/// Branch pairs that are each other's only partner within `threshold`.
fn match_branches(a: &[Branch], b: &[Branch], threshold: f64) -> Vec<(usize, usize)> {
    let pa: Vec<_> = a.iter().map(image_points).collect();
    let pb: Vec<_> = b.iter().map(image_points).collect();
    let d: Vec<Vec<f64>> = pa
        .par_iter()
        .map(|x| pb.iter().map(|y| hausdorff(x, y)).collect())
        .collect();
    let mut out = Vec::new();
    for i in 0..a.len() {
        let close: Vec<usize> = (0..b.len()).filter(|&j| d[i][j] <= threshold).collect();
        if close.len() != 1 {
            continue;
        }
        let j = close[0];
        let back = (0..a.len()).filter(|&k| d[k][j] <= threshold).count();
        if back == 1 && a[i].closed == b[j].closed && a[i].vertices.len() >= 2 && b[j].vertices.len() >= 2 {
            out.push((i, j));
        }
    }
    out
}

type Corner = (u8, usize);

/// Triangles between two polylines, advancing along whichever side gives
/// the shorter new diagonal.
fn stitch(a: &Branch, b: &Branch) -> Vec<[Corner; 3]> {
    let pa: Vec<[f64; 2]> = a.vertices.iter().map(|v| [v.rho2, v.rho3]).collect();
    let pb: Vec<[f64; 2]> = b.vertices.iter().map(|v| [v.rho2, v.rho3]).collect();
    let dist = |p: [f64; 2], q: [f64; 2]| (p[0] - q[0]).hypot(p[1] - q[1]);
    let nb = pb.len();
    // Order of b's vertices, aligned with a.
    let order: Vec<usize> = if a.closed {
        let start = (0..nb)
            .min_by(|&i, &j| dist(pa[0], pb[i]).total_cmp(&dist(pa[0], pb[j])))
            .unwrap();
        let fwd: Vec<usize> = (0..nb).map(|k| (start + k) % nb).collect();
        let rev: Vec<usize> = (0..nb).map(|k| (start + nb - k) % nb).collect();
        let probe = pa[pa.len().min(8) - 1];
        let near = |ord: &[usize]| dist(probe, pb[ord[(ord.len().min(8)) - 1]]);
        if near(&rev) < near(&fwd) {
            rev
        } else {
            fwd
        }
    } else if dist(pa[0], pb[0]) + dist(pa[pa.len() - 1], pb[nb - 1])
        <= dist(pa[0], pb[nb - 1]) + dist(pa[pa.len() - 1], pb[0])
    {
        (0..nb).collect()
    } else {
        (0..nb).rev().collect()
    };
    let (la, lb) = if a.closed {
        (pa.len() + 1, nb + 1)
    } else {
        (pa.len(), nb)
    };
    let ia = |k: usize| k % pa.len();
    let ib = |k: usize| order[k % nb];
    let (mut i, mut j) = (0, 0);
    let mut tris = Vec::new();
    while i + 1 < la || j + 1 < lb {
        let adv_a = if i + 1 >= la {
            false
        } else if j + 1 >= lb {
            true
        } else {
            dist(pa[ia(i + 1)], pb[ib(j)]) <= dist(pa[ia(i)], pb[ib(j + 1)])
        };
        if adv_a {
            tris.push([(0, ia(i)), (0, ia(i + 1)), (1, ib(j))]);
            i += 1;
        } else {
            tris.push([(0, ia(i)), (1, ib(j + 1)), (1, ib(j))]);
            j += 1;
        }
    }
    tris
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::singular_slice::CurveVertex;

    fn ring(r: f64, n: usize) -> Branch {
        Branch {
            vertices: (0..n)
                .map(|k| {
                    let t = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
                    CurveVertex {
                        alpha: t,
                        theta1: 0.0,
                        rho2: 5.0 + r * t.cos(),
                        rho3: 5.0 + r * t.sin(),
                        residual: 0.0,
                        det_residual: 0.0,
                    }
                })
                .collect(),
            closed: true,
        }
    }

    #[test]
    fn stabilization_needs_a_long_run() {
        let r: Vec<f64> = (0..10).map(|k| k as f64).collect();
        assert_eq!(stabilization(&r, &[0, 2, 4, 6, 4, 4, 4, 4, 4, 4]), Some(4.0));
        assert_eq!(stabilization(&r, &[0, 2, 4, 6, 6, 6, 6, 4, 4, 4]), None);
    }

    #[test]
    fn stitching_two_rings_covers_both() {
        let a = ring(1.0, 40);
        let b = ring(1.05, 37);
        let tris = stitch(&a, &b);
        assert_eq!(tris.len(), 40 + 37);
        assert_eq!(
            match_branches(std::slice::from_ref(&a), std::slice::from_ref(&b), 0.2),
            vec![(0, 0)]
        );
        assert!(match_branches(&[a], &[b], 0.01).is_empty());
    }

    #[test]
    fn format_names() {
        assert_eq!("OBJ".parse::<MeshFormat>().unwrap(), MeshFormat::Obj);
        assert!(matches!("stl".parse::<MeshFormat>(), Err(Error::UnsupportedFormat(_))));
    }
}
