//! Singular curves in a joint-space slice `ρ₁ = const`.
//!
//! A configuration is singular when the three leg axes are concurrent or
//! parallel. In slice coordinates `(α, θ₁)` this is the zero set of the
//! leg-vector expression [`LegTerms::singularity`]; the curves are traced
//! column by column in `α`, linked into branches and mapped to `(ρ₂, ρ₃)`.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::io::Write;

use nalgebra::Matrix3;
use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;

use crate::differential::{normalized_det, LegTerms};
use crate::error::{Error, Result};
use crate::geometry::{
    config_from_slice, slice_leg_vectors, wrap_angle, Configuration, ManipulatorGeometry, SliceCoords,
};
use crate::kinematics::count_batch;
use crate::polyalg::field::f64_to_decimal_ratio;
use crate::polyalg::numeric::tan_half_from_samples;
use crate::polyalg::{real_roots, Poly, RootInterval};

/// Default number of `α` columns.
pub const DEFAULT_RESOLUTION: usize = 1024;
/// Tolerance on normalized singularity residuals.
pub const TOL_SING: f64 = crate::differential::TOL_SING;

/// `A₂ₓ s₂ s₃₁ + (A₃ₓ s₃ − A₃ᵧ c₃) s₁₂`.
pub fn singularity_residual_task(geom: &ManipulatorGeometry, theta1: f64, theta2: f64, theta3: f64) -> f64 {
    let s31 = (theta3 - theta1).sin();
    let s12 = (theta1 - theta2).sin();
    geom.a2x * theta2.sin() * s31 + (geom.a3x * theta3.sin() - geom.a3y * theta3.cos()) * s12
}

/// The task-form residual scaled by `ρ₂ρ₃`, evaluated without division.
pub fn singularity_residual_slice(geom: &ManipulatorGeometry, slice: &SliceCoords) -> Result<f64> {
    let (v2, v3) = slice_leg_vectors(geom, slice);
    let tiny = f64::EPSILON * geom.mean_side();
    if v2.norm() <= tiny {
        return Err(Error::DegenerateSlice(2));
    }
    if v3.norm() <= tiny {
        return Err(Error::DegenerateSlice(3));
    }
    Ok(slice_value(geom, slice))
}

pub(crate) fn slice_value(geom: &ManipulatorGeometry, slice: &SliceCoords) -> f64 {
    let (v2, v3) = slice_leg_vectors(geom, slice);
    let (s1, c1) = slice.theta1.sin_cos();
    LegTerms {
        rho1: slice.rho1,
        c1,
        s1,
        x2: v2.x,
        y2: v2.y,
        x3: v3.x,
        y3: v3.y,
        a2x: geom.a2x,
        a3x: geom.a3x,
        a3y: geom.a3y,
    }
    .singularity()
}

/// Task-form residual divided by `2·max(A)`, the bound on its magnitude.
pub fn normalized_singularity(geom: &ManipulatorGeometry, config: &Configuration) -> f64 {
    let [t1, t2, t3] = config.theta;
    singularity_residual_task(geom, t1, t2, t3) / (2.0 * geom.base_scale())
}

/// Whether the three leg axes meet in a point, possibly at infinity.
///
/// Each axis is the line `−sᵢ x + cᵢ y + (sᵢ Aᵢₓ − cᵢ Aᵢᵧ) = 0`; the axes
/// are concurrent iff the 3×3 matrix of line coordinates is singular.
pub fn legs_concurrent(geom: &ManipulatorGeometry, config: &Configuration, tol: f64) -> bool {
    let a = geom.anchors();
    let b = geom.base_scale();
    let m = Matrix3::from_fn(|i, j| {
        let (s, c) = config.theta[i].sin_cos();
        match j {
            0 => -s,
            1 => c,
            _ => (s * a[i].x - c * a[i].y) / b,
        }
    });
    m.determinant().abs() <= tol
}

/// One traced point of a singular curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurveVertex {
    pub alpha: f64,
    pub theta1: f64,
    pub rho2: f64,
    pub rho3: f64,
    /// Normalized singularity residual.
    pub residual: f64,
    /// Normalized `det ∂Γ/∂θ`.
    pub det_residual: f64,
}

impl CurveVertex {
    pub fn slice(&self, rho1: f64) -> SliceCoords {
        SliceCoords::new(rho1, self.alpha, self.theta1)
    }
}

/// A polyline of traced vertices.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Branch {
    pub vertices: Vec<CurveVertex>,
    pub closed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SingularCurveSet {
    pub rho1: f64,
    pub resolution: usize,
    pub branches: Vec<Branch>,
}

impl SingularCurveSet {
    pub fn vertices(&self) -> impl Iterator<Item = &CurveVertex> {
        self.branches.iter().flat_map(|b| b.vertices.iter())
    }

    pub fn vertex_count(&self) -> usize {
        self.branches.iter().map(|b| b.vertices.len()).sum()
    }

    /// Largest `ρ₂` and `ρ₃` over all vertices.
    pub fn extent(&self) -> (f64, f64) {
        self.vertices()
            .fold((0.0f64, 0.0f64), |(a, b), v| (a.max(v.rho2), b.max(v.rho3)))
    }

    /// Distance in `(ρ₂, ρ₃)` from a point to the nearest vertex.
    pub fn nearest_distance(&self, rho2: f64, rho3: f64) -> f64 {
        self.vertices()
            .map(|v| (v.rho2 - rho2).hypot(v.rho3 - rho3))
            .fold(f64::INFINITY, f64::min)
    }

    /// Distance in `(α, θ₁)` from a slice point to the nearest vertex.
    pub fn nearest_angle_distance(&self, alpha: f64, theta1: f64) -> f64 {
        self.vertices()
            .map(|v| wrap_angle(v.alpha - alpha).hypot(wrap_angle(v.theta1 - theta1)))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Real `θ₁` roots of the slice condition in one `α` column.
pub fn column_roots(geom: &ManipulatorGeometry, rho1: f64, alpha: f64) -> Vec<f64> {
    let f = |t1: f64| {
        slice_value(
            geom,
            &SliceCoords {
                rho1,
                alpha,
                theta1: t1,
            },
        )
    };
    let coeffs = tan_half_from_samples(f, 2);
    let scale = coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    if scale == 0.0 {
        return Vec::new();
    }
    let exact = Poly::new(
        coeffs
            .iter()
            .map(|c| if c.abs() <= 1e-14 * scale { 0.0 } else { *c })
            .map(f64_to_decimal_ratio)
            .collect(),
    );
    let mut out = Vec::new();
    if exact.degree().unwrap_or(0) > 0 {
        if let Ok(roots) = real_roots(&exact, &RootInterval::WholeLine, 60, 16) {
            for r in roots {
                out.push(polish_theta1(&f, 2.0 * r.to_f64().atan()));
            }
        }
    }
    // θ₁ = π is lost when the t⁴ coefficient vanishes.
    if exact.degree().unwrap_or(0) < 4 || coeffs[4].abs() <= 1e-12 * scale {
        out.push(polish_theta1(&f, PI));
    }
    out.sort_by(f64::total_cmp);
    out.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    out
}

fn polish_theta1(f: &impl Fn(f64) -> f64, mut x: f64) -> f64 {
    for _ in 0..8 {
        let h = 1e-7;
        let d = (f(x + h) - f(x - h)) / (2.0 * h);
        if d == 0.0 {
            break;
        }
        let step = f(x) / d;
        if !step.is_finite() || step.abs() > 0.1 {
            break;
        }
        x -= step;
        if step.abs() < 1e-15 {
            break;
        }
    }
    wrap_angle(x)
}

fn make_vertex(geom: &ManipulatorGeometry, rho1: f64, alpha: f64, theta1: f64) -> Option<CurveVertex> {
    let slice = SliceCoords::new(rho1, alpha, theta1);
    let config = config_from_slice(geom, &slice).ok()?;
    Some(CurveVertex {
        alpha: slice.alpha,
        theta1: slice.theta1,
        rho2: config.rho[1],
        rho3: config.rho[2],
        residual: normalized_singularity(geom, &config),
        det_residual: normalized_det(geom, &config),
    })
}

/// `α` of column `j` out of `n`, covering `(−π, π]`.
fn column_alpha(j: usize, n: usize) -> f64 {
    -PI + 2.0 * PI * (j as f64 + 1.0) / n as f64
}

/// Traces the singular curves of the slice `ρ₁ = rho1`.
///
/// Roots on `resolution` columns of constant `α` seed a predictor-corrector
/// walk along `F = 0` with arc-length step `2π / resolution`. A seed is
/// consumed once a traced segment crosses its column next to it, so each
/// branch is walked once.
pub fn trace_slice_curves(geom: &ManipulatorGeometry, rho1: f64, resolution: usize) -> Result<SingularCurveSet> {
    if !(rho1 > 0.0 && rho1.is_finite()) {
        return Err(Error::InvalidInput(format!("rho1 must be positive, got {rho1}")));
    }
    if resolution < 64 {
        return Err(Error::InvalidInput(format!(
            "resolution must be at least 64, got {resolution}"
        )));
    }
    let columns: Vec<Vec<f64>> = (0..resolution)
        .into_par_iter()
        .map(|j| column_roots(geom, rho1, column_alpha(j, resolution)))
        .collect();
    let tracer = Tracer {
        geom,
        rho1,
        h0: 2.0 * PI / resolution as f64,
        n: resolution,
    };
    let mut covered: Vec<Vec<bool>> = columns.iter().map(|c| vec![false; c.len()]).collect();
    let mut paths = Vec::new();
    for j in 0..resolution {
        for i in 0..columns[j].len() {
            if covered[j][i] {
                continue;
            }
            covered[j][i] = true;
            let seed = [column_alpha(j, resolution), columns[j][i]];
            let (pts, closed) = tracer.trace(seed, &columns, &mut covered);
            paths.push((pts, closed));
        }
    }
    let mut branches: Vec<Branch> = paths
        .into_par_iter()
        .map(|(pts, closed)| Branch {
            vertices: pts.iter().filter_map(|p| make_vertex(geom, rho1, p[0], p[1])).collect(),
            closed,
        })
        .filter(|b| !b.vertices.is_empty())
        .collect();
    for b in &mut branches {
        canonical_orientation(b);
    }
    branches.sort_by(|a, b| {
        let key = |br: &Branch| {
            br.vertices.iter().fold((f64::INFINITY, f64::INFINITY), |(x, y), v| {
                (x.min(v.alpha), y.min(v.theta1))
            })
        };
        let (ka, kb) = (key(a), key(b));
        ka.0.total_cmp(&kb.0).then(ka.1.total_cmp(&kb.1))
    });
    Ok(SingularCurveSet {
        rho1,
        resolution,
        branches,
    })
}

struct Tracer<'a> {
    geom: &'a ManipulatorGeometry,
    rho1: f64,
    h0: f64,
    n: usize,
}

fn wrapped_gap(p: [f64; 2], q: [f64; 2]) -> f64 {
    wrap_angle(p[0] - q[0]).hypot(wrap_angle(p[1] - q[1]))
}

impl Tracer<'_> {
    fn f(&self, p: [f64; 2]) -> f64 {
        slice_value(
            self.geom,
            &SliceCoords {
                rho1: self.rho1,
                alpha: p[0],
                theta1: p[1],
            },
        )
    }

    fn grad(&self, p: [f64; 2]) -> [f64; 2] {
        let h = 1e-6;
        [
            (self.f([p[0] + h, p[1]]) - self.f([p[0] - h, p[1]])) / (2.0 * h),
            (self.f([p[0], p[1] + h]) - self.f([p[0], p[1] - h])) / (2.0 * h),
        ]
    }

    /// Unit tangent at `p`, oriented along `prev`.
    fn tangent(&self, p: [f64; 2], prev: [f64; 2]) -> Option<[f64; 2]> {
        let g = self.grad(p);
        let n = g[0].hypot(g[1]);
        if n == 0.0 || !n.is_finite() {
            return None;
        }
        let t = [-g[1] / n, g[0] / n];
        Some(if t[0] * prev[0] + t[1] * prev[1] < 0.0 {
            [-t[0], -t[1]]
        } else {
            t
        })
    }

    /// Newton along the gradient back onto `F = 0`.
    fn correct(&self, mut p: [f64; 2]) -> Option<[f64; 2]> {
        for _ in 0..12 {
            let g = self.grad(p);
            let n2 = g[0] * g[0] + g[1] * g[1];
            if n2 == 0.0 {
                return None;
            }
            let k = self.f(p) / n2;
            let step = [k * g[0], k * g[1]];
            p = [p[0] - step[0], p[1] - step[1]];
            if step[0].hypot(step[1]) < 1e-14 {
                return Some(p);
            }
        }
        let g = self.grad(p);
        (self.f(p).abs() <= 1e-12 * g[0].hypot(g[1])).then_some(p)
    }

    /// Marks the column roots crossed by the segment `p → q`.
    fn mark(&self, p: [f64; 2], q: [f64; 2], columns: &[Vec<f64>], covered: &mut [Vec<bool>]) {
        let scale = self.n as f64 / (2.0 * PI);
        let (up, uq) = ((p[0] + PI) * scale - 1.0, (q[0] + PI) * scale - 1.0);
        let (lo, hi) = if up <= uq { (up, uq) } else { (uq, up) };
        let mut k = lo.ceil();
        while k <= hi {
            let s = if uq == up { 0.0 } else { (k - up) / (uq - up) };
            let theta = p[1] + s * (q[1] - p[1]);
            let j = (k as i64).rem_euclid(self.n as i64) as usize;
            for (i, &t) in columns[j].iter().enumerate() {
                if wrap_angle(t - theta).abs() <= 0.5 * self.h0 {
                    covered[j][i] = true;
                }
            }
            k += 1.0;
        }
    }

    /// One direction of the walk. Returns the points after the seed and
    /// whether the walk came back to it.
    fn walk(&self, seed: [f64; 2], dir: f64, columns: &[Vec<f64>], covered: &mut [Vec<bool>]) -> (Vec<[f64; 2]>, bool) {
        let max_steps = 64 * self.n;
        let g = self.grad(seed);
        let mut tau = [-dir * g[1], dir * g[0]];
        let mut p = seed;
        let mut h = self.h0;
        let mut out = Vec::new();
        let mut travelled = 0.0;
        while out.len() < max_steps {
            let Some(t) = self.tangent(p, tau) else {
                return (out, false);
            };
            let pred = [p[0] + h * t[0], p[1] + h * t[1]];
            let accepted = self.correct(pred).and_then(|q| {
                let d = (q[0] - p[0]).hypot(q[1] - p[1]);
                let tq = self.tangent(q, t)?;
                (d <= 1.5 * h && t[0] * tq[0] + t[1] * tq[1] > 0.95).then_some((q, tq, d))
            });
            match accepted {
                Some((q, tq, d)) => {
                    travelled += d;
                    if travelled > 2.0 * self.h0 && segment_hits(p, q, seed, 0.1 * self.h0) {
                        self.mark(p, q, columns, covered);
                        return (out, true);
                    }
                    self.mark(p, q, columns, covered);
                    out.push(q);
                    p = q;
                    tau = tq;
                    h = (h * 1.5).min(self.h0);
                }
                None => {
                    h *= 0.5;
                    if h < self.h0 / 4096.0 {
                        return (out, false);
                    }
                }
            }
        }
        (out, false)
    }

    fn trace(&self, seed: [f64; 2], columns: &[Vec<f64>], covered: &mut [Vec<bool>]) -> (Vec<[f64; 2]>, bool) {
        let (fwd, closed) = self.walk(seed, 1.0, columns, covered);
        if closed {
            let mut pts = vec![seed];
            pts.extend(fwd);
            return (pts, true);
        }
        let (bwd, _) = self.walk(seed, -1.0, columns, covered);
        let mut pts: Vec<[f64; 2]> = bwd.into_iter().rev().collect();
        pts.push(seed);
        pts.extend(fwd);
        (pts, false)
    }
}

/// Whether the segment `p → q` passes within `tol` of `target` modulo 2π.
fn segment_hits(p: [f64; 2], q: [f64; 2], target: [f64; 2], tol: f64) -> bool {
    let r = [p[0] + wrap_angle(target[0] - p[0]), p[1] + wrap_angle(target[1] - p[1])];
    let d = [q[0] - p[0], q[1] - p[1]];
    let len2 = d[0] * d[0] + d[1] * d[1];
    let s = if len2 == 0.0 {
        0.0
    } else {
        (((r[0] - p[0]) * d[0] + (r[1] - p[1]) * d[1]) / len2).clamp(0.0, 1.0)
    };
    let c = [p[0] + s * d[0], p[1] + s * d[1]];
    wrapped_gap(c, r) <= tol
}

/// Closed branches start at their smallest `(α, θ₁)` vertex.
fn canonical_orientation(b: &mut Branch) {
    if !b.closed || b.vertices.is_empty() {
        return;
    }
    let start = (0..b.vertices.len())
        .min_by(|&i, &j| {
            let (u, v) = (&b.vertices[i], &b.vertices[j]);
            u.alpha.total_cmp(&v.alpha).then(u.theta1.total_cmp(&v.theta1))
        })
        .unwrap();
    b.vertices.rotate_left(start);
}

/// Region-labeling grid over `(ρ₂, ρ₃)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub rho2_min: f64,
    pub rho2_max: f64,
    pub rho3_min: f64,
    pub rho3_max: f64,
    pub n2: usize,
    pub n3: usize,
}

impl GridSpec {
    /// `[0, 1.2 × extent]` in both directions.
    pub fn around(curves: &SingularCurveSet, n: usize) -> Self {
        let (e2, e3) = curves.extent();
        GridSpec {
            rho2_min: 0.0,
            rho2_max: 1.2 * e2.max(1e-9),
            rho3_min: 0.0,
            rho3_max: 1.2 * e3.max(1e-9),
            n2: n,
            n3: n,
        }
    }

    pub fn cell_center(&self, i: usize, j: usize) -> (f64, f64) {
        let d2 = (self.rho2_max - self.rho2_min) / self.n2 as f64;
        let d3 = (self.rho3_max - self.rho3_min) / self.n3 as f64;
        (
            self.rho2_min + (i as f64 + 0.5) * d2,
            self.rho3_min + (j as f64 + 0.5) * d3,
        )
    }

    pub fn spacing(&self) -> (f64, f64) {
        (
            (self.rho2_max - self.rho2_min) / self.n2 as f64,
            (self.rho3_max - self.rho3_min) / self.n3 as f64,
        )
    }
}

/// Assembly-mode counts on a grid; `counts[i][j]` at `ρ₂` index `i`,
/// `ρ₃` index `j`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionMap {
    pub rho1: f64,
    pub grid: GridSpec,
    pub counts: Vec<Vec<u8>>,
    /// Cells within one spacing of a traced curve.
    pub boundary: Vec<Vec<bool>>,
}

impl RegionMap {
    /// Distinct counts over non-boundary cells.
    pub fn interior_counts(&self) -> Vec<u8> {
        let mut v: Vec<u8> = self
            .counts
            .iter()
            .zip(&self.boundary)
            .flat_map(|(c, b)| c.iter().zip(b).filter(|(_, b)| !**b).map(|(c, _)| *c))
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn contains_count(&self, k: u8) -> bool {
        self.counts.iter().flatten().any(|&c| c == k)
    }
}

/// Counts assembly modes at every cell centre.
pub fn label_regions(
    geom: &ManipulatorGeometry,
    rho1: f64,
    grid: &GridSpec,
    curves: Option<&SingularCurveSet>,
) -> Result<RegionMap> {
    if !(grid.rho2_max > grid.rho2_min && grid.rho3_max > grid.rho3_min && grid.rho2_min >= 0.0 && grid.rho3_min >= 0.0)
    {
        return Err(Error::InvalidInput(
            "grid bounds must be non-negative and increasing".into(),
        ));
    }
    if grid.n2 == 0 || grid.n3 == 0 {
        return Err(Error::InvalidInput("grid must have at least one cell".into()));
    }
    let rods: Vec<[f64; 3]> = (0..grid.n2)
        .flat_map(|i| (0..grid.n3).map(move |j| (i, j)))
        .map(|(i, j)| {
            let (r2, r3) = grid.cell_center(i, j);
            [rho1, r2, r3]
        })
        .collect();
    let flat = count_batch(geom, &rods);
    let counts: Vec<Vec<u8>> = flat
        .chunks(grid.n3)
        .map(|c| c.iter().map(|&x| x as u8).collect())
        .collect();
    let (d2, d3) = grid.spacing();
    let boundary = match curves {
        Some(cs) => {
            let mut b = vec![vec![false; grid.n3]; grid.n2];
            for v in cs.vertices() {
                let fi = (v.rho2 - grid.rho2_min) / d2;
                let fj = (v.rho3 - grid.rho3_min) / d3;
                let (ci, cj) = (fi.floor() as isize, fj.floor() as isize);
                for di in -1..=1 {
                    for dj in -1..=1 {
                        let (i, j) = (ci + di, cj + dj);
                        if i >= 0 && j >= 0 && (i as usize) < grid.n2 && (j as usize) < grid.n3 {
                            b[i as usize][j as usize] = true;
                        }
                    }
                }
            }
            b
        }
        None => vec![vec![false; grid.n3]; grid.n2],
    };
    Ok(RegionMap {
        rho1,
        grid: *grid,
        counts,
        boundary,
    })
}

/// Slice CSV: `alpha_rad,theta1_rad,rho2,rho3,branch_id,residual`.
pub fn write_slice_csv(curves: &SingularCurveSet, mut out: impl Write, digits: usize) -> Result<()> {
    let p = digits.max(12);
    writeln!(out, "alpha_rad,theta1_rad,rho2,rho3,branch_id,residual")?;
    for (id, b) in curves.branches.iter().enumerate() {
        for v in &b.vertices {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                sig(v.alpha, p),
                sig(v.theta1, p),
                sig(v.rho2, p),
                sig(v.rho3, p),
                id,
                sig(v.residual, p)
            )?;
        }
    }
    Ok(())
}

/// `x` with `digits` significant digits, in plain or exponent form.
pub fn sig(x: f64, digits: usize) -> String {
    if x.is_zero() || !x.is_finite() {
        return format!("{x}");
    }
    let e = x.abs().log10().floor() as i32;
    if (-5..15).contains(&e) {
        let dec = (digits as i32 - 1 - e).max(0) as usize;
        format!("{x:.dec$}")
    } else {
        format!("{:.*e}", digits - 1, x)
    }
}

/// Points drawn as circles on top of the curves.
#[derive(Debug, Clone, Copy)]
pub struct Marker {
    pub rho2: f64,
    pub rho3: f64,
}

/// SVG of the curves in `(ρ₂, ρ₃)`, one path per branch.
pub fn slice_svg(curves: &SingularCurveSet, markers: &[Marker], regions: Option<&RegionMap>) -> String {
    let (e2, e3) = curves.extent();
    let (w2, w3) = match regions {
        Some(r) => (r.grid.rho2_max, r.grid.rho3_max),
        None => (1.2 * e2.max(1e-9), 1.2 * e3.max(1e-9)),
    };
    let size = 600.0;
    let pad = 40.0;
    let sx = |x: f64| pad + x / w2 * size;
    let sy = |y: f64| pad + size - y / w3 * size;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{0}" height="{0}" viewBox="0 0 {0} {0}">"#,
        size + 2.0 * pad
    );
    if let Some(r) = regions {
        let (d2, d3) = r.grid.spacing();
        for (i, row) in r.counts.iter().enumerate() {
            for (j, &c) in row.iter().enumerate() {
                let fill = match c {
                    0 => continue,
                    2 => "#dde8f4",
                    4 => "#a9c4e4",
                    _ => "#5d8fcb",
                };
                let x = r.grid.rho2_min + i as f64 * d2;
                let y = r.grid.rho3_min + (j + 1) as f64 * d3;
                let _ = writeln!(
                    s,
                    r#"<rect x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="{fill}"/>"#,
                    sx(x),
                    sy(y),
                    d2 / w2 * size + 0.05,
                    d3 / w3 * size + 0.05
                );
            }
        }
    }
    let _ = writeln!(
        s,
        r#"<rect x="{pad}" y="{pad}" width="{size}" height="{size}" fill="none" stroke="black"/>"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-size="14">rho2</text><text x="4" y="{}" font-size="14">rho3</text>"#,
        pad + size / 2.0,
        size + 2.0 * pad - 8.0,
        pad + size / 2.0
    );
    for b in &curves.branches {
        if b.vertices.is_empty() {
            continue;
        }
        let mut d = String::new();
        for (k, v) in b.vertices.iter().enumerate() {
            let _ = write!(
                d,
                "{}{:.3},{:.3} ",
                if k == 0 { "M" } else { "L" },
                sx(v.rho2),
                sy(v.rho3)
            );
        }
        if b.closed {
            d.push('Z');
        }
        let _ = writeln!(
            s,
            r#"<path d="{}" fill="none" stroke="black" stroke-width="1"/>"#,
            d.trim_end()
        );
    }
    for m in markers {
        let _ = writeln!(
            s,
            r#"<circle cx="{:.3}" cy="{:.3}" r="5" fill="none" stroke="red" stroke-width="1.5"/>"#,
            sx(m.rho2),
            sy(m.rho3)
        );
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::inverse_kinematics;
    use crate::geometry::PlatformPose;

    #[test]
    fn parallel_legs_are_singular() {
        let g = ManipulatorGeometry::reference();
        for phi in [-2.0, 0.0, 0.7, 3.0] {
            assert!(singularity_residual_task(&g, phi, phi, phi).abs() < 1e-12);
            let c = Configuration::new([5.0, 6.0, 7.0], [phi; 3]);
            assert!(legs_concurrent(&g, &c, 1e-12));
        }
    }

    #[test]
    fn closed_form_value() {
        let g = ManipulatorGeometry::reference();
        let v = singularity_residual_task(&g, 0.0, PI / 2.0, PI / 2.0);
        assert!((v - 15.91).abs() < 1e-12);
    }

    #[test]
    fn slice_form_is_scaled_task_form() {
        let g = ManipulatorGeometry::reference();
        let pose = PlatformPose::new(3.0, 9.0, 0.4);
        let c = inverse_kinematics(&g, &pose).unwrap();
        let s = SliceCoords::new(c.rho[0], 0.4, c.theta[0]);
        let slice = singularity_residual_slice(&g, &s).unwrap();
        let task = singularity_residual_task(&g, c.theta[0], c.theta[1], c.theta[2]);
        assert!((slice - c.rho[1] * c.rho[2] * task).abs() < 1e-10 * slice.abs().max(1.0));
        assert!(!legs_concurrent(&g, &c, 1e-8));
    }

    #[test]
    fn column_roots_are_zeros() {
        let g = ManipulatorGeometry::reference();
        for alpha in [-3.0, -1.0, 0.5, 2.2, PI] {
            for t in column_roots(&g, 17.0, alpha) {
                let v = slice_value(&g, &SliceCoords::new(17.0, alpha, t));
                assert!(v.abs() < 1e-8 * 1e4, "{alpha} {t} {v}");
            }
        }
    }

    #[test]
    fn traced_vertices_are_singular() {
        let g = ManipulatorGeometry::reference();
        let cs = trace_slice_curves(&g, 14.98, 256).unwrap();
        assert!(cs.vertex_count() > 100);
        for v in cs.vertices() {
            assert!(v.residual.abs() <= TOL_SING, "{v:?}");
            assert!(v.det_residual.abs() <= TOL_SING, "{v:?}");
            let c = config_from_slice(&g, &v.slice(14.98)).unwrap();
            assert!(legs_concurrent(&g, &c, 1e-7));
        }
    }

    #[test]
    fn significant_digits() {
        assert_eq!(sig(1.5, 4), "1.500");
        assert_eq!(sig(-0.0123456, 3), "-0.0123");
        assert_eq!(sig(1.0e20, 3), "1.00e20");
    }
}
