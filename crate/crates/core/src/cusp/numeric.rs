//! Cusp oracle that works on the traced singular curve alone.
//!
//! Along a branch the image `(ρ₂, ρ₃)` reverses direction at a cusp. Each
//! reversal seeds a Newton solve for `F = 0` together with the component of
//! the image velocity along the incoming direction; converged points are
//! checked by direct kinematics like the algebraic candidates.

use rayon::prelude::*;

use super::{sort_and_dedup, verify_triple_coincidence_eps, CuspOptions, CuspPoint, CuspSource};
use crate::error::Result;
use crate::geometry::{config_from_slice, wrap_angle, ManipulatorGeometry, SliceCoords};
use crate::kinematics::default_eps_cluster;
use crate::singular_slice::{slice_value, trace_slice_curves, CurveVertex};

/// α-columns traced by default.
pub const DEFAULT_RESOLUTION: usize = 4096;

const FD_STEP: f64 = 1e-6;

pub fn find_cusps_numeric(geom: &ManipulatorGeometry, rho1: f64, resolution: usize) -> Result<Vec<CuspPoint>> {
    find_cusps_numeric_with(
        geom,
        rho1,
        &CuspOptions {
            resolution,
            ..CuspOptions::default()
        },
    )
}

pub fn find_cusps_numeric_with(geom: &ManipulatorGeometry, rho1: f64, opts: &CuspOptions) -> Result<Vec<CuspPoint>> {
    let curves = trace_slice_curves(geom, rho1, opts.resolution)?;
    let eps = opts.eps_cluster.unwrap_or_else(|| default_eps_cluster(geom));
    let mut seeds = Vec::new();
    for b in &curves.branches {
        seeds.extend(reversal_seeds(&b.vertices, b.closed));
    }
    let found: Vec<CuspPoint> = seeds
        .par_iter()
        .filter_map(|&(v, dir)| {
            let (alpha, theta1) = refine(geom, rho1, v.alpha, v.theta1, dir)?;
            let ver = verify_triple_coincidence_eps(geom, rho1, alpha, theta1, eps).ok()?;
            ver.verified.then_some(CuspPoint {
                rho1,
                alpha: wrap_angle(alpha),
                theta1: wrap_angle(theta1),
                rho2: ver.rho2,
                rho3: ver.rho3,
                verified: true,
                cluster_gap: ver.cluster_gap,
                source: CuspSource::Numeric,
            })
        })
        .collect();
    Ok(sort_and_dedup(found))
}

/// Vertices where consecutive image steps point in opposite directions,
/// with the unit direction of the incoming step.
fn reversal_seeds(vs: &[CurveVertex], closed: bool) -> Vec<(CurveVertex, [f64; 2])> {
    let n = vs.len();
    if n < 3 {
        return Vec::new();
    }
    let step = |i: usize, j: usize| [vs[j].rho2 - vs[i].rho2, vs[j].rho3 - vs[i].rho3];
    let range: Box<dyn Iterator<Item = usize>> = if closed { Box::new(0..n) } else { Box::new(1..n - 1) };
    let mut out = Vec::new();
    for k in range {
        let (p, q) = ((k + n - 1) % n, (k + 1) % n);
        let a = step(p, k);
        let b = step(k, q);
        if a[0] * b[0] + a[1] * b[1] < 0.0 {
            let na = a[0].hypot(a[1]);
            if na > 0.0 {
                out.push((vs[k], [a[0] / na, a[1] / na]));
            }
        }
    }
    out
}

struct Local<'a> {
    geom: &'a ManipulatorGeometry,
    rho1: f64,
    dir: [f64; 2],
}

impl Local<'_> {
    fn f(&self, a: f64, t: f64) -> f64 {
        slice_value(
            self.geom,
            &SliceCoords {
                rho1: self.rho1,
                alpha: a,
                theta1: t,
            },
        )
    }

    fn grad_f(&self, a: f64, t: f64) -> [f64; 2] {
        let h = FD_STEP;
        [
            (self.f(a + h, t) - self.f(a - h, t)) / (2.0 * h),
            (self.f(a, t + h) - self.f(a, t - h)) / (2.0 * h),
        ]
    }

    fn rho23(&self, a: f64, t: f64) -> Option<[f64; 2]> {
        let c = config_from_slice(
            self.geom,
            &SliceCoords {
                rho1: self.rho1,
                alpha: a,
                theta1: t,
            },
        )
        .ok()?;
        Some([c.rho[1], c.rho[2]])
    }

    /// Image velocity along the unit tangent of the level set of `F`,
    /// projected on `dir`.
    fn speed(&self, a: f64, t: f64) -> Option<f64> {
        let g = self.grad_f(a, t);
        let n = g[0].hypot(g[1]);
        if n == 0.0 {
            return None;
        }
        let tau = [-g[1] / n, g[0] / n];
        let h = 1e-5;
        let p = self.rho23(a + h * tau[0], t + h * tau[1])?;
        let m = self.rho23(a - h * tau[0], t - h * tau[1])?;
        Some(((p[0] - m[0]) * self.dir[0] + (p[1] - m[1]) * self.dir[1]) / (2.0 * h))
    }
}

/// Newton on `(F, speed)` from a seed vertex.
fn refine(geom: &ManipulatorGeometry, rho1: f64, alpha: f64, theta1: f64, dir: [f64; 2]) -> Option<(f64, f64)> {
    let loc = Local { geom, rho1, dir };
    let (mut a, mut t) = (alpha, theta1);
    let h = 1e-5;
    for _ in 0..40 {
        let f = loc.f(a, t);
        let s = loc.speed(a, t)?;
        let gf = loc.grad_f(a, t);
        let sa = (loc.speed(a + h, t)? - loc.speed(a - h, t)?) / (2.0 * h);
        let st = (loc.speed(a, t + h)? - loc.speed(a, t - h)?) / (2.0 * h);
        let det = gf[0] * st - gf[1] * sa;
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        let da = (f * st - gf[1] * s) / det;
        let dt = (gf[0] * s - f * sa) / det;
        let len = da.hypot(dt);
        let damp = if len > 0.05 { 0.05 / len } else { 1.0 };
        a -= damp * da;
        t -= damp * dt;
        if (a - alpha).abs() > 0.2 || wrap_angle(t - theta1).abs() > 0.2 {
            return None;
        }
        if len < 1e-13 {
            break;
        }
    }
    Some((a, t))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_on_a_folded_polyline() {
        let mk = |r2: f64, r3: f64| CurveVertex {
            alpha: 0.0,
            theta1: 0.0,
            rho2: r2,
            rho3: r3,
            residual: 0.0,
            det_residual: 0.0,
        };
        let vs = vec![mk(0.0, 0.0), mk(1.0, 0.1), mk(2.0, 0.0), mk(1.0, -0.1), mk(0.5, 0.0)];
        let s = reversal_seeds(&vs, false);
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].0.rho2, 2.0);
    }
}
