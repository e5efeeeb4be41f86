//! Direct kinematics, solution clustering and assembly-mode counting.
//!
//! For a fixed orientation `α` the two rod equations of legs 2 and 3, taken
//! relative to leg 1, are linear in `B₁`. Solving them by Cramer's rule and
//! substituting into `|B₁|² = ρ₁²` leaves a trigonometric polynomial of
//! degree 4 in `α`. Its tan-half form has degree 8 and always carries the
//! factor `1 + t²`, whose roots are discarded as non-real, so at most six
//! real solutions remain.

use rayon::prelude::*;
use serde::Serialize;

use crate::geometry::{angle_distance, inverse_kinematics, wrap_angle, ManipulatorGeometry, PlatformPose, Point};
use crate::polyalg::numeric::{complex_roots, tan_half_from_samples};

/// Joint vector `(ρ₁, ρ₂, ρ₃)`.
pub type RodLengths = [f64; 3];

/// One assembly mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DKSolution {
    pub pose: PlatformPose,
    pub theta1: f64,
    /// Largest rod residual `|ρ_i(pose) − ρ_i|` relative to the joint scale.
    pub residual: f64,
}

/// All assembly modes at a joint vector.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DKSolutionSet {
    pub rods: RodLengths,
    /// Sorted by `(α, θ₁)`.
    pub poses: Vec<DKSolution>,
    pub eps_cluster: f64,
    /// Indices into `poses`, grouped by coincidence.
    pub clusters: Vec<Vec<usize>>,
    /// Candidates that could not be polished onto a solution.
    pub diagnostics: Vec<String>,
}

impl DKSolutionSet {
    pub fn count(&self) -> usize {
        self.poses.len()
    }

    /// Largest cluster size.
    pub fn max_multiplicity(&self) -> usize {
        self.clusters.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Number of distinct assembly modes.
    pub fn distinct(&self) -> usize {
        self.clusters.len()
    }

    /// Largest pairwise distance inside a cluster.
    pub fn cluster_gap(&self, cluster: &[usize], d1: f64) -> f64 {
        let mut gap = 0.0f64;
        for (k, &i) in cluster.iter().enumerate() {
            for &j in &cluster[k + 1..] {
                gap = gap.max(self.poses[i].pose.distance(&self.poses[j].pose, d1));
            }
        }
        gap
    }
}

/// Default clustering radius.
pub fn default_eps_cluster(geom: &ManipulatorGeometry) -> f64 {
    1e-4 * geom.mean_side()
}

const MAX_NEWTON: usize = 50;
const RESIDUAL_TOL: f64 = 1e-9;
const IMAG_TOL: f64 = 1e-3;

/// Orientation-dependent pieces of the reduced system.
struct Reduced {
    d: f64,
    nx: f64,
    ny: f64,
}

fn reduced(geom: &ManipulatorGeometry, rods: &RodLengths, alpha: f64) -> Reduced {
    let (sa, ca) = alpha.sin_cos();
    let p = geom.d3_cos_beta();
    let h = geom.h();
    let w2 = Point::new(geom.d1 * ca - geom.a2x, geom.d1 * sa);
    let w3 = Point::new(p * ca - h * sa - geom.a3x, p * sa + h * ca - geom.a3y);
    let r1 = rods[0] * rods[0];
    let r2 = rods[1] * rods[1] - r1 - w2.norm_squared();
    let r3 = rods[2] * rods[2] - r1 - w3.norm_squared();
    Reduced {
        d: 2.0 * (w2.x * w3.y - w2.y * w3.x),
        nx: r2 * w3.y - r3 * w2.y,
        ny: w2.x * r3 - w3.x * r2,
    }
}

fn reduced_value(geom: &ManipulatorGeometry, rods: &RodLengths, alpha: f64) -> f64 {
    let r = reduced(geom, rods, alpha);
    r.nx * r.nx + r.ny * r.ny - rods[0] * rods[0] * r.d * r.d
}

/// Ascending coefficients of `(1 + t²)⁴ P(α)` with `t = tan(α/2)`.
fn tan_half_coefficients(geom: &ManipulatorGeometry, rods: &RodLengths) -> Vec<f64> {
    tan_half_from_samples(|a| reduced_value(geom, rods, a), 4)
}

/// Rod residuals `|B_i − A_i|² − ρ_i²` for legs 2 and 3 at `(θ₁, α)`.
fn leg_residuals(geom: &ManipulatorGeometry, rods: &RodLengths, theta1: f64, alpha: f64) -> ([f64; 2], [[f64; 2]; 2]) {
    let pose = PlatformPose::new(rods[0] * theta1.cos(), rods[0] * theta1.sin(), alpha);
    let v = geom.pose_vertices(&pose);
    let anchors = geom.anchors();
    let db1 = Point::new(-rods[0] * theta1.sin(), rods[0] * theta1.cos());
    let mut g = [0.0; 2];
    let mut jac = [[0.0; 2]; 2];
    for (k, i) in [1usize, 2].into_iter().enumerate() {
        let leg = v[i] - anchors[i];
        let arm = v[i] - v[0];
        let darm = Point::new(-arm.y, arm.x);
        g[k] = leg.norm_squared() - rods[i] * rods[i];
        jac[k] = [2.0 * leg.dot(&db1), 2.0 * leg.dot(&darm)];
    }
    (g, jac)
}

fn joint_scale(geom: &ManipulatorGeometry, rods: &RodLengths) -> f64 {
    rods.iter().copied().fold(
        geom.base_scale().max(geom.sides().iter().copied().fold(0.0, f64::max)),
        f64::max,
    )
}

/// Damped Newton on the two rod equations in `(θ₁, α)`.
fn polish(geom: &ManipulatorGeometry, rods: &RodLengths, theta1: f64, alpha: f64) -> Option<(f64, f64, f64)> {
    let scale = joint_scale(geom, rods);
    let norm = |g: &[f64; 2]| g[0].abs().max(g[1].abs()) / (scale * scale);
    let (mut th, mut al) = (theta1, alpha);
    let (mut g, mut jac) = leg_residuals(geom, rods, th, al);
    let mut res = norm(&g);
    for _ in 0..MAX_NEWTON {
        if res <= 1e-15 {
            break;
        }
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        let (dth, dal) = if det.abs() > 1e-300 {
            (
                (g[0] * jac[1][1] - g[1] * jac[0][1]) / det,
                (jac[0][0] * g[1] - jac[1][0] * g[0]) / det,
            )
        } else {
            break;
        };
        let mut lambda = 1.0;
        let mut improved = false;
        for _ in 0..30 {
            let (nt, na) = (th - lambda * dth, al - lambda * dal);
            let (ng, nj) = leg_residuals(geom, rods, nt, na);
            let nr = norm(&ng);
            if nr < res {
                th = nt;
                al = na;
                g = ng;
                jac = nj;
                res = nr;
                improved = true;
                break;
            }
            lambda *= 0.5;
        }
        if !improved {
            break;
        }
    }
    Some((wrap_angle(th), wrap_angle(al), res))
}

/// Largest relative rod-length error of a pose.
pub fn rod_residual(geom: &ManipulatorGeometry, rods: &RodLengths, pose: &PlatformPose) -> f64 {
    let scale = joint_scale(geom, rods);
    match inverse_kinematics(geom, pose) {
        Ok(c) => (0..3).map(|i| (c.rho[i] - rods[i]).abs()).fold(0.0, f64::max) / scale,
        Err(_) => {
            let v = geom.pose_vertices(pose);
            let a = geom.anchors();
            (0..3)
                .map(|i| ((v[i] - a[i]).norm() - rods[i]).abs())
                .fold(0.0, f64::max)
                / scale
        }
    }
}

/// All real assembly modes at the joint vector `rods`.
pub fn direct_kinematics(geom: &ManipulatorGeometry, rods: &RodLengths) -> DKSolutionSet {
    direct_kinematics_with(geom, rods, default_eps_cluster(geom))
}

pub fn direct_kinematics_with(geom: &ManipulatorGeometry, rods: &RodLengths, eps_cluster: f64) -> DKSolutionSet {
    let mut set = DKSolutionSet {
        rods: *rods,
        poses: Vec::new(),
        eps_cluster,
        clusters: Vec::new(),
        diagnostics: Vec::new(),
    };
    if rods.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
        set.diagnostics.push(format!("invalid rod lengths {rods:?}"));
        return set;
    }
    let coeffs = tan_half_coefficients(geom, rods);
    let roots = complex_roots(&coeffs, 1e-13);
    if roots.roots.is_empty() && roots.at_infinity == 0 {
        set.diagnostics.push("reduced polynomial vanishes identically".into());
        return set;
    }
    let mut alphas: Vec<f64> = roots
        .roots
        .iter()
        .filter(|z| z.im.abs() <= IMAG_TOL * (1.0 + z.norm_sqr()))
        .map(|z| 2.0 * z.re.atan())
        .collect();
    // Roots lost at t = ∞ sit at α = π; the (1 + t²) factor never reaches there.
    alphas.extend(std::iter::repeat_n(std::f64::consts::PI, roots.at_infinity));
    let mut sols = Vec::new();
    for alpha in alphas {
        let r = reduced(geom, rods, alpha);
        let theta1 = if rods[0] == 0.0 { 0.0 } else { r.ny.atan2(r.nx) };
        let theta1 = if r.d < 0.0 {
            wrap_angle(theta1 + std::f64::consts::PI)
        } else {
            theta1
        };
        match polish(geom, rods, theta1, alpha) {
            Some((th, al, res)) if res <= RESIDUAL_TOL => {
                let pose = PlatformPose::new(rods[0] * th.cos(), rods[0] * th.sin(), al);
                let residual = rod_residual(geom, rods, &pose);
                sols.push(DKSolution {
                    pose,
                    theta1: th,
                    residual,
                });
            }
            Some((_, al, res)) => set
                .diagnostics
                .push(format!("candidate alpha={al:.6} stuck at residual {res:.3e}")),
            None => set.diagnostics.push(format!("candidate alpha={alpha:.6} failed")),
        }
    }
    sols.sort_by(|a, b| {
        a.pose
            .alpha
            .total_cmp(&b.pose.alpha)
            .then(a.theta1.total_cmp(&b.theta1))
    });
    set.poses = sols;
    set.clusters = cluster_solutions(&set.poses, eps_cluster, geom.d1);
    set
}

/// Transitive closure of pose coincidence within `eps_cluster`.
pub fn cluster_solutions(poses: &[DKSolution], eps_cluster: f64, d1: f64) -> Vec<Vec<usize>> {
    let n = poses.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        let mut j = i;
        while p[j] != r {
            let next = p[j];
            p[j] = r;
            j = next;
        }
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            if poses[i].pose.distance(&poses[j].pose, d1) <= eps_cluster {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[b.max(a)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_slot = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if root_slot[r] == usize::MAX {
            root_slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[root_slot[r]].push(i);
    }
    groups
}

/// Number of distinct assembly modes.
pub fn count_assembly_modes(geom: &ManipulatorGeometry, rods: &RodLengths) -> usize {
    direct_kinematics(geom, rods).distinct()
}

/// Assembly-mode counts over many joint vectors.
pub fn count_batch(geom: &ManipulatorGeometry, rods: &[RodLengths]) -> Vec<usize> {
    rods.par_iter().map(|r| count_assembly_modes(geom, r)).collect()
}

/// Whether a solution set contains `pose` up to `tol` in pose distance.
pub fn contains_pose(set: &DKSolutionSet, pose: &PlatformPose, d1: f64, tol: f64) -> bool {
    set.poses
        .iter()
        .any(|s| (s.pose.b1 - pose.b1).norm() <= tol && d1 * angle_distance(s.pose.alpha, pose.alpha) <= tol)
}
