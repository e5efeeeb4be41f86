//! First- and second-order derivatives of the loop-closure constraints, the
//! adjugate of `∂Γ/∂θ`, kernel extraction and the cusp condition.
//!
//! All formulas are written in terms of the leg vectors `ρ₂(c₂, s₂)` and
//! `ρ₃(c₃, s₃)` instead of angles, which keeps them polynomial. [`LegTerms`]
//! is generic over the scalar so the same code evaluates numbers and builds
//! the trigonometric polynomials of the elimination pipeline.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::geometry::{platform_points, Configuration, ManipulatorGeometry};

/// Commutative ring operations needed by the constraint formulas.
pub trait Ring: Clone + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self> {}

impl<T> Ring for T where T: Clone + Add<Output = T> + Sub<Output = T> + Mul<Output = T> + Neg<Output = T> {}

pub type Mat3<T> = [[T; 3]; 3];

/// Polynomial coordinates of a configuration.
///
/// `x2, y2` are the components of `B₂ − A₂ = ρ₂(c₂, s₂)` and `x3, y3` those
/// of `B₃ − A₃`.
#[derive(Debug, Clone)]
pub struct LegTerms<T> {
    pub rho1: T,
    pub c1: T,
    pub s1: T,
    pub x2: T,
    pub y2: T,
    pub x3: T,
    pub y3: T,
    pub a2x: T,
    pub a3x: T,
    pub a3y: T,
}

fn twice<T: Ring>(x: T) -> T {
    x.clone() + x
}

impl LegTerms<f64> {
    pub fn from_config(geom: &ManipulatorGeometry, config: &Configuration) -> Self {
        let [r1, r2, r3] = config.rho;
        let (s1, c1) = config.theta[0].sin_cos();
        let (s2, c2) = config.theta[1].sin_cos();
        let (s3, c3) = config.theta[2].sin_cos();
        LegTerms {
            rho1: r1,
            c1,
            s1,
            x2: r2 * c2,
            y2: r2 * s2,
            x3: r3 * c3,
            y3: r3 * s3,
            a2x: geom.a2x,
            a3x: geom.a3x,
            a3y: geom.a3y,
        }
    }
}

impl<T: Ring> LegTerms<T> {
    /// `(s₁X₂ − c₁Y₂)`, i.e. `ρ₂ sin(θ₁ − θ₂)`.
    fn cross12(&self) -> T {
        self.s1.clone() * self.x2.clone() - self.c1.clone() * self.y2.clone()
    }

    /// `ρ₃ sin(θ₁ − θ₃)`.
    fn cross13(&self) -> T {
        self.s1.clone() * self.x3.clone() - self.c1.clone() * self.y3.clone()
    }

    /// `ρ₂ρ₃ sin(θ₂ − θ₃)`.
    fn cross23(&self) -> T {
        self.y2.clone() * self.x3.clone() - self.x2.clone() * self.y3.clone()
    }

    /// Leg-axis singularity expression, scaled by `ρ₂ρ₃` so it stays
    /// polynomial: `A₂ₓ s₂ s₃₁ + (A₃ₓ s₃ − A₃ᵧ c₃) s₁₂`.
    pub fn singularity(&self) -> T {
        let s31 = self.y3.clone() * self.c1.clone() - self.x3.clone() * self.s1.clone();
        self.a2x.clone() * self.y2.clone() * s31
            + (self.a3x.clone() * self.y3.clone() - self.a3y.clone() * self.x3.clone()) * self.cross12()
    }

    /// The six factors with `∂Γ/∂θ = [[k₆, k₅, 0], [0, k₁, k₃], [k₄, 0, k₂]]`.
    pub fn k_factors(&self) -> [T; 6] {
        let c = self;
        let d32 = c.a3x.clone() - c.a2x.clone();
        let k1 = twice(d32.clone() * c.y2.clone() + c.cross23() - c.a3y.clone() * c.x2.clone());
        let k2 = -twice(c.rho1.clone() * c.cross13() + c.a3x.clone() * c.y3.clone() - c.a3y.clone() * c.x3.clone());
        let k3 = -twice(d32 * c.y3.clone() + c.cross23() - c.a3y.clone() * c.x3.clone());
        let k4 = twice(c.rho1.clone() * (c.cross13() + c.a3x.clone() * c.s1.clone() - c.a3y.clone() * c.c1.clone()));
        let k5 = -twice(c.rho1.clone() * c.cross12() + c.a2x.clone() * c.y2.clone());
        let k6 = twice(c.rho1.clone() * (c.cross12() + c.a2x.clone() * c.s1.clone()));
        [k1, k2, k3, k4, k5, k6]
    }

    pub fn jacobian(&self, zero: T) -> Mat3<T> {
        let [k1, k2, k3, k4, k5, k6] = self.k_factors();
        [[k6, k5, zero.clone()], [zero.clone(), k1, k3], [k4, zero, k2]]
    }

    /// Adjugate of `∂Γ/∂θ` in terms of the k-factors.
    pub fn adjugate(&self) -> Mat3<T> {
        adjugate_from_k(&self.k_factors())
    }

    /// `∂²Γ₁/∂θ²`, `∂²Γ₂/∂θ²`, `∂²Γ₃/∂θ²`.
    pub fn hessians(&self, zero: T) -> [Mat3<T>; 3] {
        let c = self;
        let z = || zero.clone();
        let p21 = c.x2.clone() * c.c1.clone() + c.y2.clone() * c.s1.clone();
        let p31 = c.x3.clone() * c.c1.clone() + c.y3.clone() * c.s1.clone();
        let p23 = c.x2.clone() * c.x3.clone() + c.y2.clone() * c.y3.clone();
        let d23 = c.a2x.clone() - c.a3x.clone();

        let h1_11 = twice(c.rho1.clone() * (c.a2x.clone() * c.c1.clone() + p21.clone()));
        let h1_12 = -twice(c.rho1.clone() * p21.clone());
        let h1_22 = twice(c.rho1.clone() * p21 - c.a2x.clone() * c.x2.clone());

        let h2_22 = twice(p23.clone() + c.a3y.clone() * c.y2.clone() - d23.clone() * c.x2.clone());
        let h2_23 = -twice(p23.clone());
        let h2_33 = twice(d23 * c.x3.clone() + p23 - c.a3y.clone() * c.y3.clone());

        let h3_11 = twice(c.rho1.clone() * (c.a3x.clone() * c.c1.clone() + p31.clone() + c.a3y.clone() * c.s1.clone()));
        let h3_13 = -twice(c.rho1.clone() * p31.clone());
        let h3_33 = twice(c.rho1.clone() * p31 - c.a3x.clone() * c.x3.clone() - c.a3y.clone() * c.y3.clone());

        [
            [[h1_11, h1_12.clone(), z()], [h1_12, h1_22, z()], [z(), z(), z()]],
            [[z(), z(), z()], [z(), h2_22, h2_23.clone()], [z(), h2_23, h2_33]],
            [[h3_11, z(), h3_13.clone()], [z(), z(), z()], [h3_13, z(), h3_33]],
        ]
    }

    /// `vᵀ[Σ uᵢ Hᵢ]v` with `u` the given adjugate row and `v` the given
    /// adjugate column, unnormalized.
    pub fn cusp_form(&self, row: usize, col: usize, zero: T) -> T {
        let adj = self.adjugate();
        let u = adj[row].clone();
        let v = [adj[0][col].clone(), adj[1][col].clone(), adj[2][col].clone()];
        let hs = self.hessians(zero.clone());
        let mut total = zero.clone();
        for (ui, h) in u.into_iter().zip(hs.iter()) {
            let mut quad = zero.clone();
            for a in 0..3 {
                for b in 0..3 {
                    quad = quad + v[a].clone() * h[a][b].clone() * v[b].clone();
                }
            }
            total = total + ui * quad;
        }
        total
    }
}

pub fn adjugate_from_k<T: Ring>(k: &[T; 6]) -> Mat3<T> {
    let [k1, k2, k3, k4, k5, k6] = k.clone();
    [
        [
            k1.clone() * k2.clone(),
            -(k2.clone() * k5.clone()),
            k3.clone() * k5.clone(),
        ],
        [
            k3.clone() * k4.clone(),
            k2.clone() * k6.clone(),
            -(k3.clone() * k6.clone()),
        ],
        [-(k1.clone() * k4.clone()), k4 * k5, k1 * k6],
    ]
}

fn to_matrix(m: &Mat3<f64>) -> Matrix3<f64> {
    Matrix3::from_fn(|i, j| m[i][j])
}

/// Both constraint Jacobians at a configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstraintJacobian {
    pub j_theta: Matrix3<f64>,
    pub j_rho: Matrix3<f64>,
}

pub fn constraint_jacobian(geom: &ManipulatorGeometry, config: &Configuration) -> ConstraintJacobian {
    ConstraintJacobian {
        j_theta: jacobian_theta(geom, config),
        j_rho: jacobian_rho(geom, config),
    }
}

/// `∂Γ/∂θ`.
pub fn jacobian_theta(geom: &ManipulatorGeometry, config: &Configuration) -> Matrix3<f64> {
    to_matrix(&LegTerms::from_config(geom, config).jacobian(0.0))
}

/// `∂Γ/∂L`.
pub fn jacobian_rho(geom: &ManipulatorGeometry, config: &Configuration) -> Matrix3<f64> {
    let [b1, b2, b3] = platform_points(geom, config);
    let e: [_; 3] = std::array::from_fn(|i| {
        let (s, c) = config.theta[i].sin_cos();
        nalgebra::Vector2::new(c, s)
    });
    let (d12, d23, d31) = (b2 - b1, b3 - b2, b1 - b3);
    Matrix3::new(
        -2.0 * d12.dot(&e[0]),
        2.0 * d12.dot(&e[1]),
        0.0,
        0.0,
        -2.0 * d23.dot(&e[1]),
        2.0 * d23.dot(&e[2]),
        2.0 * d31.dot(&e[0]),
        0.0,
        -2.0 * d31.dot(&e[2]),
    )
}

/// Second derivatives `∂²Γᵢ/∂θ²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HessianTriple {
    pub h: [Matrix3<f64>; 3],
}

impl HessianTriple {
    /// Largest absolute entry over the three matrices.
    pub fn max_abs(&self) -> f64 {
        self.h.iter().map(|m| m.amax()).fold(0.0, f64::max)
    }
}

pub fn hessians_theta(geom: &ManipulatorGeometry, config: &Configuration) -> HessianTriple {
    let hs = LegTerms::from_config(geom, config).hessians(0.0);
    HessianTriple {
        h: [to_matrix(&hs[0]), to_matrix(&hs[1]), to_matrix(&hs[2])],
    }
}

/// The k-factors and the adjugate they assemble.
pub fn adjoint_k_factors(geom: &ManipulatorGeometry, config: &Configuration) -> ([f64; 6], Matrix3<f64>) {
    let k = LegTerms::from_config(geom, config).k_factors();
    (k, to_matrix(&adjugate_from_k(&k)))
}

/// `8ρ₁ρ₂ρ₃·max(A₂ₓ, A₃ₓ, A₃ᵧ)²`, the scale of `det ∂Γ/∂θ`.
pub fn det_scale(geom: &ManipulatorGeometry, config: &Configuration) -> f64 {
    let b = geom.base_scale();
    8.0 * config.rho[0] * config.rho[1] * config.rho[2] * b * b
}

/// `det(∂Γ/∂θ)` divided by [`det_scale`].
pub fn normalized_det(geom: &ManipulatorGeometry, config: &Configuration) -> f64 {
    jacobian_theta(geom, config).determinant() / det_scale(geom, config)
}

pub const TOL_SING: f64 = 1e-8;
pub const TOL_KERNEL: f64 = 1e-7;
pub const TOL_CUSP: f64 = 1e-6;

/// Unit left and right kernel vectors of `∂Γ/∂θ` taken from the adjugate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelPair {
    pub k: [f64; 6],
    pub u: Vector3<f64>,
    pub v: Vector3<f64>,
    pub row_index: usize,
    pub col_index: usize,
    /// `|uᵀJ|` and `|Jv|` divided by the largest entry of `J`.
    pub left_residual: f64,
    pub right_residual: f64,
    /// Set when the adjugate vanished and the vectors came from the SVD.
    pub from_svd: bool,
}

fn residuals(j: &Matrix3<f64>, u: &Vector3<f64>, v: &Vector3<f64>) -> (f64, f64) {
    let scale = j.amax().max(f64::MIN_POSITIVE);
    ((j.transpose() * u).norm() / scale, (j * v).norm() / scale)
}

/// Kernel vectors from the adjugate row and column of largest norm.
///
/// Fails with [`Error::RankDeficientAdjoint`] when the whole adjugate is
/// negligible, i.e. `rank ∂Γ/∂θ ≤ 1`; see [`kernel_vectors_svd`].
pub fn kernel_vectors(geom: &ManipulatorGeometry, config: &Configuration) -> Result<KernelPair> {
    let j = jacobian_theta(geom, config);
    let (k, adj) = adjoint_k_factors(geom, config);
    let scale = j.amax().powi(2);
    let (row_index, row_norm) =
        (0..3)
            .map(|i| (i, adj.row(i).norm()))
            .fold((0, -1.0), |best, c| if c.1 > best.1 { c } else { best });
    let (col_index, col_norm) =
        (0..3)
            .map(|i| (i, adj.column(i).norm()))
            .fold((0, -1.0), |best, c| if c.1 > best.1 { c } else { best });
    if !(row_norm > TOL_KERNEL * scale && col_norm > TOL_KERNEL * scale) {
        return Err(Error::RankDeficientAdjoint);
    }
    let u = adj.row(row_index).transpose() / row_norm;
    let v = adj.column(col_index) / col_norm;
    let (left_residual, right_residual) = residuals(&j, &u, &v);
    Ok(KernelPair {
        k,
        u,
        v,
        row_index,
        col_index,
        left_residual,
        right_residual,
        from_svd: false,
    })
}

/// Kernel vectors from the smallest singular direction, for points where
/// the adjugate vanishes. The result is flagged with `from_svd`.
pub fn kernel_vectors_svd(geom: &ManipulatorGeometry, config: &Configuration) -> KernelPair {
    let j = jacobian_theta(geom, config);
    let (k, _) = adjoint_k_factors(geom, config);
    let svd = j.svd(true, true);
    let idx = svd.singular_values.imin();
    let u = svd.u.expect("requested").column(idx).into_owned();
    let v = svd.v_t.expect("requested").row(idx).transpose();
    let (left_residual, right_residual) = residuals(&j, &u, &v);
    KernelPair {
        k,
        u,
        v,
        row_index: usize::MAX,
        col_index: usize::MAX,
        left_residual,
        right_residual,
        from_svd: true,
    }
}

/// `vᵀ[u₁H₁ + u₂H₂ + u₃H₃]v` for unit `u, v`, divided by the largest Hessian
/// entry. Invariant under sign and scale of the kernel vectors.
pub fn cusp_condition(geom: &ManipulatorGeometry, config: &Configuration) -> Result<f64> {
    let kp = kernel_vectors(geom, config)?;
    let hs = hessians_theta(geom, config);
    Ok(cusp_value(&kp.u, &kp.v, &hs))
}

/// Normalized cusp value for arbitrary (not necessarily unit) `u, v`.
pub fn cusp_value(u: &Vector3<f64>, v: &Vector3<f64>, hs: &HessianTriple) -> f64 {
    let m = hs.h[0] * u[0] + hs.h[1] * u[1] + hs.h[2] * u[2];
    let raw = v.dot(&(m * v));
    let norm = u.norm() * v.norm_squared() * hs.max_abs();
    if norm == 0.0 {
        0.0
    } else {
        raw / norm
    }
}

/// The cusp condition with `u` the first adjugate row and `v` the first
/// adjugate column, normalized like [`cusp_condition`].
pub fn cusp_condition_first(geom: &ManipulatorGeometry, config: &Configuration) -> f64 {
    let (_, adj) = adjoint_k_factors(geom, config);
    let u = adj.row(0).transpose();
    let v = adj.column(0).into_owned();
    cusp_value(&u, &v, &hessians_theta(geom, config))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{constraint_residuals, inverse_kinematics, PlatformPose};
    use proptest::prelude::*;

    fn random_config(x: f64, y: f64, alpha: f64) -> Option<Configuration> {
        let g = ManipulatorGeometry::reference();
        inverse_kinematics(&g, &PlatformPose::new(x, y, alpha)).ok()
    }

    fn gamma_theta(g: &ManipulatorGeometry, c: &Configuration, th: [f64; 3]) -> [f64; 3] {
        constraint_residuals(g, &Configuration { rho: c.rho, theta: th })
    }

    #[test]
    fn parallel_legs_jacobian() {
        let g = ManipulatorGeometry::reference();
        let c = Configuration::new([1.0; 3], [0.0; 3]);
        let j = jacobian_theta(&g, &c);
        assert_eq!(j.row(0).amax(), 0.0);
        assert!((j[(1, 1)] + 20.0).abs() < 1e-12 && (j[(1, 2)] - 20.0).abs() < 1e-12);
        assert_eq!(j[(1, 0)], 0.0);
        assert!(j.determinant().abs() < 1e-9);
    }

    #[test]
    fn aligned_k_factors_vanish() {
        let g = ManipulatorGeometry::reference();
        let c = Configuration::new([2.0, 3.0, 4.0], [0.0; 3]);
        let (k, _) = adjoint_k_factors(&g, &c);
        assert_eq!(k[4], 0.0);
        assert_eq!(k[5], 0.0);
    }

    #[test]
    fn hessian_golden_entry() {
        let g = ManipulatorGeometry::reference();
        let c = Configuration::new([1.0; 3], [0.0; 3]);
        let h = hessians_theta(&g, &c);
        assert!((h.h[0][(0, 0)] - 33.82).abs() < 1e-12);
    }

    #[test]
    fn jacobian_rho_without_lengths() {
        let g = ManipulatorGeometry::reference();
        let c = Configuration::new([0.0; 3], [0.4, -1.2, 2.5]);
        assert!(jacobian_rho(&g, &c).iter().all(|x| x.is_finite()));
    }

    #[test]
    fn adjugate_matches_cofactors() {
        let g = ManipulatorGeometry::reference();
        let c = random_config(3.0, 4.0, 0.7).unwrap();
        let j = jacobian_theta(&g, &c);
        let (_, adj) = adjoint_k_factors(&g, &c);
        let mut cof = Matrix3::zeros();
        for r in 0..3 {
            for col in 0..3 {
                let minor = j.remove_row(r).remove_column(col).determinant();
                let sign = if (r + col) % 2 == 0 { 1.0 } else { -1.0 };
                cof[(col, r)] = sign * minor;
            }
        }
        assert!((adj - cof).amax() <= 1e-9 * cof.amax());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn jacobians_match_finite_differences(x in -20.0..20.0f64, y in -20.0..20.0f64, a in -3.1..3.1f64) {
            let g = ManipulatorGeometry::reference();
            let Some(c) = random_config(x, y, a) else { return Ok(()) };
            let jt = jacobian_theta(&g, &c);
            let jr = jacobian_rho(&g, &c);
            let step = 1e-6;
            for k in 0..3 {
                let mut tp = c.theta;
                let mut tm = c.theta;
                tp[k] += step;
                tm[k] -= step;
                let (gp, gm) = (gamma_theta(&g, &c, tp), gamma_theta(&g, &c, tm));
                let mut rp = c;
                let mut rm = c;
                let hr = step * c.rho[k].max(1.0);
                rp.rho[k] += hr;
                rm.rho[k] -= hr;
                let (rgp, rgm) = (constraint_residuals(&g, &rp), constraint_residuals(&g, &rm));
                for i in 0..3 {
                    let fd = (gp[i] - gm[i]) / (2.0 * step);
                    prop_assert!((fd - jt[(i, k)]).abs() <= 1e-6 * jt.amax());
                    let fdr = (rgp[i] - rgm[i]) / (2.0 * hr);
                    prop_assert!((fdr - jr[(i, k)]).abs() <= 1e-6 * jr.amax());
                }
            }
        }

        #[test]
        fn hessians_match_finite_differences(x in -20.0..20.0f64, y in -20.0..20.0f64, a in -3.1..3.1f64) {
            let g = ManipulatorGeometry::reference();
            let Some(c) = random_config(x, y, a) else { return Ok(()) };
            let hs = hessians_theta(&g, &c);
            let step = 1e-4;
            for p in 0..3 {
                for q in 0..3 {
                    let shifted = |dp: f64, dq: f64| {
                        let mut th = c.theta;
                        th[p] += dp;
                        th[q] += dq;
                        gamma_theta(&g, &c, th)
                    };
                    let pp = shifted(step, step);
                    let pm = shifted(step, -step);
                    let mp = shifted(-step, step);
                    let mm = shifted(-step, -step);
                    for i in 0..3 {
                        let fd = (pp[i] - pm[i] - mp[i] + mm[i]) / (4.0 * step * step);
                        prop_assert!((fd - hs.h[i][(p, q)]).abs() <= 1e-5 * hs.max_abs(),
                            "H{} ({},{}) fd {} vs {}", i + 1, p, q, fd, hs.h[i][(p, q)]);
                    }
                }
            }
            prop_assert_eq!(hs.h[0].row(2).amax(), 0.0);
            prop_assert_eq!(hs.h[1].row(0).amax(), 0.0);
            prop_assert_eq!(hs.h[2].row(1).amax(), 0.0);
            for h in &hs.h {
                prop_assert_eq!(*h, h.transpose());
            }
        }

        #[test]
        fn adjugate_identity(x in -20.0..20.0f64, y in -20.0..20.0f64, a in -3.1..3.1f64) {
            let g = ManipulatorGeometry::reference();
            let Some(c) = random_config(x, y, a) else { return Ok(()) };
            let j = jacobian_theta(&g, &c);
            let (_, adj) = adjoint_k_factors(&g, &c);
            let lhs = adj * j;
            let rhs = Matrix3::identity() * j.determinant();
            prop_assert!((lhs - rhs).amax() <= 1e-9 * j.amax().powi(3));
            prop_assert!((j * adj - rhs).amax() <= 1e-9 * j.amax().powi(3));
        }

        #[test]
        fn cusp_value_scale_invariant(x in -20.0..20.0f64, y in -20.0..20.0f64, a in -3.1..3.1f64, s in 0.1..10.0f64) {
            let g = ManipulatorGeometry::reference();
            let Some(c) = random_config(x, y, a) else { return Ok(()) };
            let kp = match kernel_vectors(&g, &c) { Ok(k) => k, Err(_) => return Ok(()) };
            let hs = hessians_theta(&g, &c);
            let base = cusp_value(&kp.u, &kp.v, &hs);
            prop_assert!((cusp_value(&(-kp.u), &kp.v, &hs) + base).abs() <= 1e-12);
            prop_assert!((cusp_value(&(kp.u * s), &(kp.v * -s), &hs) - base).abs() <= 1e-12);
        }
    }

    #[test]
    fn determinant_is_multiple_of_singularity() {
        let g = ManipulatorGeometry::reference();
        for (x, y, a) in [(3.0, 4.0, 0.7), (-5.0, 12.0, 2.0), (9.0, -3.0, -1.3)] {
            let c = random_config(x, y, a).unwrap();
            let lt = LegTerms::from_config(&g, &c);
            let det = jacobian_theta(&g, &c).determinant();
            // det ∂Γ/∂θ = 8ρ₁d₁h · (ρ₂ρ₃-scaled singularity expression)
            let ratio = det / (8.0 * c.rho[0] * g.d1 * g.h() * lt.singularity());
            assert!((ratio - 1.0).abs() < 1e-9, "{ratio}");
        }
    }
}
