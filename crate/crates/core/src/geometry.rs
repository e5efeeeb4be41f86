//! Manipulator parametrization, platform vertices, loop-closure residuals,
//! inverse kinematics and joint-space slice coordinates.
//!
//! The base frame has `A₁` at the origin and `A₂` on the positive x-axis.
//! Rod `i` joins base anchor `A_i` to platform vertex `B_i`; its length is
//! `ρ_i` and its direction angle `θ_i`. The platform is the rigid triangle
//! `B₁B₂B₃` with sides `d₁ = |B₁B₂|`, `d₂ = |B₂B₃|`, `d₃ = |B₃B₁|`.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use nalgebra::Vector2;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polyalg::field::f64_to_decimal_ratio;

pub type Point = Vector2<f64>;

/// Relative tolerance on `|cos β|` below which a platform counts as flat.
const FLAT_TOL: f64 = 1e-12;

/// Wraps an angle into `(-π, π]`.
pub fn wrap_angle(a: f64) -> f64 {
    let mut x = a.rem_euclid(2.0 * PI);
    if x > PI {
        x -= 2.0 * PI;
    }
    if x <= -PI {
        x += 2.0 * PI;
    }
    x
}

/// Shortest distance between two angles on the circle, in `[0, π]`.
pub fn angle_distance(a: f64, b: f64) -> f64 {
    wrap_angle(a - b).abs()
}

/// Interior platform angle at `B₁` and the altitude `h = d₃ sin β`.
pub fn derive_platform_angle(d1: f64, d2: f64, d3: f64) -> Result<(f64, f64)> {
    if !(d1 > 0.0 && d2 > 0.0 && d3 > 0.0) {
        return Err(Error::InvalidGeometry(format!(
            "platform sides must be positive, got ({d1}, {d2}, {d3})"
        )));
    }
    if d1 >= d2 + d3 || d2 >= d1 + d3 || d3 >= d1 + d2 {
        return Err(Error::DegenerateTriangle(format!(
            "sides ({d1}, {d2}, {d3}) violate the strict triangle inequality"
        )));
    }
    let cos_beta = (d1 * d1 + d3 * d3 - d2 * d2) / (2.0 * d1 * d3);
    if cos_beta.abs() >= 1.0 - FLAT_TOL {
        return Err(Error::DegenerateTriangle(format!(
            "sides ({d1}, {d2}, {d3}) give a flat platform"
        )));
    }
    let beta = cos_beta.acos();
    Ok((beta, d3 * beta.sin()))
}

/// Like [`derive_platform_angle`] but accepts a flat platform, returning
/// `β ∈ {0, π}` and `h = 0` for it.
pub fn derive_platform_angle_allow_flat(d1: f64, d2: f64, d3: f64) -> Result<(f64, f64)> {
    match derive_platform_angle(d1, d2, d3) {
        Err(Error::DegenerateTriangle(msg)) => {
            let slack = FLAT_TOL * (d1 + d2 + d3);
            if d1 > d2 + d3 + slack || d2 > d1 + d3 + slack || d3 > d1 + d2 + slack {
                return Err(Error::DegenerateTriangle(msg));
            }
            let cos_beta = (d1 * d1 + d3 * d3 - d2 * d2) / (2.0 * d1 * d3);
            Ok((if cos_beta > 0.0 { 0.0 } else { PI }, 0.0))
        }
        other => other,
    }
}

fn is_false(b: &bool) -> bool {
    !*b
}

/// The six base numbers of a 3-RPR manipulator, as stored on disk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryFile {
    #[serde(rename = "A2x")]
    pub a2x: f64,
    #[serde(rename = "A3x")]
    pub a3x: f64,
    #[serde(rename = "A3y")]
    pub a3y: f64,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
    /// Accept a flat platform with `B₃` on the line `B₁B₂`.
    #[serde(default, skip_serializing_if = "is_false")]
    pub collinear_platform: bool,
}

/// Validated manipulator geometry with derived platform angle and altitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManipulatorGeometry {
    pub a2x: f64,
    pub a3x: f64,
    pub a3y: f64,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
    beta: f64,
    h: f64,
    allow_flat: bool,
}

impl ManipulatorGeometry {
    pub fn new(a2x: f64, a3x: f64, a3y: f64, d1: f64, d2: f64, d3: f64) -> Result<Self> {
        Self::build(a2x, a3x, a3y, d1, d2, d3, false)
    }

    /// Accepts a flat platform (`d_i = d_j + d_k`) besides proper triangles.
    pub fn new_allow_flat(a2x: f64, a3x: f64, a3y: f64, d1: f64, d2: f64, d3: f64) -> Result<Self> {
        Self::build(a2x, a3x, a3y, d1, d2, d3, true)
    }

    fn build(a2x: f64, a3x: f64, a3y: f64, d1: f64, d2: f64, d3: f64, allow_flat: bool) -> Result<Self> {
        if ![a2x, a3x, a3y, d1, d2, d3].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidGeometry("non-finite parameter".into()));
        }
        if a2x <= 0.0 {
            return Err(Error::InvalidGeometry(format!(
                "A2x must be positive (A2 lies on the positive x-axis), got {a2x}"
            )));
        }
        let (beta, h) = if allow_flat {
            derive_platform_angle_allow_flat(d1, d2, d3)?
        } else {
            derive_platform_angle(d1, d2, d3)?
        };
        Ok(ManipulatorGeometry {
            a2x,
            a3x,
            a3y,
            d1,
            d2,
            d3,
            beta,
            h,
            allow_flat,
        })
    }

    /// The manipulator with `A₂ = (15.91, 0)`, `A₃ = (0, 10)`,
    /// `d = (17.04, 16.54, 20.84)`.
    pub fn reference() -> Self {
        ManipulatorGeometry::new(15.91, 0.0, 10.0, 17.04, 16.54, 20.84).expect("reference geometry is valid")
    }

    /// The small manipulator with `A₂ = (3, 0)`, `A₃ = (1.1, 2.7)`,
    /// `d = (1.3, 0.9, 0.4)`. Its platform is flat: `B₃` lies on `B₁B₂`,
    /// `0.4` from `B₁`.
    pub fn second_example() -> Self {
        ManipulatorGeometry::new_allow_flat(3.0, 1.1, 2.7, 1.3, 0.9, 0.4).expect("second example geometry is valid")
    }

    pub fn from_file_record(rec: GeometryFile) -> Result<Self> {
        Self::build(
            rec.a2x,
            rec.a3x,
            rec.a3y,
            rec.d1,
            rec.d2,
            rec.d3,
            rec.collinear_platform,
        )
    }

    pub fn file_record(&self) -> GeometryFile {
        GeometryFile {
            a2x: self.a2x,
            a3x: self.a3x,
            a3y: self.a3y,
            d1: self.d1,
            d2: self.d2,
            d3: self.d3,
            collinear_platform: self.allow_flat,
        }
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let rec: GeometryFile =
            serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("geometry JSON: {e}")))?;
        ManipulatorGeometry::from_file_record(rec)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&self.file_record()).expect("plain numbers serialize")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = fs::read_to_string(path.as_ref())
            .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.as_ref().display())))?;
        ManipulatorGeometry::from_json_str(&text)
    }

    /// Whether `B₁`, `B₂`, `B₃` are collinear (`h = 0`).
    pub fn is_flat(&self) -> bool {
        self.h == 0.0
    }

    /// Interior platform angle at `B₁`, in `(0, π)`, or `0`/`π` when flat.
    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Platform altitude from `B₃` onto the line `B₁B₂`.
    pub fn h(&self) -> f64 {
        self.h
    }

    /// `d₃ cos β`, the projection of `B₁B₃` onto `B₁B₂`.
    pub fn d3_cos_beta(&self) -> f64 {
        if self.is_flat() {
            return self.d3 * self.beta.cos();
        }
        (self.d1 * self.d1 + self.d3 * self.d3 - self.d2 * self.d2) / (2.0 * self.d1)
    }

    pub fn anchors(&self) -> [Point; 3] {
        [
            Point::new(0.0, 0.0),
            Point::new(self.a2x, 0.0),
            Point::new(self.a3x, self.a3y),
        ]
    }

    pub fn sides(&self) -> [f64; 3] {
        [self.d1, self.d2, self.d3]
    }

    pub fn mean_side(&self) -> f64 {
        (self.d1 + self.d2 + self.d3) / 3.0
    }

    /// Absolute residual tolerance for a consistent configuration.
    pub fn tol_constraint(&self) -> f64 {
        1e-8 * self.max_side_sq()
    }

    pub fn max_side_sq(&self) -> f64 {
        self.sides().iter().map(|d| d * d).fold(0.0, f64::max)
    }

    /// Largest base-anchor coordinate, the length scale used to normalize
    /// determinants.
    pub fn base_scale(&self) -> f64 {
        self.a2x.abs().max(self.a3x.abs()).max(self.a3y.abs())
    }

    /// Uniformly scaled copy.
    pub fn scaled(&self, k: f64) -> Result<Self> {
        Self::build(
            k * self.a2x,
            k * self.a3x,
            k * self.a3y,
            k * self.d1,
            k * self.d2,
            k * self.d3,
            self.allow_flat,
        )
    }

    /// Exact rational values of the six parameters, read from their shortest
    /// decimal representation (`15.91` → `1591/100`).
    pub fn exact(&self) -> ExactGeometry {
        ExactGeometry {
            a2x: f64_to_decimal_ratio(self.a2x),
            a3x: f64_to_decimal_ratio(self.a3x),
            a3y: f64_to_decimal_ratio(self.a3y),
            d1: f64_to_decimal_ratio(self.d1),
            d2: f64_to_decimal_ratio(self.d2),
            d3: f64_to_decimal_ratio(self.d3),
            flat_sign: self.is_flat().then_some(if self.beta == 0.0 { 1 } else { -1 }),
        }
    }

    /// Platform vertices for a pose.
    pub fn pose_vertices(&self, pose: &PlatformPose) -> [Point; 3] {
        let b1 = pose.b1;
        let b2 = b1 + self.d1 * Point::new(pose.alpha.cos(), pose.alpha.sin());
        let ab = pose.alpha + self.beta;
        let b3 = b1 + self.d3 * Point::new(ab.cos(), ab.sin());
        [b1, b2, b3]
    }
}

/// Exact copy of the base numbers for the algebraic pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactGeometry {
    pub a2x: BigRational,
    pub a3x: BigRational,
    pub a3y: BigRational,
    pub d1: BigRational,
    pub d2: BigRational,
    pub d3: BigRational,
    /// `Some(±1)` for a flat platform with `cos β = ±1`.
    pub flat_sign: Option<i8>,
}

impl ExactGeometry {
    /// `d₃ cos β = (d₁² + d₃² − d₂²) / (2 d₁)`, always rational.
    pub fn d3_cos_beta(&self) -> BigRational {
        if let Some(s) = self.flat_sign {
            return &self.d3 * BigRational::from_integer(s.into());
        }
        (&self.d1 * &self.d1 + &self.d3 * &self.d3 - &self.d2 * &self.d2)
            / (BigRational::from_integer(2.into()) * &self.d1)
    }

    /// `h² = d₃² − (d₃ cos β)²`, the rational square of the altitude.
    pub fn h_squared(&self) -> BigRational {
        let p = self.d3_cos_beta();
        &self.d3 * &self.d3 - &p * &p
    }
}

/// Rod lengths and rod direction angles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Configuration {
    pub rho: [f64; 3],
    pub theta: [f64; 3],
}

impl Configuration {
    pub fn new(rho: [f64; 3], theta: [f64; 3]) -> Self {
        Configuration {
            rho,
            theta: theta.map(wrap_angle),
        }
    }

    /// Largest absolute loop-closure residual.
    pub fn max_residual(&self, geom: &ManipulatorGeometry) -> f64 {
        constraint_residuals(geom, self).iter().fold(0.0, |m, r| m.max(r.abs()))
    }

    pub fn is_consistent(&self, geom: &ManipulatorGeometry) -> bool {
        self.max_residual(geom) <= geom.tol_constraint()
    }
}

/// Position of `B₁` and orientation of `B₁B₂`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlatformPose {
    pub b1: Point,
    pub alpha: f64,
}

impl PlatformPose {
    pub fn new(x: f64, y: f64, alpha: f64) -> Self {
        PlatformPose {
            b1: Point::new(x, y),
            alpha: wrap_angle(alpha),
        }
    }

    /// Pose distance used for clustering: the larger of the `B₁`
    /// displacement and the arc swept by `B₂` around `B₁`.
    pub fn distance(&self, other: &PlatformPose, d1: f64) -> f64 {
        (self.b1 - other.b1)
            .norm()
            .max(d1 * angle_distance(self.alpha, other.alpha))
    }
}

/// Coordinates of a configuration inside the slice `ρ₁ = const`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SliceCoords {
    pub rho1: f64,
    pub alpha: f64,
    pub theta1: f64,
}

impl SliceCoords {
    pub fn new(rho1: f64, alpha: f64, theta1: f64) -> Self {
        SliceCoords {
            rho1,
            alpha: wrap_angle(alpha),
            theta1: wrap_angle(theta1),
        }
    }

    pub fn pose(&self) -> PlatformPose {
        PlatformPose::new(self.rho1 * self.theta1.cos(), self.rho1 * self.theta1.sin(), self.alpha)
    }
}

/// Platform vertex positions implied by the rods.
pub fn platform_points(geom: &ManipulatorGeometry, config: &Configuration) -> [Point; 3] {
    let anchors = geom.anchors();
    std::array::from_fn(|i| {
        let (s, c) = config.theta[i].sin_cos();
        anchors[i] + config.rho[i] * Point::new(c, s)
    })
}

/// `Γ_i = |B_{i+1} − B_i|² − d_i²` for the three platform sides.
pub fn constraint_residuals(geom: &ManipulatorGeometry, config: &Configuration) -> [f64; 3] {
    let [b1, b2, b3] = platform_points(geom, config);
    [
        (b2 - b1).norm_squared() - geom.d1 * geom.d1,
        (b3 - b2).norm_squared() - geom.d2 * geom.d2,
        (b1 - b3).norm_squared() - geom.d3 * geom.d3,
    ]
}

/// Rod lengths and angles reaching a given platform pose.
pub fn inverse_kinematics(geom: &ManipulatorGeometry, pose: &PlatformPose) -> Result<Configuration> {
    let vertices = geom.pose_vertices(pose);
    let anchors = geom.anchors();
    let mut rho = [0.0; 3];
    let mut theta = [0.0; 3];
    for i in 0..3 {
        let v = vertices[i] - anchors[i];
        let len = v.norm();
        if len <= f64::EPSILON * geom.mean_side() {
            return Err(Error::CoincidentAnchor(i + 1));
        }
        rho[i] = len;
        theta[i] = v.y.atan2(v.x);
    }
    Ok(Configuration::new(rho, theta))
}

/// Components of `B₂ − A₂` and `B₃ − A₃` in a slice.
pub(crate) fn slice_leg_vectors(geom: &ManipulatorGeometry, slice: &SliceCoords) -> (Point, Point) {
    let [b1, b2, b3] = geom.pose_vertices(&slice.pose());
    let anchors = geom.anchors();
    let _ = b1;
    (b2 - anchors[1], b3 - anchors[2])
}

/// The full configuration at slice coordinates.
pub fn config_from_slice(geom: &ManipulatorGeometry, slice: &SliceCoords) -> Result<Configuration> {
    let (v2, v3) = slice_leg_vectors(geom, slice);
    let (rho2, rho3) = (v2.norm(), v3.norm());
    let tiny = f64::EPSILON * geom.mean_side();
    if rho2 <= tiny {
        return Err(Error::DegenerateSlice(2));
    }
    if rho3 <= tiny {
        return Err(Error::DegenerateSlice(3));
    }
    Ok(Configuration::new(
        [slice.rho1, rho2, rho3],
        [slice.theta1, v2.y.atan2(v2.x), v3.y.atan2(v3.x)],
    ))
}

/// Slice coordinates `(ρ₁, α, θ₁)` of a configuration.
pub fn slice_coords(geom: &ManipulatorGeometry, config: &Configuration) -> SliceCoords {
    let [b1, b2, _] = platform_points(geom, config);
    let e = b2 - b1;
    SliceCoords::new(config.rho[0], e.y.atan2(e.x), config.theta[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx_eq::close;

    mod approx_eq {
        pub fn close(a: f64, b: f64, tol: f64) -> bool {
            (a - b).abs() <= tol
        }
    }

    #[test]
    fn equilateral_platform_angle() {
        let (beta, h) = derive_platform_angle(1.0, 1.0, 1.0).unwrap();
        assert!(close(beta, PI / 3.0, 1e-15));
        assert!(close(h, 3f64.sqrt() / 2.0, 1e-15));
    }

    #[test]
    fn flat_platform_rejected() {
        assert!(derive_platform_angle(1.0, 2.0 - 1e-3, 1.0).is_ok());
        let (beta, h) = derive_platform_angle(1.0, 2.0 - 1e-9, 1.0).unwrap();
        assert!(beta > PI - 1e-3 && h < 1e-3);
        assert!(matches!(
            derive_platform_angle(1.0, 2.0, 1.0),
            Err(Error::DegenerateTriangle(_))
        ));
        assert!(derive_platform_angle(1.0, -1.0, 1.0).is_err());
    }

    #[test]
    fn reference_platform_angle_golden() {
        // law of cosines on (17.04, 16.54, 20.84)
        let g = ManipulatorGeometry::reference();
        let cos_beta: f64 = (17.04f64.powi(2) + 20.84f64.powi(2) - 16.54f64.powi(2)) / (2.0 * 17.04 * 20.84);
        assert!(close(g.beta(), cos_beta.acos(), 1e-15));
        assert!(close(g.beta(), 0.882_603_109_764_431_8, 1e-12), "{}", g.beta());
        assert!(close(g.h(), 16.096_708_466_836_51, 1e-10), "{}", g.h());
    }

    #[test]
    fn zero_angles_points() {
        let g = ManipulatorGeometry::reference();
        let c = Configuration::new([1.0, 2.0, 3.0], [0.0; 3]);
        let [b1, b2, b3] = platform_points(&g, &c);
        assert_eq!((b1.x, b1.y), (1.0, 0.0));
        assert!(close(b2.x, 17.91, 1e-12) && b2.y == 0.0);
        assert_eq!((b3.x, b3.y), (3.0, 10.0));
        let gam = constraint_residuals(&g, &c);
        assert!(close(gam[0], 16.91f64.powi(2) - 17.04f64.powi(2), 1e-9));
        assert!(close(gam[0], -4.4135, 1e-9));
    }

    #[test]
    fn zero_rods_give_anchors() {
        let g = ManipulatorGeometry::reference();
        let c = Configuration::new([0.0; 3], [0.3, -1.0, 2.0]);
        let pts = platform_points(&g, &c);
        assert_eq!(pts, g.anchors());
    }

    #[test]
    fn residuals_scale_quadratically() {
        let g = ManipulatorGeometry::reference();
        let c = Configuration::new([3.0, 5.0, 7.0], [0.2, 1.1, -0.4]);
        let k = 2.5;
        let gk = g.scaled(k).unwrap();
        let ck = Configuration::new(c.rho.map(|r| r * k), c.theta);
        let a = constraint_residuals(&g, &c);
        let b = constraint_residuals(&gk, &ck);
        for i in 0..3 {
            assert!(close(b[i], k * k * a[i], 1e-9 * b[i].abs().max(1.0)));
        }
    }

    #[test]
    fn ik_on_x_axis() {
        let g = ManipulatorGeometry::reference();
        let c = inverse_kinematics(&g, &PlatformPose::new(12.0, 0.0, 1.0)).unwrap();
        assert_eq!(c.theta[0], 0.0);
        assert!(close(c.rho[0], 12.0, 1e-15));
        assert!(c.is_consistent(&g));
    }

    #[test]
    fn ik_rejects_vertex_on_anchor() {
        let g = ManipulatorGeometry::reference();
        assert!(matches!(
            inverse_kinematics(&g, &PlatformPose::new(0.0, 0.0, 0.3)),
            Err(Error::CoincidentAnchor(1))
        ));
    }

    #[test]
    fn slice_round_trip() {
        let g = ManipulatorGeometry::reference();
        let c = inverse_kinematics(&g, &PlatformPose::new(-3.0, 8.0, 2.2)).unwrap();
        let s = slice_coords(&g, &c);
        let back = config_from_slice(&g, &s).unwrap();
        for i in 0..3 {
            assert!(close(back.rho[i], c.rho[i], 1e-9));
            assert!(angle_distance(back.theta[i], c.theta[i]) <= 1e-9);
        }
    }

    #[test]
    fn json_file_format() {
        let text = r#"{"A2x":15.91,"A3x":0.0,"A3y":10.0,"d1":17.04,"d2":16.54,"d3":20.84}"#;
        let g = ManipulatorGeometry::from_json_str(text).unwrap();
        assert_eq!(g, ManipulatorGeometry::reference());
        let again = ManipulatorGeometry::from_json_str(&g.to_json_string()).unwrap();
        assert_eq!(again, g);
        let extra = r#"{"A2x":1,"A3x":0,"A3y":1,"d1":1,"d2":1,"d3":1,"beta":1}"#;
        assert!(ManipulatorGeometry::from_json_str(extra).is_err());
        let missing = r#"{"A2x":1,"A3x":0,"A3y":1,"d1":1,"d2":1}"#;
        assert!(ManipulatorGeometry::from_json_str(missing).is_err());
    }

    #[test]
    fn exact_values_follow_decimal_text() {
        let e = ManipulatorGeometry::reference().exact();
        assert_eq!(e.a2x, BigRational::new(1591.into(), 100.into()));
        assert_eq!(e.d2, BigRational::new(1654.into(), 100.into()));
    }

    #[test]
    fn angle_wrapping() {
        assert_eq!(wrap_angle(PI), PI);
        assert!(close(wrap_angle(-PI), PI, 1e-15));
        assert!(close(wrap_angle(3.0 * PI / 2.0), -PI / 2.0, 1e-15));
        assert!(close(angle_distance(3.1, -3.1), 2.0 * PI - 6.2, 1e-12));
    }
}
