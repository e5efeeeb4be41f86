//! Cusp points of a joint-space slice: points of the singular curve where
//! three direct-kinematic solutions coincide.
//!
//! The algebraic path eliminates `t = tan(α/2)` from the singularity and
//! cusp conditions, isolates the real roots of the resulting polynomial in
//! `t₁ = tan(θ₁/2)`, back-substitutes, filters by the cusp condition and
//! keeps the points at which direct kinematics shows a triple solution. The
//! numeric path ([`numeric`]) walks the traced singular curve instead.

pub mod algebraic;
pub mod numeric;

use std::f64::consts::PI;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::geometry::{angle_distance, config_from_slice, ManipulatorGeometry, SliceCoords};
use crate::kinematics::{cluster_solutions, default_eps_cluster, direct_kinematics_with};
use crate::polyalg::numeric::complex_roots;
use crate::polyalg::{
    real_roots, real_roots_squarefree, BiPoly, QuadNum, QuadPoly, RealRoot, RootInterval, DEFAULT_DEGREE_CAP,
};

pub use algebraic::{CuspCondition, ImageInfo, SliceSystem, SpuriousFactor, Target};

/// Default tolerance on the normalized cusp condition.
pub const TOL_E1: f64 = 1e-6;
/// Working width of back-substitution, in bits.
const BACK_SUBSTITUTION_BITS: u32 = 128;
/// Candidates closer than this in both angles are merged.
pub const DEDUP_RADIUS: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CuspSource {
    Algebraic,
    Numeric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CuspMode {
    /// Roots of the stripped factor `Q`.
    Algebraic,
    /// Roots of the whole square-free resultant.
    FullResultant,
    /// Curve tracing and local refinement.
    Numeric,
}

impl std::str::FromStr for CuspMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "algebraic" => Ok(CuspMode::Algebraic),
            "full_resultant" | "full-resultant" => Ok(CuspMode::FullResultant),
            "numeric" => Ok(CuspMode::Numeric),
            other => Err(format!("unknown cusp mode {other:?}")),
        }
    }
}

/// One cusp of the slice `ρ₁ = rho1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CuspPoint {
    pub rho1: f64,
    pub alpha: f64,
    pub theta1: f64,
    pub rho2: f64,
    pub rho3: f64,
    pub verified: bool,
    /// Largest pairwise pose distance inside the coincident triple.
    pub cluster_gap: f64,
    pub source: CuspSource,
}

impl CuspPoint {
    pub fn slice(&self) -> SliceCoords {
        SliceCoords::new(self.rho1, self.alpha, self.theta1)
    }
}

/// Where an `(α, θ₁)` candidate came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidateOrigin {
    Root,
    /// Real part of a nearly real pair of roots in `t`.
    NearDouble,
    AlphaPole,
    Theta1Pole,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Candidate {
    pub alpha: f64,
    pub theta1: f64,
    pub origin: CandidateOrigin,
    /// Normalized cusp-condition value.
    pub cusp_residual: f64,
}

/// Outcome of the triple-coincidence test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Verification {
    pub verified: bool,
    pub multiplicity: usize,
    pub cluster_gap: f64,
    pub rho2: f64,
    pub rho3: f64,
}

/// Degrees, factor structure and counts of one algebraic run.
#[derive(Debug, Clone, Serialize)]
pub struct EliminationTrace {
    pub rho1: f64,
    pub condition: CuspCondition,
    pub mode: &'static str,
    /// Set when the algebraic mode fell back to the whole resultant.
    pub fallback: bool,
    /// Degrees of `F₁` in `(t, t₁)`.
    pub f1_degrees: (usize, usize),
    pub e1_degrees: Vec<(usize, usize)>,
    pub resultant_degree: usize,
    pub resultant_profile: Vec<(usize, u32)>,
    pub spurious: Vec<SpuriousFactor>,
    /// Degree of `Q` after stripping.
    pub q_degree: usize,
    pub q_squarefree: bool,
    /// Degree of the polynomial whose roots were used.
    pub eliminated_degree: usize,
    pub primes_used: usize,
    pub real_roots: usize,
    pub candidates: usize,
    pub filtered: usize,
    pub verified: usize,
    pub rejected: Vec<Rejection>,
    /// Verified cusps whose `t₁` is not a root of `Q`.
    pub q_audit_violations: usize,
    #[serde(skip)]
    pub f1: BiPoly<QuadNum>,
    #[serde(skip)]
    pub e1: Vec<BiPoly<QuadNum>>,
    #[serde(skip)]
    pub eliminated: QuadPoly,
    #[serde(skip)]
    pub q: QuadPoly,
}

/// A candidate dropped by the filter or by verification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Rejection {
    pub alpha_deg: f64,
    pub theta1_deg: f64,
    pub stage: &'static str,
    pub value: f64,
}

/// Settings for [`find_cusps_with`].
#[derive(Debug, Clone)]
pub struct CuspOptions {
    pub mode: CuspMode,
    /// Width of root enclosures, in bits.
    pub precision_bits: u32,
    pub tol_e1: f64,
    pub eps_cluster: Option<f64>,
    /// α-columns for the numeric oracle.
    pub resolution: usize,
}

impl Default for CuspOptions {
    fn default() -> Self {
        CuspOptions {
            mode: CuspMode::Algebraic,
            precision_bits: 128,
            tol_e1: TOL_E1,
            eps_cluster: None,
            resolution: numeric::DEFAULT_RESOLUTION,
        }
    }
}

/// Verified cusps plus the algebraic trace when one was produced.
#[derive(Debug, Clone, Serialize)]
pub struct CuspReport {
    pub cusps: Vec<CuspPoint>,
    pub trace: Option<EliminationTrace>,
}

/// Cusps of the slice `ρ₁ = rho1` with default options.
pub fn find_cusps(geom: &ManipulatorGeometry, rho1: f64, mode: CuspMode) -> Result<CuspReport> {
    find_cusps_with(
        geom,
        rho1,
        &CuspOptions {
            mode,
            ..CuspOptions::default()
        },
    )
}

pub fn find_cusps_with(geom: &ManipulatorGeometry, rho1: f64, opts: &CuspOptions) -> Result<CuspReport> {
    match opts.mode {
        CuspMode::Numeric => Ok(CuspReport {
            cusps: numeric::find_cusps_numeric_with(geom, rho1, opts)?,
            trace: None,
        }),
        CuspMode::Algebraic | CuspMode::FullResultant => algebraic_cusps(geom, rho1, opts),
    }
}

fn algebraic_cusps(geom: &ManipulatorGeometry, rho1: f64, opts: &CuspOptions) -> Result<CuspReport> {
    let sys = SliceSystem::new(geom, rho1)?;
    let q = sys.eliminate(Target::Q)?;
    let fallback = opts.mode == CuspMode::Algebraic && !q.info.remaining_squarefree;
    let use_full = opts.mode == CuspMode::FullResultant || fallback;
    let full = if use_full {
        Some(sys.eliminate(Target::SquarefreeResultant)?)
    } else {
        None
    };
    let chosen = full.as_ref().unwrap_or(&q);
    let h = sys.h_approx(&chosen.poly, opts.precision_bits);
    let reduced = algebraic::substitute_h(&chosen.poly, &h);
    let roots = if reduced.degree().unwrap_or(0) == 0 {
        Vec::new()
    } else {
        real_roots_squarefree(
            &reduced,
            &RootInterval::WholeLine,
            opts.precision_bits,
            4 * DEFAULT_DEGREE_CAP,
        )?
    };

    // Candidates end up in f64, so back-substitution runs at a fixed width.
    let bs_bits = opts.precision_bits.min(BACK_SUBSTITUTION_BITS);
    let h_bs = sys.h_approx(&chosen.poly, bs_bits);
    let mut candidates = back_substitute(&sys, &roots, &h_bs, bs_bits)?;
    candidates.extend(pole_candidates(&sys, &h_bs, bs_bits)?);
    for c in &mut candidates {
        c.cusp_residual = sys.cusp_residual(c.alpha, c.theta1);
    }
    candidates = dedup_candidates(candidates);

    let mut rejected = Vec::new();
    let filtered: Vec<Candidate> = candidates
        .iter()
        .filter(|c| {
            let keep = c.cusp_residual <= opts.tol_e1;
            if !keep {
                rejected.push(Rejection {
                    alpha_deg: c.alpha.to_degrees(),
                    theta1_deg: c.theta1.to_degrees(),
                    stage: "cusp_condition",
                    value: c.cusp_residual,
                });
            }
            keep
        })
        .copied()
        .collect();

    let eps = opts.eps_cluster.unwrap_or_else(|| default_eps_cluster(geom));
    let checks: Vec<(Candidate, Result<Verification>)> = filtered
        .par_iter()
        .map(|c| (*c, verify_triple_coincidence_eps(geom, rho1, c.alpha, c.theta1, eps)))
        .collect();
    let mut cusps = Vec::new();
    for (c, v) in checks {
        match v {
            Ok(v) if v.verified => cusps.push(CuspPoint {
                rho1,
                alpha: c.alpha,
                theta1: c.theta1,
                rho2: v.rho2,
                rho3: v.rho3,
                verified: true,
                cluster_gap: v.cluster_gap,
                source: CuspSource::Algebraic,
            }),
            Ok(v) => rejected.push(Rejection {
                alpha_deg: c.alpha.to_degrees(),
                theta1_deg: c.theta1.to_degrees(),
                stage: "triple_coincidence",
                value: v.multiplicity as f64,
            }),
            Err(_) => rejected.push(Rejection {
                alpha_deg: c.alpha.to_degrees(),
                theta1_deg: c.theta1.to_degrees(),
                stage: "degenerate_slice_point",
                value: f64::NAN,
            }),
        }
    }
    let cusps = sort_and_dedup(cusps);

    let q_audit_violations = {
        let hq = sys.h_approx(&q.poly, opts.precision_bits);
        let qr = algebraic::substitute_h(&q.poly, &hq);
        cusps
            .iter()
            .filter(|c| !is_root_near(&qr, (c.theta1 / 2.0).tan(), c.theta1))
            .count()
    };

    let deg = |b: &BiPoly<QuadNum>| {
        (
            b.degree(crate::polyalg::Var::T).unwrap_or(0),
            b.degree(crate::polyalg::Var::T1).unwrap_or(0),
        )
    };
    let trace = EliminationTrace {
        rho1,
        condition: sys.condition,
        mode: if use_full { "full_resultant" } else { "algebraic" },
        fallback,
        f1_degrees: deg(&sys.f1.numerator),
        e1_degrees: sys.cusp_forms.iter().map(|e| deg(&e.numerator)).collect(),
        resultant_degree: q.info.resultant_degree,
        resultant_profile: q.info.resultant_profile.clone(),
        spurious: q.info.spurious.clone(),
        q_degree: q.info.remaining_degree,
        q_squarefree: q.info.remaining_squarefree,
        eliminated_degree: chosen.poly.degree().unwrap_or(0),
        primes_used: q.primes_used + full.as_ref().map_or(0, |f| f.primes_used),
        real_roots: roots.len(),
        candidates: candidates.len(),
        filtered: filtered.len(),
        verified: cusps.len(),
        rejected,
        q_audit_violations,
        f1: sys.f1.numerator.clone(),
        e1: sys.cusp_forms.iter().map(|e| e.numerator.clone()).collect(),
        eliminated: chosen.poly.clone(),
        q: q.poly.clone(),
    };
    Ok(CuspReport {
        cusps,
        trace: Some(trace),
    })
}

/// Whether the square-free rational polynomial `p` changes sign across a
/// small neighbourhood of `t₁` (or `θ₁ = π` when `p` lost degree).
fn is_root_near(p: &crate::polyalg::RatPoly, t1: f64, theta1: f64) -> bool {
    if angle_distance(theta1, PI) < 1e-6 {
        return algebraic::coefficient_ratio(p, p.degree().unwrap_or(0)) < 1e-12;
    }
    let w = 1e-7 * (1.0 + t1.abs());
    let lo = p.eval(&crate::polyalg::field::f64_to_decimal_ratio(t1 - w));
    let hi = p.eval(&crate::polyalg::field::f64_to_decimal_ratio(t1 + w));
    lo.is_zero() || hi.is_zero() || lo.is_positive() != hi.is_positive()
}

/// Nearest multiple of `2^-bits`.
fn dyadic(x: &BigRational, bits: u32) -> BigRational {
    let scale = BigInt::one() << bits;
    BigRational::new(
        (x * BigRational::from_integer(scale.clone())).round().to_integer(),
        scale,
    )
}

fn back_substitute(sys: &SliceSystem, roots: &[RealRoot], h: &BigRational, bits: u32) -> Result<Vec<Candidate>> {
    let nominal_t = 2 * sys.f1.alpha_power as usize;
    let per_root: Vec<Result<Vec<Candidate>>> = roots
        .par_iter()
        .map(|r| {
            let t1 = dyadic(&r.midpoint(), bits);
            let theta1 = 2.0 * r.to_f64().atan();
            let poly = algebraic::f1_at_t1(&sys.f1.numerator, &t1, h);
            let mut out = Vec::new();
            if poly.is_zero() {
                return Ok(out);
            }
            let ts = real_roots(&poly, &RootInterval::WholeLine, bits, DEFAULT_DEGREE_CAP)?;
            let mut alphas: Vec<f64> = ts.iter().map(|t| 2.0 * t.to_f64().atan()).collect();
            for a in &alphas {
                out.push(Candidate {
                    alpha: *a,
                    theta1,
                    origin: CandidateOrigin::Root,
                    cusp_residual: f64::NAN,
                });
            }
            // A root that is double in t may split into a complex pair
            // once t₁ is rounded.
            let coeffs = poly.to_f64();
            for z in complex_roots(&coeffs, 1e-14).roots {
                if z.im != 0.0 && z.im.abs() <= 1e-6 * (1.0 + z.norm()) {
                    let a = 2.0 * z.re.atan();
                    if alphas.iter().all(|b| angle_distance(*b, a) > 1e-6) {
                        alphas.push(a);
                        out.push(Candidate {
                            alpha: a,
                            theta1,
                            origin: CandidateOrigin::NearDouble,
                            cusp_residual: f64::NAN,
                        });
                    }
                }
            }
            if algebraic::coefficient_ratio(&poly, nominal_t) < 1e-12 {
                out.push(Candidate {
                    alpha: PI,
                    theta1,
                    origin: CandidateOrigin::AlphaPole,
                    cusp_residual: f64::NAN,
                });
            }
            Ok(out)
        })
        .collect();
    let mut all = Vec::new();
    for r in per_root {
        all.extend(r?);
    }
    Ok(all)
}

/// Points of `F = 0` on the lines `α = π` and `θ₁ = π`.
fn pole_candidates(sys: &SliceSystem, h: &BigRational, bits: u32) -> Result<Vec<Candidate>> {
    let mut out = Vec::new();
    for (lead, alpha_pole) in [(sys.f1_lead_t(), true), (sys.f1_lead_t1(), false)] {
        let p = algebraic::substitute_h(&lead, h);
        if p.is_zero() || p.degree() == Some(0) {
            continue;
        }
        for r in real_roots(&p, &RootInterval::WholeLine, bits, DEFAULT_DEGREE_CAP)? {
            let other = 2.0 * r.to_f64().atan();
            let (alpha, theta1, origin) = if alpha_pole {
                (PI, other, CandidateOrigin::AlphaPole)
            } else {
                (other, PI, CandidateOrigin::Theta1Pole)
            };
            out.push(Candidate {
                alpha,
                theta1,
                origin,
                cusp_residual: f64::NAN,
            });
        }
    }
    Ok(out)
}

fn dedup_candidates(mut cands: Vec<Candidate>) -> Vec<Candidate> {
    cands.sort_by(|a, b| a.alpha.total_cmp(&b.alpha).then(a.theta1.total_cmp(&b.theta1)));
    let mut out: Vec<Candidate> = Vec::new();
    for c in cands {
        if !out.iter().any(|d| {
            angle_distance(d.alpha, c.alpha) <= DEDUP_RADIUS && angle_distance(d.theta1, c.theta1) <= DEDUP_RADIUS
        }) {
            out.push(c);
        }
    }
    out
}

/// Sorts by `(α, θ₁)` and merges points within [`DEDUP_RADIUS`].
pub fn sort_and_dedup(mut cusps: Vec<CuspPoint>) -> Vec<CuspPoint> {
    cusps.sort_by(|a, b| a.alpha.total_cmp(&b.alpha).then(a.theta1.total_cmp(&b.theta1)));
    let mut out: Vec<CuspPoint> = Vec::new();
    for c in cusps {
        if !out.iter().any(|d| {
            angle_distance(d.alpha, c.alpha) <= DEDUP_RADIUS && angle_distance(d.theta1, c.theta1) <= DEDUP_RADIUS
        }) {
            out.push(c);
        }
    }
    out
}

/// Direct kinematics at the joint vector of a slice point, looking for a
/// triple solution.
pub fn verify_triple_coincidence(
    geom: &ManipulatorGeometry,
    rho1: f64,
    alpha: f64,
    theta1: f64,
) -> Result<Verification> {
    verify_triple_coincidence_eps(geom, rho1, alpha, theta1, default_eps_cluster(geom))
}

/// Radii tried by [`verify_triple_coincidence_eps`], as multiples of the base
/// radius: one decade in quarter steps.
pub const EPS_SWEEP: [f64; 5] = [
    1.0,
    1.778_279_410_038_923,
    3.162_277_660_168_379,
    5.623_413_251_903_491,
    10.0,
];

/// As [`verify_triple_coincidence`] with an explicit base radius.
///
/// Coalescing roots are only resolved to about the cube root of machine
/// precision, so the radius is swept over a decade above `eps`; the first
/// radius at which a cluster of three or more forms next to the target
/// decides the verdict.
pub fn verify_triple_coincidence_eps(
    geom: &ManipulatorGeometry,
    rho1: f64,
    alpha: f64,
    theta1: f64,
    eps: f64,
) -> Result<Verification> {
    let config = config_from_slice(geom, &SliceCoords::new(rho1, alpha, theta1))?;
    let rods = config.rho;
    let set = direct_kinematics_with(geom, &rods, eps);
    let target = SliceCoords::new(rho1, alpha, theta1).pose();
    let mut out = Verification {
        verified: false,
        multiplicity: 0,
        cluster_gap: 0.0,
        rho2: rods[1],
        rho3: rods[2],
    };
    for k in EPS_SWEEP {
        let r = k * eps;
        let near = |idx: &Vec<usize>| idx.iter().any(|&i| set.poses[i].pose.distance(&target, geom.d1) <= r);
        let best = cluster_solutions(&set.poses, r, geom.d1)
            .into_iter()
            .filter(|c| near(c))
            .max_by_key(|c| c.len())
            .unwrap_or_default();
        out.multiplicity = best.len();
        out.cluster_gap = set.cluster_gap(&best, geom.d1);
        if best.len() >= 3 {
            out.verified = true;
            break;
        }
    }
    Ok(out)
}

/// Cusp JSON record.
#[derive(Debug, Clone, Serialize)]
pub struct CuspRecord {
    pub alpha_deg: f64,
    pub theta1_deg: f64,
    pub rho2: f64,
    pub rho3: f64,
    pub rho1: f64,
    pub verified: bool,
    pub cluster_gap: f64,
    pub source: CuspSource,
}

impl From<&CuspPoint> for CuspRecord {
    fn from(c: &CuspPoint) -> Self {
        CuspRecord {
            alpha_deg: c.alpha.to_degrees(),
            theta1_deg: c.theta1.to_degrees(),
            rho2: c.rho2,
            rho3: c.rho3,
            rho1: c.rho1,
            verified: c.verified,
            cluster_gap: c.cluster_gap,
            source: c.source,
        }
    }
}

/// `{"cusps": [...], "trace": {...}}` with numbers rounded to `digits`
/// significant digits.
pub fn cusps_to_json(report: &CuspReport, digits: usize) -> serde_json::Value {
    let mut recs: Vec<CuspRecord> = report.cusps.iter().map(CuspRecord::from).collect();
    recs.sort_by(|a, b| a.alpha_deg.total_cmp(&b.alpha_deg));
    let mut v = serde_json::json!({
        "cusps": recs,
        "trace": report.trace,
    });
    round_json(&mut v, digits);
    v
}

/// Rounds every float in a JSON value to `digits` significant digits.
pub fn round_json(v: &mut serde_json::Value, digits: usize) {
    match v {
        serde_json::Value::Number(n) => {
            if let Some(x) = n.as_f64() {
                if !n.is_i64() && !n.is_u64() && x.is_finite() {
                    let r: f64 = format!("{:.*e}", digits.saturating_sub(1), x).parse().unwrap_or(x);
                    if let Some(m) = serde_json::Number::from_f64(r) {
                        *n = m;
                    }
                }
            }
        }
        serde_json::Value::Array(a) => a.iter_mut().for_each(|x| round_json(x, digits)),
        serde_json::Value::Object(o) => o.values_mut().for_each(|x| round_json(x, digits)),
        _ => {}
    }
}
