//! Exact construction of `F₁(t, t₁)` and `E₁(t, t₁)` for one slice and their
//! elimination down to the cusp polynomial `Q(t₁)`.
//!
//! The resultant `Res_t(F₁, E₁)` and its factors are computed as images
//! modulo word-size primes and lifted back to `Q(h)` (see
//! [`crate::polyalg::modular`]). Spurious factors are stripped by gcds with
//! the resultants of pairs of k-factors whose simultaneous vanishing makes
//! the left or right kernel vector vanish identically, together with the
//! `ρ₂ = 0`, `ρ₃ = 0` loci and the `α = π` pole.
//!
//! A flat platform makes the constraint Jacobian singular everywhere, so the
//! adjugate-based condition carries no information. For such platforms the
//! cusp condition is the fold condition instead: the tangent of the
//! singular curve is annihilated by the differential of `(ρ₂², ρ₃²)`.

use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Signed;
use serde::Serialize;

use crate::differential::LegTerms;
use crate::error::{Error, Result};
use crate::geometry::ManipulatorGeometry;
use crate::polyalg::field::f64_to_decimal_ratio;
use crate::polyalg::modular::{reconstruct_monic, ModContext, ModQuad};
use crate::polyalg::{
    exact_sqrt, ratio_to_f64, resultant, sqrt_ratio, tan_half_substitute, yun, BiPoly, Elimination, Field, Poly,
    QuadNum, QuadPoly, RatPoly, TanHalf, TrigPoly, Var,
};

type T = TrigPoly<QuadNum>;

fn c(x: &BigRational) -> T {
    T::constant(QuadNum::rational(x.clone()))
}

/// The altitude as an element of `Q(h)`: a plain rational when `h²` is a
/// rational square, the generator otherwise.
fn altitude(geom: &ManipulatorGeometry) -> QuadNum {
    let h2 = geom.exact().h_squared();
    match exact_sqrt(&h2) {
        Some(h) => QuadNum::rational(h),
        None => QuadNum::generator(Arc::new(h2)),
    }
}

/// Leg terms of the slice `ρ₁ = rho1` as trigonometric polynomials in
/// `(α, θ₁)`, with the altitude `h` carried exactly.
pub fn slice_leg_terms(geom: &ManipulatorGeometry, rho1: &BigRational) -> LegTerms<T> {
    let e = geom.exact();
    let h = T::constant(altitude(geom));
    let p = c(&e.d3_cos_beta());
    let (ca, sa) = (T::cos_alpha(), T::sin_alpha());
    let (c1, s1) = (T::cos_theta1(), T::sin_theta1());
    let r1 = c(rho1);
    let x2 = -c(&e.a2x) + &r1 * &c1 + &c(&e.d1) * &ca;
    let y2 = &r1 * &s1 + &c(&e.d1) * &sa;
    let x3 = -c(&e.a3x) + &r1 * &c1 + &p * &ca - &h * &sa;
    let y3 = -c(&e.a3y) + &r1 * &s1 + &p * &sa + &h * &ca;
    LegTerms {
        rho1: r1,
        c1,
        s1,
        x2,
        y2,
        x3,
        y3,
        a2x: c(&e.a2x),
        a3x: c(&e.a3x),
        a3y: c(&e.a3y),
    }
}

/// Exact decimal reading of a slice value.
pub fn exact_rho1(rho1: f64) -> BigRational {
    f64_to_decimal_ratio(rho1)
}

/// Tan-half form of the `ρ₂ρ₃`-scaled singularity condition.
pub fn build_f1(geom: &ManipulatorGeometry, rho1: &BigRational) -> TanHalf<QuadNum> {
    tan_half_substitute(&slice_leg_terms(geom, rho1).singularity())
}

/// Tan-half form of the cusp condition with `u` the first adjugate row and
/// `v` the first adjugate column.
pub fn build_e1(geom: &ManipulatorGeometry, rho1: &BigRational) -> TanHalf<QuadNum> {
    tan_half_substitute(&slice_leg_terms(geom, rho1).cusp_form(0, 0, T::zero()))
}

/// The two fold conditions `∇ρ_i² · τ`, `i = 2, 3`, with `τ` the tangent of
/// the singular curve `F = 0` in `(α, θ₁)`.
pub fn fold_forms(lt: &LegTerms<T>) -> [T; 2] {
    let f = lt.singularity();
    let (fa, f1) = (f.derivative(Var::T), f.derivative(Var::T1));
    let g2 = &(&lt.x2 * &lt.x2) + &(&lt.y2 * &lt.y2);
    let g3 = &(&lt.x3 * &lt.x3) + &(&lt.y3 * &lt.y3);
    [g2, g3].map(|g| &(&g.derivative(Var::T) * &f1) - &(&g.derivative(Var::T1) * &fa))
}

/// Which second equation pins cusps on the singular curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CuspCondition {
    /// `u · (vᵀ H v) = 0` from the adjugate of the constraint Jacobian.
    Adjugate,
    /// Both fold conditions; used for flat platforms.
    Fold,
}

/// Which polynomial the modular images are taken of.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    /// What remains of the resultant after stripping spurious factors.
    Q,
    /// Square-free part of the whole resultant.
    SquarefreeResultant,
}

enum SplitterSource {
    Pair(BiPoly<QuadNum>, BiPoly<QuadNum>),
    Single(QuadPoly),
}

struct Splitter {
    name: &'static str,
    source: SplitterSource,
}

/// Square-free structure of one spurious source inside the resultant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SpuriousFactor {
    pub source: String,
    /// `(degree, multiplicity)` of the parts of the resultant explained by
    /// this source.
    pub parts: Vec<(usize, u32)>,
}

/// Degrees observed in the modular images.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ImageInfo {
    pub resultant_degree: usize,
    /// `(degree, multiplicity)` of the whole resultant.
    pub resultant_profile: Vec<(usize, u32)>,
    pub spurious: Vec<SpuriousFactor>,
    pub remaining_degree: usize,
    pub remaining_squarefree: bool,
}

/// `F₁`, the cusp conditions and the spurious-factor generators of one slice.
pub struct SliceSystem {
    pub rho1: f64,
    pub rho1_exact: BigRational,
    pub condition: CuspCondition,
    pub f1: TanHalf<QuadNum>,
    /// `[E₁]`, or the two fold conditions.
    pub cusp_forms: Vec<TanHalf<QuadNum>>,
    /// `F` and the cusp conditions before the tan-half substitution.
    pub f_trig: T,
    pub cusp_trig: Vec<T>,
    disc: BigRational,
    h_exact: Option<BigRational>,
    splitters: Vec<Splitter>,
}

/// Result of eliminating `t` from `F₁ = E₁ = 0`.
#[derive(Debug, Clone)]
pub struct EliminationOutcome {
    pub target: Target,
    /// Monic polynomial in `t₁` over `Q(h)`.
    pub poly: QuadPoly,
    pub info: ImageInfo,
    pub primes_used: usize,
}

const U_PAIRS: [(usize, usize); 3] = [(2, 3), (2, 5), (1, 5)];
const V_PAIRS: [(usize, usize); 3] = [(1, 3), (1, 4), (2, 4)];
const PAIR_NAMES: [&str; 6] = ["k2,k3", "k2,k5", "k1,k5", "k1,k3", "k1,k4", "k2,k4"];
const MAX_PRIMES: usize = 400;

impl SliceSystem {
    pub fn new(geom: &ManipulatorGeometry, rho1: f64) -> Result<Self> {
        let condition = if geom.is_flat() {
            CuspCondition::Fold
        } else {
            CuspCondition::Adjugate
        };
        Self::with_condition(geom, rho1, condition)
    }

    pub fn with_condition(geom: &ManipulatorGeometry, rho1: f64, condition: CuspCondition) -> Result<Self> {
        if !(rho1 > 0.0 && rho1.is_finite()) {
            return Err(Error::InvalidInput(format!("rho1 must be positive, got {rho1}")));
        }
        if condition == CuspCondition::Adjugate && geom.is_flat() {
            return Err(Error::InvalidGeometry(
                "the adjugate cusp condition is void for a flat platform".into(),
            ));
        }
        let rho1_exact = exact_rho1(rho1);
        let lt = slice_leg_terms(geom, &rho1_exact);
        let f_trig = lt.singularity();
        let f1 = tan_half_substitute(&f_trig);
        let cusp_trig: Vec<T> = match condition {
            CuspCondition::Adjugate => vec![lt.cusp_form(0, 0, T::zero())],
            CuspCondition::Fold => fold_forms(&lt).to_vec(),
        };
        let cusp_forms = cusp_trig.iter().map(tan_half_substitute).collect();
        let th = |x: &T| tan_half_substitute(x).numerator;
        let mut splitters = Vec::new();
        if condition == CuspCondition::Adjugate {
            let k = lt.k_factors();
            for (i, (a, b)) in U_PAIRS.iter().chain(V_PAIRS.iter()).enumerate() {
                splitters.push(Splitter {
                    name: PAIR_NAMES[i],
                    source: SplitterSource::Pair(th(&k[a - 1]), th(&k[b - 1])),
                });
            }
        }
        splitters.push(Splitter {
            name: "rho2=0",
            source: SplitterSource::Pair(th(&lt.x2), th(&lt.y2)),
        });
        splitters.push(Splitter {
            name: "rho3=0",
            source: SplitterSource::Pair(th(&lt.x3), th(&lt.y3)),
        });
        let nominal = 2 * f1.alpha_power as usize;
        splitters.push(Splitter {
            name: "alpha=pi",
            source: SplitterSource::Single(f1.numerator.leading_in(Var::T, nominal)),
        });
        let h2 = geom.exact().h_squared();
        let h_exact = exact_sqrt(&h2);
        // With a rational altitude every coefficient is rational and any
        // non-square works as the modular extension.
        let disc = if h_exact.is_some() {
            BigRational::from_integer(BigInt::from(2))
        } else {
            h2
        };
        Ok(SliceSystem {
            rho1,
            rho1_exact,
            condition,
            f1,
            cusp_forms,
            f_trig,
            cusp_trig,
            disc,
            h_exact,
            splitters,
        })
    }

    fn resultant_mod(&self, ctx: &ModContext, g: &TanHalf<QuadNum>) -> Option<Poly<ModQuad>> {
        let f1 = ctx.reduce_bipoly(&self.f1.numerator)?;
        let g = ctx.reduce_bipoly(&g.numerator)?;
        match resultant(&f1, &g, Var::T) {
            Elimination::Resultant(r) => Some(r),
            Elimination::CommonFactor => None,
        }
    }

    fn strip(&self, ctx: &ModContext, mut rest: Poly<ModQuad>) -> Option<(Poly<ModQuad>, Vec<SpuriousFactor>)> {
        let mut spurious = Vec::new();
        for s in &self.splitters {
            let poly = match &s.source {
                SplitterSource::Pair(a, b) => {
                    let a = ctx.reduce_bipoly(a)?;
                    let b = ctx.reduce_bipoly(b)?;
                    match resultant(&a, &b, Var::T) {
                        Elimination::Resultant(p) => p,
                        Elimination::CommonFactor => continue,
                    }
                }
                SplitterSource::Single(p) => ctx.reduce_poly(p)?,
            };
            if poly.degree().unwrap_or(0) == 0 {
                continue;
            }
            let mut levels = Vec::new();
            let mut g = rest.gcd(&poly);
            while g.degree().unwrap_or(0) > 0 {
                levels.push(g.degree().unwrap());
                rest = rest.exact_div(&g).expect("gcd divides");
                g = rest.gcd(&g);
            }
            if !levels.is_empty() {
                spurious.push(SpuriousFactor {
                    source: s.name.to_string(),
                    parts: levels_to_parts(&levels),
                });
            }
        }
        Some((rest, spurious))
    }

    /// Modular image of the requested target polynomial.
    fn image(&self, ctx: &ModContext, target: Target) -> Option<(Poly<ModQuad>, ImageInfo)> {
        let r = self.resultant_mod(ctx, &self.cusp_forms[0])?;
        let resultant_degree = r.degree()?;
        let resultant_profile = squarefree_profile(&r);
        let base = match self.condition {
            CuspCondition::Adjugate => r.clone(),
            CuspCondition::Fold => {
                let r3 = self.resultant_mod(ctx, &self.cusp_forms[1])?;
                r.gcd(&r3)
            }
        };
        let (rest, spurious) = self.strip(ctx, base)?;
        let rest = match self.condition {
            CuspCondition::Adjugate => rest,
            CuspCondition::Fold => squarefree_part(&rest),
        };
        let remaining_degree = rest.degree().unwrap_or(0);
        let remaining_squarefree = rest.gcd(&rest.derivative()).degree().unwrap_or(0) == 0;
        let info = ImageInfo {
            resultant_degree,
            resultant_profile,
            spurious,
            remaining_degree,
            remaining_squarefree,
        };
        let out = match target {
            Target::Q => rest,
            Target::SquarefreeResultant => squarefree_part(&r),
        };
        Some((out, info))
    }

    /// Eliminates `t` and lifts the requested polynomial to `Q(h)`.
    pub fn eliminate(&self, target: Target) -> Result<EliminationOutcome> {
        let rec = reconstruct_monic(&self.disc, MAX_PRIMES, |ctx| self.image(ctx, target))?;
        Ok(EliminationOutcome {
            target,
            poly: rec.poly,
            info: rec.info,
            primes_used: rec.primes_used,
        })
    }

    /// Rational value of `h` accurate enough to evaluate `poly` to
    /// `precision_bits` beyond its own coefficient size.
    pub fn h_approx(&self, poly: &QuadPoly, precision_bits: u32) -> BigRational {
        if let Some(h) = &self.h_exact {
            return h.clone();
        }
        let coeff_bits = poly
            .coeffs()
            .iter()
            .map(|c| {
                c.im().numer().bits().max(c.re().numer().bits()) + c.im().denom().bits().max(c.re().denom().bits())
            })
            .max()
            .unwrap_or(0) as u32;
        sqrt_ratio(&self.disc, coeff_bits + precision_bits + 64)
    }

    /// `F₁` leading coefficient in `t` (vanishes where `α = π` solves `F = 0`).
    pub fn f1_lead_t(&self) -> QuadPoly {
        self.f1.numerator.leading_in(Var::T, 2 * self.f1.alpha_power as usize)
    }

    /// `F₁` leading coefficient in `t₁` (vanishes where `θ₁ = π` solves `F = 0`).
    pub fn f1_lead_t1(&self) -> QuadPoly {
        self.f1.numerator.leading_in(Var::T1, 2 * self.f1.theta1_power as usize)
    }

    /// Largest normalized value of the cusp conditions at `(α, θ₁)`.
    pub fn cusp_residual(&self, alpha: f64, theta1: f64) -> f64 {
        self.cusp_trig
            .iter()
            .map(|e| normalized_trig(e, alpha, theta1))
            .fold(0.0, f64::max)
    }

    /// Normalized value of `F` at `(α, θ₁)`.
    pub fn singular_residual(&self, alpha: f64, theta1: f64) -> f64 {
        normalized_trig(&self.f_trig, alpha, theta1)
    }
}

/// `|e(α, θ₁)| / Σ|c_m · m(α, θ₁)|`.
pub fn normalized_trig(e: &T, alpha: f64, theta1: f64) -> f64 {
    let (sa, ca) = alpha.sin_cos();
    let (s1, c1) = theta1.sin_cos();
    let (mut v, mut a) = (0.0, 0.0);
    for (m, c) in e.terms() {
        let term =
            c.approx_f64() * ca.powi(m[0] as i32) * sa.powi(m[1] as i32) * c1.powi(m[2] as i32) * s1.powi(m[3] as i32);
        v += term;
        a += term.abs();
    }
    if a == 0.0 {
        0.0
    } else {
        v.abs() / a
    }
}

/// `(degree, multiplicity)` pairs from successive gcd-stripping degrees:
/// `levels[j]` counts the roots of multiplicity above `j`.
fn levels_to_parts(levels: &[usize]) -> Vec<(usize, u32)> {
    let mut parts = Vec::new();
    for (j, &d) in levels.iter().enumerate() {
        let next = levels.get(j + 1).copied().unwrap_or(0);
        if d > next {
            parts.push((d - next, j as u32 + 1));
        }
    }
    parts
}

fn squarefree_part<F: Field>(p: &Poly<F>) -> Poly<F> {
    let g = p.gcd(&p.derivative());
    p.exact_div(&g).expect("gcd divides")
}

fn squarefree_profile(p: &Poly<ModQuad>) -> Vec<(usize, u32)> {
    yun(p).into_iter().map(|(f, a)| (f.degree().unwrap_or(0), a)).collect()
}

/// Replaces `h` by a rational value.
pub fn substitute_h(p: &QuadPoly, h: &BigRational) -> RatPoly {
    Poly::new(p.coeffs().iter().map(|c| c.eval_with(h)).collect())
}

/// `F₁(t, t₁*)` as a rational polynomial in `t`.
pub fn f1_at_t1(f1: &BiPoly<QuadNum>, t1: &BigRational, h: &BigRational) -> RatPoly {
    let q = f1.eval_t1(&QuadNum::rational(t1.clone()));
    substitute_h(&q, h)
}

/// Size of the coefficient of `x^k` relative to the largest coefficient.
pub fn coefficient_ratio(p: &RatPoly, k: usize) -> f64 {
    let max = p.coeffs().iter().map(|c| ratio_to_f64(&c.abs())).fold(0.0, f64::max);
    if max == 0.0 {
        return 0.0;
    }
    ratio_to_f64(&p.coeff(k).abs()) / max
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stripping_levels_to_parts() {
        assert_eq!(levels_to_parts(&[6, 6, 4, 4]), vec![(2, 2), (4, 4)]);
        assert_eq!(levels_to_parts(&[3]), vec![(3, 1)]);
    }

    #[test]
    fn tan_half_forms_match_trig_forms() {
        let g = ManipulatorGeometry::reference();
        let r = exact_rho1(14.98);
        let f1 = build_f1(&g, &r);
        let lt = slice_leg_terms(&g, &r);
        for (a, t1) in [(0.3, -1.2), (2.0, 0.4), (-2.5, 2.9)] {
            let direct = lt.singularity().eval_f64(a, t1);
            let via = f1.eval_angles_f64(a, t1);
            assert!((direct - via).abs() <= 1e-9 * direct.abs().max(1.0));
        }
    }

    #[test]
    fn flat_platform_uses_rational_altitude() {
        let g = ManipulatorGeometry::second_example();
        assert!(altitude(&g).is_rational());
        let s = SliceSystem::new(&g, 5.0).unwrap();
        assert_eq!(s.condition, CuspCondition::Fold);
        assert_eq!(s.cusp_forms.len(), 2);
        assert!(SliceSystem::with_condition(&g, 5.0, CuspCondition::Adjugate).is_err());
    }

    #[test]
    fn fold_forms_vanish_where_the_image_is_stationary() {
        // At a point where F = 0 the fold form equals ∇g·τ; away from it the
        // value is a plain polynomial identity, checked by finite differences.
        let g = ManipulatorGeometry::reference();
        let r = exact_rho1(17.0);
        let lt = slice_leg_terms(&g, &r);
        let [c2, _] = fold_forms(&lt);
        let f = lt.singularity();
        let g2 = &(&lt.x2 * &lt.x2) + &(&lt.y2 * &lt.y2);
        let (a, b, e) = (0.4, -0.9, 1e-6);
        let d = |p: &T, da: f64, db: f64| (p.eval_f64(a + da, b + db) - p.eval_f64(a - da, b - db)) / (2.0 * e);
        let want = d(&g2, e, 0.0) * d(&f, 0.0, e) - d(&g2, 0.0, e) * d(&f, e, 0.0);
        let got = c2.eval_f64(a, b);
        assert!((got - want).abs() <= 1e-5 * want.abs().max(1.0));
    }
}
