//! Trigonometric polynomials in `(α, θ₁)` and their tan-half rationalization.
//!
//! A [`TrigPoly`] is a polynomial in the four symbols `cos α, sin α, cos θ₁,
//! sin θ₁` with exact coefficients. Substituting `sin x = 2u/(1+u²)`,
//! `cos x = (1-u²)/(1+u²)` and clearing the smallest possible powers of
//! `(1+t²)` and `(1+t₁²)` turns it into a [`BiPoly`] in `(t, t₁)`.

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use super::bivariate::{BiPoly, Var};
use super::field::Field;
use super::univariate::Poly;

/// Exponents of `(cos α, sin α, cos θ₁, sin θ₁)`.
pub type TrigMonomial = [u8; 4];

#[derive(Clone, Debug, PartialEq)]
pub struct TrigPoly<F> {
    terms: BTreeMap<TrigMonomial, F>,
}

/// Result of the tan-half substitution: `expr = numerator / ((1+t²)^p (1+t₁²)^q)`.
#[derive(Clone, Debug)]
pub struct TanHalf<F> {
    pub numerator: BiPoly<F>,
    pub alpha_power: u32,
    pub theta1_power: u32,
}

impl<F: Field> TrigPoly<F> {
    pub fn zero() -> Self {
        TrigPoly { terms: BTreeMap::new() }
    }

    pub fn constant(c: F) -> Self {
        TrigPoly::monomial(c, [0, 0, 0, 0])
    }

    pub fn monomial(c: F, exps: TrigMonomial) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(exps, c);
        }
        TrigPoly { terms }
    }

    pub fn cos_alpha() -> Self {
        TrigPoly::monomial(F::one(), [1, 0, 0, 0])
    }

    pub fn sin_alpha() -> Self {
        TrigPoly::monomial(F::one(), [0, 1, 0, 0])
    }

    pub fn cos_theta1() -> Self {
        TrigPoly::monomial(F::one(), [0, 0, 1, 0])
    }

    pub fn sin_theta1() -> Self {
        TrigPoly::monomial(F::one(), [0, 0, 0, 1])
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&TrigMonomial, &F)> {
        self.terms.iter()
    }

    pub fn scale(&self, c: &F) -> Self {
        if c.is_zero() {
            return TrigPoly::zero();
        }
        TrigPoly {
            terms: self.terms.iter().map(|(m, v)| (*m, v.clone() * c)).collect(),
        }
    }

    /// Total degree in `(cos α, sin α)` and in `(cos θ₁, sin θ₁)`.
    pub fn degrees(&self) -> (u32, u32) {
        self.terms.keys().fold((0, 0), |(a, b), m| {
            (a.max((m[0] + m[1]) as u32), b.max((m[2] + m[3]) as u32))
        })
    }

    pub fn eval_f64(&self, alpha: f64, theta1: f64) -> f64 {
        let (sa, ca) = alpha.sin_cos();
        let (s1, c1) = theta1.sin_cos();
        self.terms
            .iter()
            .map(|(m, c)| {
                c.approx_f64()
                    * ca.powi(m[0] as i32)
                    * sa.powi(m[1] as i32)
                    * c1.powi(m[2] as i32)
                    * s1.powi(m[3] as i32)
            })
            .sum()
    }

    /// Partial derivative with respect to `α` (`Var::T`) or `θ₁` (`Var::T1`).
    pub fn derivative(&self, var: Var) -> Self {
        let (ci, si) = match var {
            Var::T => (0, 1),
            Var::T1 => (2, 3),
        };
        let mut out = TrigPoly::zero();
        for (m, c) in &self.terms {
            // d(cᵃ sᵇ) = −a cᵃ⁻¹ sᵇ⁺¹ + b cᵃ⁺¹ sᵇ⁻¹
            if m[ci] > 0 {
                let mut e = *m;
                e[ci] -= 1;
                e[si] += 1;
                out.add_reduced(e, -(c.clone() * &F::from_int(m[ci] as i64)));
            }
            if m[si] > 0 {
                let mut e = *m;
                e[si] -= 1;
                e[ci] += 1;
                out.add_reduced(e, c.clone() * &F::from_int(m[si] as i64));
            }
        }
        out
    }

    fn add_reduced(&mut self, m: TrigMonomial, c: F) {
        for k in [1, 3] {
            if m[k] >= 2 {
                let mut a = m;
                a[k] -= 2;
                let mut b = a;
                b[k - 1] += 2;
                self.add_reduced(a, c.clone());
                self.add_reduced(b, -c);
                return;
            }
        }
        self.add_term(m, c);
    }

    fn add_term(&mut self, m: TrigMonomial, c: F) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(v) => {
                let sum = v.clone() + &c;
                if sum.is_zero() {
                    self.terms.remove(&m);
                } else {
                    *v = sum;
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }
}

impl<F: Field> Add for &TrigPoly<F> {
    type Output = TrigPoly<F>;

    fn add(self, rhs: &TrigPoly<F>) -> TrigPoly<F> {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(*m, c.clone());
        }
        out
    }
}

impl<F: Field> Sub for &TrigPoly<F> {
    type Output = TrigPoly<F>;

    fn sub(self, rhs: &TrigPoly<F>) -> TrigPoly<F> {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(*m, -c.clone());
        }
        out
    }
}

impl<F: Field> Neg for &TrigPoly<F> {
    type Output = TrigPoly<F>;

    fn neg(self) -> TrigPoly<F> {
        TrigPoly {
            terms: self.terms.iter().map(|(m, c)| (*m, -c.clone())).collect(),
        }
    }
}

impl<F: Field> Neg for TrigPoly<F> {
    type Output = TrigPoly<F>;

    fn neg(self) -> TrigPoly<F> {
        -&self
    }
}

/// Products are kept reduced: `sin²` is rewritten as `1 - cos²` in both
/// angles, so every monomial has sine exponent at most one.
impl<F: Field> Mul for &TrigPoly<F> {
    type Output = TrigPoly<F>;

    fn mul(self, rhs: &TrigPoly<F>) -> TrigPoly<F> {
        let mut out = TrigPoly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                let m = [ma[0] + mb[0], ma[1] + mb[1], ma[2] + mb[2], ma[3] + mb[3]];
                out.add_reduced(m, ca.clone() * cb);
            }
        }
        out
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl<F: Field> $tr for TrigPoly<F> {
            type Output = TrigPoly<F>;

            fn $m(self, rhs: TrigPoly<F>) -> TrigPoly<F> {
                (&self).$m(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

/// `(1-u²)^c (2u)^s (1+u²)^(p-c-s)`, the tan-half image of `cos^c sin^s`
/// multiplied by `(1+u²)^p`.
fn half_angle_factor<F: Field>(c: u32, s: u32, p: u32, cache: &mut PowCache<F>) -> Poly<F> {
    let cos_num = cache.get(0, c);
    let sin_num = cache.get(1, s);
    let rest = cache.get(2, p - c - s);
    &(&cos_num * &sin_num) * &rest
}

struct PowCache<F> {
    bases: [Poly<F>; 3],
    powers: BTreeMap<(usize, u32), Poly<F>>,
}

impl<F: Field> PowCache<F> {
    fn new() -> Self {
        PowCache {
            bases: [
                Poly::from_ints(&[1, 0, -1]),
                Poly::from_ints(&[0, 2]),
                Poly::from_ints(&[1, 0, 1]),
            ],
            powers: BTreeMap::new(),
        }
    }

    fn get(&mut self, which: usize, e: u32) -> Poly<F> {
        if let Some(p) = self.powers.get(&(which, e)) {
            return p.clone();
        }
        let p = self.bases[which].pow(e);
        self.powers.insert((which, e), p.clone());
        p
    }
}

/// Tan-half substitution with minimal cleared denominators.
///
/// Returns the numerator `N(t, t₁)` and the exponents `p, q` such that
/// `expr(α, θ₁) = N(tan(α/2), tan(θ₁/2)) / ((1+t²)^p (1+t₁²)^q)`.
pub fn tan_half_substitute<F: Field>(expr: &TrigPoly<F>) -> TanHalf<F> {
    let (p, q) = expr.degrees();
    let mut cache = PowCache::new();
    // Group by the α-exponents so each t-factor is built once.
    let mut by_alpha: BTreeMap<(u8, u8), Poly<F>> = BTreeMap::new();
    for (m, c) in expr.terms() {
        let t1_part = half_angle_factor(m[2] as u32, m[3] as u32, q, &mut cache).scale(c);
        let entry = by_alpha.entry((m[0], m[1])).or_insert_with(Poly::zero);
        *entry = &*entry + &t1_part;
    }
    let mut numerator = BiPoly::zero();
    for ((ca, sa), t1_poly) in by_alpha {
        let t_poly = half_angle_factor(ca as u32, sa as u32, p, &mut cache);
        let lifted_t = BiPoly::from_univariate(&t_poly, Var::T);
        let lifted_t1 = BiPoly::from_univariate(&t1_poly, Var::T1);
        numerator = &numerator + &(&lifted_t * &lifted_t1);
    }
    let one_plus_sq = Poly::from_ints(&[1, 0, 1]);
    let (mut alpha_power, mut theta1_power) = (p, q);
    if numerator.is_zero() {
        return TanHalf {
            numerator,
            alpha_power: 0,
            theta1_power: 0,
        };
    }
    while alpha_power > 0 {
        match numerator.exact_div_univariate(&one_plus_sq, Var::T) {
            Some(n) => {
                numerator = n;
                alpha_power -= 1;
            }
            None => break,
        }
    }
    while theta1_power > 0 {
        match numerator.exact_div_univariate(&one_plus_sq, Var::T1) {
            Some(n) => {
                numerator = n;
                theta1_power -= 1;
            }
            None => break,
        }
    }
    TanHalf {
        numerator,
        alpha_power,
        theta1_power,
    }
}

impl<F: Field> TanHalf<F> {
    /// Evaluates `numerator / denominators` at the given angles (f64).
    pub fn eval_angles_f64(&self, alpha: f64, theta1: f64) -> f64 {
        let t = (alpha / 2.0).tan();
        let t1 = (theta1 / 2.0).tan();
        let num = self.numerator.to_f64().eval(t, t1);
        num / ((1.0 + t * t).powi(self.alpha_power as i32) * (1.0 + t1 * t1).powi(self.theta1_power as i32))
    }
}
