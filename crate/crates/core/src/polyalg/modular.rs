//! Multi-modular reconstruction of polynomials over `Q(h)`.
//!
//! Exact Euclidean algorithms over `Q(h)` suffer from coefficient growth.
//! Instead, a monic polynomial is computed as an image in
//! `F_p[h]/(h² − D)` for several word-size primes `p` with `D` a quadratic
//! non-residue (so the quotient ring is the field `F_{p²}`), and its
//! coefficients are recovered by Chinese remaindering followed by rational
//! reconstruction. Every reconstruction is checked against one more prime.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::bivariate::BiPoly;
use super::field::{Field, QuadNum};
use super::univariate::{Poly, QuadPoly};
use crate::error::{Error, Result};

/// Element `a + b·h` of `F_p[h]/(h² − d)`.
///
/// Integer constants created without a modulus (through [`Field::from_int`],
/// `zero` or `one`) are kept unbound, with `p = 0` and the value stored as an
/// `i64` in `a`, and bind to the modulus of the first bound operand.
#[derive(Clone, Copy)]
pub struct ModQuad {
    a: u64,
    b: u64,
    p: u64,
    d: u64,
}

/// Modulus and non-residue for one prime.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModContext {
    pub p: u64,
    pub d: u64,
}

fn mulmod(x: u64, y: u64, p: u64) -> u64 {
    ((x as u128 * y as u128) % p as u128) as u64
}

fn addmod(x: u64, y: u64, p: u64) -> u64 {
    let s = x as u128 + y as u128;
    (s % p as u128) as u64
}

fn submod(x: u64, y: u64, p: u64) -> u64 {
    if x >= y {
        x - y
    } else {
        p - (y - x)
    }
}

fn powmod(mut x: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    x %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = mulmod(acc, x, p);
        }
        x = mulmod(x, x, p);
        e >>= 1;
    }
    acc
}

fn invmod(x: u64, p: u64) -> u64 {
    assert!(!x.is_multiple_of(p), "inverse of zero modulo {p}");
    let (mut r0, mut r1) = (p as i128, (x % p) as i128);
    let (mut s0, mut s1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
    }
    s0.rem_euclid(p as i128) as u64
}

/// Deterministic Miller-Rabin for 64-bit integers.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for small in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(small) {
            return n == small;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = powmod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Primes below `2⁶²`, in decreasing order.
pub fn primes_below_2_62() -> impl Iterator<Item = u64> {
    let mut n = (1u64 << 62) - 1;
    std::iter::from_fn(move || {
        while n > 3 {
            let c = n;
            n -= 2;
            if is_prime_u64(c) {
                return Some(c);
            }
        }
        None
    })
}

fn big_mod(x: &BigInt, p: u64) -> u64 {
    let r = x.mod_floor(&BigInt::from(p));
    r.to_u64().expect("reduced residue fits")
}

/// Image of a rational number modulo `p`, `None` when `p` divides the
/// denominator.
pub fn ratio_mod(x: &BigRational, p: u64) -> Option<u64> {
    let den = big_mod(x.denom(), p);
    if den == 0 {
        return None;
    }
    Some(mulmod(big_mod(x.numer(), p), invmod(den, p), p))
}

impl ModContext {
    /// Context for `h² = disc` modulo `p`, if `disc` is a non-residue.
    pub fn new(p: u64, disc: &BigRational) -> Option<Self> {
        let d = ratio_mod(disc, p)?;
        if d == 0 || powmod(d, (p - 1) / 2, p) != p - 1 {
            return None;
        }
        Some(ModContext { p, d })
    }

    pub fn element(&self, a: u64, b: u64) -> ModQuad {
        ModQuad {
            a: a % self.p,
            b: b % self.p,
            p: self.p,
            d: self.d,
        }
    }

    pub fn reduce(&self, x: &QuadNum) -> Option<ModQuad> {
        Some(self.element(ratio_mod(x.re(), self.p)?, ratio_mod(x.im(), self.p)?))
    }

    pub fn reduce_poly(&self, p: &QuadPoly) -> Option<Poly<ModQuad>> {
        let coeffs: Option<Vec<ModQuad>> = p.coeffs().iter().map(|c| self.reduce(c)).collect();
        Some(Poly::new(coeffs?))
    }

    pub fn reduce_bipoly(&self, f: &BiPoly<QuadNum>) -> Option<BiPoly<ModQuad>> {
        let rows: Option<Vec<Poly<ModQuad>>> = f.rows().iter().map(|r| self.reduce_poly(r)).collect();
        Some(BiPoly::new(rows?))
    }
}

impl ModQuad {
    fn bound_parts(&self, p: u64) -> (u64, u64) {
        if self.p == 0 {
            let v = self.a as i64;
            ((v as i128).rem_euclid(p as i128) as u64, 0)
        } else {
            (self.a, self.b)
        }
    }

    fn context(&self, other: &ModQuad) -> Option<(u64, u64)> {
        match (self.p, other.p) {
            (0, 0) => None,
            (0, _) => Some((other.p, other.d)),
            (p, 0) => Some((p, self.d)),
            (p, q) => {
                assert_eq!(p, q, "mixing different moduli");
                Some((p, self.d))
            }
        }
    }

    fn unbound(v: i64) -> Self {
        ModQuad {
            a: v as u64,
            b: 0,
            p: 0,
            d: 0,
        }
    }

    /// `(a, b)` with `self = a + b·h`, or `None` for an unbound constant.
    pub fn parts(&self) -> Option<(u64, u64)> {
        (self.p != 0).then_some((self.a, self.b))
    }

    fn combine(
        self,
        rhs: &ModQuad,
        bound: impl Fn(u64, u64, u64, u64, u64, u64) -> (u64, u64),
        unbound: impl Fn(i64, i64) -> i64,
    ) -> ModQuad {
        match self.context(rhs) {
            None => ModQuad::unbound(unbound(self.a as i64, rhs.a as i64)),
            Some((p, d)) => {
                let (a, b) = self.bound_parts(p);
                let (c, e) = rhs.bound_parts(p);
                let (x, y) = bound(a, b, c, e, p, d);
                ModQuad { a: x, b: y, p, d }
            }
        }
    }
}

impl fmt::Debug for ModQuad {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.p == 0 {
            write!(f, "{}", self.a as i64)
        } else {
            write!(f, "({} + {}h mod {})", self.a, self.b, self.p)
        }
    }
}

impl PartialEq for ModQuad {
    fn eq(&self, other: &Self) -> bool {
        match self.context(other) {
            None => self.a == other.a,
            Some((p, _)) => self.bound_parts(p) == other.bound_parts(p),
        }
    }
}

impl Zero for ModQuad {
    fn zero() -> Self {
        ModQuad::unbound(0)
    }

    fn is_zero(&self) -> bool {
        self.a == 0 && self.b == 0
    }
}

impl One for ModQuad {
    fn one() -> Self {
        ModQuad::unbound(1)
    }
}

impl Neg for ModQuad {
    type Output = ModQuad;

    fn neg(self) -> ModQuad {
        if self.p == 0 {
            let v = (self.a as i64).checked_neg().expect("unbound constant overflow");
            return ModQuad::unbound(v);
        }
        ModQuad {
            a: submod(0, self.a, self.p),
            b: submod(0, self.b, self.p),
            ..self
        }
    }
}

impl<'a> Add<&'a ModQuad> for ModQuad {
    type Output = ModQuad;

    fn add(self, rhs: &'a ModQuad) -> ModQuad {
        self.combine(
            rhs,
            |a, b, c, e, p, _| (addmod(a, c, p), addmod(b, e, p)),
            |x, y| x.checked_add(y).expect("unbound constant overflow"),
        )
    }
}

impl<'a> Sub<&'a ModQuad> for ModQuad {
    type Output = ModQuad;

    fn sub(self, rhs: &'a ModQuad) -> ModQuad {
        self.combine(
            rhs,
            |a, b, c, e, p, _| (submod(a, c, p), submod(b, e, p)),
            |x, y| x.checked_sub(y).expect("unbound constant overflow"),
        )
    }
}

impl<'a> Mul<&'a ModQuad> for ModQuad {
    type Output = ModQuad;

    fn mul(self, rhs: &'a ModQuad) -> ModQuad {
        self.combine(
            rhs,
            |a, b, c, e, p, d| {
                let re = addmod(mulmod(a, c, p), mulmod(mulmod(b, e, p), d, p), p);
                let im = addmod(mulmod(a, e, p), mulmod(b, c, p), p);
                (re, im)
            },
            |x, y| x.checked_mul(y).expect("unbound constant overflow"),
        )
    }
}

impl<'a> Div<&'a ModQuad> for ModQuad {
    type Output = ModQuad;

    fn div(self, rhs: &'a ModQuad) -> ModQuad {
        self.combine(
            rhs,
            |a, b, c, e, p, d| {
                // (c + e h)^-1 = (c − e h) / (c² − e² d)
                let norm = submod(mulmod(c, c, p), mulmod(mulmod(e, e, p), d, p), p);
                let inv = invmod(norm, p);
                let (ic, ie) = (mulmod(c, inv, p), submod(0, mulmod(e, inv, p), p));
                let re = addmod(mulmod(a, ic, p), mulmod(mulmod(b, ie, p), d, p), p);
                let im = addmod(mulmod(a, ie, p), mulmod(b, ic, p), p);
                (re, im)
            },
            |x, y| {
                assert!(y != 0 && x % y == 0, "inexact division of unbound constants");
                x / y
            },
        )
    }
}

#[allow(clippy::op_ref)]
impl Add for ModQuad {
    type Output = ModQuad;
    fn add(self, rhs: ModQuad) -> ModQuad {
        self + &rhs
    }
}

#[allow(clippy::op_ref)]
impl Mul for ModQuad {
    type Output = ModQuad;
    fn mul(self, rhs: ModQuad) -> ModQuad {
        self * &rhs
    }
}

impl Field for ModQuad {
    fn from_int(n: i64) -> Self {
        ModQuad::unbound(n)
    }

    fn approx_f64(&self) -> f64 {
        if self.p == 0 {
            self.a as i64 as f64
        } else {
            f64::NAN
        }
    }
}

/// Rational reconstruction of `r mod m`: the fraction `n/d` with
/// `|n|, d ≤ √(m/2)`, if one exists.
pub fn rational_reconstruct(r: &BigInt, m: &BigInt) -> Option<BigRational> {
    let bound = (m / BigInt::from(2)).sqrt();
    let (mut r0, mut r1) = (m.clone(), r.mod_floor(m));
    let (mut t0, mut t1) = (BigInt::zero(), BigInt::one());
    while r1 > bound {
        let q = &r0 / &r1;
        let r2 = &r0 - &q * &r1;
        let t2 = &t0 - &q * &t1;
        (r0, r1) = (r1, r2);
        (t0, t1) = (t1, t2);
    }
    if t1.is_zero() || t1.abs() > bound {
        return None;
    }
    let frac = BigRational::new(r1, t1);
    let check = ratio_mod_big(&frac, m)?;
    (check == r.mod_floor(m)).then_some(frac)
}

fn ratio_mod_big(x: &BigRational, m: &BigInt) -> Option<BigInt> {
    let den = x.denom().mod_floor(m);
    let g = den.extended_gcd(m);
    if !g.gcd.is_one() {
        return None;
    }
    Some((x.numer() * g.x).mod_floor(m))
}

/// Combines residues into `(value mod M, M)`.
fn crt(residues: &[(u64, u64)]) -> (BigInt, BigInt) {
    let mut value = BigInt::zero();
    let mut modulus = BigInt::one();
    for &(r, p) in residues {
        let pb = BigInt::from(p);
        // value + modulus·k ≡ r (mod p)
        let cur = big_mod(&value, p);
        let mm = big_mod(&modulus, p);
        let k = mulmod(submod(r % p, cur, p), invmod(mm, p), p);
        value += &modulus * BigInt::from(k);
        modulus *= pb;
    }
    (value, modulus)
}

/// Modular images of one polynomial, keyed by degree.
struct Images {
    by_degree: BTreeMap<usize, Vec<(ModContext, Vec<(u64, u64)>)>>,
}

fn image_parts(p: &Poly<ModQuad>, ctx: &ModContext) -> Vec<(u64, u64)> {
    p.coeffs().iter().map(|c| c.bound_parts(ctx.p)).collect()
}

fn reconstruct_from(images: &[(ModContext, Vec<(u64, u64)>)], disc: &Arc<BigRational>) -> Option<QuadPoly> {
    let n = images[0].1.len();
    let mut coeffs = Vec::with_capacity(n);
    for k in 0..n {
        let re: Vec<(u64, u64)> = images.iter().map(|(c, v)| (v[k].0, c.p)).collect();
        let im: Vec<(u64, u64)> = images.iter().map(|(c, v)| (v[k].1, c.p)).collect();
        let (rv, m) = crt(&re);
        let (iv, _) = crt(&im);
        let re = rational_reconstruct(&rv, &m)?;
        let im = rational_reconstruct(&iv, &m)?;
        coeffs.push(QuadNum::new(re, im, disc.clone()));
    }
    Some(Poly::new(coeffs))
}

/// Summary of a modular reconstruction.
#[derive(Debug, Clone)]
pub struct Reconstruction<T> {
    pub poly: QuadPoly,
    /// Side information returned by the image function for the last prime
    /// of the accepted degree class.
    pub info: T,
    pub primes_used: usize,
}

/// Reconstructs a monic polynomial over `Q(h)`, `h² = disc`, from images
/// computed by `image` for successive primes.
///
/// `image` returns `None` for primes it considers unlucky. Images are
/// grouped by degree and the largest group is used; a reconstruction is
/// accepted once it reproduces the image of a further prime.
pub fn reconstruct_monic<T: Clone>(
    disc: &BigRational,
    max_primes: usize,
    mut image: impl FnMut(&ModContext) -> Option<(Poly<ModQuad>, T)>,
) -> Result<Reconstruction<T>> {
    let disc_arc = Arc::new(disc.clone());
    let mut images = Images {
        by_degree: BTreeMap::new(),
    };
    let mut info_by_degree: BTreeMap<usize, T> = BTreeMap::new();
    let mut tried = 0;
    for p in primes_below_2_62() {
        if tried >= max_primes {
            break;
        }
        let Some(ctx) = ModContext::new(p, disc) else {
            continue;
        };
        tried += 1;
        let Some((poly, info)) = image(&ctx) else {
            continue;
        };
        let Some(deg) = poly.degree() else {
            continue;
        };
        let poly = poly.monic();
        let parts = image_parts(&poly, &ctx);
        info_by_degree.insert(deg, info);
        let group = images.by_degree.entry(deg).or_default();
        group.push((ctx, parts));
        let (&best_deg, best) = images
            .by_degree
            .iter()
            .max_by_key(|(d, g)| (g.len(), **d))
            .expect("nonempty");
        if best_deg != deg || best.len() < 2 {
            continue;
        }
        let (check_ctx, check_parts) = best.last().unwrap();
        if let Some(q) = reconstruct_from(&best[..best.len() - 1], &disc_arc) {
            let reduced = check_ctx.reduce_poly(&q).map(|r| image_parts(&r, check_ctx));
            if reduced.as_ref() == Some(check_parts) {
                return Ok(Reconstruction {
                    poly: q,
                    info: info_by_degree[&deg].clone(),
                    primes_used: tried,
                });
            }
        }
    }
    Err(Error::Numeric(format!(
        "modular reconstruction did not stabilize within {max_primes} primes"
    )))
}
