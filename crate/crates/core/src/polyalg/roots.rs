//! Certified real-root isolation for polynomials with rational coefficients.
//!
//! Roots are isolated by Descartes' rule of signs with dyadic bisection
//! (Vincent–Collins–Akritas) on the primitive integer form of the input, then
//! refined by exact sign evaluation at dyadic points. All arithmetic is on
//! big integers, so enclosures are certified.

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::field::ratio_to_f64;
use super::univariate::{primitive_integer, RatPoly};
use crate::error::{Error, Result};

/// Degree above which isolation is refused.
pub const DEFAULT_DEGREE_CAP: usize = 128;

/// A real root known to lie in `[lo, hi]` (a point when `lo == hi`).
#[derive(Debug, Clone, PartialEq)]
pub struct RealRoot {
    pub lo: BigRational,
    pub hi: BigRational,
}

impl RealRoot {
    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    pub fn midpoint(&self) -> BigRational {
        (&self.lo + &self.hi) / BigRational::from_integer(BigInt::from(2))
    }

    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn to_f64(&self) -> f64 {
        ratio_to_f64(&self.midpoint())
    }
}

/// Interval to search for roots in.
#[derive(Debug, Clone)]
pub enum RootInterval {
    WholeLine,
    Closed(BigRational, BigRational),
}

/// Isolates every real root of `p` in `interval` and refines each enclosure
/// to width at most `2^-precision_bits`. Multiple roots are reported once.
pub fn real_roots(
    p: &RatPoly,
    interval: &RootInterval,
    precision_bits: u32,
    degree_cap: usize,
) -> Result<Vec<RealRoot>> {
    let Some(deg) = p.degree() else {
        return Err(Error::InvalidInput("real roots of the zero polynomial".into()));
    };
    if deg > degree_cap {
        return Err(Error::DegreeCapExceeded {
            degree: deg,
            cap: degree_cap,
        });
    }
    if deg == 0 {
        return Ok(Vec::new());
    }
    let sqf = {
        let g = p.gcd(&p.derivative());
        p.exact_div(&g).expect("gcd divides")
    };
    Ok(isolate_and_refine(&sqf, interval, precision_bits))
}

/// Like [`real_roots`] for a polynomial already known to be square-free,
/// which skips the gcd with the derivative.
pub fn real_roots_squarefree(
    p: &RatPoly,
    interval: &RootInterval,
    precision_bits: u32,
    degree_cap: usize,
) -> Result<Vec<RealRoot>> {
    let Some(deg) = p.degree() else {
        return Err(Error::InvalidInput("real roots of the zero polynomial".into()));
    };
    if deg > degree_cap {
        return Err(Error::DegreeCapExceeded {
            degree: deg,
            cap: degree_cap,
        });
    }
    if deg == 0 {
        return Ok(Vec::new());
    }
    Ok(isolate_and_refine(p, interval, precision_bits))
}

fn isolate_and_refine(sqf: &RatPoly, interval: &RootInterval, precision_bits: u32) -> Vec<RealRoot> {
    let ints = primitive_integer(sqf);
    let mut roots = isolate(&ints);
    for root in roots.iter_mut() {
        refine(&ints, root, precision_bits);
    }
    if let RootInterval::Closed(a, b) = interval {
        roots.retain(|r| {
            let m = r.midpoint();
            &m >= a && &m <= b
        });
    }
    roots
}

/// Number of sign changes in a coefficient sequence, zeros skipped.
fn sign_variations(coeffs: &[BigInt]) -> usize {
    let mut last = Sign::NoSign;
    let mut count = 0;
    for c in coeffs {
        let s = c.sign();
        if s == Sign::NoSign {
            continue;
        }
        if last != Sign::NoSign && s != last {
            count += 1;
        }
        last = s;
    }
    count
}

/// `p(x + 1)` by repeated synthetic division.
fn taylor_shift_one(p: &[BigInt]) -> Vec<BigInt> {
    let mut a = p.to_vec();
    let n = a.len();
    for i in 0..n {
        for j in (i..n - 1).rev() {
            let next = a[j + 1].clone();
            a[j] += next;
        }
    }
    a
}

/// Upper bound on the number of roots in `(0, 1)` of `p`.
fn descartes_unit(p: &[BigInt]) -> usize {
    let mut rev = p.to_vec();
    rev.reverse();
    sign_variations(&taylor_shift_one(&rev))
}

/// `2^n p(x/2)`: restricts to the left half of the unit interval.
fn halve(p: &[BigInt]) -> Vec<BigInt> {
    let n = p.len() - 1;
    p.iter().enumerate().map(|(i, c)| c << (n - i)).collect()
}

/// Smallest `k` with every root of `p` in `(-2^k, 2^k)` (Cauchy bound).
fn root_bound_log2(p: &[BigInt]) -> u64 {
    let lead = p.last().unwrap().abs();
    let max_ratio_bits = p[..p.len() - 1]
        .iter()
        .filter(|c| !c.is_zero())
        .map(|c| c.abs().bits() as i64 - lead.bits() as i64 + 1)
        .max()
        .unwrap_or(0);
    (max_ratio_bits.max(0) as u64) + 1
}

fn dyadic(num: BigInt, exp: u64) -> BigRational {
    BigRational::new(num, BigInt::one() << exp)
}

/// Isolates the roots of the square-free integer polynomial `p`.
fn isolate(p: &[BigInt]) -> Vec<RealRoot> {
    let mut roots = Vec::new();
    let mut p = p.to_vec();
    if p[0].is_zero() {
        roots.push(RealRoot {
            lo: BigRational::zero(),
            hi: BigRational::zero(),
        });
        p.remove(0);
    }
    if p.len() <= 1 {
        return roots;
    }
    let k = root_bound_log2(&p);
    // Positive roots: q(x) = p(2^k x) on (0, 1).
    let pos: Vec<BigInt> = p.iter().enumerate().map(|(i, c)| c << (k as usize * i)).collect();
    let neg: Vec<BigInt> = pos
        .iter()
        .enumerate()
        .map(|(i, c)| if i % 2 == 1 { -c } else { c.clone() })
        .collect();
    let mut positive = Vec::new();
    unit_roots(pos, BigInt::zero(), 0, &mut positive);
    let mut negative = Vec::new();
    unit_roots(neg, BigInt::zero(), 0, &mut negative);
    for (c, e, exact) in negative {
        // interval (c/2^e, (c+1)/2^e) scaled by 2^k, negated
        let (lo, hi) = if exact {
            let v = -dyadic(c, e) * dyadic(BigInt::one() << k as usize, 0);
            (v.clone(), v)
        } else {
            (
                -dyadic(&c + 1, e) * dyadic(BigInt::one() << k as usize, 0),
                -dyadic(c, e) * dyadic(BigInt::one() << k as usize, 0),
            )
        };
        roots.push(RealRoot { lo, hi });
    }
    for (c, e, exact) in positive {
        let scale = dyadic(BigInt::one() << k as usize, 0);
        let (lo, hi) = if exact {
            let v = dyadic(c, e) * &scale;
            (v.clone(), v)
        } else {
            (dyadic(c.clone(), e) * &scale, dyadic(c + 1, e) * &scale)
        };
        roots.push(RealRoot { lo, hi });
    }
    roots.sort_by(|a, b| a.lo.cmp(&b.lo));
    roots
}

/// Roots of `q` in `(0, 1)`, where `q` is the original polynomial restricted
/// to `[c/2^e, (c+1)/2^e]` and rescaled to the unit interval. Emits
/// `(c, e, exact)` triples: exact roots sit at the left endpoint.
fn unit_roots(q: Vec<BigInt>, c: BigInt, e: u64, out: &mut Vec<(BigInt, u64, bool)>) {
    let mut stack = vec![(q, c, e)];
    while let Some((q, c, e)) = stack.pop() {
        let v = descartes_unit(&q);
        if v == 0 {
            continue;
        }
        if v == 1 {
            out.push((c, e, false));
            continue;
        }
        let left = halve(&q);
        let mut right = taylor_shift_one(&left);
        let (c2, e2) = (&c << 1usize, e + 1);
        // Root exactly at the midpoint.
        if right[0].is_zero() {
            out.push((&c2 + 1, e2, true));
            right.remove(0);
        }
        stack.push((right, &c2 + 1, e2));
        stack.push((left, c2, e2));
    }
}

/// Sign of `p(num / 2^exp)` by integer Horner on the homogenised form.
fn sign_at_dyadic(p: &[BigInt], num: &BigInt, exp: u64) -> Sign {
    let n = p.len() - 1;
    let mut acc = BigInt::zero();
    for (i, c) in p.iter().enumerate().rev() {
        acc = acc * num + (c << (exp as usize * (n - i)));
    }
    acc.sign()
}

fn as_dyadic(r: &BigRational) -> Option<(BigInt, u64)> {
    let d = r.denom();
    if d.is_zero() || (d & (d - BigInt::one())) != BigInt::zero() {
        return None;
    }
    Some((r.numer().clone(), d.bits() - 1))
}

fn sign_at(p: &[BigInt], x: &BigRational) -> Sign {
    if let Some((num, exp)) = as_dyadic(x) {
        return sign_at_dyadic(p, &num, exp);
    }
    let mut acc = BigRational::zero();
    for c in p.iter().rev() {
        acc = acc * x + BigRational::from_integer(c.clone());
    }
    if acc.is_zero() {
        Sign::NoSign
    } else if acc.is_positive() {
        Sign::Plus
    } else {
        Sign::Minus
    }
}

/// Descartes count of roots of `p` in the open interval `(a, b)`.
fn descartes_count(p: &[BigInt], a: &BigRational, b: &BigRational) -> usize {
    // q(x) = p(a + (b - a) x) on (0, 1), computed in rationals then cleared.
    let w = b - a;
    let n = p.len() - 1;
    let mut q = vec![BigRational::zero(); n + 1];
    for c in p.iter().rev() {
        // q = q * (a + w x) + c
        let mut next = vec![BigRational::zero(); n + 1];
        for i in 0..n + 1 {
            if q[i].is_zero() {
                continue;
            }
            next[i] += &q[i] * a;
            if i < n {
                next[i + 1] += &q[i] * &w;
            }
        }
        next[0] += BigRational::from_integer(c.clone());
        q = next;
    }
    let lcm = q
        .iter()
        .fold(BigInt::one(), |acc, c| num_integer::Integer::lcm(&acc, c.denom()));
    let ints: Vec<BigInt> = q
        .iter()
        .map(|c| (c * BigRational::from_integer(lcm.clone())).to_integer())
        .collect();
    descartes_unit(&ints)
}

/// Narrows an isolating interval to width `2^-bits`.
fn refine(p: &[BigInt], root: &mut RealRoot, bits: u32) {
    if root.is_exact() {
        return;
    }
    let target = BigRational::new(BigInt::one(), BigInt::one() << bits as usize);
    let two = BigRational::from_integer(BigInt::from(2));
    let mut s_lo = sign_at(p, &root.lo);
    let mut s_hi = sign_at(p, &root.hi);
    while root.width() > target {
        let mid = (&root.lo + &root.hi) / &two;
        let s_mid = sign_at(p, &mid);
        if s_mid == Sign::NoSign {
            root.lo = mid.clone();
            root.hi = mid;
            return;
        }
        let go_left = if s_lo != Sign::NoSign && s_hi != Sign::NoSign {
            s_lo != s_mid
        } else {
            // An endpoint is itself a root of a neighbouring enclosure;
            // fall back to counting.
            descartes_count(p, &root.lo, &mid) == 1
        };
        if go_left {
            root.hi = mid;
            s_hi = s_mid;
        } else {
            root.lo = mid;
            s_lo = s_mid;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyalg::univariate::Poly;

    fn roots_f64(p: &RatPoly) -> Vec<f64> {
        real_roots(p, &RootInterval::WholeLine, 60, DEFAULT_DEGREE_CAP)
            .unwrap()
            .iter()
            .map(RealRoot::to_f64)
            .collect()
    }

    #[test]
    fn constructed_roots() {
        let p = RatPoly::from_roots(&[0, 1, -2]);
        assert_eq!(roots_f64(&p), vec![-2.0, 0.0, 1.0]);
    }

    #[test]
    fn no_real_roots() {
        assert!(roots_f64(&RatPoly::from_ints(&[1, 0, 1])).is_empty());
    }

    #[test]
    fn irrational_roots_refined() {
        let p = RatPoly::from_ints(&[-2, 0, 1]);
        let r = real_roots(&p, &RootInterval::WholeLine, 100, 128).unwrap();
        assert_eq!(r.len(), 2);
        let w = BigRational::new(BigInt::one(), BigInt::one() << 100usize);
        assert!(r[1].width() <= w);
        assert!((r[1].to_f64() - 2f64.sqrt()).abs() < 1e-15);
        assert!((r[0].to_f64() + 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn multiple_roots_reported_once() {
        let p = RatPoly::from_roots(&[3, 3, 3, -1]);
        assert_eq!(roots_f64(&p), vec![-1.0, 3.0]);
    }

    #[test]
    fn close_roots_are_separated() {
        // (1000x - 1)(1001x - 1)(x + 5)
        let p = &(&RatPoly::from_ints(&[-1, 1000]) * &RatPoly::from_ints(&[-1, 1001])) * &RatPoly::from_ints(&[5, 1]);
        let r = roots_f64(&p);
        assert_eq!(r.len(), 3);
        assert!((r[1] - 1.0 / 1001.0).abs() < 1e-15);
        assert!((r[2] - 1.0 / 1000.0).abs() < 1e-15);
    }

    #[test]
    fn interval_filter_and_cap() {
        let p = RatPoly::from_roots(&[-4, 1, 2, 9]);
        let inside = real_roots(
            &p,
            &RootInterval::Closed(BigRational::from_integer(0.into()), BigRational::from_integer(5.into())),
            40,
            128,
        )
        .unwrap();
        assert_eq!(inside.len(), 2);
        let big = Poly::monomial(BigRational::one(), 200);
        assert!(matches!(
            real_roots(&big, &RootInterval::WholeLine, 10, 128),
            Err(Error::DegreeCapExceeded { .. })
        ));
    }

    #[test]
    fn midpoint_roots_found_exactly() {
        // roots at 0.5 (a dyadic bisection point) and 0.25
        let p = &RatPoly::from_ints(&[-1, 2]) * &RatPoly::from_ints(&[-1, 4]);
        let r = real_roots(&p, &RootInterval::WholeLine, 40, 128).unwrap();
        assert_eq!(r.len(), 2);
        assert!(
            r.iter().all(RealRoot::is_exact)
                || r.iter()
                    .all(|x| x.width() <= BigRational::new(1.into(), BigInt::one() << 40usize))
        );
        assert_eq!(r[0].to_f64(), 0.25);
        assert_eq!(r[1].to_f64(), 0.5);
    }
}
