//! Coefficient fields for the exact elimination pipeline.
//!
//! Two fields are used: the rationals, and the quadratic extension `Q(h)`
//! with `h² = D` for a rational `D`. The platform altitude `h` is irrational
//! for almost every geometry, so it is carried as a symbol and only replaced
//! by a numeric value once the pipeline reaches root finding.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Exact field arithmetic used by the polynomial types.
pub trait Field:
    Clone
    + fmt::Debug
    + PartialEq
    + Zero
    + One
    + Send
    + Sync
    + Neg<Output = Self>
    + for<'a> Add<&'a Self, Output = Self>
    + for<'a> Sub<&'a Self, Output = Self>
    + for<'a> Mul<&'a Self, Output = Self>
    + for<'a> Div<&'a Self, Output = Self>
{
    fn from_int(n: i64) -> Self;

    /// Best-effort `f64` value, used for diagnostics and seeding numerics.
    fn approx_f64(&self) -> f64;
}

impl Field for BigRational {
    fn from_int(n: i64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }

    fn approx_f64(&self) -> f64 {
        ratio_to_f64(self)
    }
}

/// Converts a big rational to the nearest-ish `f64` without overflowing on
/// huge numerators and denominators.
pub fn ratio_to_f64(r: &BigRational) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    let nb = r.numer().bits() as i64;
    let db = r.denom().bits() as i64;
    let shift = nb - db;
    // Keep 64 significant bits of the quotient.
    let q = if shift > 64 {
        r.numer() / (r.denom() << ((shift - 64) as usize))
    } else {
        (r.numer() << ((64 - shift) as usize)) / r.denom()
    };
    let mant = q.to_f64().unwrap_or(0.0);
    mant * 2f64.powi((shift - 64) as i32)
}

/// Parses a decimal literal (`"15.91"`, `"-2e3"`, `"0.05"`) into an exact
/// rational, so that `15.91` becomes `1591/100` and not its binary neighbour.
pub fn parse_decimal(text: &str) -> Option<BigRational> {
    let s = text.trim();
    if s.is_empty() {
        return None;
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => (&s[..pos], s[pos + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = match digits.find('.') {
        Some(pos) => (&digits[..pos], &digits[pos + 1..]),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let all = format!("{int_part}{frac_part}");
    let numer = BigInt::from_str(if all.is_empty() { "0" } else { &all }).ok()?;
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut value = BigRational::from_integer(numer);
    if scale >= 0 {
        value *= BigRational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        value /= BigRational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Some(if neg { -value } else { value })
}

/// Exact rational closest to `x` among those produced by its shortest
/// round-trip decimal representation.
pub fn f64_to_decimal_ratio(x: f64) -> BigRational {
    parse_decimal(&format!("{x:e}")).expect("finite float formats as a decimal")
}

/// An element `re + im·h` of `Q(h)`, `h² = D`.
///
/// Elements with `im = 0` are plain rationals and combine with any
/// extension; elements with a nonzero `im` carry their discriminant.
#[derive(Clone)]
pub struct QuadNum {
    re: BigRational,
    im: BigRational,
    disc: Option<Arc<BigRational>>,
}

impl QuadNum {
    pub fn rational(re: BigRational) -> Self {
        QuadNum {
            re,
            im: BigRational::zero(),
            disc: None,
        }
    }

    pub fn new(re: BigRational, im: BigRational, disc: Arc<BigRational>) -> Self {
        QuadNum {
            re,
            im,
            disc: Some(disc),
        }
    }

    /// The generator `h` itself.
    pub fn generator(disc: Arc<BigRational>) -> Self {
        QuadNum::new(BigRational::zero(), BigRational::one(), disc)
    }

    pub fn re(&self) -> &BigRational {
        &self.re
    }

    pub fn im(&self) -> &BigRational {
        &self.im
    }

    pub fn disc(&self) -> Option<&BigRational> {
        self.disc.as_deref()
    }

    pub fn is_rational(&self) -> bool {
        self.im.is_zero()
    }

    /// `re - im·h`.
    pub fn conjugate(&self) -> Self {
        QuadNum {
            re: self.re.clone(),
            im: -self.im.clone(),
            disc: self.disc.clone(),
        }
    }

    /// Substitutes a rational value for `h`.
    pub fn eval_with(&self, h: &BigRational) -> BigRational {
        if self.im.is_zero() {
            self.re.clone()
        } else {
            &self.re + &self.im * h
        }
    }

    fn merged_disc(&self, other: &QuadNum) -> Option<Arc<BigRational>> {
        match (&self.disc, &other.disc) {
            (Some(a), Some(b)) => {
                debug_assert!(Arc::ptr_eq(a, b) || a == b, "mixed quadratic extensions");
                Some(a.clone())
            }
            (Some(a), None) => Some(a.clone()),
            (None, b) => b.clone(),
        }
    }

    fn disc_value(&self) -> BigRational {
        self.disc
            .as_deref()
            .cloned()
            .expect("irrational element without discriminant")
    }
}

impl fmt::Debug for QuadNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            write!(f, "{}", self.re)
        } else {
            write!(f, "({} + {}·h)", self.re, self.im)
        }
    }
}

impl fmt::Display for QuadNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl PartialEq for QuadNum {
    fn eq(&self, other: &Self) -> bool {
        self.re == other.re && self.im == other.im
    }
}

impl Zero for QuadNum {
    fn zero() -> Self {
        QuadNum::rational(BigRational::zero())
    }

    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
}

impl One for QuadNum {
    fn one() -> Self {
        QuadNum::rational(BigRational::one())
    }
}

impl Neg for QuadNum {
    type Output = QuadNum;

    fn neg(self) -> QuadNum {
        QuadNum {
            re: -self.re,
            im: -self.im,
            disc: self.disc,
        }
    }
}

impl<'a> Add<&'a QuadNum> for QuadNum {
    type Output = QuadNum;

    fn add(self, rhs: &'a QuadNum) -> QuadNum {
        let disc = self.merged_disc(rhs);
        QuadNum {
            re: self.re + &rhs.re,
            im: self.im + &rhs.im,
            disc,
        }
    }
}

impl Add for QuadNum {
    type Output = QuadNum;

    fn add(self, rhs: QuadNum) -> QuadNum {
        self + &rhs
    }
}

impl<'a> Sub<&'a QuadNum> for QuadNum {
    type Output = QuadNum;

    fn sub(self, rhs: &'a QuadNum) -> QuadNum {
        let disc = self.merged_disc(rhs);
        QuadNum {
            re: self.re - &rhs.re,
            im: self.im - &rhs.im,
            disc,
        }
    }
}

impl Sub for QuadNum {
    type Output = QuadNum;

    fn sub(self, rhs: QuadNum) -> QuadNum {
        self - &rhs
    }
}

impl<'a> Mul<&'a QuadNum> for QuadNum {
    type Output = QuadNum;

    fn mul(self, rhs: &'a QuadNum) -> QuadNum {
        let disc = self.merged_disc(rhs);
        if self.im.is_zero() {
            if rhs.im.is_zero() {
                return QuadNum {
                    re: self.re * &rhs.re,
                    im: BigRational::zero(),
                    disc,
                };
            }
            return QuadNum {
                re: &self.re * &rhs.re,
                im: self.re * &rhs.im,
                disc,
            };
        }
        if rhs.im.is_zero() {
            return QuadNum {
                re: self.re * &rhs.re,
                im: self.im * &rhs.re,
                disc,
            };
        }
        let d = self.disc_value();
        let re = &self.re * &rhs.re + &self.im * &rhs.im * d;
        let im = self.re * &rhs.im + self.im * &rhs.re;
        QuadNum { re, im, disc }
    }
}

impl Mul for QuadNum {
    type Output = QuadNum;

    fn mul(self, rhs: QuadNum) -> QuadNum {
        self * &rhs
    }
}

impl<'a> Div<&'a QuadNum> for QuadNum {
    type Output = QuadNum;

    fn div(self, rhs: &'a QuadNum) -> QuadNum {
        assert!(!rhs.is_zero(), "division by zero in Q(h)");
        if rhs.im.is_zero() {
            let disc = self.merged_disc(rhs);
            return QuadNum {
                re: self.re / &rhs.re,
                im: self.im / &rhs.re,
                disc,
            };
        }
        // (a + bh)^-1 = (a - bh) / (a² - b²D)
        let d = rhs.disc_value();
        let norm = &rhs.re * &rhs.re - &rhs.im * &rhs.im * d;
        assert!(!norm.is_zero(), "h² = D is a perfect square; Q(h) is not a field");
        let inv = QuadNum {
            re: &rhs.re / &norm,
            im: -(&rhs.im / &norm),
            disc: rhs.disc.clone(),
        };
        self * &inv
    }
}

impl Div for QuadNum {
    type Output = QuadNum;

    fn div(self, rhs: QuadNum) -> QuadNum {
        self / &rhs
    }
}

impl Field for QuadNum {
    fn from_int(n: i64) -> Self {
        QuadNum::rational(BigRational::from_integer(BigInt::from(n)))
    }

    fn approx_f64(&self) -> f64 {
        let re = ratio_to_f64(&self.re);
        if self.im.is_zero() {
            return re;
        }
        let d = ratio_to_f64(&self.disc_value());
        re + ratio_to_f64(&self.im) * d.sqrt()
    }
}

/// `sqrt(value)` when it is rational.
pub fn exact_sqrt(value: &BigRational) -> Option<BigRational> {
    if value.is_negative() {
        return None;
    }
    let n = value.numer().sqrt();
    let d = value.denom().sqrt();
    (&n * &n == *value.numer() && &d * &d == *value.denom()).then(|| BigRational::new(n, d))
}

/// Rational approximation of `sqrt(value)` with absolute error below
/// `2^-bits`, computed by integer square root on a scaled numerator.
pub fn sqrt_ratio(value: &BigRational, bits: u32) -> BigRational {
    assert!(!value.is_negative(), "square root of a negative rational");
    // sqrt(n/d) = sqrt(n·d·4^k) / (d·2^k)
    let scale = BigInt::one() << (2 * bits as usize + 8);
    let radicand = value.numer() * value.denom() * &scale;
    let root = radicand.sqrt();
    BigRational::new(root, value.denom() * (BigInt::one() << (bits as usize + 4)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn rational_square_roots() {
        assert_eq!(exact_sqrt(&q(9, 4)), Some(q(3, 2)));
        assert_eq!(exact_sqrt(&q(0, 1)), Some(q(0, 1)));
        assert_eq!(exact_sqrt(&q(2, 1)), None);
    }

    #[test]
    fn decimal_parsing_is_exact() {
        assert_eq!(parse_decimal("15.91").unwrap(), q(1591, 100));
        assert_eq!(parse_decimal("-0.05").unwrap(), q(-1, 20));
        assert_eq!(parse_decimal("2e3").unwrap(), q(2000, 1));
        assert_eq!(parse_decimal("1.5E-2").unwrap(), q(3, 200));
        assert_eq!(parse_decimal("10").unwrap(), q(10, 1));
        assert!(parse_decimal("abc").is_none());
        assert!(parse_decimal("").is_none());
        assert!(parse_decimal("1.2.3").is_none());
    }

    #[test]
    fn quadratic_extension_arithmetic() {
        let d = Arc::new(q(2, 1));
        let h = QuadNum::generator(d.clone());
        let two = QuadNum::from_int(2);
        assert_eq!(h.clone() * &h, two);
        let x = QuadNum::new(q(3, 1), q(1, 2), d.clone());
        let y = QuadNum::new(q(-1, 3), q(5, 1), d);
        let back = (x.clone() * &y) / &y;
        assert_eq!(back, x);
        assert_eq!((x.clone() - &x), QuadNum::zero());
        let n = x.clone() * &x.conjugate();
        assert!(n.is_rational());
        assert_eq!(n.re(), &(q(9, 1) - q(1, 4) * q(2, 1)));
    }

    #[test]
    fn sqrt_ratio_precision() {
        let two = q(2, 1);
        let r = sqrt_ratio(&two, 200);
        let err = (&r * &r - &two).abs();
        assert!(err < q(1, 1) / BigRational::from_integer(BigInt::one() << 190usize));
        assert!((ratio_to_f64(&r) - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn huge_ratio_to_f64() {
        let big = BigRational::new(BigInt::one() << 2000usize, (BigInt::one() << 1999usize) * 3);
        assert!((ratio_to_f64(&big) - 2.0 / 3.0).abs() < 1e-15);
    }
}
