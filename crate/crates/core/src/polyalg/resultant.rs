//! Sylvester resultants over an exact field.
//!
//! The bivariate resultant is obtained by evaluation and interpolation: the
//! Sylvester matrix is built with the *nominal* degrees in the eliminated
//! variable, so its determinant is a polynomial identity in the remaining
//! variable and may be specialised point by point.

use rayon::prelude::*;

use super::bivariate::{BiPoly, Var};
use super::field::Field;
use super::univariate::Poly;

/// Outcome of a bivariate elimination.
#[derive(Debug, Clone)]
pub enum Elimination<F> {
    /// The resultant, a polynomial in the surviving variable.
    Resultant(Poly<F>),
    /// The resultant vanishes identically: the inputs share a factor of
    /// positive degree in the eliminated variable.
    CommonFactor,
}

impl<F: Field> Elimination<F> {
    pub fn into_poly(self) -> Option<Poly<F>> {
        match self {
            Elimination::Resultant(p) => Some(p),
            Elimination::CommonFactor => None,
        }
    }
}

/// Sylvester matrix of `f` (nominal degree `m`) and `g` (nominal degree `n`).
pub fn sylvester_matrix<F: Field>(f: &[F], m: usize, g: &[F], n: usize) -> Vec<Vec<F>> {
    let size = m + n;
    let mut rows = vec![vec![F::zero(); size]; size];
    // Highest degree first in each row.
    for i in 0..n {
        for k in 0..=m {
            rows[i][i + k] = f.get(m - k).cloned().unwrap_or_else(F::zero);
        }
    }
    for i in 0..m {
        for k in 0..=n {
            rows[n + i][i + k] = g.get(n - k).cloned().unwrap_or_else(F::zero);
        }
    }
    rows
}

/// Determinant by Gaussian elimination over the field.
pub fn determinant<F: Field>(mut a: Vec<Vec<F>>) -> F {
    let n = a.len();
    let mut det = F::one();
    for col in 0..n {
        let Some(piv) = (col..n).find(|&r| !a[r][col].is_zero()) else {
            return F::zero();
        };
        if piv != col {
            a.swap(piv, col);
            det = -det;
        }
        let pivot = a[col][col].clone();
        det = det * &pivot;
        let inv = F::one() / &pivot;
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let factor = a[r][col].clone() * &inv;
            for c in col + 1..n {
                if a[col][c].is_zero() {
                    continue;
                }
                let sub = factor.clone() * &a[col][c];
                a[r][c] = a[r][c].clone() - &sub;
            }
            a[r][col] = F::zero();
        }
    }
    det
}

/// Resultant of two univariate polynomials with explicit nominal degrees,
/// i.e. the determinant of the `(m+n)`-square Sylvester matrix even when a
/// leading coefficient vanishes.
pub fn resultant_nominal<F: Field>(f: &Poly<F>, m: usize, g: &Poly<F>, n: usize) -> F {
    if m == 0 {
        return pow(&f.coeff(0), n);
    }
    if n == 0 {
        return pow(&g.coeff(0), m);
    }
    let (Some(df), Some(dg)) = (f.degree(), g.degree()) else {
        return F::zero();
    };
    assert!(df <= m && dg <= n, "actual degree above nominal degree");
    if df < m && dg < n {
        return F::zero();
    }
    // Res_{m,n} = (-1)^{n(m-m')} lc(g)^{m-m'} Res_{m',n} when deg f = m' < m.
    if df < m {
        let k = m - df;
        let r = pow(g.lead().unwrap(), k) * &resultant_euclid(f, g);
        return if (n * k) % 2 == 1 { -r } else { r };
    }
    if dg < n {
        let k = n - dg;
        let r = pow(f.lead().unwrap(), k) * &resultant_euclid(f, g);
        return r;
    }
    resultant_euclid(f, g)
}

/// Resultant of nonzero polynomials at their actual degrees, by the
/// Euclidean remainder sequence.
fn resultant_euclid<F: Field>(a: &Poly<F>, b: &Poly<F>) -> F {
    let mut a = a.clone();
    let mut b = b.clone();
    let mut acc = F::one();
    loop {
        let m = a.degree().unwrap();
        let n = b.degree().unwrap();
        if n == 0 {
            return acc * &pow(&b.coeff(0), m);
        }
        if m == 0 {
            return acc * &pow(&a.coeff(0), n);
        }
        if m < n {
            if (m * n) % 2 == 1 {
                acc = -acc;
            }
            std::mem::swap(&mut a, &mut b);
            continue;
        }
        let (_, r) = a.div_rem(&b);
        let Some(dr) = r.degree() else {
            return F::zero();
        };
        acc = acc * &pow(b.lead().unwrap(), m - dr);
        if (m * n) % 2 == 1 {
            acc = -acc;
        }
        a = b;
        b = r;
    }
}

/// Resultant of two univariate polynomials using their actual degrees.
pub fn resultant_univariate<F: Field>(f: &Poly<F>, g: &Poly<F>) -> F {
    match (f.degree(), g.degree()) {
        (Some(m), Some(n)) => resultant_nominal(f, m, g, n),
        _ => F::zero(),
    }
}

fn pow<F: Field>(x: &F, e: usize) -> F {
    (0..e).fold(F::one(), |acc, _| acc * x)
}

/// Evaluation points 0, 1, -1, 2, -2, …
fn sample_point<F: Field>(k: usize) -> F {
    let half = k.div_ceil(2) as i64;
    F::from_int(if k % 2 == 1 { half } else { -half })
}

/// Newton interpolation through `(xs[i], ys[i])`.
pub fn interpolate<F: Field>(xs: &[F], ys: &[F]) -> Poly<F> {
    let n = xs.len();
    let mut coef: Vec<F> = ys.to_vec();
    for j in 1..n {
        for i in (j..n).rev() {
            let num = coef[i].clone() - &coef[i - 1];
            let den = xs[i].clone() - &xs[i - j];
            coef[i] = num / &den;
        }
    }
    // Horner-expand the Newton form.
    let mut p = Poly::constant(coef[n - 1].clone());
    for i in (0..n - 1).rev() {
        let shift = Poly::new(vec![-xs[i].clone(), F::one()]);
        p = &(&p * &shift) + &Poly::constant(coef[i].clone());
    }
    p
}

/// `Res_var(f, g)`: eliminates `var` and returns a polynomial in the other
/// variable.
pub fn resultant<F: Field>(f: &BiPoly<F>, g: &BiPoly<F>, eliminate: Var) -> Elimination<F> {
    let (f, g) = match eliminate {
        Var::T => (f.clone(), g.clone()),
        Var::T1 => (f.transpose(), g.transpose()),
    };
    let (Some(m), Some(n)) = (f.degree(Var::T), g.degree(Var::T)) else {
        return Elimination::Resultant(Poly::zero());
    };
    if m == 0 && n == 0 {
        return Elimination::Resultant(Poly::one());
    }
    let df = f.degree(Var::T1).unwrap_or(0);
    let dg = g.degree(Var::T1).unwrap_or(0);
    let bound = m * dg + n * df;
    // One extra sample checks the degree bound.
    let xs: Vec<F> = (0..bound + 2).map(sample_point).collect();
    let ys: Vec<F> = xs
        .par_iter()
        .map(|x| {
            let fx = f.eval_t1(x);
            let gx = g.eval_t1(x);
            resultant_nominal(&fx, m, &gx, n)
        })
        .collect();
    let p = interpolate(&xs[..bound + 1], &ys[..bound + 1]);
    debug_assert!(
        p.eval(&xs[bound + 1]) == ys[bound + 1],
        "resultant degree bound violated"
    );
    if p.is_zero() {
        Elimination::CommonFactor
    } else {
        Elimination::Resultant(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_rational::BigRational;

    type Q = BigRational;

    fn r(n: i64) -> Q {
        Q::from_integer(BigInt::from(n))
    }

    #[test]
    fn linear_factor_gives_evaluation() {
        // Res(t - c, g) = ±g(c)
        let g = Poly::<Q>::from_ints(&[3, -1, 0, 2]);
        let f = Poly::<Q>::from_ints(&[-5, 1]);
        let res = resultant_univariate(&f, &g);
        assert_eq!(res.clone() * &res, g.eval(&r(5)) * &g.eval(&r(5)));
    }

    #[test]
    fn quadratic_against_linear() {
        let f = Poly::<Q>::from_ints(&[-2, 0, 1]);
        let g = Poly::<Q>::from_ints(&[-1, 1]);
        let res = resultant_univariate(&f, &g);
        assert!(res == r(-1) || res == r(1));
    }

    #[test]
    fn toy_elimination() {
        // f = t - t₁, g = t - 2t₁ → Res_t = ±t₁
        let f = BiPoly::from_grid(vec![vec![r(0), r(-1)], vec![r(1)]]);
        let g = BiPoly::from_grid(vec![vec![r(0), r(-2)], vec![r(1)]]);
        let res = resultant(&f, &g, Var::T).into_poly().unwrap();
        assert_eq!(res.degree(), Some(1));
        assert_eq!(res.coeff(0), r(0));
    }

    #[test]
    fn shared_factor_is_reported() {
        let common = BiPoly::from_grid(vec![vec![r(1), r(1)], vec![r(1)]]);
        let a = BiPoly::from_grid(vec![vec![r(2)], vec![r(0), r(1)]]);
        let b = BiPoly::from_grid(vec![vec![r(-1), r(3)], vec![r(1)]]);
        let f = &common * &a;
        let g = &common * &b;
        assert!(matches!(resultant(&f, &g, Var::T), Elimination::CommonFactor));
    }

    #[test]
    fn interpolation_recovers_polynomial() {
        let p = Poly::<Q>::from_ints(&[4, -3, 0, 7, 1]);
        let xs: Vec<Q> = (0..5).map(sample_point).collect();
        let ys: Vec<Q> = xs.iter().map(|x| p.eval(x)).collect();
        assert_eq!(interpolate(&xs, &ys), p);
    }

    proptest::proptest! {
        #[test]
        fn euclid_matches_sylvester(
            f in proptest::collection::vec(-4i64..5, 1..6),
            g in proptest::collection::vec(-4i64..5, 1..6),
            pad_f in 0usize..2,
            pad_g in 0usize..2,
        ) {
            let pf = Poly::<Q>::from_ints(&f);
            let pg = Poly::<Q>::from_ints(&g);
            let m = f.len() - 1 + pad_f;
            let n = g.len() - 1 + pad_g;
            let syl = if m + n == 0 {
                r(1)
            } else {
                determinant(sylvester_matrix(pf.coeffs(), m, pg.coeffs(), n))
            };
            let fast = resultant_nominal(&pf, m, &pg, n);
            proptest::prop_assert_eq!(fast, syl);
        }
    }
}
