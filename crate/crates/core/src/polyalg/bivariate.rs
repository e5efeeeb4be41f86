use std::ops::{Add, Mul, Neg, Sub};

use super::field::Field;
use super::univariate::Poly;

/// The two tan-half variables of a joint-space slice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    /// `t = tan(α/2)`, platform orientation.
    T,
    /// `t₁ = tan(θ₁/2)`, direction of the first leg.
    T1,
}

/// Polynomial in `(t, t₁)` stored as a polynomial in `t` whose coefficients
/// are polynomials in `t₁`. Trailing zero rows are trimmed.
#[derive(Clone, PartialEq, Debug)]
pub struct BiPoly<F> {
    rows: Vec<Poly<F>>,
}

impl<F: Field> BiPoly<F> {
    pub fn new(mut rows: Vec<Poly<F>>) -> Self {
        while rows.last().is_some_and(|r| r.is_zero()) {
            rows.pop();
        }
        BiPoly { rows }
    }

    pub fn zero() -> Self {
        BiPoly { rows: Vec::new() }
    }

    pub fn constant(c: F) -> Self {
        BiPoly::new(vec![Poly::constant(c)])
    }

    /// Builds from a dense grid `grid[i][j]` = coefficient of `t^i t₁^j`.
    pub fn from_grid(grid: Vec<Vec<F>>) -> Self {
        BiPoly::new(grid.into_iter().map(Poly::new).collect())
    }

    /// A polynomial in a single variable lifted to two variables.
    pub fn from_univariate(p: &Poly<F>, var: Var) -> Self {
        match var {
            Var::T => BiPoly::new(p.coeffs().iter().map(|c| Poly::constant(c.clone())).collect()),
            Var::T1 => BiPoly::new(vec![p.clone()]),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.rows.is_empty()
    }

    /// Coefficient of `t^i`, a polynomial in `t₁`.
    pub fn row(&self, i: usize) -> Poly<F> {
        self.rows.get(i).cloned().unwrap_or_else(Poly::zero)
    }

    pub fn rows(&self) -> &[Poly<F>] {
        &self.rows
    }

    pub fn coeff(&self, i: usize, j: usize) -> F {
        self.rows.get(i).map(|r| r.coeff(j)).unwrap_or_else(F::zero)
    }

    pub fn degree(&self, var: Var) -> Option<usize> {
        match var {
            Var::T => self.rows.len().checked_sub(1),
            Var::T1 => self.rows.iter().filter_map(|r| r.degree()).max(),
        }
    }

    /// Number of nonzero coefficients.
    pub fn term_count(&self) -> usize {
        self.rows
            .iter()
            .map(|r| r.coeffs().iter().filter(|c| !c.is_zero()).count())
            .sum()
    }

    pub fn scale(&self, c: &F) -> Self {
        BiPoly::new(self.rows.iter().map(|r| r.scale(c)).collect())
    }

    /// Swaps the roles of `t` and `t₁`.
    pub fn transpose(&self) -> Self {
        let n = self.degree(Var::T1).map_or(0, |d| d + 1);
        let grid: Vec<Vec<F>> = (0..n)
            .map(|j| (0..self.rows.len()).map(|i| self.coeff(i, j)).collect())
            .collect();
        BiPoly::from_grid(grid)
    }

    /// Substitutes `t₁ = value`, leaving a polynomial in `t`.
    pub fn eval_t1(&self, value: &F) -> Poly<F> {
        Poly::new(self.rows.iter().map(|r| r.eval(value)).collect())
    }

    /// Substitutes `t = value`, leaving a polynomial in `t₁`.
    pub fn eval_t(&self, value: &F) -> Poly<F> {
        let mut acc = Poly::zero();
        for r in self.rows.iter().rev() {
            acc = &acc.scale(value) + r;
        }
        acc
    }

    pub fn eval(&self, t: &F, t1: &F) -> F {
        self.eval_t1(t1).eval(t)
    }

    /// Coefficient of the top power of `var`, a polynomial in the other one.
    pub fn leading_in(&self, var: Var, nominal_degree: usize) -> Poly<F> {
        match var {
            Var::T => self.row(nominal_degree),
            Var::T1 => Poly::new(self.rows.iter().map(|r| r.coeff(nominal_degree)).collect()),
        }
    }

    /// Exact division by a univariate polynomial in `var`, `None` if inexact.
    pub fn exact_div_univariate(&self, d: &Poly<F>, var: Var) -> Option<Self> {
        match var {
            Var::T1 => {
                let rows: Option<Vec<Poly<F>>> = self.rows.iter().map(|r| r.exact_div(d)).collect();
                rows.map(BiPoly::new)
            }
            Var::T => self.transpose().exact_div_univariate(d, Var::T1).map(|p| p.transpose()),
        }
    }

    pub fn map<G: Field>(&self, f: impl Fn(&F) -> G + Copy) -> BiPoly<G> {
        BiPoly::new(self.rows.iter().map(|r| r.map(f)).collect())
    }

    /// Sum of `|c_ij| |t|^i |t₁|^j`, the natural scale for judging whether a
    /// value of this polynomial is zero relative to its own terms.
    pub fn abs_eval_f64(&self, t: f64, t1: f64) -> f64 {
        let (at, at1) = (t.abs(), t1.abs());
        let mut acc = 0.0;
        for r in self.rows.iter().rev() {
            let mut inner = 0.0;
            for c in r.coeffs().iter().rev() {
                inner = inner * at1 + c.approx_f64().abs();
            }
            acc = acc * at + inner;
        }
        acc
    }

    /// Largest coefficient magnitude.
    pub fn max_abs_coeff_f64(&self) -> f64 {
        self.rows
            .iter()
            .flat_map(|r| r.coeffs().iter().map(|c| c.approx_f64().abs()))
            .fold(0.0, f64::max)
    }

    /// `f64` copy of the coefficients, for fast numeric evaluation.
    pub fn to_f64(&self) -> BiPolyF64 {
        BiPolyF64 {
            rows: self.rows.iter().map(|r| r.to_f64()).collect(),
        }
    }
}

impl<F: Field> Add for &BiPoly<F> {
    type Output = BiPoly<F>;

    fn add(self, rhs: &BiPoly<F>) -> BiPoly<F> {
        let n = self.rows.len().max(rhs.rows.len());
        BiPoly::new((0..n).map(|i| &self.row(i) + &rhs.row(i)).collect())
    }
}

impl<F: Field> Sub for &BiPoly<F> {
    type Output = BiPoly<F>;

    fn sub(self, rhs: &BiPoly<F>) -> BiPoly<F> {
        let n = self.rows.len().max(rhs.rows.len());
        BiPoly::new((0..n).map(|i| &self.row(i) - &rhs.row(i)).collect())
    }
}

impl<F: Field> Neg for &BiPoly<F> {
    type Output = BiPoly<F>;

    fn neg(self) -> BiPoly<F> {
        BiPoly::new(self.rows.iter().map(|r| -r).collect())
    }
}

impl<F: Field> Mul for &BiPoly<F> {
    type Output = BiPoly<F>;

    fn mul(self, rhs: &BiPoly<F>) -> BiPoly<F> {
        if self.is_zero() || rhs.is_zero() {
            return BiPoly::zero();
        }
        let mut rows = vec![Poly::zero(); self.rows.len() + rhs.rows.len() - 1];
        for (i, a) in self.rows.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.rows.iter().enumerate() {
                rows[i + j] = &rows[i + j] + &(a * b);
            }
        }
        BiPoly::new(rows)
    }
}

/// Floating-point mirror of a [`BiPoly`], for fast repeated evaluation.
#[derive(Clone, Debug)]
pub struct BiPolyF64 {
    rows: Vec<Vec<f64>>,
}

impl BiPolyF64 {
    pub fn eval(&self, t: f64, t1: f64) -> f64 {
        let mut acc = 0.0;
        for r in self.rows.iter().rev() {
            let mut inner = 0.0;
            for c in r.iter().rev() {
                inner = inner * t1 + c;
            }
            acc = acc * t + inner;
        }
        acc
    }

    pub fn abs_eval(&self, t: f64, t1: f64) -> f64 {
        let (at, at1) = (t.abs(), t1.abs());
        let mut acc = 0.0;
        for r in self.rows.iter().rev() {
            let mut inner = 0.0;
            for c in r.iter().rev() {
                inner = inner * at1 + c.abs();
            }
            acc = acc * at + inner;
        }
        acc
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
    fn zero_polynomial_evaluates_to_zero() {
        let z = BiPoly::<Q>::zero();
        assert_eq!(z.eval(&r(3), &r(-7)), r(0));
        assert_eq!(z.degree(Var::T), None);
    }

    #[test]
    fn product_evaluation() {
        // p = t·t₁
        let p = BiPoly::from_grid(vec![vec![r(0)], vec![r(0), r(1)]]);
        assert_eq!(p.eval(&r(2), &r(3)), r(6));
        let sq = &p * &p;
        assert_eq!(sq.eval(&r(2), &r(3)), r(36));
        assert_eq!(sq.degree(Var::T), Some(2));
        assert_eq!(sq.degree(Var::T1), Some(2));
    }

    #[test]
    fn transpose_swaps_variables() {
        // p = 1 + 2t + 3t₁ + 4t t₁²
        let p = BiPoly::from_grid(vec![vec![r(1), r(3)], vec![r(2), r(0), r(4)]]);
        let q = p.transpose();
        for (a, b) in [(1, 2), (-3, 5), (0, 7)] {
            assert_eq!(p.eval(&r(a), &r(b)), q.eval(&r(b), &r(a)));
        }
        assert_eq!(p.eval_t(&r(2)).eval(&r(5)), p.eval(&r(2), &r(5)));
        let pf = p.to_f64();
        assert_eq!(pf.eval(2.0, 5.0), 1.0 + 4.0 + 15.0 + 200.0);
    }

    #[test]
    fn exact_division_by_univariate() {
        let d = Poly::from_ints(&[1, 0, 1]);
        let base = BiPoly::from_grid(vec![vec![r(1), r(3)], vec![r(2), r(0), r(4)]]);
        let lifted_t = BiPoly::from_univariate(&d, Var::T);
        let lifted_t1 = BiPoly::from_univariate(&d, Var::T1);
        assert_eq!((&base * &lifted_t).exact_div_univariate(&d, Var::T), Some(base.clone()));
        assert_eq!(
            (&base * &lifted_t1).exact_div_univariate(&d, Var::T1),
            Some(base.clone())
        );
        assert_eq!(base.exact_div_univariate(&d, Var::T), None);
    }
}
