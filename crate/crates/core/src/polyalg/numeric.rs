//! Floating-point roots of low-degree polynomials.
//!
//! Used where exactness is not needed: per-column root finding while tracing
//! curves, and the direct-kinematics sextic. Roots come from the eigenvalues
//! of a rescaled companion matrix followed by complex Newton polishing.

use nalgebra::DMatrix;
use num_complex::Complex64;
use std::f64::consts::PI;

/// Coefficients in ascending order; trailing coefficients whose magnitude is
/// below `rel_tol · max|c|` are treated as zero (roots at infinity).
#[derive(Debug, Clone)]
pub struct ComplexRoots {
    pub roots: Vec<Complex64>,
    /// Number of roots pushed to infinity by a vanishing leading coefficient.
    pub at_infinity: usize,
}

pub fn complex_roots(coeffs: &[f64], rel_tol: f64) -> ComplexRoots {
    let scale = coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return ComplexRoots {
            roots: Vec::new(),
            at_infinity: 0,
        };
    }
    let mut n = coeffs.len();
    while n > 0 && coeffs[n - 1].abs() <= rel_tol * scale {
        n -= 1;
    }
    let at_infinity = coeffs.len().saturating_sub(n.max(1));
    if n <= 1 {
        return ComplexRoots {
            roots: Vec::new(),
            at_infinity,
        };
    }
    let c = &coeffs[..n];
    let deg = n - 1;
    // Zero roots factor out exactly.
    let zeros = c.iter().take_while(|x| **x == 0.0).count();
    let c = &c[zeros..];
    let mut roots = vec![Complex64::new(0.0, 0.0); zeros];
    let d = deg - zeros;
    if d > 0 {
        // x = s·y with s balancing the constant and leading terms.
        let s = (c[0].abs() / c[d].abs()).powf(1.0 / d as f64);
        let s = if s.is_finite() && s > 0.0 { s } else { 1.0 };
        let lead = c[d] * s.powi(d as i32);
        let mut m = DMatrix::<f64>::zeros(d, d);
        for i in 1..d {
            m[(i, i - 1)] = 1.0;
        }
        for (i, ci) in c.iter().take(d).enumerate() {
            m[(i, d - 1)] = -ci * s.powi(i as i32) / lead;
        }
        for z in m.complex_eigenvalues().iter() {
            // A 2×2 block with a repeated real eigenvalue can come back with a NaN imaginary part.
            let z = if z.im.is_nan() && z.re.is_finite() {
                Complex64::new(z.re, 0.0)
            } else {
                *z
            };
            roots.push(polish(c, z * s));
        }
    }
    ComplexRoots { roots, at_infinity }
}

fn eval_with_derivative(c: &[f64], x: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &a in c.iter().rev() {
        dp = dp * x + p;
        p = p * x + a;
    }
    (p, dp)
}

fn polish(c: &[f64], mut x: Complex64) -> Complex64 {
    for _ in 0..8 {
        let (p, dp) = eval_with_derivative(c, x);
        if dp.norm() == 0.0 {
            break;
        }
        let step = p / dp;
        let next = x - step;
        if !next.re.is_finite() || !next.im.is_finite() {
            break;
        }
        // Accept only steps that do not increase the residual.
        let (pn, _) = eval_with_derivative(c, next);
        if pn.norm() > p.norm() {
            break;
        }
        x = next;
        if step.norm() <= 1e-16 * (1.0 + x.norm()) {
            break;
        }
    }
    x
}

/// Real parts of roots whose imaginary part is at most
/// `imag_tol · (1 + |root|)`, sorted ascending.
pub fn near_real_roots(coeffs: &[f64], imag_tol: f64) -> Vec<f64> {
    let mut out: Vec<f64> = complex_roots(coeffs, 1e-13)
        .roots
        .into_iter()
        .filter(|z| z.im.abs() <= imag_tol * (1.0 + z.norm()))
        .map(|z| z.re)
        .collect();
    out.sort_by(f64::total_cmp);
    out
}

/// Ascending coefficients of `(1 + t²)^n f(x)`, `t = tan(x/2)`, for a
/// trigonometric polynomial `f` of degree at most `n` given as a function.
pub fn tan_half_from_samples(f: impl Fn(f64) -> f64, n: usize) -> Vec<f64> {
    let m = 4 * n.max(1);
    let samples: Vec<f64> = (0..m).map(|j| f(2.0 * PI * j as f64 / m as f64)).collect();
    let mut out = vec![0.0; 2 * n + 1];
    for k in 0..=n {
        let (mut a, mut b) = (0.0, 0.0);
        for (j, v) in samples.iter().enumerate() {
            let phase = 2.0 * PI * ((k * j) % m) as f64 / m as f64;
            a += v * phase.cos();
            b += v * phase.sin();
        }
        let w = if k == 0 { 1.0 } else { 2.0 } / m as f64;
        let (a, b) = (a * w, b * w);
        // cos kx + i sin kx = (1 + it)^{2k} / (1 + t²)^k
        let mut re = vec![1.0];
        let mut im = vec![0.0];
        for _ in 0..2 * k {
            let mut nre = vec![0.0; re.len() + 1];
            let mut nim = vec![0.0; im.len() + 1];
            for i in 0..re.len() {
                nre[i] += re[i];
                nim[i] += im[i];
                nre[i + 1] -= im[i];
                nim[i + 1] += re[i];
            }
            re = nre;
            im = nim;
        }
        let mut term: Vec<f64> = re.iter().zip(&im).map(|(r, i)| a * r + b * i).collect();
        for _ in k..n {
            let mut next = vec![0.0; term.len() + 2];
            for (i, c) in term.iter().enumerate() {
                next[i] += c;
                next[i + 2] += c;
            }
            term = next;
        }
        for (i, c) in term.iter().enumerate() {
            out[i] += c;
        }
    }
    out
}

/// Evaluates an ascending-coefficient polynomial.
pub fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}
