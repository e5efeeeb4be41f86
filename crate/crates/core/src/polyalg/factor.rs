use super::field::Field;
use super::univariate::Poly;

/// Square-free decomposition `p = c · ∏ P_i^{a_i}`, with every `P_i` monic
/// and square-free and the `P_i` pairwise coprime.
#[derive(Debug, Clone)]
pub struct FactorizationResult<F> {
    pub factors: Vec<(Poly<F>, u32)>,
    /// The degree-24 factor when one was isolated.
    pub candidate_q: Option<Poly<F>>,
}

impl<F: Field> FactorizationResult<F> {
    /// Product of all factors raised to their multiplicities (monic).
    pub fn expand(&self) -> Poly<F> {
        self.factors.iter().fold(Poly::one(), |acc, (p, a)| &acc * &p.pow(*a))
    }

    /// Product of the distinct factors, i.e. the square-free part.
    pub fn squarefree_part(&self) -> Poly<F> {
        self.factors.iter().fold(Poly::one(), |acc, (p, _)| &acc * p)
    }

    /// `(degree, multiplicity)` pairs, for logging.
    pub fn degree_profile(&self) -> Vec<(usize, u32)> {
        self.factors
            .iter()
            .map(|(p, a)| (p.degree().unwrap_or(0), *a))
            .collect()
    }
}

/// Yun's square-free decomposition over a field of characteristic zero.
pub fn yun<F: Field>(p: &Poly<F>) -> Vec<(Poly<F>, u32)> {
    assert!(!p.is_zero(), "square-free decomposition of the zero polynomial");
    let mut out = Vec::new();
    if p.degree() == Some(0) {
        return out;
    }
    let dp = p.derivative();
    let a0 = p.gcd(&dp);
    let mut b = p.exact_div(&a0).expect("gcd divides p");
    let mut c = dp.exact_div(&a0).expect("gcd divides p'");
    let mut d = &c - &b.derivative();
    let mut mult = 1;
    loop {
        let a = b.gcd(&d);
        if a.degree().unwrap_or(0) > 0 {
            out.push((a.clone(), mult));
        }
        b = b.exact_div(&a).expect("gcd divides b");
        if b.degree().unwrap_or(0) == 0 {
            break;
        }
        c = d.exact_div(&a).expect("gcd divides d");
        d = &c - &b.derivative();
        mult += 1;
    }
    out
}

/// Square-free decomposition followed by gcd splitting of each part against
/// the supplied `splitters`, so that known spurious factors are separated
/// from the rest. A degree-`target` factor, if one emerges, is reported as
/// `candidate_q`.
pub fn squarefree_factor<F: Field>(p: &Poly<F>, splitters: &[Poly<F>], target: usize) -> FactorizationResult<F> {
    let mut factors = Vec::new();
    for (part, mult) in yun(p) {
        for piece in split_by_gcd(&part, splitters) {
            factors.push((piece, mult));
        }
    }
    factors.sort_by_key(|(f, a)| (f.degree(), *a));
    let candidates: Vec<&Poly<F>> = factors
        .iter()
        .filter(|(f, _)| f.degree() == Some(target))
        .map(|(f, _)| f)
        .collect();
    let candidate_q = (candidates.len() == 1).then(|| candidates[0].clone());
    FactorizationResult { factors, candidate_q }
}

/// Splits a square-free polynomial into coprime pieces using gcds with each
/// splitter in turn. Pieces of degree zero are dropped.
pub fn split_by_gcd<F: Field>(p: &Poly<F>, splitters: &[Poly<F>]) -> Vec<Poly<F>> {
    let mut pieces = vec![p.monic()];
    for s in splitters {
        if s.is_zero() {
            continue;
        }
        let mut next = Vec::new();
        for piece in pieces {
            let g = piece.gcd(s);
            if g.degree().unwrap_or(0) == 0 || g.degree() == piece.degree() {
                next.push(piece);
                continue;
            }
            let rest = piece.exact_div(&g).expect("gcd divides").monic();
            next.push(g);
            next.push(rest);
        }
        pieces = next;
    }
    pieces.into_iter().filter(|q| q.degree().unwrap_or(0) > 0).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    type P = Poly<BigRational>;

    #[test]
    fn repeated_linear_factor() {
        // (t-1)²(t+2)
        let p = P::from_roots(&[1, 1, -2]);
        let f = squarefree_factor(&p, &[], 24);
        assert_eq!(f.factors.len(), 2);
        assert!(f.factors.contains(&(P::from_roots(&[-2]), 1)));
        assert!(f.factors.contains(&(P::from_roots(&[1]), 2)));
        assert!(f.candidate_q.is_none());
    }

    #[test]
    fn squarefree_input_is_single_factor() {
        let p = P::from_roots(&[3, -1, 4]);
        let f = squarefree_factor(&p, &[], 24);
        assert_eq!(f.factors, vec![(p.monic(), 1)]);
    }

    #[test]
    fn product_reconstructs_input() {
        let p = &P::from_roots(&[1, 1, 1, 2, 2, 5]) * &P::from_ints(&[1, 0, 1]);
        let f = squarefree_factor(&p.scale(&BigRational::from_integer(7.into())), &[], 24);
        assert_eq!(f.expand(), p.monic());
        assert_eq!(f.degree_profile(), vec![(1, 2), (1, 3), (3, 1)]);
    }

    #[test]
    fn gcd_splitting_isolates_target_degree() {
        let spurious = P::from_roots(&[7, -7]);
        let wanted = P::from_roots(&[1, 2, 3]);
        let p = &spurious * &wanted;
        let f = squarefree_factor(&p, &[P::from_roots(&[7, -7, 100])], 3);
        assert_eq!(f.candidate_q, Some(wanted.monic()));
    }
}
