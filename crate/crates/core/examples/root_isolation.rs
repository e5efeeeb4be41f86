//! Exact square-free decomposition and certified real-root isolation.

use num_bigint::BigInt;
use num_rational::BigRational;
use rpr_cusps::polyalg::{real_roots, squarefree_factor, RatPoly, RootInterval, DEFAULT_DEGREE_CAP};

fn main() -> rpr_cusps::Result<()> {
    // (x - 1)^3 (x + 2)^2 (x^2 - 2)
    let p = RatPoly::from_roots(&[1, 1, 1, -2, -2]) * RatPoly::from_ints(&[-2, 0, 1]);
    let f = squarefree_factor(&p, &[], 2);
    println!(
        "degree {:?}, factors (degree, multiplicity) {:?}",
        p.degree(),
        f.degree_profile()
    );

    let roots = real_roots(&p, &RootInterval::WholeLine, 60, DEFAULT_DEGREE_CAP)?;
    for r in &roots {
        println!("  root {:+.15} (exact {})", r.to_f64(), r.is_exact());
    }

    let half = BigRational::new(BigInt::from(1), BigInt::from(2));
    let inside = real_roots(
        &p,
        &RootInterval::Closed(half, BigRational::from_integer(BigInt::from(2))),
        60,
        64,
    )?;
    println!("{} roots in [1/2, 2]", inside.len());
    Ok(())
}
