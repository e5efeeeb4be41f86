//! The elimination behind the algebraic cusp search: degrees of the
//! trigonometric system, the resultant and its factor structure.

use rpr_cusps::cusp::algebraic::{SliceSystem, Target};
use rpr_cusps::cusp::{find_cusps, CuspMode};
use rpr_cusps::geometry::ManipulatorGeometry;
use rpr_cusps::polyalg::Var;

fn main() -> rpr_cusps::Result<()> {
    let geom = ManipulatorGeometry::reference();
    let rho1 = 14.98;
    let sys = SliceSystem::new(&geom, rho1)?;
    let f1 = &sys.f1.numerator;
    println!(
        "condition {:?}, F1 degrees in (t, t1): {:?}, {:?}",
        sys.condition,
        f1.degree(Var::T),
        f1.degree(Var::T1)
    );

    let q = sys.eliminate(Target::Q)?;
    println!(
        "resultant degree {} from {} primes",
        q.info.resultant_degree, q.primes_used
    );
    println!("resultant profile {:?}", q.info.resultant_profile);
    for s in &q.info.spurious {
        println!("  spurious {:>6}: {:?}", s.source, s.parts);
    }
    println!(
        "Q degree {} square-free {}",
        q.info.remaining_degree, q.info.remaining_squarefree
    );

    let report = find_cusps(&geom, rho1, CuspMode::Algebraic)?;
    if let Some(t) = &report.trace {
        println!(
            "{} real roots, {} candidates, {} filtered, {} verified, {} audit violations",
            t.real_roots, t.candidates, t.filtered, t.verified, t.q_audit_violations
        );
    }
    Ok(())
}
