//! A manipulator whose platform vertices are collinear. Its cusps come from
//! the fold conditions instead of the adjugate form.

use rpr_cusps::cusp::{find_cusps, CuspMode};
use rpr_cusps::geometry::ManipulatorGeometry;

fn main() -> rpr_cusps::Result<()> {
    let geom = ManipulatorGeometry::second_example();
    println!("flat platform: {}", geom.is_flat());
    for rho1 in [0.5, 1.0, 2.0, 5.0, 20.0] {
        let alg = find_cusps(&geom, rho1, CuspMode::Algebraic)?;
        let num = find_cusps(&geom, rho1, CuspMode::Numeric)?;
        let deg = alg.trace.as_ref().map(|t| (t.resultant_degree, t.q_degree));
        println!(
            "rho1 {rho1:5.1}: {} cusps algebraic, {} numeric, (resultant, Q) degrees {deg:?}",
            alg.cusps.len(),
            num.cusps.len()
        );
    }
    Ok(())
}
