//! Cusp points of the reference manipulator at `ρ₁ = 14.98`, found by
//! elimination and by walking the singular curve.

use rpr_cusps::cusp::{find_cusps, CuspMode};
use rpr_cusps::geometry::ManipulatorGeometry;

fn main() -> rpr_cusps::Result<()> {
    let geom = ManipulatorGeometry::reference();
    let rho1 = 14.98;
    for mode in [CuspMode::Algebraic, CuspMode::Numeric] {
        let t = std::time::Instant::now();
        let report = find_cusps(&geom, rho1, mode)?;
        println!("{mode:?}: {} cusps in {:.2?}", report.cusps.len(), t.elapsed());
        for c in &report.cusps {
            println!(
                "  alpha {:8.2}  theta1 {:8.2}  rho2 {:6.2}  rho3 {:6.2}",
                c.alpha.to_degrees(),
                c.theta1.to_degrees(),
                c.rho2,
                c.rho3
            );
        }
    }
    Ok(())
}
