//! Assembly modes at a few joint vectors, including one at a cusp where
//! three of them coincide.

use rpr_cusps::cusp::{find_cusps, CuspMode};
use rpr_cusps::geometry::ManipulatorGeometry;
use rpr_cusps::kinematics::{direct_kinematics, direct_kinematics_with, RodLengths};

fn show(label: &str, geom: &ManipulatorGeometry, rods: RodLengths, eps: Option<f64>) {
    let set = match eps {
        Some(e) => direct_kinematics_with(geom, &rods, e),
        None => direct_kinematics(geom, &rods),
    };
    println!(
        "{label} {rods:.4?}: {} solutions, {} distinct, largest cluster {}",
        set.count(),
        set.distinct(),
        set.max_multiplicity()
    );
    for s in &set.poses {
        println!(
            "  B1 = ({:8.4}, {:8.4})  alpha = {:8.3} deg  residual {:.1e}",
            s.pose.b1.x,
            s.pose.b1.y,
            s.pose.alpha.to_degrees(),
            s.residual
        );
    }
}

fn main() -> rpr_cusps::Result<()> {
    let geom = ManipulatorGeometry::reference();
    show("generic", &geom, [14.98, 20.0, 20.0], None);
    show("two modes", &geom, [17.0, 12.0, 25.0], None);
    show("unreachable", &geom, [1.0, 1.0, 1.0], None);

    let cusp = find_cusps(&geom, 14.98, CuspMode::Algebraic)?.cusps[0];
    // Coalescing roots spread by about the cube root of machine precision.
    show("cusp", &geom, [cusp.rho1, cusp.rho2, cusp.rho3], Some(5e-3));
    Ok(())
}
