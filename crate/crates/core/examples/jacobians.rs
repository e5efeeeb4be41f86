//! Constraint Jacobians, adjugate, kernel vectors and the cusp condition
//! at a regular configuration and at a point of the singular curve.

use rpr_cusps::differential::{
    adjoint_k_factors, cusp_condition, hessians_theta, jacobian_theta, kernel_vectors, normalized_det,
};
use rpr_cusps::geometry::{config_from_slice, inverse_kinematics, ManipulatorGeometry, PlatformPose};
use rpr_cusps::singular_slice::trace_slice_curves;

fn main() -> rpr_cusps::Result<()> {
    let geom = ManipulatorGeometry::reference();
    let regular = inverse_kinematics(&geom, &PlatformPose::new(3.0, 9.0, 0.4))?;
    let j = jacobian_theta(&geom, &regular);
    let (k, adj) = adjoint_k_factors(&geom, &regular);
    println!("dGamma/dtheta = {j:.4}");
    println!("k-factors {k:.4?}");
    println!("adj * J = {:.4}", adj * j);
    println!("normalized det {:.4e}", normalized_det(&geom, &regular));
    println!("largest Hessian entry {:.4}", hessians_theta(&geom, &regular).max_abs());

    let curves = trace_slice_curves(&geom, 17.0, 256)?;
    let v = curves.branches[0].vertices[0];
    let singular = config_from_slice(&geom, &v.slice(17.0))?;
    let kp = kernel_vectors(&geom, &singular)?;
    println!("on the curve: normalized det {:.2e}", normalized_det(&geom, &singular));
    println!("u = {:.5?}, v = {:.5?}", kp.u.as_slice(), kp.v.as_slice());
    println!("cusp condition {:.4e}", cusp_condition(&geom, &singular)?);
    Ok(())
}
