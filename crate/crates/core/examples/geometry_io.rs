//! Loading a manipulator from JSON and moving between poses, joint vectors
//! and slice coordinates.

use rpr_cusps::geometry::{config_from_slice, inverse_kinematics, slice_coords, ManipulatorGeometry, PlatformPose};

fn main() -> rpr_cusps::Result<()> {
    let text = r#"{"A2x": 15.91, "A3x": 0.0, "A3y": 10.0, "d1": 17.04, "d2": 16.54, "d3": 20.84}"#;
    let geom = ManipulatorGeometry::from_json_str(text)?;
    println!(
        "platform angle beta = {:.4} deg, h = {:.4}",
        geom.beta().to_degrees(),
        geom.h()
    );
    println!("round trip: {}", geom.to_json_string());

    let pose = PlatformPose::new(4.0, 11.0, 0.6);
    let config = inverse_kinematics(&geom, &pose)?;
    println!("rods  {:?}", config.rho);
    println!("theta {:?}", config.theta.map(f64::to_degrees));
    println!("loop closure residual {:.2e}", config.max_residual(&geom));

    let s = slice_coords(&geom, &config);
    println!(
        "slice rho1 = {:.4}, alpha = {:.4}, theta1 = {:.4}",
        s.rho1, s.alpha, s.theta1
    );
    let back = config_from_slice(&geom, &s)?;
    println!("rho2, rho3 from the slice: {:.6}, {:.6}", back.rho[1], back.rho[2]);
    Ok(())
}
