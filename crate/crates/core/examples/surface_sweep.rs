//! Sweeps ρ₁, reports where the cusp count settles and writes the stacked
//! slices as an OBJ mesh.

use std::fs::File;

use rpr_cusps::cusp::CuspMode;
use rpr_cusps::geometry::ManipulatorGeometry;
use rpr_cusps::surface::{export_mesh, sweep, MeshFormat};

fn main() -> rpr_cusps::Result<()> {
    let geom = ManipulatorGeometry::reference();
    let s = sweep(&geom, 0.5, 50.0, 12, CuspMode::Algebraic)?;
    for sample in &s.samples {
        println!(
            "rho1 {:6.2}: {} cusps, {} branches",
            sample.rho1,
            sample.cusp_count(),
            sample.curves.branches.len()
        );
    }
    match s.stabilization_threshold {
        Some(r) => println!("count stable from rho1 = {r:.2}"),
        None => println!("count did not settle"),
    }
    let path = std::env::temp_dir().join("surface.obj");
    let stats = export_mesh(&s, MeshFormat::Obj, File::create(&path)?)?;
    println!("{} -> {stats:?}", path.display());
    Ok(())
}
