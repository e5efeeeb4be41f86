//! Traces the singular curves of one joint-space slice and writes them as
//! CSV and SVG.
//!
//! ```text
//! cargo run --release --example singular_slice -- 17 /tmp/slice
//! ```

use std::fs::File;

use rpr_cusps::cusp::{find_cusps, CuspMode};
use rpr_cusps::geometry::ManipulatorGeometry;
use rpr_cusps::singular_slice::{slice_svg, trace_slice_curves, write_slice_csv, Marker, DEFAULT_RESOLUTION};

fn main() -> rpr_cusps::Result<()> {
    let mut args = std::env::args().skip(1);
    let rho1: f64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(17.0);
    let stem = args
        .next()
        .unwrap_or_else(|| std::env::temp_dir().join("slice").display().to_string());

    let geom = ManipulatorGeometry::reference();
    let curves = trace_slice_curves(&geom, rho1, DEFAULT_RESOLUTION)?;
    println!("{} branches, {} vertices", curves.branches.len(), curves.vertex_count());
    for (i, b) in curves.branches.iter().enumerate() {
        println!("  branch {i}: {} vertices, closed {}", b.vertices.len(), b.closed);
    }

    let cusps = find_cusps(&geom, rho1, CuspMode::Algebraic)?.cusps;
    let markers: Vec<Marker> = cusps
        .iter()
        .map(|c| Marker {
            rho2: c.rho2,
            rho3: c.rho3,
        })
        .collect();

    write_slice_csv(&curves, File::create(format!("{stem}.csv"))?, 15)?;
    std::fs::write(format!("{stem}.svg"), slice_svg(&curves, &markers, None))?;
    println!("wrote {stem}.csv and {stem}.svg with {} cusps marked", markers.len());
    Ok(())
}
