//! Counts assembly modes over a grid of one slice and prints a coarse map.

use rpr_cusps::geometry::ManipulatorGeometry;
use rpr_cusps::singular_slice::{label_regions, trace_slice_curves, GridSpec, DEFAULT_RESOLUTION};

fn main() -> rpr_cusps::Result<()> {
    let geom = ManipulatorGeometry::reference();
    for rho1 in [17.0, 31.0] {
        let curves = trace_slice_curves(&geom, rho1, DEFAULT_RESOLUTION)?;
        let map = label_regions(&geom, rho1, &GridSpec::around(&curves, 48), Some(&curves))?;
        println!("rho1 = {rho1}: interior counts {:?}", map.interior_counts());
        for j in (0..map.grid.n3).rev().step_by(2) {
            let row: String = (0..map.grid.n2)
                .map(|i| match map.counts[i][j] {
                    0 => ' ',
                    c => char::from_digit(c as u32, 10).unwrap_or('?'),
                })
                .collect();
            println!("  {row}");
        }
    }
    Ok(())
}
