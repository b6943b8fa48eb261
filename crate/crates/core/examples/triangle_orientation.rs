//! Perimeters of triangles walked both ways round. With a closed drift the
//! two orientations have the same length.
//!
//! ```text
//! cargo run --release --example triangle_orientation
//! ```

use quartic_finsler::config::catalog_patch;
use quartic_finsler::quasimetric::{triangle_orientation_report, DistanceTable};

fn main() -> quartic_finsler::Result<()> {
    let tri = [vec![-1.0, -1.0], vec![1.5, -0.5], vec![0.0, 1.5]];
    for name in ["exact-mixed", "rotational"] {
        let patch = catalog_patch(name)?;
        let mut d = DistanceTable::new(&patch);
        let forward = d.get(&tri[0], &tri[1])? + d.get(&tri[1], &tri[2])? + d.get(&tri[2], &tri[0])?;
        let backward = d.get(&tri[0], &tri[2])? + d.get(&tri[2], &tri[1])? + d.get(&tri[1], &tri[0])?;
        println!("{name}: perimeter {forward:.6} one way, {backward:.6} the other");
        let r = triangle_orientation_report(&patch, std::slice::from_ref(&tri))?;
        println!("  report pass = {}, max defect {:.2e}", r.pass, r.max_residual);
    }
    Ok(())
}
