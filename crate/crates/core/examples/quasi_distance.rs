//! Directed distances by polyline descent and shooting, checked against the
//! grid-graph upper bound.
//!
//! ```text
//! cargo run --release --example quasi_distance
//! ```

use quartic_finsler::config::catalog_patch;
use quartic_finsler::quasimetric::{distance, distance_oracle_grid};

fn main() -> quartic_finsler::Result<()> {
    let patch = catalog_patch("exact-mixed")?;
    let (x, y) = ([-1.0, -0.5], [1.5, 1.0]);
    let there = distance(&patch, &x, &y)?;
    let back = distance(&patch, &y, &x)?;
    println!("d(x, y) = {:.6} by {:?}, descent gave {:.6}", there.value, there.method, there.descent_value);
    println!("d(y, x) = {:.6}", back.value);
    println!("asymmetry {:.6}", there.value - back.value);

    let oracle = distance_oracle_grid(&patch, &x, &y, 128)?;
    println!("grid oracle {:.6} ({} nodes on the path)", oracle.value, oracle.path.len());
    println!("relative gap {:.3}%", 100.0 * (oracle.value - there.value) / there.value);
    Ok(())
}
