//! Integrate a geodesic with RK4 and write it as CSV.
//!
//! ```text
//! cargo run --example geodesic_trace -- [out.csv]
//! ```

use quartic_finsler::config::catalog_patch;
use quartic_finsler::geodesic::integrate_geodesic;

fn main() -> quartic_finsler::Result<()> {
    let patch = catalog_patch("conformal")?;
    let path = integrate_geodesic(&patch, &[-1.0, 0.0], &[1.0, 0.3], 2.0, 1024)?;
    let end = path.end();
    println!("end point     {:?}", end.x);
    println!("F-length      {:.6}", path.length());
    println!("speed drift   {:.2e}", path.speed_drift());
    println!("left domain   {}", path.truncated);

    if let Some(out) = std::env::args().nth(1) {
        quartic_finsler::run::write_atomic(out.as_ref(), &path.to_csv())?;
        println!("wrote {out}");
    }
    Ok(())
}
