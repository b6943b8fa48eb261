//! Evaluate F, its reverse, the quartic part and the fundamental tensor at a
//! point of a catalog patch.
//!
//! ```text
//! cargo run --example metric_eval
//! ```

use quartic_finsler::config::catalog_patch;
use quartic_finsler::geodesic::spray_coefficients;
use quartic_finsler::metric::{DirectionPoint, Variant};

fn main() -> quartic_finsler::Result<()> {
    let patch = catalog_patch("exact-mixed")?;
    let dp = DirectionPoint::new([0.5, 0.25], [1.0, 0.5]);

    let (alpha, beta) = (patch.alpha(&dp)?, patch.beta(&dp)?);
    let f = patch.f_value(&dp)?;
    println!("alpha = {alpha:.6}  beta = {beta:.6}");
    println!("F(x, y)       = {f:.6}");
    println!("F(x, -y)      = {:.6}", patch.f_reverse(&dp)?);
    println!("quartic part  = {:.6}", patch.finsler(&dp, Variant::Quartic)?);

    let g = patch.fundamental_tensor(&dp)?;
    println!("g = {:.6}", g.g);
    println!("smallest eigenvalue {:.6}, g(y, y) - F^2 = {:.2e}", g.min_eigenvalue(), g.quadratic_form() - f * f);
    println!("spray G = {:?}", spray_coefficients(&patch, &dp)?.g);
    Ok(())
}
