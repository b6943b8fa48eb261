//! Closedness of the drift 1-form, line integrals and potentials.
//!
//! ```text
//! cargo run --example one_forms
//! ```

use quartic_finsler::config::catalog_patch;
use quartic_finsler::forms::{closedness_report, exterior_derivative, line_integral, Potential};

fn main() -> quartic_finsler::Result<()> {
    for name in ["exact-mixed", "rotational"] {
        let patch = catalog_patch(name)?;
        let report = closedness_report(&patch, 9)?;
        println!("{name}: max |db| = {:.3e}, closed = {}", report.max_residual, report.pass);
        println!("  (db)_12 at the origin: {:.6}", exterior_derivative(&patch, &[0.0, 0.0])?.omega[(0, 1)]);

        // around the unit square; zero exactly when the form is closed
        let square = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.0, 0.0]].map(|p| p.to_vec());
        println!("  loop integral: {:.6}", line_integral(&patch, &square)?);

        match Potential::new(&patch, &[0.0, 0.0]) {
            Ok(v) => println!("  V(1, 2) = {:.6}, grad V = {:?}", v.value(&[1.0, 2.0])?, v.gradient(&[1.0, 2.0])?),
            Err(e) => println!("  no potential: {e}"),
        }
    }
    Ok(())
}
