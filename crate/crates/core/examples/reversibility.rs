//! Whether geodesics of F run backwards as geodesics: the pointwise
//! criterion against the trace test, on a closed and a non-closed drift.
//!
//! ```text
//! cargo run --example reversibility
//! ```

use quartic_finsler::config::catalog_patch;
use quartic_finsler::geodesic::{closed_form_criterion, el_reversibility_residual, reversal_defect};
use quartic_finsler::metric::DirectionPoint;

fn main() -> quartic_finsler::Result<()> {
    let dp = DirectionPoint::new([0.3, -0.2], [0.6, 0.8]);
    for name in ["exact-mixed", "rotational"] {
        let patch = catalog_patch(name)?;
        println!("{name}");
        println!("  criterion residual       {:?}", closed_form_criterion(&patch, &dp)?);
        println!("  Euler-Lagrange residual  {:?}", el_reversibility_residual(&patch, &dp)?);
        println!("  trace reversal defect    {:.3e}", reversal_defect(&patch, &dp, 2.0, 1024)?);
    }
    Ok(())
}
