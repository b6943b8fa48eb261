//! Hamel's test for F, its reverse and the quartic part, plus the projective
//! factor P of the spray.
//!
//! ```text
//! cargo run --example projective_flatness
//! ```

use quartic_finsler::config::catalog_patch;
use quartic_finsler::flatness::{flatness_report, projective_factor};
use quartic_finsler::metric::DirectionPoint;
use quartic_finsler::sampling::Sampler;

fn main() -> quartic_finsler::Result<()> {
    for name in ["euclidean-exact", "exact-bump", "conformal"] {
        let patch = catalog_patch(name)?;
        let samples = Sampler::new(1).direction_points(&patch, 16);
        let r = flatness_report(&patch, &samples)?;
        println!(
            "{name:>16}: hamel F {:.2e}, quartic {:.2e}, reverse {:.2e}, flat {}",
            r.hamel_forward, r.hamel_quartic, r.hamel_reverse, r.report.pass
        );
        if let Some(rev) = &r.reversibility {
            println!("{:>16}  trace reversal on the flat patch: {:.2e}", "", rev.max_residual);
        }
    }
    let patch = catalog_patch("conformal")?;
    let p = projective_factor(&patch, &DirectionPoint::new([0.0, 0.0], [1.0, 0.0]))?;
    println!("P on conformal at the origin along e1: {p:.6}");
    Ok(())
}
