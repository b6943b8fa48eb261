//! Quasi-metric axioms and weightability: on an exact drift the weight
//! d(x, a) - d(a, x) differs from d(x, y) - d(y, x) by twice the potential.
//!
//! ```text
//! cargo run --release --example weighted_quasi_metric
//! ```

use quartic_finsler::config::catalog_patch;
use quartic_finsler::quasimetric::{quasi_axioms_report, weight, weightability_report};
use quartic_finsler::sampling::Sampler;

fn main() -> quartic_finsler::Result<()> {
    let patch = catalog_patch("exact-bump")?;
    let base = patch.center();
    let mut sampler = Sampler::new(3);

    let w = weight(&patch, &base, &[1.0, 1.5])?;
    println!("w_a(x) at x = {:?}: {:.6}", w.x, w.w);

    let axioms = quasi_axioms_report(&patch, &sampler.triples(&patch, 4))?;
    let weights = weightability_report(&patch, &base, &sampler.pairs(&patch, 4))?;
    for r in [axioms, weights] {
        println!("{}: pass = {}", r.name, r.pass);
        for d in &r.details {
            println!("  {:<28} {:.3e}", d.label, d.value);
        }
    }

    // a non-closed drift has no potential to weight with
    let rotational = catalog_patch("rotational")?;
    if let Err(e) = weightability_report(&rotational, &base, &sampler.pairs(&rotational, 1)) {
        println!("rotational: {e}");
    }
    Ok(())
}
