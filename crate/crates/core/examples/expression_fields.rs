//! Parse coefficient fields, evaluate them with derivatives, and print them
//! back in canonical form.
//!
//! ```text
//! cargo run --example expression_fields
//! ```

use quartic_finsler::expr::ScalarExpr;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let field = ScalarExpr::parse("exp(0.2*x1) * (1 + 0.1*x2^2) - sin(x1*x2)/4", 2)?;
    println!("canonical form: {field}");

    let x = [0.5, -1.0];
    let jet = field.eval_jet2(&x)?;
    println!("value at {x:?}: {:.6}", jet.value);
    println!("gradient:       {:?}", jet.grad);
    println!("hessian:        {:?}", jet.hess);

    // printing and reparsing gives back the same tape
    assert_eq!(ScalarExpr::parse(&field.to_string(), 2)?, field);

    for bad in ["x3 + 1", "2^x1", "frob(x1)", "(x1"] {
        match ScalarExpr::parse(bad, 2) {
            Ok(_) => println!("{bad:>10}: accepted"),
            Err(e) => println!("{bad:>10}: {e}"),
        }
    }
    Ok(())
}
