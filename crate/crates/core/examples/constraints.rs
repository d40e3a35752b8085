//! Building moment constraint sets, built in and by hand.

use semimix::constraints::{AlphaParam, Constraint, ConstraintSet, MomentTerm};

fn main() -> semimix::Result<()> {
    // Weibull moments of orders 1..3 with unknown shape and scale 1.
    let cs = ConstraintSet::weibull_moments(3, 1.0, (0.1, 10.0));
    println!("weibull_moments: {} constraints plus mass, alpha = {:?}", cs.ell(), cs.alpha_names());
    println!("  g(0.5)  = {:?}", cs.eval_g(&[0.5]));
    println!("  m(1.0)  = {:?}", cs.eval_m(&[1.0])?);
    println!("  dm(1.0) = {:?}", cs.eval_grad_m(&[1.0])?);

    // A Gaussian-like P0: E[X] = a, E[X^2] = a^2 + 1.
    let hand = ConstraintSet::new(
        1,
        vec![
            Constraint {
                exponents: vec![1],
                target: vec![MomentTerm::Power { coef: 1.0, index: 0, exponent: 1 }],
            },
            Constraint {
                exponents: vec![2],
                target: vec![
                    MomentTerm::Power { coef: 1.0, index: 0, exponent: 2 },
                    MomentTerm::Const { value: 1.0 },
                ],
            },
        ],
        vec![AlphaParam::bounded("a", -10.0, 10.0)],
    )?;
    println!("\nhand-built set: m(2) = {:?}", hand.eval_m(&[2.0])?);
    println!("as JSON: {}", serde_json::to_string(&hand).unwrap());

    let biv = ConstraintSet::bivariate_m2(0.0, (-10.0, 10.0));
    for j in 1..biv.len() {
        print!("{:?} ", biv.exponents(j));
    }
    println!("\nbivariate M2 at theta = 3: {:?}", biv.eval_m(&[3.0])?);
    if let Some(w) = biv.count_warning(1) {
        println!("warning: {w}");
    }
    Ok(())
}
