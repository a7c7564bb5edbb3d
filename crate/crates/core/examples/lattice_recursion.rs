//! Lattice-shift recursion: the contrary hypothesis fails outright for a
//! Gaussian, and holds for `e^{-x}` where the derived tail bound stays
//! below the true tail.

use hrtlab::catalog::builtin;
use hrtlab::constructions::{lattice_recursion, Hypothesis};
use hrtlab::exppoly::{ExpPolynomial, SamplingPlan};
use hrtlab::Error;
use num_complex::Complex64;

fn main() -> hrtlab::Result<()> {
    let plan = SamplingPlan::default();
    let one = Complex64::new(1.0, 0.0);
    let u = ExpPolynomial::trigonometric(&[(one, 0.0), (-one, 1.0)])?;
    match lattice_recursion(&u, 1.0, 2, 1.0, &builtin("gaussian")?, 5, &plan, Hypothesis::Verify) {
        Err(Error::HypothesisFails { x }) => println!("gaussian: hypothesis fails at x = {x:.4}"),
        other => println!("gaussian: unexpected {other:?}"),
    }

    let f = builtin("full_exp")?;
    let b: f64 = 1.0;
    let s = lattice_recursion(&ExpPolynomial::constant(one)?, b, 2, b.exp(), &f, 10, &plan, Hypothesis::Verify)?;
    println!("full_exp: recursion holds {}, crossing {:?}", s.recursion_holds(), s.crossing);
    println!("{:>3} {:>12} {:>12} {:>12}", "k", "ln formula", "ln lower", "ln tail");
    for i in 0..s.k_values.len() {
        println!(
            "{:>3} {:>12.4} {:>12.4} {:>12.4}",
            s.k_values[i], s.ln_formula_bounds[i], s.ln_lower_bounds[i], s.ln_tail_sups[i]
        );
    }
    Ok(())
}
