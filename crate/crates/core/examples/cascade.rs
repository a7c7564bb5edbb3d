//! The Gaussian-decay cascade replayed on the exact relation
//! `e^b f(x) - f(x - b) = 0` for `f = e^{-x}`.

use hrtlab::catalog::builtin;
use hrtlab::constructions::{claim_bound_ln, gaussian_cascade};
use hrtlab::exppoly::{ExpPolynomial, SamplingPlan};
use hrtlab::independence::CollapsedRelation;
use num_complex::Complex64;

fn main() -> hrtlab::Result<()> {
    let f = builtin("full_exp")?;
    let b: f64 = 1.0;
    let c = |z: f64| ExpPolynomial::constant(Complex64::new(z, 0.0));
    let coll = CollapsedRelation::new(vec![0.0, b], vec![c(b.exp())?, c(-1.0)?])?;
    let run = gaussian_cascade(&coll, &f, &SamplingPlan::default(), 10)?;
    println!("eps {:.6}  lambda {:.6}  C {:.6}", run.epsilon, run.lambda, run.c);
    println!("{:>3} {:>14} {:>14} {:>12} {:>12}  ok", "k", "|X_k|", "expected", "ln bound", "ln min|f|");
    for s in &run.states {
        println!(
            "{:>3} {:>14.6e} {:>14.6e} {:>12.4} {:>12.4}  {}",
            s.k,
            s.measure,
            s.expected_measure,
            s.ln_lower_bound,
            s.measured_ln_min,
            s.properties_hold()
        );
    }
    let closed = claim_bound_ln(run.epsilon.ln(), 2, 1, 10);
    println!("closed-form ln bound at k = 10: {closed:.4}");
    Ok(())
}
