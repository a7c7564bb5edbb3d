//! Counterfactual replay of the general-shift recursion for the `xlogx`
//! entry: the contrary hypothesis is assumed, and the tail bound it
//! implies is compared with the actual tail of `f`.
//!
//! `cargo run --example main_recursion -- [scale] [k_max]` uses shifts
//! `{scale, scale sqrt 2}`.

use hrtlab::catalog::builtin;
use hrtlab::constructions::{main_recursion, Hypothesis};
use hrtlab::exppoly::{ExpPolynomial, SamplingPlan};
use num_complex::Complex64;

fn main() -> hrtlab::Result<()> {
    let f = builtin("xlogx")?;
    let one = Complex64::new(1.0, 0.0);
    let u = ExpPolynomial::trigonometric(&[(one, 0.0), (-one, 1.0)])?;
    let scale: f64 = std::env::args().nth(1).map_or(1.5, |s| s.parse().expect("shift scale"));
    let k_max: usize = std::env::args().nth(2).map_or(20, |s| s.parse().expect("k_max"));
    let shifts = [scale, scale * 2f64.sqrt()];
    let series = main_recursion(&u, &shifts, 10.0, &f, k_max, &SamplingPlan::default(), Hypothesis::Inject)?;

    println!("window {:?}, eps = {:.4}", series.window.interval, series.window.epsilon);
    println!("{:>3} {:>12} {:>12} {:>12} {:>8}", "k", "ln formula", "ln lower", "ln tail", "eta");
    for i in 0..series.k_values.len() {
        println!(
            "{:>3} {:>12.4} {:>12.4} {:>12.4} {:>8.4}",
            series.k_values[i],
            series.ln_formula_bounds[i],
            series.ln_lower_bounds[i],
            series.ln_tail_sups[i],
            series.etas[i]
        );
    }
    match series.crossing {
        Some(k) => println!("bound exceeds the tail at k* = {k}"),
        None => println!("no crossing up to k = {k_max}"),
    }
    Ok(())
}
