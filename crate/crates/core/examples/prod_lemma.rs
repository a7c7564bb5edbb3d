//! Single-shift product lemma: `-log inf_E prod |u~(x + b_i)|` over `k`
//! random shifts, and the growth of the fitted `eta` with `k`.

use hrtlab::exppoly::{ExpPolynomial, RealInterval, SamplingPlan};
use hrtlab::inequalities::{log_minus_integral, verify_prod_lemma};
use hrtlab::rng::item_rng;
use rand::Rng;

fn main() -> hrtlab::Result<()> {
    let u = ExpPolynomial::two_cos();
    let i = RealInterval::new(0.0, 1.0)?;
    let plan = SamplingPlan::default();

    let lm = log_minus_integral(&u, 0.3, &i, &plan)?;
    println!("int log_-|u(x + 0.3)| : layer cake {:.9}, direct {:.9}", lm.layer_cake, lm.direct);

    let mut rng = item_rng(6, 0);
    println!("{:>4} {:>10} {:>10} {:>10} {:>10}", "k", "|E|", "C", "eta_fit", "eta_proof");
    for k in [5, 10, 20, 40] {
        let shifts: Vec<f64> = (0..k).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let t = verify_prod_lemma(&u, &i, &shifts, &plan)?;
        println!(
            "{:>4} {:>10.6} {:>10.6} {:>10.6} {:>10.6}",
            k, t.measure, t.c_fit, t.eta_fit, t.eta_proof
        );
    }
    Ok(())
}
