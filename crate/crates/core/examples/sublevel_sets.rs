//! Sublevel sets of `2 cos(2 pi x)` on `[0, 1]` and their power law.

use hrtlab::exppoly::{ExpPolynomial, RealInterval, SamplingPlan};

fn main() -> hrtlab::Result<()> {
    let u = ExpPolynomial::two_cos();
    let i = RealInterval::new(0.0, 1.0)?;
    let plan = SamplingPlan::default();

    let e = u.sublevel_set(&i, 1.0, &plan)?;
    println!("{{|u| < 1}} = {:?}", e.intervals().iter().map(|j| (j.lo(), j.hi())).collect::<Vec<_>>());
    println!("measure {:.12} (exact 1/3)", e.measure());

    // |{|u| < t}| ~ (2 / pi^2) t for small t: one power of t per simple zero
    println!("{:>10} {:>14} {:>10}", "t", "measure", "ratio");
    for j in 1..=8 {
        let t = 2f64.powi(-j);
        let m = u.sublevel_set(&i, t, &plan)?.measure();
        let exact = 4.0 * (t / 2.0).asin() / std::f64::consts::PI;
        println!("{t:>10.6} {m:>14.10} {:>10.6}", m / exact);
    }
    let (lo, hi) = u.sup_on_interval(&i, &plan)?;
    println!("sup bracket [{lo}, {hi}]");
    Ok(())
}
