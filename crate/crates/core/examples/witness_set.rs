//! Witness sets `{|u f| > M sum_B |f(. + b)|}` for the `x log x` entry on
//! random `(u, M, B)`.

use hrtlab::catalog::builtin;
use hrtlab::exppoly::{RealInterval, SamplingPlan};
use hrtlab::independence::witness_set;
use hrtlab::inequalities::random_trig_poly;
use hrtlab::rng::item_rng;
use rand::Rng;

fn main() -> hrtlab::Result<()> {
    let f = builtin("xlogx")?;
    let window = RealInterval::new(0.0, 20.0)?;
    let plan = SamplingPlan::default();
    for i in 0..10 {
        let mut rng = item_rng(6, i);
        let order = rng.gen_range(1..=3);
        let u = random_trig_poly(&mut rng, order, 0.1);
        let m = rng.gen_range(1.0..10.0);
        let shifts: Vec<f64> = (0..2).map(|_| rng.gen_range(1.0..3.0)).collect();
        let e = witness_set(&u, m, &shifts, &f, &window, &plan)?;
        let first = e.intervals().first().map_or(f64::NAN, |j| j.lo());
        println!(
            "order {order}  M {m:>6.3}  B {:>5.3?}  |E| {:>8.4}  starts at {first:.3}",
            shifts,
            e.measure()
        );
    }
    Ok(())
}
