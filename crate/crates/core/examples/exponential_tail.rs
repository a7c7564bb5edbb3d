//! The exponential-tail dichotomy: a relation built to cancel on the tail
//! of `e^{-|x|}` forces the exponential past the breakpoint, and only a
//! pure exponential admits it.

use hrtlab::catalog::builtin;
use hrtlab::constructions::{exponential_tail_test, ExponentialTailSpec};
use hrtlab::exppoly::{ExpPolynomial, SamplingPlan};
use hrtlab::independence::CollapsedRelation;
use num_complex::Complex64;

fn tail_exact(shifts: &[f64; 2]) -> hrtlab::Result<CollapsedRelation> {
    // u_j = e^{-x_j} p_j with p_1 + p_2 = 0
    let p = [(Complex64::new(1.0, 0.0), 0.0), (Complex64::new(0.0, 0.5), 0.7)];
    let u = |sign: f64, x: f64| {
        let s = sign * (-x).exp();
        ExpPolynomial::trigonometric(&p.map(|(c, a)| (c * s, a)))
    };
    CollapsedRelation::new(shifts.to_vec(), vec![u(1.0, shifts[0])?, u(-1.0, shifts[1])?])
}

fn main() -> hrtlab::Result<()> {
    let plan = SamplingPlan::default();
    let coll = tail_exact(&[-0.5, 1.0])?;
    for name in ["two_sided_exp", "full_exp"] {
        let f = builtin(name)?;
        let spec = ExponentialTailSpec::for_function(&f, &plan)?;
        let v = exponential_tail_test(&spec, &coll, &plan)?;
        println!("{name:<14} breakpoint {:?}", spec.b0);
        println!("{:<14} {}", "", serde_json::to_string(&v).expect("serialisable"));
    }
    Ok(())
}
