//! Replays of the constructive arguments: the Lebesgue-point window, the
//! pigeonhole selection, the Gaussian cascade, the lattice and main
//! recursions, and the exponential-tail test.

mod cascade;
mod recursion;
mod tail;

use serde::{Deserialize, Serialize};

use crate::catalog::FunctionSpec;
use crate::error::{Error, Result};
use crate::exppoly::{level_set, IntervalUnion, RealInterval, SamplingPlan};

pub use cascade::{
    claim_bound_ln, claim_bound_ln_recursive, gaussian_cascade, normalize_relation, CascadeRun,
    CascadeState, NormalizedRelation,
};
pub use recursion::{
    fexp_sum, fexp_sum_enumerated, lattice_recursion, main_recursion, Hypothesis, RecursionCheck,
    TailBoundSeries,
};
pub use tail::{detect_breakpoint, exponential_tail_test, ExponentialTailSpec, TailVerdict};

/// Shortest window tried by [`lebesgue_point_window`].
const MIN_WINDOW: f64 = 1.0 / (1u64 << 20) as f64;

/// `ln |f|` below this is treated as zero.
const RESOLUTION: f64 = -690.0;

/// An interval `I` in the positive half-line where `|f| > epsilon` on more
/// than half of `I`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LebesguePoint {
    pub interval: RealInterval,
    pub epsilon: f64,
    /// `{x in I : |f(x)| > epsilon}`.
    pub set: IntervalUnion,
}

/// `{x in I : |f(x)| > epsilon}`, measured on a grid with bisected
/// boundaries.
pub fn superlevel_set(f: &FunctionSpec, interval: &RealInterval, epsilon: f64, step: f64) -> IntervalUnion {
    let ln_eps = epsilon.ln();
    level_set(interval, step, |x| f.ln_abs(x) > ln_eps)
}

/// Scans dyadic windows `[j L, (j + 1) L]` of the positive part of the
/// window, `L = 1, 1/2, 1/4, ...`, halving `epsilon` from half the grid
/// maximum until the superlevel set covers more than half of the window.
pub fn lebesgue_point_window(f: &FunctionSpec, plan: &SamplingPlan) -> Result<LebesguePoint> {
    let lo = f.window.lo().max(0.0);
    let hi = f.window.hi();
    if hi <= lo {
        return Err(Error::NotFound);
    }
    // only windows meeting the part of the half-line where f is resolvable
    let support = level_set(&RealInterval::new(lo, hi)?, plan.step, |x| f.ln_abs(x) > RESOLUTION);
    if support.is_empty() {
        return Err(Error::NotFound);
    }
    let mut len = 1.0;
    while len >= MIN_WINDOW {
        for part in support.intervals() {
            let first = ((part.lo() - plan.step - lo) / len).floor().max(0.0) as u64;
            let mut a = lo + first as f64 * len;
            while a + len <= hi && a <= part.hi() + plan.step {
                let interval = RealInterval::new(a, a + len)?;
                if let Some(found) = probe(f, &interval, plan) {
                    return Ok(found);
                }
                a += len;
            }
        }
        len *= 0.5;
    }
    Err(Error::NotFound)
}

fn probe(f: &FunctionSpec, interval: &RealInterval, plan: &SamplingPlan) -> Option<LebesguePoint> {
    let len = interval.length();
    let step = plan.step.min(len / 256.0);
    let top = crate::exppoly::uniform_nodes(interval, step)
        .into_iter()
        .map(|x| f.ln_abs(x))
        .fold(f64::NEG_INFINITY, f64::max);
    let mut ln_eps = top - std::f64::consts::LN_2;
    while ln_eps > RESOLUTION {
        let epsilon = ln_eps.exp();
        let set = superlevel_set(f, interval, epsilon, step);
        if set.measure() > 0.5 * len {
            return Some(LebesguePoint {
                interval: *interval,
                epsilon,
                set,
            });
        }
        ln_eps -= std::f64::consts::LN_2;
    }
    None
}

/// Given nonnegative `f_j` with `sum_j f_j >= M` on `X`, returns the first
/// index `j` whose set `{x in X : f_j(x) >= M / n}` has at least `|X| / n`
/// of the measure, together with that set.
pub fn pigeonhole(
    values: &[&dyn Fn(f64) -> f64],
    x: &IntervalUnion,
    m: f64,
    step: f64,
) -> Result<(usize, IntervalUnion)> {
    let n = values.len();
    if n == 0 {
        return Err(Error::InvalidArgument("need at least one function".into()));
    }
    let mut pts = x.sample_points(step);
    for i in x.intervals() {
        pts.push(i.lo());
        pts.push(i.hi());
    }
    for &p in &pts {
        let total: f64 = values.iter().map(|f| f(p)).sum();
        if !(total >= m * (1.0 - 1e-12)) {
            return Err(Error::Precondition {
                x: p,
                what: format!("sum of the functions is {total:e}, below M = {m:e}"),
            });
        }
    }
    let level = m / n as f64;
    let target = x.measure() / n as f64 * (1.0 - 1e-12);
    for (j, f) in values.iter().enumerate() {
        let set = IntervalUnion::from_intervals(
            x.intervals()
                .iter()
                .filter(|i| i.length() > 0.0)
                .flat_map(|i| level_set(i, step, |y| f(y) >= level).intervals().to_vec()),
        );
        if set.measure() >= target {
            return Ok((j, set));
        }
    }
    Err(Error::Precondition {
        x: x.hull().map_or(f64::NAN, |h| h.midpoint()),
        what: "no function reaches M / n on a 1/n share of the set".into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::builtin;
    use crate::rng::item_rng;
    use num_complex::Complex64;
    use rand::Rng;

    #[test]
    fn gaussian_window_is_unit_interval() {
        let f = builtin("gaussian").unwrap();
        let lp = lebesgue_point_window(&f, &SamplingPlan::default()).unwrap();
        assert_eq!(lp.interval, RealInterval::new(0.0, 1.0).unwrap());
        assert!(lp.set.measure() > 0.5);
        // the documented level also qualifies
        let eps = (-std::f64::consts::PI).exp() / 2.0;
        assert!(superlevel_set(&f, &lp.interval, eps, 1e-3).measure() > 0.5);
        assert!(lp.epsilon >= eps);
    }

    #[test]
    fn bump_window_inside_support() {
        let f = builtin("bump").unwrap();
        let lp = lebesgue_point_window(&f, &SamplingPlan::default()).unwrap();
        assert!(lp.interval.lo() >= 2.0 && lp.interval.hi() <= 3.0, "{:?}", lp.interval);
    }

    #[test]
    fn zero_function_has_no_window() {
        let f = builtin("gaussian").unwrap().scaled(Complex64::new(0.0, 0.0));
        assert_eq!(
            lebesgue_point_window(&f, &SamplingPlan::with_step(0.05)),
            Err(Error::NotFound)
        );
    }

    #[test]
    fn pigeonhole_single_function_keeps_set() {
        let x = IntervalUnion::from_pairs(&[(0.0, 1.0), (2.0, 2.5)]).unwrap();
        let f = |_: f64| 3.0;
        let (j, out) = pigeonhole(&[&f], &x, 3.0, 0.01).unwrap();
        assert_eq!(j, 0);
        assert_eq!(out, x);
    }

    #[test]
    fn pigeonhole_tie_goes_to_first() {
        let x = IntervalUnion::from_pairs(&[(0.0, 1.0)]).unwrap();
        let f = |_: f64| 0.5;
        let (j, out) = pigeonhole(&[&f, &f], &x, 1.0, 0.01).unwrap();
        assert_eq!(j, 0);
        assert_eq!(out, x);
    }

    #[test]
    fn pigeonhole_reports_failing_point() {
        let x = IntervalUnion::from_pairs(&[(0.0, 1.0)]).unwrap();
        let f = |y: f64| if y > 0.7 { 0.1 } else { 1.0 };
        match pigeonhole(&[&f], &x, 1.0, 0.01) {
            Err(Error::Precondition { x, .. }) => assert!(x > 0.7),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn pigeonhole_random_steps_reverify() {
        let mut rng = item_rng(11, 0);
        for _ in 0..20 {
            let x = IntervalUnion::from_pairs(&[(0.0, 1.0), (1.5, 2.0)]).unwrap();
            // three step functions on a grid of 8 cells summing to at least 1
            let tables: Vec<Vec<f64>> = (0..3)
                .map(|_| (0..8).map(|_| rng.gen_range(0.0..1.0)).collect())
                .collect();
            let cell = |y: f64| ((y / 0.25).floor() as usize).min(7);
            let total = |y: f64| tables.iter().map(|t| t[cell(y)]).sum::<f64>();
            let m = (0..8).map(|c| total(c as f64 * 0.25 + 0.1)).fold(f64::INFINITY, f64::min);
            let fs: Vec<Box<dyn Fn(f64) -> f64>> = (0..3)
                .map(|j| {
                    let t = tables[j].clone();
                    Box::new(move |y: f64| t[((y / 0.25).floor() as usize).min(7)]) as Box<dyn Fn(f64) -> f64>
                })
                .collect();
            let refs: Vec<&dyn Fn(f64) -> f64> = fs.iter().map(|b| b.as_ref()).collect();
            let (j, out) = pigeonhole(&refs, &x, m, 0.01).unwrap();
            assert!(out.measure() >= x.measure() / 3.0 - 1e-9);
            assert!(out.is_subset_of(&x, 1e-12));
            for p in out.sample_points(1e-3) {
                assert!(fs[j](p) >= m / 3.0);
            }
        }
    }
}
