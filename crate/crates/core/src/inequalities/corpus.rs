use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use super::turan::{verify_montgomery_vaughan, verify_turan_nazarov, MontgomeryVaughanTrial, TuranNazarovTrial};
use super::InequalityReport;
use crate::error::Result;
use crate::exppoly::{ExpPolynomial, IntervalUnion, RealInterval, SamplingPlan};
use crate::rng::item_rng;

/// Random trigonometric polynomial of order `m`: frequencies uniform in
/// `[-5, 5]` with pairwise gaps at least `min_sep`, unit-modulus
/// coefficients with uniform phase.
pub fn random_trig_poly<R: Rng + ?Sized>(rng: &mut R, m: usize, min_sep: f64) -> ExpPolynomial {
    let mut freqs: Vec<f64> = Vec::with_capacity(m);
    while freqs.len() < m {
        let a = rng.gen_range(-5.0..=5.0);
        if freqs.iter().all(|&b: &f64| (a - b).abs() >= min_sep) {
            freqs.push(a);
        }
    }
    let pairs: Vec<(Complex64, f64)> = freqs
        .into_iter()
        .map(|a| (Complex64::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU)), a))
        .collect();
    ExpPolynomial::trigonometric(&pairs).expect("distinct frequencies, unit coefficients")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorpusOptions {
    pub trials: usize,
    pub seed: u64,
    pub max_order: usize,
    pub plan: SamplingPlan,
}

impl Default for CorpusOptions {
    fn default() -> Self {
        Self {
            trials: 1000,
            seed: 0,
            max_order: 5,
            plan: SamplingPlan::default(),
        }
    }
}

/// `p` pieces of total measure `q |I|`, one per equal slot of `I`.
fn slotted_set<R: Rng + ?Sized>(rng: &mut R, interval: &RealInterval, q: f64) -> IntervalUnion {
    let p = rng.gen_range(1..=3);
    let slot = interval.length() / p as f64;
    let piece = q * slot;
    IntervalUnion::from_intervals((0..p).map(|j| {
        let lo = interval.lo() + j as f64 * slot + rng.gen_range(0.0..=(slot - piece));
        RealInterval::with_length(lo, piece).expect("positive piece")
    }))
}

pub fn turan_nazarov_trial(seed: u64, index: usize, opts: &CorpusOptions) -> Result<TuranNazarovTrial> {
    let mut rng = item_rng(seed, index as u64);
    let m = rng.gen_range(1..=opts.max_order);
    let u = random_trig_poly(&mut rng, m, 0.1);
    let interval = RealInterval::with_length(rng.gen_range(-5.0..5.0), rng.gen_range(0.5..3.0))?;
    let q = rng.gen_range(0.05..0.8);
    let use_sublevel = rng.gen_bool(0.5);
    let level = rng.gen_range(0.05..0.6);
    let fallback = slotted_set(&mut rng, &interval, q);
    let set = if use_sublevel && m > 1 {
        let (_, top) = u.sup_on_interval(&interval, &opts.plan)?;
        let s = u.sublevel_set(&interval, level * top, &opts.plan)?;
        if s.measure() >= 0.05 * interval.length() {
            s
        } else {
            fallback
        }
    } else {
        fallback
    };
    verify_turan_nazarov(&u, &interval, &set, &opts.plan)
}

/// Randomised Turán–Nazarov trials (orders up to `max_order`,
/// `|E| / |I| >= 0.05`); the fitted `A` is the largest `A_min` seen.
pub fn turan_nazarov_corpus(opts: &CorpusOptions) -> Result<(InequalityReport, Vec<TuranNazarovTrial>)> {
    let trials: Vec<TuranNazarovTrial> = (0..opts.trials)
        .into_par_iter()
        .map(|i| turan_nazarov_trial(opts.seed, i, opts))
        .collect::<Result<_>>()?;
    let a = trials.iter().filter_map(|t| t.a_min).fold(0.0, f64::max);
    let all_hold = trials.iter().all(|t| t.holds && t.holds_with(a));
    let mut metadata = BTreeMap::new();
    metadata.insert("max_m".into(), trials.iter().map(|t| t.m).max().unwrap_or(0) as f64);
    metadata.insert(
        "min_set_fraction".into(),
        trials
            .iter()
            .map(|t| t.set_measure / t.interval_length)
            .fold(f64::INFINITY, f64::min),
    );
    Ok((
        InequalityReport {
            trials: trials.len(),
            fitted_constant: a,
            worst_ratio: if a > 0.0 { 1.0 } else { 0.0 },
            all_hold,
            metadata,
        },
        trials,
    ))
}

pub fn montgomery_vaughan_trial(seed: u64, index: usize, opts: &CorpusOptions) -> Result<MontgomeryVaughanTrial> {
    let mut rng = item_rng(seed, index as u64);
    let m = rng.gen_range(2..=opts.max_order.max(2));
    let u = random_trig_poly(&mut rng, m, 0.1);
    let delta = u.min_separation().expect("order at least two");
    let k = (1.0 + rng.gen_range(0.1..2.0)) / delta;
    let a = rng.gen_range(-10.0..10.0);
    verify_montgomery_vaughan(&u, k, a, 16)
}

/// Randomised Montgomery–Vaughan trials with `K > 1/delta`. The fitted
/// constant is the worst position of the integral inside its two-sided
/// band, `(I - lower) / (upper - lower)` folded to `[0, 1]` when it holds.
pub fn montgomery_vaughan_corpus(
    opts: &CorpusOptions,
) -> Result<(InequalityReport, Vec<MontgomeryVaughanTrial>)> {
    let trials: Vec<MontgomeryVaughanTrial> = (0..opts.trials)
        .into_par_iter()
        .map(|i| montgomery_vaughan_trial(opts.seed, i, opts))
        .collect::<Result<_>>()?;
    let worst_shift = trials.iter().map(|t| t.shift_error).fold(0.0, f64::max);
    let worst_position = trials
        .iter()
        .map(|t| {
            let pos = (t.integral - t.lower) / (t.upper - t.lower);
            (2.0 * pos - 1.0).abs()
        })
        .fold(0.0, f64::max);
    let mut metadata = BTreeMap::new();
    metadata.insert("max_shift_error".into(), worst_shift);
    Ok((
        InequalityReport {
            trials: trials.len(),
            fitted_constant: worst_position,
            worst_ratio: worst_position,
            all_hold: trials.iter().all(MontgomeryVaughanTrial::holds),
            metadata,
        },
        trials,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_polynomials_respect_separation() {
        let mut rng = item_rng(3, 0);
        for m in 1..=5 {
            let u = random_trig_poly(&mut rng, m, 0.1);
            assert_eq!(u.order(), m);
            if m > 1 {
                assert!(u.min_separation().unwrap() >= 0.1);
            }
            assert!(u.terms().iter().all(|t| (t.coefficient.norm() - 1.0).abs() < 1e-15));
        }
    }

    #[test]
    fn small_turan_corpus_holds() {
        let opts = CorpusOptions {
            trials: 20,
            ..CorpusOptions::default()
        };
        let (report, trials) = turan_nazarov_corpus(&opts).unwrap();
        assert!(report.all_hold);
        assert!(trials.iter().all(|t| t.set_measure >= 0.05 * t.interval_length - 1e-12));
    }

    #[test]
    fn small_mv_corpus_holds() {
        let opts = CorpusOptions {
            trials: 10,
            ..CorpusOptions::default()
        };
        let (report, _) = montgomery_vaughan_corpus(&opts).unwrap();
        assert!(report.all_hold);
        assert!(report.worst_ratio <= 1.0);
    }
}
