use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{lebesgue_point_window, pigeonhole, LebesguePoint};
use crate::catalog::FunctionSpec;
use crate::error::{Error, Result};
use crate::exppoly::{ExpPolynomial, RealInterval, SamplingPlan};
use crate::independence::witness_set;
use crate::inequalities::{verify_prod_lemma, ENUMERATION_CAP};

/// How the contrary hypothesis of a recursion is treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Hypothesis {
    /// Checked on the window first; a nonempty witness set is an error.
    Verify,
    /// Assumed without checking. The run is counterfactual.
    Inject,
}

/// Direct grid check of the recursive inequality at one `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecursionCheck {
    pub k: usize,
    pub holds: bool,
    /// Largest `ln(lhs) - ln(rhs)` over the grid.
    pub max_log_excess: f64,
    /// Largest relative gap between recursion and brute-force enumeration,
    /// when `n^k` is within the enumeration cap.
    pub enumeration_gap: Option<f64>,
}

/// Lower bounds on the tail of `f` produced by a recursion, against the
/// tail it actually has.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailBoundSeries {
    pub k_values: Vec<usize>,
    /// Bound read off the measured quantities at each `k`.
    pub lower_bounds: Vec<f64>,
    pub ln_lower_bounds: Vec<f64>,
    /// Closed-form bound with the fitted `eta`.
    pub formula_bounds: Vec<f64>,
    pub ln_formula_bounds: Vec<f64>,
    /// `ln sup |f|` over the tail each bound refers to.
    pub ln_tail_sups: Vec<f64>,
    pub etas: Vec<f64>,
    /// First `k` whose formula bound exceeds the measured tail.
    pub crossing: Option<usize>,
    pub counterfactual: bool,
    pub window: LebesguePoint,
    pub checks: Vec<RecursionCheck>,
}

impl TailBoundSeries {
    fn new(window: LebesguePoint, counterfactual: bool) -> Self {
        Self {
            k_values: Vec::new(),
            lower_bounds: Vec::new(),
            ln_lower_bounds: Vec::new(),
            formula_bounds: Vec::new(),
            ln_formula_bounds: Vec::new(),
            ln_tail_sups: Vec::new(),
            etas: Vec::new(),
            crossing: None,
            counterfactual,
            window,
            checks: Vec::new(),
        }
    }

    fn push(&mut self, k: usize, ln_lower: f64, ln_formula: f64, ln_tail: f64, eta: f64) {
        self.k_values.push(k);
        self.lower_bounds.push(ln_lower.exp());
        self.ln_lower_bounds.push(ln_lower);
        self.formula_bounds.push(ln_formula.exp());
        self.ln_formula_bounds.push(ln_formula);
        self.ln_tail_sups.push(ln_tail);
        self.etas.push(eta);
        if self.crossing.is_none() && ln_formula > ln_tail {
            self.crossing = Some(k);
        }
    }

    pub fn recursion_holds(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }
}

fn log_sum_exp(values: impl IntoIterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.into_iter().collect();
    let top = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY || top == f64::INFINITY {
        return top;
    }
    top + v.iter().map(|x| (x - top).exp()).sum::<f64>().ln()
}

fn ln_abs_u(u: &ExpPolynomial, y: f64) -> f64 {
    u.evaluate(y).map_or(f64::NEG_INFINITY, |z| z.norm().ln())
}

/// `ln sum_{i(1..k)} g(x + sum_{l<=k} b_{i(l)}) prod_{j=1}^k |u(x + sum_{l<j} b_{i(l)})|^{-1}`
/// with `ln g` supplied, computed over the composition lattice.
pub fn fexp_sum(u: &ExpPolynomial, shifts: &[f64], k: usize, x: f64, ln_g: &impl Fn(f64) -> f64) -> f64 {
    fn rec(
        alpha: &mut Vec<u16>,
        depth: usize,
        k: usize,
        x: f64,
        shifts: &[f64],
        u: &ExpPolynomial,
        ln_g: &impl Fn(f64) -> f64,
        memo: &mut HashMap<Vec<u16>, f64>,
    ) -> f64 {
        let here = x + alpha.iter().zip(shifts).map(|(&a, &b)| a as f64 * b).sum::<f64>();
        if depth == k {
            return ln_g(here);
        }
        if let Some(&v) = memo.get(alpha.as_slice()) {
            return v;
        }
        let mut parts = Vec::with_capacity(shifts.len());
        for i in 0..shifts.len() {
            alpha[i] += 1;
            parts.push(rec(alpha, depth + 1, k, x, shifts, u, ln_g, memo));
            alpha[i] -= 1;
        }
        let v = log_sum_exp(parts) - ln_abs_u(u, here);
        memo.insert(alpha.clone(), v);
        v
    }
    let mut memo = HashMap::new();
    rec(&mut vec![0; shifts.len()], 0, k, x, shifts, u, ln_g, &mut memo)
}

/// The same quantity by walking all `n^k` index sequences.
pub fn fexp_sum_enumerated(
    u: &ExpPolynomial,
    shifts: &[f64],
    k: usize,
    x: f64,
    ln_g: &impl Fn(f64) -> f64,
) -> Result<f64> {
    let n = shifts.len();
    let terms = (n as u128).checked_pow(k as u32).unwrap_or(u128::MAX);
    if terms > ENUMERATION_CAP {
        return Err(Error::ExplosionGuard {
            terms,
            cap: ENUMERATION_CAP,
        });
    }
    let mut idx = vec![0usize; k];
    let (mut top, mut acc) = (f64::NEG_INFINITY, 0.0);
    loop {
        let mut pos = x;
        let mut ln_term = 0.0;
        for &i in &idx {
            ln_term -= ln_abs_u(u, pos);
            pos += shifts[i];
        }
        ln_term += ln_g(pos);
        // streaming log-sum-exp
        if ln_term > top {
            acc = acc * (top - ln_term).exp() + 1.0;
            top = ln_term;
        } else if ln_term > f64::NEG_INFINITY {
            acc += (ln_term - top).exp();
        }
        let mut j = 0;
        while j < k {
            idx[j] += 1;
            if idx[j] < n {
                break;
            }
            idx[j] = 0;
            j += 1;
        }
        if j == k {
            return Ok(if top == f64::NEG_INFINITY { top } else { top + acc.ln() });
        }
    }
}

fn within_cap(n: usize, k: usize) -> bool {
    (n as u128).checked_pow(k as u32).is_some_and(|t| t <= ENUMERATION_CAP)
}

/// `ln sup_{y >= y0} |f(y)|` on a grid reaching past the window.
fn ln_tail_sup(f: &FunctionSpec, y0: f64) -> f64 {
    let hi = f.window.hi().max(y0 + 1.0);
    let n = ((hi - y0) / 0.01).ceil() as usize;
    (0..=n)
        .map(|i| f.ln_abs(y0 + (hi - y0) * i as f64 / n as f64))
        .fold(f64::NEG_INFINITY, f64::max)
}

fn hypothesis_window(f: &FunctionSpec) -> Result<RealInterval> {
    RealInterval::new(f.window.lo().max(0.0), f.window.hi())
}

fn check_hypothesis(
    u: &ExpPolynomial,
    m: f64,
    shifts: &[f64],
    f: &FunctionSpec,
    plan: &SamplingPlan,
) -> Result<()> {
    let e = witness_set(u, m, shifts, f, &hypothesis_window(f)?, plan)?;
    match e.intervals().first() {
        Some(i) => Err(Error::HypothesisFails { x: i.midpoint() }),
        None => Ok(()),
    }
}

fn midpoints(interval: &RealInterval, cells: usize) -> Vec<f64> {
    let h = interval.length() / cells as f64;
    (0..cells).map(|i| interval.lo() + (i as f64 + 0.5) * h).collect()
}

fn coefficient_bound(u: &ExpPolynomial) -> f64 {
    u.terms().iter().map(|t| t.coefficient.norm()).sum()
}

/// Replays the lattice-case argument for `b Z` shifts.
///
/// The contrary hypothesis is `|u(x) f(x)| <= M sum_{i=1}^n |f(x + i b)|` on
/// the positive part of the window. Its `k`-fold iterate
/// `|f(x)| prod_{j=0}^k |u(x + j b)| <= M (M + U)^k sum_i |f(x + (k + i) b)|`
/// (with `U = sum |c_j|` bounding `||u||`) is checked directly on a grid for
/// `k = 0..=k_max`. The single-product lemma on `{0, b, .., k b}` and the
/// pigeonhole step then give
/// `|f(x + (k + i) b)| > eps / (e^eta M n) (M + U)^{-k} e^{-eta k}` on a set
/// of positive measure.
#[allow(clippy::too_many_arguments)]
pub fn lattice_recursion(
    u: &ExpPolynomial,
    b: f64,
    n: usize,
    m: f64,
    f: &FunctionSpec,
    k_max: usize,
    plan: &SamplingPlan,
    hypothesis: Hypothesis,
) -> Result<TailBoundSeries> {
    if !(b > 0.0) || n == 0 || !(m > 0.0) {
        return Err(Error::InvalidArgument("need b > 0, n >= 1 and M > 0".into()));
    }
    let shifts: Vec<f64> = (1..=n).map(|i| i as f64 * b).collect();
    if hypothesis == Hypothesis::Verify {
        check_hypothesis(u, m, &shifts, f, plan)?;
    }
    let lp = lebesgue_point_window(f, plan)?;
    let interval = lp.interval;
    let eps = lp.epsilon;
    let ub = coefficient_bound(u);
    let ln_mu = (m + ub).ln();

    let mut grid = midpoints(&interval, 256);
    let w = hypothesis_window(f)?;
    grid.extend(midpoints(&w, (w.length() / 0.25).ceil().max(1.0) as usize));

    let mut series = TailBoundSeries::new(lp.clone(), hypothesis == Hypothesis::Inject);
    for k in 0..=k_max {
        let mut excess = f64::NEG_INFINITY;
        for &x in &grid {
            let lhs = f.ln_abs(x) + (0..=k).map(|j| ln_abs_u(u, x + j as f64 * b)).sum::<f64>();
            if lhs == f64::NEG_INFINITY {
                continue;
            }
            let rhs = m.ln()
                + k as f64 * ln_mu
                + log_sum_exp((1..=n).map(|i| f.ln_abs(x + (k + i) as f64 * b)));
            excess = excess.max(lhs - rhs);
        }
        series.checks.push(RecursionCheck {
            k,
            holds: excess <= 1e-12,
            max_log_excess: excess,
            enumeration_gap: None,
        });
    }

    for k in 1..=k_max {
        let prod_shifts: Vec<f64> = (0..=k).map(|j| j as f64 * b).collect();
        let trial = verify_prod_lemma(u, &interval, &prod_shifts, plan)?;
        let eta = trial.eta_fit - ub.ln();
        let ln_formula =
            eps.ln() - eta - m.ln() - (n as f64).ln() - k as f64 * ln_mu - eta * k as f64;
        let good = trial.e.intersect(&lp.set);
        let ln_tail = ln_tail_sup(f, interval.lo() + (k + 1) as f64 * b);
        let terms: Vec<Box<dyn Fn(f64) -> f64 + '_>> = (1..=n)
            .map(|i| {
                let off = (k + i) as f64 * b;
                Box::new(move |x: f64| f.abs(x + off)) as Box<dyn Fn(f64) -> f64 + '_>
            })
            .collect();
        let refs: Vec<&dyn Fn(f64) -> f64> = terms.iter().map(|t| t.as_ref()).collect();
        let step = plan.step.min(interval.length() / 256.0);
        let ln_lower = match pigeonhole(&refs, &good, n as f64 * ln_formula.exp(), step) {
            Ok((i, set)) => {
                let off = (k + i + 1) as f64 * b;
                let mut pts = set.sample_points(step);
                pts.extend(set.intervals().iter().flat_map(|s| [s.lo(), s.hi()]));
                pts.into_iter().map(|x| f.ln_abs(x + off)).fold(f64::INFINITY, f64::min)
            }
            Err(Error::Precondition { .. }) if hypothesis == Hypothesis::Inject => ln_formula,
            Err(Error::Precondition { x, .. }) => return Err(Error::HypothesisFails { x }),
            Err(e) => return Err(e),
        };
        series.push(k, ln_lower, ln_formula, ln_tail, eta);
    }
    Ok(series)
}

/// Replays the main-theorem argument for a general shift set `B`.
///
/// The contrary hypothesis `|f(x)| |u(x)| <= M sum_i |f(x + b_i)|` is
/// iterated `k` times; the iterate is evaluated at every grid point of the
/// Lebesgue-point window both through the composition lattice and, when
/// `n^k` is within the cap, by enumerating every index sequence. The sum of
/// reciprocal products is thresholded so that at most half the window is
/// excluded (`t_k = e^{eta k log k}`), giving
/// `sup_{y >= a + k b_1} |f(y)| >= eps M^{-k} / t_k`.
pub fn main_recursion(
    u: &ExpPolynomial,
    shifts: &[f64],
    m: f64,
    f: &FunctionSpec,
    k_max: usize,
    plan: &SamplingPlan,
    hypothesis: Hypothesis,
) -> Result<TailBoundSeries> {
    if shifts.is_empty() || shifts.iter().any(|&b| !(b > 0.0)) || !(m > 0.0) {
        return Err(Error::InvalidArgument("need positive shifts and M > 0".into()));
    }
    if hypothesis == Hypothesis::Verify {
        check_hypothesis(u, m, shifts, f, plan)?;
    }
    let n = shifts.len();
    let b1 = shifts.iter().copied().fold(f64::INFINITY, f64::min);
    let lp = lebesgue_point_window(f, plan)?;
    let interval = lp.interval;
    let ln_eps = lp.epsilon.ln();
    let grid = midpoints(&interval, 256);
    let in_f: Vec<bool> = grid.iter().map(|&x| f.ln_abs(x) > ln_eps).collect();
    let ln_f = |y: f64| f.ln_abs(y);
    let zero = |_: f64| 0.0;

    let mut series = TailBoundSeries::new(lp.clone(), hypothesis == Hypothesis::Inject);
    for k in 1..=k_max {
        let ln_mk = k as f64 * m.ln();
        let mut excess = f64::NEG_INFINITY;
        let mut gap: Option<f64> = None;
        let enumerate = within_cap(n, k);
        let mut ln_p = Vec::with_capacity(grid.len());
        for (g, &x) in grid.iter().enumerate() {
            let rhs = ln_mk + fexp_sum(u, shifts, k, x, &ln_f);
            excess = excess.max(f.ln_abs(x) - rhs);
            if enumerate && g % 32 == 0 {
                let direct = ln_mk + fexp_sum_enumerated(u, shifts, k, x, &ln_f)?;
                let rel = (rhs - direct).exp_m1().abs();
                gap = Some(gap.map_or(rel, |v: f64| v.max(rel)));
            }
            ln_p.push(fexp_sum(u, shifts, k, x, &zero));
        }
        series.checks.push(RecursionCheck {
            k,
            holds: excess <= 1e-12,
            max_log_excess: excess,
            enumeration_gap: gap,
        });

        let mut sorted = ln_p.clone();
        sorted.sort_by(f64::total_cmp);
        let cells = sorted.len();
        let ln_t = sorted[cells - cells / 2 - 1];
        let scale = if k >= 2 { k as f64 * (k as f64).ln() } else { 1.0 };
        let eta = ln_t / scale;
        let ln_formula = ln_eps - ln_mk - ln_t;
        // best point of the window where both sets meet
        let ln_lower = grid
            .iter()
            .zip(&ln_p)
            .zip(&in_f)
            .filter(|((_, &p), &inside)| inside && p <= ln_t)
            .map(|((&x, &p), _)| f.ln_abs(x) - ln_mk - p)
            .fold(f64::NEG_INFINITY, f64::max);
        if ln_lower == f64::NEG_INFINITY {
            return Err(Error::Precondition {
                x: interval.midpoint(),
                what: format!("superlevel set and kept set do not meet at k = {k}"),
            });
        }
        let ln_tail = ln_tail_sup(f, interval.lo() + k as f64 * b1);
        series.push(k, ln_lower, ln_formula, ln_tail, eta);
    }
    Ok(series)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::builtin;
    use num_complex::Complex64;

    fn one_minus_exp() -> ExpPolynomial {
        ExpPolynomial::trigonometric(&[(Complex64::new(1.0, 0.0), 0.0), (Complex64::new(-1.0, 0.0), 1.0)])
            .unwrap()
    }

    fn constant(c: f64) -> ExpPolynomial {
        ExpPolynomial::constant(Complex64::new(c, 0.0)).unwrap()
    }

    #[test]
    fn gaussian_violates_lattice_hypothesis() {
        let f = builtin("gaussian").unwrap();
        let plan = SamplingPlan::default();
        let r = lattice_recursion(&one_minus_exp(), 1.0, 2, 1.0, &f, 3, &plan, Hypothesis::Verify);
        let x = match r {
            Err(Error::HypothesisFails { x }) => x,
            other => panic!("{other:?}"),
        };
        // the same point is in the witness set
        let e = witness_set(&one_minus_exp(), 1.0, &[1.0, 2.0], &f, &hypothesis_window(&f).unwrap(), &plan)
            .unwrap();
        assert!(e.contains(x));
    }

    #[test]
    fn full_exp_lattice_bound_below_tail() {
        let f = builtin("full_exp").unwrap();
        let b = 1.0;
        let series = lattice_recursion(&constant(1.0), b, 2, b.exp(), &f, 10, &SamplingPlan::default(), Hypothesis::Verify)
            .unwrap();
        assert!(series.recursion_holds());
        assert_eq!(series.checks[0].k, 0);
        for (i, &k) in series.k_values.iter().enumerate() {
            let a = series.window.interval.lo();
            let actual = -(a + (k + 1) as f64 * b);
            assert!(series.ln_formula_bounds[i] <= actual, "k = {k}");
            assert!(series.ln_lower_bounds[i] <= series.ln_tail_sups[i] + 1e-12);
        }
        assert_eq!(series.crossing, None);
    }

    #[test]
    fn lattice_sum_matches_enumeration() {
        let u = one_minus_exp();
        let shifts = [1.0, 2f64.sqrt()];
        let g = |y: f64| -y * y;
        for k in 1..=6 {
            for x in [0.13, 0.41, 0.77] {
                let a = fexp_sum(&u, &shifts, k, x, &g);
                let b = fexp_sum_enumerated(&u, &shifts, k, x, &g).unwrap();
                assert!((a - b).exp_m1().abs() < 1e-9, "k={k} x={x}");
            }
        }
    }

    #[test]
    fn first_iterate_is_the_hypothesis() {
        // k = 1: M |f(x + b_i)| / |u(x)| summed over i
        let u = one_minus_exp();
        let f = builtin("xlogx").unwrap();
        let shifts = [1.0, 2f64.sqrt()];
        let x = 0.37;
        let direct = shifts.iter().map(|&b| f.abs(x + b)).sum::<f64>() / u.evaluate(x).unwrap().norm();
        let ln = fexp_sum(&u, &shifts, 1, x, &|y| f.ln_abs(y));
        assert!((ln.exp() / direct - 1.0).abs() < 1e-13);
    }

    #[test]
    fn enumeration_respects_cap() {
        let u = one_minus_exp();
        assert!(matches!(
            fexp_sum_enumerated(&u, &[1.0, 2.0], 17, 0.3, &|_| 0.0),
            Err(Error::ExplosionGuard { .. })
        ));
    }
}
