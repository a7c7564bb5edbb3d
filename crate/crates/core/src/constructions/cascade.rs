use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{lebesgue_point_window, pigeonhole};
use crate::catalog::FunctionSpec;
use crate::error::{Error, Result};
use crate::exppoly::{ExpPolynomial, IntervalUnion, SamplingPlan};
use crate::independence::CollapsedRelation;
use crate::inequalities::half_split;

/// A relation rewritten as `sum_j v_j(y) f(y + beta_j) = 0` with
/// `0 = beta_1 < beta_2 < ... < beta_n` and `sup |v_j| <= 1` on the window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizedRelation {
    pub beta: Vec<f64>,
    pub polys: Vec<ExpPolynomial>,
    /// Common factor `U` every polynomial was divided by.
    pub normalization: f64,
}

/// Substitutes `x = y + b_n` in `sum_i u_i(x) f(x - b_i)` and divides by
/// the largest window supremum of the shifted polynomials.
pub fn normalize_relation(
    coll: &CollapsedRelation,
    f: &FunctionSpec,
    plan: &SamplingPlan,
) -> Result<NormalizedRelation> {
    let b = coll.shifts();
    let top = b[b.len() - 1];
    let mut beta = Vec::with_capacity(b.len());
    let mut polys = Vec::with_capacity(b.len());
    for (u, &bi) in coll.polys().iter().zip(b).rev() {
        beta.push(top - bi);
        polys.push(u.shift(top)?);
    }
    let mut normalization = 0.0f64;
    for p in &polys {
        normalization = normalization.max(p.sup_on_interval(&f.window, plan)?.1);
    }
    if !(normalization > 0.0) {
        return Err(Error::InvalidArgument("relation polynomials vanish on the window".into()));
    }
    let polys = polys
        .iter()
        .map(|p| p.scale(Complex64::new(1.0 / normalization, 0.0)))
        .collect::<Result<_>>()?;
    Ok(NormalizedRelation {
        beta,
        polys,
        normalization,
    })
}

/// `ln(eps^k (2n)^{-(m-1)(k-1)k/2})`.
pub fn claim_bound_ln(ln_eps: f64, n: usize, m: usize, k: usize) -> f64 {
    let (k, m1) = (k as f64, m as f64 - 1.0);
    k * ln_eps - m1 * (k - 1.0) * k / 2.0 * (2.0 * n as f64).ln()
}

/// The same bound built one stage at a time: each stage multiplies by
/// `eps (2n)^{-(m-1)(k-1)}`.
pub fn claim_bound_ln_recursive(ln_eps: f64, n: usize, m: usize, k: usize) -> f64 {
    let step = (2.0 * n as f64).ln() * (m as f64 - 1.0);
    (1..k).fold(ln_eps, |acc, j| acc + ln_eps - step * j as f64)
}

/// One stage `X_k` of the cascade.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CascadeState {
    pub k: usize,
    pub x: IntervalUnion,
    pub measure: f64,
    /// `lambda / (2n)^{k-1}`.
    pub expected_measure: f64,
    /// Claimed `inf_{X_k} |f|`.
    pub lower_bound: f64,
    pub ln_lower_bound: f64,
    /// Smallest `ln |f|` seen on a grid of `X_k` including endpoints.
    pub measured_ln_min: f64,
    /// Indices into the normalised relation chosen so far; index 0 is the
    /// term multiplying `f(y)`.
    pub j_history: Vec<usize>,
    /// `inf_V |v_1|` from the half split of `X_k`, absent at the last stage.
    pub u1_bound: Option<f64>,
    pub measure_ok: bool,
    /// `X_k` lies inside `X_{k-1} + beta_{j(k-1)}`.
    pub subset_ok: bool,
    /// `inf X_k >= inf X_1 + (k - 1) beta_2`.
    pub drift_ok: bool,
}

impl CascadeState {
    pub fn bound_ok(&self) -> bool {
        self.measured_ln_min >= self.ln_lower_bound - 1e-12 * self.ln_lower_bound.abs().max(1.0)
    }

    pub fn properties_hold(&self) -> bool {
        self.bound_ok() && self.measure_ok && self.subset_ok && self.drift_ok
    }
}

/// A completed cascade with the constants it used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CascadeRun {
    pub states: Vec<CascadeState>,
    pub epsilon: f64,
    pub lambda: f64,
    /// Constant in `inf_V |v_1| >= C |X_k|^{m-1}`, measured.
    pub c: f64,
    pub m: usize,
    pub relation: NormalizedRelation,
    /// Passes needed before `C` stopped shrinking.
    pub passes: usize,
}

impl CascadeRun {
    pub fn all_properties_hold(&self) -> bool {
        self.states.iter().all(CascadeState::properties_hold)
    }
}

enum PassOutcome {
    Done(Vec<CascadeState>),
    Shrink(f64),
}

fn ln_min_on(f: &FunctionSpec, set: &IntervalUnion, step: f64) -> f64 {
    let mut pts = set.sample_points(step);
    for i in set.intervals() {
        pts.push(i.lo());
        pts.push(i.hi());
    }
    pts.into_iter().map(|x| f.ln_abs(x)).fold(f64::INFINITY, f64::min)
}

struct Setup<'a> {
    f: &'a FunctionSpec,
    rel: &'a NormalizedRelation,
    plan: &'a SamplingPlan,
    x1: &'a IntervalUnion,
    lambda: f64,
    m: usize,
    k_max: usize,
}

fn run_pass(s: &Setup<'_>, c: f64, epsilon: f64) -> Result<PassOutcome> {
    let n = s.rel.beta.len();
    let two_n = 2.0 * n as f64;
    let m1 = s.m as f64 - 1.0;
    let ln_eps = epsilon.ln();
    let start = s.x1.hull().expect("nonempty").lo();
    let beta2 = s.rel.beta[1];
    let mut states = Vec::with_capacity(s.k_max);
    let mut x = s.x1.clone();
    let mut j_history = Vec::new();
    let mut subset_ok = true;
    for k in 1..=s.k_max {
        let expected = s.lambda / two_n.powi(k as i32 - 1);
        let measure = x.measure();
        let step = s.plan.step.min(measure / 64.0);
        let ln_bound = claim_bound_ln(ln_eps, n, s.m, k);
        let mut state = CascadeState {
            k,
            x: x.clone(),
            measure,
            expected_measure: expected,
            lower_bound: ln_bound.exp(),
            ln_lower_bound: ln_bound,
            measured_ln_min: ln_min_on(s.f, &x, step),
            j_history: j_history.clone(),
            u1_bound: None,
            measure_ok: (measure - expected).abs() <= 1e-9 * expected,
            subset_ok,
            drift_ok: x.hull().expect("nonempty").lo() >= start + (k as f64 - 1.0) * beta2 - 1e-12,
        };
        if !state.bound_ok() {
            return Err(Error::StageCollapse(k));
        }
        if k == s.k_max {
            states.push(state);
            break;
        }
        let split = half_split(&s.rel.polys[0], &x, s.plan)?;
        state.u1_bound = Some(split.bound);
        let c_k = split.bound / expected.powf(m1);
        if c_k < c * (1.0 - 1e-12) {
            return Ok(PassOutcome::Shrink(c_k));
        }
        states.push(state);

        let target = ln_bound.exp() * c * expected.powf(m1);
        let terms: Vec<Box<dyn Fn(f64) -> f64 + '_>> = (1..n)
            .map(|j| {
                let (v, b) = (&s.rel.polys[j], s.rel.beta[j]);
                Box::new(move |y: f64| v.evaluate(y).map_or(0.0, |z| z.norm()) * s.f.abs(y + b))
                    as Box<dyn Fn(f64) -> f64 + '_>
            })
            .collect();
        let refs: Vec<&dyn Fn(f64) -> f64> = terms.iter().map(|t| t.as_ref()).collect();
        let (j, chosen) = match pigeonhole(&refs, &split.f, target, step) {
            Ok(r) => r,
            Err(Error::Precondition { .. }) => return Err(Error::StageCollapse(k + 1)),
            Err(e) => return Err(e),
        };
        let j = j + 1;
        let w = chosen.truncate_to_measure(split.f.measure() / n as f64);
        let shifted = x.translate(s.rel.beta[j]);
        x = w.translate(s.rel.beta[j]);
        subset_ok = x.is_subset_of(&shifted, 0.0);
        j_history.push(j);
    }
    Ok(PassOutcome::Done(states))
}

/// Replays the Gaussian-decay cascade on a relation that holds.
///
/// `X_1` is the superlevel set of a Lebesgue-point window. Each stage
/// halves `X_k` with the polynomial multiplying `f(y)`, picks a shifted
/// term by pigeonhole, keeps a `1/n` share and translates it. `C` is
/// measured from the half splits; when a later stage needs a smaller `C`
/// the cascade restarts with it, and `eps = min(eps_0, C lambda^{m-1} / (2n))`.
pub fn gaussian_cascade(
    coll: &CollapsedRelation,
    f: &FunctionSpec,
    plan: &SamplingPlan,
    k_max: usize,
) -> Result<CascadeRun> {
    if coll.len() < 2 {
        return Err(Error::InvalidArgument("the cascade needs at least two translates".into()));
    }
    if k_max == 0 {
        return Err(Error::InvalidArgument("k_max must be at least 1".into()));
    }
    let rel = normalize_relation(coll, f, plan)?;
    let lp = lebesgue_point_window(f, plan)?;
    let lambda = lp.set.measure();
    let m = rel.polys[0].order();
    let m1 = m as f64 - 1.0;
    let n = rel.beta.len() as f64;
    let setup = Setup {
        f,
        rel: &rel,
        plan,
        x1: &lp.set,
        lambda,
        m,
        k_max,
    };
    let mut c = half_split(&rel.polys[0], &lp.set, plan)?.bound / lambda.powf(m1);
    for passes in 1..=8 {
        let epsilon = lp.epsilon.min(c * lambda.powf(m1) / (2.0 * n));
        match run_pass(&setup, c, epsilon)? {
            PassOutcome::Done(states) => {
                return Ok(CascadeRun {
                    states,
                    epsilon,
                    lambda,
                    c,
                    m,
                    relation: rel,
                    passes,
                })
            }
            PassOutcome::Shrink(c_new) => c = c_new * (1.0 - 1e-9),
        }
    }
    Err(Error::StageCollapse(k_max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::builtin;

    fn full_exp_relation(b: f64, norm: f64) -> CollapsedRelation {
        let c = |z: f64| ExpPolynomial::constant(Complex64::new(z, 0.0)).unwrap();
        CollapsedRelation::new(vec![0.0, b], vec![c(b.exp() * norm), c(-norm)]).unwrap()
    }

    #[test]
    fn closed_form_matches_recursion() {
        for n in 2..5 {
            for m in 1..4 {
                for k in 1..=30 {
                    let a = claim_bound_ln(-1.3, n, m, k);
                    let b = claim_bound_ln_recursive(-1.3, n, m, k);
                    assert!((a - b).abs() <= 1e-12 * a.abs(), "n={n} m={m} k={k}");
                }
            }
        }
    }

    #[test]
    fn normalization_puts_unshifted_term_first() {
        let f = builtin("full_exp").unwrap();
        let rel = normalize_relation(&full_exp_relation(1.0, 2.0), &f, &SamplingPlan::default()).unwrap();
        assert_eq!(rel.beta, vec![0.0, 1.0]);
        assert!((rel.normalization - 2.0 * 1f64.exp()).abs() < 1e-9);
        // the relation still holds after the rewrite
        for y in [0.3, 1.7, 5.0] {
            let s: Complex64 = rel
                .polys
                .iter()
                .zip(&rel.beta)
                .map(|(v, &b)| v.evaluate(y).unwrap() * f.evaluate(y + b))
                .sum();
            assert!(s.norm() < 1e-15);
        }
    }

    #[test]
    fn full_exp_cascade_keeps_all_properties() {
        let f = builtin("full_exp").unwrap();
        let run = gaussian_cascade(&full_exp_relation(1.0, 1.0), &f, &SamplingPlan::default(), 10).unwrap();
        assert_eq!(run.states.len(), 10);
        assert!(run.all_properties_hold(), "{:#?}", run.states.iter().map(|s| (s.k, s.measure_ok, s.subset_ok, s.drift_ok, s.bound_ok())).collect::<Vec<_>>());
        // base case: X_1 is the window's superlevel set
        assert!((run.states[0].measure - run.lambda).abs() < 1e-15);
        for w in run.states.windows(2) {
            assert!(w[1].ln_lower_bound < w[0].ln_lower_bound);
        }
    }

    #[test]
    fn single_translate_is_rejected() {
        let f = builtin("full_exp").unwrap();
        let one = ExpPolynomial::constant(Complex64::new(1.0, 0.0)).unwrap();
        let coll = CollapsedRelation::new(vec![0.0], vec![one]).unwrap();
        assert!(gaussian_cascade(&coll, &f, &SamplingPlan::default(), 3).is_err());
    }
}
