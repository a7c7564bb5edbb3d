use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exppoly::{ExpPolynomial, IntervalUnion, RealInterval, SamplingPlan};
use crate::quadrature::integrate_doubling;

/// Both sides of the Turán–Nazarov inequality for one `(u, I, E)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuranNazarovTrial {
    pub m: usize,
    pub interval_length: f64,
    pub set_measure: f64,
    pub sup_interval: (f64, f64),
    pub sup_set: (f64, f64),
    /// `upper(sup_I) / lower(sup_E)`: never smaller than the true ratio.
    pub ratio: f64,
    /// `e^{|I| max |Re a_j|}`.
    pub growth: f64,
    /// Smallest `A` making the trial hold (`m >= 2`).
    pub a_min: Option<f64>,
    pub holds: bool,
}

impl TuranNazarovTrial {
    /// Whether the trial holds with the constant `a`.
    pub fn holds_with(&self, a: f64) -> bool {
        match self.a_min {
            Some(need) => need <= a,
            None => self.holds,
        }
    }
}

pub fn verify_turan_nazarov(
    u: &ExpPolynomial,
    interval: &RealInterval,
    set: &IntervalUnion,
    plan: &SamplingPlan,
) -> Result<TuranNazarovTrial> {
    let measure = set.measure();
    if !(measure > 0.0) {
        return Err(Error::InvalidArgument("E must have positive measure".into()));
    }
    if !set.is_subset_of(&IntervalUnion::from_interval(*interval), 1e-12) {
        return Err(Error::InvalidArgument("E must lie inside I".into()));
    }
    let sup_interval = u.sup_on_interval(interval, plan)?;
    let sup_set = u.sup_on_union(set, plan)?;
    let len = interval.length();
    let growth = (len * u.max_abs_rate()).exp();
    let m = u.order();
    let ratio = sup_interval.1 / sup_set.0;
    let (a_min, holds) = if m == 1 {
        (None, sup_interval.0 <= growth * sup_set.1)
    } else {
        let a = (measure / len) * (ratio / growth).powf(1.0 / (m as f64 - 1.0));
        (Some(a), a.is_finite())
    };
    Ok(TuranNazarovTrial {
        m,
        interval_length: len,
        set_measure: measure,
        sup_interval,
        sup_set,
        ratio,
        growth,
        a_min,
        holds,
    })
}

/// One Montgomery–Vaughan check on `[a, a + K]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MontgomeryVaughanTrial {
    pub k: f64,
    pub a: f64,
    /// Minimal frequency gap; infinite for a single term.
    pub delta: f64,
    pub energy: f64,
    pub integral: f64,
    /// `int_0^K` of the polynomial with coefficients `c_j e^{2 pi i a_j a}`.
    pub shifted_integral: f64,
    pub lower: f64,
    pub upper: f64,
    pub holds_lower: bool,
    pub holds_upper: bool,
    pub shift_error: f64,
}

impl MontgomeryVaughanTrial {
    pub fn holds(&self) -> bool {
        self.holds_lower && self.holds_upper && self.shift_error <= 1e-10
    }
}

fn l2_mass(u: &ExpPolynomial, interval: &RealInterval, order: usize) -> Result<f64> {
    let cycles = u.max_real_frequency() * interval.length();
    let panels = (cycles.ceil() as usize).clamp(4, 1 << 12);
    let (v, _) = integrate_doubling(
        interval,
        order,
        panels,
        1 << 16,
        1e-14,
        |x: &f64| x.abs(),
        |x| u.evaluate(x).map(|v| v.norm_sqr()).unwrap_or(f64::NAN),
    )?;
    if !v.is_finite() {
        return Err(Error::QuadratureNonConvergence { change: f64::NAN });
    }
    Ok(v)
}

/// Checks `(K - 1/delta) sum |c_j|^2 <= int_a^{a+K} |u|^2 <= (K + 1/delta) sum |c_j|^2`
/// and the substitution identity moving the window to `[0, K]`.
pub fn verify_montgomery_vaughan(
    u: &ExpPolynomial,
    k: f64,
    a: f64,
    order: usize,
) -> Result<MontgomeryVaughanTrial> {
    if !u.is_trigonometric() {
        return Err(Error::InvalidArgument("needs a trigonometric polynomial".into()));
    }
    if !(k > 0.0) {
        return Err(Error::InvalidArgument("K must be positive".into()));
    }
    let delta = u.min_separation().unwrap_or(f64::INFINITY);
    let energy = u.coefficient_energy();
    let integral = l2_mass(u, &RealInterval::new(a, a + k)?, order)?;
    let shifted_integral = l2_mass(&u.shift(a)?, &RealInterval::new(0.0, k)?, order)?;
    let lower = (k - 1.0 / delta) * energy;
    let upper = (k + 1.0 / delta) * energy;
    let slack = 1e-12 * upper.abs().max(1.0);
    Ok(MontgomeryVaughanTrial {
        k,
        a,
        delta,
        energy,
        integral,
        shifted_integral,
        lower,
        upper,
        holds_lower: lower <= integral + slack,
        holds_upper: integral <= upper + slack,
        shift_error: (integral - shifted_integral).abs() / integral.max(1.0),
    })
}

/// Empirical `C(u, K) = min_a sup_{[a, a+K]} |u|` over a range of window starts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InfLowerBound {
    pub k: f64,
    pub c: f64,
    /// Window start attaining the minimum.
    pub argmin: f64,
}

/// Sliding-window maxima of `|u|` over a grid of starts in `starts`, then a
/// local refinement around the best start using bracketed suprema.
pub fn inf_lower_bound(
    u: &ExpPolynomial,
    starts: &RealInterval,
    k: f64,
    plan: &SamplingPlan,
) -> Result<InfLowerBound> {
    if !(k > 0.0) {
        return Err(Error::InvalidArgument("K must be positive".into()));
    }
    let h = plan.step_for(u);
    let span = RealInterval::new(starts.lo(), starts.hi() + k)?;
    u.check_range(&span)?;
    let n = ((span.length() / h).ceil() as usize).max(1);
    let h = span.length() / n as f64;
    let vals: Vec<f64> = (0..=n).map(|i| u.abs_at(span.lo() + i as f64 * h)).collect();
    let w = ((k / h).floor() as usize).max(1);
    let positions = ((starts.length() / h).floor() as usize).min(n - w.min(n));

    let mut deque: VecDeque<usize> = VecDeque::new();
    let mut best = (f64::INFINITY, 0usize);
    for i in 0..=(positions + w).min(n) {
        while deque.back().is_some_and(|&j| vals[j] <= vals[i]) {
            deque.pop_back();
        }
        deque.push_back(i);
        if i >= w {
            let start = i - w;
            while deque.front().is_some_and(|&j| j < start) {
                deque.pop_front();
            }
            let m = vals[*deque.front().expect("nonempty")];
            if m < best.0 && start <= positions {
                best = (m, start);
            }
        }
    }

    let window_sup = |a: f64| -> Result<f64> {
        Ok(u.sup_on_interval(&RealInterval::new(a, a + k)?, plan)?.1)
    };
    let mut center = span.lo() + best.1 as f64 * h;
    let mut radius = 2.0 * h;
    let mut c = window_sup(center)?;
    for _ in 0..2 {
        let mut next = center;
        for j in 0..=40 {
            let a = (center - radius + radius * j as f64 / 20.0).clamp(starts.lo(), starts.hi());
            let s = window_sup(a)?;
            if s < c {
                c = s;
                next = a;
            }
        }
        center = next;
        radius /= 20.0;
    }
    Ok(InfLowerBound {
        k,
        c,
        argmin: center,
    })
}

/// Outcome of splitting `E` at the level where half of it lies below.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalfSplit {
    pub f: IntervalUnion,
    /// `inf_F |u|` on a grid of `F` including its endpoints.
    pub bound: f64,
    /// Threshold `t` with `|{x in E : |u(x)| < t}| <= |E| / 2`.
    pub threshold: f64,
    /// `|u|` has a level set of positive measure at the threshold; the
    /// leftmost part of `E \ E_t` was kept.
    pub degenerate: bool,
}

fn sublevel_on(u: &ExpPolynomial, set: &IntervalUnion, t: f64, plan: &SamplingPlan) -> Result<IntervalUnion> {
    if t <= 0.0 {
        return Ok(IntervalUnion::empty());
    }
    let mut parts = Vec::new();
    for i in set.intervals() {
        if i.length() > 0.0 {
            parts.extend(u.sublevel_set(i, t, plan)?.intervals().iter().copied());
        }
    }
    Ok(IntervalUnion::from_intervals(parts))
}

/// Finds `F subset E` with `|F| = |E| / 2` on which `|u|` stays above the
/// threshold splitting `E` in half.
pub fn half_split(u: &ExpPolynomial, set: &IntervalUnion, plan: &SamplingPlan) -> Result<HalfSplit> {
    let total = set.measure();
    if !(total > 0.0) {
        return Err(Error::InvalidArgument("E must have positive measure".into()));
    }
    let half = 0.5 * total;
    let tol = 1e-6 * set.hull().map_or(total, |h| h.length());
    let (_, top) = u.sup_on_union(set, plan)?;
    let (mut lo, mut hi) = (0.0f64, top * (1.0 + 1e-9));
    let mut hi_measure = total;
    for _ in 0..200 {
        if hi - lo <= 1e-13 * hi || (hi_measure - half).abs() <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let m = sublevel_on(u, set, mid, plan)?.measure();
        if m > half {
            hi = mid;
            hi_measure = m;
        } else {
            lo = mid;
        }
    }
    // ties go to the larger threshold when it already splits within tolerance
    let threshold = if (hi_measure - half).abs() <= tol { hi } else { lo };
    let below = sublevel_on(u, set, threshold, plan)?;
    let rest = set.subtract(&below);
    let degenerate = rest.measure() - half > tol;
    let f = rest.truncate_to_measure(half);
    let step = plan.step_for(u);
    let mut pts = f.sample_points(step / 4.0);
    for i in f.intervals() {
        pts.push(i.lo());
        pts.push(i.hi());
    }
    let bound = pts.into_iter().map(|x| u.abs_at(x)).fold(f64::INFINITY, f64::min);
    Ok(HalfSplit {
        f,
        bound,
        threshold,
        degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn one() -> ExpPolynomial {
        ExpPolynomial::constant(Complex64::new(1.0, 0.0)).unwrap()
    }

    #[test]
    fn constant_polynomial_ratio_is_one() {
        let i = RealInterval::new(0.0, 2.0).unwrap();
        let e = IntervalUnion::from_pairs(&[(0.5, 0.7)]).unwrap();
        let t = verify_turan_nazarov(&one(), &i, &e, &SamplingPlan::default()).unwrap();
        assert!(t.holds);
        assert!(t.a_min.is_none());
    }

    #[test]
    fn two_cos_on_superlevel_set() {
        let u = ExpPolynomial::two_cos();
        let i = RealInterval::new(0.0, 1.0).unwrap();
        let plan = SamplingPlan::for_poly(&u);
        let e = IntervalUnion::from_interval(i).subtract(&u.sublevel_set(&i, 1.0, &plan).unwrap());
        let t = verify_turan_nazarov(&u, &i, &e, &plan).unwrap();
        assert!((e.measure() - 2.0 / 3.0).abs() < 1e-6);
        assert!((t.a_min.unwrap() - 2.0 / 3.0).abs() < 1e-5);
    }

    #[test]
    fn shrinking_set_at_zero_stabilises() {
        let u = ExpPolynomial::two_cos();
        let i = RealInterval::new(0.0, 1.0).unwrap();
        let plan = SamplingPlan::for_poly(&u);
        let a: Vec<f64> = [1e-2, 1e-3, 1e-4]
            .iter()
            .map(|&w| {
                let e = IntervalUnion::from_pairs(&[(0.25 - w / 2.0, 0.25 + w / 2.0)]).unwrap();
                verify_turan_nazarov(&u, &i, &e, &plan).unwrap().a_min.unwrap()
            })
            .collect();
        // sup_E = 2 sin(pi w) ~ 2 pi w, so A_min -> 1 / pi
        assert!((a[2] - 1.0 / std::f64::consts::PI).abs() < 1e-4);
        assert!((a[1] - a[2]).abs() < 1e-3);
    }

    #[test]
    fn rejects_set_outside_interval() {
        let i = RealInterval::new(0.0, 1.0).unwrap();
        let e = IntervalUnion::from_pairs(&[(0.5, 1.5)]).unwrap();
        assert!(verify_turan_nazarov(&one(), &i, &e, &SamplingPlan::default()).is_err());
    }

    #[test]
    fn single_term_mass_is_k() {
        let t = verify_montgomery_vaughan(&one(), 3.5, 1.0, 16).unwrap();
        assert!((t.integral - 3.5).abs() < 1e-12);
        assert!(t.holds());
    }

    #[test]
    fn two_term_mass_within_bounds() {
        let u = ExpPolynomial::trigonometric(&[(Complex64::new(1.0, 0.0), 0.0), (Complex64::new(1.0, 0.0), 1.0)])
            .unwrap();
        let t = verify_montgomery_vaughan(&u, 10.0, 0.0, 16).unwrap();
        // integer frequencies over whole periods: cross terms vanish
        assert!((t.integral - 20.0).abs() < 1e-10);
        assert!(t.holds());
        let s = verify_montgomery_vaughan(&u, 10.0, 3.7, 16).unwrap();
        assert!((s.integral - t.integral).abs() < 1e-10);
    }

    #[test]
    fn inf_bound_of_constant() {
        let starts = RealInterval::new(0.0, 3.0).unwrap();
        let r = inf_lower_bound(&one(), &starts, 0.5, &SamplingPlan::default()).unwrap();
        assert!((r.c - 1.0).abs() < 1e-12);
    }

    #[test]
    fn inf_bound_of_two_cos() {
        let u = ExpPolynomial::two_cos();
        let starts = RealInterval::new(0.0, 2.0).unwrap();
        let plan = SamplingPlan::for_poly(&u);
        let r = inf_lower_bound(&u, &starts, 1.0, &plan).unwrap();
        assert!((r.c - 2.0).abs() < 1e-5);
        // a window of length 0.1 centred on a zero sees 2 sin(pi/10)
        let r = inf_lower_bound(&u, &starts, 0.1, &plan).unwrap();
        assert!((r.c - 2.0 * (0.1 * std::f64::consts::PI).sin()).abs() < 1e-5, "{}", r.c);
    }

    #[test]
    fn half_split_constant_keeps_left_half() {
        let e = IntervalUnion::from_pairs(&[(0.0, 1.0)]).unwrap();
        let h = half_split(&one(), &e, &SamplingPlan::default()).unwrap();
        assert!(h.degenerate);
        assert_eq!(h.f, IntervalUnion::from_pairs(&[(0.0, 0.5)]).unwrap());
        assert_eq!(h.bound, 1.0);
    }

    #[test]
    fn half_split_around_a_zero() {
        let u = ExpPolynomial::two_cos();
        let e = IntervalUnion::from_pairs(&[(0.2, 0.3)]).unwrap();
        let h = half_split(&u, &e, &SamplingPlan::for_poly(&u)).unwrap();
        assert!((h.f.measure() - 0.05).abs() < 1e-7);
        let expected = 2.0 * (std::f64::consts::TAU * 0.025).sin();
        assert!((h.bound - expected).abs() < 1e-6, "{}", h.bound);
        assert!(h.bound >= h.threshold * (1.0 - 1e-6));
    }
}
