//! Exponential polynomials `u(x) = sum_j c_j exp(a_j x)` and the sets they
//! cut out of the real line.
//!
//! Exponents are stored as a real growth `rate` plus a frequency `freq`
//! measured in cycles, so `a_j = rate + 2*pi*i*freq`. Trigonometric
//! polynomials are the case where every rate is zero; keeping the
//! frequency in cycles lets a Gabor atom `(a, b)` round-trip through a
//! polynomial without a `2*pi` rescaling.

mod density;
mod interval;
mod sampling;

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use density::{beurling_lower_density_scan, support_cover_check, CoverReport};
pub use interval::{set_algebra, IntervalUnion, Operand, RealInterval, SetOp};
pub use sampling::{
    level_set, level_set_from_nodes, refined_level_set, refined_level_set_probed, uniform_nodes, SamplingPlan, BISECTION_TOL,
};

use crate::error::{Error, Result};

/// Largest admissible `|Re(a_j) x|` before evaluation is refused.
pub const EXPONENT_GUARD: f64 = 700.0;

/// Relative width required of a supremum bracket.
pub const SUP_RELATIVE_GAP: f64 = 1e-6;

/// One term `c * exp((rate + 2*pi*i*freq) x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpTerm {
    pub coefficient: Complex64,
    pub rate: f64,
    pub freq: f64,
}

impl ExpTerm {
    pub fn new(coefficient: Complex64, rate: f64, freq: f64) -> Self {
        Self {
            coefficient,
            rate,
            freq,
        }
    }

    /// Purely oscillating term `c * exp(2*pi*i*freq x)`.
    pub fn trig(coefficient: Complex64, freq: f64) -> Self {
        Self::new(coefficient, 0.0, freq)
    }

    /// The complex exponent `a_j`.
    pub fn exponent(&self) -> Complex64 {
        Complex64::new(self.rate, TAU * self.freq)
    }

    fn value(&self, x: f64) -> Result<Complex64> {
        let growth = self.rate * x;
        if growth.abs() > EXPONENT_GUARD {
            return Err(Error::Overflow { exponent: growth });
        }
        let phase = TAU * self.freq * x;
        Ok(self.coefficient * Complex64::from_polar(growth.exp(), phase))
    }
}

/// Finite sum of exponential terms with pairwise distinct exponents and
/// nonzero coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<[f64; 4]>", into = "Vec<[f64; 4]>")]
pub struct ExpPolynomial {
    terms: Vec<ExpTerm>,
}

impl ExpPolynomial {
    pub fn new(terms: Vec<ExpTerm>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidArgument("polynomial needs at least one term".into()));
        }
        for (j, t) in terms.iter().enumerate() {
            if t.coefficient == Complex64::new(0.0, 0.0) {
                return Err(Error::InvalidArgument(format!("coefficient {j} is zero")));
            }
            if !(t.coefficient.re.is_finite()
                && t.coefficient.im.is_finite()
                && t.rate.is_finite()
                && t.freq.is_finite())
            {
                return Err(Error::InvalidArgument(format!("term {j} is not finite")));
            }
            if terms[..j].iter().any(|s| s.rate == t.rate && s.freq == t.freq) {
                return Err(Error::InvalidArgument(format!(
                    "exponent of term {j} repeats an earlier term"
                )));
            }
        }
        Ok(Self { terms })
    }

    /// Trigonometric polynomial from `(coefficient, frequency in cycles)` pairs.
    pub fn trigonometric(pairs: &[(Complex64, f64)]) -> Result<Self> {
        Self::new(pairs.iter().map(|&(c, f)| ExpTerm::trig(c, f)).collect())
    }

    pub fn constant(c: Complex64) -> Result<Self> {
        Self::trigonometric(&[(c, 0.0)])
    }

    /// `2 cos(2 pi x)` written as `e^{2 pi i x} + e^{-2 pi i x}`.
    pub fn two_cos() -> Self {
        Self::trigonometric(&[(Complex64::new(1.0, 0.0), 1.0), (Complex64::new(1.0, 0.0), -1.0)])
            .expect("valid polynomial")
    }

    pub fn terms(&self) -> &[ExpTerm] {
        &self.terms
    }

    /// Number of terms `m`.
    pub fn order(&self) -> usize {
        self.terms.len()
    }

    pub fn is_trigonometric(&self) -> bool {
        self.terms.iter().all(|t| t.rate == 0.0)
    }

    /// Minimal gap `delta` between distinct frequencies (in cycles). Only
    /// defined for trigonometric polynomials with at least two terms.
    pub fn min_separation(&self) -> Option<f64> {
        if self.order() < 2 || !self.is_trigonometric() {
            return None;
        }
        let mut freqs: Vec<f64> = self.terms.iter().map(|t| t.freq).collect();
        freqs.sort_by(f64::total_cmp);
        freqs.windows(2).map(|w| w[1] - w[0]).reduce(f64::min)
    }

    pub fn max_real_frequency(&self) -> f64 {
        self.terms.iter().map(|t| t.freq.abs()).fold(0.0, f64::max)
    }

    pub fn max_abs_rate(&self) -> f64 {
        self.terms.iter().map(|t| t.rate.abs()).fold(0.0, f64::max)
    }

    /// Sum of squared coefficient moduli.
    pub fn coefficient_energy(&self) -> f64 {
        self.terms.iter().map(|t| t.coefficient.norm_sqr()).sum()
    }

    pub fn evaluate(&self, x: f64) -> Result<Complex64> {
        let mut acc = Complex64::new(0.0, 0.0);
        for t in &self.terms {
            acc += t.value(x)?;
        }
        Ok(acc)
    }

    /// `|u(x)|`, panicking past the overflow guard. Only for callers that
    /// have already checked the exponent range.
    pub(crate) fn abs_at(&self, x: f64) -> f64 {
        self.evaluate(x).expect("exponent range checked by caller").norm()
    }

    /// Checks that every term can be evaluated on `interval`.
    pub fn check_range(&self, interval: &RealInterval) -> Result<()> {
        for t in &self.terms {
            for x in [interval.lo(), interval.hi()] {
                let g = t.rate * x;
                if g.abs() > EXPONENT_GUARD {
                    return Err(Error::Overflow { exponent: g });
                }
            }
        }
        Ok(())
    }

    /// `v(x) = u(x + b)`: coefficients pick up `exp(a_j b)`, exponents stay.
    pub fn shift(&self, b: f64) -> Result<ExpPolynomial> {
        let mut terms = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            let c = t.value(b)?;
            if c == Complex64::new(0.0, 0.0) {
                return Err(Error::Overflow { exponent: t.rate * b });
            }
            terms.push(ExpTerm::new(c, t.rate, t.freq));
        }
        Ok(Self { terms })
    }

    pub fn scale(&self, s: Complex64) -> Result<ExpPolynomial> {
        Self::new(
            self.terms
                .iter()
                .map(|t| ExpTerm::new(t.coefficient * s, t.rate, t.freq))
                .collect(),
        )
    }

    /// Sum of polynomials with like exponents combined. Terms whose
    /// combined coefficient drops below `1e-13` of the largest input
    /// coefficient are treated as cancelled; `None` means the sum vanishes
    /// identically.
    pub fn sum(polys: &[ExpPolynomial]) -> Option<ExpPolynomial> {
        let mut acc: Vec<ExpTerm> = Vec::new();
        let mut scale = 0.0f64;
        for p in polys {
            for t in &p.terms {
                scale = scale.max(t.coefficient.norm());
                match acc.iter_mut().find(|s| s.rate == t.rate && s.freq == t.freq) {
                    Some(s) => s.coefficient += t.coefficient,
                    None => acc.push(*t),
                }
            }
        }
        acc.retain(|t| t.coefficient.norm() > 1e-13 * scale);
        (!acc.is_empty()).then(|| ExpPolynomial { terms: acc })
    }

    /// Pointwise product.
    pub fn product(&self, other: &ExpPolynomial) -> Option<ExpPolynomial> {
        let parts: Vec<ExpPolynomial> = self
            .terms
            .iter()
            .flat_map(|s| {
                other.terms.iter().map(move |t| ExpPolynomial {
                    terms: vec![ExpTerm::new(
                        s.coefficient * t.coefficient,
                        s.rate + t.rate,
                        s.freq + t.freq,
                    )],
                })
            })
            .collect();
        Self::sum(&parts)
    }

    /// Bounds `sum_j |c_j| |a_j|^k max_I |exp(Re(a_j) x)|` for `k = 0, 1, 2`:
    /// bounds on `|u|`, `|u'|`, `|u''|` over `interval`.
    pub(crate) fn derivative_bounds(&self, interval: &RealInterval) -> [f64; 3] {
        let mut out = [0.0; 3];
        for t in &self.terms {
            let w = (t.rate * interval.lo()).exp().max((t.rate * interval.hi()).exp());
            let c = t.coefficient.norm() * w;
            let a = t.exponent().norm();
            out[0] += c;
            out[1] += c * a;
            out[2] += c * a * a;
        }
        out
    }

    /// Bound on `|d^2/dx^2 |u|^2|` over `interval`.
    pub(crate) fn modulus_sq_curvature(&self, interval: &RealInterval) -> f64 {
        let [l0, l1, l2] = self.derivative_bounds(interval);
        2.0 * l1 * l1 + 2.0 * l2 * l0
    }

    /// Brackets `sup_{x in I} |u(x)|`.
    ///
    /// The lower end is the best sampled value. The upper end is certified
    /// cell by cell, taking the smaller of the Lipschitz bound
    /// `max(|u(x0)|, |u(x1)|) + L h / 2` with `L = sum |c_j||a_j|` and the
    /// curvature bound on `|u|^2`. Cells that could still beat the current
    /// best are split four ways up to `plan.refinement_levels` times.
    pub fn sup_on_interval(&self, interval: &RealInterval, plan: &SamplingPlan) -> Result<(f64, f64)> {
        if interval.length() <= 0.0 {
            return Err(Error::InvalidArgument("supremum needs |I| > 0".into()));
        }
        self.check_range(interval)?;
        let [_, lip, _] = self.derivative_bounds(interval);
        let curv = self.modulus_sq_curvature(interval);
        let nodes = uniform_nodes(interval, plan.step_for(self));
        let vals: Vec<f64> = nodes.iter().map(|&x| self.abs_at(x)).collect();
        let mut best = vals.iter().copied().fold(0.0, f64::max);

        let cell_bound = |v0: f64, v1: f64, h: f64| -> f64 {
            let lip_bound = v0.max(v1) + 0.5 * lip * h;
            let curv_bound = (v0.max(v1).powi(2) + curv * h * h / 8.0).sqrt();
            lip_bound.min(curv_bound)
        };

        let mut cells: Vec<(f64, f64, f64, f64)> = nodes
            .windows(2)
            .zip(vals.windows(2))
            .map(|(x, v)| (x[0], x[1], v[0], v[1]))
            .collect();
        let mut certified = best;
        for level in 0..=plan.refinement_levels {
            let mut surviving = Vec::with_capacity(cells.len());
            for cell @ &(x0, x1, v0, v1) in &cells {
                let bound = cell_bound(v0, v1, x1 - x0);
                if bound * (1.0 - SUP_RELATIVE_GAP) <= best {
                    certified = certified.max(bound);
                } else {
                    surviving.push(*cell);
                }
            }
            cells = surviving;
            if cells.is_empty() || level == plan.refinement_levels {
                break;
            }
            let mut next = Vec::with_capacity(cells.len() * 4);
            for &(x0, x1, v0, v1) in &cells {
                let h = (x1 - x0) / 4.0;
                let xs = [x0, x0 + h, x0 + 2.0 * h, x0 + 3.0 * h, x1];
                let vs = [v0, self.abs_at(xs[1]), self.abs_at(xs[2]), self.abs_at(xs[3]), v1];
                for k in 0..4 {
                    best = best.max(vs[k]);
                    next.push((xs[k], xs[k + 1], vs[k], vs[k + 1]));
                }
            }
            cells = next;
        }
        let upper = cells
            .iter()
            .map(|&(x0, x1, v0, v1)| cell_bound(v0, v1, x1 - x0))
            .fold(certified, f64::max);
        let gap = if upper > 0.0 { (upper - best) / upper } else { 0.0 };
        if gap > SUP_RELATIVE_GAP {
            return Err(Error::RefinementExhausted {
                gap,
                levels: plan.refinement_levels,
            });
        }
        Ok((best, upper))
    }

    /// Brackets the supremum of `|u|` over a union of intervals.
    pub fn sup_on_union(&self, set: &IntervalUnion, plan: &SamplingPlan) -> Result<(f64, f64)> {
        let mut lo = 0.0f64;
        let mut hi = 0.0f64;
        for i in set.intervals() {
            let (l, h) = self.sup_on_interval(i, plan)?;
            lo = lo.max(l);
            hi = hi.max(h);
        }
        Ok((lo, hi))
    }

    /// `{x in I : |u(x)| < t}` as an interval union.
    ///
    /// Nodes are laid at the plan step. A cell whose end states agree is
    /// split four ways (up to `plan.refinement_levels` times) whenever the
    /// curvature bound on `|u|^2` allows a hidden crossing of `t^2`.
    /// Boundaries are then bisected to [`BISECTION_TOL`].
    pub fn sublevel_set(&self, interval: &RealInterval, t: f64, plan: &SamplingPlan) -> Result<IntervalUnion> {
        if !(t > 0.0) {
            return Err(Error::InvalidArgument(format!("threshold must be positive, got {t}")));
        }
        if interval.length() <= 0.0 {
            return Err(Error::InvalidArgument("sublevel set needs |I| > 0".into()));
        }
        self.check_range(interval)?;
        let t2 = t * t;
        let curv = self.modulus_sq_curvature(interval);
        let g = |x: f64| self.evaluate(x).expect("range checked").norm_sqr();
        let coarse = uniform_nodes(interval, plan.step_for(self));
        let coarse_vals: Vec<f64> = coarse.iter().map(|&x| g(x)).collect();

        let mut nodes = vec![coarse[0]];
        let mut vals = vec![coarse_vals[0]];
        let mut stack: Vec<(f64, f64, f64, f64, u32)> = Vec::new();
        for w in (0..coarse.len() - 1).rev() {
            stack.push((coarse[w], coarse[w + 1], coarse_vals[w], coarse_vals[w + 1], 0));
        }
        while let Some((x0, x1, g0, g1, depth)) = stack.pop() {
            let h = x1 - x0;
            let slack = curv * h * h / 8.0;
            let (in0, in1) = (g0 < t2, g1 < t2);
            let hidden = in0 == in1
                && if in0 {
                    g0.max(g1) + slack >= t2
                } else {
                    g0.min(g1) - slack < t2
                };
            if hidden && depth < plan.refinement_levels {
                let q = h / 4.0;
                let xs = [x0, x0 + q, x0 + 2.0 * q, x0 + 3.0 * q, x1];
                let gs = [g0, g(xs[1]), g(xs[2]), g(xs[3]), g1];
                for k in (0..4).rev() {
                    stack.push((xs[k], xs[k + 1], gs[k], gs[k + 1], depth + 1));
                }
            } else {
                nodes.push(x1);
                vals.push(g1);
            }
        }
        let states: Vec<bool> = vals.iter().map(|&v| v < t2).collect();
        Ok(level_set_from_nodes(&nodes, &states, |x| g(x) < t2))
    }
}

impl TryFrom<Vec<[f64; 4]>> for ExpPolynomial {
    type Error = Error;

    fn try_from(quads: Vec<[f64; 4]>) -> Result<Self> {
        Self::new(
            quads
                .into_iter()
                .map(|[cr, ci, ar, ai]| ExpTerm::new(Complex64::new(cr, ci), ar, ai / TAU))
                .collect(),
        )
    }
}

impl From<ExpPolynomial> for Vec<[f64; 4]> {
    fn from(u: ExpPolynomial) -> Self {
        u.terms
            .iter()
            .map(|t| {
                let a = t.exponent();
                [t.coefficient.re, t.coefficient.im, a.re, a.im]
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn constant_evaluates_to_itself() {
        let u = ExpPolynomial::constant(c(1.0)).unwrap();
        assert_eq!(u.evaluate(17.3).unwrap(), c(1.0));
    }

    #[test]
    fn two_cos_vanishes_at_quarter() {
        let v = ExpPolynomial::two_cos().evaluate(0.25).unwrap();
        assert!(v.norm() < 1e-15);
    }

    #[test]
    fn one_minus_character_at_half() {
        let u = ExpPolynomial::trigonometric(&[(c(1.0), 0.0), (c(-1.0), 1.0)]).unwrap();
        assert!((u.evaluate(0.5).unwrap() - c(2.0)).norm() < 1e-15);
    }

    #[test]
    fn shift_by_half_flips_character() {
        let u = ExpPolynomial::trigonometric(&[(c(1.0), 1.0)]).unwrap();
        let v = u.shift(0.5).unwrap();
        assert!((v.terms()[0].coefficient - c(-1.0)).norm() < 1e-15);
        assert_eq!(v.terms()[0].freq, 1.0);
        assert_eq!(u.shift(0.0).unwrap(), u);
    }

    #[test]
    fn overflow_is_reported() {
        let u = ExpPolynomial::new(vec![ExpTerm::new(c(1.0), 2.0, 0.0)]).unwrap();
        assert!(matches!(u.evaluate(400.0), Err(Error::Overflow { .. })));
        assert!(u.evaluate(300.0).is_ok());
    }

    #[test]
    fn rejects_duplicate_and_zero_terms() {
        assert!(ExpPolynomial::trigonometric(&[(c(1.0), 1.0), (c(2.0), 1.0)]).is_err());
        assert!(ExpPolynomial::trigonometric(&[(c(0.0), 1.0)]).is_err());
    }

    #[test]
    fn separation_of_trig_polynomial() {
        let u = ExpPolynomial::trigonometric(&[(c(1.0), 0.0), (c(1.0), 0.3), (c(1.0), -1.0)]).unwrap();
        assert!((u.min_separation().unwrap() - 0.3).abs() < 1e-15);
        assert_eq!(ExpPolynomial::constant(c(1.0)).unwrap().min_separation(), None);
    }

    #[test]
    fn sup_of_constant_is_exact() {
        let u = ExpPolynomial::constant(c(1.0)).unwrap();
        let i = RealInterval::new(3.0, 7.0).unwrap();
        assert_eq!(u.sup_on_interval(&i, &SamplingPlan::for_poly(&u)).unwrap(), (1.0, 1.0));
    }

    #[test]
    fn sup_of_two_cos_brackets_two() {
        let u = ExpPolynomial::two_cos();
        let i = RealInterval::new(0.0, 1.0).unwrap();
        let (lo, hi) = u.sup_on_interval(&i, &SamplingPlan::for_poly(&u)).unwrap();
        assert!(lo <= 2.0 + 1e-12 && 2.0 <= hi + 1e-12);
        assert!(hi - lo <= 1e-6 * hi);
    }

    #[test]
    fn sup_needs_positive_length() {
        let u = ExpPolynomial::two_cos();
        let i = RealInterval::new(1.0, 1.0).unwrap();
        assert!(u.sup_on_interval(&i, &SamplingPlan::default()).is_err());
    }

    #[test]
    fn exhausted_refinement_is_an_error() {
        let u = ExpPolynomial::trigonometric(&[(c(1.0), 0.0), (c(1.0), 0.37)]).unwrap();
        let i = RealInterval::new(0.0, 50.0).unwrap();
        let plan = SamplingPlan::new(1.0, 1, 0).unwrap();
        assert!(matches!(
            u.sup_on_interval(&i, &plan),
            Err(Error::RefinementExhausted { .. })
        ));
    }

    #[test]
    fn sublevel_of_constant_above_threshold_is_empty() {
        let u = ExpPolynomial::constant(c(1.0)).unwrap();
        let i = RealInterval::new(0.0, 1.0).unwrap();
        let s = u.sublevel_set(&i, 0.5, &SamplingPlan::for_poly(&u)).unwrap();
        assert!(s.is_empty());
    }

    #[test]
    fn sublevel_of_two_cos_at_two_is_full() {
        let u = ExpPolynomial::two_cos();
        let i = RealInterval::new(0.0, 1.0).unwrap();
        let s = u.sublevel_set(&i, 2.0, &SamplingPlan::for_poly(&u)).unwrap();
        assert!((s.measure() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn sublevel_of_two_cos_at_one_is_a_third() {
        let u = ExpPolynomial::two_cos();
        let i = RealInterval::new(0.0, 1.0).unwrap();
        let s = u.sublevel_set(&i, 1.0, &SamplingPlan::for_poly(&u)).unwrap();
        assert!((s.measure() - 1.0 / 3.0).abs() < 1e-6);
        assert_eq!(s.intervals().len(), 2);
    }

    #[test]
    fn sublevel_finds_narrow_dip_between_nodes() {
        // |u| has a zero at 0.25 + 1e-3; a coarse grid straddles it.
        let u = ExpPolynomial::two_cos().shift(-1e-3).unwrap();
        let i = RealInterval::new(0.0, 0.5).unwrap();
        let plan = SamplingPlan::new(0.1, 6, 0).unwrap();
        let s = u.sublevel_set(&i, 1e-3, &plan).unwrap();
        let expected = 2.0 * (1e-3f64 / 2.0).asin() / std::f64::consts::TAU;
        assert!((s.measure() - expected).abs() < 1e-8, "{}", s.measure());
    }

    #[test]
    fn serde_quadruples() {
        let u = ExpPolynomial::trigonometric(&[(c(1.0), 1.0)]).unwrap();
        let s = serde_json::to_string(&u).unwrap();
        let back: ExpPolynomial = serde_json::from_str(&s).unwrap();
        assert_eq!(back, u);
        let v: ExpPolynomial = serde_json::from_str("[[2.0, 0.0, -1.0, 0.0]]").unwrap();
        assert_eq!(v.terms()[0].rate, -1.0);
    }

    #[test]
    fn product_and_sum_combine_like_terms() {
        let u = ExpPolynomial::two_cos();
        let sq = u.product(&u).unwrap();
        // (2cos)^2 = 2 + e^{4 pi i x} + e^{-4 pi i x}
        assert_eq!(sq.order(), 3);
        let x = 0.123;
        let direct = u.evaluate(x).unwrap().powi(2);
        assert!((sq.evaluate(x).unwrap() - direct).norm() < 1e-13);
        let neg = u.scale(c(-1.0)).unwrap();
        assert!(ExpPolynomial::sum(&[u, neg]).is_none());
    }
}
