use serde::{Deserialize, Serialize};

use super::interval::{IntervalUnion, RealInterval};
use super::ExpPolynomial;
use crate::error::{Error, Result};

/// Endpoint accuracy for every boundary located by bisection.
pub const BISECTION_TOL: f64 = 1e-10;

/// Grid resolution and refinement depth shared by the sampling routines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplingPlan {
    pub step: f64,
    pub refinement_levels: u32,
    pub seed: u64,
}

impl Default for SamplingPlan {
    fn default() -> Self {
        Self {
            step: 0.01,
            refinement_levels: 6,
            seed: 0,
        }
    }
}

impl SamplingPlan {
    pub fn new(step: f64, refinement_levels: u32, seed: u64) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::InvalidArgument(format!("step must be positive, got {step}")));
        }
        if refinement_levels == 0 {
            return Err(Error::InvalidArgument("refinement_levels must be at least 1".into()));
        }
        Ok(Self {
            step,
            refinement_levels,
            seed,
        })
    }

    pub fn with_step(step: f64) -> Self {
        Self {
            step,
            ..Self::default()
        }
    }

    /// Default plan for `u`: the oversampling bound as the step.
    pub fn for_poly(u: &ExpPolynomial) -> Self {
        Self::with_step(Self::oversampling_bound(u))
    }

    /// Largest admissible step for `u`: one tenth of a period of the
    /// fastest oscillation (with a floor of one unit of frequency).
    pub fn oversampling_bound(u: &ExpPolynomial) -> f64 {
        1.0 / (10.0 * (1.0 + u.max_real_frequency()))
    }

    /// Step actually used for `u`: never coarser than the oversampling bound.
    pub fn step_for(&self, u: &ExpPolynomial) -> f64 {
        self.step.min(Self::oversampling_bound(u))
    }

    pub fn refined(&self, factor: f64) -> Self {
        Self {
            step: self.step / factor,
            ..*self
        }
    }
}

/// Uniform nodes covering `interval` with spacing at most `step`,
/// including both endpoints.
pub fn uniform_nodes(interval: &RealInterval, step: f64) -> Vec<f64> {
    let len = interval.length();
    if len == 0.0 {
        return vec![interval.lo()];
    }
    let n = (len / step).ceil().max(1.0) as usize;
    let h = len / n as f64;
    (0..=n)
        .map(|i| {
            if i == n {
                interval.hi()
            } else {
                interval.lo() + i as f64 * h
            }
        })
        .collect()
}

/// Bisects a state change of `inside` on `[a, b]` where `inside(a) == state_a`
/// and `inside(b) != state_a`. Returns the final bracket.
fn bisect(mut a: f64, mut b: f64, state_a: bool, inside: &impl Fn(f64) -> bool) -> (f64, f64) {
    for _ in 0..200 {
        if b - a <= BISECTION_TOL {
            break;
        }
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if inside(m) == state_a {
            a = m;
        } else {
            b = m;
        }
    }
    (a, b)
}

/// Builds the set `{x : inside(x)}` from predicate states at sorted nodes,
/// bisecting every state change. Reported endpoints always satisfy the
/// predicate.
pub fn level_set_from_nodes(
    nodes: &[f64],
    states: &[bool],
    inside: impl Fn(f64) -> bool,
) -> IntervalUnion {
    debug_assert_eq!(nodes.len(), states.len());
    let mut out = Vec::new();
    let mut start: Option<f64> = None;
    if let (Some(&x0), Some(&s0)) = (nodes.first(), states.first()) {
        if s0 {
            start = Some(x0);
        }
    }
    for w in 0..nodes.len().saturating_sub(1) {
        let (x0, x1) = (nodes[w], nodes[w + 1]);
        let (s0, s1) = (states[w], states[w + 1]);
        if s0 == s1 {
            continue;
        }
        let (a, b) = bisect(x0, x1, s0, &inside);
        if s0 {
            if let Some(lo) = start.take() {
                out.push((lo, a));
            }
        } else {
            start = Some(b);
        }
    }
    if let (Some(lo), Some(&hi)) = (start, nodes.last()) {
        out.push((lo, hi));
    }
    IntervalUnion::from_intervals(
        out.into_iter()
            .filter(|(lo, hi)| hi > lo)
            .map(|(lo, hi)| RealInterval::new(lo, hi).expect("ordered endpoints")),
    )
}

/// `{x in interval : inside(x)}` as an interval union, sampled at spacing
/// `step` with bisected boundaries. Features narrower than `step` that fall
/// between two nodes of equal state are not detected.
pub fn level_set(
    interval: &RealInterval,
    step: f64,
    inside: impl Fn(f64) -> bool,
) -> IntervalUnion {
    let nodes = uniform_nodes(interval, step);
    let states: Vec<bool> = nodes.iter().map(|&x| inside(x)).collect();
    level_set_from_nodes(&nodes, &states, inside)
}

/// Like [`level_set`], but a cell whose end states agree is split four ways
/// (at most `levels` times) while `suspicious(x0, x1)` reports that the
/// predicate could change inside it.
pub fn refined_level_set(
    interval: &RealInterval,
    step: f64,
    levels: u32,
    inside: impl Fn(f64) -> bool,
    suspicious: impl Fn(f64, f64) -> bool,
) -> IntervalUnion {
    refined_level_set_probed(interval, step, levels, inside, suspicious, |_, _| None)
}

/// Like [`refined_level_set`]; a cell still suspicious at the last level is
/// handed to `probe`, which may return an interior point to split it at.
/// This catches features narrower than the finest cell, such as the dip
/// around a near-zero.
pub fn refined_level_set_probed(
    interval: &RealInterval,
    step: f64,
    levels: u32,
    inside: impl Fn(f64) -> bool,
    suspicious: impl Fn(f64, f64) -> bool,
    probe: impl Fn(f64, f64) -> Option<f64>,
) -> IntervalUnion {
    let coarse = uniform_nodes(interval, step);
    let coarse_states: Vec<bool> = coarse.iter().map(|&x| inside(x)).collect();
    let mut nodes = vec![coarse[0]];
    let mut states = vec![coarse_states[0]];
    let mut stack = Vec::new();
    for w in (0..coarse.len() - 1).rev() {
        stack.push((coarse[w], coarse[w + 1], coarse_states[w], coarse_states[w + 1], 0u32));
    }
    while let Some((x0, x1, s0, s1, depth)) = stack.pop() {
        if s0 == s1 && depth < levels && suspicious(x0, x1) {
            let q = (x1 - x0) / 4.0;
            let xs = [x0, x0 + q, x0 + 2.0 * q, x0 + 3.0 * q, x1];
            let ss = [s0, inside(xs[1]), inside(xs[2]), inside(xs[3]), s1];
            for k in (0..4).rev() {
                stack.push((xs[k], xs[k + 1], ss[k], ss[k + 1], depth + 1));
            }
        } else {
            if s0 == s1 && depth >= levels && suspicious(x0, x1) {
                if let Some(p) = probe(x0, x1).filter(|&p| p > x0 && p < x1) {
                    let sp = inside(p);
                    if sp != s0 {
                        nodes.push(p);
                        states.push(sp);
                    }
                }
            }
            nodes.push(x1);
            states.push(s1);
        }
    }
    level_set_from_nodes(&nodes, &states, inside)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_set_of_half_line() {
        let i = RealInterval::new(0.0, 1.0).unwrap();
        let s = level_set(&i, 0.1, |x| x > 0.3141);
        assert_eq!(s.intervals().len(), 1);
        assert!((s.intervals()[0].lo() - 0.3141).abs() < 2e-10);
        assert_eq!(s.intervals()[0].hi(), 1.0);
    }

    #[test]
    fn level_set_endpoints_satisfy_predicate() {
        let i = RealInterval::new(-3.0, 3.0).unwrap();
        let pred = |x: f64| x.sin() > 0.2;
        let s = level_set(&i, 0.05, pred);
        for c in s.intervals() {
            assert!(pred(c.lo()) && pred(c.hi()));
        }
    }

    #[test]
    fn refinement_catches_narrow_gap() {
        let i = RealInterval::new(0.0, 1.0).unwrap();
        let pred = |x: f64| (x - 0.5123).abs() > 1e-3;
        assert_eq!(level_set(&i, 0.1, pred).intervals().len(), 1);
        let s = refined_level_set(&i, 0.1, 6, pred, |_, _| true);
        assert_eq!(s.intervals().len(), 2);
        assert!((s.measure() - (1.0 - 2e-3)).abs() < 1e-9);
    }

    #[test]
    fn probe_finds_gap_below_resolution() {
        let i = RealInterval::new(0.0, 1.0).unwrap();
        let pred = |x: f64| (x - 0.5123).abs() > 1e-7;
        let plain = refined_level_set(&i, 0.1, 3, pred, |_, _| true);
        assert_eq!(plain.intervals().len(), 1);
        let probed = refined_level_set_probed(&i, 0.1, 3, pred, |_, _| true, |x0, x1| {
            (x0 < 0.5123 && 0.5123 < x1).then_some(0.5123)
        });
        assert_eq!(probed.intervals().len(), 2);
        assert!((probed.measure() - (1.0 - 2e-7)).abs() < 1e-9);
    }

    #[test]
    fn nodes_cover_endpoints() {
        let i = RealInterval::new(0.0, 1.0).unwrap();
        let n = uniform_nodes(&i, 0.3);
        assert_eq!(n.first(), Some(&0.0));
        assert_eq!(n.last(), Some(&1.0));
        assert_eq!(n.len(), 5);
    }
}
