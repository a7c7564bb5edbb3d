use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::catalog::{FunctionSpec, Profile};
use crate::error::{Error, Result};
use crate::exppoly::{uniform_nodes, ExpPolynomial, RealInterval, SamplingPlan};
use crate::independence::CollapsedRelation;

/// Relative mismatch above which `f(y)` and `c e^{a y}` count as different.
pub const TAIL_MISMATCH: f64 = 1e-9;

/// Relative size below which the combined polynomial counts as zero.
pub const VANISHING: f64 = 1e-10;

fn pure(a: Complex64, c: Complex64, y: f64) -> Complex64 {
    c * (a * y).exp()
}

fn mismatch(f: &FunctionSpec, a: Complex64, c: Complex64, y: f64) -> f64 {
    let e = pure(a, c, y);
    (f.evaluate(y) - e).norm() / e.norm().max(f64::MIN_POSITIVE)
}

/// Largest `y` in the window where `f(y)` differs from `c e^{a y}` (to
/// relative `1e-9`), located on a grid and then by bisection. `None` when
/// they agree on the whole window.
pub fn detect_breakpoint(
    f: &FunctionSpec,
    a: Complex64,
    c: Complex64,
    plan: &SamplingPlan,
) -> Option<f64> {
    let nodes = uniform_nodes(&f.window, plan.step);
    let last = nodes.iter().rposition(|&y| mismatch(f, a, c, y) > TAIL_MISMATCH)?;
    if last + 1 == nodes.len() {
        return Some(nodes[last]);
    }
    let (mut lo, mut hi) = (nodes[last], nodes[last + 1]);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if mismatch(f, a, c, mid) > TAIL_MISMATCH {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(lo)
}

/// `f(x) = c e^{a x}` for `x > b0` on the window, with `b0` minimal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentialTailSpec {
    pub a: Complex64,
    pub c: Complex64,
    /// `None` when the identity holds on the whole window.
    pub b0: Option<f64>,
    pub f: FunctionSpec,
}

impl ExponentialTailSpec {
    /// Detects `b0` and checks the identity to the right of it.
    pub fn new(f: FunctionSpec, a: Complex64, c: Complex64, plan: &SamplingPlan) -> Result<Self> {
        let b0 = detect_breakpoint(&f, a, c, plan);
        if let Some(b) = b0 {
            if b >= f.window.hi() - plan.step {
                return Err(Error::InvalidArgument(format!(
                    "`{}` has no exponential tail inside its window",
                    f.name
                )));
            }
            let right = RealInterval::new(b, f.window.hi())?;
            for y in uniform_nodes(&right, plan.step).into_iter().skip(1) {
                if mismatch(&f, a, c, y) > 1e-12 {
                    return Err(Error::Precondition {
                        x: y,
                        what: "tail identity fails to the right of the breakpoint".into(),
                    });
                }
            }
        }
        Ok(Self { a, c, b0, f })
    }

    /// Uses the catalog tail parameters (`a = -1`, `c = 1` for the pure
    /// exponential).
    pub fn for_function(f: &FunctionSpec, plan: &SamplingPlan) -> Result<Self> {
        let (a, c) = match (&f.tail, &f.profile) {
            (Some(t), _) => (t.a, t.c * f.scale),
            (None, Profile::FullExp) => (Complex64::new(-1.0, 0.0), f.scale),
            _ => {
                return Err(Error::InvalidArgument(format!(
                    "`{}` has no exponential tail",
                    f.name
                )))
            }
        };
        Self::new(f.clone(), a, c, plan)
    }

    pub fn scaled(&self, lambda: Complex64) -> Self {
        Self {
            c: self.c * lambda,
            f: self.f.scaled(lambda),
            ..self.clone()
        }
    }
}

/// Outcome of substituting the tail into a relation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum TailVerdict {
    /// `v = sum u_i e^{-a x_i}` is not identically zero, so the relation
    /// cannot hold on the tail.
    NoRelation { sup_v: f64, scale: f64 },
    /// `v` vanishes, so the relation would force `f(y) = c e^{a y}` below
    /// `b0`, where `f` measurably differs.
    ForcesExtension {
        sup_v: f64,
        scale: f64,
        /// Largest relative `|f(y) - c e^{a y}|` on `(b0 + x_2 - x_1, b0)`.
        mismatch: f64,
    },
    /// `f` is a pure exponential on the window and the relation holds.
    ExcludedPureExponential {
        sup_v: f64,
        scale: f64,
        relation_residual: f64,
    },
}

impl TailVerdict {
    pub fn label(&self) -> &'static str {
        match self {
            Self::NoRelation { .. } => "no_relation",
            Self::ForcesExtension { .. } => "forces_extension",
            Self::ExcludedPureExponential { .. } => "excluded_pure_exponential",
        }
    }

    pub fn relation_holds(&self) -> bool {
        matches!(self, Self::ExcludedPureExponential { .. })
    }
}

fn relation_residual(spec: &ExponentialTailSpec, coll: &CollapsedRelation) -> Result<f64> {
    let x = coll.shifts();
    let (lo, hi) = (spec.f.window.lo() + x[x.len() - 1], spec.f.window.hi() + x[0]);
    if hi <= lo {
        return Ok(0.0);
    }
    let (mut worst, mut scale) = (0.0f64, 0.0f64);
    for y in uniform_nodes(&RealInterval::new(lo, hi)?, 0.01) {
        let mut mass = 0.0;
        for (u, &xi) in coll.polys().iter().zip(x) {
            mass += (u.evaluate(y)? * spec.f.evaluate(y - xi)).norm();
        }
        worst = worst.max(coll.combination(&spec.f, y)?.norm());
        scale = scale.max(mass);
    }
    Ok(if scale > 0.0 { worst / scale } else { 0.0 })
}

/// Substitutes the exponential tail into `sum_i u_i(x) f(x - x_i) = 0`.
///
/// With `x_1` the largest shift, the relation restricted to
/// `x > b0 + x_1` reads `c e^{a x} v(x) = 0` for
/// `v = sum_i u_i e^{-a x_i}`. A nonzero `v` rules the relation out. A
/// vanishing `v` reduces it on `(b0 + x_2, b0 + x_1)` to
/// `u_1(y) (f(y - x_1) - c e^{a (y - x_1)}) = 0`, which extends the tail
/// identity below `b0`.
pub fn exponential_tail_test(
    spec: &ExponentialTailSpec,
    coll: &CollapsedRelation,
    plan: &SamplingPlan,
) -> Result<TailVerdict> {
    let x = coll.shifts();
    let n = x.len();
    let x1 = x[n - 1];
    let parts: Vec<ExpPolynomial> = coll
        .polys()
        .iter()
        .zip(x)
        .map(|(u, &xi)| u.scale((-spec.a * xi).exp()))
        .collect::<Result<_>>()?;
    let scale: f64 = parts
        .iter()
        .flat_map(|p| p.terms().iter().map(|t| t.coefficient.norm()))
        .sum();
    let start = spec.b0.unwrap_or(spec.f.window.lo()) + x1;
    let sup_v = match ExpPolynomial::sum(&parts) {
        None => 0.0,
        Some(v) => {
            let span = v.min_separation().map_or(10.0, |d| (4.0 / d).max(10.0));
            v.sup_on_interval(&RealInterval::with_length(start, span)?, plan)?.1
        }
    };
    if sup_v > VANISHING * scale {
        return Ok(TailVerdict::NoRelation { sup_v, scale });
    }
    match spec.b0 {
        None => Ok(TailVerdict::ExcludedPureExponential {
            sup_v,
            scale,
            relation_residual: relation_residual(spec, coll)?,
        }),
        Some(b0) => {
            let below = RealInterval::new(b0 + x[n - 2] - x1, b0)?;
            let nodes = uniform_nodes(&below, below.length() / 1000.0);
            let worst = nodes[..nodes.len() - 1]
                .iter()
                .map(|&y| mismatch(&spec.f, spec.a, spec.c, y))
                .fold(0.0, f64::max);
            Ok(TailVerdict::ForcesExtension {
                sup_v,
                scale,
                mismatch: worst,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::builtin;

    fn constant(c: Complex64) -> ExpPolynomial {
        ExpPolynomial::constant(c).unwrap()
    }

    fn tail_exact(a: Complex64, shifts: &[f64], p: &ExpPolynomial) -> CollapsedRelation {
        // u_1 = e^{a x_1} p, u_2 = -e^{a x_2} p, remaining zero-free
        let polys = vec![p.scale((a * shifts[0]).exp()).unwrap(), p.scale(-(a * shifts[1]).exp()).unwrap()];
        CollapsedRelation::new(shifts.to_vec(), polys).unwrap()
    }

    #[test]
    fn two_sided_breakpoint_is_zero() {
        let f = builtin("two_sided_exp").unwrap();
        let spec = ExponentialTailSpec::for_function(&f, &SamplingPlan::default()).unwrap();
        let b0 = spec.b0.unwrap();
        assert!(b0.abs() < 1e-8, "{b0}");
    }

    #[test]
    fn pure_exponential_has_no_breakpoint() {
        let f = builtin("full_exp").unwrap();
        let spec = ExponentialTailSpec::for_function(&f, &SamplingPlan::default()).unwrap();
        assert_eq!(spec.b0, None);
    }

    #[test]
    fn pure_exponential_relation_is_the_excluded_case() {
        let f = builtin("full_exp").unwrap();
        let plan = SamplingPlan::default();
        let spec = ExponentialTailSpec::for_function(&f, &plan).unwrap();
        let a = Complex64::new(-1.0, 0.0);
        let coll = tail_exact(a, &[0.0, 1.5], &constant(Complex64::new(1.0, 0.0)));
        let v = exponential_tail_test(&spec, &coll, &plan).unwrap();
        match v {
            TailVerdict::ExcludedPureExponential { relation_residual, .. } => {
                assert!(relation_residual < 1e-12)
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn two_sided_tail_exact_relation_forces_extension() {
        let f = builtin("two_sided_exp").unwrap();
        let plan = SamplingPlan::default();
        let spec = ExponentialTailSpec::for_function(&f, &plan).unwrap();
        let coll = tail_exact(spec.a, &[0.2, 1.0], &constant(Complex64::new(0.0, 2.0)));
        match exponential_tail_test(&spec, &coll, &plan).unwrap() {
            TailVerdict::ForcesExtension { mismatch, .. } => assert!(mismatch > 0.5),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn single_shift_has_no_relation() {
        let f = builtin("two_sided_exp").unwrap();
        let plan = SamplingPlan::default();
        let spec = ExponentialTailSpec::for_function(&f, &plan).unwrap();
        let coll = CollapsedRelation::new(vec![0.4], vec![ExpPolynomial::two_cos()]).unwrap();
        let v = exponential_tail_test(&spec, &coll, &plan).unwrap();
        assert_eq!(v.label(), "no_relation");
    }

    #[test]
    fn verdict_survives_rescaling_and_common_shift() {
        let f = builtin("two_sided_exp").unwrap();
        let plan = SamplingPlan::default();
        let spec = ExponentialTailSpec::for_function(&f, &plan).unwrap();
        let p = ExpPolynomial::trigonometric(&[(Complex64::new(1.0, 0.0), 0.0), (Complex64::new(0.5, 0.0), 1.0)])
            .unwrap();
        let coll = tail_exact(spec.a, &[0.0, 0.7], &p);
        let base = exponential_tail_test(&spec, &coll, &plan).unwrap().label();
        let scaled = spec.scaled(Complex64::new(-3.0, 1.0));
        assert_eq!(exponential_tail_test(&scaled, &coll, &plan).unwrap().label(), base);
        let moved = CollapsedRelation::new(vec![1.0, 1.7], coll.polys().to_vec()).unwrap();
        assert_eq!(exponential_tail_test(&spec, &moved, &plan).unwrap().label(), base);
    }
}
