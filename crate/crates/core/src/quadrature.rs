//! Gauss–Legendre quadrature: fixed rules, composite panels with doubling,
//! and adaptive bisection for integrable singularities.

use std::f64::consts::PI;
use std::ops::{Add, Mul};

use crate::error::{Error, Result};
use crate::exppoly::RealInterval;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            // Newton iteration on P_n from the Chebyshev-like initial guess.
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Integral of `f` over `[a, b]`.
    pub fn integrate<T>(&self, a: f64, b: f64, f: impl Fn(f64) -> T) -> T
    where
        T: Add<Output = T> + Mul<f64, Output = T> + Default,
    {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = T::default();
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc = acc + f(mid + half * x) * (w * half);
        }
        acc
    }

    /// Composite rule over `panels` equal panels.
    pub fn composite<T>(&self, interval: &RealInterval, panels: usize, f: &impl Fn(f64) -> T) -> T
    where
        T: Add<Output = T> + Mul<f64, Output = T> + Default,
    {
        let h = interval.length() / panels as f64;
        let mut acc = T::default();
        for p in 0..panels {
            let a = interval.lo() + p as f64 * h;
            acc = acc + self.integrate(a, a + h, f);
        }
        acc
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Composite integration with panel doubling until successive values agree
/// to `tol` (relative to the larger of 1 and the value magnitude as measured
/// by `norm`). Returns the final estimate and the panel count used.
pub fn integrate_doubling<T>(
    interval: &RealInterval,
    order: usize,
    initial_panels: usize,
    max_panels: usize,
    tol: f64,
    norm: impl Fn(&T) -> f64,
    f: impl Fn(f64) -> T,
) -> Result<(T, usize)>
where
    T: Add<Output = T> + Mul<f64, Output = T> + Default + Clone + std::ops::Sub<Output = T>,
{
    let rule = GaussLegendre::new(order);
    let mut panels = initial_panels.max(1);
    let mut prev = rule.composite(interval, panels, &f);
    let mut change = f64::INFINITY;
    while panels < max_panels {
        panels *= 2;
        let next = rule.composite(interval, panels, &f);
        change = norm(&(next.clone() - prev.clone()));
        let scale = norm(&next).max(1.0);
        prev = next;
        if change <= tol * scale {
            return Ok((prev, panels));
        }
    }
    Err(Error::QuadratureNonConvergence { change })
}

/// Adaptive Gauss–Legendre: a panel is accepted when the rule on the panel
/// agrees with the sum over its two halves to within the local tolerance.
/// A non-finite integrand value is an error.
pub fn integrate_adaptive(
    interval: &RealInterval,
    tol: f64,
    max_depth: u32,
    f: impl Fn(f64) -> f64,
) -> Result<f64> {
    let rule = GaussLegendre::new(10);
    let mut total = 0.0;
    let mut worst = 0.0f64;
    let whole = rule.integrate(interval.lo(), interval.hi(), &f);
    let mut stack = vec![(interval.lo(), interval.hi(), whole, 0u32)];
    while let Some((a, b, est, depth)) = stack.pop() {
        let m = 0.5 * (a + b);
        let left = rule.integrate(a, m, &f);
        let right = rule.integrate(m, b, &f);
        if !(left.is_finite() && right.is_finite()) {
            return Err(Error::QuadratureNonConvergence { change: f64::NAN });
        }
        let refined = left + right;
        let err = (refined - est).abs();
        let local_tol = tol * (b - a) / interval.length();
        // below this the halves disagree only by rounding
        let noise = 64.0 * f64::EPSILON * (left.abs() + right.abs());
        if err <= local_tol.max(noise) || depth >= max_depth {
            if depth >= max_depth {
                worst = worst.max(err);
            }
            total += refined;
        } else {
            stack.push((a, m, left, depth + 1));
            stack.push((m, b, right, depth + 1));
        }
    }
    if worst > 100.0 * tol {
        return Err(Error::QuadratureNonConvergence { change: worst });
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_is_exact_for_polynomials() {
        let rule = GaussLegendre::new(5);
        // exact up to degree 9
        let v: f64 = rule.integrate(0.0, 2.0, |x| x.powi(9));
        assert!((v - 2f64.powi(10) / 10.0).abs() < 1e-11);
    }

    #[test]
    fn weights_sum_to_two() {
        for n in [1, 2, 7, 16, 33] {
            let rule = GaussLegendre::new(n);
            let s: f64 = rule.weights.iter().sum();
            assert!((s - 2.0).abs() < 1e-13, "n = {n}");
        }
    }

    #[test]
    fn doubling_integrates_gaussian() {
        let i = RealInterval::new(-40.0, 40.0).unwrap();
        let (v, _) = integrate_doubling(&i, 16, 16, 1 << 12, 1e-14, |x: &f64| x.abs(), |x| {
            (-2.0 * PI * x * x).exp()
        })
        .unwrap();
        assert!((v - 0.5f64.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn adaptive_handles_log_singularity() {
        // ∫_0^1 -ln x dx = 1
        let i = RealInterval::new(0.0, 1.0).unwrap();
        let v = integrate_adaptive(&i, 1e-10, 60, |x| -x.ln()).unwrap();
        assert!((v - 1.0).abs() < 1e-8);
    }
}
