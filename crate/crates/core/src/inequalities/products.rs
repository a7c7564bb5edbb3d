use std::collections::HashMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exppoly::{
    refined_level_set, uniform_nodes, ExpPolynomial, IntervalUnion, RealInterval, SamplingPlan,
};
use crate::quadrature::integrate_adaptive;

/// Largest `n^k` the multi-index routines will enumerate.
pub const ENUMERATION_CAP: u128 = 100_000;

/// Layer-cake truncation level: `t` below `e^{-LAYER_DEPTH}` is covered by
/// the fitted tail.
const LAYER_DEPTH: f64 = 9.0;

/// `int_I log_-|u(x + b)| dx` computed two ways.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogMinusIntegral {
    /// `int_0^inf |E_b(e^{-s})| ds`, with a power-law tail past the truncation.
    pub layer_cake: f64,
    /// Adaptive quadrature of `log_-|u(x + b)|`.
    pub direct: f64,
}

impl LogMinusIntegral {
    pub fn value(&self) -> f64 {
        self.layer_cake
    }

    pub fn relative_gap(&self) -> f64 {
        (self.layer_cake - self.direct).abs() / self.direct.abs().max(1e-8)
    }

    pub fn agrees(&self) -> bool {
        self.relative_gap() <= 1e-4
    }
}

fn log_minus(v: f64) -> f64 {
    if v >= 1.0 {
        0.0
    } else {
        -v.ln()
    }
}

/// Adaptive quadrature of `log_-|v|`; a non-finite value at a node gets
/// one retry with the panel layout jittered.
fn direct_log_minus(v: &ExpPolynomial, interval: &RealInterval) -> Result<f64> {
    let g = |x: f64| log_minus(v.evaluate(x).map(|z| z.norm()).unwrap_or(f64::NAN));
    let tol = 1e-10 * interval.length().max(1.0);
    match integrate_adaptive(interval, tol, 32, g) {
        Ok(val) => Ok(val),
        Err(_) => {
            let cut = interval.lo() + interval.length() * 0.5 * (1.0 + 1e-3 * 0.618_033_988_749_895);
            let left = RealInterval::new(interval.lo(), cut)?;
            let right = RealInterval::new(cut, interval.hi())?;
            Ok(integrate_adaptive(&left, tol, 32, g)? + integrate_adaptive(&right, tol, 32, g)?)
        }
    }
}

/// `int_I log_-|u(x + b)| dx` via the layer-cake identity
/// `int_0^1 |E_b(t)| dt / t`, cross-checked by direct adaptive quadrature.
pub fn log_minus_integral(
    u: &ExpPolynomial,
    b: f64,
    interval: &RealInterval,
    plan: &SamplingPlan,
) -> Result<LogMinusIntegral> {
    let v = u.shift(b)?;
    let fine = SamplingPlan {
        refinement_levels: plan.refinement_levels.max(10),
        ..*plan
    };
    let layer = |s: f64| -> f64 {
        v.sublevel_set(interval, (-s).exp(), &fine)
            .map(|e| e.measure())
            .unwrap_or(f64::NAN)
    };
    let body = integrate_adaptive(
        &RealInterval::new(0.0, LAYER_DEPTH)?,
        1e-9 * interval.length(),
        40,
        layer,
    )?;
    let (a, z) = (layer(LAYER_DEPTH - 1.0), layer(LAYER_DEPTH));
    let tail = if z > 0.0 && a > z {
        z / (a / z).ln()
    } else {
        0.0
    };
    Ok(LogMinusIntegral {
        layer_cake: body + tail,
        direct: direct_log_minus(&v, interval)?,
    })
}

fn normalized(u: &ExpPolynomial) -> Result<ExpPolynomial> {
    if !u.is_trigonometric() {
        return Err(Error::InvalidArgument("needs a trigonometric polynomial".into()));
    }
    let bound: f64 = u.terms().iter().map(|t| t.coefficient.norm()).sum();
    u.scale(Complex64::new(1.0 / bound, 0.0))
}

/// One run of the single-product lemma.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProdLemmaTrial {
    pub k: usize,
    pub m: usize,
    pub interval: RealInterval,
    /// `C = max_b int_I log_-|u~(x + b)| / (m - 1)` for the normalised `u~`.
    pub c_fit: f64,
    /// Chebyshev level `t = 3 C (m - 1) k / |I|`.
    pub t: f64,
    pub e: IntervalUnion,
    pub measure: f64,
    /// `-log(inf_E prod |u~(x + b_i)|) / k`.
    pub eta_fit: f64,
    /// `3 C (m - 1) / |I|`, the constant the argument guarantees.
    pub eta_proof: f64,
    pub holds: bool,
}

/// Replays the Chebyshev argument: normalise `u` so `||u~|| <= 1`, fit `C`
/// from the `log_-` integrals, remove `E(t)` and measure what remains.
pub fn verify_prod_lemma(
    u: &ExpPolynomial,
    interval: &RealInterval,
    shifts: &[f64],
    plan: &SamplingPlan,
) -> Result<ProdLemmaTrial> {
    if shifts.is_empty() {
        return Err(Error::InvalidArgument("need at least one shift".into()));
    }
    let un = normalized(u)?;
    let k = shifts.len();
    let m = un.order();
    let len = interval.length();
    let mut c_fit = 0.0f64;
    if m > 1 {
        for &b in shifts {
            c_fit = c_fit.max(direct_log_minus(&un.shift(b)?, interval)? / (m as f64 - 1.0));
        }
    }
    let t = 3.0 * c_fit * (m as f64 - 1.0) * k as f64 / len;
    let factors: Vec<ExpPolynomial> = shifts.iter().map(|&b| un.shift(b)).collect::<Result<_>>()?;
    let g = |p: &ExpPolynomial, x: f64| p.evaluate(x).expect("trigonometric").norm_sqr();
    let s = |x: f64| factors.iter().map(|p| -0.5 * g(p, x).ln()).sum::<f64>();
    let curv = un.modulus_sq_curvature(interval);
    let inside = |x: f64| s(x) <= t;
    let suspicious = |x0: f64, x1: f64| {
        let slack = curv * (x1 - x0).powi(2) / 8.0;
        let (mut upper, mut lower) = (0.0, 0.0);
        for p in &factors {
            let (g0, g1) = (g(p, x0), g(p, x1));
            upper += -0.5 * (g0.min(g1) - slack).max(1e-300).ln();
            lower += -0.5 * (g0.max(g1) + slack).min(1.0).ln();
        }
        if inside(x0) {
            upper > t
        } else {
            lower <= t
        }
    };
    let e = if m == 1 {
        IntervalUnion::from_interval(*interval)
    } else {
        refined_level_set(interval, plan.step_for(&un), plan.refinement_levels, inside, suspicious)
    };
    let mut pts = e.sample_points(plan.step_for(&un) / 4.0);
    for i in e.intervals() {
        pts.push(i.lo());
        pts.push(i.hi());
    }
    let worst = pts.into_iter().map(s).fold(0.0, f64::max);
    let measure = e.measure();
    Ok(ProdLemmaTrial {
        k,
        m,
        interval: *interval,
        c_fit,
        t,
        e,
        measure,
        eta_fit: worst / k as f64,
        eta_proof: 3.0 * c_fit * (m as f64 - 1.0) / len,
        holds: measure >= 0.5 * len,
    })
}

fn check_cap(n: usize, k: usize) -> Result<()> {
    let terms = (n as u128).checked_pow(k as u32).unwrap_or(u128::MAX);
    if terms > ENUMERATION_CAP {
        return Err(Error::ExplosionGuard {
            terms,
            cap: ENUMERATION_CAP,
        });
    }
    Ok(())
}

/// `sum_alpha prod` evaluated through the composition lattice: the value
/// at a node `alpha` (offset `alpha . b`) only depends on `alpha`.
fn lattice_sum(shifts: &[f64], k: usize, recip: &impl Fn(f64) -> f64) -> f64 {
    let n = shifts.len();
    let mut memo: HashMap<Vec<u16>, f64> = HashMap::new();
    fn rec(
        alpha: &mut Vec<u16>,
        depth: usize,
        k: usize,
        shifts: &[f64],
        recip: &impl Fn(f64) -> f64,
        memo: &mut HashMap<Vec<u16>, f64>,
    ) -> f64 {
        if depth == k {
            return 1.0;
        }
        if let Some(&v) = memo.get(alpha) {
            return v;
        }
        let mut total = 0.0;
        for i in 0..shifts.len() {
            alpha[i] += 1;
            let offset: f64 = alpha.iter().zip(shifts).map(|(&a, &b)| a as f64 * b).sum();
            let r = recip(offset);
            if r != 0.0 {
                total += r * rec(alpha, depth + 1, k, shifts, recip, memo);
            }
            alpha[i] -= 1;
        }
        memo.insert(alpha.clone(), total);
        total
    }
    rec(&mut vec![0; n], 0, k, shifts, recip, &mut memo)
}

/// `sum_{i(1..k)} prod_{j=1}^k |u(x + sum_{l<=j} b_{i(l)})|^{-1}`.
pub fn multi_index_sum(u: &ExpPolynomial, shifts: &[f64], k: usize, x: f64) -> Result<f64> {
    check_cap(shifts.len(), k)?;
    Ok(lattice_sum(shifts, k, &|off| 1.0 / u.evaluate(x + off).map_or(0.0, |v| v.norm())))
}

/// The same sum by walking all `n^k` index sequences.
pub fn multi_index_sum_enumerated(u: &ExpPolynomial, shifts: &[f64], k: usize, x: f64) -> Result<f64> {
    let n = shifts.len();
    check_cap(n, k)?;
    let mut idx = vec![0usize; k];
    let mut total = 0.0;
    loop {
        let mut pos = x;
        let mut prod = 1.0;
        for &i in &idx {
            pos += shifts[i];
            prod /= u.evaluate(pos)?.norm();
        }
        total += prod;
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
            return Ok(total);
        }
    }
}

/// One run of the multi-index lemma.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductLemmaTrial {
    pub n: usize,
    pub k: usize,
    pub interval: RealInterval,
    /// Level above which at most half of `I` is excluded.
    pub threshold: f64,
    pub e: IntervalUnion,
    /// `log(threshold) / (k log k)` (`log(threshold)` when `k = 1`).
    pub eta_fit: f64,
    /// `|{x in I : S(x) > e^{eta_fit k log k}}|`, measured afresh.
    pub excluded_measure: f64,
    /// Largest relative gap between the lattice sum and enumeration on a
    /// subgrid.
    pub enumeration_gap: f64,
}

impl ProductLemmaTrial {
    pub fn holds(&self) -> bool {
        self.excluded_measure <= 0.5 * self.interval.length() * (1.0 + 1e-9)
    }
}

/// Fits `eta` in the multi-index lemma for the normalised `u`: the sum is
/// evaluated on a grid of `I`, the threshold is the smallest grid value
/// whose superlevel set has measure at most `|I| / 2`.
pub fn verify_product_lemma(
    u: &ExpPolynomial,
    shifts: &[f64],
    interval: &RealInterval,
    k: usize,
    plan: &SamplingPlan,
) -> Result<ProductLemmaTrial> {
    let n = shifts.len();
    if n == 0 || k == 0 {
        return Err(Error::InvalidArgument("need n >= 1 and k >= 1".into()));
    }
    check_cap(n, k)?;
    let un = normalized(u)?;
    let len = interval.length();
    let step = plan.step_for(&un);
    let curv = un.modulus_sq_curvature(&RealInterval::new(
        interval.lo(),
        interval.hi() + k as f64 * shifts.iter().fold(0.0f64, |a, &b| a.max(b.abs())),
    )?);
    let g = |y: f64| un.evaluate(y).expect("trigonometric").norm_sqr();
    let sum = |x: f64| lattice_sum(shifts, k, &|off| 1.0 / g(x + off).sqrt());
    let excluded = |t: f64| {
        let keep = refined_level_set(
            interval,
            step,
            plan.refinement_levels,
            |x| sum(x) <= t,
            |x0, x1| {
                let slack = curv * (x1 - x0).powi(2) / 8.0;
                if sum(x0) <= t {
                    let hi = lattice_sum(shifts, k, &|off| {
                        1.0 / (g(x0 + off).min(g(x1 + off)) - slack).max(1e-300).sqrt()
                    });
                    hi > t
                } else {
                    let lo = lattice_sum(shifts, k, &|off| {
                        1.0 / (g(x0 + off).max(g(x1 + off)) + slack).sqrt()
                    });
                    lo <= t
                }
            },
        );
        (len - keep.measure(), keep)
    };

    let nodes = uniform_nodes(interval, step);
    let mut values: Vec<f64> = nodes.iter().map(|&x| sum(x)).collect();
    let mut enumeration_gap = 0.0f64;
    for &x in nodes.iter().step_by(25) {
        let a = sum(x);
        let b = multi_index_sum_enumerated(&un, shifts, k, x)?;
        enumeration_gap = enumeration_gap.max((a - b).abs() / b.abs().max(f64::MIN_POSITIVE));
    }
    values.sort_by(f64::total_cmp);
    let mut idx = values.len() / 2;
    let (threshold, e) = loop {
        let t = values[idx];
        let (ex, keep) = excluded(t);
        if ex <= 0.5 * len || idx + 1 == values.len() {
            break (t, keep);
        }
        idx += 1;
    };
    let scale = if k >= 2 { k as f64 * (k as f64).ln() } else { 1.0 };
    let eta_fit = threshold.ln() / scale;
    let (excluded_measure, _) = excluded((eta_fit * scale).exp());
    Ok(ProductLemmaTrial {
        n,
        k,
        interval: *interval,
        threshold,
        e,
        eta_fit,
        excluded_measure,
        enumeration_gap,
    })
}
