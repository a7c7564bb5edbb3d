//! Concrete test functions with closed-form evaluators and declared decay
//! classes, plus empirical decay and quasi-monotonicity classifiers.
//!
//! Every evaluator also has a closed-form `ln |f(x)|`, which the witness
//! and recursion code uses so that ratios such as `f(x) / f(x + b)` stay
//! meaningful long after `f` itself underflows.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exppoly::{uniform_nodes, IntervalUnion, RealInterval, EXPONENT_GUARD};

/// Decay hypotheses a catalog entry can be declared to satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayClass {
    CompactSupport,
    /// `f(x) e^{c x^2} -> 0`
    Gaussian,
    /// `|f(x)| e^{c x log x} -> 0`
    #[serde(rename = "xlogx")]
    XLogX,
    /// `|f(x)| e^{c x} -> 0`
    Superexponential,
    ExponentialTail,
    None,
}

impl DecayClass {
    /// `ln` of the weight the class multiplies `|f|` by.
    fn ln_weight(self, c: f64, x: f64) -> Option<f64> {
        match self {
            DecayClass::Gaussian => Some(c * x * x),
            DecayClass::XLogX => Some(c * x * x.ln()),
            DecayClass::Superexponential => Some(c * x),
            _ => None,
        }
    }
}

/// One piece `p(x) exp(q(x))` of a custom function, active on `[lo, hi)`.
/// Polynomial coefficients are listed from the constant term up.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    #[serde(default)]
    pub lo: Option<f64>,
    #[serde(default)]
    pub hi: Option<f64>,
    pub poly: Vec<Complex64>,
    #[serde(default)]
    pub exponent: Vec<Complex64>,
}

impl Piece {
    fn contains(&self, x: f64) -> bool {
        self.lo.is_none_or(|lo| x >= lo) && self.hi.is_none_or(|hi| x < hi)
    }
}

fn horner(coeffs: &[Complex64], x: f64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * x + c)
}

fn horner_real(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

/// Closed-form shape of a catalog function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Profile {
    /// `e^{-pi x^2}`
    Gaussian,
    /// `p(x) e^{-x^2}`
    PolyGauss { poly: Vec<f64> },
    /// `e^{-|x| log(1 + |x|)}`
    #[serde(rename = "xlogx")]
    XLogX,
    /// `e^{-|x|}`
    TwoSidedExp,
    /// `e^{-x} 1_{x > 0}`
    OneSidedExp,
    /// `e^{-x}` on the whole line
    FullExp,
    /// `exp(-1 / (1 - s^2))` with `s` the affine image of `[lo, hi]` onto `[-1, 1]`
    Bump { lo: f64, hi: f64 },
    /// `p(x) e^{-|x|^{1 + eps}}`
    PolyEps { poly: Vec<f64>, eps: f64 },
    /// Sum of pieces; zero where no piece is active.
    Piecewise { pieces: Vec<Piece> },
}

impl Profile {
    fn value(&self, x: f64) -> Complex64 {
        let real = |v: f64| Complex64::new(v, 0.0);
        match self {
            Profile::Gaussian => real((-std::f64::consts::PI * x * x).exp()),
            Profile::PolyGauss { poly } => real(horner_real(poly, x) * (-x * x).exp()),
            Profile::XLogX => real((-x.abs() * x.abs().ln_1p()).exp()),
            Profile::TwoSidedExp => real((-x.abs()).exp()),
            Profile::OneSidedExp => real(if x > 0.0 { (-x).exp() } else { 0.0 }),
            Profile::FullExp => real((-x).exp()),
            Profile::Bump { .. } => real(self.ln_abs(x).exp()),
            Profile::PolyEps { poly, eps } => {
                real(horner_real(poly, x) * (-x.abs().powf(1.0 + eps)).exp())
            }
            Profile::Piecewise { pieces } => pieces
                .iter()
                .filter(|p| p.contains(x))
                .map(|p| horner(&p.poly, x) * horner(&p.exponent, x).exp())
                .sum(),
        }
    }

    fn ln_abs(&self, x: f64) -> f64 {
        match self {
            Profile::Gaussian => -std::f64::consts::PI * x * x,
            Profile::PolyGauss { poly } => horner_real(poly, x).abs().ln() - x * x,
            Profile::XLogX => -x.abs() * x.abs().ln_1p(),
            Profile::TwoSidedExp => -x.abs(),
            Profile::OneSidedExp => {
                if x > 0.0 {
                    -x
                } else {
                    f64::NEG_INFINITY
                }
            }
            Profile::FullExp => -x,
            Profile::Bump { lo, hi } => {
                let s = (2.0 * x - lo - hi) / (hi - lo);
                if s.abs() < 1.0 {
                    -1.0 / (1.0 - s * s)
                } else {
                    f64::NEG_INFINITY
                }
            }
            Profile::PolyEps { poly, eps } => {
                horner_real(poly, x).abs().ln() - x.abs().powf(1.0 + eps)
            }
            Profile::Piecewise { pieces } => {
                let active: Vec<&Piece> = pieces.iter().filter(|p| p.contains(x)).collect();
                match active.as_slice() {
                    [] => f64::NEG_INFINITY,
                    [p] => horner(&p.poly, x).norm().ln() + horner(&p.exponent, x).re,
                    _ => self.value(x).norm().ln(),
                }
            }
        }
    }
}

/// Exact exponential tail `f(x) = c e^{a x}` for `x > b0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailParams {
    pub a: Complex64,
    pub c: Complex64,
    pub b0: f64,
}

/// A catalog function: evaluator, declared decay class, support hint, and
/// the window used for truncated quadrature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionSpec {
    pub name: String,
    pub profile: Profile,
    pub scale: Complex64,
    pub decay_class: DecayClass,
    /// `None` stands for the whole real line.
    pub support_hint: Option<IntervalUnion>,
    pub window: RealInterval,
    #[serde(default)]
    pub tail: Option<TailParams>,
}

/// Names accepted by [`builtin`].
pub const BUILTIN_NAMES: &[&str] = &[
    "gaussian",
    "poly_gauss",
    "xlogx",
    "two_sided_exp",
    "one_sided_exp",
    "full_exp",
    "bump",
    "polynomial_eps",
];

fn default_window() -> RealInterval {
    RealInterval::new(-40.0, 40.0).expect("valid window")
}

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

impl FunctionSpec {
    fn plain(name: &str, profile: Profile, decay_class: DecayClass) -> Self {
        Self {
            name: name.to_string(),
            profile,
            scale: one(),
            decay_class,
            support_hint: None,
            window: default_window(),
            tail: None,
        }
    }

    /// `p(x) e^{-x^2}`.
    pub fn poly_gauss(poly: Vec<f64>) -> Self {
        Self::plain("poly_gauss", Profile::PolyGauss { poly }, DecayClass::Gaussian)
    }

    /// `p(x) e^{-|x|^{1+eps}}`.
    pub fn polynomial_eps(poly: Vec<f64>, eps: f64) -> Result<Self> {
        if !(eps > 0.0) {
            return Err(Error::InvalidArgument(format!("eps must be positive, got {eps}")));
        }
        Ok(Self::plain(
            "polynomial_eps",
            Profile::PolyEps { poly, eps },
            DecayClass::XLogX,
        ))
    }

    /// Smooth bump supported on `[lo, hi]`.
    pub fn bump(lo: f64, hi: f64) -> Result<Self> {
        let support = RealInterval::new(lo, hi)?;
        if support.length() <= 0.0 {
            return Err(Error::InvalidArgument("bump support must have positive length".into()));
        }
        let mut f = Self::plain("bump", Profile::Bump { lo, hi }, DecayClass::CompactSupport);
        f.support_hint = Some(IntervalUnion::from_interval(support));
        Ok(f)
    }

    /// Piecewise `p(x) exp(q(x))` function, validated finite on `window`.
    pub fn piecewise(
        name: &str,
        pieces: Vec<Piece>,
        decay_class: DecayClass,
        window: RealInterval,
    ) -> Result<Self> {
        let f = Self {
            window,
            ..Self::plain(name, Profile::Piecewise { pieces }, decay_class)
        };
        f.validate()?;
        Ok(f)
    }

    /// `lambda * f`.
    pub fn scaled(&self, lambda: Complex64) -> Self {
        Self {
            scale: self.scale * lambda,
            tail: self.tail.map(|t| TailParams { c: t.c * lambda, ..t }),
            ..self.clone()
        }
    }

    pub fn with_window(&self, window: RealInterval) -> Self {
        Self {
            window,
            ..self.clone()
        }
    }

    pub fn evaluate(&self, x: f64) -> Complex64 {
        self.scale * self.profile.value(x)
    }

    pub fn abs(&self, x: f64) -> f64 {
        self.evaluate(x).norm()
    }

    /// `ln |f(x)|`, `-inf` where `f` vanishes.
    pub fn ln_abs(&self, x: f64) -> f64 {
        self.scale.norm().ln() + self.profile.ln_abs(x)
    }

    /// Checks the evaluator is finite on a grid over the window.
    pub fn validate(&self) -> Result<()> {
        for x in uniform_nodes(&self.window, 1e-2) {
            let v = self.evaluate(x);
            let ln = self.ln_abs(x);
            if !(v.re.is_finite() && v.im.is_finite()) || ln > EXPONENT_GUARD {
                return Err(Error::InvalidArgument(format!(
                    "`{}` is not finite at x = {x}",
                    self.name
                )));
            }
        }
        Ok(())
    }
}

/// Looks up a catalog entry by name.
pub fn builtin(name: &str) -> Result<FunctionSpec> {
    let f = match name {
        "gaussian" => FunctionSpec::plain(name, Profile::Gaussian, DecayClass::Gaussian),
        "poly_gauss" => FunctionSpec::poly_gauss(vec![1.0, 1.0]),
        "xlogx" => FunctionSpec::plain(name, Profile::XLogX, DecayClass::XLogX),
        "two_sided_exp" => FunctionSpec {
            tail: Some(TailParams {
                a: Complex64::new(-1.0, 0.0),
                c: one(),
                b0: 0.0,
            }),
            ..FunctionSpec::plain(name, Profile::TwoSidedExp, DecayClass::ExponentialTail)
        },
        "one_sided_exp" => FunctionSpec {
            tail: Some(TailParams {
                a: Complex64::new(-1.0, 0.0),
                c: one(),
                b0: 0.0,
            }),
            support_hint: Some(IntervalUnion::from_interval(
                RealInterval::new(0.0, 40.0).expect("valid"),
            )),
            ..FunctionSpec::plain(name, Profile::OneSidedExp, DecayClass::ExponentialTail)
        },
        "full_exp" => FunctionSpec {
            window: RealInterval::new(0.0, 40.0).expect("valid"),
            ..FunctionSpec::plain(name, Profile::FullExp, DecayClass::None)
        },
        "bump" => FunctionSpec::bump(2.0, 3.0)?,
        "polynomial_eps" => FunctionSpec::polynomial_eps(vec![0.0, 0.0, 1.0], 1.0)?,
        other => return Err(Error::UnknownFunction(other.to_string())),
    };
    Ok(f)
}

/// Per-class decay verification outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub class: DecayClass,
    pub x_max: f64,
    pub c_values: Vec<f64>,
    /// `max |f(x)| w_c(x)` over `[x_max/2, x_max]`, one per `c`.
    pub maxima: Vec<f64>,
    /// Per `c`: maxima over the four consecutive quarter windows.
    pub window_maxima: Vec<Vec<f64>>,
    pub verdicts: Vec<bool>,
    pub verdict: bool,
}

/// Checks the tail of `f` against the decay weight of `class` for each `c`.
///
/// The weighted tail `|f(x)| w_c(x)` is sampled on `[x_max/2, x_max]`
/// (never below `x = 2`) in four consecutive quarter windows; the verdict
/// for `c` is that the quarter-window maxima strictly decrease.
pub fn verify_decay(
    f: &FunctionSpec,
    class: DecayClass,
    c_values: &[f64],
    x_max: f64,
) -> Result<DecayReport> {
    if c_values.iter().any(|&c| !(c > 0.0)) {
        return Err(Error::InvalidArgument("decay constants must be positive".into()));
    }
    let lo = (0.5 * x_max).max(2.0);
    if !(x_max > lo) {
        return Err(Error::InvalidArgument(format!("x_max = {x_max} leaves no tail above 2")));
    }
    let quarter = (x_max - lo) / 4.0;
    let mut report = DecayReport {
        class,
        x_max,
        c_values: c_values.to_vec(),
        maxima: Vec::new(),
        window_maxima: Vec::new(),
        verdicts: Vec::new(),
        verdict: true,
    };
    for &c in c_values {
        let mut per_window = Vec::with_capacity(4);
        for q in 0..4 {
            let w = RealInterval::new(lo + q as f64 * quarter, lo + (q + 1) as f64 * quarter)?;
            let mut best = f64::NEG_INFINITY;
            for x in uniform_nodes(&w, w.length() / 400.0) {
                let ln = match class {
                    DecayClass::CompactSupport => f.ln_abs(x),
                    _ => match class.ln_weight(c, x) {
                        Some(lw) => f.ln_abs(x) + lw,
                        None => {
                            return Err(Error::InvalidArgument(format!(
                                "class {class:?} carries no decay claim"
                            )))
                        }
                    },
                };
                best = best.max(ln);
            }
            if best > EXPONENT_GUARD {
                return Err(Error::Overflow { exponent: best });
            }
            per_window.push(best.exp());
        }
        let ok = if class == DecayClass::CompactSupport {
            per_window.iter().all(|&v| v == 0.0)
        } else {
            per_window.windows(2).all(|w| w[1] < w[0])
        };
        report.maxima.push(per_window.iter().copied().fold(0.0, f64::max));
        report.window_maxima.push(per_window);
        report.verdicts.push(ok);
        report.verdict &= ok;
    }
    Ok(report)
}

/// Estimates of `C(b) = sup_x |f(x+b)| / |f(x)|` on a grid of `x > 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuasiMonotoneReport {
    pub b_values: Vec<f64>,
    pub c_estimates: Vec<f64>,
    /// Grid points where `f` vanished (the strict inequality cannot hold there).
    pub zero_points: Vec<f64>,
    pub verdict: bool,
}

/// Relative change allowed in `C(b)` when the grid is refined.
const QUASI_MONOTONE_STABILITY: f64 = 1e-3;

fn ratio_sup(f: &FunctionSpec, b: f64, grid: &[f64], zeros: &mut Vec<f64>) -> f64 {
    let mut sup = 0.0f64;
    for &x in grid {
        let lx = f.ln_abs(x);
        let lxb = f.ln_abs(x + b);
        if lx == f64::NEG_INFINITY {
            if !zeros.contains(&x) {
                zeros.push(x);
            }
            if lxb > f64::NEG_INFINITY {
                sup = f64::INFINITY;
            }
            continue;
        }
        sup = sup.max((lxb - lx).exp());
    }
    sup
}

/// Scans the quasi-monotonicity constants `C(b)` on `x_grid` and on the
/// grid refined with midpoints. The verdict holds when every estimate is
/// positive, finite, stable under refinement, and `f` never vanished on the
/// grid.
pub fn quasi_monotone_scan(
    f: &FunctionSpec,
    b_values: &[f64],
    x_grid: &[f64],
) -> Result<QuasiMonotoneReport> {
    if b_values.iter().any(|&b| !(b > 0.0)) {
        return Err(Error::InvalidArgument("shifts must be positive".into()));
    }
    if x_grid.is_empty() {
        return Err(Error::InvalidArgument("empty grid".into()));
    }
    let mut fine: Vec<f64> = x_grid.to_vec();
    fine.extend(x_grid.windows(2).map(|w| 0.5 * (w[0] + w[1])));
    fine.sort_by(f64::total_cmp);

    let mut zeros = Vec::new();
    let mut c_estimates = Vec::with_capacity(b_values.len());
    let mut verdict = true;
    for &b in b_values {
        let coarse = ratio_sup(f, b, x_grid, &mut zeros);
        let refined = ratio_sup(f, b, &fine, &mut zeros);
        let stable = coarse.is_finite()
            && refined.is_finite()
            && (refined - coarse).abs() <= QUASI_MONOTONE_STABILITY * refined.max(f64::MIN_POSITIVE);
        verdict &= stable && refined > 0.0;
        c_estimates.push(refined);
    }
    zeros.sort_by(f64::total_cmp);
    verdict &= zeros.is_empty();
    Ok(QuasiMonotoneReport {
        b_values: b_values.to_vec(),
        c_estimates,
        zero_points: zeros,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_is_one_at_origin() {
        assert_eq!(builtin("gaussian").unwrap().evaluate(0.0), one());
    }

    #[test]
    fn two_sided_exp_is_symmetric() {
        let f = builtin("two_sided_exp").unwrap();
        let e = (-3.0f64).exp();
        assert!((f.abs(3.0) - e).abs() < 1e-16);
        assert_eq!(f.evaluate(3.0), f.evaluate(-3.0));
    }

    #[test]
    fn polynomial_eps_matches_formula() {
        let f = FunctionSpec::polynomial_eps(vec![0.0, 0.0, 1.0], 1.0).unwrap();
        assert!((f.abs(2.0) - 4.0 * (-4.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn unknown_name_is_an_error() {
        assert!(matches!(builtin("sinc"), Err(Error::UnknownFunction(_))));
    }

    #[test]
    fn declared_classes() {
        let class = |n: &str| builtin(n).unwrap().decay_class;
        assert_eq!(class("gaussian"), DecayClass::Gaussian);
        assert_eq!(class("xlogx"), DecayClass::XLogX);
        assert_eq!(class("two_sided_exp"), DecayClass::ExponentialTail);
        assert_eq!(class("full_exp"), DecayClass::None);
        assert_eq!(class("bump"), DecayClass::CompactSupport);
    }

    #[test]
    fn ln_abs_agrees_with_evaluate() {
        for name in BUILTIN_NAMES {
            let f = builtin(name).unwrap();
            for x in [-3.3, -0.7, 0.4, 2.5, 2.9, 6.1] {
                let v = f.abs(x);
                if v > 1e-300 {
                    assert!((f.ln_abs(x) - v.ln()).abs() < 1e-12, "{name} at {x}");
                } else {
                    assert!(f.ln_abs(x) < -690.0, "{name} at {x}");
                }
            }
        }
    }

    #[test]
    fn gaussian_decay_verified() {
        let r = verify_decay(&builtin("gaussian").unwrap(), DecayClass::Gaussian, &[1.0], 20.0).unwrap();
        assert!(r.verdict);
    }

    #[test]
    fn full_exp_is_not_superexponential() {
        let r = verify_decay(&builtin("full_exp").unwrap(), DecayClass::Superexponential, &[2.0], 20.0)
            .unwrap();
        assert!(!r.verdict);
    }

    #[test]
    fn xlogx_decay_verified_with_maxima() {
        let f = builtin("xlogx").unwrap();
        let r = verify_decay(&f, DecayClass::XLogX, &[0.1, 1.0], 20.0).unwrap();
        assert!(r.verdict);
        // grid oracle: the weighted tail is largest at the left end x = 10
        for (k, &c) in [0.1, 1.0].iter().enumerate() {
            let expected = (-10.0 * 11f64.ln() + c * 10.0 * 10f64.ln()).exp();
            assert!((r.maxima[k] - expected).abs() < 1e-12 * expected);
        }
    }

    #[test]
    fn decay_rejects_classless_claim() {
        let f = builtin("full_exp").unwrap();
        assert!(verify_decay(&f, DecayClass::None, &[1.0], 20.0).is_err());
    }

    #[test]
    fn one_sided_exp_ratio_is_exact() {
        let f = builtin("one_sided_exp").unwrap();
        let grid = uniform_nodes(&RealInterval::new(0.01, 10.0).unwrap(), 0.01);
        let r = quasi_monotone_scan(&f, &[1.0], &grid).unwrap();
        assert!(r.verdict);
        assert!((r.c_estimates[0] - (-1.0f64).exp()).abs() < 1e-14);
    }

    #[test]
    fn gaussian_ratio_peaks_at_grid_start() {
        let f = builtin("gaussian").unwrap();
        let grid = uniform_nodes(&RealInterval::new(0.0, 10.0).unwrap(), 0.01);
        let r = quasi_monotone_scan(&f, &[1.0], &grid).unwrap();
        assert!(r.verdict);
        // calculus oracle: ratio exp(-pi(2x + 1)) is decreasing, so the sup is at x = 0
        assert!((r.c_estimates[0] - (-std::f64::consts::PI).exp()).abs() < 1e-15);
    }

    #[test]
    fn bump_is_not_quasi_monotone() {
        let f = builtin("bump").unwrap();
        let grid = uniform_nodes(&RealInterval::new(0.0, 10.0).unwrap(), 0.01);
        let r = quasi_monotone_scan(&f, &[1.5], &grid).unwrap();
        assert!(!r.verdict);
        assert!(!r.zero_points.is_empty());
    }

    #[test]
    fn piecewise_custom_function() {
        let pieces = vec![Piece {
            lo: Some(0.0),
            hi: None,
            poly: vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
            exponent: vec![Complex64::new(0.0, 0.0), Complex64::new(-1.0, 0.0)],
        }];
        let w = RealInterval::new(-5.0, 5.0).unwrap();
        let f = FunctionSpec::piecewise("x_exp", pieces, DecayClass::ExponentialTail, w).unwrap();
        assert!((f.abs(2.0) - 2.0 * (-2.0f64).exp()).abs() < 1e-15);
        assert_eq!(f.abs(-1.0), 0.0);
        assert!((f.ln_abs(2.0) - (2f64.ln() - 2.0)).abs() < 1e-15);
    }

    #[test]
    fn piecewise_rejects_overflowing_piece() {
        let pieces = vec![Piece {
            lo: None,
            hi: None,
            poly: vec![Complex64::new(1.0, 0.0)],
            exponent: vec![Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
        }];
        let w = RealInterval::new(-40.0, 40.0).unwrap();
        assert!(FunctionSpec::piecewise("blowup", pieces, DecayClass::None, w).is_err());
    }
}
