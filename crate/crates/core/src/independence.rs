//! Dependence relations among time-frequency translates, their collapsed
//! form `sum_i u_i(x) f(x - b_i)`, Gram-matrix independence scores, the
//! determinant matrices `M_n` and witness sets.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::catalog::FunctionSpec;
use crate::error::{Error, Result};
use crate::exppoly::{
    refined_level_set_probed, uniform_nodes, ExpPolynomial, IntervalUnion, RealInterval, SamplingPlan,
};
use crate::quadrature::integrate_doubling;
use crate::rng::item_rng;

/// The translate `M_a T_b f(x) = e^{2 pi i a x} f(x - b)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaborAtom {
    pub a: f64,
    pub b: f64,
}

impl GaborAtom {
    pub fn new(a: f64, b: f64) -> Self {
        Self { a, b }
    }

    pub fn apply(&self, f: &FunctionSpec, x: f64) -> Complex64 {
        Complex64::from_polar(1.0, std::f64::consts::TAU * self.a * x) * f.evaluate(x - self.b)
    }
}

/// A candidate relation `sum c_(a,b) M_a T_b f = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DependenceRelation {
    pub atoms: Vec<GaborAtom>,
    pub coefficients: Vec<Complex64>,
    pub function: FunctionSpec,
}

impl DependenceRelation {
    pub fn new(
        atoms: Vec<GaborAtom>,
        coefficients: Vec<Complex64>,
        function: FunctionSpec,
    ) -> Result<Self> {
        if atoms.is_empty() || atoms.len() != coefficients.len() {
            return Err(Error::InvalidArgument(format!(
                "{} atoms but {} coefficients",
                atoms.len(),
                coefficients.len()
            )));
        }
        if coefficients.iter().any(|c| c.norm() == 0.0) {
            return Err(Error::InvalidArgument("coefficients must be nonzero".into()));
        }
        for (j, p) in atoms.iter().enumerate() {
            if atoms[..j].contains(p) {
                return Err(Error::InvalidArgument(format!("atom {j} repeats ({}, {})", p.a, p.b)));
            }
        }
        Ok(Self {
            atoms,
            coefficients,
            function,
        })
    }
}

/// `sum_i u_i(x) f(x - b_i)` with strictly increasing shifts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollapsedRelation {
    shifts: Vec<f64>,
    polys: Vec<ExpPolynomial>,
}

impl CollapsedRelation {
    pub fn new(shifts: Vec<f64>, polys: Vec<ExpPolynomial>) -> Result<Self> {
        if shifts.is_empty() || shifts.len() != polys.len() {
            return Err(Error::InvalidArgument("need one polynomial per shift".into()));
        }
        if shifts.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument("shifts must increase strictly".into()));
        }
        Ok(Self { shifts, polys })
    }

    pub fn shifts(&self) -> &[f64] {
        &self.shifts
    }

    pub fn polys(&self) -> &[ExpPolynomial] {
        &self.polys
    }

    pub fn len(&self) -> usize {
        self.shifts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shifts.is_empty()
    }

    /// `sum_i u_i(x) f(x - b_i)`.
    pub fn combination(&self, f: &FunctionSpec, x: f64) -> Result<Complex64> {
        let mut acc = Complex64::new(0.0, 0.0);
        for (u, &b) in self.polys.iter().zip(&self.shifts) {
            acc += u.evaluate(x)? * f.evaluate(x - b);
        }
        Ok(acc)
    }

    /// Multiplies every `u_i` by `lambda`.
    pub fn scaled(&self, lambda: Complex64) -> Result<Self> {
        Ok(Self {
            shifts: self.shifts.clone(),
            polys: self.polys.iter().map(|u| u.scale(lambda)).collect::<Result<_>>()?,
        })
    }

    /// Atom list with coefficients, in shift order then term order. Only
    /// trigonometric polynomials correspond to Gabor atoms.
    pub fn expand(&self) -> Result<Vec<(GaborAtom, Complex64)>> {
        let mut out = Vec::new();
        for (u, &b) in self.polys.iter().zip(&self.shifts) {
            if !u.is_trigonometric() {
                return Err(Error::InvalidArgument(
                    "only trigonometric polynomials expand into atoms".into(),
                ));
            }
            out.extend(u.terms().iter().map(|t| (GaborAtom::new(t.freq, b), t.coefficient)));
        }
        Ok(out)
    }
}

/// Groups atoms by translation into `u_b(x) = sum_a c_(a,b) e^{2 pi i a x}`.
pub fn collapse(rel: &DependenceRelation) -> CollapsedRelation {
    let mut groups: BTreeMap<OrderedShift, Vec<(Complex64, f64)>> = BTreeMap::new();
    for (atom, &c) in rel.atoms.iter().zip(&rel.coefficients) {
        groups.entry(OrderedShift(atom.b)).or_default().push((c, atom.a));
    }
    let (shifts, polys) = groups
        .into_iter()
        .map(|(b, pairs)| {
            let u = ExpPolynomial::trigonometric(&pairs).expect("distinct atoms give distinct terms");
            (b.0, u)
        })
        .unzip();
    CollapsedRelation { shifts, polys }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct OrderedShift(f64);

impl Eq for OrderedShift {}

impl PartialOrd for OrderedShift {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OrderedShift {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Grid supremum of `|sum_i u_i(x) f(x - b_i)|` and the scale it is
/// judged against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub value: f64,
    /// `max_i sup |u_i| * sup |f(x - b_i)|` over the same grid.
    pub scale: f64,
}

impl Residual {
    pub fn relative(&self) -> f64 {
        if self.scale > 0.0 {
            self.value / self.scale
        } else {
            self.value
        }
    }

    /// Relation holds numerically on the window.
    pub fn vanishes(&self) -> bool {
        self.value <= 1e-10 * self.scale
    }
}

pub fn residual(
    coll: &CollapsedRelation,
    f: &FunctionSpec,
    plan: &SamplingPlan,
    window: &RealInterval,
) -> Result<Residual> {
    let step = coll
        .polys
        .iter()
        .map(|u| plan.step_for(u))
        .fold(plan.step, f64::min);
    let mut value = 0.0f64;
    let mut sup_u = 0.0f64;
    let mut sup_f = 0.0f64;
    for x in uniform_nodes(window, step) {
        value = value.max(coll.combination(f, x)?.norm());
        for (u, &b) in coll.polys.iter().zip(&coll.shifts) {
            sup_u = sup_u.max(u.evaluate(x)?.norm());
            sup_f = sup_f.max(f.abs(x - b));
        }
    }
    Ok(Residual {
        value,
        scale: sup_u * sup_f,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Independent,
    NumericallyDependent,
    Inconclusive,
}

/// Quadrature and verdict settings for [`gram_matrix_with`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GramOptions {
    pub order: usize,
    pub tolerance: f64,
    pub max_panels: usize,
    /// `sigma_min / sigma_max` above this is independent.
    pub independent_above: f64,
    /// `sigma_min / sigma_max` below this is numerically dependent.
    pub dependent_below: f64,
}

impl Default for GramOptions {
    fn default() -> Self {
        Self {
            order: 16,
            tolerance: 1e-12,
            max_panels: 1 << 14,
            independent_above: 1e-8,
            dependent_below: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndependenceScore {
    pub gram: Vec<Vec<Complex64>>,
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub verdict: Verdict,
    /// The inner products are taken over a finite window that truncates
    /// a function not decaying on it.
    pub windowed: bool,
}

impl IndependenceScore {
    pub fn ratio(&self) -> f64 {
        if self.sigma_max > 0.0 {
            self.sigma_min / self.sigma_max
        } else {
            0.0
        }
    }
}

pub fn gram_matrix(
    f: &FunctionSpec,
    atoms: &[GaborAtom],
    window: &RealInterval,
    order: usize,
) -> Result<IndependenceScore> {
    gram_matrix_with(
        f,
        atoms,
        window,
        &GramOptions {
            order,
            ..GramOptions::default()
        },
    )
}

/// Windowed inner products `<M_{a_j} T_{b_j} f, M_{a_k} T_{b_k} f>` by
/// composite Gauss-Legendre with panel doubling, and the singular-value
/// score of the resulting matrix.
pub fn gram_matrix_with(
    f: &FunctionSpec,
    atoms: &[GaborAtom],
    window: &RealInterval,
    opts: &GramOptions,
) -> Result<IndependenceScore> {
    let n = atoms.len();
    if n == 0 {
        return Err(Error::InvalidArgument("empty atom list".into()));
    }
    if window.length() <= 0.0 {
        return Err(Error::InvalidArgument("window must have positive length".into()));
    }
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|j| (j..n).map(move |k| (j, k))).collect();
    let entries: Vec<Complex64> = pairs
        .par_iter()
        .map(|&(j, k)| {
            let (p, q) = (atoms[j], atoms[k]);
            integrate_doubling(
                window,
                opts.order,
                16,
                opts.max_panels,
                opts.tolerance,
                |z: &Complex64| z.norm(),
                |x| p.apply(f, x) * q.apply(f, x).conj(),
            )
            .map(|(v, _)| v)
        })
        .collect::<Result<_>>()?;
    let mut gram = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    for (&(j, k), &v) in pairs.iter().zip(&entries) {
        gram[j][k] = v;
        gram[k][j] = v.conj();
    }
    for row in gram.iter_mut().enumerate() {
        let (j, row) = row;
        row[j] = Complex64::new(row[j].re, 0.0);
    }
    let m = DMatrix::from_fn(n, n, |j, k| gram[j][k]);
    let sv = m.singular_values();
    let sigma_max = sv.iter().copied().fold(0.0, f64::max);
    let sigma_min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    let ratio = if sigma_max > 0.0 { sigma_min / sigma_max } else { 0.0 };
    let verdict = if ratio > opts.independent_above {
        Verdict::Independent
    } else if ratio < opts.dependent_below {
        Verdict::NumericallyDependent
    } else {
        Verdict::Inconclusive
    };
    let edge = f.abs(window.lo()).max(f.abs(window.hi()));
    let peak = uniform_nodes(window, window.length() / 256.0)
        .into_iter()
        .map(|x| f.abs(x))
        .fold(0.0, f64::max);
    Ok(IndependenceScore {
        gram,
        sigma_min,
        sigma_max,
        verdict,
        windowed: edge > 1e-6 * peak,
    })
}

/// Determinant by permutation expansion; intended for `n <= 4`.
pub fn det_leibniz(m: &[Vec<Complex64>]) -> Complex64 {
    let n = m.len();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut total = Complex64::new(0.0, 0.0);
    permute(&mut perm, 0, 1.0, &mut |p, sign| {
        let prod = (0..n).fold(Complex64::new(sign, 0.0), |acc, i| acc * m[i][p[i]]);
        total += prod;
    });
    total
}

fn permute(p: &mut Vec<usize>, k: usize, sign: f64, visit: &mut impl FnMut(&[usize], f64)) {
    if k == p.len() {
        visit(p, sign);
        return;
    }
    for i in k..p.len() {
        p.swap(k, i);
        permute(p, k + 1, if i == k { sign } else { -sign }, visit);
        p.swap(k, i);
    }
}

/// Determinant by LU factorisation with partial pivoting.
pub fn det_lu(m: &[Vec<Complex64>]) -> Complex64 {
    let n = m.len();
    if n == 0 {
        return Complex64::new(1.0, 0.0);
    }
    DMatrix::from_fn(n, n, |i, j| m[i][j]).lu().determinant()
}

/// The `n x n` matrix `[u_j(x_i) f(x_i - b_j)]`.
pub fn mn_matrix(
    coll: &CollapsedRelation,
    f: &FunctionSpec,
    xs: &[f64],
    n: usize,
) -> Result<Vec<Vec<Complex64>>> {
    if n == 0 || n > coll.len() || xs.len() != n {
        return Err(Error::InvalidArgument(format!(
            "need 1 <= n <= {} and {} points, got n = {n} and {} points",
            coll.len(),
            n,
            xs.len()
        )));
    }
    xs.iter()
        .map(|&x| {
            (0..n)
                .map(|j| Ok(coll.polys[j].evaluate(x)? * f.evaluate(x - coll.shifts[j])))
                .collect()
        })
        .collect()
}

/// `det M_n(x_1, ..., x_n)`: permutation expansion up to `n = 4`, pivoted
/// elimination beyond.
pub fn det_mn(coll: &CollapsedRelation, f: &FunctionSpec, xs: &[f64], n: usize) -> Result<Complex64> {
    let m = mn_matrix(coll, f, xs, n)?;
    Ok(if n <= 4 { det_leibniz(&m) } else { det_lu(&m) })
}

fn log_sum_exp(values: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.collect();
    let top = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return top;
    }
    top + v.iter().map(|&l| (l - top).exp()).sum::<f64>().ln()
}

/// `ln(M sum_i |f(x + b_i)|) - ln|f(x)|`; the level `|u(x)|` must beat.
fn ln_ratio(f: &FunctionSpec, m: f64, shifts: &[f64], x: f64) -> f64 {
    m.ln() + log_sum_exp(shifts.iter().map(|&b| f.ln_abs(x + b))) - f.ln_abs(x)
}

/// `{x in window : |u(x) f(x)| > M sum_{b in B} |f(x + b)|}`.
///
/// The comparison runs on logarithms so it survives underflow of `f`.
/// Cells where the curvature bound on `|u|^2` leaves room for a hidden
/// boundary are refined before bisection.
pub fn witness_set(
    u: &ExpPolynomial,
    m: f64,
    shifts: &[f64],
    f: &FunctionSpec,
    window: &RealInterval,
    plan: &SamplingPlan,
) -> Result<IntervalUnion> {
    if !(m > 0.0) {
        return Err(Error::InvalidArgument(format!("M must be positive, got {m}")));
    }
    if shifts.is_empty() || shifts.iter().any(|&b| !(b > 0.0)) {
        return Err(Error::InvalidArgument("shifts must be a nonempty set of positive reals".into()));
    }
    if window.lo() < 0.0 || window.length() <= 0.0 {
        return Err(Error::InvalidArgument("window must lie in the positive half-line".into()));
    }
    u.check_range(window)?;
    let curv = u.modulus_sq_curvature(window);
    let ln_u = |x: f64| u.evaluate(x).expect("range checked").norm().ln();
    let inside = |x: f64| {
        let lhs = ln_u(x) + f.ln_abs(x);
        lhs > f64::NEG_INFINITY && ln_u(x) > ln_ratio(f, m, shifts, x)
    };
    let suspicious = |x0: f64, x1: f64| {
        let (r0, r1) = (ln_ratio(f, m, shifts, x0), ln_ratio(f, m, shifts, x1));
        if !(r0.is_finite() && r1.is_finite()) {
            return false;
        }
        let (g0, g1) = (u.abs_at(x0).powi(2), u.abs_at(x1).powi(2));
        let slack = curv * (x1 - x0).powi(2) / 8.0;
        let lower = 0.5 * (g0.min(g1) - slack).max(0.0).ln();
        let upper = 0.5 * (g0.max(g1) + slack).ln();
        // the ratio moves a little across a cell as well
        lower < r0.max(r1) + 1e-2 && upper > r0.min(r1) - 1e-2
    };
    // below the finest cell the only feature left is a dip of |u|
    let probe = |x0: f64, x1: f64| Some(argmin_abs(u, x0, x1));
    Ok(refined_level_set_probed(
        window,
        plan.step_for(u),
        plan.refinement_levels,
        inside,
        suspicious,
        probe,
    ))
}

/// Golden-section search for the minimiser of `|u|` on `[x0, x1]`.
fn argmin_abs(u: &ExpPolynomial, x0: f64, x1: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (x0, x1);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (u.abs_at(c), u.abs_at(d));
    for _ in 0..100 {
        if b - a <= 4.0 * f64::EPSILON * b.abs().max(1.0) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = u.abs_at(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = u.abs_at(d);
        }
    }
    0.5 * (a + b)
}

/// One completed stage of the witness induction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessStage {
    pub q: IntervalUnion,
    pub delta: f64,
    /// Bound on `|f(x - b_j)|` over `Q_1 .. Q_n`, all `j`.
    pub c: f64,
    /// Witness constant used to build the stage (absent for the base case).
    pub m: Option<f64>,
    pub tuples_checked: usize,
    /// `min |det M_n| / delta_n` over the sampled tuples.
    pub min_det_ratio: f64,
}

/// Settings for [`sequential_witness_build`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WitnessOptions {
    pub tuples: usize,
    pub seed: u64,
}

impl Default for WitnessOptions {
    fn default() -> Self {
        Self {
            tuples: 1000,
            seed: 0,
        }
    }
}

fn sup_on_set(set: &IntervalUnion, step: f64, g: impl Fn(f64) -> f64) -> f64 {
    let mut pts = set.sample_points(step);
    for i in set.intervals() {
        pts.push(i.lo());
        pts.push(i.hi());
    }
    pts.into_iter().map(g).fold(0.0, f64::max)
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Replays the determinant induction on a collapsed relation.
///
/// Stage 1 keeps the part of the window where `|u_1 f|` exceeds half its
/// grid maximum. Stage `n + 1` takes the witness set for
/// `M = 2 n! U^{n+1} c_n^n / delta_n` with shifts `b_{n+1} - b_i`,
/// restricted to where `|u_{n+1}(y + b_{n+1}) f(y)|` exceeds half its
/// supremum `tau` there, and sets `delta_{n+1} = delta_n tau / 2`.
/// Every completed stage is checked on seeded random tuples.
pub fn sequential_witness_build(
    coll: &CollapsedRelation,
    f: &FunctionSpec,
    window: &RealInterval,
    plan: &SamplingPlan,
    opts: &WitnessOptions,
) -> Result<Vec<WitnessStage>> {
    let b = &coll.shifts;
    let n_total = coll.len();
    let reach = RealInterval::new(window.lo() + b[0], window.hi() + b[n_total - 1])?;
    let mut u_sup = 0.0f64;
    for u in &coll.polys {
        u_sup = u_sup.max(u.sup_on_interval(&reach, plan)?.1);
    }
    let step = plan.step;
    let f_bound = |q: &IntervalUnion| {
        b.iter()
            .map(|&bj| sup_on_set(q, step, |x| f.abs(x - bj)))
            .fold(0.0, f64::max)
    };

    let mut stages: Vec<WitnessStage> = Vec::new();
    for stage in 1..=n_total {
        let u = &coll.polys[stage - 1];
        let bn = b[stage - 1];
        let weight = |y: f64| u.evaluate(y + bn).map(|v| v.norm() * f.abs(y)).unwrap_or(0.0);
        let (e, m) = if stage == 1 {
            let top = uniform_nodes(window, plan.step_for(u))
                .into_iter()
                .map(weight)
                .fold(0.0, f64::max);
            let e = crate::exppoly::level_set(window, plan.step_for(u), |y| weight(y) > 0.5 * top);
            (e, None)
        } else {
            let prev = &stages[stage - 2];
            let n = stage - 1;
            let m = 2.0 * factorial(n) * u_sup.powi(stage as i32) * prev.c.powi(n as i32) / prev.delta;
            let rel: Vec<f64> = b[..n].iter().map(|&bi| bn - bi).collect();
            let shifted = u.shift(bn)?;
            (witness_set(&shifted, m, &rel, f, window, plan)?, Some(m))
        };
        if e.measure() < step {
            return Err(Error::StageEmpty(stage));
        }
        let tau = 0.5 * sup_on_set(&e, step.min(plan.step_for(u)), weight);
        let core = IntervalUnion::from_intervals(
            e.intervals()
                .iter()
                .filter_map(|i| {
                    let s = crate::exppoly::level_set(i, step.min(plan.step_for(u)), |y| weight(y) > tau);
                    (!s.is_empty()).then_some(s)
                })
                .flat_map(|s| s.intervals().to_vec()),
        );
        if core.measure() < step.min(e.measure()) * 1e-3 || tau <= 0.0 {
            return Err(Error::StageEmpty(stage));
        }
        let q = core.translate(bn);
        let delta = match stages.last() {
            None => tau,
            Some(prev) => 0.5 * prev.delta * tau,
        };
        let c = stages.last().map_or(0.0, |p| p.c).max(f_bound(&q)) * (1.0 + 1e-9);
        let mut next = WitnessStage {
            q,
            delta,
            c,
            m,
            tuples_checked: 0,
            min_det_ratio: f64::INFINITY,
        };
        let sets: Vec<&IntervalUnion> = stages.iter().map(|s| &s.q).chain([&next.q]).collect();
        let ratios: Vec<f64> = (0..opts.tuples)
            .into_par_iter()
            .map(|t| {
                let mut rng = item_rng(opts.seed ^ (stage as u64).rotate_left(32), t as u64);
                let xs: Vec<f64> = sets
                    .iter()
                    .map(|s| s.sample_uniform(&mut rng).expect("stage sets have measure"))
                    .collect();
                det_mn(coll, f, &xs, stage).map(|d| d.norm() / delta)
            })
            .collect::<Result<_>>()?;
        next.tuples_checked = ratios.len();
        next.min_det_ratio = ratios.into_iter().fold(f64::INFINITY, f64::min);
        stages.push(next);
    }
    Ok(stages)
}
