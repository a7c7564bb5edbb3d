use num_complex::Complex64;
use rand::Rng;

use super::params::Params;
use super::{ConfigError, RecordVerdict, ReportRecord, Suite};
use crate::catalog::{builtin, DecayClass, FunctionSpec};
use crate::constructions::{
    exponential_tail_test, gaussian_cascade, lattice_recursion, main_recursion, ExponentialTailSpec,
    Hypothesis, TailBoundSeries, TailVerdict,
};
use crate::error::Error;
use crate::exppoly::{
    beurling_lower_density_scan, support_cover_check, ExpPolynomial, IntervalUnion, RealInterval,
    SamplingPlan,
};
use crate::independence::{gram_matrix, witness_set, CollapsedRelation, GaborAtom, Verdict};
use crate::inequalities::{
    montgomery_vaughan_trial, random_trig_poly, turan_nazarov_trial, verify_prod_lemma,
    verify_product_lemma, CorpusOptions,
};
use crate::rng::item_rng;

/// Decay classes for which the witness set must be nonempty and the
/// recursion hypothesis must fail.
fn covered(class: DecayClass) -> bool {
    matches!(
        class,
        DecayClass::Gaussian | DecayClass::XLogX | DecayClass::CompactSupport
    )
}

fn named_poly(key: &str, name: &str) -> Result<ExpPolynomial, ConfigError> {
    let one = Complex64::new(1.0, 0.0);
    match name {
        "one" => Ok(ExpPolynomial::constant(one).expect("nonzero")),
        "one_minus_exp" => Ok(ExpPolynomial::trigonometric(&[(one, 0.0), (-one, 1.0)]).expect("valid")),
        "two_cos" => Ok(ExpPolynomial::two_cos()),
        other => Err(ConfigError::param(
            key,
            format!("unknown polynomial `{other}`; expected one, one_minus_exp or two_cos"),
        )),
    }
}

fn function(params: &Params, default: &str) -> Result<FunctionSpec, ConfigError> {
    let name = params.string_or("function", default)?;
    builtin(&name).map_err(|e| ConfigError::param("function", e.to_string()))
}

fn hypothesis(params: &Params, default: Hypothesis) -> Result<Hypothesis, ConfigError> {
    match params.opt_string("hypothesis")?.as_deref() {
        None => Ok(default),
        Some("verify") => Ok(Hypothesis::Verify),
        Some("inject") => Ok(Hypothesis::Inject),
        Some(other) => Err(ConfigError::param(
            "hypothesis",
            format!("expected verify or inject, got `{other}`"),
        )),
    }
}

fn nonempty<T>(key: &str, v: Vec<T>) -> Result<Vec<T>, ConfigError> {
    if v.is_empty() {
        Err(ConfigError::param(key, "must not be empty"))
    } else {
        Ok(v)
    }
}

fn plan(params: &Params) -> Result<SamplingPlan, ConfigError> {
    let step = params.positive_or("step", SamplingPlan::default().step)?;
    let levels = params.usize_or("refinement_levels", SamplingPlan::default().refinement_levels as usize)?;
    SamplingPlan::new(step, levels as u32, 0).map_err(|e| ConfigError::param("step", e.to_string()))
}

#[derive(Debug, Clone)]
pub(crate) enum PolySource {
    Named(String, ExpPolynomial),
    Random { max_order: usize },
}

impl PolySource {
    fn parse(params: &Params, default: &str) -> Result<Self, ConfigError> {
        let name = params.string_or("u", default)?;
        if name == "random" {
            let max_order = params.usize_or("max_order", 3)?;
            if !(2..=8).contains(&max_order) {
                return Err(ConfigError::param("max_order", "must lie in 2..=8"));
            }
            Ok(PolySource::Random { max_order })
        } else {
            Ok(PolySource::Named(name.clone(), named_poly("u", &name)?))
        }
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> (String, ExpPolynomial) {
        match self {
            PolySource::Named(name, u) => (name.clone(), u.clone()),
            PolySource::Random { max_order } => {
                let m = rng.gen_range(2..=*max_order);
                (format!("random_order_{m}"), random_trig_poly(rng, m, 0.1))
            }
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct ProdLemmaSettings {
    u: PolySource,
    k_values: Vec<usize>,
    length: f64,
    shift_range: (f64, f64),
}

#[derive(Debug, Clone)]
pub(crate) struct ProductLemmaSettings {
    u: PolySource,
    n: usize,
    k_values: Vec<usize>,
    length: f64,
    shift_range: (f64, f64),
}

#[derive(Debug, Clone)]
pub(crate) struct IndependenceSettings {
    f: FunctionSpec,
    atoms: Option<Vec<GaborAtom>>,
    random_atoms: usize,
    window: RealInterval,
    expect: Option<Verdict>,
    order: usize,
}

#[derive(Debug, Clone)]
pub(crate) struct WitnessSettings {
    f: FunctionSpec,
    window: RealInterval,
    m_range: (f64, f64),
    shift_range: (f64, f64),
    max_shifts: usize,
    max_order: usize,
}

#[derive(Debug, Clone)]
pub(crate) struct CascadeSettings {
    b: Option<f64>,
    k_max: usize,
    norm: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct RecursionSettings {
    f: FunctionSpec,
    u_name: String,
    u: ExpPolynomial,
    shifts: Vec<f64>,
    /// Lattice mode: `shifts = {b, .., n b}` from one `b`.
    lattice: Option<(f64, usize)>,
    m: f64,
    k_max: usize,
    hypothesis: Hypothesis,
}

#[derive(Debug, Clone)]
pub(crate) struct ExpTailSettings {
    f: FunctionSpec,
    max_shifts: usize,
    tail_exact_fraction: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct DensitySettings {
    length: f64,
    pieces: usize,
    width_range: (f64, f64),
    r_values: Vec<f64>,
    shift_range: (f64, f64),
}

#[derive(Debug, Clone)]
pub(crate) enum Settings {
    TuranNazarov(CorpusOptions),
    MontgomeryVaughan(CorpusOptions),
    ProdLemma(ProdLemmaSettings),
    ProductLemma(ProductLemmaSettings),
    Independence(IndependenceSettings),
    Witness(WitnessSettings),
    Cascade(CascadeSettings),
    Lattice(RecursionSettings),
    MainRecursion(RecursionSettings),
    ExpTail(ExpTailSettings),
    Density(DensitySettings),
}

impl Settings {
    pub(crate) fn parse(suite: Suite, p: &Params) -> Result<Self, ConfigError> {
        match suite {
            Suite::TuranNazarov | Suite::MontgomeryVaughan => {
                p.allow_only(&["max_order", "step", "refinement_levels"])?;
                let max_order = p.usize_or("max_order", 5)?;
                if !(1..=8).contains(&max_order) {
                    return Err(ConfigError::param("max_order", "must lie in 1..=8"));
                }
                let opts = CorpusOptions {
                    trials: 0,
                    seed: 0,
                    max_order,
                    plan: plan(p)?,
                };
                Ok(if suite == Suite::TuranNazarov {
                    Settings::TuranNazarov(opts)
                } else {
                    Settings::MontgomeryVaughan(opts)
                })
            }
            Suite::ProdLemma => {
                p.allow_only(&["u", "max_order", "k_values", "length", "shift_range"])?;
                Ok(Settings::ProdLemma(ProdLemmaSettings {
                    u: PolySource::parse(p, "two_cos")?,
                    k_values: nonempty("k_values", p.usize_list_or("k_values", &[5, 10, 20])?)?,
                    length: p.positive_or("length", 1.0)?,
                    shift_range: p.range_or("shift_range", (-5.0, 5.0))?,
                }))
            }
            Suite::ProductLemma => {
                p.allow_only(&["u", "max_order", "n", "k_values", "length", "shift_range"])?;
                let n = p.usize_or("n", 2)?;
                if n == 0 {
                    return Err(ConfigError::param("n", "must be at least 1"));
                }
                let k_values = nonempty("k_values", p.usize_list_or("k_values", &[4, 6, 8])?)?;
                if k_values.contains(&0) {
                    return Err(ConfigError::param("k_values", "entries must be at least 1"));
                }
                Ok(Settings::ProductLemma(ProductLemmaSettings {
                    u: PolySource::parse(p, "two_cos")?,
                    n,
                    k_values,
                    length: p.positive_or("length", 1.0)?,
                    shift_range: p.range_or("shift_range", (0.1, 2.0))?,
                }))
            }
            Suite::Independence => {
                p.allow_only(&["function", "atoms", "random_atoms", "window", "expect", "order"])?;
                let f = function(p, "gaussian")?;
                let atoms = p
                    .pairs("atoms")?
                    .map(|v| nonempty("atoms", v.into_iter().map(|(a, b)| GaborAtom::new(a, b)).collect()))
                    .transpose()?;
                let window = match p.get("window") {
                    None => f.window,
                    Some(_) => {
                        let (lo, hi) = p.range_or("window", (0.0, 1.0))?;
                        RealInterval::new(lo, hi).map_err(|e| ConfigError::param("window", e.to_string()))?
                    }
                };
                let expect = match p.opt_string("expect")?.as_deref() {
                    None => None,
                    Some("independent") => Some(Verdict::Independent),
                    Some("numerically_dependent") | Some("dependent") => Some(Verdict::NumericallyDependent),
                    Some(other) => {
                        return Err(ConfigError::param(
                            "expect",
                            format!("expected independent or dependent, got `{other}`"),
                        ))
                    }
                };
                let random_atoms = p.usize_or("random_atoms", 2)?;
                if atoms.is_none() && random_atoms == 0 {
                    return Err(ConfigError::param("random_atoms", "must be at least 1"));
                }
                Ok(Settings::Independence(IndependenceSettings {
                    f,
                    atoms,
                    random_atoms,
                    window,
                    expect,
                    order: p.usize_or("order", 16)?.max(2),
                }))
            }
            Suite::Witness => {
                p.allow_only(&["function", "window", "m_range", "shift_range", "max_shifts", "max_order"])?;
                let (lo, hi) = p.range_or("window", (0.0, 20.0))?;
                let window = RealInterval::new(lo, hi).map_err(|e| ConfigError::param("window", e.to_string()))?;
                if lo < 0.0 {
                    return Err(ConfigError::param("window", "must lie in the positive half-line"));
                }
                let m_range = p.range_or("m_range", (1.0, 10.0))?;
                let shift_range = p.range_or("shift_range", (1.0, 3.0))?;
                if m_range.0 <= 0.0 || shift_range.0 <= 0.0 {
                    return Err(ConfigError::Invalid("m_range and shift_range must be positive".into()));
                }
                Ok(Settings::Witness(WitnessSettings {
                    f: function(p, "xlogx")?,
                    window,
                    m_range,
                    shift_range,
                    max_shifts: p.usize_or("max_shifts", 3)?.max(1),
                    max_order: p.usize_or("max_order", 3)?.clamp(1, 8),
                }))
            }
            Suite::Cascade => {
                p.allow_only(&["b", "k_max", "norm"])?;
                let b = p.opt_f64("b")?;
                if b.is_some_and(|b| b <= 0.0) {
                    return Err(ConfigError::param("b", "must be positive"));
                }
                let k_max = p.usize_or("k_max", 10)?;
                if k_max == 0 {
                    return Err(ConfigError::param("k_max", "must be at least 1"));
                }
                Ok(Settings::Cascade(CascadeSettings {
                    b,
                    k_max,
                    norm: p.positive_or("norm", 1.0)?,
                }))
            }
            Suite::Lattice => {
                p.allow_only(&["function", "u", "b", "n", "m", "k_max", "hypothesis"])?;
                let b = p.positive_or("b", 1.0)?;
                let n = p.usize_or("n", 2)?;
                if n == 0 {
                    return Err(ConfigError::param("n", "must be at least 1"));
                }
                let u_name = p.string_or("u", "one")?;
                Ok(Settings::Lattice(RecursionSettings {
                    f: function(p, "full_exp")?,
                    u: named_poly("u", &u_name)?,
                    u_name,
                    shifts: (1..=n).map(|j| j as f64 * b).collect(),
                    lattice: Some((b, n)),
                    m: p.positive_or("m", b.exp())?,
                    k_max: p.usize_or("k_max", 10)?,
                    hypothesis: hypothesis(p, Hypothesis::Verify)?,
                }))
            }
            Suite::MainRecursion => {
                p.allow_only(&["function", "u", "shifts", "m", "k_max", "hypothesis"])?;
                let shifts = nonempty("shifts", p.f64_list_or("shifts", &[1.5, 1.5 * 2f64.sqrt()])?)?;
                if shifts.iter().any(|&b| b <= 0.0) {
                    return Err(ConfigError::param("shifts", "must be positive"));
                }
                let u_name = p.string_or("u", "one_minus_exp")?;
                Ok(Settings::MainRecursion(RecursionSettings {
                    f: function(p, "xlogx")?,
                    u: named_poly("u", &u_name)?,
                    u_name,
                    shifts,
                    lattice: None,
                    m: p.positive_or("m", 10.0)?,
                    k_max: p.usize_or("k_max", 20)?,
                    hypothesis: hypothesis(p, Hypothesis::Inject)?,
                }))
            }
            Suite::ExpTail => {
                p.allow_only(&["function", "max_shifts", "tail_exact_fraction"])?;
                let max_shifts = p.usize_or("max_shifts", 3)?;
                if !(2..=6).contains(&max_shifts) {
                    return Err(ConfigError::param("max_shifts", "must lie in 2..=6"));
                }
                let fraction = p.f64_or("tail_exact_fraction", 0.5)?;
                if !(0.0..=1.0).contains(&fraction) {
                    return Err(ConfigError::param("tail_exact_fraction", "must lie in [0, 1]"));
                }
                let f = function(p, "two_sided_exp")?;
                ExponentialTailSpec::for_function(&f, &SamplingPlan::default())
                    .map_err(|e| ConfigError::param("function", e.to_string()))?;
                Ok(Settings::ExpTail(ExpTailSettings {
                    f,
                    max_shifts,
                    tail_exact_fraction: fraction,
                }))
            }
            Suite::Density => {
                p.allow_only(&["length", "pieces", "width_range", "r_values", "shift_range"])?;
                let length = p.positive_or("length", 100.0)?;
                let r_values = nonempty("r_values", p.f64_list_or("r_values", &[1.0, 2.0, 4.0, 8.0, 16.0])?)?;
                if r_values.windows(2).any(|w| w[1] <= w[0]) || r_values[0] <= 0.0 {
                    return Err(ConfigError::param("r_values", "must be positive and increasing"));
                }
                if r_values[r_values.len() - 1] > length {
                    return Err(ConfigError::param("r_values", "must not exceed length"));
                }
                let width_range = p.range_or("width_range", (0.2, 3.0))?;
                let shift_range = p.range_or("shift_range", (0.5, 5.0))?;
                if width_range.0 <= 0.0 || shift_range.0 <= 0.0 {
                    return Err(ConfigError::Invalid("width_range and shift_range must be positive".into()));
                }
                Ok(Settings::Density(DensitySettings {
                    length,
                    pieces: p.usize_or("pieces", 20)?.max(1),
                    width_range,
                    r_values,
                    shift_range,
                }))
            }
        }
    }

    fn suite(&self) -> Suite {
        match self {
            Settings::TuranNazarov(_) => Suite::TuranNazarov,
            Settings::MontgomeryVaughan(_) => Suite::MontgomeryVaughan,
            Settings::ProdLemma(_) => Suite::ProdLemma,
            Settings::ProductLemma(_) => Suite::ProductLemma,
            Settings::Independence(_) => Suite::Independence,
            Settings::Witness(_) => Suite::Witness,
            Settings::Cascade(_) => Suite::Cascade,
            Settings::Lattice(_) => Suite::Lattice,
            Settings::MainRecursion(_) => Suite::MainRecursion,
            Settings::ExpTail(_) => Suite::ExpTail,
            Settings::Density(_) => Suite::Density,
        }
    }

    pub(crate) fn trial(&self, seed: u64, index: usize) -> ReportRecord {
        let mut rec = ReportRecord::new(self.suite(), index);
        let outcome = match self {
            Settings::TuranNazarov(o) => turan(o, seed, index, &mut rec),
            Settings::MontgomeryVaughan(o) => mv(o, seed, index, &mut rec),
            Settings::ProdLemma(s) => prod_lemma(s, seed, index, &mut rec),
            Settings::ProductLemma(s) => product_lemma(s, seed, index, &mut rec),
            Settings::Independence(s) => independence(s, seed, index, &mut rec),
            Settings::Witness(s) => witness(s, seed, index, &mut rec),
            Settings::Cascade(s) => cascade(s, seed, index, &mut rec),
            Settings::Lattice(s) | Settings::MainRecursion(s) => recursion(s, &mut rec),
            Settings::ExpTail(s) => exp_tail(s, seed, index, &mut rec),
            Settings::Density(s) => density(s, seed, index, &mut rec),
        };
        if let Err(e) = outcome {
            rec.verdict = RecordVerdict::Inconclusive;
            rec.label = format!("error: {e}");
        }
        rec
    }

    /// Corpus-level fits, written back into every record.
    pub(crate) fn finish(&self, records: &mut [ReportRecord]) {
        let fit_max = |records: &mut [ReportRecord], src: &str, dst: &str| {
            let v = records
                .iter()
                .filter_map(|r| r.measured.get(src).copied())
                .fold(0.0, f64::max);
            for r in records.iter_mut() {
                r.fit(dst, v);
            }
        };
        match self {
            Settings::TuranNazarov(_) => fit_max(records, "a_min", "a"),
            Settings::MontgomeryVaughan(_) => fit_max(records, "band_position", "worst_band_position"),
            _ => {}
        }
    }
}

type Outcome = Result<(), Error>;

fn turan(o: &CorpusOptions, seed: u64, index: usize, rec: &mut ReportRecord) -> Outcome {
    let t = turan_nazarov_trial(seed, index, o)?;
    rec.param("m", t.m);
    rec.param("interval_length", t.interval_length);
    rec.param("set_measure", t.set_measure);
    rec.measure("set_fraction", t.set_measure / t.interval_length);
    rec.measure("sup_interval", t.sup_interval.1);
    rec.measure("sup_set", t.sup_set.0);
    rec.measure("ratio", t.ratio);
    rec.measure("growth", t.growth);
    if let Some(a) = t.a_min {
        rec.measure("a_min", a);
    }
    rec.set_verdict(t.holds, if t.holds { "holds" } else { "violated" });
    Ok(())
}

fn mv(o: &CorpusOptions, seed: u64, index: usize, rec: &mut ReportRecord) -> Outcome {
    let t = montgomery_vaughan_trial(seed, index, o)?;
    rec.param("k", t.k);
    rec.param("a", t.a);
    rec.param("delta", t.delta);
    rec.measure("energy", t.energy);
    rec.measure("integral", t.integral);
    rec.measure("shifted_integral", t.shifted_integral);
    rec.measure("lower", t.lower);
    rec.measure("upper", t.upper);
    rec.measure("shift_error", t.shift_error);
    let pos = (t.integral - t.lower) / (t.upper - t.lower);
    rec.measure("band_position", (2.0 * pos - 1.0).abs());
    let pass = t.holds() && t.shift_error <= 1e-10;
    let label = match (t.holds_lower, t.holds_upper) {
        (true, true) if pass => "holds",
        (true, true) => "shift_identity_broken",
        (false, _) => "lower_violated",
        (_, false) => "upper_violated",
    };
    rec.set_verdict(pass, label);
    Ok(())
}

fn prod_lemma(s: &ProdLemmaSettings, seed: u64, index: usize, rec: &mut ReportRecord) -> Outcome {
    let mut rng = item_rng(seed, index as u64);
    let k = s.k_values[index % s.k_values.len()];
    let (name, u) = s.u.draw(&mut rng);
    let lo = rng.gen_range(-5.0..5.0);
    let interval = RealInterval::with_length(lo, s.length)?;
    let shifts: Vec<f64> = (0..k).map(|_| rng.gen_range(s.shift_range.0..s.shift_range.1)).collect();
    let plan = SamplingPlan::default();
    let t = verify_prod_lemma(&u, &interval, &shifts, &plan)?;
    rec.param("u", name);
    rec.param("k", k);
    rec.param("interval", [interval.lo(), interval.hi()]);
    rec.param("shifts", &shifts);
    rec.measure("m", t.m as f64);
    rec.measure("measure", t.measure);
    rec.measure("measure_fraction", t.measure / s.length);
    rec.fit("c", t.c_fit);
    rec.fit("t", t.t);
    rec.fit("eta", t.eta_fit);
    rec.fit("eta_proof", t.eta_proof);
    // |{x in I : |u~(x)| < t}| against ln t
    let norm: f64 = u.terms().iter().map(|t| t.coefficient.norm()).sum();
    let un = u.scale(Complex64::new(1.0 / norm, 0.0))?;
    let mut pts = Vec::new();
    for j in 0..=12 {
        let level = (-(j as f64) * 0.5).exp2();
        pts.push((level.ln(), un.sublevel_set(&interval, level, &plan)?.measure()));
    }
    rec.add_series("sublevel_measure", pts);
    rec.set_verdict(t.holds, if t.holds { "holds" } else { "violated" });
    Ok(())
}

fn product_lemma(s: &ProductLemmaSettings, seed: u64, index: usize, rec: &mut ReportRecord) -> Outcome {
    let mut rng = item_rng(seed, index as u64);
    let k = s.k_values[index % s.k_values.len()];
    let (name, u) = s.u.draw(&mut rng);
    let lo = rng.gen_range(-2.0..2.0);
    let interval = RealInterval::with_length(lo, s.length)?;
    let shifts: Vec<f64> = (0..s.n).map(|_| rng.gen_range(s.shift_range.0..s.shift_range.1)).collect();
    let t = verify_product_lemma(&u, &shifts, &interval, k, &SamplingPlan::default())?;
    rec.param("u", name);
    rec.param("n", s.n);
    rec.param("k", k);
    rec.param("interval", [interval.lo(), interval.hi()]);
    rec.param("shifts", &shifts);
    rec.measure("excluded_measure", t.excluded_measure);
    rec.measure("enumeration_gap", t.enumeration_gap);
    rec.fit("threshold", t.threshold);
    rec.fit("eta", t.eta_fit);
    let pass = t.holds() && t.enumeration_gap <= 1e-9;
    let label = if !t.holds() {
        "excluded_too_large"
    } else if pass {
        "holds"
    } else {
        "enumeration_mismatch"
    };
    rec.set_verdict(pass, label);
    Ok(())
}

fn independence(s: &IndependenceSettings, seed: u64, index: usize, rec: &mut ReportRecord) -> Outcome {
    let atoms = match &s.atoms {
        Some(a) => a.clone(),
        None => {
            let mut rng = item_rng(seed, index as u64);
            (0..s.random_atoms)
                .map(|_| GaborAtom::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)))
                .collect()
        }
    };
    let score = gram_matrix(&s.f, &atoms, &s.window, s.order)?;
    rec.param("function", &s.f.name);
    rec.param("atoms", atoms.iter().map(|a| [a.a, a.b]).collect::<Vec<_>>());
    rec.param("window", [s.window.lo(), s.window.hi()]);
    rec.measure("sigma_min", score.sigma_min);
    rec.measure("sigma_max", score.sigma_max);
    rec.measure("ratio", score.ratio());
    rec.measure("windowed", if score.windowed { 1.0 } else { 0.0 });
    let label = match score.verdict {
        Verdict::Independent => "independent",
        Verdict::NumericallyDependent => "numerically_dependent",
        Verdict::Inconclusive => "inconclusive",
    };
    match s.expect {
        Some(e) => rec.set_verdict(score.verdict == e, label),
        None => match score.verdict {
            Verdict::Independent => rec.set_verdict(true, label),
            Verdict::NumericallyDependent => rec.set_verdict(false, label),
            Verdict::Inconclusive => rec.label = label.to_string(),
        },
    }
    Ok(())
}

fn witness(s: &WitnessSettings, seed: u64, index: usize, rec: &mut ReportRecord) -> Outcome {
    let mut rng = item_rng(seed, index as u64);
    let order = rng.gen_range(1..=s.max_order);
    let u = random_trig_poly(&mut rng, order, 0.1);
    let m = rng.gen_range(s.m_range.0..s.m_range.1);
    let n = rng.gen_range(1..=s.max_shifts);
    let shifts: Vec<f64> = (0..n).map(|_| rng.gen_range(s.shift_range.0..s.shift_range.1)).collect();
    let set = witness_set(&u, m, &shifts, &s.f, &s.window, &SamplingPlan::default())?;
    rec.param("function", &s.f.name);
    rec.param("order", order);
    rec.param("m", m);
    rec.param("shifts", &shifts);
    rec.param("window", [s.window.lo(), s.window.hi()]);
    rec.measure("measure", set.measure());
    rec.measure("pieces", set.intervals().len() as f64);
    if let Some(last) = set.intervals().last() {
        rec.measure("rightmost", last.hi());
    }
    if set.measure() > 0.0 {
        rec.set_verdict(true, "nonempty");
    } else if covered(s.f.decay_class) {
        rec.set_verdict(false, "empty");
    } else {
        rec.label = "empty".into();
    }
    Ok(())
}

fn full_exp_relation(b: f64, norm: f64) -> Result<CollapsedRelation, Error> {
    let c = |z: f64| ExpPolynomial::constant(Complex64::new(z, 0.0));
    CollapsedRelation::new(vec![0.0, b], vec![c(b.exp() * norm)?, c(-norm)?])
}

fn cascade(s: &CascadeSettings, seed: u64, index: usize, rec: &mut ReportRecord) -> Outcome {
    let b = match s.b {
        Some(b) => b,
        None => item_rng(seed, index as u64).gen_range(0.5..2.0),
    };
    let f = builtin("full_exp")?;
    let run = gaussian_cascade(&full_exp_relation(b, s.norm)?, &f, &SamplingPlan::default(), s.k_max)?;
    rec.param("function", "full_exp");
    rec.param("b", b);
    rec.param("norm", s.norm);
    rec.param("k_max", s.k_max);
    rec.fit("epsilon", run.epsilon);
    rec.fit("lambda", run.lambda);
    rec.fit("c", run.c);
    rec.measure("passes", run.passes as f64);
    if let Some(last) = run.states.last() {
        rec.measure("final_measure", last.measure);
        rec.measure("final_expected_measure", last.expected_measure);
        rec.measure("final_ln_lower_bound", last.ln_lower_bound);
        rec.measure("final_measured_ln_min", last.measured_ln_min);
    }
    rec.add_series("lower_bound", run.states.iter().map(|s| (s.k as f64, s.ln_lower_bound)));
    rec.add_series("measured_min", run.states.iter().map(|s| (s.k as f64, s.measured_ln_min)));
    rec.add_series("measure", run.states.iter().map(|s| (s.k as f64, s.measure)));
    let ok = run.all_properties_hold();
    let label = match run.states.iter().find(|s| !s.properties_hold()) {
        None => "all_properties_hold".to_string(),
        Some(st) => format!("stage_{}_fails", st.k),
    };
    rec.set_verdict(ok, label);
    Ok(())
}

fn record_series(rec: &mut ReportRecord, series: &TailBoundSeries) {
    let k = |i: usize| series.k_values[i] as f64;
    let n = series.k_values.len();
    rec.add_series("tail_bound", (0..n).map(|i| (k(i), series.ln_formula_bounds[i])));
    rec.add_series("tail_sup", (0..n).map(|i| (k(i), series.ln_tail_sups[i])));
    rec.add_series("lower_bound", (0..n).map(|i| (k(i), series.ln_lower_bounds[i])));
    rec.add_series("eta", (0..n).map(|i| (k(i), series.etas[i])));
    rec.fit("epsilon", series.window.epsilon);
    rec.measure("window_lo", series.window.interval.lo());
    rec.measure("window_hi", series.window.interval.hi());
    if let Some(k) = series.crossing {
        rec.measure("crossing", k as f64);
    }
    let worst = series
        .checks
        .iter()
        .map(|c| c.max_log_excess)
        .fold(f64::NEG_INFINITY, f64::max);
    rec.measure("max_log_excess", worst);
    let gap = series
        .checks
        .iter()
        .filter_map(|c| c.enumeration_gap)
        .fold(f64::NEG_INFINITY, f64::max);
    rec.measure("enumeration_gap", gap);
}

fn recursion(s: &RecursionSettings, rec: &mut ReportRecord) -> Outcome {
    let plan = SamplingPlan::default();
    rec.param("function", &s.f.name);
    rec.param("u", &s.u_name);
    rec.param("shifts", &s.shifts);
    rec.param("m", s.m);
    rec.param("k_max", s.k_max);
    rec.param("hypothesis", s.hypothesis);
    let out = match s.lattice {
        Some((b, n)) => lattice_recursion(&s.u, b, n, s.m, &s.f, s.k_max, &plan, s.hypothesis),
        None => main_recursion(&s.u, &s.shifts, s.m, &s.f, s.k_max, &plan, s.hypothesis),
    };
    match out {
        Err(Error::HypothesisFails { x }) => {
            rec.measure("hypothesis_failure_x", x);
            rec.set_verdict(covered(s.f.decay_class), "hypothesis_fails");
        }
        Err(e) => return Err(e),
        Ok(series) => {
            record_series(rec, &series);
            match s.hypothesis {
                Hypothesis::Inject => match series.crossing {
                    Some(k) => rec.set_verdict(true, format!("contradiction_at_k_{k}")),
                    None => rec.set_verdict(false, "no_contradiction"),
                },
                Hypothesis::Verify => {
                    let ok = series.recursion_holds() && series.crossing.is_none();
                    rec.set_verdict(ok, if ok { "consistent" } else { "inconsistent" });
                }
            }
        }
    }
    Ok(())
}

/// `u_j = e^{a x_j} p_j` with `sum p_j = 0`, which makes the combination
/// vanish wherever `f` is exactly `c e^{a x}` at every translate.
fn tail_exact<R: Rng + ?Sized>(rng: &mut R, a: Complex64, shifts: &[f64]) -> Result<Vec<ExpPolynomial>, Error> {
    let order = rng.gen_range(1..=2);
    let freqs: Vec<f64> = (0..order).map(|j| j as f64 * 0.75 + rng.gen_range(-0.25..0.25)).collect();
    let n = shifts.len();
    let mut coeffs: Vec<Vec<Complex64>> = (0..n - 1)
        .map(|_| {
            (0..order)
                .map(|_| Complex64::from_polar(rng.gen_range(0.5..1.5), rng.gen_range(0.0..std::f64::consts::TAU)))
                .collect()
        })
        .collect();
    let last: Vec<Complex64> = (0..order).map(|t| -coeffs.iter().map(|c| c[t]).sum::<Complex64>()).collect();
    coeffs.push(last);
    coeffs
        .iter()
        .zip(shifts)
        .map(|(c, &x)| {
            let s = (a * x).exp();
            ExpPolynomial::trigonometric(&c.iter().zip(&freqs).map(|(&c, &fr)| (c * s, fr)).collect::<Vec<_>>())
        })
        .collect()
}

fn exp_tail(s: &ExpTailSettings, seed: u64, index: usize, rec: &mut ReportRecord) -> Outcome {
    let mut rng = item_rng(seed, index as u64);
    let plan = SamplingPlan::default();
    let spec = ExponentialTailSpec::for_function(&s.f, &plan)?;
    let n = rng.gen_range(2..=s.max_shifts);
    let mut shifts: Vec<f64> = Vec::with_capacity(n);
    while shifts.len() < n {
        let x = rng.gen_range(-3.0..3.0);
        if shifts.iter().all(|&y: &f64| (x - y).abs() >= 0.25) {
            shifts.push(x);
        }
    }
    shifts.sort_by(f64::total_cmp);
    let exact = rng.gen_bool(s.tail_exact_fraction);
    let polys = if exact {
        tail_exact(&mut rng, spec.a, &shifts)?
    } else {
        (0..n)
            .map(|_| {
                let m = rng.gen_range(1..=3);
                random_trig_poly(&mut rng, m, 0.1)
            })
            .collect()
    };
    let coll = CollapsedRelation::new(shifts.clone(), polys)?;
    let verdict = exponential_tail_test(&spec, &coll, &plan)?;
    rec.param("function", &s.f.name);
    rec.param("shifts", &shifts);
    rec.param("tail_exact", exact);
    if let Some(b0) = spec.b0 {
        rec.measure("b0", b0);
    }
    match &verdict {
        TailVerdict::NoRelation { sup_v, scale } => {
            rec.measure("sup_v", *sup_v);
            rec.measure("scale", *scale);
        }
        TailVerdict::ForcesExtension { sup_v, scale, mismatch } => {
            rec.measure("sup_v", *sup_v);
            rec.measure("scale", *scale);
            rec.measure("mismatch", *mismatch);
        }
        TailVerdict::ExcludedPureExponential {
            sup_v,
            scale,
            relation_residual,
        } => {
            rec.measure("sup_v", *sup_v);
            rec.measure("scale", *scale);
            rec.measure("relation_residual", *relation_residual);
        }
    }
    let expected = exact && spec.b0.is_none();
    rec.set_verdict(verdict.relation_holds() == expected, verdict.label());
    Ok(())
}

fn density(s: &DensitySettings, seed: u64, index: usize, rec: &mut ReportRecord) -> Outcome {
    let mut rng = item_rng(seed, index as u64);
    let window = RealInterval::new(0.0, s.length)?;
    let k = IntervalUnion::from_intervals((0..s.pieces).map(|_| {
        let w = rng.gen_range(s.width_range.0..s.width_range.1).min(s.length);
        let lo = rng.gen_range(0.0..=(s.length - w));
        RealInterval::with_length(lo, w).expect("positive width")
    }));
    let b1 = rng.gen_range(s.shift_range.0..s.shift_range.1);
    let b2 = loop {
        let b = rng.gen_range(s.shift_range.0..s.shift_range.1);
        if (b - b1).abs() > 1e-3 {
            break b;
        }
    };
    let scan = beurling_lower_density_scan(&k, &s.r_values, &window)?;
    let core = RealInterval::new(0.25 * s.length, 0.75 * s.length)?;
    let cover = support_cover_check(&k, b1, b2, Some(&core))?;
    rec.param("length", s.length);
    rec.param("pieces", s.pieces);
    rec.param("b1", b1);
    rec.param("b2", b2);
    rec.measure("support_fraction", k.measure() / s.length);
    rec.measure("base_covered", cover.base_covered as u8 as f64);
    rec.measure("first_covered", cover.first_covered as u8 as f64);
    rec.measure("second_covered", cover.second_covered as u8 as f64);
    rec.add_series("lower_density", scan.iter().map(|&(r, inf)| (r, inf / r)));
    // the window infimum can only grow with R
    let monotone = scan.windows(2).all(|w| w[1].1 >= w[0].1 - 1e-12);
    rec.set_verdict(monotone, if monotone { "monotone" } else { "non_monotone" });
    Ok(())
}
