//! Randomised invariants across the library.

use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;

use hrtlab::catalog::{builtin, quasi_monotone_scan, verify_decay, DecayClass, BUILTIN_NAMES};
use hrtlab::constructions::{exponential_tail_test, fexp_sum, fexp_sum_enumerated, ExponentialTailSpec};
use hrtlab::experiment::{render_json, ExperimentConfig, ReportRecord, RunOptions, Suite};
use hrtlab::exppoly::{beurling_lower_density_scan, ExpPolynomial, IntervalUnion, RealInterval, SamplingPlan};
use hrtlab::independence::{
    collapse, det_mn, gram_matrix, residual, witness_set, CollapsedRelation, DependenceRelation, GaborAtom,
};
use hrtlab::inequalities::{half_split, partition_count, random_trig_poly, verify_prod_lemma};
use hrtlab::rng::item_rng;

fn poly(seed: u64, m: usize) -> ExpPolynomial {
    random_trig_poly(&mut item_rng(seed, 0), m, 0.1)
}

fn union_from(pairs: &[(f64, f64)]) -> IntervalUnion {
    IntervalUnion::from_intervals(
        pairs
            .iter()
            .map(|&(lo, len)| RealInterval::with_length(lo, len).unwrap()),
    )
}

fn well_formed(u: &IntervalUnion) -> bool {
    u.intervals().windows(2).all(|w| w[0].hi() < w[1].lo()) && u.intervals().iter().all(|i| i.length() > 0.0)
}

fn pieces() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-10.0..10.0f64, 0.01..3.0f64), 0..8)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn shift_commutes_with_evaluation(seed in any::<u64>(), m in 1usize..6, b in -5.0..5.0f64, x in -5.0..5.0f64) {
        let u = poly(seed, m);
        let lhs = u.shift(b).unwrap().evaluate(x).unwrap();
        let rhs = u.evaluate(x + b).unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + rhs.norm()));
    }

    #[test]
    fn sup_bracket_is_sound(seed in any::<u64>(), m in 1usize..6, lo in -5.0..5.0f64, len in 0.1..3.0f64) {
        let u = poly(seed, m);
        let i = RealInterval::with_length(lo, len).unwrap();
        let (lower, upper) = u.sup_on_interval(&i, &SamplingPlan::default()).unwrap();
        prop_assert!(lower <= upper);
        let n = 4000;
        for j in 0..=n {
            let x = lo + len * j as f64 / n as f64;
            prop_assert!(u.evaluate(x).unwrap().norm() <= upper * (1.0 + 1e-12));
        }
    }

    #[test]
    fn sublevel_measure_is_monotone(seed in any::<u64>(), m in 1usize..5, t1 in 0.01..2.0f64, t2 in 0.01..2.0f64) {
        let u = poly(seed, m);
        let i = RealInterval::new(0.0, 2.0).unwrap();
        let plan = SamplingPlan::default();
        let (a, b) = (t1.min(t2), t1.max(t2));
        let ma = u.sublevel_set(&i, a, &plan).unwrap().measure();
        let mb = u.sublevel_set(&i, b, &plan).unwrap().measure();
        prop_assert!(ma <= mb + 1e-9, "{ma} > {mb}");
    }

    #[test]
    fn simple_zeros_give_linear_sublevel_growth(a in -3.0..3.0f64, gap in 0.5..3.0f64, phase in 0.0..6.28f64) {
        // |e^{2 pi i a x} + e^{i phase} e^{2 pi i (a + gap) x}| vanishes simply
        let u = ExpPolynomial::trigonometric(&[
            (Complex64::new(1.0, 0.0), a),
            (Complex64::from_polar(1.0, phase), a + gap),
        ]).unwrap();
        let i = RealInterval::new(0.0, 4.0 / gap).unwrap();
        let plan = SamplingPlan::default();
        let pts: Vec<(f64, f64)> = (4..=10)
            .map(|j| {
                let t = 2f64.powi(-j);
                (t.ln(), u.sublevel_set(&i, t, &plan).unwrap().measure().ln())
            })
            .collect();
        let n = pts.len() as f64;
        let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), p| (a + p.0, b + p.1));
        let (mx, my) = (sx / n, sy / n);
        let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
            / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
        prop_assert!(slope >= 1.0 - 0.1, "slope {slope}");
    }

    #[test]
    fn set_algebra_preserves_measure_identity(a in pieces(), b in pieces()) {
        let (a, b) = (union_from(&a), union_from(&b));
        let (u, i) = (a.union(&b), a.intersect(&b));
        prop_assert!(well_formed(&a) && well_formed(&u) && well_formed(&i) && well_formed(&a.subtract(&b)));
        let lhs = u.measure() + i.measure();
        let rhs = a.measure() + b.measure();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs), "{lhs} vs {rhs}");
        prop_assert!((a.subtract(&b).measure() + i.measure() - a.measure()).abs() <= 1e-12 * (1.0 + a.measure()));
    }

    #[test]
    fn density_scan_is_monotone(p in prop::collection::vec((0.0..90.0f64, 0.05..3.0f64), 1..15)) {
        let k = union_from(&p);
        let window = RealInterval::new(0.0, 100.0).unwrap();
        let scan = beurling_lower_density_scan(&k, &[0.5, 1.0, 3.0, 10.0, 40.0], &window).unwrap();
        for w in scan.windows(2) {
            prop_assert!(w[1].1 >= w[0].1 - 1e-12);
        }
    }

    #[test]
    fn quasi_monotone_constants_are_submultiplicative(b1 in 0.2..2.0f64, b2 in 0.2..2.0f64, which in 0usize..3) {
        let name = ["gaussian", "xlogx", "two_sided_exp"][which];
        let f = builtin(name).unwrap();
        let grid: Vec<f64> = (0..=400).map(|i| i as f64 * 0.05).collect();
        let r = quasi_monotone_scan(&f, &[b1, b2, b1 + b2], &grid).unwrap();
        let c = &r.c_estimates;
        prop_assert!(c[2] <= c[0] * c[1] * (1.0 + 1e-6), "{name}: {c:?}");
    }

    #[test]
    fn collapse_round_trips(seed in any::<u64>(), n in 1usize..9) {
        let mut rng = item_rng(seed, 1);
        let mut atoms: Vec<GaborAtom> = Vec::new();
        while atoms.len() < n {
            let atom = GaborAtom::new(rng.gen_range(-3..=3) as f64 * 0.5, rng.gen_range(-2..=2) as f64);
            if !atoms.contains(&atom) {
                atoms.push(atom);
            }
        }
        let coeffs: Vec<Complex64> = (0..n).map(|_| Complex64::from_polar(rng.gen_range(0.5..2.0), rng.gen_range(0.0..6.0))).collect();
        let rel = DependenceRelation::new(atoms.clone(), coeffs.clone(), builtin("gaussian").unwrap()).unwrap();
        let mut back = collapse(&rel).expand().unwrap();
        let mut orig: Vec<(GaborAtom, Complex64)> = atoms.into_iter().zip(coeffs).collect();
        let key = |p: &(GaborAtom, Complex64)| (p.0.b, p.0.a);
        back.sort_by(|x, y| key(x).partial_cmp(&key(y)).unwrap());
        orig.sort_by(|x, y| key(x).partial_cmp(&key(y)).unwrap());
        prop_assert_eq!(back, orig);
    }

    #[test]
    fn residual_scales_with_coefficients(seed in any::<u64>(), re in 0.1..5.0f64, im in -5.0..5.0f64) {
        let lambda = Complex64::new(re, im);
        let coll = CollapsedRelation::new(vec![-0.5, 0.7], vec![poly(seed, 2), poly(seed ^ 1, 3)]).unwrap();
        let f = builtin("gaussian").unwrap();
        let w = RealInterval::new(-3.0, 3.0).unwrap();
        let plan = SamplingPlan::default();
        let r0 = residual(&coll, &f, &plan, &w).unwrap();
        let r1 = residual(&coll.scaled(lambda).unwrap(), &f, &plan, &w).unwrap();
        prop_assert!((r1.value - lambda.norm() * r0.value).abs() <= 1e-12 * r1.value.max(1e-300));
    }

    #[test]
    fn gram_verdict_survives_scaling_and_modulation(b in 0.3..2.0f64, a0 in -2.0..2.0f64, s in 0.1..10.0f64) {
        let f = builtin("gaussian").unwrap();
        let atoms = [GaborAtom::new(0.0, 0.0), GaborAtom::new(0.5, b)];
        let moved = atoms.map(|p| GaborAtom::new(p.a + a0, p.b));
        let base = gram_matrix(&f, &atoms, &f.window, 16).unwrap();
        let scaled = gram_matrix(&f.scaled(Complex64::new(0.0, s)), &atoms, &f.window, 16).unwrap();
        let modulated = gram_matrix(&f, &moved, &f.window, 16).unwrap();
        prop_assert_eq!(base.verdict, scaled.verdict);
        prop_assert_eq!(base.verdict, modulated.verdict);
        prop_assert!((base.ratio() - scaled.ratio()).abs() <= 1e-9);
        prop_assert!((base.ratio() - modulated.ratio()).abs() <= 1e-9);
    }

    #[test]
    fn determinant_is_antisymmetric(seed in any::<u64>(), x in prop::array::uniform3(-2.0..2.0f64)) {
        let coll = CollapsedRelation::new(
            vec![-1.0, 0.0, 1.3],
            vec![poly(seed, 1), poly(seed ^ 2, 2), poly(seed ^ 3, 2)],
        ).unwrap();
        let f = builtin("gaussian").unwrap();
        let d = det_mn(&coll, &f, &x, 3).unwrap();
        let swapped = det_mn(&coll, &f, &[x[2], x[1], x[0]], 3).unwrap();
        prop_assert!((d + swapped).norm() <= 1e-12 * (1.0 + d.norm()));
    }

    #[test]
    fn witness_points_satisfy_the_strict_inequality(seed in any::<u64>(), m in 1.0..10.0f64, b in 1.0..3.0f64) {
        let f = builtin("xlogx").unwrap();
        let u = poly(seed, 2);
        let shifts = [b, b * 1.3];
        let e = witness_set(&u, m, &shifts, &f, &RealInterval::new(0.0, 20.0).unwrap(), &SamplingPlan::default()).unwrap();
        for x in e.sample_points(0.05) {
            // keep clear of the bisected endpoints
            if e.intervals().iter().any(|i| (x - i.lo()).abs() < 1e-6 || (x - i.hi()).abs() < 1e-6) {
                continue;
            }
            let lhs = u.evaluate(x).unwrap().norm() * f.abs(x);
            let rhs = m * shifts.iter().map(|&s| f.abs(x + s)).sum::<f64>();
            prop_assert!(lhs > rhs, "x = {x}: {lhs} <= {rhs}");
        }
    }

    #[test]
    fn half_split_keeps_the_larger_half(seed in any::<u64>(), m in 2usize..5, lo in -3.0..3.0f64) {
        let u = poly(seed, m);
        let e = IntervalUnion::from_interval(RealInterval::with_length(lo, 1.5).unwrap());
        let plan = SamplingPlan::default();
        let h = half_split(&u, &e, &plan).unwrap();
        prop_assert!((h.f.measure() - 0.75).abs() <= 1e-3, "{}", h.f.measure());
        prop_assert!(h.bound >= h.threshold * (1.0 - 1e-6));
        // every point of E outside F sits below the kept infimum
        let rest = e.subtract(&h.f);
        for x in rest.sample_points(0.01) {
            prop_assert!(u.evaluate(x).unwrap().norm() <= h.bound + 1e-6);
        }
    }

    #[test]
    fn prod_lemma_keeps_half_the_interval(seed in any::<u64>(), k in 1usize..15) {
        let mut rng = item_rng(seed, 3);
        let shifts: Vec<f64> = (0..k).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let i = RealInterval::new(0.0, 1.0).unwrap();
        let t = verify_prod_lemma(&ExpPolynomial::two_cos(), &i, &shifts, &SamplingPlan::default()).unwrap();
        prop_assert!(t.measure >= 0.5);
        prop_assert!(t.eta_fit.is_finite());
    }

    #[test]
    fn lattice_sum_equals_enumeration(b1 in 0.1..2.0f64, b2 in 0.1..2.0f64, k in 1usize..7, x in 0.0..1.0f64) {
        let one = Complex64::new(1.0, 0.0);
        let u = ExpPolynomial::trigonometric(&[(one, 0.0), (-one, 1.0)]).unwrap();
        let g = |y: f64| -y * (1.0 + y).ln();
        let a = fexp_sum(&u, &[b1, b2], k, x, &g);
        let b = fexp_sum_enumerated(&u, &[b1, b2], k, x, &g).unwrap();
        prop_assert!((a - b).abs() <= 1e-9 * (1.0 + b.abs()));
    }

    #[test]
    fn tail_verdict_invariant_under_scaling_and_shift(seed in any::<u64>(), s in 0.1..10.0f64, c in -2.0..2.0f64) {
        let plan = SamplingPlan::default();
        let f = builtin("two_sided_exp").unwrap();
        let coll = CollapsedRelation::new(vec![-1.0, 0.5], vec![poly(seed, 2), poly(seed ^ 5, 1)]).unwrap();
        let shifted = CollapsedRelation::new(vec![-1.0 + c, 0.5 + c], coll.polys().to_vec()).unwrap();
        let base = exponential_tail_test(&ExponentialTailSpec::for_function(&f, &plan).unwrap(), &coll, &plan).unwrap();
        let scaled_spec = ExponentialTailSpec::for_function(&f, &plan).unwrap().scaled(Complex64::new(s, 0.0));
        let scaled = exponential_tail_test(&scaled_spec, &coll, &plan).unwrap();
        let moved = exponential_tail_test(&ExponentialTailSpec::for_function(&f, &plan).unwrap(), &shifted, &plan).unwrap();
        prop_assert_eq!(base.label(), scaled.label());
        prop_assert_eq!(base.label(), moved.label());
    }

    #[test]
    fn partition_count_is_monotone(n in 0u32..15, k in 0u32..15) {
        let p = partition_count(n, k).unwrap();
        prop_assert!(partition_count(n + 1, k).unwrap() >= p);
        prop_assert!(partition_count(n, k + 1).unwrap() >= p);
    }

    #[test]
    fn report_json_round_trips(seed in any::<u64>(), trials in 1usize..6) {
        let cfg = ExperimentConfig::from_toml_str(&format!(
            "suite = \"density\"\nseed = {seed}\ntrials = {trials}\n"
        )).unwrap();
        let recs = hrtlab::experiment::run(&cfg, &RunOptions::default()).unwrap();
        let back: Vec<ReportRecord> = serde_json::from_str(&render_json(&recs)).unwrap();
        prop_assert_eq!(back, recs);
    }
}

#[test]
fn catalog_parities() {
    let two = builtin("two_sided_exp").unwrap();
    let g = builtin("gaussian").unwrap();
    for i in 0..200 {
        let x = -10.0 + 0.1 * i as f64;
        assert_eq!(two.evaluate(x), two.evaluate(-x));
        assert!(g.evaluate(x).re > 0.0 && g.evaluate(x).im == 0.0);
        assert_eq!(g.evaluate(x), g.evaluate(-x));
    }
}

#[test]
fn decay_class_hierarchy() {
    let c = [0.1, 0.5];
    for name in BUILTIN_NAMES {
        let f = builtin(name).unwrap();
        match f.decay_class {
            DecayClass::Gaussian => {
                assert!(verify_decay(&f, DecayClass::Gaussian, &c, 20.0).unwrap().verdict, "{name}");
                assert!(verify_decay(&f, DecayClass::XLogX, &c, 20.0).unwrap().verdict, "{name}");
                assert!(verify_decay(&f, DecayClass::Superexponential, &c, 20.0).unwrap().verdict, "{name}");
            }
            DecayClass::XLogX => {
                assert!(verify_decay(&f, DecayClass::XLogX, &c, 20.0).unwrap().verdict, "{name}");
                assert!(verify_decay(&f, DecayClass::Superexponential, &c, 20.0).unwrap().verdict, "{name}");
            }
            _ => {}
        }
    }
}

#[test]
fn every_suite_has_an_anchor() {
    for s in Suite::ALL {
        assert!(!s.anchor().is_empty());
        assert_eq!(Suite::from_name(s.name()), Some(s));
    }
}
