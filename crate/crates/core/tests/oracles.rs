//! Small worked cases checked against closed forms or brute force.

use num_complex::Complex64;

use hrtlab::catalog::{builtin, quasi_monotone_scan};
use hrtlab::exppoly::{beurling_lower_density_scan, ExpPolynomial, IntervalUnion, RealInterval, SamplingPlan};
use hrtlab::independence::{gram_matrix, witness_set, GaborAtom};
use hrtlab::inequalities::{log_minus_integral, partition_count};

fn one_minus_exp() -> ExpPolynomial {
    let one = Complex64::new(1.0, 0.0);
    ExpPolynomial::trigonometric(&[(one, 0.0), (-one, 1.0)]).unwrap()
}

#[test]
fn density_of_unit_intervals_at_even_integers() {
    let k = IntervalUnion::from_intervals((0..=20).map(|n| RealInterval::new(2.0 * n as f64, 2.0 * n as f64 + 1.0).unwrap()));
    let window = RealInterval::new(0.0, 41.0).unwrap();
    let scan = beurling_lower_density_scan(&k, &[4.0], &window).unwrap();
    assert!((scan[0].1 - 2.0).abs() < 1e-12, "{:?}", scan);
}

#[test]
fn gaussian_quasi_monotone_constant() {
    let g = builtin("gaussian").unwrap();
    let grid: Vec<f64> = (0..=200).map(|i| i as f64 * 0.05).collect();
    let r = quasi_monotone_scan(&g, &[1.0], &grid).unwrap();
    let exact = (-std::f64::consts::PI).exp();
    assert!((r.c_estimates[0] - exact).abs() < 1e-12 * exact, "{:?}", r.c_estimates);
}

#[test]
fn partition_count_small_case() {
    assert_eq!(partition_count(2, 3).unwrap(), 10);
    assert_eq!(partition_count(0, 7).unwrap(), 1);
}

#[test]
fn single_gaussian_atom_has_norm_two_to_minus_half() {
    let g = builtin("gaussian").unwrap();
    let s = gram_matrix(&g, &[GaborAtom::new(0.3, -0.7)], &g.window, 16).unwrap();
    assert!((s.gram[0][0].re - 0.5f64.sqrt()).abs() < 1e-12);
}

#[test]
fn log_minus_matches_clausen_value() {
    // |1 - e^{2 pi i x}| = 2|sin(pi x)|, and the negative part of its log
    // integrates to Cl_2(pi/3) / pi over one period
    let exact = 1.014_941_606_409_653_6 / std::f64::consts::PI;
    let i = RealInterval::new(0.0, 1.0).unwrap();
    let r = log_minus_integral(&one_minus_exp(), 0.0, &i, &SamplingPlan::default()).unwrap();
    assert!((r.direct - exact).abs() < 1e-8, "direct {} vs {exact}", r.direct);
    assert!((r.layer_cake - exact).abs() < 1e-4, "layer cake {} vs {exact}", r.layer_cake);
}

#[test]
fn witness_measure_matches_grid_count() {
    let f = builtin("xlogx").unwrap();
    let u = one_minus_exp();
    let (m, shifts) = (10.0, [1.0, 2.0]);
    let window = RealInterval::new(0.0, 20.0).unwrap();
    let e = witness_set(&u, m, &shifts, &f, &window, &SamplingPlan::default()).unwrap();
    let n = 400_000;
    let h = 20.0 / n as f64;
    let hits = (0..n)
        .map(|j| (j as f64 + 0.5) * h)
        .filter(|&x| u.evaluate(x).unwrap().norm() * f.abs(x) > m * shifts.iter().map(|&s| f.abs(x + s)).sum::<f64>())
        .count();
    let grid = hits as f64 * h;
    assert!(e.measure() > 1.0);
    assert!((e.measure() - grid).abs() < 1e-3, "{} vs {grid}", e.measure());
}
