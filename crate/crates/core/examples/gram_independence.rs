//! Gram-matrix scores: two Gaussian translates are well separated, while
//! `e^{-x}` and its translate are proportional on the half-line.

use hrtlab::catalog::builtin;
use hrtlab::exppoly::{ExpPolynomial, RealInterval, SamplingPlan};
use hrtlab::independence::{gram_matrix, residual, CollapsedRelation, GaborAtom};
use num_complex::Complex64;

fn main() -> hrtlab::Result<()> {
    let atoms = [GaborAtom::new(0.0, 0.0), GaborAtom::new(0.0, 1.0)];

    let g = builtin("gaussian")?;
    let s = gram_matrix(&g, &atoms, &g.window, 16)?;
    println!("gaussian: G01 = {:.12}, analytic {:.12}", s.gram[0][1].re, 0.5f64.sqrt() * (-std::f64::consts::FRAC_PI_2).exp());
    println!("gaussian: sigma_min {:.6}, verdict {:?}", s.sigma_min, s.verdict);

    let f = builtin("full_exp")?;
    let window = RealInterval::new(1.0, 40.0)?;
    let s = gram_matrix(&f, &atoms, &window, 16)?;
    println!("full_exp: sigma_min/sigma_max {:.3e}, verdict {:?}", s.ratio(), s.verdict);

    let b: f64 = 1.0;
    let c = |z: f64| ExpPolynomial::constant(Complex64::new(z, 0.0));
    let coll = CollapsedRelation::new(vec![0.0, b], vec![c(b.exp())?, c(-1.0)?])?;
    let r = residual(&coll, &f, &SamplingPlan::default(), &window)?;
    println!("e^b f(x) - f(x - b): residual {:.3e} against scale {:.3e}", r.value, r.scale);
    Ok(())
}
