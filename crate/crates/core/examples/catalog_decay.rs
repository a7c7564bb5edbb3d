//! The function catalog: declared decay classes checked on the right tail,
//! and quasi-monotone ratios `sup |f(x + b)| / |f(x)|`.

use hrtlab::catalog::{builtin, quasi_monotone_scan, verify_decay, DecayClass, BUILTIN_NAMES};

fn main() -> hrtlab::Result<()> {
    let grid: Vec<f64> = (1..=200).map(|i| i as f64 * 0.1).collect();
    for name in BUILTIN_NAMES {
        let f = builtin(name)?;
        let decay = match f.decay_class {
            DecayClass::Gaussian | DecayClass::XLogX | DecayClass::Superexponential => {
                verify_decay(&f, f.decay_class, &[0.25, 0.5, 0.9], 20.0)?.verdict.to_string()
            }
            _ => "-".into(),
        };
        let qm = quasi_monotone_scan(&f, &[0.5, 1.0, 2.0], &grid)?;
        println!(
            "{name:<15} {:<18} decay {:<5} quasi-monotone {:<5} C(b) = {:.3?}",
            format!("{:?}", f.decay_class),
            decay,
            qm.verdict,
            qm.c_estimates
        );
    }
    Ok(())
}
