//! Montgomery–Vaughan bounds on random trigonometric polynomials with
//! `K > 1/delta`, plus the modulation identity.

use hrtlab::inequalities::{montgomery_vaughan_corpus, CorpusOptions};

fn main() -> hrtlab::Result<()> {
    let opts = CorpusOptions {
        trials: 100,
        seed: 2,
        ..CorpusOptions::default()
    };
    let (report, trials) = montgomery_vaughan_corpus(&opts)?;
    println!("{:>8} {:>10} {:>12} {:>12} {:>12}", "K", "delta", "lower", "integral", "upper");
    for t in trials.iter().take(8) {
        println!(
            "{:>8.3} {:>10.4} {:>12.4} {:>12.4} {:>12.4}",
            t.k, t.delta, t.lower, t.integral, t.upper
        );
    }
    println!("all hold: {}", report.all_hold);
    println!("worst shift error: {:.2e}", report.metadata["max_shift_error"]);
    Ok(())
}
