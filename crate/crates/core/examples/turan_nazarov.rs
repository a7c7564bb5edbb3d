//! Randomised Turán–Nazarov corpus: fit the single constant `A` and check
//! that it is stable when the evaluation grid is refined.

use hrtlab::inequalities::{turan_nazarov_corpus, CorpusOptions};

fn main() -> hrtlab::Result<()> {
    let trials: usize = std::env::args().nth(1).map_or(1000, |s| s.parse().expect("trial count"));
    let coarse = CorpusOptions {
        trials,
        ..CorpusOptions::default()
    };
    let fine = CorpusOptions {
        plan: coarse.plan.refined(4.0),
        ..coarse
    };
    let (a, _) = turan_nazarov_corpus(&coarse)?;
    let (b, _) = turan_nazarov_corpus(&fine)?;
    println!("trials          {}", a.trials);
    println!("all hold        {}", a.all_hold && b.all_hold);
    println!("A (step {:.4})  {:.6}", coarse.plan.step, a.fitted_constant);
    println!("A (step {:.4})  {:.6}", fine.plan.step, b.fitted_constant);
    println!(
        "relative change {:.3e}",
        (a.fitted_constant - b.fitted_constant).abs() / a.fitted_constant
    );
    println!("min |E|/|I|     {:.4}", a.metadata["min_set_fraction"]);
    Ok(())
}
