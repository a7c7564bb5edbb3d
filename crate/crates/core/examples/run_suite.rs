//! Running an experiment suite from a TOML string and rendering the
//! report in every output format.

use hrtlab::experiment::{render_csv, render_plotdata, run, tally, ExperimentConfig, RunOptions};

const CONFIG: &str = r#"
suite = "cascade"
seed = 7
trials = 4

[params]
k_max = 8
"#;

fn main() {
    let cfg = ExperimentConfig::from_toml_str(CONFIG).expect("valid config");
    let records = run(&cfg, &RunOptions::default()).expect("valid parameters");
    let (pass, fail, inconclusive) = tally(&records);
    println!("{}: {pass} pass, {fail} fail, {inconclusive} inconclusive", cfg.suite);
    for r in &records {
        println!("  trial {} b = {} -> {}", r.trial, r.parameters["b"], r.label);
    }
    let csv = render_csv(&records);
    println!("csv: {} lines", csv.lines().count());
    for (name, body) in render_plotdata(&records) {
        println!("plotdata: {name} ({} bytes)", body.len());
    }
}
