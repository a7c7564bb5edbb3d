use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use hrtlab::catalog::{builtin, BUILTIN_NAMES};
use hrtlab::experiment::{self, emit, read_json, ExperimentConfig, OutputFormat, RunOptions, Suite};

#[derive(Parser)]
#[command(name = "hrtlab", version, about = "Experiments on time-frequency translates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
    Plotdata,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
            Format::Plotdata => OutputFormat::Plotdata,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run the suite named in a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trials: Option<usize>,
        /// Output directory; HRTLAB_OUT takes precedence.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[arg(long)]
        jobs: Option<usize>,
        /// Record per-trial wall-clock time (makes reports non-reproducible).
        #[arg(long)]
        timing: bool,
    },
    /// List the available suites.
    ListSuites,
    /// Re-render a JSON report in another format.
    Emit {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Show the built-in function catalog.
    Catalog {
        /// Print the full entry for one function as JSON.
        name: Option<String>,
    },
}

fn out_dir(flag: PathBuf) -> PathBuf {
    match std::env::var_os("HRTLAB_OUT") {
        Some(v) if !v.is_empty() => PathBuf::from(v),
        _ => flag,
    }
}

fn config_error(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            config,
            seed,
            trials,
            out,
            format,
            jobs,
            timing,
        } => {
            let mut cfg = match ExperimentConfig::load(&config) {
                Ok(c) => c,
                Err(e) => return config_error(e),
            };
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(t) = trials {
                cfg.trials = t;
            }
            if let Err(e) = cfg.validate() {
                return config_error(e);
            }
            let records = match experiment::run(&cfg, &RunOptions { jobs, timing }) {
                Ok(r) => r,
                Err(e) => return config_error(e),
            };
            let dir = out_dir(out);
            let written = match emit(&records, format.into(), &dir) {
                Ok(w) => w,
                Err(e) => return config_error(format!("cannot write to {}: {e}", dir.display())),
            };
            let (pass, fail, inconclusive) = experiment::tally(&records);
            println!(
                "{}: {} trials, {pass} pass, {fail} fail, {inconclusive} inconclusive",
                cfg.suite,
                records.len()
            );
            for p in written {
                println!("wrote {}", p.display());
            }
            if fail > 0 {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Command::ListSuites => {
            for s in Suite::ALL {
                println!("{:<20} {}", s.name(), s.anchor());
            }
            ExitCode::SUCCESS
        }
        Command::Emit { input, out, format } => {
            let records = match read_json(&input) {
                Ok(r) => r,
                Err(e) => return config_error(e),
            };
            let dir = out_dir(out);
            match emit(&records, format.into(), &dir) {
                Ok(written) => {
                    for p in written {
                        println!("wrote {}", p.display());
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => config_error(format!("cannot write to {}: {e}", dir.display())),
            }
        }
        Command::Catalog { name: Some(name) } => match builtin(&name) {
            Ok(f) => {
                println!("{}", serde_json::to_string_pretty(&f).expect("serialisable"));
                ExitCode::SUCCESS
            }
            Err(e) => config_error(e),
        },
        Command::Catalog { name: None } => {
            for name in BUILTIN_NAMES {
                let f = builtin(name).expect("built-in entries are valid");
                let decay = serde_json::to_value(f.decay_class).expect("serialisable");
                println!(
                    "{:<16} decay={:<18} window=[{}, {}]",
                    name,
                    decay.as_str().unwrap_or("?"),
                    f.window.lo(),
                    f.window.hi()
                );
            }
            ExitCode::SUCCESS
        }
    }
}
