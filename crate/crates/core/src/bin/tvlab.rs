use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use tvlab::experiments::{write_outputs, Config, Experiment};

/// Run one TV-regularization experiment and write plot-ready tables.
#[derive(Debug, Parser)]
#[command(name = "tvlab", version)]
struct Cli {
    /// counterexample3d, converge-critical, param-sweep, radon-bounds, projection-demo or curvature.
    experiment: Experiment,
    /// Flat `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads for schedule entries; defaults to all cores.
    #[arg(long)]
    threads: Option<usize>,
}

fn run(cli: &Cli) -> tvlab::Result<bool> {
    let cfg = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(k) = cli.threads {
        pool = pool.num_threads(k.max(1));
    }
    let pool = pool.build().map_err(|e| tvlab::Error::InvalidArgument(e.to_string()))?;
    let out = pool.install(|| cli.experiment.run(&cfg, cli.seed))?;
    write_outputs(&cli.out, cli.experiment, &cfg, cli.seed, &out)?;
    for note in &out.notes {
        println!("{note}");
    }
    println!("{}: {} rows, verdicts as expected: {}", cli.experiment, out.table.rows.len(), out.as_expected);
    Ok(out.as_expected)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
