use clap::Parser;
use frte_cli::{load, run_experiment, Options};
use std::path::PathBuf;
use std::process::ExitCode;

/// Multi-group radiative transfer experiments.
///
/// TAG is one of ex1, ex2, ex3, table1, coeffs, converge, ap-gray, ap-fddl,
/// or `run` with a config file. A config file given with a preset tag is
/// layered over the preset; key=value arguments are applied last.
#[derive(Parser, Debug)]
#[command(name = "frte", version)]
struct Args {
    tag: String,
    /// Config file, then any number of key=value overrides.
    rest: Vec<String>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Write a profile every N steps (default: initial and final only).
    #[arg(long)]
    stride: Option<usize>,
    /// Use the fine reference time step (1e-5 ns).
    #[arg(long)]
    reference: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let (path, overrides): (Vec<String>, Vec<String>) = args.rest.into_iter().partition(|a| !a.contains('='));
    if path.len() > 1 {
        eprintln!("frte: expected at most one config file, got {}", path.len());
        return ExitCode::from(2);
    }
    let opts = Options { out_dir: args.out, stride: args.stride, reference: args.reference };
    let result = load(&args.tag, path.first().map(PathBuf::from).as_deref(), &overrides)
        .and_then(|raw| run_experiment(&args.tag, &raw, &opts));
    match result {
        Ok(report) => {
            for f in &report.files {
                println!("wrote {}", f.display());
            }
            for (k, v) in &report.metrics {
                println!("{k} = {v:.6e}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("frte: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
