use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use hidden_dynamics_cli::{run_experiment, write_artifacts, CliError, Overrides, RunConfig, PRESETS};

/// Hidden-dynamics experiments for piecewise-smooth systems.
#[derive(Parser, Debug)]
#[command(name = "hidden-dynamics", version, after_help = preset_help())]
struct Args {
    /// Preset to run; with --check and no preset, every preset runs.
    preset: Option<String>,
    /// JSON config (or a previous report.json).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; defaults to out/<preset>.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Self-check: evaluate annotations, write files only when --out is given.
    #[arg(long)]
    check: bool,
    /// Timescale ratio; replaces any κ grid or scan
    #[arg(long)]
    kappa: Option<f64>,
    /// Coupling coefficient a₂
    #[arg(long)]
    a2: Option<f64>,
    /// Switching steepness ε for the smooth system
    #[arg(long)]
    eps: Option<f64>,
    /// RNG seed for sampled presets
    #[arg(long)]
    seed: Option<u64>,
}

fn preset_help() -> String {
    format!("Presets: {}", PRESETS.join(", "))
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(args) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(args: Args) -> Result<u8, CliError> {
    let mut cfg = match &args.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    cfg.apply(&Overrides { kappa: args.kappa, a2: args.a2, eps: args.eps, seed: args.seed })?;
    let names: Vec<String> = match (args.preset.clone().or_else(|| cfg.experiment.preset.clone()), args.check) {
        (Some(p), _) => vec![p],
        (None, true) => PRESETS.iter().map(|s| s.to_string()).collect(),
        (None, false) => return Err(CliError::usage(format!("no preset given; choose one of: {}", PRESETS.join(", ")))),
    };
    let several = names.len() > 1;
    let mut failed = 0;
    for name in &names {
        let (mut report, output) = run_experiment(name, cfg.clone())?;
        let dir = match (&args.out, several) {
            (Some(d), false) => Some(d.clone()),
            (Some(d), true) => Some(d.join(name)),
            (None, _) if args.check => None,
            (None, _) => Some(PathBuf::from("out").join(name)),
        };
        if let Some(dir) = &dir {
            write_artifacts(dir, &mut report, &output)?;
        }
        let verdict = if report.pass { "PASS" } else { "FAIL" };
        println!("{verdict} {name} ({:.0} ms)", report.elapsed_ms);
        for a in &report.annotations {
            let mark = match a.pass {
                Some(true) => "ok",
                Some(false) => "MISMATCH",
                None => "skipped",
            };
            println!("    [{mark}] {}: expected {}, got {}", a.name, a.expected, a.actual);
        }
        if let Some(dir) = dir {
            println!("    wrote {}", dir.display());
        }
        failed += !report.pass as usize;
    }
    Ok(if failed > 0 { 1 } else { 0 })
}
