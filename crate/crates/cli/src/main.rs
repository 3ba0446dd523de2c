use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cmf_core::harness::{run_experiment, BoundsConfig, ExperimentConfig, ExperimentKind, TemplateConfig};
use cmf_core::CmfError;

#[derive(Parser)]
#[command(name = "cmf", version, about = "Compressive matched filter experiments and bound reports")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Spectral metrics and autocorrelation of a template.
    Template(Common),
    /// Noiseless demo or bound check.
    Simulate(Common),
    /// Success rate against noise level.
    Sweep(Common),
    /// Every closed-form bound for one configuration.
    Bounds(Common),
    /// Tone frequency recovery from random time samples.
    Tone(Common),
    /// Chirp time-of-arrival recovery.
    Chirp(Common),
    /// Nyquist-rate matched filter next to the compressive estimator.
    Baseline(Common),
}

#[derive(Args)]
struct Common {
    /// JSON configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Override the master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the number of trials.
    #[arg(long)]
    trials: Option<u64>,
    /// Output directory for CSV and JSON artifacts.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn exit_code(err: &CmfError) -> u8 {
    match err {
        CmfError::Config(_) | CmfError::InvalidParameter(_) | CmfError::Precondition(_) | CmfError::Json(_) => 2,
        CmfError::DegenerateMeasurement(_) => 3,
        _ => 1,
    }
}

fn experiment(args: &Common, allowed: &[ExperimentKind]) -> Result<(), CmfError> {
    let mut cfg = ExperimentConfig::from_path(&args.config)?;
    if !allowed.contains(&cfg.kind) {
        let names: Vec<&str> = allowed.iter().map(|k| k.name()).collect();
        return Err(CmfError::Config(format!(
            "config kind {} does not belong to this command (expected {})",
            cfg.kind.name(),
            names.join(" or ")
        )));
    }
    if let Some(seed) = args.seed {
        cfg.master_seed = seed;
    }
    if let Some(trials) = args.trials {
        cfg.trials = trials;
    }
    cfg.validate()?;
    let out = args
        .out
        .clone()
        .or_else(|| cfg.out_dir.clone())
        .unwrap_or_else(|| Path::new("out").join(cfg.kind.name()));
    let result = run_experiment(&cfg)?;
    let files = result.write(&out, &cfg)?;
    println!("{}", result.summary_json()?);
    for f in files {
        eprintln!("wrote {}", out.join(f).display());
    }
    Ok(())
}

fn template(args: &Common) -> Result<(), CmfError> {
    let report = TemplateConfig::from_path(&args.config)?.report()?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    if let Some(out) = &args.out {
        for f in report.write(out)? {
            eprintln!("wrote {}", out.join(f).display());
        }
    }
    Ok(())
}

fn bounds(args: &Common) -> Result<(), CmfError> {
    let report = BoundsConfig::from_path(&args.config)?.report()?;
    let text = serde_json::to_string_pretty(&report)?;
    println!("{text}");
    if let Some(out) = &args.out {
        std::fs::create_dir_all(out)?;
        let path = out.join("bounds.json");
        std::fs::write(&path, text + "\n")?;
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Template(a) => template(a),
        Command::Bounds(a) => bounds(a),
        Command::Simulate(a) => experiment(a, &[ExperimentKind::NoiselessDemo, ExperimentKind::BoundCheck]),
        Command::Sweep(a) => experiment(a, &[ExperimentKind::NoiseSweep]),
        Command::Tone(a) => experiment(a, &[ExperimentKind::Tone]),
        Command::Chirp(a) => experiment(a, &[ExperimentKind::Chirp]),
        Command::Baseline(a) => experiment(a, &[ExperimentKind::NyquistBaseline]),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
