//! Monte Carlo experiments and their CSV/JSON artifacts.
//!
//! Trial `i` of every experiment draws from `RngSpec { master_seed, i }`;
//! trials run in parallel and are collected in trial order, so outputs do
//! not depend on the thread count.

mod baseline;
pub mod config;
mod delay;
mod inputs;
pub mod output;
mod tone_exp;

use std::path::Path;

use serde::Serialize;

pub use baseline::{half_success_level, run_nyquist_baseline, BaselineResult, BaselineRow, BaselineSummary};
pub use config::{AmplitudeSpec, ChirpConfig, Counts, ExperimentConfig, ExperimentKind};
pub use delay::{
    run_bound_check, run_noise_sweep, run_noiseless_demo, BoundCheckResult, BoundCheckRow, BoundCheckSummary,
    DemoResult, DemoRow, DemoSummary, SweepResult, SweepRow, SweepSummary,
};
pub use inputs::{BoundsConfig, TemplateConfig, TemplateReport};
pub use output::{config_hash, write_manifest, RunManifest};
pub use tone_exp::{run_chirp_demo, run_tone_experiment, ChirpResult, ChirpRow, ToneResult, ToneRow, ToneSummary};

use crate::error::Result;

#[derive(Debug, Clone, PartialEq)]
pub enum ExperimentOutput {
    Demo(DemoResult),
    Sweep(SweepResult),
    BoundCheck(BoundCheckResult),
    Tone(ToneResult),
    Chirp(ChirpResult),
    Baseline(BaselineResult),
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    Ok(match cfg.kind {
        ExperimentKind::NoiselessDemo => ExperimentOutput::Demo(run_noiseless_demo(cfg)?),
        ExperimentKind::NoiseSweep => ExperimentOutput::Sweep(run_noise_sweep(cfg)?),
        ExperimentKind::BoundCheck => ExperimentOutput::BoundCheck(run_bound_check(cfg)?),
        ExperimentKind::Tone => ExperimentOutput::Tone(run_tone_experiment(cfg)?),
        ExperimentKind::Chirp => ExperimentOutput::Chirp(run_chirp_demo(cfg)?),
        ExperimentKind::NyquistBaseline => ExperimentOutput::Baseline(run_nyquist_baseline(cfg)?),
    })
}

#[derive(Serialize)]
struct DemoDigest<'a> {
    eta: f64,
    summary: &'a [DemoSummary],
}

#[derive(Serialize)]
struct BaselineDigest<'a> {
    nyquist_samples: usize,
    half_levels: &'a [(String, Option<f64>)],
}

impl ExperimentOutput {
    /// Writes the CSV files and `manifest.json` into `dir`; returns the file
    /// names in writing order.
    pub fn write(&self, dir: &Path, cfg: &ExperimentConfig) -> Result<Vec<String>> {
        std::fs::create_dir_all(dir)?;
        let mut files = match self {
            ExperimentOutput::Demo(r) => r.write(dir)?,
            ExperimentOutput::Sweep(r) => r.write(dir)?,
            ExperimentOutput::BoundCheck(r) => r.write(dir)?,
            ExperimentOutput::Tone(r) => r.write(dir)?,
            ExperimentOutput::Chirp(r) => r.write(dir)?,
            ExperimentOutput::Baseline(r) => r.write(dir)?,
        };
        write_manifest(dir, cfg, &files)?;
        files.push("manifest.json".to_string());
        Ok(files)
    }

    /// Compact JSON summary for terminal output.
    pub fn summary_json(&self) -> Result<String> {
        Ok(match self {
            ExperimentOutput::Demo(r) => serde_json::to_string_pretty(&DemoDigest {
                eta: r.eta,
                summary: &r.summary,
            })?,
            ExperimentOutput::Sweep(r) => serde_json::to_string_pretty(&r.summary)?,
            ExperimentOutput::BoundCheck(r) => serde_json::to_string_pretty(&r.summary)?,
            ExperimentOutput::Tone(r) => serde_json::to_string_pretty(&r.summary)?,
            ExperimentOutput::Chirp(r) => serde_json::to_string_pretty(&serde_json::json!({ "max_err": r.max_err }))?,
            ExperimentOutput::Baseline(r) => serde_json::to_string_pretty(&BaselineDigest {
                nyquist_samples: r.nyquist_samples,
                half_levels: &r.half_levels,
            })?,
        })
    }
}
