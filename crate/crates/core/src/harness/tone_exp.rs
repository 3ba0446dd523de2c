//! Tone and chirp experiments.

use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::config::{ExperimentConfig, ExperimentKind};
use super::delay::check_kind;
use super::output::{csv_file, num};
use crate::error::{CmfError, Result};
use crate::sampling::{draw_times, synthesize_tone_measurements, RngSpec, Stream};
use crate::tone::{estimate_chirp_toa, estimate_tone, synthesize_chirp_samples, ChirpSpec};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ToneRow {
    pub trial: u64,
    pub omega0: f64,
    pub omega_hat_grid: f64,
    pub omega_hat_refined: f64,
    pub err_grid: f64,
    pub err_refined: f64,
    pub a_hat: Complex64,
    pub stream_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ToneSummary {
    pub trials: u64,
    /// Grid winner within `2π/|T|` of the tone.
    pub grid_within_bin: u64,
    /// Refined estimate within `1e-9·2π/|T|`.
    pub refined_exact: u64,
    pub max_err_grid: f64,
    pub max_err_refined: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ToneResult {
    pub rows: Vec<ToneRow>,
    pub summary: ToneSummary,
}

/// Grid-only versus grid-plus-ascent tone recovery. Without a configured
/// `omega0`, each trial draws its tone uniformly from `Ω`.
pub fn run_tone_experiment(cfg: &ExperimentConfig) -> Result<ToneResult> {
    check_kind(cfg, ExperimentKind::Tone)?;
    let band = cfg.band()?;
    let window = cfg.window()?;
    let m = cfg.single_count()?;
    let amplitude = cfg.amplitude.value();
    let bin = 2.0 * PI / window.length();
    let rows: Vec<ToneRow> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| {
            let rng = RngSpec::new(cfg.master_seed, trial);
            let omega0 = match cfg.omega0 {
                Some(w) => w,
                None => rng.generator(Stream::Truth).uniform(band.lo(), band.hi()),
            };
            let times = draw_times(window, m as usize, rng)?;
            let meas = synthesize_tone_measurements(omega0, amplitude, cfg.sigma_n, window, times, rng)?;
            let est = estimate_tone(&meas, band, cfg.tol)?;
            Ok(ToneRow {
                trial,
                omega0,
                omega_hat_grid: est.grid_point,
                omega_hat_refined: est.omega_hat,
                err_grid: (est.grid_point - omega0).abs(),
                err_refined: (est.omega_hat - omega0).abs(),
                a_hat: est.a_hat,
                stream_seed: rng.stream_seed(),
            })
        })
        .collect::<Result<_>>()?;
    let summary = ToneSummary {
        trials: cfg.trials,
        grid_within_bin: rows.iter().filter(|r| r.err_grid <= bin).count() as u64,
        refined_exact: rows.iter().filter(|r| r.err_refined <= 1e-9 * bin).count() as u64,
        max_err_grid: rows.iter().map(|r| r.err_grid).fold(0.0, f64::max),
        max_err_refined: rows.iter().map(|r| r.err_refined).fold(0.0, f64::max),
    };
    Ok(ToneResult { rows, summary })
}

impl ToneResult {
    pub fn write(&self, dir: &Path) -> Result<Vec<String>> {
        let mut w = csv_file(dir, "tone.csv")?;
        w.write_record(["trial", "omega_hat_grid", "omega_hat_refined", "err_grid", "err_refined", "omega0", "stream_seed"])?;
        for r in &self.rows {
            w.write_record([
                r.trial.to_string(),
                num(r.omega_hat_grid),
                num(r.omega_hat_refined),
                num(r.err_grid),
                num(r.err_refined),
                num(r.omega0),
                r.stream_seed.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(vec!["tone.csv".into()])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChirpRow {
    pub trial: u64,
    pub t0: f64,
    pub t0_hat: f64,
    pub err: f64,
    pub stream_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChirpResult {
    pub rows: Vec<ChirpRow>,
    pub max_err: f64,
}

/// End-to-end time-of-arrival recovery from random samples of a chirp.
pub fn run_chirp_demo(cfg: &ExperimentConfig) -> Result<ChirpResult> {
    check_kind(cfg, ExperimentKind::Chirp)?;
    let band = cfg.band()?;
    let window = cfg.window()?;
    let m = cfg.single_count()?;
    let chirp = cfg
        .chirp
        .as_ref()
        .ok_or_else(|| CmfError::Config("chirp experiment needs a chirp section".into()))?;
    let [lo, hi] = chirp.t0_range;
    if chirp.t0.is_none() && !(hi > lo) {
        return Err(CmfError::Config("chirp t0_range must be increasing".into()));
    }
    let reach = chirp.alpha.abs() * chirp.t0.map_or(lo.abs().max(hi.abs()), f64::abs);
    if reach > band.omega_max() {
        return Err(CmfError::Config(format!(
            "de-chirped tone can reach {reach} rad/s, beyond omega_max = {}",
            band.omega_max()
        )));
    }
    let amplitude = cfg.amplitude.value();
    let rows: Vec<ChirpRow> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| {
            let rng = RngSpec::new(cfg.master_seed, trial);
            let t0 = chirp
                .t0
                .unwrap_or_else(|| rng.generator(Stream::Truth).uniform(lo, hi));
            let spec = ChirpSpec::new(chirp.omega_c, chirp.alpha, t0, amplitude).map_err(|e| CmfError::Config(e.to_string()))?;
            let times = draw_times(window, m as usize, rng)?;
            let samples = synthesize_chirp_samples(&spec, window, times, cfg.sigma_n, rng)?;
            let est = estimate_chirp_toa(&samples, spec.omega_c, spec.alpha, band, cfg.tol)?;
            Ok(ChirpRow {
                trial,
                t0,
                t0_hat: est.t0_hat,
                err: (est.t0_hat - t0).abs(),
                stream_seed: rng.stream_seed(),
            })
        })
        .collect::<Result<_>>()?;
    let max_err = rows.iter().map(|r| r.err).fold(0.0, f64::max);
    Ok(ChirpResult { rows, max_err })
}

impl ChirpResult {
    pub fn write(&self, dir: &Path) -> Result<Vec<String>> {
        let mut w = csv_file(dir, "chirp.csv")?;
        w.write_record(["trial", "t0", "t0_hat", "err", "stream_seed"])?;
        for r in &self.rows {
            w.write_record([
                r.trial.to_string(),
                num(r.t0),
                num(r.t0_hat),
                num(r.err),
                r.stream_seed.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(vec!["chirp.csv".into()])
    }
}
