//! Delay-estimation experiments: noiseless demo, noise sweep, bound check.

use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::config::{ExperimentConfig, ExperimentKind};
use super::output::{csv_file, num, opt};
use crate::bounds::{expected_sup_bound, noise_expected_sup_bound, ProblemConfig};
use crate::correlation::{
    acf_estimate_uniform, deviation_supremum_with_truth, estimate_from_trace, truth_curve, CorrelationTrace,
    UniformGrid,
};
use crate::error::{CmfError, Result};
use crate::sampling::{draw_frequencies, synthesize_delay_measurements, DelayMeasurements, DelayScene, RngSpec};
use crate::templates::{compute_metrics, FrequencyBand, Template};

pub(crate) fn check_kind(cfg: &ExperimentConfig, kind: ExperimentKind) -> Result<()> {
    if cfg.kind != kind {
        return Err(CmfError::Config(format!(
            "expected a {} config, got {}",
            kind.name(),
            cfg.kind.name()
        )));
    }
    Ok(())
}

pub(crate) fn measure(
    template: &Template,
    band: FrequencyBand,
    scene: &DelayScene,
    m: u64,
    rng: RngSpec,
) -> Result<DelayMeasurements> {
    let freqs = draw_frequencies(band, m as usize, rng)?;
    synthesize_delay_measurements(template, band, scene, freqs, rng)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DemoRow {
    pub m: u64,
    pub trial: u64,
    pub tau_hat: f64,
    pub err: f64,
    pub a_hat: Complex64,
    pub peak_value: f64,
    pub runner_up_gap: Option<f64>,
    pub stream_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DemoSummary {
    pub m: u64,
    pub trials: u64,
    pub exact_hits: u64,
    pub mean_runner_up_gap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DemoResult {
    pub rows: Vec<DemoRow>,
    pub summary: Vec<DemoSummary>,
    /// Trace of trial 0 for each `m`.
    pub traces: Vec<(u64, CorrelationTrace)>,
    /// `A·R_ss(τ - τ₀)` on the search grid.
    pub truth: Vec<Complex64>,
    pub eta: f64,
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0u64), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Noiseless runs for each configured `m`: exact-peak hits and the gap to
/// the largest value outside the main lobe.
pub fn run_noiseless_demo(cfg: &ExperimentConfig) -> Result<DemoResult> {
    check_kind(cfg, ExperimentKind::NoiselessDemo)?;
    if cfg.sigma_n != 0.0 {
        return Err(CmfError::Config("noiseless_demo requires sigma_n = 0".into()));
    }
    let band = cfg.band()?;
    let window = cfg.window()?;
    let template = cfg.template()?;
    let scene = cfg.scene(0.0)?;
    let alpha2 = cfg.lobe_radius(&template)?;
    let grid = UniformGrid::over_window(window, cfg.grid_step()?)?;
    let metrics = compute_metrics(&template, band, cfg.quadrature())?;
    let truth = truth_curve(&template, band, &scene, &grid.points(), cfg.quadrature())?;

    let mut rows = Vec::new();
    let mut traces = Vec::new();
    let mut summary = Vec::new();
    for m in cfg.counts()? {
        let per_m: Vec<(DemoRow, Option<CorrelationTrace>)> = (0..cfg.trials)
            .into_par_iter()
            .map(|trial| {
                let rng = RngSpec::new(cfg.master_seed, trial);
                let meas = measure(&template, band, &scene, m, rng)?;
                let trace = acf_estimate_uniform(&meas, &template, &grid)?;
                let est = estimate_from_trace(&meas, &template, &trace, Some(alpha2))?;
                let row = DemoRow {
                    m,
                    trial,
                    tau_hat: est.tau_hat,
                    err: (est.tau_hat - scene.tau0).abs(),
                    a_hat: est.a_hat,
                    peak_value: est.peak_value,
                    runner_up_gap: est.runner_up_gap,
                    stream_seed: rng.stream_seed(),
                };
                Ok((row, (trial == 0).then_some(trace)))
            })
            .collect::<Result<_>>()?;
        let mut m_rows = Vec::with_capacity(per_m.len());
        for (row, trace) in per_m {
            if let Some(t) = trace {
                traces.push((m, t));
            }
            m_rows.push(row);
        }
        summary.push(DemoSummary {
            m,
            trials: cfg.trials,
            exact_hits: m_rows.iter().filter(|r| r.tau_hat == scene.tau0).count() as u64,
            mean_runner_up_gap: mean(m_rows.iter().filter_map(|r| r.runner_up_gap)),
        });
        rows.extend(m_rows);
    }
    Ok(DemoResult {
        rows,
        summary,
        traces,
        truth,
        eta: metrics.eta(scene.amplitude.norm()),
    })
}

impl DemoResult {
    pub fn write(&self, dir: &Path) -> Result<Vec<String>> {
        let mut files = Vec::new();
        let mut w = csv_file(dir, "demo.csv")?;
        w.write_record(["m", "trial", "tau_hat", "err", "a_hat_re", "a_hat_im", "peak_value", "runner_up_gap", "stream_seed"])?;
        for r in &self.rows {
            w.write_record([
                r.m.to_string(),
                r.trial.to_string(),
                num(r.tau_hat),
                num(r.err),
                num(r.a_hat.re),
                num(r.a_hat.im),
                num(r.peak_value),
                opt(r.runner_up_gap),
                r.stream_seed.to_string(),
            ])?;
        }
        w.flush()?;
        files.push("demo.csv".to_string());

        for (m, trace) in &self.traces {
            let name = format!("trace_m{m}.csv");
            trace.write_csv(std::fs::File::create(dir.join(&name))?)?;
            files.push(name);
        }
        if let Some((_, first)) = self.traces.first() {
            let truth = CorrelationTrace {
                taus: first.taus.clone(),
                values: self.truth.clone(),
                scale: 1.0,
                case: first.case,
            };
            truth.write_csv(std::fs::File::create(dir.join("truth.csv"))?)?;
            files.push("truth.csv".to_string());
        }
        Ok(files)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub c: f64,
    pub trial: u64,
    pub tau_hat: f64,
    pub err: f64,
    pub success: bool,
    pub runner_up_gap: Option<f64>,
    pub stream_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSummary {
    pub c: f64,
    pub trials: u64,
    pub successes: u64,
    pub success_rate: f64,
    pub mean_abs_err: f64,
    pub mean_runner_up_gap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub m: u64,
    /// `|A|‖ŝ‖₂√(m/|Ω|)`; the noise level is `c` times this.
    pub sigma_unit: f64,
    pub success_radius: f64,
    pub rows: Vec<SweepRow>,
    pub summary: Vec<SweepSummary>,
}

/// Success rate of delay estimation against `σ_n = c·|A|‖ŝ‖₂√(m/|Ω|)`.
///
/// Trial `i` uses stream `i` at every noise level, so the curves share
/// frequencies and noise shapes across `c`.
pub fn run_noise_sweep(cfg: &ExperimentConfig) -> Result<SweepResult> {
    check_kind(cfg, ExperimentKind::NoiseSweep)?;
    let band = cfg.band()?;
    let window = cfg.window()?;
    let template = cfg.template()?;
    let m = cfg.single_count()?;
    let radius = cfg.success_radius(&template)?;
    let alpha2 = cfg.lobe_radius(&template)?;
    let step = cfg.grid_step()?;
    let grid = UniformGrid::over_window(window, step)?;
    let metrics = compute_metrics(&template, band, cfg.quadrature())?;
    let amplitude = cfg.amplitude.value();
    let sigma_unit = amplitude.norm() * metrics.l2() * (m as f64 / band.width()).sqrt();

    let mut rows = Vec::new();
    let mut summary = Vec::new();
    for c in cfg.c_values() {
        let scene = cfg.scene(c * sigma_unit)?;
        let c_rows: Vec<SweepRow> = (0..cfg.trials)
            .into_par_iter()
            .map(|trial| {
                let rng = RngSpec::new(cfg.master_seed, trial);
                let meas = measure(&template, band, &scene, m, rng)?;
                let trace = acf_estimate_uniform(&meas, &template, &grid)?;
                let est = estimate_from_trace(&meas, &template, &trace, Some(alpha2))?;
                let err = (est.tau_hat - scene.tau0).abs();
                Ok(SweepRow {
                    c,
                    trial,
                    tau_hat: est.tau_hat,
                    err,
                    success: err <= radius,
                    runner_up_gap: est.runner_up_gap,
                    stream_seed: rng.stream_seed(),
                })
            })
            .collect::<Result<_>>()?;
        let successes = c_rows.iter().filter(|r| r.success).count() as u64;
        summary.push(SweepSummary {
            c,
            trials: cfg.trials,
            successes,
            success_rate: successes as f64 / cfg.trials as f64,
            mean_abs_err: mean(c_rows.iter().map(|r| r.err)).unwrap_or(0.0),
            mean_runner_up_gap: mean(c_rows.iter().filter_map(|r| r.runner_up_gap)),
        });
        rows.extend(c_rows);
    }
    Ok(SweepResult {
        m,
        sigma_unit,
        success_radius: radius,
        rows,
        summary,
    })
}

impl SweepResult {
    pub fn write(&self, dir: &Path) -> Result<Vec<String>> {
        let mut w = csv_file(dir, "sweep.csv")?;
        w.write_record(["c", "trial", "tau_hat", "err", "success", "stream_seed"])?;
        for r in &self.rows {
            w.write_record([
                num(r.c),
                r.trial.to_string(),
                num(r.tau_hat),
                num(r.err),
                u8::from(r.success).to_string(),
                r.stream_seed.to_string(),
            ])?;
        }
        w.flush()?;
        let mut s = csv_file(dir, "sweep_summary.csv")?;
        s.write_record(["c", "trials", "successes", "success_rate", "mean_abs_err", "mean_runner_up_gap"])?;
        for r in &self.summary {
            s.write_record([
                num(r.c),
                r.trials.to_string(),
                r.successes.to_string(),
                num(r.success_rate),
                num(r.mean_abs_err),
                opt(r.mean_runner_up_gap),
            ])?;
        }
        s.flush()?;
        Ok(vec!["sweep.csv".into(), "sweep_summary.csv".into()])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundCheckRow {
    pub m: u64,
    pub trial: u64,
    pub sup_dev: f64,
    pub theory_bound: f64,
    pub sup_noise: Option<f64>,
    pub noise_theory_bound: Option<f64>,
    pub stream_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundCheckSummary {
    pub m: u64,
    pub trials: u64,
    pub mean_sup_dev: f64,
    pub theory_bound: f64,
    pub ratio: f64,
    pub mean_sup_noise: Option<f64>,
    pub noise_theory_bound: Option<f64>,
    pub noise_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundCheckResult {
    pub rows: Vec<BoundCheckRow>,
    pub summary: Vec<BoundCheckSummary>,
}

/// Monte Carlo means of the grid suprema of `|R̃_ss - A·R_ss|` (noiseless
/// estimate) and of `|Ñ|` (noise part), next to their expectation bounds.
/// Grid suprema are lower bounds of the true suprema.
pub fn run_bound_check(cfg: &ExperimentConfig) -> Result<BoundCheckResult> {
    check_kind(cfg, ExperimentKind::BoundCheck)?;
    let band = cfg.band()?;
    let window = cfg.window()?;
    let template = cfg.template()?;
    let clean_scene = cfg.scene(0.0)?;
    let noisy_scene = cfg.scene(cfg.sigma_n)?;
    let grid = UniformGrid::over_window(window, cfg.grid_step()?)?;
    let metrics = compute_metrics(&template, band, cfg.quadrature())?;
    let truth = truth_curve(&template, band, &clean_scene, &grid.points(), cfg.quadrature())?;
    let noisy = cfg.sigma_n > 0.0;

    let mut rows = Vec::new();
    let mut summary = Vec::new();
    for m in cfg.counts()? {
        let mut problem = ProblemConfig::from_metrics(&metrics, window.length());
        problem.m = m;
        problem.amplitude = clean_scene.amplitude.norm();
        problem.sigma_n = cfg.sigma_n;
        let bound = expected_sup_bound(&problem)?.simplified;
        let noise_bound = noisy
            .then(|| noise_expected_sup_bound(&problem).map(|b| b.simplified))
            .transpose()?;
        let m_rows: Vec<BoundCheckRow> = (0..cfg.trials)
            .into_par_iter()
            .map(|trial| {
                let rng = RngSpec::new(cfg.master_seed, trial);
                let clean = measure(&template, band, &clean_scene, m, rng)?;
                let trace = acf_estimate_uniform(&clean, &template, &grid)?;
                let sup_dev = deviation_supremum_with_truth(&trace, &truth)?;
                let sup_noise = if noisy {
                    let with_noise = measure(&template, band, &noisy_scene, m, rng)?;
                    let mut noise_only = clean.clone();
                    for (n, (a, b)) in noise_only.y.iter_mut().zip(with_noise.y.iter().zip(&clean.y)) {
                        *n = a - b;
                    }
                    let noise_trace = acf_estimate_uniform(&noise_only, &template, &grid)?;
                    Some(noise_trace.values.iter().map(|v| v.norm()).fold(0.0, f64::max))
                } else {
                    None
                };
                Ok(BoundCheckRow {
                    m,
                    trial,
                    sup_dev,
                    theory_bound: bound,
                    sup_noise,
                    noise_theory_bound: noise_bound,
                    stream_seed: rng.stream_seed(),
                })
            })
            .collect::<Result<_>>()?;
        let mean_sup_dev = mean(m_rows.iter().map(|r| r.sup_dev)).unwrap_or(0.0);
        let mean_sup_noise = mean(m_rows.iter().filter_map(|r| r.sup_noise));
        summary.push(BoundCheckSummary {
            m,
            trials: cfg.trials,
            mean_sup_dev,
            theory_bound: bound,
            ratio: mean_sup_dev / bound,
            mean_sup_noise,
            noise_theory_bound: noise_bound,
            noise_ratio: mean_sup_noise.zip(noise_bound).map(|(e, b)| e / b),
        });
        rows.extend(m_rows);
    }
    Ok(BoundCheckResult { rows, summary })
}

impl BoundCheckResult {
    pub fn write(&self, dir: &Path) -> Result<Vec<String>> {
        let mut w = csv_file(dir, "bound_check.csv")?;
        w.write_record(["m", "trial", "sup_dev", "theory_bound", "sup_noise", "noise_theory_bound", "stream_seed"])?;
        for r in &self.rows {
            w.write_record([
                r.m.to_string(),
                r.trial.to_string(),
                num(r.sup_dev),
                num(r.theory_bound),
                opt(r.sup_noise),
                opt(r.noise_theory_bound),
                r.stream_seed.to_string(),
            ])?;
        }
        w.flush()?;
        let mut s = csv_file(dir, "bound_check_summary.csv")?;
        s.write_record(["m", "trials", "mean_sup_dev", "theory_bound", "ratio", "mean_sup_noise", "noise_theory_bound", "noise_ratio"])?;
        for r in &self.summary {
            s.write_record([
                r.m.to_string(),
                r.trials.to_string(),
                num(r.mean_sup_dev),
                num(r.theory_bound),
                num(r.ratio),
                opt(r.mean_sup_noise),
                opt(r.noise_theory_bound),
                opt(r.noise_ratio),
            ])?;
        }
        s.flush()?;
        Ok(vec!["bound_check.csv".into(), "bound_check_summary.csv".into()])
    }
}
