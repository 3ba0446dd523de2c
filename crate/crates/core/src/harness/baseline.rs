//! Nyquist-rate digital matched filter next to the compressive estimator.

use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::config::{ExperimentConfig, ExperimentKind};
use super::delay::{check_kind, measure};
use super::output::{csv_file, num, opt};
use crate::correlation::{acf_estimate_uniform, estimate_from_trace, UniformGrid};
use crate::error::{CmfError, Result};
use crate::sampling::{RngSpec, Stream};
use crate::templates::{compute_metrics, waveform_many, QuadratureSpec, SignalCase, TemplateKind};

/// Quadrature nodes for the reference waveforms unless configured.
const REFERENCE_NODES: usize = 4096;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BaselineRow {
    pub scheme: String,
    pub sigma_rel: f64,
    pub trial: u64,
    pub tau_hat: f64,
    pub err: f64,
    pub success: bool,
    pub stream_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BaselineSummary {
    pub scheme: String,
    pub sigma_rel: f64,
    pub success_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BaselineResult {
    pub rows: Vec<BaselineRow>,
    pub summary: Vec<BaselineSummary>,
    /// Per scheme, the noise level (in units of `|A|‖ŝ‖₂`) where the success
    /// rate first falls below one half.
    pub half_levels: Vec<(String, Option<f64>)>,
    /// Number of Nyquist samples.
    pub nyquist_samples: usize,
}

/// Level where `rates` first drops below 0.5, interpolated linearly in
/// `log σ` (linearly in `σ` when the bracket starts at zero).
pub fn half_success_level(sigmas: &[f64], rates: &[f64]) -> Option<f64> {
    let first = rates.first()?;
    if *first < 0.5 {
        return None;
    }
    (1..rates.len()).find(|&i| rates[i] < 0.5).map(|i| {
        let (s0, s1) = (sigmas[i - 1], sigmas[i]);
        let (r0, r1) = (rates[i - 1], rates[i]);
        let f = (r0 - 0.5) / (r0 - r1);
        if s0 > 0.0 {
            (s0.ln() + f * (s1.ln() - s0.ln())).exp()
        } else {
            s0 + f * (s1 - s0)
        }
    })
}

fn default_sigma_grid() -> Vec<f64> {
    std::iter::once(0.0)
        .chain((0..25).map(|i| 0.01 * 10f64.powf(i as f64 / 8.0)))
        .collect()
}

/// Success rate against absolute noise level `σ_n = r·|A|‖ŝ‖₂` for the
/// Nyquist-rate matched filter and for the compressive estimator at each
/// configured `m`, both searching the same delay grid. The compressive
/// side runs in the Complex case so both schemes use the magnitude.
pub fn run_nyquist_baseline(cfg: &ExperimentConfig) -> Result<BaselineResult> {
    check_kind(cfg, ExperimentKind::NyquistBaseline)?;
    let band = cfg.band()?;
    let window = cfg.window()?;
    let template = cfg.template()?.with_case(SignalCase::Complex);
    if matches!(template.kind(), TemplateKind::Custom { .. }) {
        return Err(CmfError::Config("nyquist_baseline needs a gaussian or flat template".into()));
    }
    let ms = cfg.counts()?;
    let radius = cfg.success_radius(&template)?;
    let grid = UniformGrid::over_window(window, cfg.grid_step()?)?;
    let taus = grid.points();
    let metrics = compute_metrics(&template, band, cfg.quadrature())?;
    let amplitude = cfg.amplitude.value();
    let tau0 = cfg.tau0()?;
    let unit = amplitude.norm() * metrics.l2();
    let sigmas = cfg.sigma_grid.clone().unwrap_or_else(default_sigma_grid);

    // samples at t_ℓ = ℓ·2π/|Ω| covering T plus a margin
    let spacing = 2.0 * PI / band.width();
    let pad = cfg.baseline_pad.unwrap_or(0.25 * window.length());
    let first = ((window.tau_min() - pad) / spacing).ceil() as i64;
    let last = ((window.tau_max() + pad) / spacing).floor() as i64;
    let times: Vec<f64> = (first..=last).map(|l| l as f64 * spacing).collect();
    let quad = QuadratureSpec::with_nodes(cfg.quadrature_nodes.unwrap_or(REFERENCE_NODES));

    // reference[j][ℓ] = conj(s(t_ℓ - τ_j))
    let reference: Vec<Vec<Complex64>> = taus
        .par_iter()
        .map(|&tau| {
            let shifted: Vec<f64> = times.iter().map(|t| t - tau).collect();
            waveform_many(&template, band, &shifted, quad).map(|v| v.into_iter().map(|z| z.conj()).collect())
        })
        .collect::<Result<_>>()?;
    let clean: Vec<Complex64> = {
        let shifted: Vec<f64> = times.iter().map(|t| t - tau0).collect();
        waveform_many(&template, band, &shifted, quad)?
            .into_iter()
            .map(|s| amplitude * s)
            .collect()
    };
    let noise_scale = (band.width() / (2.0 * PI)).sqrt();

    let mut rows = Vec::new();
    let mut summary = Vec::new();
    let mut schemes: Vec<(String, Vec<f64>)> = Vec::new();

    let mut rates = Vec::new();
    for &r in &sigmas {
        let sigma = r * unit;
        let block: Vec<BaselineRow> = (0..cfg.trials)
            .into_par_iter()
            .map(|trial| {
                let rng = RngSpec::new(cfg.master_seed, trial);
                let mut g = rng.generator(Stream::Noise);
                let y: Vec<Complex64> = clean
                    .iter()
                    .map(|c| if sigma > 0.0 { c + g.complex_gaussian(sigma * noise_scale) } else { *c })
                    .collect();
                let mut best = 0;
                let mut best_val = -1.0;
                for (j, row) in reference.iter().enumerate() {
                    let v: Complex64 = y.iter().zip(row).map(|(a, b)| a * b).sum();
                    let mag = v.norm();
                    if mag > best_val {
                        best_val = mag;
                        best = j;
                    }
                }
                let err = (taus[best] - tau0).abs();
                BaselineRow {
                    scheme: "nyquist".into(),
                    sigma_rel: r,
                    trial,
                    tau_hat: taus[best],
                    err,
                    success: err <= radius,
                    stream_seed: rng.stream_seed(),
                }
            })
            .collect();
        let rate = block.iter().filter(|b| b.success).count() as f64 / cfg.trials as f64;
        rates.push(rate);
        summary.push(BaselineSummary {
            scheme: "nyquist".into(),
            sigma_rel: r,
            success_rate: rate,
        });
        rows.extend(block);
    }
    schemes.push(("nyquist".into(), rates));

    for m in ms {
        let name = format!("compressive_m{m}");
        let mut rates = Vec::new();
        for &r in &sigmas {
            let scene = cfg.scene(r * unit)?;
            let block: Vec<BaselineRow> = (0..cfg.trials)
                .into_par_iter()
                .map(|trial| {
                    let rng = RngSpec::new(cfg.master_seed, trial);
                    let meas = measure(&template, band, &scene, m, rng)?;
                    let trace = acf_estimate_uniform(&meas, &template, &grid)?;
                    let est = estimate_from_trace(&meas, &template, &trace, None)?;
                    let err = (est.tau_hat - tau0).abs();
                    Ok(BaselineRow {
                        scheme: name.clone(),
                        sigma_rel: r,
                        trial,
                        tau_hat: est.tau_hat,
                        err,
                        success: err <= radius,
                        stream_seed: rng.stream_seed(),
                    })
                })
                .collect::<Result<_>>()?;
            let rate = block.iter().filter(|b| b.success).count() as f64 / cfg.trials as f64;
            rates.push(rate);
            summary.push(BaselineSummary {
                scheme: name.clone(),
                sigma_rel: r,
                success_rate: rate,
            });
            rows.extend(block);
        }
        schemes.push((name, rates));
    }

    let half_levels = schemes
        .into_iter()
        .map(|(name, rates)| {
            let level = half_success_level(&sigmas, &rates);
            (name, level)
        })
        .collect();
    Ok(BaselineResult {
        rows,
        summary,
        half_levels,
        nyquist_samples: times.len(),
    })
}

impl BaselineResult {
    pub fn write(&self, dir: &Path) -> Result<Vec<String>> {
        let mut w = csv_file(dir, "baseline.csv")?;
        w.write_record(["scheme", "sigma_rel", "trial", "tau_hat", "err", "success", "stream_seed"])?;
        for r in &self.rows {
            w.write_record([
                r.scheme.clone(),
                num(r.sigma_rel),
                r.trial.to_string(),
                num(r.tau_hat),
                num(r.err),
                u8::from(r.success).to_string(),
                r.stream_seed.to_string(),
            ])?;
        }
        w.flush()?;
        let mut s = csv_file(dir, "baseline_summary.csv")?;
        s.write_record(["scheme", "sigma_rel", "success_rate"])?;
        for r in &self.summary {
            s.write_record([r.scheme.clone(), num(r.sigma_rel), num(r.success_rate)])?;
        }
        s.flush()?;
        let mut h = csv_file(dir, "baseline_half_levels.csv")?;
        h.write_record(["scheme", "half_success_sigma_rel"])?;
        for (name, level) in &self.half_levels {
            h.write_record([name.clone(), opt(*level)])?;
        }
        h.flush()?;
        Ok(vec![
            "baseline.csv".into(),
            "baseline_summary.csv".into(),
            "baseline_half_levels.csv".into(),
        ])
    }
}
