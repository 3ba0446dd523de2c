//! Inputs of the non-Monte-Carlo commands: template inspection and bound
//! reports.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::output::{csv_file, num};
use crate::bounds::{BoundReport, ProblemConfig};
use crate::error::{CmfError, Result};
use crate::templates::{
    autocorrelation_many, compute_metrics, lobe_profile, FrequencyBand, LobeScan, QuadratureSpec, SignalCase,
    SpectralMetrics, Template, TemplateSpec,
};

fn config_err(msg: impl Into<String>) -> CmfError {
    CmfError::Config(msg.into())
}

fn parse<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| config_err(e.to_string()))
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))
}

fn default_points() -> usize {
    801
}

/// A template on a band, with the shift range for its autocorrelation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TemplateConfig {
    pub template: TemplateSpec,
    pub omega_max: f64,
    /// Autocorrelation is tabulated on `[-acf_span, acf_span]`; defaults to
    /// `8π/ω_max`.
    #[serde(default)]
    pub acf_span: Option<f64>,
    #[serde(default = "default_points")]
    pub acf_points: usize,
    #[serde(default)]
    pub quadrature_nodes: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TemplateReport {
    pub case: SignalCase,
    pub approximate: bool,
    pub metrics: SpectralMetrics,
    /// `R_ss(0) = ‖ŝ‖₂²/2π`.
    pub r0: f64,
    /// `(τ, R_ss(τ))`.
    #[serde(skip)]
    pub acf: Vec<(f64, f64, f64)>,
}

impl TemplateConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = parse(text)?;
        cfg.band()?;
        if cfg.acf_points < 2 {
            return Err(config_err("acf_points must be at least 2"));
        }
        if let Some(s) = cfg.acf_span {
            if !(s.is_finite() && s > 0.0) {
                return Err(config_err("acf_span must be positive"));
            }
        }
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_json(&read(path)?)
    }

    pub fn band(&self) -> Result<FrequencyBand> {
        FrequencyBand::new(self.omega_max).map_err(|e| config_err(e.to_string()))
    }

    fn quadrature(&self) -> QuadratureSpec {
        self.quadrature_nodes
            .map(QuadratureSpec::with_nodes)
            .unwrap_or_default()
    }

    pub fn report(&self) -> Result<TemplateReport> {
        let band = self.band()?;
        let template = self.template.build(band).map_err(|e| config_err(e.to_string()))?;
        let quad = self.quadrature();
        let metrics = compute_metrics(&template, band, quad)?;
        let span = self.acf_span.unwrap_or(8.0 * PI / self.omega_max);
        let n = self.acf_points - 1;
        let taus: Vec<f64> = (0..=n).map(|i| -span + (2.0 * span * i as f64) / n as f64).collect();
        let values = autocorrelation_many(&template, band, &taus, quad)?;
        Ok(TemplateReport {
            case: template.case(),
            approximate: template.is_approximate(),
            metrics,
            r0: metrics.l2sq / (2.0 * PI),
            acf: taus.iter().zip(&values).map(|(t, v)| (*t, v.re, v.im)).collect(),
        })
    }
}

impl TemplateReport {
    pub fn write(&self, dir: &Path) -> Result<Vec<String>> {
        let mut w = csv_file(dir, "autocorrelation.csv")?;
        w.write_record(["tau", "re", "im"])?;
        for (t, re, im) in &self.acf {
            w.write_record([num(*t), num(*re), num(*im)])?;
        }
        w.flush()?;
        std::fs::write(dir.join("template.json"), serde_json::to_string_pretty(self)? + "\n")?;
        Ok(vec!["autocorrelation.csv".into(), "template.json".into()])
    }
}

fn default_delta() -> f64 {
    0.1
}

fn default_amplitude() -> f64 {
    1.0
}

/// Parameters of a bound report. The template fills `μ₁`, `μ₂` and `‖ŝ‖₂²`
/// unless they are given explicitly; with `alpha2` set and `alpha1` absent,
/// the sidelobe level is measured from the template.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsConfig {
    #[serde(default)]
    pub template: Option<TemplateSpec>,
    pub omega_max: f64,
    pub window_length: f64,
    pub m: u64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_amplitude")]
    pub amplitude: f64,
    #[serde(default)]
    pub sigma_n: f64,
    #[serde(default)]
    pub alpha1: Option<f64>,
    #[serde(default)]
    pub alpha2: Option<f64>,
    #[serde(default)]
    pub epsilon: f64,
    #[serde(default)]
    pub mu1: Option<f64>,
    #[serde(default)]
    pub mu2: Option<f64>,
    #[serde(default)]
    pub energy: Option<f64>,
    #[serde(default)]
    pub quadrature_nodes: Option<usize>,
}

impl BoundsConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        parse(text)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_json(&read(path)?)
    }

    pub fn problem(&self) -> Result<ProblemConfig> {
        let band = FrequencyBand::new(self.omega_max).map_err(|e| config_err(e.to_string()))?;
        let quad = self
            .quadrature_nodes
            .map(QuadratureSpec::with_nodes)
            .unwrap_or_default();
        let template: Option<Template> = self
            .template
            .as_ref()
            .map(|spec| spec.build(band).map_err(|e| config_err(e.to_string())))
            .transpose()?;
        let metrics = template
            .as_ref()
            .map(|t| compute_metrics(t, band, quad))
            .transpose()?;
        let pick = |given: Option<f64>, name: &str, from: fn(&SpectralMetrics) -> f64| {
            given
                .or_else(|| metrics.as_ref().map(from))
                .ok_or_else(|| config_err(format!("{name} needs a template or an explicit value")))
        };
        let alpha2 = self.alpha2.unwrap_or(self.window_length);
        let alpha1 = match (self.alpha1, self.alpha2, &template) {
            (Some(a), _, _) => a,
            (None, Some(a2), Some(t)) if a2 < self.window_length => {
                lobe_profile(t, band, a2, LobeScan::new(self.window_length), quad)?
            }
            _ => 0.0,
        };
        Ok(ProblemConfig {
            m: self.m,
            delta: self.delta,
            mu1: pick(self.mu1, "mu1", |m| m.mu1)?,
            mu2: pick(self.mu2, "mu2", |m| m.mu2)?,
            energy: pick(self.energy, "energy", |m| m.l2sq)?,
            omega_width: band.width(),
            window_length: self.window_length,
            amplitude: self.amplitude,
            sigma_n: self.sigma_n,
            alpha1,
            alpha2,
            epsilon: self.epsilon,
        })
    }

    pub fn report(&self) -> Result<BoundReport> {
        BoundReport::evaluate(&self.problem()?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_template_report() {
        let cfg = TemplateConfig::from_json(r#"{"template": {"kind": "flat", "level": 1}, "omega_max": 100}"#).unwrap();
        let r = cfg.report().unwrap();
        assert!((r.metrics.mu1 - 1.0).abs() < 1e-9);
        assert!((r.r0 - 200.0 / (2.0 * PI)).abs() < 1e-9);
        assert_eq!(r.acf.len(), 801);
        // middle of the table is τ = 0
        assert!((r.acf[400].1 - r.r0).abs() < 1e-9);
    }

    #[test]
    fn bounds_from_template_or_numbers() {
        let from_template = BoundsConfig::from_json(
            r#"{"template": {"kind": "flat", "level": 1}, "omega_max": 50, "window_length": 1, "m": 100}"#,
        )
        .unwrap()
        .problem()
        .unwrap();
        assert!((from_template.energy - 100.0).abs() < 1e-9);
        let explicit = BoundsConfig::from_json(
            r#"{"omega_max": 50, "window_length": 1, "m": 100, "mu1": 1, "mu2": 1, "energy": 100}"#,
        )
        .unwrap()
        .problem()
        .unwrap();
        assert_eq!(explicit.mu1, 1.0);
        assert_eq!(explicit.alpha1, 0.0);
        let missing = BoundsConfig::from_json(r#"{"omega_max": 50, "window_length": 1, "m": 100}"#).unwrap();
        assert!(matches!(missing.problem(), Err(CmfError::Config(_))));
    }

    #[test]
    fn sidelobe_measured_when_alpha2_given() {
        let cfg = BoundsConfig::from_json(
            r#"{"template": {"kind": "flat", "level": 1}, "omega_max": 600, "window_length": 1, "m": 100,
                "alpha2": 0.0105}"#,
        )
        .unwrap();
        let p = cfg.problem().unwrap();
        assert!(p.alpha1 > 0.1 && p.alpha1 < 0.25, "alpha1 = {}", p.alpha1);
    }
}
