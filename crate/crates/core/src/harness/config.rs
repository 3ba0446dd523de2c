use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::correlation::default_grid_step;
use crate::error::{CmfError, Result};
use crate::sampling::DelayScene;
use crate::templates::{FrequencyBand, QuadratureSpec, SearchWindow, Template, TemplateKind, TemplateSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    NoiselessDemo,
    NoiseSweep,
    BoundCheck,
    Tone,
    Chirp,
    NyquistBaseline,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::NoiselessDemo => "noiseless_demo",
            ExperimentKind::NoiseSweep => "noise_sweep",
            ExperimentKind::BoundCheck => "bound_check",
            ExperimentKind::Tone => "tone",
            ExperimentKind::Chirp => "chirp",
            ExperimentKind::NyquistBaseline => "nyquist_baseline",
        }
    }
}

/// `1.0` or `[re, im]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AmplitudeSpec {
    Real(f64),
    Complex([f64; 2]),
}

impl AmplitudeSpec {
    pub fn value(&self) -> Complex64 {
        match *self {
            AmplitudeSpec::Real(a) => Complex64::new(a, 0.0),
            AmplitudeSpec::Complex([re, im]) => Complex64::new(re, im),
        }
    }
}

impl Default for AmplitudeSpec {
    fn default() -> Self {
        AmplitudeSpec::Real(1.0)
    }
}

/// A single sample count or a list of them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Counts {
    One(u64),
    Many(Vec<u64>),
}

impl Default for Counts {
    fn default() -> Self {
        Counts::Many(Vec::new())
    }
}

impl Counts {
    pub fn values(&self) -> Vec<u64> {
        match self {
            Counts::One(m) => vec![*m],
            Counts::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChirpConfig {
    pub omega_c: f64,
    pub alpha: f64,
    /// Fixed time-of-arrival; drawn uniformly from `t0_range` per trial when absent.
    #[serde(default)]
    pub t0: Option<f64>,
    #[serde(default = "default_t0_range")]
    pub t0_range: [f64; 2],
}

fn default_t0_range() -> [f64; 2] {
    [0.0, 1.0]
}

fn default_trials() -> u64 {
    1000
}

fn default_delta() -> f64 {
    0.1
}

/// One experiment, as read from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    #[serde(default)]
    pub template: Option<TemplateSpec>,
    /// `Ω = [-omega_max, omega_max]`.
    pub omega_max: f64,
    /// `T`: delays for the pulse problems, sample times for tone and chirp.
    pub window: [f64; 2],
    #[serde(default)]
    pub amplitude: AmplitudeSpec,
    #[serde(default)]
    pub tau0: Option<f64>,
    #[serde(default)]
    pub sigma_n: f64,
    #[serde(default)]
    pub m: Counts,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default)]
    pub master_seed: u64,
    /// Noise levels as multiples of `|A|‖ŝ‖₂√(m/|Ω|)`.
    #[serde(default)]
    pub c_grid: Option<Vec<f64>>,
    #[serde(default)]
    pub success_radius: Option<f64>,
    #[serde(default)]
    pub grid_step: Option<f64>,
    #[serde(default)]
    pub alpha1: Option<f64>,
    #[serde(default)]
    pub alpha2: Option<f64>,
    #[serde(default)]
    pub epsilon: f64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default)]
    pub quadrature_nodes: Option<usize>,
    /// Tone frequency; drawn uniformly from `Ω` per trial when absent.
    #[serde(default)]
    pub omega0: Option<f64>,
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub chirp: Option<ChirpConfig>,
    /// Baseline noise levels as multiples of `|A|‖ŝ‖₂`.
    #[serde(default)]
    pub sigma_grid: Option<Vec<f64>>,
    /// Extra time covered by the Nyquist samples on each side of `T`.
    #[serde(default)]
    pub baseline_pad: Option<f64>,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
}

fn config_err(msg: impl Into<String>) -> CmfError {
    CmfError::Config(msg.into())
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| config_err(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.band()?;
        self.window()?;
        if self.trials == 0 {
            return Err(config_err("trials must be at least 1"));
        }
        if self.m.values().contains(&0) {
            return Err(config_err("sample counts must be at least 1"));
        }
        if let Some(c) = &self.c_grid {
            if c.is_empty() || c.iter().any(|x| !(0.0..=1.0).contains(x)) {
                return Err(config_err("c_grid values must lie in [0, 1]"));
            }
        }
        if !(self.sigma_n.is_finite() && self.sigma_n >= 0.0) {
            return Err(config_err("sigma_n must be non-negative"));
        }
        if let Some(s) = &self.sigma_grid {
            if s.is_empty() || s.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
                return Err(config_err("sigma_grid values must be non-negative"));
            }
        }
        Ok(())
    }

    pub fn band(&self) -> Result<FrequencyBand> {
        FrequencyBand::new(self.omega_max).map_err(|e| config_err(e.to_string()))
    }

    pub fn window(&self) -> Result<SearchWindow> {
        SearchWindow::new(self.window[0], self.window[1]).map_err(|e| config_err(e.to_string()))
    }

    pub fn template(&self) -> Result<Template> {
        let spec = self
            .template
            .as_ref()
            .ok_or_else(|| config_err(format!("{} needs a template", self.kind.name())))?;
        spec.build(self.band()?).map_err(|e| config_err(e.to_string()))
    }

    pub fn quadrature(&self) -> QuadratureSpec {
        self.quadrature_nodes
            .map(QuadratureSpec::with_nodes)
            .unwrap_or_default()
    }

    pub fn counts(&self) -> Result<Vec<u64>> {
        let ms = self.m.values();
        if ms.is_empty() {
            return Err(config_err(format!("{} needs at least one sample count m", self.kind.name())));
        }
        Ok(ms)
    }

    pub fn single_count(&self) -> Result<u64> {
        match self.counts()?.as_slice() {
            [m] => Ok(*m),
            _ => Err(config_err(format!("{} takes a single sample count m", self.kind.name()))),
        }
    }

    pub fn tau0(&self) -> Result<f64> {
        let tau0 = self
            .tau0
            .ok_or_else(|| config_err(format!("{} needs tau0", self.kind.name())))?;
        if !self.window()?.contains(tau0) {
            return Err(config_err(format!("tau0 = {tau0} is outside the window")));
        }
        Ok(tau0)
    }

    pub fn scene(&self, sigma_n: f64) -> Result<DelayScene> {
        DelayScene::new(self.amplitude.value(), self.tau0()?, sigma_n).map_err(|e| config_err(e.to_string()))
    }

    /// Main-lobe radius: configured, else `3a` for a Gaussian pulse, else
    /// `2π/ω_max` for a flat band.
    pub fn lobe_radius(&self, template: &Template) -> Result<f64> {
        if let Some(a) = self.alpha2 {
            return Ok(a);
        }
        match template.kind() {
            TemplateKind::GaussianPulse { width } => Ok(3.0 * width),
            TemplateKind::FlatBand { .. } => Ok(2.0 * PI / self.omega_max),
            TemplateKind::Custom { .. } => Err(config_err("custom templates need alpha2")),
        }
    }

    /// `|τ̂ - τ₀|` tolerance: configured, else `2a` for a Gaussian pulse,
    /// else the lobe radius.
    pub fn success_radius(&self, template: &Template) -> Result<f64> {
        if let Some(r) = self.success_radius {
            return Ok(r);
        }
        match template.kind() {
            TemplateKind::GaussianPulse { width } => Ok(2.0 * width),
            _ => self.lobe_radius(template),
        }
    }

    pub fn grid_step(&self) -> Result<f64> {
        match self.grid_step {
            Some(step) => Ok(step),
            None => Ok(default_grid_step(self.band()?, self.alpha2)),
        }
    }

    pub fn c_values(&self) -> Vec<f64> {
        self.c_grid
            .clone()
            .unwrap_or_else(|| (0..=20).map(|i| i as f64 * 0.05).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const DEMO: &str = r#"{
        "kind": "noiseless_demo",
        "template": {"kind": "gaussian", "a": 0.005},
        "omega_max": 600, "window": [0, 1], "tau0": 0.4,
        "m": [10, 20, 50], "trials": 5, "master_seed": 1
    }"#;

    #[test]
    fn parses_demo() {
        let cfg = ExperimentConfig::from_json(DEMO).unwrap();
        assert_eq!(cfg.kind, ExperimentKind::NoiselessDemo);
        assert_eq!(cfg.counts().unwrap(), vec![10, 20, 50]);
        assert_eq!(cfg.amplitude.value(), Complex64::new(1.0, 0.0));
        let t = cfg.template().unwrap();
        assert!((cfg.success_radius(&t).unwrap() - 0.01).abs() < 1e-15);
        assert!((cfg.lobe_radius(&t).unwrap() - 0.015).abs() < 1e-15);
        assert_eq!(cfg.grid_step().unwrap(), 1.0 / 4800.0);
        assert_eq!(cfg.c_values().len(), 21);
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(matches!(ExperimentConfig::from_json("{"), Err(CmfError::Config(_))));
        let bad = DEMO.replace("\"trials\": 5", "\"trials\": 0");
        assert!(ExperimentConfig::from_json(&bad).is_err());
        let bad = DEMO.replace("\"omega_max\": 600", "\"omega_max\": -1");
        assert!(ExperimentConfig::from_json(&bad).is_err());
        let bad = DEMO.replace("\"tau0\": 0.4", "\"tau0\": 0.4, \"bogus\": 1");
        assert!(ExperimentConfig::from_json(&bad).is_err());
        let bad = DEMO.replace("\"tau0\": 0.4", "\"tau0\": 0.4, \"c_grid\": [0.5, 1.5]");
        assert!(ExperimentConfig::from_json(&bad).is_err());
        let cfg = ExperimentConfig::from_json(&DEMO.replace("\"tau0\": 0.4", "\"tau0\": 3.0")).unwrap();
        assert!(cfg.tau0().is_err());
    }

    #[test]
    fn complex_amplitude_and_scalar_m() {
        let text = r#"{"kind": "tone", "omega_max": 50, "window": [-1, 1], "amplitude": [0.5, -1], "m": 30}"#;
        let cfg = ExperimentConfig::from_json(text).unwrap();
        assert_eq!(cfg.amplitude.value(), Complex64::new(0.5, -1.0));
        assert_eq!(cfg.single_count().unwrap(), 30);
        assert!(cfg.template().is_err());
    }
}
