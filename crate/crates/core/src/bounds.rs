//! Closed-form evaluation of the expectation bounds, tail thresholds,
//! minimum sample counts and breakdown noise levels.
//!
//! Every bound needs `|Ω||T| ≥ 3`; smaller products are rejected with
//! [`CmfError::Precondition`] rather than extrapolated.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{CmfError, Result};
use crate::templates::SpectralMetrics;

/// Universal constants of the bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub c5: f64,
}

impl Constants {
    pub const C1: f64 = 18.02;
    /// Bumped whenever a constant or formula changes; recorded in run manifests.
    pub const VERSION: &'static str = "1";

    pub fn c2() -> f64 {
        (4.0 * Self::C1 * Self::C1).max(2.0 * Self::C1)
    }

    pub fn c3() -> f64 {
        (1.0 + 3f64.sqrt()).powi(2)
    }

    pub fn c4() -> f64 {
        2.25 * 2f64.sqrt() / PI
    }

    pub fn c5() -> f64 {
        let c1 = Self::C1;
        let c4 = Self::c4();
        (16.0 * c1 * c1).max(4.0 * c1).max(64.0 * PI * PI * c4 * c4)
    }

    pub fn get() -> Self {
        Self {
            c1: Self::C1,
            c2: Self::c2(),
            c3: Self::c3(),
            c4: Self::c4(),
            c5: Self::c5(),
        }
    }
}

/// Scalar inputs of every bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemConfig {
    pub m: u64,
    pub delta: f64,
    pub mu1: f64,
    pub mu2: f64,
    /// `‖ŝ‖₂²`.
    pub energy: f64,
    /// `|Ω|`.
    pub omega_width: f64,
    /// `|T|`.
    pub window_length: f64,
    /// `|A|`.
    pub amplitude: f64,
    pub sigma_n: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub epsilon: f64,
}

impl ProblemConfig {
    /// Fills the template-dependent fields from computed metrics; the rest
    /// start at `m = 1`, `δ = 0.1`, `|A| = 1`, `σ_n = 0`, `α₁ = ε = 0`, `α₂ = |T|`.
    pub fn from_metrics(metrics: &SpectralMetrics, window_length: f64) -> Self {
        Self {
            m: 1,
            delta: 0.1,
            mu1: metrics.mu1,
            mu2: metrics.mu2,
            energy: metrics.l2sq,
            omega_width: metrics.band_width,
            window_length,
            amplitude: 1.0,
            sigma_n: 0.0,
            alpha1: 0.0,
            alpha2: window_length,
            epsilon: 0.0,
        }
    }

    /// `η = |A|·‖ŝ‖₂²/2π`.
    pub fn eta(&self) -> f64 {
        self.amplitude * self.energy / (2.0 * PI)
    }

    /// `|Ω||T|`.
    pub fn area(&self) -> f64 {
        self.omega_width * self.window_length
    }

    fn sqrt_m(&self) -> f64 {
        (self.m as f64).sqrt()
    }

    /// `√|Ω|·‖ŝ‖₂/√m`.
    fn noise_scale(&self) -> f64 {
        (self.omega_width * self.energy).sqrt() / self.sqrt_m()
    }

    fn check_area(&self) -> Result<()> {
        if !(self.area() >= 3.0) {
            return Err(CmfError::Precondition(format!(
                "the bounds need |Ω||T| ≥ 3, got {}",
                self.area()
            )));
        }
        Ok(())
    }

    fn check_basic(&self) -> Result<()> {
        if self.m == 0 {
            return Err(CmfError::invalid("m must be at least 1"));
        }
        for (name, v) in [
            ("mu1", self.mu1),
            ("mu2", self.mu2),
            ("energy", self.energy),
            ("omega_width", self.omega_width),
            ("window_length", self.window_length),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(CmfError::invalid(format!("{name} must be positive, got {v}")));
            }
        }
        for (name, v) in [("amplitude", self.amplitude), ("sigma_n", self.sigma_n)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(CmfError::invalid(format!("{name} must be non-negative, got {v}")));
            }
        }
        self.check_area()
    }

    fn check_delta(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(CmfError::invalid(format!("delta must lie in (0, 1), got {}", self.delta)));
        }
        Ok(())
    }

    fn check_alpha1(&self) -> Result<()> {
        if !(self.alpha1 >= 0.0 && self.alpha1 < 1.0) {
            return Err(CmfError::invalid(format!("alpha1 must lie in [0, 1), got {}", self.alpha1)));
        }
        Ok(())
    }
}

/// A bound in its two-term form and its simplified single-term form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundForms {
    pub two_term: f64,
    pub simplified: f64,
}

impl BoundForms {
    pub fn tightest(&self) -> f64 {
        self.two_term.min(self.simplified)
    }
}

/// Bound on `E sup_τ |R̃_ss(τ) - A·R_ss(τ - τ₀)|`.
pub fn expected_sup_bound(cfg: &ProblemConfig) -> Result<BoundForms> {
    cfg.check_basic()?;
    let lead = cfg.eta() * cfg.mu1 / cfg.sqrt_m();
    let l = (2.0 * cfg.area()).ln().sqrt();
    Ok(BoundForms {
        two_term: lead * (4.25 * l + 2.28),
        simplified: 5.96 * lead * l,
    })
}

/// Threshold `U` exceeded by `sup_τ |R̃_ss(τ) - A·R_ss(τ - τ₀)|` with
/// probability at most `δ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailThreshold {
    pub c1_form: f64,
    /// `max(·,·)·(15.61√log(12|Ω||T|/δ) + 4.56)`; used by the sample requirements.
    pub refined: f64,
}

fn tail_prefactor(cfg: &ProblemConfig) -> f64 {
    let m = cfg.m as f64;
    (cfg.eta() * cfg.mu1 / m.sqrt()).max(cfg.eta() * cfg.mu2 / m * (4.0 / cfg.delta).ln().sqrt())
}

pub fn tail_threshold_u(cfg: &ProblemConfig) -> Result<TailThreshold> {
    cfg.check_basic()?;
    cfg.check_delta()?;
    let pre = tail_prefactor(cfg);
    let l = (12.0 * cfg.area() / cfg.delta).ln().sqrt();
    Ok(TailThreshold {
        c1_form: Constants::C1 * pre * l,
        refined: pre * (15.61 * l + 4.56),
    })
}

/// Bound on `E sup_τ |Ñ(τ)|`.
pub fn noise_expected_sup_bound(cfg: &ProblemConfig) -> Result<BoundForms> {
    cfg.check_basic()?;
    let lead = cfg.sigma_n * cfg.noise_scale();
    let l = cfg.area().ln().sqrt();
    Ok(BoundForms {
        two_term: lead * (0.199 * l + 0.166),
        simplified: 0.36 * lead * l,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseTail {
    pub threshold: f64,
    /// Whether `m ≥ C₃·max(μ₁², μ₂)·log(1/δ)` holds.
    pub activated: bool,
    /// Right-hand side of the activation condition.
    pub activation_m: f64,
}

fn activation_rhs(cfg: &ProblemConfig) -> f64 {
    Constants::c3() * (cfg.mu1 * cfg.mu1).max(cfg.mu2) * (1.0 / cfg.delta).ln()
}

/// Threshold exceeded by `sup_τ |Ñ(τ)|` with probability at most `δ`, valid
/// once the activation condition holds; the flag is left to the caller.
pub fn noise_tail_threshold(cfg: &ProblemConfig) -> Result<NoiseTail> {
    cfg.check_basic()?;
    cfg.check_delta()?;
    let threshold = Constants::c4()
        * cfg.sigma_n
        * cfg.noise_scale()
        * cfg.area().ln().sqrt().max((2.0 / cfg.delta).ln().sqrt());
    let activation_m = activation_rhs(cfg);
    Ok(NoiseTail {
        threshold,
        activated: cfg.m as f64 >= activation_m,
        activation_m,
    })
}

/// Smallest integer strictly above `x`.
fn strictly_above(x: f64) -> u64 {
    x.floor() as u64 + 1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinSamples {
    /// With the single constant `C₂` on both terms.
    pub combined: u64,
    /// With `4C₁²` on the first term and `2C₁` on the second.
    pub split: u64,
}

fn log_terms(area: f64, delta: f64) -> (f64, f64) {
    let l12 = (12.0 * area / delta).ln();
    let l4 = (4.0 / delta).ln();
    (l12, (l4 * l12).sqrt())
}

/// Smallest `m` for which the noiseless peak separation guarantee applies.
pub fn min_samples_noiseless(cfg: &ProblemConfig) -> Result<MinSamples> {
    cfg.check_basic()?;
    cfg.check_delta()?;
    cfg.check_alpha1()?;
    if !(cfg.epsilon >= 0.0 && cfg.epsilon < 1.0 - cfg.alpha1) {
        return Err(CmfError::invalid(format!(
            "epsilon must lie in [0, 1 - alpha1), got {}",
            cfg.epsilon
        )));
    }
    let gap = 1.0 - cfg.alpha1 - cfg.epsilon;
    let (l12, mixed) = log_terms(cfg.area(), cfg.delta);
    let first = l12 / (gap * gap) * cfg.mu1 * cfg.mu1;
    let second = mixed / gap * cfg.mu2;
    let c1 = Constants::C1;
    Ok(MinSamples {
        combined: strictly_above(Constants::c2() * first.max(second)),
        split: strictly_above((4.0 * c1 * c1 * first).max(2.0 * c1 * second)),
    })
}

/// Smallest `m` satisfying both the noisy sample condition and the
/// activation condition.
pub fn min_samples_noisy(cfg: &ProblemConfig) -> Result<u64> {
    cfg.check_basic()?;
    cfg.check_delta()?;
    cfg.check_alpha1()?;
    if !(cfg.amplitude > 0.0) {
        return Err(CmfError::invalid("amplitude must be positive"));
    }
    let (l12, mixed) = log_terms(cfg.area(), cfg.delta);
    let log_max = cfg.area().ln().max((2.0 / cfg.delta).ln());
    let noise_ratio = (cfg.sigma_n / cfg.amplitude).powi(2) * (cfg.omega_width / cfg.energy);
    let gap = 1.0 - cfg.alpha1;
    let first = l12 / (gap * gap) * (cfg.mu1 * cfg.mu1);
    let second = mixed / gap * cfg.mu2;
    let third = log_max / (gap * gap) * noise_ratio;
    Ok(strictly_above(Constants::c5() * first.max(second).max(third)).max(activation_rhs(cfg).ceil() as u64))
}

/// `(rough, guaranteed)` noise levels at which estimation breaks down.
pub fn breakdown_sigma(cfg: &ProblemConfig) -> Result<(f64, f64)> {
    cfg.check_basic()?;
    let rough = cfg.amplitude * cfg.energy.sqrt() * (cfg.m as f64 / cfg.omega_width).sqrt();
    Ok((rough, rough / cfg.area().ln().sqrt()))
}

/// Pointwise bounds on `E|R̃_ss(τ) - A·R_ss(τ - τ₀)|` and `E|Ñ(τ)|`.
pub fn pointwise_bounds(cfg: &ProblemConfig) -> Result<(f64, f64)> {
    cfg.check_basic()?;
    Ok((
        cfg.eta() * cfg.mu1 / cfg.sqrt_m(),
        cfg.sigma_n * cfg.noise_scale() / (2.0 * PI),
    ))
}

fn check_tone(omega_width: f64, window_length: f64, m: u64, delta: f64) -> Result<()> {
    if m == 0 {
        return Err(CmfError::invalid("m must be at least 1"));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(CmfError::invalid(format!("delta must lie in (0, 1), got {delta}")));
    }
    if !(omega_width * window_length >= 3.0) {
        return Err(CmfError::Precondition(format!(
            "the bounds need |Ω||T| ≥ 3, got {}",
            omega_width * window_length
        )));
    }
    Ok(())
}

/// Tail threshold of `sup_ω |R̃_ŝŝ(ω) - A·R_ŝŝ(ω - ω₀)|` for noiseless tones.
pub fn tone_tail_u(amplitude: f64, omega_width: f64, window_length: f64, m: u64, delta: f64) -> Result<f64> {
    check_tone(omega_width, window_length, m, delta)?;
    let m = m as f64;
    let area = omega_width * window_length;
    Ok(2.0 * PI * Constants::C1 * amplitude * window_length
        * (1.0 / m.sqrt()).max((4.0 / delta).ln().sqrt() / m)
        * (12.0 * area / delta).ln().sqrt())
}

/// Main-lobe floor and sidelobe ceiling of the normalized tone sinc,
/// inside `π/|T|` and beyond `2π/|T|` respectively.
pub const TONE_LOBE_FLOOR: f64 = 0.636;
pub const TONE_SIDELOBE: f64 = 0.218;

/// Samples guaranteeing the Nyquist-grid winner lies within `2π/|T|` of
/// the tone (noiseless).
pub fn tone_grid_min_samples(omega_width: f64, window_length: f64, delta: f64) -> Result<u64> {
    check_tone(omega_width, window_length, 1, delta)?;
    let gap = TONE_LOBE_FLOOR - TONE_SIDELOBE;
    let (l12, mixed) = log_terms(omega_width * window_length, delta);
    Ok(strictly_above(Constants::c2() * (l12 / (gap * gap)).max(mixed / gap)))
}

/// Samples guaranteeing the noisy tone peak lies within `2π/|T|` of the
/// tone, including `m ≥ C₃·log(1/δ)`.
pub fn tone_noisy_min_samples(
    omega_width: f64,
    window_length: f64,
    delta: f64,
    sigma_n: f64,
    amplitude: f64,
) -> Result<u64> {
    check_tone(omega_width, window_length, 1, delta)?;
    if !(amplitude > 0.0) {
        return Err(CmfError::invalid("amplitude must be positive"));
    }
    let area = omega_width * window_length;
    let gap = 1.0 - TONE_SIDELOBE;
    let l12 = (12.0 * area / delta).ln();
    let mixed = ((4.0 / delta).ln() * l12).sqrt();
    let log_max = area.ln().max((2.0 / delta).ln());
    let first = l12 / (gap * gap);
    let second = mixed / gap;
    let third = log_max / (gap * gap) * ((sigma_n / amplitude).powi(2) * 1.0);
    let activation = Constants::c3() * (1.0 / delta).ln();
    Ok(strictly_above(Constants::c5() * first.max(second).max(third)).max(activation.ceil() as u64))
}

/// Every bound for one configuration, keyed by result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub constants: Constants,
    pub constants_version: String,
    pub config: ProblemConfig,
    pub eta: f64,
    pub expected_sup: BoundForms,
    pub tail_u: TailThreshold,
    pub noise_expected_sup: BoundForms,
    pub noise_tail: NoiseTail,
    pub min_samples_noiseless: MinSamples,
    pub min_samples_noisy: u64,
    pub breakdown_sigma_rough: f64,
    pub breakdown_sigma_guaranteed: f64,
    pub pointwise_deviation: f64,
    pub pointwise_noise: f64,
    pub tone_tail_u: f64,
    pub tone_grid_min_samples: u64,
    pub tone_noisy_min_samples: u64,
}

impl BoundReport {
    /// Tone entries treat `|Ω|`, `|T|`, `|A|`, `σ_n`, `m`, `δ` of `cfg` as the
    /// tone problem's parameters.
    pub fn evaluate(cfg: &ProblemConfig) -> Result<Self> {
        let (rough, guaranteed) = breakdown_sigma(cfg)?;
        let (dev, noise) = pointwise_bounds(cfg)?;
        Ok(Self {
            constants: Constants::get(),
            constants_version: Constants::VERSION.to_string(),
            config: *cfg,
            eta: cfg.eta(),
            expected_sup: expected_sup_bound(cfg)?,
            tail_u: tail_threshold_u(cfg)?,
            noise_expected_sup: noise_expected_sup_bound(cfg)?,
            noise_tail: noise_tail_threshold(cfg)?,
            min_samples_noiseless: min_samples_noiseless(cfg)?,
            min_samples_noisy: min_samples_noisy(cfg)?,
            breakdown_sigma_rough: rough,
            breakdown_sigma_guaranteed: guaranteed,
            pointwise_deviation: dev,
            pointwise_noise: noise,
            tone_tail_u: tone_tail_u(cfg.amplitude, cfg.omega_width, cfg.window_length, cfg.m, cfg.delta)?,
            tone_grid_min_samples: tone_grid_min_samples(cfg.omega_width, cfg.window_length, cfg.delta)?,
            tone_noisy_min_samples: tone_noisy_min_samples(
                cfg.omega_width,
                cfg.window_length,
                cfg.delta,
                cfg.sigma_n,
                cfg.amplitude,
            )?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `η = μ₁ = μ₂ = 1` with `|Ω||T| = area`.
    fn unit(m: u64, area: f64) -> ProblemConfig {
        ProblemConfig {
            m,
            delta: 0.1,
            mu1: 1.0,
            mu2: 1.0,
            energy: 2.0 * PI,
            omega_width: area,
            window_length: 1.0,
            amplitude: 1.0,
            sigma_n: 0.0,
            alpha1: 0.0,
            alpha2: 0.1,
            epsilon: 0.0,
        }
    }

    #[test]
    fn constants() {
        let c = Constants::get();
        assert_eq!(c.c1, 18.02);
        assert!((c.c2 - 4.0 * 18.02 * 18.02).abs() < 1e-12);
        assert!((c.c3 - 7.464_101_615_137_754).abs() < 1e-12);
        assert!((c.c4 - 1.012_855_855_676_744).abs() < 1e-12);
        assert!((c.c5 - 16.0 * 18.02 * 18.02).abs() < 1e-9);
    }

    #[test]
    fn expected_sup_example() {
        let b = expected_sup_bound(&unit(100, 3.0)).unwrap();
        assert!((b.simplified - 5.96 * 0.1 * 6f64.ln().sqrt()).abs() < 1e-15);
        assert!((b.simplified - 0.7978).abs() < 1e-4);
        let quarter = expected_sup_bound(&unit(400, 3.0)).unwrap();
        assert!((quarter.simplified * 2.0 - b.simplified).abs() < 1e-15);
    }

    #[test]
    fn expected_sup_simplified_dominates() {
        let mut area = 3.0;
        while area <= 1e6 {
            let b = expected_sup_bound(&unit(10, area)).unwrap();
            assert!(b.two_term <= b.simplified * (1.0 + 1e-12), "area {area}");
            area *= 1.05;
        }
    }

    #[test]
    fn precondition_enforced() {
        assert!(matches!(expected_sup_bound(&unit(10, 2.9)), Err(CmfError::Precondition(_))));
        assert!(matches!(tone_tail_u(1.0, 1.0, 2.0, 10, 0.1), Err(CmfError::Precondition(_))));
    }

    #[test]
    fn tail_threshold_example() {
        let mut cfg = unit(400, 10.0);
        cfg.delta = 0.1;
        let u = tail_threshold_u(&cfg).unwrap();
        let expected = 18.02 * 0.05 * 1200f64.ln().sqrt();
        assert!((u.c1_form - expected).abs() < 1e-12);
        assert!((u.c1_form - 2.399).abs() < 1e-3);
        cfg.delta = 0.01;
        assert!(tail_threshold_u(&cfg).unwrap().c1_form > u.c1_form);
        cfg.delta = 1.0;
        assert!(matches!(tail_threshold_u(&cfg), Err(CmfError::InvalidParameter(_))));
    }

    #[test]
    fn refined_u_is_smaller() {
        for &delta in &[0.5, 0.1, 0.01, 1e-4, 1e-8] {
            let mut area = 3.0;
            while area <= 1e7 {
                let mut cfg = unit(50, area);
                cfg.delta = delta;
                let u = tail_threshold_u(&cfg).unwrap();
                assert!(u.refined <= u.c1_form);
                area *= 3.0;
            }
        }
    }

    #[test]
    fn noise_expected_sup_example() {
        let cfg = ProblemConfig {
            sigma_n: 1.0,
            energy: 1.0,
            omega_width: 100.0,
            window_length: 0.03,
            m: 25,
            ..unit(25, 3.0)
        };
        let b = noise_expected_sup_bound(&cfg).unwrap();
        assert!((b.simplified - 0.36 * 2.0 * 3f64.ln().sqrt()).abs() < 1e-12);
        assert!((b.simplified - 0.7546).abs() < 1e-4);
        let double = ProblemConfig { energy: 4.0, ..cfg };
        assert!((noise_expected_sup_bound(&double).unwrap().simplified - 2.0 * b.simplified).abs() < 1e-12);
        let silent = ProblemConfig { sigma_n: 0.0, ..cfg };
        assert_eq!(noise_expected_sup_bound(&silent).unwrap().simplified, 0.0);
    }

    #[test]
    fn noise_tail_activation_and_branches() {
        let cfg = unit(17, 10.0);
        let t = noise_tail_threshold(&cfg).unwrap();
        assert!((t.activation_m - 17.19).abs() < 0.01);
        assert!(!t.activated);
        assert!(noise_tail_threshold(&unit(18, 10.0)).unwrap().activated);

        let noisy = ProblemConfig { sigma_n: 1.0, ..unit(100, 10.0) };
        let twice = ProblemConfig { sigma_n: 2.0, ..noisy };
        assert!((noise_tail_threshold(&twice).unwrap().threshold - 2.0 * noise_tail_threshold(&noisy).unwrap().threshold).abs() < 1e-12);
        let rare = ProblemConfig { delta: 1e-6, ..noisy };
        let expected = Constants::c4() * (10.0 * 2.0 * PI / 100.0f64).sqrt() * (2e6f64).ln().sqrt();
        assert!((noise_tail_threshold(&rare).unwrap().threshold - expected).abs() < 1e-12);
    }

    #[test]
    fn noiseless_requirement_structure() {
        let mut prev = 0;
        for &a1 in &[0.0, 0.5, 0.9, 0.99, 0.999] {
            let cfg = ProblemConfig { alpha1: a1, ..unit(1, 100.0) };
            let n = min_samples_noiseless(&cfg).unwrap();
            assert!(n.combined > prev);
            assert!(n.split <= n.combined);
            prev = n.combined;
        }
        let bad = ProblemConfig { alpha1: 0.5, epsilon: 0.5, ..unit(1, 100.0) };
        assert!(min_samples_noiseless(&bad).is_err());

        // flat spectrum: first term dominates and grows like log(|Ω||T|)
        let a = min_samples_noiseless(&unit(1, 1e3)).unwrap().combined as f64;
        let b = min_samples_noiseless(&unit(1, 1e6)).unwrap().combined as f64;
        let predicted = (12e6f64 / 0.1).ln() / (12e3f64 / 0.1).ln();
        assert!((b / a - predicted).abs() < 1e-3);

        // concentrated spectrum with μ₁ = β, μ₂ = β²
        let beta = 3.0;
        let cfg = ProblemConfig { mu1: beta, mu2: beta * beta, ..unit(1, 1e4) };
        let got = min_samples_noiseless(&cfg).unwrap().combined as f64;
        let first = Constants::c2() * beta * beta * (12e4f64 / 0.1).ln();
        assert!((got - first).abs() <= 1.0);
    }

    #[test]
    fn noisy_requirement_structure() {
        let quiet = unit(1, 100.0);
        let n0 = min_samples_noisy(&quiet).unwrap();
        let (l12, mixed) = log_terms(100.0, 0.1);
        assert_eq!(n0, strictly_above(Constants::c5() * l12.max(mixed)));

        let loud = ProblemConfig { sigma_n: 20.0, ..quiet };
        let loud2 = ProblemConfig { sigma_n: 40.0, ..quiet };
        let third = |s: f64| Constants::c5() * 100f64.ln().max(20f64.ln()) * s * s * 100.0 / (2.0 * PI);
        assert_eq!(min_samples_noisy(&loud).unwrap(), strictly_above(third(20.0)));
        assert_eq!(min_samples_noisy(&loud2).unwrap(), strictly_above(third(40.0)));
        assert!(min_samples_noisy(&ProblemConfig { alpha1: 1.0, ..quiet }).is_err());
    }

    #[test]
    fn tone_requirement_matches_general_specialization() {
        for &(width, len, delta, sigma, amp) in &[
            (1200.0, 2.0, 0.1, 0.0, 1.0),
            (100.0, 2.0, 0.05, 3.0, 1.5),
            (10.0, 0.3, 0.01, 0.5, 2.0),
            (1e5, 10.0, 1e-6, 100.0, 1.0),
        ] {
            let cfg = ProblemConfig {
                m: 1,
                delta,
                mu1: 1.0,
                mu2: 1.0,
                energy: width,
                omega_width: width,
                window_length: len,
                amplitude: amp,
                sigma_n: sigma,
                alpha1: TONE_SIDELOBE,
                alpha2: 1.0,
                epsilon: 0.0,
            };
            assert_eq!(
                tone_noisy_min_samples(width, len, delta, sigma, amp).unwrap(),
                min_samples_noisy(&cfg).unwrap()
            );
        }
    }

    #[test]
    fn breakdown_and_pointwise() {
        let cfg = ProblemConfig { m: 50, omega_width: 1200.0, energy: 2.0 * PI, ..unit(50, 1200.0) };
        let (rough, guaranteed) = breakdown_sigma(&cfg).unwrap();
        assert!((rough / guaranteed - 1200f64.ln().sqrt()).abs() < 1e-12);
        let four = ProblemConfig { m: 200, ..cfg };
        assert!((breakdown_sigma(&four).unwrap().0 - 2.0 * rough).abs() < 1e-12);

        let (dev, noise) = pointwise_bounds(&unit(25, 10.0)).unwrap();
        assert!((dev - 0.2).abs() < 1e-15);
        assert_eq!(noise, 0.0);
        for m in [1, 10, 1000] {
            let c = unit(m, 3.0);
            assert!(pointwise_bounds(&c).unwrap().0 <= expected_sup_bound(&c).unwrap().simplified);
        }
    }

    #[test]
    fn report_serializes() {
        let cfg = ProblemConfig { sigma_n: 0.1, ..unit(100, 50.0) };
        let r = BoundReport::evaluate(&cfg).unwrap();
        let json = serde_json::to_value(&r).unwrap();
        for key in [
            "expected_sup",
            "tail_u",
            "noise_expected_sup",
            "noise_tail",
            "min_samples_noiseless",
            "min_samples_noisy",
            "breakdown_sigma_rough",
            "tone_tail_u",
            "tone_noisy_min_samples",
        ] {
            assert!(json.get(key).is_some(), "{key}");
        }
    }
}
