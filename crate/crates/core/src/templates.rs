//! Signal templates described by their band-limited spectrum.
//!
//! A template is never synthesized in the time domain directly; every
//! quantity (energy, concentration metrics, autocorrelation, band-limited
//! waveform samples) is obtained by quadrature of the spectrum over the
//! observation band `Ω = [-ω_max, ω_max]`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{CmfError, Result};

/// Observation band `Ω = [-omega_max, omega_max]` (rad/s).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyBand {
    omega_max: f64,
}

impl FrequencyBand {
    pub fn new(omega_max: f64) -> Result<Self> {
        if !(omega_max.is_finite() && omega_max > 0.0) {
            return Err(CmfError::invalid(format!(
                "omega_max must be positive and finite, got {omega_max}"
            )));
        }
        Ok(Self { omega_max })
    }

    pub fn omega_max(&self) -> f64 {
        self.omega_max
    }

    pub fn lo(&self) -> f64 {
        -self.omega_max
    }

    pub fn hi(&self) -> f64 {
        self.omega_max
    }

    /// `|Ω|`.
    pub fn width(&self) -> f64 {
        2.0 * self.omega_max
    }

    pub fn contains(&self, omega: f64) -> bool {
        omega.abs() <= self.omega_max
    }
}

/// Admissible shift interval `T = [tau_min, tau_max]`.
///
/// Used for delays in the pulse problem and for sample times in the tone
/// problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchWindow {
    tau_min: f64,
    tau_max: f64,
}

impl SearchWindow {
    pub fn new(tau_min: f64, tau_max: f64) -> Result<Self> {
        if !(tau_min.is_finite() && tau_max.is_finite() && tau_max > tau_min) {
            return Err(CmfError::invalid(format!(
                "search window needs tau_max > tau_min, got [{tau_min}, {tau_max}]"
            )));
        }
        Ok(Self { tau_min, tau_max })
    }

    /// `[-t_max, t_max]`.
    pub fn symmetric(t_max: f64) -> Result<Self> {
        Self::new(-t_max, t_max)
    }

    pub fn tau_min(&self) -> f64 {
        self.tau_min
    }

    pub fn tau_max(&self) -> f64 {
        self.tau_max
    }

    /// `|T|`.
    pub fn length(&self) -> f64 {
        self.tau_max - self.tau_min
    }

    pub fn contains(&self, tau: f64) -> bool {
        tau >= self.tau_min && tau <= self.tau_max
    }
}

/// Whether the estimator folds the correlation onto its real part.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SignalCase {
    Real,
    Complex,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TemplateKind {
    /// Unit-energy Gaussian pulse of width `a` seconds.
    GaussianPulse { width: f64 },
    /// Constant magnitude `level` on `support`, zero elsewhere.
    FlatBand { level: f64, support: (f64, f64) },
    /// Tabulated magnitude, linearly interpolated, zero outside the table.
    Custom { omega: Vec<f64>, magnitude: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Template {
    kind: TemplateKind,
    case: SignalCase,
}

/// JSON description of a template.
///
/// `{"kind": "gaussian", "a": 0.005}`,
/// `{"kind": "flat", "level": 1.0, "support": [-300, 300]}`,
/// `{"kind": "custom", "omega": [...], "mag": [...]}`.
/// An optional `"case": "real" | "complex"` overrides the default case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TemplateSpec {
    Gaussian {
        a: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        case: Option<SignalCase>,
    },
    Flat {
        level: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        support: Option<[f64; 2]>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        case: Option<SignalCase>,
    },
    Custom {
        omega: Vec<f64>,
        mag: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        case: Option<SignalCase>,
    },
}

impl TemplateSpec {
    /// Builds the template; `band` supplies the default flat support.
    pub fn build(&self, band: FrequencyBand) -> Result<Template> {
        let (template, case) = match self {
            TemplateSpec::Gaussian { a, case } => (make_gaussian_pulse(*a)?, *case),
            TemplateSpec::Flat {
                level,
                support,
                case,
            } => (
                make_flat_band(*level, band, support.map(|[lo, hi]| (lo, hi)))?,
                *case,
            ),
            TemplateSpec::Custom { omega, mag, case } => (
                Template::custom(omega.clone(), mag.clone(), case.unwrap_or(SignalCase::Complex))?,
                *case,
            ),
        };
        Ok(match case {
            Some(c) => template.with_case(c),
            None => template,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Gaussian pulse `s0(t) = π^{-1/4} a^{-1/2} exp(-t²/2a²)` in the Real case.
pub fn make_gaussian_pulse(a: f64) -> Result<Template> {
    if !(a.is_finite() && a > 0.0) {
        return Err(CmfError::invalid(format!("pulse width must be positive, got {a}")));
    }
    Ok(Template {
        kind: TemplateKind::GaussianPulse { width: a },
        case: SignalCase::Real,
    })
}

/// Flat spectrum of magnitude `level` on `support` (defaults to all of `band`).
///
/// Symmetric supports give a conjugate-symmetric spectrum and the Real case;
/// otherwise the template is Complex.
pub fn make_flat_band(level: f64, band: FrequencyBand, support: Option<(f64, f64)>) -> Result<Template> {
    if !(level.is_finite() && level > 0.0) {
        return Err(CmfError::invalid(format!("flat level must be positive, got {level}")));
    }
    let (lo, hi) = support.unwrap_or((band.lo(), band.hi()));
    if !(lo < hi) {
        return Err(CmfError::invalid(format!("empty flat support [{lo}, {hi}]")));
    }
    if lo < band.lo() || hi > band.hi() {
        return Err(CmfError::invalid(format!(
            "flat support [{lo}, {hi}] is not inside the band [{}, {}]",
            band.lo(),
            band.hi()
        )));
    }
    let symmetric = (lo + hi).abs() <= 1e-12 * (hi - lo);
    Ok(Template {
        kind: TemplateKind::FlatBand {
            level,
            support: (lo, hi),
        },
        case: if symmetric {
            SignalCase::Real
        } else {
            SignalCase::Complex
        },
    })
}

impl Template {
    /// Tabulated magnitude with linear interpolation. Approximate by nature.
    pub fn custom(omega: Vec<f64>, magnitude: Vec<f64>, case: SignalCase) -> Result<Self> {
        if omega.len() < 2 || omega.len() != magnitude.len() {
            return Err(CmfError::invalid(
                "custom template needs at least two (omega, mag) pairs of equal length",
            ));
        }
        if omega.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(CmfError::invalid("custom omega table must be strictly increasing"));
        }
        if magnitude.iter().any(|m| !(m.is_finite() && *m >= 0.0)) {
            return Err(CmfError::invalid("custom magnitudes must be finite and non-negative"));
        }
        Ok(Self {
            kind: TemplateKind::Custom { omega, magnitude },
            case,
        })
    }

    pub fn kind(&self) -> &TemplateKind {
        &self.kind
    }

    pub fn case(&self) -> SignalCase {
        self.case
    }

    pub fn with_case(mut self, case: SignalCase) -> Self {
        self.case = case;
        self
    }

    /// Custom templates are interpolated from a table.
    pub fn is_approximate(&self) -> bool {
        matches!(self.kind, TemplateKind::Custom { .. })
    }

    /// `ŝ(ω)`, not yet restricted to a band.
    pub fn spectrum(&self, omega: f64) -> Complex64 {
        Complex64::new(self.magnitude(omega), 0.0)
    }

    /// `ŝ(ω)` with the implicit zero outside `band`.
    pub fn spectrum_in_band(&self, band: FrequencyBand, omega: f64) -> Complex64 {
        if band.contains(omega) {
            self.spectrum(omega)
        } else {
            Complex64::new(0.0, 0.0)
        }
    }

    fn magnitude(&self, omega: f64) -> f64 {
        match &self.kind {
            TemplateKind::GaussianPulse { width } => gaussian_spectrum(*width, omega),
            TemplateKind::FlatBand { level, support } => {
                if omega >= support.0 && omega <= support.1 {
                    *level
                } else {
                    0.0
                }
            }
            TemplateKind::Custom { omega: table, magnitude } => interpolate(table, magnitude, omega),
        }
    }

    /// Magnitude on the open piece containing `inside`; resolves one-sided
    /// limits at discontinuities.
    fn magnitude_on_piece(&self, omega: f64, inside: f64) -> f64 {
        match &self.kind {
            TemplateKind::GaussianPulse { width } => gaussian_spectrum(*width, omega),
            TemplateKind::FlatBand { level, support } => {
                if inside > support.0 && inside < support.1 {
                    *level
                } else {
                    0.0
                }
            }
            TemplateKind::Custom { omega: table, magnitude } => {
                if inside > table[0] && inside < table[table.len() - 1] {
                    interpolate(table, magnitude, omega.clamp(table[0], table[table.len() - 1]))
                } else {
                    0.0
                }
            }
        }
    }

    /// Points of `band` where the spectrum is not smooth, including the band
    /// edges, sorted.
    fn breakpoints(&self, band: FrequencyBand) -> Vec<f64> {
        let mut pts = vec![band.lo(), band.hi()];
        match &self.kind {
            TemplateKind::GaussianPulse { .. } => {}
            TemplateKind::FlatBand { support, .. } => {
                pts.push(support.0);
                pts.push(support.1);
            }
            TemplateKind::Custom { omega, .. } => pts.extend(omega.iter().copied()),
        }
        pts.retain(|w| *w >= band.lo() && *w <= band.hi());
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    /// Analytically known `max |ŝ|²` on the band, when there is one.
    fn known_peak_sq(&self, band: FrequencyBand) -> Option<f64> {
        match &self.kind {
            TemplateKind::GaussianPulse { width } => Some(gaussian_spectrum(*width, 0.0).powi(2)),
            TemplateKind::FlatBand { level, .. } => Some(level * level),
            TemplateKind::Custom { omega, magnitude } => omega
                .iter()
                .zip(magnitude)
                .filter(|(w, _)| band.contains(**w))
                .map(|(_, m)| m * m)
                .reduce(f64::max),
        }
    }
}

fn gaussian_spectrum(a: f64, omega: f64) -> f64 {
    (2.0 * a).sqrt() * PI.powf(0.25) * (-0.5 * a * a * omega * omega).exp()
}

fn interpolate(table: &[f64], values: &[f64], x: f64) -> f64 {
    let last = table.len() - 1;
    if x < table[0] || x > table[last] {
        return 0.0;
    }
    let idx = table.partition_point(|w| *w <= x).clamp(1, last);
    let (x0, x1) = (table[idx - 1], table[idx]);
    let t = (x - x0) / (x1 - x0);
    values[idx - 1] + t * (values[idx] - values[idx - 1])
}

/// Quadrature resolution: number of trapezoid nodes across `Ω`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuadratureSpec {
    pub nodes: usize,
}

impl QuadratureSpec {
    pub const DEFAULT_NODES: usize = 1 << 16;

    pub fn with_nodes(nodes: usize) -> Self {
        Self { nodes }
    }

    fn validate(&self) -> Result<()> {
        if self.nodes < 2 {
            return Err(CmfError::invalid(format!(
                "quadrature needs at least 2 nodes, got {}",
                self.nodes
            )));
        }
        Ok(())
    }
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            nodes: Self::DEFAULT_NODES,
        }
    }
}

/// Composite trapezoid rule on `Ω`, split at the template's breakpoints so
/// that every panel integrates a smooth integrand.
#[derive(Debug, Clone)]
pub struct SpectralQuadrature {
    panels: Vec<Panel>,
}

#[derive(Debug, Clone)]
struct Panel {
    start: f64,
    step: f64,
    weights: Vec<f64>,
    /// `|ŝ|` at each node of the panel.
    magnitude: Vec<f64>,
}

/// Nodes between exact phase evaluations in the rotation recurrence.
const REANCHOR: usize = 128;

impl SpectralQuadrature {
    pub fn new(template: &Template, band: FrequencyBand, quad: QuadratureSpec) -> Result<Self> {
        quad.validate()?;
        let breaks = template.breakpoints(band);
        let total = band.width();
        let intervals = quad.nodes - 1;
        let panels = breaks
            .windows(2)
            .filter(|w| w[1] > w[0])
            .map(|w| {
                let (lo, hi) = (w[0], w[1]);
                let n = ((intervals as f64 * (hi - lo) / total).round() as usize).max(1);
                let step = (hi - lo) / n as f64;
                let mid = 0.5 * (lo + hi);
                let mut weights = vec![step; n + 1];
                weights[0] = 0.5 * step;
                weights[n] = 0.5 * step;
                let magnitude = (0..=n)
                    .map(|j| {
                        let omega = if j == n { hi } else { lo + j as f64 * step };
                        template.magnitude_on_piece(omega, mid)
                    })
                    .collect();
                Panel {
                    start: lo,
                    step,
                    weights,
                    magnitude,
                }
            })
            .collect();
        Ok(Self { panels })
    }

    /// `Σ w·f(|ŝ|)` over all nodes.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.panels
            .iter()
            .map(|p| p.weights.iter().zip(&p.magnitude).map(|(w, m)| w * f(*m)).sum::<f64>())
            .sum()
    }

    pub fn max_node(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.panels
            .iter()
            .flat_map(|p| p.magnitude.iter().map(|m| f(*m)))
            .fold(0.0, f64::max)
    }

    /// `Σ w·f(|ŝ|)·e^{iωτ}` using a phase rotation recurrence along each
    /// panel, re-anchored with an exact `sin_cos` every few nodes.
    pub fn fourier(&self, tau: f64, f: impl Fn(f64) -> f64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for p in &self.panels {
            let rot = Complex64::from_polar(1.0, p.step * tau);
            let mut phase = Complex64::new(1.0, 0.0);
            for (j, (w, m)) in p.weights.iter().zip(&p.magnitude).enumerate() {
                if j % REANCHOR == 0 {
                    phase = Complex64::from_polar(1.0, (p.start + j as f64 * p.step) * tau);
                }
                acc += phase * (w * f(*m));
                phase *= rot;
            }
        }
        acc
    }
}

/// Norms and concentration measures of a template on `Ω`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralMetrics {
    /// `‖ŝ‖₂²` on Ω.
    pub l2sq: f64,
    /// `‖ŝ‖₄⁴` on Ω.
    pub l4_4: f64,
    /// `‖ŝ‖∞²` on Ω.
    pub linf_sq: f64,
    pub mu1: f64,
    pub mu2: f64,
    /// `|Ω|` the metrics were computed on.
    pub band_width: f64,
}

impl SpectralMetrics {
    /// Builds the derived measures from the three norms.
    pub fn from_norms(l2sq: f64, l4_4: f64, linf_sq: f64, band_width: f64) -> Result<Self> {
        if !(l2sq > 0.0) {
            return Err(CmfError::ZeroEnergy);
        }
        Ok(Self {
            l2sq,
            l4_4,
            linf_sq,
            mu1: band_width.sqrt() * l4_4.sqrt() / l2sq,
            mu2: band_width * linf_sq / l2sq,
            band_width,
        })
    }

    /// `η = |A|·‖ŝ‖₂²/2π`, the peak of the mean correlation.
    pub fn eta(&self, amplitude_abs: f64) -> f64 {
        amplitude_abs * self.l2sq / (2.0 * PI)
    }

    /// `‖ŝ‖₂`.
    pub fn l2(&self) -> f64 {
        self.l2sq.sqrt()
    }
}

pub fn compute_metrics(template: &Template, band: FrequencyBand, quad: QuadratureSpec) -> Result<SpectralMetrics> {
    let q = SpectralQuadrature::new(template, band, quad)?;
    let l2sq = q.integrate(|m| m * m);
    let l4_4 = q.integrate(|m| m.powi(4));
    let linf_sq = q
        .max_node(|m| m * m)
        .max(template.known_peak_sq(band).unwrap_or(0.0));
    SpectralMetrics::from_norms(l2sq, l4_4, linf_sq, band.width())
}

/// `R_ss(τ) = (1/2π) ∫_Ω |ŝ(ω)|² e^{iωτ} dω`.
pub fn autocorrelation(template: &Template, band: FrequencyBand, tau: f64, quad: QuadratureSpec) -> Result<Complex64> {
    let q = SpectralQuadrature::new(template, band, quad)?;
    Ok(q.fourier(tau, |m| m * m) / (2.0 * PI))
}

/// [`autocorrelation`] at many shifts, sharing one quadrature.
pub fn autocorrelation_many(
    template: &Template,
    band: FrequencyBand,
    taus: &[f64],
    quad: QuadratureSpec,
) -> Result<Vec<Complex64>> {
    use rayon::prelude::*;
    let q = SpectralQuadrature::new(template, band, quad)?;
    Ok(taus
        .par_iter()
        .map(|&tau| q.fourier(tau, |m| m * m) / (2.0 * PI))
        .collect())
}

/// Band-limited waveform `s(t) = (1/2π) ∫_Ω ŝ(ω) e^{iωt} dω` at many times.
pub fn waveform_many(
    template: &Template,
    band: FrequencyBand,
    times: &[f64],
    quad: QuadratureSpec,
) -> Result<Vec<Complex64>> {
    use rayon::prelude::*;
    let q = SpectralQuadrature::new(template, band, quad)?;
    Ok(times
        .par_iter()
        .map(|&t| q.fourier(t, |m| m) / (2.0 * PI))
        .collect())
}

/// Shift grid used by [`lobe_profile`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LobeScan {
    /// Largest `|τ|` examined, normally `|T|`.
    pub limit: f64,
    /// Number of grid points on `[α₂, limit]`.
    pub points: usize,
}

impl LobeScan {
    pub fn new(limit: f64) -> Self {
        Self { limit, points: 2000 }
    }

    /// Grid points on the closed shell `[alpha2, limit]`, endpoints included.
    pub fn grid(&self, alpha2: f64) -> Vec<f64> {
        let n = self.points.max(2) - 1;
        (0..=n)
            .map(|i| alpha2 + (i as f64 * (self.limit - alpha2)) / n as f64)
            .collect()
    }
}

/// Sidelobe level `α₁ = max |R_ss(τ)|/R_ss(0)` over `α₂ ≤ |τ| ≤ limit`.
///
/// Grid approximation of the supremum over `|τ| > α₂`; the shell includes
/// `α₂` itself since the supremum over the open set equals the maximum over
/// its closure. `|R_ss|` is even in `τ`, so only positive shifts are scanned.
pub fn lobe_profile(
    template: &Template,
    band: FrequencyBand,
    alpha2: f64,
    scan: LobeScan,
    quad: QuadratureSpec,
) -> Result<f64> {
    if !(alpha2 > 0.0) {
        return Err(CmfError::invalid(format!("alpha2 must be positive, got {alpha2}")));
    }
    if !(scan.limit > alpha2) {
        return Err(CmfError::invalid(format!(
            "scan limit {} must exceed alpha2 {alpha2}",
            scan.limit
        )));
    }
    let peak = autocorrelation(template, band, 0.0, quad)?.re;
    if !(peak > 0.0) {
        return Err(CmfError::ZeroEnergy);
    }
    let values = autocorrelation_many(template, band, &scan.grid(alpha2), quad)?;
    Ok(values.iter().map(|r| r.norm() / peak).fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn band600() -> FrequencyBand {
        FrequencyBand::new(600.0).unwrap()
    }

    #[test]
    fn gaussian_spectrum_at_origin() {
        let t = make_gaussian_pulse(1.0 / 200.0).unwrap();
        let expected = (2.0_f64 / 200.0).sqrt() * PI.powf(0.25);
        assert!((t.spectrum(0.0).re - expected).abs() < 1e-15);
        assert!((expected - 0.13313).abs() < 1e-5);
        assert_eq!(t.case(), SignalCase::Real);
    }

    #[test]
    fn gaussian_rejects_nonpositive_width() {
        assert!(matches!(make_gaussian_pulse(0.0), Err(CmfError::InvalidParameter(_))));
        assert!(make_gaussian_pulse(-1.0).is_err());
    }

    #[test]
    fn gaussian_energy_close_to_full_line() {
        let a = 1.0 / 200.0;
        let m = compute_metrics(&make_gaussian_pulse(a).unwrap(), band600(), QuadratureSpec::default()).unwrap();
        assert!((m.l2sq - 2.0 * PI).abs() < 1.4e-4);
        // ‖ŝ₀‖₄² = (2π)^{3/4} √a, truncation error far below 1e-8
        assert!((m.l4_4.sqrt() - (2.0 * PI).powf(0.75) * a.sqrt()).abs() < 1e-8);
        assert!(m.mu1 <= 1.6 && m.mu2 <= 3.4);
    }

    #[test]
    fn flat_band_metrics() {
        let band = band600();
        let full = compute_metrics(&make_flat_band(1.0, band, None).unwrap(), band, QuadratureSpec::default()).unwrap();
        assert!((full.mu1 - 1.0).abs() < 1e-9);
        assert!((full.mu2 - 1.0).abs() < 1e-9);
        // η(|A|=2) = 2·level²·|Ω|/(2π)
        assert!((full.eta(2.0) - 2.0 * 1200.0 / (2.0 * PI)).abs() < 1e-9);

        let sub = make_flat_band(1.0, band, Some((-150.0, 150.0))).unwrap();
        let m = compute_metrics(&sub, band, QuadratureSpec::default()).unwrap();
        assert!((m.mu1 - 2.0).abs() < 1e-9);
        assert!((m.mu2 - 4.0).abs() < 1e-9);
    }

    #[test]
    fn flat_band_rejects_bad_inputs() {
        let band = band600();
        assert!(make_flat_band(0.0, band, None).is_err());
        assert!(make_flat_band(1.0, band, Some((-700.0, 0.0))).is_err());
        assert!(make_flat_band(1.0, band, Some((10.0, 10.0))).is_err());
    }

    #[test]
    fn asymmetric_flat_band_is_complex() {
        let t = make_flat_band(1.0, band600(), Some((0.0, 300.0))).unwrap();
        assert_eq!(t.case(), SignalCase::Complex);
    }

    #[test]
    fn zero_energy_template() {
        let band = FrequencyBand::new(10.0).unwrap();
        let t = Template::custom(vec![20.0, 30.0], vec![1.0, 1.0], SignalCase::Complex).unwrap();
        assert!(matches!(
            compute_metrics(&t, band, QuadratureSpec::with_nodes(64)),
            Err(CmfError::ZeroEnergy)
        ));
    }

    #[test]
    fn quadrature_needs_two_nodes() {
        let t = make_gaussian_pulse(0.01).unwrap();
        assert!(compute_metrics(&t, band600(), QuadratureSpec::with_nodes(1)).is_err());
    }

    #[test]
    fn autocorrelation_at_zero_is_energy() {
        let band = band600();
        let t = make_gaussian_pulse(1.0 / 200.0).unwrap();
        let quad = QuadratureSpec::default();
        let m = compute_metrics(&t, band, quad).unwrap();
        let r0 = autocorrelation(&t, band, 0.0, quad).unwrap();
        assert!((r0.re - m.l2sq / (2.0 * PI)).abs() < 1e-12);
        assert!(r0.im.abs() < 1e-15);
    }

    #[test]
    fn flat_autocorrelation_matches_closed_form() {
        let band = band600();
        let level = 1.5;
        let t = make_flat_band(level, band, None).unwrap();
        let quad = QuadratureSpec::default();
        for &tau in &[0.0013, 0.01, 0.2, 0.77] {
            let r = autocorrelation(&t, band, tau, quad).unwrap();
            let exact = level * level / PI * (600.0 * tau).sin() / tau;
            assert!((r.re - exact).abs() < 1e-8 * (level * level * 1200.0), "tau={tau}: {} vs {exact}", r.re);
            assert!(r.im.abs() < 1e-9);
        }
    }

    #[test]
    fn gaussian_sidelobe_level() {
        let a = 1.0 / 200.0;
        let band = band600();
        let t = make_gaussian_pulse(a).unwrap();
        let quad = QuadratureSpec::with_nodes(1 << 12);
        let ratio = autocorrelation(&t, band, 3.0 * a, quad).unwrap().re / autocorrelation(&t, band, 0.0, quad).unwrap().re;
        assert!(ratio <= 0.1054 + 1e-4);
        assert!((ratio - (-9.0f64 / 4.0).exp()).abs() < 1e-4);
        let alpha1 = lobe_profile(&t, band, 3.0 * a, LobeScan { limit: 1.0, points: 400 }, quad).unwrap();
        assert!((alpha1 - 0.1054).abs() < 1e-3, "{alpha1}");
    }

    #[test]
    fn flat_lobe_profile_matches_sinc_scan() {
        let band = band600();
        let t = make_flat_band(1.0, band, None).unwrap();
        let alpha2 = 2.0 * PI / 600.0;
        let scan = LobeScan { limit: 0.2, points: 3000 };
        let alpha1 = lobe_profile(&t, band, alpha2, scan, QuadratureSpec::with_nodes(1 << 14)).unwrap();
        // closed-form |sinc(ω_max τ)| on the same grid
        let oracle = scan
            .grid(alpha2)
            .iter()
            .map(|tau| ((600.0 * tau).sin() / (600.0 * tau)).abs())
            .fold(0.0, f64::max);
        assert!((alpha1 - oracle).abs() < 1e-6, "{alpha1} vs {oracle}");
        assert!(alpha1 <= 0.217);
        assert!((alpha1 - 0.1284).abs() < 2e-3);
    }

    #[test]
    fn lobe_profile_tends_to_one_near_peak() {
        let band = band600();
        let t = make_gaussian_pulse(0.005).unwrap();
        let alpha1 = lobe_profile(&t, band, 1e-7, LobeScan { limit: 0.1, points: 50 }, QuadratureSpec::with_nodes(4096)).unwrap();
        assert!(alpha1 > 0.999_999);
    }

    #[test]
    fn lobe_profile_rejects_short_scan() {
        let band = band600();
        let t = make_gaussian_pulse(0.005).unwrap();
        let q = QuadratureSpec::with_nodes(64);
        assert!(lobe_profile(&t, band, 0.5, LobeScan { limit: 0.5, points: 10 }, q).is_err());
        assert!(lobe_profile(&t, band, 0.0, LobeScan { limit: 0.5, points: 10 }, q).is_err());
    }

    #[test]
    fn metrics_converge_under_refinement() {
        let band = band600();
        for t in [
            make_gaussian_pulse(1.0 / 200.0).unwrap(),
            make_flat_band(2.0, band, Some((-100.0, 250.0))).unwrap(),
        ] {
            let a = compute_metrics(&t, band, QuadratureSpec::default()).unwrap();
            let b = compute_metrics(&t, band, QuadratureSpec::with_nodes(2 * QuadratureSpec::DEFAULT_NODES)).unwrap();
            for (x, y) in [(a.l2sq, b.l2sq), (a.l4_4, b.l4_4), (a.mu1, b.mu1), (a.mu2, b.mu2)] {
                assert!(((x - y) / y).abs() < 1e-8, "{x} vs {y}");
            }
        }
    }

    #[test]
    fn template_json_forms() {
        let band = band600();
        let g = TemplateSpec::from_json(r#"{"kind": "gaussian", "a": 0.005}"#).unwrap();
        assert_eq!(g.build(band).unwrap(), make_gaussian_pulse(0.005).unwrap());
        let f = TemplateSpec::from_json(r#"{"kind": "flat", "level": 1.0, "support": [-300, 300]}"#).unwrap();
        assert_eq!(f.build(band).unwrap(), make_flat_band(1.0, band, Some((-300.0, 300.0))).unwrap());
        let c = TemplateSpec::from_json(r#"{"kind": "custom", "omega": [-600, 0, 600], "mag": [0, 1, 0], "case": "real"}"#)
            .unwrap()
            .build(band)
            .unwrap();
        assert!(c.is_approximate());
        assert_eq!(c.case(), SignalCase::Real);
        assert!((c.spectrum(300.0).re - 0.5).abs() < 1e-15);
        assert!(TemplateSpec::from_json(r#"{"kind": "triangle"}"#).is_err());
    }

    #[test]
    fn custom_triangle_metrics() {
        // |ŝ| = 1 - |ω|/W on [-W, W]: ‖ŝ‖₂² = 2W/3, ‖ŝ‖₄⁴ = 2W/5
        let band = FrequencyBand::new(100.0).unwrap();
        let t = Template::custom(vec![-100.0, 0.0, 100.0], vec![0.0, 1.0, 0.0], SignalCase::Real).unwrap();
        let m = compute_metrics(&t, band, QuadratureSpec::default()).unwrap();
        assert!((m.l2sq - 200.0 / 3.0).abs() < 1e-6);
        assert!((m.l4_4 - 40.0).abs() < 1e-6);
        assert_eq!(m.linf_sq, 1.0);
    }
}
