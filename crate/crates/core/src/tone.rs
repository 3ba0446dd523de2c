//! Pure-tone frequency estimation from random time samples and chirp
//! time-of-arrival estimation by de-chirping.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{CmfError, Result};
use crate::sampling::{RngSpec, Stream, ToneMeasurements};
use crate::templates::{FrequencyBand, SearchWindow};

/// `X(ω) = Σ_k y[k]·e^{-iωt_k}`.
pub fn tone_process(meas: &ToneMeasurements, omega: f64) -> Complex64 {
    meas.times
        .iter()
        .zip(&meas.y)
        .map(|(&t, y)| y * Complex64::from_polar(1.0, -omega * t))
        .sum()
}

/// Ideal `R_ŝŝ(ω) = 2π|T|·sinc(|T|ω/2)` with `sinc(x) = sin(x)/x`.
pub fn ideal_tone_acf(window: SearchWindow, omega: f64) -> f64 {
    let len = window.length();
    let x = 0.5 * len * omega;
    let sinc = if x == 0.0 { 1.0 } else { x.sin() / x };
    2.0 * PI * len * sinc
}

#[derive(Debug, Clone, PartialEq)]
pub struct ToneTrace {
    pub omegas: Vec<f64>,
    pub values: Vec<Complex64>,
    /// `2π|T|/m`.
    pub scale: f64,
}

impl ToneTrace {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["omega", "re", "im", "abs"])?;
        for (omega, v) in self.omegas.iter().zip(&self.values) {
            w.write_record([
                omega.to_string(),
                v.re.to_string(),
                v.im.to_string(),
                v.norm().to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `R̃_ŝŝ(ω) = (2π|T|/m)·X(ω)` on `grid ⊆ Ω`.
pub fn tone_acf_estimate(meas: &ToneMeasurements, band: FrequencyBand, grid: &[f64]) -> Result<ToneTrace> {
    if grid.is_empty() {
        return Err(CmfError::invalid("evaluation grid is empty"));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(CmfError::invalid("evaluation grid must be strictly increasing"));
    }
    if let Some(w) = grid.iter().find(|w| !band.contains(**w)) {
        return Err(CmfError::invalid(format!("grid frequency {w} outside the band")));
    }
    let scale = 2.0 * PI * meas.window.length() / meas.m() as f64;
    Ok(ToneTrace {
        omegas: grid.to_vec(),
        values: grid.iter().map(|&w| scale * tone_process(meas, w)).collect(),
        scale,
    })
}

/// Frequencies `-ω_max + j·2π/|T|` inside `Ω`, plus `ω_max` itself when the
/// last step falls short of it.
pub fn nyquist_grid(band: FrequencyBand, window: SearchWindow) -> Vec<f64> {
    let spacing = 2.0 * PI / window.length();
    let count = (band.width() / spacing).floor() as usize;
    let mut grid: Vec<f64> = (0..=count).map(|j| band.lo() + j as f64 * spacing).collect();
    grid.retain(|w| *w <= band.hi());
    if band.hi() - grid[grid.len() - 1] > 1e-9 * spacing {
        grid.push(band.hi());
    }
    grid
}

/// Sign of `|X(b)|² - |X(a)|²` without cancellation.
///
/// With `c = (a+b)/2` and `h = (b-a)/2`, `X(b) - X(a) = Σ y e^{-ict}·(-2i sin ht)`
/// and `X(b) + X(a) = Σ y e^{-ict}·2cos ht`, and the difference of squared
/// magnitudes is `Re((X(b) - X(a))·conj(X(b) + X(a)))`. Forming the two
/// magnitudes separately loses everything below `√ε` of the peak.
fn power_difference(meas: &ToneMeasurements, a: f64, b: f64) -> f64 {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut diff = Complex64::new(0.0, 0.0);
    let mut sum = Complex64::new(0.0, 0.0);
    for (&t, y) in meas.times.iter().zip(&meas.y) {
        let base = y * Complex64::from_polar(1.0, -c * t);
        let (s, co) = (h * t).sin_cos();
        diff += base * Complex64::new(0.0, -2.0 * s);
        sum += base * (2.0 * co);
    }
    (diff * sum.conj()).re
}

const GOLDEN: f64 = 0.618_033_988_749_894_8;
const MAX_ITERATIONS: usize = 300;

fn golden_section(meas: &ToneMeasurements, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    let (mut a, mut b) = (lo, hi);
    let mut c = b - GOLDEN * (b - a);
    let mut d = a + GOLDEN * (b - a);
    for _ in 0..MAX_ITERATIONS {
        if b - a < tol || !(a < c && c < d && d < b) {
            break;
        }
        let cmp = power_difference(meas, c, d);
        if !cmp.is_finite() {
            return Err(CmfError::Numeric(format!("non-finite objective near {c}")));
        }
        if cmp > 0.0 {
            a = c;
            c = d;
            d = a + GOLDEN * (b - a);
        } else {
            b = d;
            d = c;
            c = b - GOLDEN * (b - a);
        }
    }
    Ok(0.5 * (a + b))
}

/// Golden-section maximization of `|R̃_ŝŝ(ω)|²` on
/// `[omega_start - radius, omega_start + radius]`; returns the midpoint of
/// the final bracket.
pub fn concave_refine(meas: &ToneMeasurements, omega_start: f64, radius: f64, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(CmfError::invalid(format!("tolerance must be positive, got {tol}")));
    }
    if !(radius >= 0.0 && radius.is_finite() && omega_start.is_finite()) {
        return Err(CmfError::invalid(format!("bad refinement bracket {omega_start} ± {radius}")));
    }
    golden_section(meas, omega_start - radius, omega_start + radius, tol)
}

/// `1e-12·(2π/|T|)`.
pub fn default_tolerance(window: SearchWindow) -> f64 {
    1e-12 * 2.0 * PI / window.length()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToneEstimate {
    pub omega_hat: f64,
    pub a_hat: Complex64,
    /// Nyquist-grid winner before refinement.
    pub grid_point: f64,
    pub ascent_starts: [f64; 4],
}

/// Nyquist-grid search followed by four concave ascents from
/// `ω̂ ± π/(2|T|)` and `ω̂ ± 3π/(2|T|)`, each of radius `π/(2|T|)` and
/// clipped to `Ω`. The ascent with the largest `|X|` wins, ties to the
/// smaller frequency; `Â = X(ω̂)/m`.
pub fn estimate_tone(meas: &ToneMeasurements, band: FrequencyBand, tol: Option<f64>) -> Result<ToneEstimate> {
    let window = meas.window;
    let tol = tol.unwrap_or_else(|| default_tolerance(window));
    let grid = nyquist_grid(band, window);
    let mut grid_point = grid[0];
    let mut best = tone_process(meas, grid_point).norm();
    for &w in &grid[1..] {
        let v = tone_process(meas, w).norm();
        if v > best {
            best = v;
            grid_point = w;
        }
    }

    let q = PI / (2.0 * window.length());
    let starts = [grid_point - 3.0 * q, grid_point - q, grid_point + q, grid_point + 3.0 * q];
    let mut refined = Vec::with_capacity(4);
    for s in starts {
        let lo = (s - q).max(band.lo());
        let hi = (s + q).min(band.hi());
        let omega = if lo < hi {
            golden_section(meas, lo, hi, tol)?
        } else {
            s.clamp(band.lo(), band.hi())
        };
        refined.push(omega);
    }
    refined.sort_by(f64::total_cmp);
    let mut omega_hat = refined[0];
    for &w in &refined[1..] {
        if power_difference(meas, omega_hat, w) > 0.0 {
            omega_hat = w;
        }
    }
    Ok(ToneEstimate {
        omega_hat,
        a_hat: tone_process(meas, omega_hat) / meas.m() as f64,
        grid_point,
        ascent_starts: starts,
    })
}

/// Linear chirp `A·exp(j(ω_c(t - t₀) + (α/2)(t - t₀)²))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChirpSpec {
    pub omega_c: f64,
    pub alpha: f64,
    pub t0: f64,
    #[serde(default = "unit_amplitude")]
    pub amplitude: Complex64,
}

fn unit_amplitude() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

impl ChirpSpec {
    pub fn new(omega_c: f64, alpha: f64, t0: f64, amplitude: Complex64) -> Result<Self> {
        if alpha == 0.0 || !alpha.is_finite() {
            return Err(CmfError::invalid("chirp rate alpha must be non-zero"));
        }
        Ok(Self {
            omega_c,
            alpha,
            t0,
            amplitude,
        })
    }

    pub fn sample(&self, t: f64) -> Complex64 {
        let d = t - self.t0;
        self.amplitude * Complex64::from_polar(1.0, self.omega_c * d + 0.5 * self.alpha * d * d)
    }

    /// `Ã = A·e^{j(-ω_c t₀ + (α/2)t₀²)}`.
    pub fn dechirped_amplitude(&self) -> Complex64 {
        self.amplitude * Complex64::from_polar(1.0, -self.omega_c * self.t0 + 0.5 * self.alpha * self.t0 * self.t0)
    }
}

/// Chirp samples at random times.
#[derive(Debug, Clone, PartialEq)]
pub struct ChirpSamples {
    pub window: SearchWindow,
    pub times: Vec<f64>,
    pub x: Vec<Complex64>,
    pub seed: RngSpec,
}

pub fn synthesize_chirp_samples(
    chirp: &ChirpSpec,
    window: SearchWindow,
    times: Vec<f64>,
    sigma_n: f64,
    rng: RngSpec,
) -> Result<ChirpSamples> {
    if !(sigma_n.is_finite() && sigma_n >= 0.0) {
        return Err(CmfError::invalid(format!("sigma_n must be non-negative, got {sigma_n}")));
    }
    let mut noise = rng.generator(Stream::Noise);
    let x = times
        .iter()
        .map(|&t| {
            let clean = chirp.sample(t);
            if sigma_n > 0.0 {
                clean + noise.complex_gaussian(sigma_n)
            } else {
                clean
            }
        })
        .collect();
    Ok(ChirpSamples {
        window,
        times,
        x,
        seed: rng,
    })
}

/// `x̃(t_k) = x(t_k)·exp(-j(ω_c t_k + (α/2)t_k²))`.
pub fn dechirp(samples: &ChirpSamples, omega_c: f64, alpha: f64) -> Result<ToneMeasurements> {
    let y = samples
        .times
        .iter()
        .zip(&samples.x)
        .map(|(&t, x)| x * Complex64::from_polar(1.0, -(omega_c * t + 0.5 * alpha * t * t)))
        .collect();
    ToneMeasurements::from_parts(samples.window, samples.times.clone(), y, samples.seed)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChirpEstimate {
    pub t0_hat: f64,
    /// Frequency of the de-chirped tone, `-α·t₀`.
    pub omega_hat: f64,
    /// Estimate of `Ã`.
    pub a_tilde_hat: Complex64,
}

/// De-chirps, estimates the tone frequency on `band`, and maps it back to
/// `t̂₀ = -ω̂/α`; `band` must contain `-α·t₀` for every admissible `t₀`.
pub fn estimate_chirp_toa(
    samples: &ChirpSamples,
    omega_c: f64,
    alpha: f64,
    band: FrequencyBand,
    tol: Option<f64>,
) -> Result<ChirpEstimate> {
    if alpha == 0.0 || !alpha.is_finite() {
        return Err(CmfError::invalid("chirp rate alpha must be non-zero"));
    }
    let tone = dechirp(samples, omega_c, alpha)?;
    let est = estimate_tone(&tone, band, tol)?;
    Ok(ChirpEstimate {
        t0_hat: -est.omega_hat / alpha,
        omega_hat: est.omega_hat,
        a_tilde_hat: est.a_hat,
    })
}
