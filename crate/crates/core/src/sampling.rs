//! Random sample locations and synthetic observations.
//!
//! Every draw comes from a ChaCha8 stream keyed by `(master_seed,
//! stream_index)` and a fixed per-purpose stream id, so a trial can be
//! replayed in isolation and trials can run in any order.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CmfError, Result};
use crate::templates::{FrequencyBand, SearchWindow, SignalCase, Template};

/// Seed of one trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngSpec {
    pub master_seed: u64,
    pub stream_index: u64,
}

/// Independent sub-streams of a trial, one per kind of draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Frequencies = 0,
    Noise = 1,
    Times = 2,
    Truth = 3,
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl RngSpec {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        Self {
            master_seed,
            stream_index,
        }
    }

    /// `mix(master, index)`: one splitmix64 step of the master seed, xored
    /// with the index times the golden-ratio constant, then one more step.
    pub fn stream_seed(&self) -> u64 {
        let mut s = self.master_seed;
        let mut t = splitmix64(&mut s) ^ self.stream_index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
        splitmix64(&mut t)
    }

    /// Generator for one purpose: a ChaCha8 key made of four splitmix64
    /// outputs seeded by [`stream_seed`](Self::stream_seed), stream id set to
    /// the purpose.
    pub fn generator(&self, stream: Stream) -> SampleRng {
        let mut state = self.stream_seed();
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(stream as u64);
        SampleRng { rng }
    }
}

pub struct SampleRng {
    rng: ChaCha8Rng,
}

impl SampleRng {
    /// Uniform on `[0, 1)` from the top 53 bits of one `u64`.
    pub fn uniform01(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform01()
    }

    /// Circular complex Gaussian with `E|n|² = sigma²`: Box–Muller from
    /// `u1 = 1 - U`, then `u2 = U`, in that order.
    pub fn complex_gaussian(&mut self, sigma: f64) -> Complex64 {
        let u1 = 1.0 - self.uniform01();
        let u2 = self.uniform01();
        let r = (-2.0 * u1.ln()).sqrt() * sigma / 2f64.sqrt();
        let (s, c) = (2.0 * PI * u2).sin_cos();
        Complex64::new(r * c, r * s)
    }
}

fn check_count(m: usize) -> Result<()> {
    if m == 0 {
        return Err(CmfError::invalid("sample count m must be at least 1"));
    }
    Ok(())
}

/// `m` i.i.d. uniform frequencies on `Ω`.
pub fn draw_frequencies(band: FrequencyBand, m: usize, rng: RngSpec) -> Result<Vec<f64>> {
    check_count(m)?;
    let mut g = rng.generator(Stream::Frequencies);
    Ok((0..m).map(|_| g.uniform(band.lo(), band.hi())).collect())
}

/// `m` i.i.d. uniform times on `T`.
pub fn draw_times(window: SearchWindow, m: usize, rng: RngSpec) -> Result<Vec<f64>> {
    check_count(m)?;
    let mut g = rng.generator(Stream::Times);
    Ok((0..m).map(|_| g.uniform(window.tau_min(), window.tau_max())).collect())
}

/// Unknowns of the delay problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayScene {
    pub amplitude: Complex64,
    pub tau0: f64,
    pub sigma_n: f64,
}

impl DelayScene {
    pub fn new(amplitude: Complex64, tau0: f64, sigma_n: f64) -> Result<Self> {
        if !(sigma_n.is_finite() && sigma_n >= 0.0) {
            return Err(CmfError::invalid(format!("sigma_n must be non-negative, got {sigma_n}")));
        }
        if !(amplitude.re.is_finite() && amplitude.im.is_finite() && tau0.is_finite()) {
            return Err(CmfError::invalid("scene amplitude and delay must be finite"));
        }
        Ok(Self {
            amplitude,
            tau0,
            sigma_n,
        })
    }

    pub fn real(amplitude: f64, tau0: f64, sigma_n: f64) -> Result<Self> {
        Self::new(Complex64::new(amplitude, 0.0), tau0, sigma_n)
    }

    pub fn with_sigma(self, sigma_n: f64) -> Result<Self> {
        Self::new(self.amplitude, self.tau0, sigma_n)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DelayMeasurements {
    pub band: FrequencyBand,
    pub freqs: Vec<f64>,
    pub y: Vec<Complex64>,
    pub sigma_n: f64,
    pub seed: RngSpec,
}

impl DelayMeasurements {
    /// Assembles a measurement set from raw parts, checking lengths and ranges.
    pub fn from_parts(
        band: FrequencyBand,
        freqs: Vec<f64>,
        y: Vec<Complex64>,
        sigma_n: f64,
        seed: RngSpec,
    ) -> Result<Self> {
        check_count(freqs.len())?;
        if freqs.len() != y.len() {
            return Err(CmfError::invalid(format!(
                "{} frequencies but {} observations",
                freqs.len(),
                y.len()
            )));
        }
        if let Some(w) = freqs.iter().find(|w| !band.contains(**w)) {
            return Err(CmfError::invalid(format!("frequency {w} outside the band")));
        }
        Ok(Self {
            band,
            freqs,
            y,
            sigma_n,
            seed,
        })
    }

    pub fn m(&self) -> usize {
        self.freqs.len()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&DelayWire {
            omega_max: self.band.omega_max(),
            freqs: self.freqs.clone(),
            y: interleave(&self.y),
            sigma_n: self.sigma_n,
            seed: self.seed,
        })?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let w: DelayWire = serde_json::from_str(text)?;
        Self::from_parts(
            FrequencyBand::new(w.omega_max)?,
            w.freqs,
            deinterleave(&w.y)?,
            w.sigma_n,
            w.seed,
        )
    }
}

#[derive(Serialize, Deserialize)]
struct DelayWire {
    omega_max: f64,
    freqs: Vec<f64>,
    /// `[re0, im0, re1, im1, ...]`
    y: Vec<f64>,
    sigma_n: f64,
    seed: RngSpec,
}

fn interleave(y: &[Complex64]) -> Vec<f64> {
    y.iter().flat_map(|z| [z.re, z.im]).collect()
}

fn deinterleave(v: &[f64]) -> Result<Vec<Complex64>> {
    if !v.len().is_multiple_of(2) {
        return Err(CmfError::invalid("interleaved complex array has odd length"));
    }
    Ok(v.chunks_exact(2).map(|p| Complex64::new(p[0], p[1])).collect())
}

/// `y[k] = A e^{-iω_kτ₀} ŝ(ω_k) + n_k`, with noise from the trial's noise stream.
pub fn synthesize_delay_measurements(
    template: &Template,
    band: FrequencyBand,
    scene: &DelayScene,
    freqs: Vec<f64>,
    rng: RngSpec,
) -> Result<DelayMeasurements> {
    if template.case() == SignalCase::Real && scene.amplitude.im != 0.0 {
        return Err(CmfError::invalid("real-case template requires a real amplitude"));
    }
    let mut noise = rng.generator(Stream::Noise);
    let y = freqs
        .iter()
        .map(|&w| {
            let clean = scene.amplitude * Complex64::from_polar(1.0, -w * scene.tau0) * template.spectrum_in_band(band, w);
            if scene.sigma_n > 0.0 {
                clean + noise.complex_gaussian(scene.sigma_n)
            } else {
                clean
            }
        })
        .collect();
    DelayMeasurements::from_parts(band, freqs, y, scene.sigma_n, rng)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ToneMeasurements {
    pub window: SearchWindow,
    pub times: Vec<f64>,
    pub y: Vec<Complex64>,
    /// Truth, when known.
    pub omega0: Option<f64>,
    pub sigma_n: f64,
    pub seed: RngSpec,
}

impl ToneMeasurements {
    pub fn from_parts(window: SearchWindow, times: Vec<f64>, y: Vec<Complex64>, seed: RngSpec) -> Result<Self> {
        check_count(times.len())?;
        if times.len() != y.len() {
            return Err(CmfError::invalid(format!(
                "{} times but {} observations",
                times.len(),
                y.len()
            )));
        }
        if let Some(t) = times.iter().find(|t| !window.contains(**t)) {
            return Err(CmfError::invalid(format!("time {t} outside the window")));
        }
        Ok(Self {
            window,
            times,
            y,
            omega0: None,
            sigma_n: 0.0,
            seed,
        })
    }

    pub fn m(&self) -> usize {
        self.times.len()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&ToneWire {
            t_min: self.window.tau_min(),
            t_max: self.window.tau_max(),
            times: self.times.clone(),
            y: interleave(&self.y),
            omega0: self.omega0,
            sigma_n: self.sigma_n,
            seed: self.seed,
        })?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let w: ToneWire = serde_json::from_str(text)?;
        let mut meas = Self::from_parts(SearchWindow::new(w.t_min, w.t_max)?, w.times, deinterleave(&w.y)?, w.seed)?;
        meas.omega0 = w.omega0;
        meas.sigma_n = w.sigma_n;
        Ok(meas)
    }
}

#[derive(Serialize, Deserialize)]
struct ToneWire {
    t_min: f64,
    t_max: f64,
    times: Vec<f64>,
    y: Vec<f64>,
    omega0: Option<f64>,
    sigma_n: f64,
    seed: RngSpec,
}

/// `y[k] = A e^{iω₀t_k} + n_k`.
pub fn synthesize_tone_measurements(
    omega0: f64,
    amplitude: Complex64,
    sigma_n: f64,
    window: SearchWindow,
    times: Vec<f64>,
    rng: RngSpec,
) -> Result<ToneMeasurements> {
    if !(sigma_n.is_finite() && sigma_n >= 0.0) {
        return Err(CmfError::invalid(format!("sigma_n must be non-negative, got {sigma_n}")));
    }
    let mut noise = rng.generator(Stream::Noise);
    let y = times
        .iter()
        .map(|&t| {
            let clean = amplitude * Complex64::from_polar(1.0, omega0 * t);
            if sigma_n > 0.0 {
                clean + noise.complex_gaussian(sigma_n)
            } else {
                clean
            }
        })
        .collect();
    let mut meas = ToneMeasurements::from_parts(window, times, y, rng)?;
    meas.omega0 = Some(omega0);
    meas.sigma_n = sigma_n;
    Ok(meas)
}
