//! Correlation process `X(τ) = ⟨y, ψ_τ⟩`, its rescaling into an
//! autocorrelation estimate, and the grid-search delay/amplitude estimator.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{CmfError, Result};
use crate::sampling::{DelayMeasurements, DelayScene};
use crate::templates::{autocorrelation_many, FrequencyBand, QuadratureSpec, SearchWindow, SignalCase, Template};

/// `ψ_τ[k] = e^{-iω_kτ} ŝ(ω_k)`.
pub fn test_vector_entry(omega: f64, tau: f64, template: &Template) -> Complex64 {
    Complex64::from_polar(1.0, -omega * tau) * template.spectrum(omega)
}

/// `X(τ) = Σ_k y[k]·conj(ψ_τ[k])`, summed in sample order.
pub fn correlation_process(meas: &DelayMeasurements, template: &Template, tau: f64) -> Complex64 {
    meas.freqs
        .iter()
        .zip(&meas.y)
        .map(|(&w, y)| y * test_vector_entry(w, tau, template).conj())
        .sum()
}

/// `y[k]·conj(ŝ(ω_k))`, so that `X(τ) = Σ_k w_k e^{iω_kτ}`.
fn matched_weights(meas: &DelayMeasurements, template: &Template) -> Vec<Complex64> {
    meas.freqs
        .iter()
        .zip(&meas.y)
        .map(|(&w, y)| y * template.spectrum(w).conj())
        .collect()
}

/// `‖ψ_τ‖₂² = Σ_k |ŝ(ω_k)|²`, independent of `τ`.
pub fn test_vector_energy(meas: &DelayMeasurements, template: &Template) -> f64 {
    meas.freqs.iter().map(|&w| template.spectrum(w).norm_sqr()).sum()
}

/// `{start, start + h, ..., stop}` with `h = (stop - start)/intervals`.
///
/// Points are computed as `start + i·(stop - start)/intervals` so that any
/// point representable that way (for instance a delay at a whole number of
/// steps from `start`) lands on the grid exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformGrid {
    pub start: f64,
    pub stop: f64,
    pub intervals: usize,
}

impl UniformGrid {
    /// Grid over `[start, stop]` with spacing at most `step`.
    pub fn with_step(start: f64, stop: f64, step: f64) -> Result<Self> {
        if !(step.is_finite() && step > 0.0) {
            return Err(CmfError::invalid(format!("grid step must be positive, got {step}")));
        }
        if !(start.is_finite() && stop.is_finite() && stop >= start) {
            return Err(CmfError::invalid(format!("bad grid range [{start}, {stop}]")));
        }
        let intervals = ((stop - start) / step - 1e-9).ceil().max(0.0) as usize;
        Ok(Self { start, stop, intervals })
    }

    pub fn over_window(window: SearchWindow, step: f64) -> Result<Self> {
        Self::with_step(window.tau_min(), window.tau_max(), step)
    }

    pub fn len(&self) -> usize {
        self.intervals + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn step(&self) -> f64 {
        if self.intervals == 0 {
            0.0
        } else {
            (self.stop - self.start) / self.intervals as f64
        }
    }

    pub fn point(&self, i: usize) -> f64 {
        if self.intervals == 0 {
            return self.start;
        }
        self.start + (i as f64 * (self.stop - self.start)) / self.intervals as f64
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.point(i)).collect()
    }
}

/// `min(α₂/4, 1/(4|Ω|))`, or `1/(4|Ω|)` without `α₂`.
pub fn default_grid_step(band: FrequencyBand, alpha2: Option<f64>) -> f64 {
    let base = 1.0 / (4.0 * band.width());
    match alpha2 {
        Some(a) if a > 0.0 => base.min(a / 4.0),
        _ => base,
    }
}

/// Sampled estimate `R̃_ss` on a grid of shifts.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationTrace {
    pub taus: Vec<f64>,
    /// Purely real in the Real case.
    pub values: Vec<Complex64>,
    /// `|Ω|/(2πm)`.
    pub scale: f64,
    pub case: SignalCase,
}

impl CorrelationTrace {
    pub fn len(&self) -> usize {
        self.taus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taus.is_empty()
    }

    pub fn magnitude(&self, i: usize) -> f64 {
        self.values[i].norm()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["tau", "re", "im", "abs"])?;
        for (tau, v) in self.taus.iter().zip(&self.values) {
            w.write_record([
                tau.to_string(),
                v.re.to_string(),
                v.im.to_string(),
                v.norm().to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn estimate_scale(band: FrequencyBand, m: usize) -> f64 {
    band.width() / (2.0 * PI * m as f64)
}

fn finish_trace(taus: Vec<f64>, raw: Vec<Complex64>, scale: f64, case: SignalCase) -> CorrelationTrace {
    let values = raw
        .into_iter()
        .map(|x| match case {
            SignalCase::Real => Complex64::new(scale * x.re, 0.0),
            SignalCase::Complex => scale * x,
        })
        .collect();
    CorrelationTrace {
        taus,
        values,
        scale,
        case,
    }
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(CmfError::invalid("evaluation grid is empty"));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(CmfError::invalid("evaluation grid must be strictly increasing"));
    }
    Ok(())
}

/// `R̃_ss(τ) = (|Ω|/2πm)·Re X(τ)` (Real case) or `(|Ω|/2πm)·X(τ)` (Complex
/// case) at arbitrary shifts, each sum evaluated directly.
pub fn acf_estimate(meas: &DelayMeasurements, template: &Template, grid: &[f64]) -> Result<CorrelationTrace> {
    check_grid(grid)?;
    let weights = matched_weights(meas, template);
    let raw = grid
        .par_iter()
        .map(|&tau| {
            meas.freqs
                .iter()
                .zip(&weights)
                .map(|(&w, c)| c * Complex64::from_polar(1.0, w * tau))
                .sum()
        })
        .collect();
    Ok(finish_trace(
        grid.to_vec(),
        raw,
        estimate_scale(meas.band, meas.m()),
        template.case(),
    ))
}

/// Grid points handled per phase anchor in [`acf_estimate_uniform`].
const BLOCK: usize = 64;

/// [`acf_estimate`] on a uniform grid.
///
/// Within each block of consecutive grid points the phase `e^{iω_kτ}` is
/// advanced by multiplying with `e^{iω_kh}`, starting from an exact value
/// at the block's first point. Each value is still the plain sum over `k`
/// in sample order.
pub fn acf_estimate_uniform(meas: &DelayMeasurements, template: &Template, grid: &UniformGrid) -> Result<CorrelationTrace> {
    let weights = matched_weights(meas, template);
    let raw = correlate_uniform(&meas.freqs, &weights, grid);
    Ok(finish_trace(
        grid.points(),
        raw,
        estimate_scale(meas.band, meas.m()),
        template.case(),
    ))
}

fn correlate_uniform(freqs: &[f64], weights: &[Complex64], grid: &UniformGrid) -> Vec<Complex64> {
    let n = grid.len();
    let h = grid.step();
    let blocks: Vec<Vec<Complex64>> = (0..n.div_ceil(BLOCK))
        .into_par_iter()
        .map(|b| {
            let first = b * BLOCK;
            let len = BLOCK.min(n - first);
            let tau0 = grid.point(first);
            let mut acc = vec![Complex64::new(0.0, 0.0); len];
            for (&w, c) in freqs.iter().zip(weights) {
                let rot = Complex64::from_polar(1.0, w * h);
                let mut term = c * Complex64::from_polar(1.0, w * tau0);
                for slot in acc.iter_mut() {
                    *slot += term;
                    term *= rot;
                }
            }
            acc
        })
        .collect();
    blocks.concat()
}

/// Index, shift and magnitude of the largest `|R̃|`; ties go to the
/// smallest shift.
pub fn grid_search(trace: &CorrelationTrace) -> Result<(usize, f64, f64)> {
    if trace.is_empty() {
        return Err(CmfError::invalid("cannot search an empty trace"));
    }
    let mut best = 0;
    let mut best_val = trace.magnitude(0);
    for i in 1..trace.len() {
        let v = trace.magnitude(i);
        if v > best_val {
            best = i;
            best_val = v;
        }
    }
    Ok((best, trace.taus[best], best_val))
}

/// Peak magnitude minus the largest magnitude farther than `alpha2` from
/// the peak; `None` when every grid point is within `alpha2`.
pub fn runner_up_gap(trace: &CorrelationTrace, peak_index: usize, alpha2: f64) -> Option<f64> {
    let center = trace.taus[peak_index];
    let peak = trace.magnitude(peak_index);
    trace
        .taus
        .iter()
        .enumerate()
        .filter(|(_, t)| (**t - center).abs() > alpha2)
        .map(|(i, _)| trace.magnitude(i))
        .reduce(f64::max)
        .map(|r| peak - r)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayEstimate {
    pub tau_hat: f64,
    /// Real in the Real case.
    pub a_hat: Complex64,
    pub peak_value: f64,
    pub runner_up_gap: Option<f64>,
    pub grid_index: usize,
}

/// Least-squares amplitude at a given shift.
pub fn amplitude_at(meas: &DelayMeasurements, template: &Template, tau: f64) -> Result<Complex64> {
    let energy = test_vector_energy(meas, template);
    if !(energy > 0.0) {
        return Err(CmfError::DegenerateMeasurement(
            "every sampled frequency falls where the template spectrum vanishes".into(),
        ));
    }
    let x = correlation_process(meas, template, tau);
    Ok(match template.case() {
        SignalCase::Real => Complex64::new(x.re / energy, 0.0),
        SignalCase::Complex => x / energy,
    })
}

/// Completes an estimate from an already evaluated trace.
pub fn estimate_from_trace(
    meas: &DelayMeasurements,
    template: &Template,
    trace: &CorrelationTrace,
    alpha2: Option<f64>,
) -> Result<DelayEstimate> {
    let (idx, tau_hat, peak_value) = grid_search(trace)?;
    Ok(DelayEstimate {
        tau_hat,
        a_hat: amplitude_at(meas, template, tau_hat)?,
        peak_value,
        runner_up_gap: alpha2.and_then(|a| runner_up_gap(trace, idx, a)),
        grid_index: idx,
    })
}

/// Grid search of `|R̃_ss|` over `{τ_min, τ_min + step, ..., τ_max}`
/// followed by the closed-form amplitude.
pub fn estimate_delay_amplitude(
    meas: &DelayMeasurements,
    template: &Template,
    window: SearchWindow,
    grid_step: f64,
    alpha2: Option<f64>,
) -> Result<DelayEstimate> {
    if test_vector_energy(meas, template) <= 0.0 {
        return Err(CmfError::DegenerateMeasurement(
            "every sampled frequency falls where the template spectrum vanishes".into(),
        ));
    }
    let grid = UniformGrid::over_window(window, grid_step)?;
    let trace = acf_estimate_uniform(meas, template, &grid)?;
    estimate_from_trace(meas, template, &trace, alpha2)
}

/// `A·R_ss(τ - τ₀)` on `grid`.
pub fn truth_curve(
    template: &Template,
    band: FrequencyBand,
    scene: &DelayScene,
    grid: &[f64],
    quad: QuadratureSpec,
) -> Result<Vec<Complex64>> {
    let shifts: Vec<f64> = grid.iter().map(|t| t - scene.tau0).collect();
    Ok(autocorrelation_many(template, band, &shifts, quad)?
        .into_iter()
        .map(|r| scene.amplitude * r)
        .collect())
}

/// Grid maximum of `|R̃_ss(τ) - A·R_ss(τ - τ₀)|` against a precomputed
/// truth curve. A lower bound on the supremum over the window.
pub fn deviation_supremum_with_truth(trace: &CorrelationTrace, truth: &[Complex64]) -> Result<f64> {
    if trace.len() != truth.len() {
        return Err(CmfError::invalid("truth curve and trace differ in length"));
    }
    Ok(trace
        .values
        .iter()
        .zip(truth)
        .map(|(v, t)| (v - t).norm())
        .fold(0.0, f64::max))
}

/// Grid maximum of `|R̃_ss(τ) - A·R_ss(τ - τ₀)|` over `T` at spacing
/// `fine_grid_step`; a lower bound on the supremum.
pub fn deviation_supremum(
    meas: &DelayMeasurements,
    template: &Template,
    scene: &DelayScene,
    window: SearchWindow,
    fine_grid_step: f64,
    quad: QuadratureSpec,
) -> Result<f64> {
    let grid = UniformGrid::over_window(window, fine_grid_step)?;
    let trace = acf_estimate_uniform(meas, template, &grid)?;
    let truth = truth_curve(template, meas.band, scene, &trace.taus, quad)?;
    deviation_supremum_with_truth(&trace, &truth)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{draw_frequencies, synthesize_delay_measurements, RngSpec};
    use crate::templates::{make_flat_band, make_gaussian_pulse};

    fn gaussian_setup(m: usize, sigma: f64, seed: u64) -> (Template, DelayMeasurements, DelayScene) {
        let band = FrequencyBand::new(600.0).unwrap();
        let t = make_gaussian_pulse(1.0 / 200.0).unwrap();
        let scene = DelayScene::real(1.0, 0.4, sigma).unwrap();
        let rng = RngSpec::new(seed, 0);
        let meas = synthesize_delay_measurements(&t, band, &scene, draw_frequencies(band, m, rng).unwrap(), rng).unwrap();
        (t, meas, scene)
    }

    /// Straight loop over the definition, no shared helpers.
    fn brute_x(meas: &DelayMeasurements, t: &Template, tau: f64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..meas.m() {
            let w = meas.freqs[k];
            let psi = Complex64::new((w * tau).cos(), -(w * tau).sin()) * t.spectrum(w);
            acc += meas.y[k] * psi.conj();
        }
        acc
    }

    #[test]
    fn test_vector_entries() {
        let band = FrequencyBand::new(100.0).unwrap();
        let g = make_gaussian_pulse(0.02).unwrap();
        assert_eq!(test_vector_entry(37.0, 0.0, &g), g.spectrum(37.0));
        assert!((test_vector_entry(-37.0, 0.3, &g) - test_vector_entry(37.0, 0.3, &g).conj()).norm() < 1e-16);
        let f = make_flat_band(1.0, band, None).unwrap();
        assert!((test_vector_entry(12.0, 0.77, &f).norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn flat_noiseless_peak_equals_m() {
        let band = FrequencyBand::new(100.0).unwrap();
        let t = make_flat_band(1.0, band, None).unwrap();
        let scene = DelayScene::real(1.0, 0.25, 0.0).unwrap();
        let rng = RngSpec::new(4, 4);
        let meas = synthesize_delay_measurements(&t, band, &scene, draw_frequencies(band, 40, rng).unwrap(), rng).unwrap();
        let x = correlation_process(&meas, &t, 0.25);
        assert!((x - Complex64::new(40.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn process_matches_brute_force_on_noisy_data() {
        let (t, meas, _) = gaussian_setup(37, 0.3, 99);
        for tau in [0.0, 0.123, 0.4, 0.9876] {
            let a = correlation_process(&meas, &t, tau);
            let b = brute_x(&meas, &t, tau);
            assert!((a - b).norm() <= 1e-12 * b.norm().max(1e-300), "{a} vs {b}");
        }
    }

    #[test]
    fn uniform_path_matches_direct_path() {
        let (t, meas, _) = gaussian_setup(50, 0.2, 5);
        let grid = UniformGrid::with_step(0.0, 1.0, 1.0 / 4800.0).unwrap();
        assert_eq!(grid.len(), 4801);
        let fast = acf_estimate_uniform(&meas, &t, &grid).unwrap();
        let slow = acf_estimate(&meas, &t, &grid.points()).unwrap();
        let scale: f64 = matched_weights(&meas, &t).iter().map(|w| w.norm()).sum::<f64>() * fast.scale;
        for (a, b) in fast.values.iter().zip(&slow.values) {
            assert!((a - b).norm() <= 1e-12 * scale);
        }
    }

    #[test]
    fn grid_hits_tau0_exactly() {
        let grid = UniformGrid::with_step(0.0, 1.0, 1.0 / 4800.0).unwrap();
        assert_eq!(grid.point(1920), 0.4);
        assert_eq!(grid.point(4800), 1.0);
        let g = UniformGrid::with_step(0.0, 1.0, 0.3).unwrap();
        assert_eq!(g.len(), 5);
        assert!(g.step() <= 0.3);
        assert!(UniformGrid::with_step(0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn noiseless_peak_value_and_argmax() {
        let (t, meas, _) = gaussian_setup(20, 0.0, 17);
        let grid = UniformGrid::with_step(0.0, 1.0, 1.0 / 4800.0).unwrap();
        let trace = acf_estimate_uniform(&meas, &t, &grid).unwrap();
        let (idx, tau, val) = grid_search(&trace).unwrap();
        assert_eq!(idx, 1920);
        assert_eq!(tau, 0.4);
        let y2: f64 = meas.y.iter().map(|y| y.norm_sqr()).sum();
        assert!((val - 1200.0 * y2 / (2.0 * PI * 20.0)).abs() < 1e-12 * val);
        assert_eq!(trace.scale, 1200.0 / (2.0 * PI * 20.0));
        assert!(trace.values.iter().all(|v| v.im == 0.0));
    }

    #[test]
    fn grid_search_tie_breaks_left() {
        let mk = |v: &[f64]| CorrelationTrace {
            taus: (0..v.len()).map(|i| i as f64).collect(),
            values: v.iter().map(|x| Complex64::new(*x, 0.0)).collect(),
            scale: 1.0,
            case: SignalCase::Real,
        };
        assert_eq!(grid_search(&mk(&[1.0, 2.0, 3.0])).unwrap().0, 2);
        assert_eq!(grid_search(&mk(&[3.0, 1.0, 3.0])).unwrap().0, 0);
        assert_eq!(grid_search(&mk(&[1.0, -4.0, 3.0])).unwrap().0, 1);
        assert_eq!(runner_up_gap(&mk(&[1.0, 5.0, 3.0]), 1, 0.5), Some(2.0));
        assert_eq!(runner_up_gap(&mk(&[1.0, 5.0, 3.0]), 1, 2.0), None);
    }

    #[test]
    fn empty_grid_rejected() {
        let (t, meas, _) = gaussian_setup(5, 0.0, 1);
        assert!(acf_estimate(&meas, &t, &[]).is_err());
        assert!(acf_estimate(&meas, &t, &[0.2, 0.1]).is_err());
    }

    #[test]
    fn noiseless_estimate_recovers_amplitude() {
        let band = FrequencyBand::new(600.0).unwrap();
        let t = make_gaussian_pulse(1.0 / 200.0).unwrap().with_case(SignalCase::Complex);
        let scene = DelayScene::new(Complex64::new(0.6, -0.8), 0.4, 0.0).unwrap();
        let rng = RngSpec::new(21, 2);
        let meas = synthesize_delay_measurements(&t, band, &scene, draw_frequencies(band, 30, rng).unwrap(), rng).unwrap();
        let window = SearchWindow::new(0.0, 1.0).unwrap();
        let est = estimate_delay_amplitude(&meas, &t, window, 1.0 / 4800.0, Some(0.015)).unwrap();
        assert_eq!(est.tau_hat, 0.4);
        assert!((est.a_hat - scene.amplitude).norm() < 1e-12);
        assert!(est.runner_up_gap.unwrap() > 0.0);
    }

    #[test]
    fn degenerate_measurement_is_an_error() {
        let band = FrequencyBand::new(100.0).unwrap();
        let t = make_flat_band(1.0, band, Some((50.0, 100.0))).unwrap();
        let meas = DelayMeasurements::from_parts(
            band,
            vec![-10.0, 3.0],
            vec![Complex64::new(1.0, 0.0); 2],
            0.0,
            RngSpec::new(0, 0),
        )
        .unwrap();
        let window = SearchWindow::new(0.0, 1.0).unwrap();
        assert!(matches!(
            estimate_delay_amplitude(&meas, &t, window, 0.01, None),
            Err(CmfError::DegenerateMeasurement(_))
        ));
    }

    #[test]
    fn linearity_in_observations() {
        let (t, m1, _) = gaussian_setup(25, 0.5, 3);
        let mut m2 = m1.clone();
        for (i, y) in m2.y.iter_mut().enumerate() {
            *y = Complex64::new(i as f64 * 0.1, -0.3);
        }
        let mut sum = m1.clone();
        for (s, y) in sum.y.iter_mut().zip(&m2.y) {
            *s += y;
        }
        let grid: Vec<f64> = (0..200).map(|i| i as f64 / 199.0).collect();
        let (a, b, c) = (
            acf_estimate(&m1, &t, &grid).unwrap(),
            acf_estimate(&m2, &t, &grid).unwrap(),
            acf_estimate(&sum, &t, &grid).unwrap(),
        );
        for i in 0..grid.len() {
            let lhs = c.values[i];
            let rhs = a.values[i] + b.values[i];
            assert!((lhs - rhs).norm() <= 1e-12 * (a.values[i].norm() + b.values[i].norm() + 1e-300));
        }
    }

    #[test]
    fn deviation_supremum_matches_dense_loop() {
        let (t, meas, scene) = gaussian_setup(40, 0.0, 8);
        let window = SearchWindow::new(0.0, 1.0).unwrap();
        let quad = QuadratureSpec::with_nodes(1 << 12);
        let step = 1.0 / 4800.0;
        let sup = deviation_supremum(&meas, &t, &scene, window, step, quad).unwrap();
        let grid = UniformGrid::over_window(window, step).unwrap();
        let scale = 1200.0 / (2.0 * PI * 40.0);
        let shifts: Vec<f64> = grid.points().iter().map(|x| x - 0.4).collect();
        let truth = autocorrelation_many(&t, meas.band, &shifts, quad).unwrap();
        let oracle = grid
            .points()
            .iter()
            .zip(&truth)
            .map(|(&tau, r)| (scale * brute_x(&meas, &t, tau).re - r.re).abs())
            .fold(0.0, f64::max);
        assert!((sup - oracle).abs() <= 1e-12 * oracle, "{sup} vs {oracle}");
    }

    #[test]
    fn trace_csv_layout() {
        let (t, meas, _) = gaussian_setup(5, 0.0, 2);
        let trace = acf_estimate(&meas, &t, &[0.1, 0.2]).unwrap();
        let mut buf = Vec::new();
        trace.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "tau,re,im,abs");
        assert_eq!(lines.len(), 3);
    }
}
