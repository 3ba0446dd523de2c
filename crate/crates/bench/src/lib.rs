//! Fixed inputs shared by the benchmarks.

use cmf_core::correlation::UniformGrid;
use cmf_core::sampling::{draw_frequencies, draw_times, synthesize_delay_measurements, synthesize_tone_measurements};
use cmf_core::templates::make_gaussian_pulse;
use cmf_core::{Complex64, DelayMeasurements, DelayScene, FrequencyBand, RngSpec, SearchWindow, Template, ToneMeasurements};

pub struct DelayFixture {
    pub band: FrequencyBand,
    pub template: Template,
    pub meas: DelayMeasurements,
    pub grid: UniformGrid,
}

/// Gaussian pulse `a = 1/200` on `[-600, 600]`, delays on `[0, 1]` at `1/4800`.
pub fn delay_fixture(m: usize) -> DelayFixture {
    let band = FrequencyBand::new(600.0).unwrap();
    let template = make_gaussian_pulse(0.005).unwrap();
    let scene = DelayScene::real(1.0, 0.4, 0.01).unwrap();
    let rng = RngSpec::new(1, 0);
    let freqs = draw_frequencies(band, m, rng).unwrap();
    let meas = synthesize_delay_measurements(&template, band, &scene, freqs, rng).unwrap();
    let grid = UniformGrid::over_window(SearchWindow::new(0.0, 1.0).unwrap(), 1.0 / 4800.0).unwrap();
    DelayFixture { band, template, meas, grid }
}

/// Noiseless tone at 17.3 rad/s, band `[-100, 100]`, times on `[0, 1]`.
pub fn tone_fixture(m: usize) -> (FrequencyBand, ToneMeasurements) {
    let band = FrequencyBand::new(100.0).unwrap();
    let window = SearchWindow::new(0.0, 1.0).unwrap();
    let rng = RngSpec::new(2, 0);
    let times = draw_times(window, m, rng).unwrap();
    let meas = synthesize_tone_measurements(17.3, Complex64::new(1.0, 0.0), 0.0, window, times, rng).unwrap();
    (band, meas)
}
