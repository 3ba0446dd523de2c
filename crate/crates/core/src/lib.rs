//! Compressive matched filtering: delay, amplitude and tone estimation from
//! a few randomly located samples, plus the matching theoretical bounds and
//! a Monte Carlo harness.
//!
//! ```
//! use cmf_core::correlation::estimate_delay_amplitude;
//! use cmf_core::sampling::{draw_frequencies, synthesize_delay_measurements};
//! use cmf_core::templates::make_gaussian_pulse;
//! use cmf_core::{DelayScene, FrequencyBand, RngSpec, SearchWindow};
//!
//! # fn main() -> cmf_core::Result<()> {
//! let band = FrequencyBand::new(600.0)?;
//! let pulse = make_gaussian_pulse(0.005)?;
//! let scene = DelayScene::real(1.0, 0.4, 0.0)?;
//! let rng = RngSpec::new(7, 0);
//! let freqs = draw_frequencies(band, 20, rng)?;
//! let meas = synthesize_delay_measurements(&pulse, band, &scene, freqs, rng)?;
//! let est = estimate_delay_amplitude(&meas, &pulse, SearchWindow::new(0.0, 1.0)?, 1.0 / 4800.0, None)?;
//! assert_eq!(est.tau_hat, 0.4);
//! # Ok(())
//! # }
//! ```

// `!(x > 0.0)` is used deliberately so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod correlation;
pub mod error;
pub mod harness;
pub mod sampling;
pub mod templates;
pub mod tone;

pub use num_complex::Complex64;

pub use bounds::{BoundReport, Constants, ProblemConfig};
pub use correlation::{CorrelationTrace, DelayEstimate, UniformGrid};
pub use error::{CmfError, Result};
pub use sampling::{DelayMeasurements, DelayScene, RngSpec, ToneMeasurements};
pub use templates::{
    FrequencyBand, QuadratureSpec, SearchWindow, SignalCase, SpectralMetrics, Template, TemplateKind,
    TemplateSpec,
};
pub use tone::{ChirpSpec, ToneEstimate, ToneTrace};
