//! Physical scene simulation: a breathing subject near the tag, environment
//! disturbances and oscillator instability, rendered as instantaneous
//! frequency traces and complex-baseband IQ recordings.
//!
//! Every stochastic operation takes an explicit seed and draws from its own
//! ChaCha stream, so results depend only on `(inputs, seed)`.

mod breathing;
mod drift;
mod environment;
mod synth;

use alloc::vec::Vec;
use thiserror::Error;

use crate::oscillator::OscillatorError;
use crate::signal::UniformSeries;

pub use breathing::{BreathingProfile, Waveform};
pub use drift::{simulate_drift_trace, Scene};
pub use environment::{Bump, DisturbanceField, EnvironmentKind, EnvironmentProfile, Spike, SPIKE_DURATION};
pub use synth::IqSynthesis;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SceneError {
    #[error("invalid scene: {0}")]
    Invalid(&'static str),
    #[error("Nyquist violation: {what} needs {required} Hz but rate is {rate} Hz")]
    Nyquist {
        what: &'static str,
        required: f64,
        rate: f64,
    },
    #[error(transparent)]
    Oscillator(#[from] OscillatorError),
}

/// A generic uniformly sampled quantity, e.g. ground-truth chest distance in
/// meters.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSignal {
    pub start_time: f64,
    pub sample_interval: f64,
    pub values: Vec<f64>,
}

impl UniformSeries for SampledSignal {
    fn start_time(&self) -> f64 {
        self.start_time
    }
    fn sample_interval(&self) -> f64 {
        self.sample_interval
    }
    fn values(&self) -> &[f64] {
        &self.values
    }
}
