//! Uniformly sampled signals shared by the simulator and the receiver.

use alloc::vec::Vec;
use num_complex::Complex32;

/// Anything sampled on a uniform time grid.
///
/// Implemented by frequency traces and respiration-belt traces so rate
/// estimation and alignment accept either.
pub trait UniformSeries {
    fn start_time(&self) -> f64;
    fn sample_interval(&self) -> f64;
    fn values(&self) -> &[f64];

    fn len(&self) -> usize {
        self.values().len()
    }

    fn is_empty(&self) -> bool {
        self.values().is_empty()
    }

    /// Span covered by the samples, `len * sample_interval`.
    fn duration(&self) -> f64 {
        self.len() as f64 * self.sample_interval()
    }

    fn time_at(&self, index: usize) -> f64 {
        self.start_time() + index as f64 * self.sample_interval()
    }

    fn sample_rate(&self) -> f64 {
        1.0 / self.sample_interval()
    }
}

/// Timestamped instantaneous-frequency series in hertz.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyTrace {
    pub start_time: f64,
    pub sample_interval: f64,
    pub values: Vec<f64>,
}

impl FrequencyTrace {
    pub fn new(start_time: f64, sample_interval: f64, values: Vec<f64>) -> Self {
        debug_assert!(sample_interval > 0.0);
        Self {
            start_time,
            sample_interval,
            values,
        }
    }

    /// Same timestamps, new values.
    pub fn with_values(&self, values: Vec<f64>) -> Self {
        Self {
            start_time: self.start_time,
            sample_interval: self.sample_interval,
            values,
        }
    }
}

impl UniformSeries for FrequencyTrace {
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

/// Respiration-belt force readings in newtons on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RespTrace {
    pub start_time: f64,
    pub sample_interval: f64,
    pub force_values: Vec<f64>,
}

impl UniformSeries for RespTrace {
    fn start_time(&self) -> f64 {
        self.start_time
    }
    fn sample_interval(&self) -> f64 {
        self.sample_interval
    }
    fn values(&self) -> &[f64] {
        &self.force_values
    }
}

/// Tracker output. `None` marks a window where no carrier was found.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackedTrace {
    pub start_time: f64,
    pub sample_interval: f64,
    pub values: Vec<Option<f64>>,
}

impl TrackedTrace {
    pub fn missing_count(&self) -> usize {
        self.values.iter().filter(|v| v.is_none()).count()
    }
}

/// Full-scale magnitude of one IQ component. Synthesized samples are clamped
/// to this and the number of clamped samples is recorded.
pub const IQ_FULL_SCALE: f32 = 8.0;

/// Complex baseband capture as delivered by the receiver.
#[derive(Debug, Clone, PartialEq)]
pub struct IqRecording {
    pub sample_rate: f64,
    pub center_frequency: f64,
    /// Seconds, on the same clock as the traces derived from it.
    pub start_time: f64,
    pub samples: Vec<Complex32>,
    /// Samples with at least one component at full scale.
    pub clipped: usize,
}

impl IqRecording {
    /// Wraps raw samples, counting the ones sitting at full scale.
    pub fn from_samples(
        sample_rate: f64,
        center_frequency: f64,
        start_time: f64,
        samples: Vec<Complex32>,
    ) -> Self {
        let clipped = samples
            .iter()
            .filter(|s| s.re.abs() >= IQ_FULL_SCALE || s.im.abs() >= IQ_FULL_SCALE)
            .count();
        Self {
            sample_rate,
            center_frequency,
            start_time,
            samples,
            clipped,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate
    }
}
