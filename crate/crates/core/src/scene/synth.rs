use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

use libm::{pow, round, sincos, sqrt};
use num_complex::Complex32;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::SceneError;
use crate::signal::{FrequencyTrace, IqRecording, IQ_FULL_SCALE};

/// Receiver-side rendering of a frequency trace into complex baseband.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IqSynthesis {
    pub sample_rate: f64,
    pub center_frequency: f64,
    /// Carrier power over total complex noise power. `f64::INFINITY` is noiseless.
    pub snr_db: f64,
    /// Wiener phase-noise diffusion in rad²/s.
    pub phase_noise_diffusion: f64,
}

impl Default for IqSynthesis {
    fn default() -> Self {
        Self {
            sample_rate: 1.0e6,
            center_frequency: 868.0e6,
            snr_db: 20.0,
            phase_noise_diffusion: 100.0,
        }
    }
}

impl IqSynthesis {
    /// Unit-amplitude carrier following `trace`, with phase noise and
    /// additive white noise. The trace is linearly interpolated to the IQ
    /// rate and held after its last sample.
    pub fn synthesize(&self, trace: &FrequencyTrace, seed: u64) -> Result<IqRecording, SceneError> {
        let fs = self.sample_rate;
        if !(fs > 0.0) || !fs.is_finite() {
            return Err(SceneError::Invalid("sample_rate must be > 0"));
        }
        if !(self.phase_noise_diffusion >= 0.0) || self.snr_db.is_nan() {
            return Err(SceneError::Invalid("phase noise must be >= 0 and SNR defined"));
        }
        let max_offset = trace
            .values
            .iter()
            .map(|f| (f - self.center_frequency).abs())
            .fold(0.0, f64::max);
        if !(fs > 2.0 * max_offset) {
            return Err(SceneError::Nyquist {
                what: "IQ sample rate (2x max carrier offset)",
                required: 2.0 * max_offset,
                rate: fs,
            });
        }

        let n = round(trace.values.len() as f64 * trace.sample_interval * fs) as usize;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let phase_step = sqrt(self.phase_noise_diffusion / fs);
        let noise_sigma = if self.snr_db.is_infinite() && self.snr_db > 0.0 {
            0.0
        } else {
            sqrt(pow(10.0, -self.snr_db / 10.0) / 2.0)
        };

        let samples_per_trace = trace.sample_interval * fs;
        let last = trace.values.len().saturating_sub(1);
        let mut phase = 0.0f64;
        let mut clipped = 0usize;
        let mut samples = Vec::with_capacity(n);
        for i in 0..n {
            let pos = i as f64 / samples_per_trace;
            let k = pos as usize;
            let f = if k >= last {
                trace.values[last]
            } else {
                let frac = pos - k as f64;
                trace.values[k] + frac * (trace.values[k + 1] - trace.values[k])
            };

            let (s, c) = sincos(phase);
            let (mut re, mut im) = (c, s);
            if noise_sigma > 0.0 {
                let nr: f64 = StandardNormal.sample(&mut rng);
                let ni: f64 = StandardNormal.sample(&mut rng);
                re += noise_sigma * nr;
                im += noise_sigma * ni;
            }
            let full = IQ_FULL_SCALE as f64;
            if re.abs() >= full || im.abs() >= full {
                clipped += 1;
                re = re.clamp(-full, full);
                im = im.clamp(-full, full);
            }
            samples.push(Complex32::new(re as f32, im as f32));

            phase += TAU * (f - self.center_frequency) / fs;
            if phase_step > 0.0 {
                let z: f64 = StandardNormal.sample(&mut rng);
                phase += phase_step * z;
            }
            if phase > PI {
                phase -= TAU;
            } else if phase < -PI {
                phase += TAU;
            }
        }

        Ok(IqRecording {
            sample_rate: fs,
            center_frequency: self.center_frequency,
            start_time: trace.start_time,
            samples,
            clipped,
        })
    }
}
