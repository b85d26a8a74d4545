use alloc::string::{String, ToString};
use alloc::vec::Vec;

use libm::{round, sqrt};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{BreathingProfile, DisturbanceField, EnvironmentProfile, SampledSignal, SceneError};
use crate::oscillator::{pulled_frequency, OscillatorConfig, PullingModel};
use crate::signal::FrequencyTrace;

/// Everything that shapes the oscillator's frequency over time.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub breathing: BreathingProfile,
    pub environment: EnvironmentProfile,
    pub oscillator: OscillatorConfig,
    pub pulling: PullingModel,
    /// Material label of the moving object, looked up in `pulling`.
    pub material: String,
    /// Supply bias; `None` runs the diode at the oscillator's nominal bias.
    pub bias_voltage: Option<f64>,
}

impl Default for Scene {
    fn default() -> Self {
        Self {
            breathing: BreathingProfile::default(),
            environment: EnvironmentProfile::default(),
            oscillator: OscillatorConfig::default(),
            pulling: PullingModel::default(),
            material: "human-torso".to_string(),
            bias_voltage: None,
        }
    }
}

impl Scene {
    pub fn validate(&self) -> Result<(), SceneError> {
        self.breathing.validate()?;
        self.environment.validate()?;
        self.oscillator.validate()?;
        self.pulling.validate()?;
        self.pulling.material_gain(&self.material)?;
        Ok(())
    }

    /// Carrier frequency before any object pulls it.
    pub fn unpulled_frequency(&self) -> f64 {
        let bias = self.bias_voltage.unwrap_or(self.oscillator.nominal_bias);
        self.oscillator.circuit.resonant_frequency() + self.oscillator.bias_frequency_offset(bias)
    }

    /// Noise-free carrier frequency with the chest at `distance`.
    pub fn pulled_frequency_at(&self, distance: f64) -> Result<f64, SceneError> {
        let dc = self.pulling.coupling_delta_c(distance, &self.material)?;
        Ok(pulled_frequency(self.unpulled_frequency(), &self.oscillator.circuit, dc)?)
    }

    /// Ground-truth chest distance on the same grid `simulate_drift_trace` uses.
    pub fn chest_distance_series(&self, duration: f64, trace_rate: f64) -> SampledSignal {
        let n = sample_count(duration, trace_rate);
        SampledSignal {
            start_time: 0.0,
            sample_interval: 1.0 / trace_rate,
            values: (0..n).map(|k| self.breathing.chest_distance(k as f64 / trace_rate)).collect(),
        }
    }
}

fn sample_count(duration: f64, rate: f64) -> usize {
    round(duration * rate) as usize
}

/// Instantaneous carrier frequency sampled at `trace_rate`.
///
/// Each sample is the pulled frequency for the current chest distance plus a
/// seeded frequency random walk and the environment's disturbance field.
pub fn simulate_drift_trace(
    scene: &Scene,
    duration: f64,
    trace_rate: f64,
    seed: u64,
) -> Result<FrequencyTrace, SceneError> {
    scene.validate()?;
    if !(duration > 0.0) || !duration.is_finite() {
        return Err(SceneError::Invalid("duration must be > 0"));
    }
    let required = 4.0 * scene.breathing.frequency();
    if !(trace_rate >= required) {
        return Err(SceneError::Nyquist {
            what: "trace rate (4x breathing frequency)",
            required,
            rate: trace_rate,
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let field = DisturbanceField::sample(&scene.environment, duration, &mut rng);

    let n = sample_count(duration, trace_rate);
    let dt = 1.0 / trace_rate;
    let walk_step = sqrt(scene.oscillator.drift_diffusion * dt);
    let mut walk = 0.0;
    let mut values = Vec::with_capacity(n);
    for k in 0..n {
        let t = k as f64 * dt;
        let f = scene.pulled_frequency_at(scene.breathing.chest_distance(t))?;
        values.push(f + walk + field.value_at(t));
        if walk_step > 0.0 {
            let z: f64 = StandardNormal.sample(&mut rng);
            walk += walk_step * z;
        }
    }
    Ok(FrequencyTrace::new(0.0, dt, values))
}
