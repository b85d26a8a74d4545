use core::f64::consts::PI;

use libm::sin;

use super::SceneError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Waveform {
    /// Chest oscillates symmetrically about the baseline distance.
    Sinusoid,
    /// Chest moves between the baseline and `baseline - amplitude`.
    RaisedSinusoid,
}

/// Chest-wall kinematics of a breathing subject facing the tag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BreathingProfile {
    pub rate_bpm: f64,
    /// Peak-to-peak chest excursion in meters.
    pub amplitude: f64,
    /// Tag-to-chest distance at full exhale, in meters.
    pub baseline_distance: f64,
    pub waveform: Waveform,
}

impl Default for BreathingProfile {
    fn default() -> Self {
        Self {
            rate_bpm: 15.0,
            amplitude: 5.0e-3,
            baseline_distance: 0.10,
            waveform: Waveform::RaisedSinusoid,
        }
    }
}

impl BreathingProfile {
    pub fn validate(&self) -> Result<(), SceneError> {
        if !(self.rate_bpm > 2.0 && self.rate_bpm < 60.0) {
            return Err(SceneError::Invalid("rate_bpm must lie in (2, 60)"));
        }
        if !(self.amplitude >= 0.0) || !self.amplitude.is_finite() {
            return Err(SceneError::Invalid("amplitude must be >= 0"));
        }
        if !(self.baseline_distance > self.amplitude) || !self.baseline_distance.is_finite() {
            return Err(SceneError::Invalid("baseline_distance must exceed amplitude"));
        }
        Ok(())
    }

    /// Breathing frequency in hertz.
    pub fn frequency(&self) -> f64 {
        self.rate_bpm / 60.0
    }

    /// Tag-to-chest distance in meters at time `t >= 0`.
    pub fn chest_distance(&self, t: f64) -> f64 {
        debug_assert!(t >= 0.0);
        let s = sin(2.0 * PI * self.frequency() * t);
        let half = 0.5 * self.amplitude;
        match self.waveform {
            Waveform::RaisedSinusoid => self.baseline_distance - half * (1.0 + s),
            Waveform::Sinusoid => self.baseline_distance - half * s,
        }
    }
}
