//! LC tank resonance, start-up condition, frequency pulling and link budget.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::f64::consts::PI;

use libm::{log10, pow, sqrt};
use thiserror::Error;

use crate::diode::DiodeModel;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OscillatorError {
    #[error("invalid circuit: {0}")]
    InvalidCircuit(&'static str),
    #[error("invalid oscillator config: {0}")]
    InvalidConfig(&'static str),
    #[error("invalid pulling model: {0}")]
    InvalidPulling(&'static str),
    #[error("unknown material `{label}` (known: {known})")]
    UnknownMaterial { label: String, known: String },
    #[error("distance must be positive, got {0} m")]
    InvalidDistance(f64),
    #[error("capacitance perturbation {delta_c} F collapses the {capacitance} F tank")]
    CapacitanceCollapse { delta_c: f64, capacitance: f64 },
}

/// Parallel LC tank with its resistive load.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResonantCircuit {
    pub inductance: f64,
    pub capacitance: f64,
    pub load_conductance: f64,
}

impl Default for ResonantCircuit {
    /// Tuned to 868.0 MHz.
    fn default() -> Self {
        Self {
            inductance: 3.362e-9,
            capacitance: 10.0e-12,
            load_conductance: 1.0e-3,
        }
    }
}

impl ResonantCircuit {
    pub fn new(inductance: f64, capacitance: f64, load_conductance: f64) -> Result<Self, OscillatorError> {
        let c = Self {
            inductance,
            capacitance,
            load_conductance,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), OscillatorError> {
        let ok = [self.inductance, self.capacitance, self.load_conductance]
            .iter()
            .all(|x| x.is_finite() && *x > 0.0);
        if ok {
            Ok(())
        } else {
            Err(OscillatorError::InvalidCircuit("inductance, capacitance and load must be > 0"))
        }
    }

    /// `1 / (2π √(LC))`
    pub fn resonant_frequency(&self) -> f64 {
        1.0 / (2.0 * PI * sqrt(self.inductance * self.capacitance))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillatorConfig {
    pub circuit: ResonantCircuit,
    pub nominal_bias: f64,
    /// Hz per volt of bias away from `nominal_bias`.
    pub bias_sensitivity: f64,
    pub tx_power_dbm: f64,
    /// Wiener phase-noise diffusion in rad²/s, applied to synthesized IQ.
    pub phase_noise_diffusion: f64,
    /// Frequency random-walk diffusion in Hz²/s, applied to drift traces.
    pub drift_diffusion: f64,
}

impl Default for OscillatorConfig {
    fn default() -> Self {
        Self {
            circuit: ResonantCircuit::default(),
            nominal_bias: 0.100,
            bias_sensitivity: 1.0e6,
            tx_power_dbm: -19.0,
            phase_noise_diffusion: 100.0,
            drift_diffusion: 50.0,
        }
    }
}

impl OscillatorConfig {
    pub fn validate(&self) -> Result<(), OscillatorError> {
        self.circuit.validate()?;
        if !(self.tx_power_dbm <= 0.0) {
            return Err(OscillatorError::InvalidConfig("tx_power_dbm must be <= 0"));
        }
        if !(self.phase_noise_diffusion >= 0.0) || !(self.drift_diffusion >= 0.0) {
            return Err(OscillatorError::InvalidConfig("diffusion must be >= 0"));
        }
        if !self.nominal_bias.is_finite() || !self.bias_sensitivity.is_finite() {
            return Err(OscillatorError::InvalidConfig("bias settings must be finite"));
        }
        Ok(())
    }

    /// Linear frequency shift from running the diode off its nominal bias.
    pub fn bias_frequency_offset(&self, v_bias: f64) -> f64 {
        self.bias_sensitivity * (v_bias - self.nominal_bias)
    }
}

/// Negative-conductance start-up criterion: the diode must be biased inside
/// its NDR region and supply at least as much negative conductance as the
/// tank load dissipates.
pub fn oscillation_sustained(diode: &DiodeModel, cfg: &OscillatorConfig) -> bool {
    let Ok((lo, hi)) = diode.ndr_region() else {
        return false;
    };
    let bias = cfg.nominal_bias;
    if !(bias > lo && bias < hi) {
        return false;
    }
    match diode.differential_conductance(bias) {
        Ok(g) => g.abs() >= cfg.circuit.load_conductance,
        Err(_) => false,
    }
}

/// Effective tank-capacitance perturbation caused by a nearby object.
#[derive(Debug, Clone, PartialEq)]
pub struct PullingModel {
    /// Perturbation at `d_ref` for a material of gain 1.
    pub delta_c_ref: f64,
    pub d_ref: f64,
    pub falloff_exponent: f64,
    pub materials: BTreeMap<String, f64>,
}

impl Default for PullingModel {
    fn default() -> Self {
        let materials = [
            ("human-torso", 1.0),
            ("metal", 1.5),
            ("wood", 0.3),
            ("plastic", 0.2),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
        Self {
            delta_c_ref: 2.0e-15,
            d_ref: 0.10,
            falloff_exponent: 6.0,
            materials,
        }
    }
}

impl PullingModel {
    pub fn validate(&self) -> Result<(), OscillatorError> {
        if !(self.delta_c_ref >= 0.0) {
            return Err(OscillatorError::InvalidPulling("delta_c_ref must be >= 0"));
        }
        if !(self.d_ref > 0.0) || !self.d_ref.is_finite() {
            return Err(OscillatorError::InvalidPulling("d_ref must be > 0"));
        }
        if !(self.falloff_exponent > 0.0) || !self.falloff_exponent.is_finite() {
            return Err(OscillatorError::InvalidPulling("falloff_exponent must be > 0"));
        }
        if self.materials.values().any(|g| !(g.is_finite() && *g >= 0.0)) {
            return Err(OscillatorError::InvalidPulling("material gains must be finite and >= 0"));
        }
        Ok(())
    }

    pub fn material_gain(&self, material: &str) -> Result<f64, OscillatorError> {
        self.materials
            .get(material)
            .copied()
            .ok_or_else(|| OscillatorError::UnknownMaterial {
                label: material.to_string(),
                known: self.materials.keys().map(String::as_str).collect::<Vec<_>>().join(", "),
            })
    }

    /// `gain · ΔC_ref · (d_ref / d)^n`
    pub fn coupling_delta_c(&self, distance: f64, material: &str) -> Result<f64, OscillatorError> {
        if !(distance > 0.0) {
            return Err(OscillatorError::InvalidDistance(distance));
        }
        let gain = self.material_gain(material)?;
        Ok(gain * self.delta_c_ref * pow(self.d_ref / distance, self.falloff_exponent))
    }
}

/// Exact pulled frequency `f0 / √(1 + ΔC/C)`.
pub fn pulled_frequency(f0: f64, circuit: &ResonantCircuit, delta_c: f64) -> Result<f64, OscillatorError> {
    if !(delta_c > -circuit.capacitance) {
        return Err(OscillatorError::CapacitanceCollapse {
            delta_c,
            capacitance: circuit.capacitance,
        });
    }
    Ok(f0 / sqrt(1.0 + delta_c / circuit.capacitance))
}

/// Free-space path loss in dB between isotropic antennas.
pub fn free_space_path_loss(distance: f64, frequency: f64) -> f64 {
    20.0 * log10(distance) + 20.0 * log10(frequency) - 147.55
}

/// Received power in dBm.
pub fn link_budget(tx_power_dbm: f64, distance: f64, frequency: f64) -> f64 {
    tx_power_dbm - free_space_path_loss(distance, frequency)
}
