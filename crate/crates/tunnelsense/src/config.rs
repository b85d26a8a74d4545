//! JSON run configuration. Every section and field is optional; missing
//! values take the library defaults. Command-line flags are applied on top.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tunnelsense_core::dsp::{PipelineConfig, TrackerConfig, WindowFunction};
use tunnelsense_core::harvest::{self, ActiveWindow, DischargeLoad, PhotoSource, StorageCap};
use tunnelsense_core::oscillator::{OscillatorConfig, PullingModel, ResonantCircuit};
use tunnelsense_core::scene::{BreathingProfile, EnvironmentKind, EnvironmentProfile, IqSynthesis, Scene, Waveform};
use tunnelsense_core::{DiodeModel, DiodeParams};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: String,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub inputs: Inputs,
    pub diode: DiodeSection,
    pub oscillator: OscillatorSection,
    pub pulling: PullingSection,
    pub scene: SceneSection,
    pub tracker: TrackerSection,
    pub pipeline: PipelineSection,
    pub harvest: HarvestSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            scenario: "run".into(),
            seed: None,
            out: None,
            inputs: Inputs::default(),
            diode: DiodeSection::default(),
            oscillator: OscillatorSection::default(),
            pulling: PullingSection::default(),
            scene: SceneSection::default(),
            tracker: TrackerSection::default(),
            pipeline: PipelineSection::default(),
            harvest: HarvestSection::default(),
        }
    }
}

/// Input files for `rate` and `compare`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Inputs {
    pub iq: Option<PathBuf>,
    pub trace: Option<PathBuf>,
    pub system: Option<PathBuf>,
    pub reference: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiodeSection {
    pub v_peak_v: f64,
    pub i_peak_a: f64,
    pub v_valley_v: f64,
    pub i_valley_a: f64,
    pub v_excess_scale_v: f64,
}

impl Default for DiodeSection {
    fn default() -> Self {
        let p = DiodeParams::default();
        Self {
            v_peak_v: p.v_peak,
            i_peak_a: p.i_peak,
            v_valley_v: p.v_valley,
            i_valley_a: p.i_valley,
            v_excess_scale_v: p.v_excess_scale,
        }
    }
}

impl DiodeSection {
    pub fn model(&self) -> Result<DiodeModel> {
        Ok(DiodeModel::new(DiodeParams {
            v_peak: self.v_peak_v,
            i_peak: self.i_peak_a,
            v_valley: self.v_valley_v,
            i_valley: self.i_valley_a,
            v_excess_scale: self.v_excess_scale_v,
        })?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OscillatorSection {
    pub inductance_h: f64,
    pub capacitance_f: f64,
    pub load_conductance_s: f64,
    pub nominal_bias_v: f64,
    pub bias_sensitivity_hz_per_v: f64,
    pub tx_power_dbm: f64,
    pub phase_noise_rad2_per_s: f64,
    pub drift_hz2_per_s: f64,
}

impl Default for OscillatorSection {
    fn default() -> Self {
        let o = OscillatorConfig::default();
        Self {
            inductance_h: o.circuit.inductance,
            capacitance_f: o.circuit.capacitance,
            load_conductance_s: o.circuit.load_conductance,
            nominal_bias_v: o.nominal_bias,
            bias_sensitivity_hz_per_v: o.bias_sensitivity,
            tx_power_dbm: o.tx_power_dbm,
            phase_noise_rad2_per_s: o.phase_noise_diffusion,
            drift_hz2_per_s: o.drift_diffusion,
        }
    }
}

impl OscillatorSection {
    pub fn config(&self) -> Result<OscillatorConfig> {
        let cfg = OscillatorConfig {
            circuit: ResonantCircuit {
                inductance: self.inductance_h,
                capacitance: self.capacitance_f,
                load_conductance: self.load_conductance_s,
            },
            nominal_bias: self.nominal_bias_v,
            bias_sensitivity: self.bias_sensitivity_hz_per_v,
            tx_power_dbm: self.tx_power_dbm,
            phase_noise_diffusion: self.phase_noise_rad2_per_s,
            drift_diffusion: self.drift_hz2_per_s,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PullingSection {
    pub delta_c_ref_f: f64,
    pub d_ref_m: f64,
    pub falloff_exponent: f64,
    pub materials: BTreeMap<String, f64>,
}

impl Default for PullingSection {
    fn default() -> Self {
        let p = PullingModel::default();
        Self {
            delta_c_ref_f: p.delta_c_ref,
            d_ref_m: p.d_ref,
            falloff_exponent: p.falloff_exponent,
            materials: p.materials,
        }
    }
}

impl PullingSection {
    pub fn model(&self) -> Result<PullingModel> {
        let m = PullingModel {
            delta_c_ref: self.delta_c_ref_f,
            d_ref: self.d_ref_m,
            falloff_exponent: self.falloff_exponent,
            materials: self.materials.clone(),
        };
        m.validate()?;
        Ok(m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvironmentName {
    StaticIndoor,
    DynamicIndoor,
    Outdoor,
}

impl EnvironmentName {
    pub fn kind(self) -> EnvironmentKind {
        match self {
            EnvironmentName::StaticIndoor => EnvironmentKind::StaticIndoor,
            EnvironmentName::DynamicIndoor => EnvironmentKind::DynamicIndoor,
            EnvironmentName::Outdoor => EnvironmentKind::Outdoor,
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        serde_json::from_value(serde_json::Value::String(s.replace('-', "_"))).ok()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WaveformName {
    Sinusoid,
    RaisedSinusoid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SceneSection {
    pub duration_s: f64,
    pub trace_rate_hz: f64,
    pub rate_bpm: f64,
    pub amplitude_m: f64,
    pub distance_m: f64,
    pub waveform: WaveformName,
    pub material: String,
    pub bias_v: Option<f64>,
    pub environment: EnvironmentName,
    /// Overrides for the environment preset.
    pub disturbance_rate_hz: Option<f64>,
    pub disturbance_magnitude_hz: Option<f64>,
    pub snr_db: Option<f64>,
    pub iq_sample_rate_hz: f64,
    pub center_frequency_hz: f64,
    pub start_time_unix: f64,
}

impl Default for SceneSection {
    fn default() -> Self {
        let b = BreathingProfile::default();
        let iq = IqSynthesis::default();
        Self {
            duration_s: 60.0,
            trace_rate_hz: 20.0,
            rate_bpm: b.rate_bpm,
            amplitude_m: b.amplitude,
            distance_m: b.baseline_distance,
            waveform: WaveformName::RaisedSinusoid,
            material: "human-torso".into(),
            bias_v: None,
            environment: EnvironmentName::StaticIndoor,
            disturbance_rate_hz: None,
            disturbance_magnitude_hz: None,
            snr_db: None,
            iq_sample_rate_hz: iq.sample_rate,
            center_frequency_hz: iq.center_frequency,
            start_time_unix: 0.0,
        }
    }
}

impl SceneSection {
    pub fn environment(&self) -> EnvironmentProfile {
        let mut env = EnvironmentProfile::for_kind(self.environment.kind());
        if let Some(r) = self.disturbance_rate_hz {
            env.disturbance_rate = r;
        }
        if let Some(m) = self.disturbance_magnitude_hz {
            env.disturbance_magnitude = m;
        }
        if let Some(s) = self.snr_db {
            env.noise_floor_snr_db = s;
        }
        env
    }

    pub fn breathing(&self) -> BreathingProfile {
        BreathingProfile {
            rate_bpm: self.rate_bpm,
            amplitude: self.amplitude_m,
            baseline_distance: self.distance_m,
            waveform: match self.waveform {
                WaveformName::Sinusoid => Waveform::Sinusoid,
                WaveformName::RaisedSinusoid => Waveform::RaisedSinusoid,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowName {
    Hann,
    Rectangular,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrackerSection {
    pub fft_length: usize,
    pub hop: usize,
    pub window: WindowName,
    /// Carrier offsets searched, hertz. `null` searches the whole recording
    /// bandwidth.
    pub search_band_hz: Option<[f64; 2]>,
}

impl Default for TrackerSection {
    fn default() -> Self {
        let t = TrackerConfig::default();
        Self {
            fft_length: t.fft_length,
            hop: t.hop,
            window: WindowName::Hann,
            search_band_hz: None,
        }
    }
}

impl TrackerSection {
    pub fn config(&self, sample_rate: f64) -> TrackerConfig {
        let band = self.search_band_hz.unwrap_or([-sample_rate / 2.0, sample_rate / 2.0]);
        TrackerConfig {
            fft_length: self.fft_length,
            hop: self.hop,
            window: match self.window {
                WindowName::Hann => WindowFunction::Hann,
                WindowName::Rectangular => WindowFunction::Rectangular,
            },
            search_band: (band[0], band[1]),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineSection {
    /// `null` keeps the tracker's hop rate.
    pub decimate_to_hz: Option<f64>,
    pub max_gap_s: f64,
    pub detrend_window_s: f64,
    pub hampel_window: usize,
    pub hampel_sigmas: f64,
    pub smooth_window: usize,
    pub band_hz: [f64; 2],
}

impl Default for PipelineSection {
    fn default() -> Self {
        let p = PipelineConfig::default();
        Self {
            decimate_to_hz: p.decimate_to_hz,
            max_gap_s: p.max_gap_s,
            detrend_window_s: p.detrend_window_s,
            hampel_window: p.hampel_window,
            hampel_sigmas: p.hampel_sigmas,
            smooth_window: p.smooth_window,
            band_hz: [p.band.0, p.band.1],
        }
    }
}

impl PipelineSection {
    pub fn config(&self) -> PipelineConfig {
        PipelineConfig {
            decimate_to_hz: self.decimate_to_hz,
            max_gap_s: self.max_gap_s,
            detrend_window_s: self.detrend_window_s,
            hampel_window: self.hampel_window,
            hampel_sigmas: self.hampel_sigmas,
            smooth_window: self.smooth_window,
            band: (self.band_hz[0], self.band_hz[1]),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LoadSection {
    /// Constant draw in amperes.
    ConstantA(f64),
    /// The configured diode's I-V curve.
    DiodeCurve,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HarvestSection {
    pub current_per_lux_a: f64,
    pub saturation_current_a: f64,
    pub capacitances_f: Vec<f64>,
    pub leakage_conductance_s: f64,
    pub lux: Vec<f64>,
    pub window_v: [f64; 2],
    pub load: LoadSection,
    pub charge_duration_s: f64,
    pub dt_s: f64,
}

impl Default for HarvestSection {
    fn default() -> Self {
        let src = PhotoSource::default();
        let w = ActiveWindow::default();
        let load = match w.load {
            DischargeLoad::Constant(i) => i,
            DischargeLoad::DiodeCurve(_) => unreachable!("default load is constant"),
        };
        Self {
            current_per_lux_a: src.current_per_lux,
            saturation_current_a: src.saturation_current,
            capacitances_f: harvest::DEFAULT_CAPACITANCES.to_vec(),
            leakage_conductance_s: StorageCap::new(1.0).leakage_conductance,
            lux: harvest::DEFAULT_LUX.to_vec(),
            window_v: [w.v_low, w.v_high],
            load: LoadSection::ConstantA(load),
            charge_duration_s: 60.0,
            dt_s: 0.01,
        }
    }
}

impl HarvestSection {
    pub fn source(&self) -> PhotoSource {
        PhotoSource {
            current_per_lux: self.current_per_lux_a,
            saturation_current: self.saturation_current_a,
        }
    }

    pub fn caps(&self) -> Vec<StorageCap> {
        self.capacitances_f
            .iter()
            .map(|&capacitance| StorageCap {
                capacitance,
                leakage_conductance: self.leakage_conductance_s,
            })
            .collect()
    }

    pub fn window(&self, diode: &DiodeSection) -> Result<ActiveWindow> {
        let load = match self.load {
            LoadSection::ConstantA(i) => DischargeLoad::Constant(i),
            LoadSection::DiodeCurve => DischargeLoad::DiodeCurve(diode.model()?),
        };
        Ok(ActiveWindow {
            v_low: self.window_v[0],
            v_high: self.window_v[1],
            load,
        })
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn scene(&self) -> Result<Scene> {
        let scene = Scene {
            breathing: self.scene.breathing(),
            environment: self.scene.environment(),
            oscillator: self.oscillator.config()?,
            pulling: self.pulling.model()?,
            material: self.scene.material.clone(),
            bias_voltage: self.scene.bias_v,
        };
        scene.validate()?;
        Ok(scene)
    }

    pub fn synthesis(&self, scene: &Scene) -> IqSynthesis {
        IqSynthesis {
            sample_rate: self.scene.iq_sample_rate_hz,
            center_frequency: self.scene.center_frequency_hz,
            snr_db: scene.environment.noise_floor_snr_db,
            phase_noise_diffusion: scene.oscillator.phase_noise_diffusion,
        }
    }

    pub fn seed(&self) -> Result<u64> {
        self.seed
            .ok_or_else(|| Error::Config("a seed is required (--seed or \"seed\" in the config)".into()))
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("."))
    }
}
