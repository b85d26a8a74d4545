//! Photodiode charging of a storage capacitor and the tag's active time as
//! the capacitor discharges through it.

use alloc::vec::Vec;

use libm::ceil;
use thiserror::Error;

use crate::diode::{DiodeError, DiodeModel};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HarvestError {
    #[error("invalid parameter: {0}")]
    Invalid(&'static str),
    #[error("load current {current} A at {voltage} V is not positive")]
    NonPositiveLoad { voltage: f64, current: f64 },
    #[error(transparent)]
    Diode(#[from] DiodeError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhotoSource {
    /// Amperes per lux.
    pub current_per_lux: f64,
    pub saturation_current: f64,
}

impl Default for PhotoSource {
    fn default() -> Self {
        Self {
            current_per_lux: 10e-9,
            saturation_current: 50e-6,
        }
    }
}

impl PhotoSource {
    pub fn validate(&self) -> Result<(), HarvestError> {
        if !(self.current_per_lux > 0.0) || !(self.saturation_current > 0.0) {
            return Err(HarvestError::Invalid("photodiode currents must be > 0"));
        }
        Ok(())
    }

    pub fn current(&self, lux: f64) -> f64 {
        (self.current_per_lux * lux).min(self.saturation_current)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StorageCap {
    pub capacitance: f64,
    pub leakage_conductance: f64,
}

impl StorageCap {
    /// Low-leakage tantalum part, about 10 nA per volt.
    pub fn new(capacitance: f64) -> Self {
        Self {
            capacitance,
            leakage_conductance: 1e-8,
        }
    }

    pub fn validate(&self) -> Result<(), HarvestError> {
        if !(self.capacitance > 0.0) || !(self.leakage_conductance >= 0.0) {
            return Err(HarvestError::Invalid("capacitance must be > 0 and leakage >= 0"));
        }
        Ok(())
    }
}

/// Capacitors swept by the default report, farads.
pub const DEFAULT_CAPACITANCES: [f64; 5] = [220e-6, 330e-6, 440e-6, 660e-6, 1431e-6];

/// Illuminance levels swept by the default report.
pub const DEFAULT_LUX: [f64; 5] = [50.0, 100.0, 200.0, 500.0, 1000.0];

/// What the tag draws from the capacitor while it runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DischargeLoad {
    /// Calibrated mean draw in amperes.
    Constant(f64),
    /// The diode's own I-V curve at the capacitor voltage.
    DiodeCurve(DiodeModel),
}

impl DischargeLoad {
    fn current(&self, v: f64) -> Result<f64, HarvestError> {
        match self {
            DischargeLoad::Constant(i) => Ok(*i),
            DischargeLoad::DiodeCurve(d) => Ok(d.iv_current(v)?),
        }
    }
}

/// Voltage band in which the tag oscillates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActiveWindow {
    pub v_high: f64,
    pub v_low: f64,
    pub load: DischargeLoad,
}

impl Default for ActiveWindow {
    /// 75 to 197 mV with a 3.42 mA draw: 51 ms on 1431 µF.
    fn default() -> Self {
        Self {
            v_high: 0.197,
            v_low: 0.075,
            load: DischargeLoad::Constant(3.42e-3),
        }
    }
}

impl ActiveWindow {
    pub fn validate(&self) -> Result<(), HarvestError> {
        if !(self.v_low >= 0.0) || !(self.v_low < self.v_high) || !self.v_high.is_finite() {
            return Err(HarvestError::Invalid("window needs 0 <= v_low < v_high"));
        }
        Ok(())
    }

    /// Constant-load active time, `C·(v_high − v_low)/I`. `None` for a
    /// diode-curve load.
    pub fn closed_form_active_time(&self, cap: &StorageCap) -> Option<f64> {
        match self.load {
            DischargeLoad::Constant(i) if i > 0.0 => Some(cap.capacitance * (self.v_high - self.v_low) / i),
            _ => None,
        }
    }
}

fn rk4<F: FnMut(f64) -> Result<f64, HarvestError>>(v: f64, h: f64, mut f: F) -> Result<f64, HarvestError> {
    let k1 = f(v)?;
    let k2 = f(v + 0.5 * h * k1)?;
    let k3 = f(v + 0.5 * h * k2)?;
    let k4 = f(v + h * k3)?;
    Ok(v + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4))
}

/// Capacitor voltage while the photodiode charges it from 0 V, as `(t, V)`
/// pairs on a uniform grid no coarser than `dt`. The tag is off meanwhile.
pub fn charge_curve(
    src: &PhotoSource,
    cap: &StorageCap,
    lux: f64,
    duration: f64,
    dt: f64,
) -> Result<Vec<(f64, f64)>, HarvestError> {
    src.validate()?;
    cap.validate()?;
    if !(dt > 0.0) || !(duration >= 0.0) || !(lux >= 0.0) {
        return Err(HarvestError::Invalid("need dt > 0, duration >= 0, lux >= 0"));
    }
    let steps = ceil(duration / dt - 1e-9).max(0.0) as usize;
    let h = if steps == 0 { 0.0 } else { duration / steps as f64 };
    let i_ph = src.current(lux);
    let slope = |v: f64| Ok((i_ph - cap.leakage_conductance * v) / cap.capacitance);

    let mut out = Vec::with_capacity(steps + 1);
    let mut v = 0.0;
    out.push((0.0, v));
    for k in 1..=steps {
        v = rk4(v, h, slope)?;
        out.push((k as f64 * h, v));
    }
    Ok(out)
}

/// Time the capacitor voltage spends inside the window while the tag
/// discharges it from `v_start`.
pub fn active_time(cap: &StorageCap, window: &ActiveWindow, v_start: f64, dt: f64) -> Result<f64, HarvestError> {
    cap.validate()?;
    window.validate()?;
    if !(dt > 0.0) {
        return Err(HarvestError::Invalid("dt must be > 0"));
    }
    if !(v_start >= window.v_high) || !v_start.is_finite() {
        return Err(HarvestError::Invalid("v_start must be at or above v_high"));
    }

    // the load must draw current everywhere the trajectory will pass
    let grid = 256;
    let mut min_current = f64::INFINITY;
    for k in 0..=grid {
        let v = window.v_low + (v_start - window.v_low) * k as f64 / grid as f64;
        let i = window.load.current(v)?;
        if !(i > 0.0) {
            return Err(HarvestError::NonPositiveLoad { voltage: v, current: i });
        }
        min_current = min_current.min(i);
    }
    let max_steps = ceil(2.0 * cap.capacitance * (v_start - window.v_low) / min_current / dt) as usize + 16;

    let slope = |v: f64| -> Result<f64, HarvestError> { Ok(-window.load.current(v)? / cap.capacitance) };
    let crossing = |t: f64, v0: f64, v1: f64, level: f64| t + dt * (v0 - level) / (v0 - v1);

    let mut v = v_start;
    let mut t = 0.0;
    let mut entered = (v_start == window.v_high).then_some(0.0);
    for _ in 0..max_steps {
        let next = rk4(v, dt, slope)?;
        if entered.is_none() && next <= window.v_high {
            entered = Some(crossing(t, v, next, window.v_high));
        }
        if next <= window.v_low {
            let left = crossing(t, v, next, window.v_low);
            return Ok(left - entered.expect("v_high is crossed before v_low"));
        }
        v = next;
        t += dt;
    }
    Err(HarvestError::Invalid("discharge did not leave the window"))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarvestRow {
    pub capacitance: f64,
    pub lux: f64,
    /// Voltage at the end of the charging period.
    pub peak_voltage: f64,
    /// First time the charge reaches `v_high`; `None` if it never does.
    pub time_to_window: Option<f64>,
    /// Time in the window once the tag switches on; `None` if it never does.
    pub active_time: Option<f64>,
}

/// Charges every capacitor at every light level for `duration` seconds.
/// Rows are ordered by capacitor, then by lux, as given.
pub fn harvest_report(
    src: &PhotoSource,
    caps: &[StorageCap],
    lux_levels: &[f64],
    window: &ActiveWindow,
    duration: f64,
    dt: f64,
) -> Result<Vec<HarvestRow>, HarvestError> {
    window.validate()?;
    let mut rows = Vec::with_capacity(caps.len() * lux_levels.len());
    for cap in caps {
        for &lux in lux_levels {
            let curve = charge_curve(src, cap, lux, duration, dt)?;
            let peak_voltage = curve.last().map_or(0.0, |p| p.1);
            let time_to_window = curve.windows(2).find(|w| w[1].1 >= window.v_high).map(|w| {
                let ((t0, v0), (t1, v1)) = (w[0], w[1]);
                t0 + (t1 - t0) * (window.v_high - v0) / (v1 - v0)
            });
            let active_time = match time_to_window {
                Some(_) => Some(active_time(cap, window, peak_voltage, dt_discharge(cap, window))?),
                None => None,
            };
            rows.push(HarvestRow {
                capacitance: cap.capacitance,
                lux,
                peak_voltage,
                time_to_window,
                active_time,
            });
        }
    }
    Ok(rows)
}

/// Discharge step: a thousandth of the constant-load window time, or 1 µs.
fn dt_discharge(cap: &StorageCap, window: &ActiveWindow) -> f64 {
    window.closed_form_active_time(cap).map_or(1e-6, |t| t / 1000.0)
}
