//! Tunnel diode current-voltage model.
//!
//! The curve is the sum of a tunneling term and an excess (injection) term:
//!
//! ```text
//! I(v) = i_peak * u^m * exp(m * (1 - u))            u = v / v_peak
//!      + a * g(v)                                    (v > v_peak only)
//! g(v) = exp((v - v_valley)/s) - x - (v - v_peak)/s * x,   x = exp((v_peak - v_valley)/s)
//! ```
//!
//! The tunneling term peaks at exactly `(v_peak, i_peak)` for any shape
//! exponent `m`. The excess term and its slope vanish at `v_peak`, so the
//! peak anchor survives the sum and the curve stays once differentiable.
//! `m` and `a` are solved at construction so the curve has a zero slope at
//! `v_valley` and passes through `(v_valley, i_valley)`.

use libm::{exp, pow};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DiodeError {
    #[error("invalid diode parameters: {0}")]
    InvalidParameters(&'static str),
    #[error("voltage {voltage} V is outside the model domain (v >= 0)")]
    Domain { voltage: f64 },
    #[error("no NDR region: conductance never changes sign")]
    NoNdrRegion,
}

/// Anchor points of the I-V curve, SI units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiodeParams {
    pub v_peak: f64,
    pub i_peak: f64,
    pub v_valley: f64,
    pub i_valley: f64,
    /// Voltage scale of the rising post-valley branch.
    pub v_excess_scale: f64,
}

impl Default for DiodeParams {
    /// 1N3712-class germanium device: 1 mA peak at 70 mV, valley at 150 mV.
    fn default() -> Self {
        Self {
            v_peak: 0.070,
            i_peak: 1.0e-3,
            v_valley: 0.150,
            i_valley: 0.12e-3,
            v_excess_scale: 0.040,
        }
    }
}

impl DiodeParams {
    fn validate(&self) -> Result<(), DiodeError> {
        let all_finite = [
            self.v_peak,
            self.i_peak,
            self.v_valley,
            self.i_valley,
            self.v_excess_scale,
        ]
        .iter()
        .all(|x| x.is_finite());
        if !all_finite {
            return Err(DiodeError::InvalidParameters("non-finite value"));
        }
        if !(self.v_peak > 0.0 && self.v_peak < self.v_valley) {
            return Err(DiodeError::InvalidParameters("require 0 < v_peak < v_valley"));
        }
        if !(self.i_valley > 0.0 && self.i_valley < self.i_peak) {
            return Err(DiodeError::InvalidParameters("require 0 < i_valley < i_peak"));
        }
        if self.v_excess_scale <= 0.0 {
            return Err(DiodeError::InvalidParameters("require v_excess_scale > 0"));
        }
        Ok(())
    }
}

/// Operating point of the diode at a given bias.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiasPoint {
    pub voltage: f64,
    pub current: f64,
    pub power: f64,
    pub differential_conductance: f64,
}

/// Validated I-V model. Immutable once built.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiodeModel {
    params: DiodeParams,
    shape: f64,
    excess_amp: f64,
    /// `exp((v_peak - v_valley) / v_excess_scale)`
    excess_floor: f64,
}

impl Default for DiodeModel {
    fn default() -> Self {
        Self::new(DiodeParams::default()).expect("default diode parameters are valid")
    }
}

impl DiodeModel {
    pub fn new(params: DiodeParams) -> Result<Self, DiodeError> {
        params.validate()?;
        let DiodeParams {
            v_peak: vp,
            i_peak: ip,
            v_valley: vv,
            i_valley: iv,
            v_excess_scale: s,
        } = params;

        let x = exp((vp - vv) / s);
        let g_valley = 1.0 - x - (vv - vp) / s * x;
        let dg_valley = (1.0 - x) / s;
        // Tunneling term at the valley is i_peak * q^m, q < 1.
        let u = vv / vp;
        let q = u * exp(1.0 - u);
        let c = (1.0 / vp - 1.0 / vv) * g_valley / dg_valley;
        let valley_current = |m: f64| ip * pow(q, m) * (1.0 + m * c) - iv;

        // valley_current(0) = ip - iv > 0 and it tends to -iv; the crossing is unique.
        let mut hi = 1.0;
        while valley_current(hi) > 0.0 {
            hi *= 2.0;
            if hi > 1.0e4 {
                return Err(DiodeError::InvalidParameters("cannot place the valley"));
            }
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if valley_current(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let shape = 0.5 * (lo + hi);
        if shape < 1.0 {
            return Err(DiodeError::InvalidParameters(
                "valley current too close to peak current",
            ));
        }
        let tunnel_valley = ip * pow(q, shape);
        let excess_amp = tunnel_valley * shape * (1.0 / vp - 1.0 / vv) / dg_valley;

        Ok(Self {
            params,
            shape,
            excess_amp,
            excess_floor: x,
        })
    }

    pub fn params(&self) -> &DiodeParams {
        &self.params
    }

    /// Exponent `m` of the tunneling term, solved from the valley anchor.
    pub fn shape_exponent(&self) -> f64 {
        self.shape
    }

    fn check_domain(v: f64) -> Result<(), DiodeError> {
        if v >= 0.0 && v.is_finite() {
            Ok(())
        } else {
            Err(DiodeError::Domain { voltage: v })
        }
    }

    fn tunnel(&self, v: f64) -> f64 {
        let p = &self.params;
        let u = v / p.v_peak;
        p.i_peak * pow(u, self.shape) * exp(self.shape * (1.0 - u))
    }

    fn tunnel_slope(&self, v: f64) -> f64 {
        let p = &self.params;
        let u = v / p.v_peak;
        p.i_peak * self.shape / p.v_peak
            * pow(u, self.shape - 1.0)
            * exp(self.shape * (1.0 - u))
            * (1.0 - u)
    }

    fn excess(&self, v: f64) -> f64 {
        let p = &self.params;
        if v <= p.v_peak {
            return 0.0;
        }
        let s = p.v_excess_scale;
        let x = self.excess_floor;
        self.excess_amp * (exp((v - p.v_valley) / s) - x - (v - p.v_peak) / s * x)
    }

    fn excess_slope(&self, v: f64) -> f64 {
        let p = &self.params;
        if v <= p.v_peak {
            return 0.0;
        }
        let s = p.v_excess_scale;
        self.excess_amp * (exp((v - p.v_valley) / s) - self.excess_floor) / s
    }

    /// Diode current in amperes at bias `v` volts.
    pub fn iv_current(&self, v: f64) -> Result<f64, DiodeError> {
        Self::check_domain(v)?;
        Ok(self.tunnel(v) + self.excess(v))
    }

    /// Closed-form dI/dV in siemens.
    pub fn differential_conductance(&self, v: f64) -> Result<f64, DiodeError> {
        Self::check_domain(v)?;
        Ok(self.tunnel_slope(v) + self.excess_slope(v))
    }

    /// Bounds `(v_low, v_high)` of the negative-conductance region.
    pub fn ndr_region(&self) -> Result<(f64, f64), DiodeError> {
        find_ndr(
            |v| self.tunnel_slope(v) + self.excess_slope(v),
            2.0 * self.params.v_valley,
        )
    }

    pub fn bias_point(&self, v_bias: f64) -> Result<BiasPoint, DiodeError> {
        let current = self.iv_current(v_bias)?;
        let differential_conductance = self.differential_conductance(v_bias)?;
        Ok(BiasPoint {
            voltage: v_bias,
            current,
            power: v_bias * current,
            differential_conductance,
        })
    }
}

const COARSE_STEP: f64 = 1.0e-3;
const ROOT_TOLERANCE: f64 = 1.0e-12;

/// Locates the falling and rising zero crossings of `slope` on `(0, v_max]`
/// with a 1 mV scan followed by bisection.
fn find_ndr<F: Fn(f64) -> f64>(slope: F, v_max: f64) -> Result<(f64, f64), DiodeError> {
    let steps = (v_max / COARSE_STEP) as usize;
    let mut low = None;
    let mut prev_v = COARSE_STEP;
    let mut prev_g = slope(prev_v);
    for k in 2..=steps {
        let v = k as f64 * COARSE_STEP;
        let g = slope(v);
        match low {
            None if prev_g > 0.0 && g <= 0.0 => {
                low = Some(bisect(&slope, prev_v, v, |g| g > 0.0));
            }
            Some(v_low) if prev_g < 0.0 && g >= 0.0 => {
                let v_high = bisect(&slope, prev_v, v, |g| g < 0.0);
                return Ok((v_low, v_high));
            }
            _ => {}
        }
        prev_v = v;
        prev_g = g;
    }
    Err(DiodeError::NoNdrRegion)
}

/// `keep_lo(slope(lo))` holds at `lo` and fails at `hi`.
fn bisect<F: Fn(f64) -> f64>(slope: &F, mut lo: f64, mut hi: f64, keep_lo: impl Fn(f64) -> bool) -> f64 {
    while hi - lo > ROOT_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if keep_lo(slope(mid)) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
