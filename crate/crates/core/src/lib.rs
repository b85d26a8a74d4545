//! Models and receiver DSP for tunnel-diode oscillator sensing.
//!
//! A tunnel diode biased in its negative-differential-resistance region
//! sustains oscillation in an LC tank. Objects moving near the tank pull its
//! resonant frequency, so a receiver that tracks the carrier frequency can
//! recover motion such as breathing. This crate covers that chain:
//!
//! - [`diode`]: parametric I-V curve, NDR region and bias point.
//! - [`oscillator`]: LC resonance, start-up condition, frequency pulling and
//!   free-space link budget.
//! - [`scene`]: breathing kinematics, environment disturbances, drift traces
//!   and complex-baseband IQ synthesis.
//! - [`dsp`]: STFT frequency tracking, detrending, Hampel filtering,
//!   smoothing, rate estimation, breath counting and lag alignment.
//! - [`harvest`]: photodiode charging of a storage capacitor and the tag's
//!   active window while it discharges.
//!
//! The crate is `no_std` and needs only `alloc`. File formats and the
//! command-line front end live in the `tunnelsense` crate.

#![no_std]
#![forbid(unsafe_code)]
// `!(x > 0.0)` guards double as NaN rejection.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod diode;
pub mod dsp;
pub mod harvest;
pub mod oscillator;
pub mod scene;
pub mod signal;

pub use diode::{BiasPoint, DiodeError, DiodeModel, DiodeParams};
pub use oscillator::{OscillatorConfig, PullingModel, ResonantCircuit};
pub use signal::{FrequencyTrace, IqRecording, RespTrace, TrackedTrace, UniformSeries};
