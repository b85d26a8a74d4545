//! Receiver pipeline: carrier tracking, trace cleanup, breathing-rate
//! estimation and alignment against a reference.

mod align;
mod fft;
mod filters;
mod pipeline;
mod rate;
pub mod stats;
mod tracker;

use thiserror::Error;

pub use align::{align, AlignmentResult, MIN_OVERLAP_S};
pub use fft::Fft;
pub use filters::{detrend, hampel_filter, smooth};
pub use pipeline::{decimate, fill_gaps, PipelineConfig, PipelineOutput, Stage};
pub use rate::{count_breaths, estimate_rate, RateEstimate, DEFAULT_BAND};
pub use tracker::{track_frequency, TrackerConfig, WindowFunction};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DspError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("input too short: need {required}, have {actual}")]
    TooShort { required: f64, actual: f64 },
    #[error("insufficient cycles: found {peaks} peak(s), need at least 2")]
    InsufficientCycles { peaks: usize },
    #[error("zero-variance input")]
    ZeroVariance,
    #[error("insufficient overlap: {overlap} s < {required} s")]
    InsufficientOverlap { overlap: f64, required: f64 },
    #[error("no valid samples")]
    NoSamples,
}
