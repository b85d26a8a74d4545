use alloc::vec::Vec;

use libm::round;

use super::{detrend, estimate_rate, hampel_filter, smooth, track_frequency, DspError, RateEstimate, TrackerConfig, DEFAULT_BAND};
use crate::signal::{FrequencyTrace, IqRecording, TrackedTrace};

/// Post-tracking cleanup and rate-estimation settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineConfig {
    /// Tracker output is block-averaged down to about this rate before
    /// filtering. `None` keeps the tracker's hop rate.
    pub decimate_to_hz: Option<f64>,
    /// Dropouts shorter than this are bridged linearly; longer ones split the
    /// trace and the longest piece is kept.
    pub max_gap_s: f64,
    pub detrend_window_s: f64,
    pub hampel_window: usize,
    pub hampel_sigmas: f64,
    pub smooth_window: usize,
    pub band: (f64, f64),
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            decimate_to_hz: Some(20.0),
            max_gap_s: 2.0,
            detrend_window_s: 30.0,
            hampel_window: 11,
            hampel_sigmas: 3.0,
            smooth_window: 5,
            band: DEFAULT_BAND,
        }
    }
}

/// Named intermediate trace, kept for inspection.
#[derive(Debug, Clone, PartialEq)]
pub struct Stage {
    pub name: &'static str,
    pub trace: FrequencyTrace,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutput {
    pub estimate: RateEstimate,
    pub stages: Vec<Stage>,
}

impl PipelineOutput {
    /// The trace the estimate was computed from.
    pub fn processed(&self) -> &FrequencyTrace {
        &self.stages.last().expect("pipeline always records stages").trace
    }
}

impl PipelineConfig {
    /// track → decimate → bridge gaps → detrend → hampel → smooth → estimate.
    pub fn run_iq(&self, iq: &IqRecording, tracker: &TrackerConfig) -> Result<PipelineOutput, DspError> {
        let tracked = track_frequency(iq, tracker)?;
        let reduced = match self.decimate_to_hz {
            Some(rate) => decimate(&tracked, rate)?,
            None => tracked,
        };
        let filled = fill_gaps(&reduced, self.max_gap_s)?;
        let mut out = self.run_trace(&filled)?;
        out.stages.insert(0, Stage { name: "track", trace: filled });
        Ok(out)
    }

    /// detrend → hampel → smooth → estimate on an already uniform trace.
    pub fn run_trace(&self, trace: &FrequencyTrace) -> Result<PipelineOutput, DspError> {
        let detrended = detrend(trace, self.detrend_window_s)?;
        let cleaned = hampel_filter(&detrended, self.hampel_window, self.hampel_sigmas)?;
        let smoothed = smooth(&cleaned, self.smooth_window)?;
        let estimate = estimate_rate(&smoothed, self.band)?;
        Ok(PipelineOutput {
            estimate,
            stages: alloc::vec![
                Stage { name: "detrend", trace: detrended },
                Stage { name: "hampel", trace: cleaned },
                Stage { name: "smooth", trace: smoothed },
            ],
        })
    }
}

/// Averages the present values in consecutive blocks of
/// `round(input_rate / rate)` samples. Each output sample is stamped at the
/// center of its block; a block with nothing present stays missing.
pub fn decimate(trace: &TrackedTrace, rate: f64) -> Result<TrackedTrace, DspError> {
    if !(rate > 0.0) {
        return Err(DspError::InvalidParameter("decimation rate must be > 0"));
    }
    let factor = (round(1.0 / (trace.sample_interval * rate)) as usize).max(1);
    let values = trace
        .values
        .chunks_exact(factor)
        .map(|block| {
            let (sum, count) = block
                .iter()
                .flatten()
                .fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
            (count > 0).then(|| sum / count as f64)
        })
        .collect();
    Ok(TrackedTrace {
        start_time: trace.start_time + (factor - 1) as f64 / 2.0 * trace.sample_interval,
        sample_interval: factor as f64 * trace.sample_interval,
        values,
    })
}

/// Bridges runs of missing samples shorter than `max_gap` seconds by linear
/// interpolation. Longer runs (and missing edges) split the trace; the
/// longest piece is returned, the earliest one on ties.
pub fn fill_gaps(trace: &TrackedTrace, max_gap: f64) -> Result<FrequencyTrace, DspError> {
    if !(max_gap >= 0.0) {
        return Err(DspError::InvalidParameter("max_gap must be >= 0"));
    }
    let dt = trace.sample_interval;
    let x = &trace.values;

    // split into [start, end) pieces that begin and end on present samples
    let mut pieces: Vec<(usize, usize)> = Vec::new();
    let mut start: Option<usize> = None;
    let mut last_present = 0usize;
    for (i, v) in x.iter().enumerate() {
        if v.is_none() {
            continue;
        }
        match start {
            None => start = Some(i),
            Some(s) => {
                let missing = i - last_present - 1;
                if missing > 0 && missing as f64 * dt >= max_gap {
                    pieces.push((s, last_present + 1));
                    start = Some(i);
                }
            }
        }
        last_present = i;
    }
    let Some(s) = start else {
        return Err(DspError::NoSamples);
    };
    pieces.push((s, last_present + 1));
    let (lo, hi) = pieces
        .into_iter()
        .fold((0, 0), |best, p| if p.1 - p.0 > best.1 - best.0 { p } else { best });

    let mut values = Vec::with_capacity(hi - lo);
    let mut prev = lo;
    for i in lo..hi {
        if let Some(v) = x[i] {
            let left = x[prev].expect("prev is present");
            for k in prev + 1..i {
                let frac = (k - prev) as f64 / (i - prev) as f64;
                values.push(left + frac * (v - left));
            }
            values.push(v);
            prev = i;
        }
    }
    Ok(FrequencyTrace::new(trace.start_time + lo as f64 * dt, dt, values))
}
