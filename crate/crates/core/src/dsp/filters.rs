use alloc::vec::Vec;

use libm::round;

use super::stats::{mad, median_in_place};
use super::DspError;
use crate::signal::FrequencyTrace;

/// Gaussian consistency constant for the MAD.
const MAD_SCALE: f64 = 1.4826;

/// Subtracts a centered moving-median baseline. The window is rounded to an
/// odd number of samples and shrinks at the edges.
pub fn detrend(trace: &FrequencyTrace, window: f64) -> Result<FrequencyTrace, DspError> {
    if !(window > 0.0) {
        return Err(DspError::InvalidParameter("detrend window must be > 0"));
    }
    let mut len = round(window / trace.sample_interval) as usize;
    if len % 2 == 0 {
        len += 1;
    }
    if len < 3 {
        return Err(DspError::InvalidParameter("detrend window shorter than 3 samples"));
    }
    let baseline = moving_median(&trace.values, len / 2);
    Ok(trace.with_values(
        trace.values.iter().zip(baseline).map(|(x, m)| x - m).collect(),
    ))
}

/// Replaces samples further than `n_sigmas` robust standard deviations from
/// their window median with that median.
pub fn hampel_filter(trace: &FrequencyTrace, window: usize, n_sigmas: f64) -> Result<FrequencyTrace, DspError> {
    if window < 3 || window % 2 == 0 {
        return Err(DspError::InvalidParameter("hampel window must be odd and >= 3"));
    }
    if !(n_sigmas > 0.0) {
        return Err(DspError::InvalidParameter("n_sigmas must be > 0"));
    }
    let x = &trace.values;
    let n = x.len();
    let half = window / 2;
    let mut scratch = Vec::with_capacity(window);
    let mut out = x.clone();
    for i in 0..n {
        let lo = i.saturating_sub(half);
        let hi = (i + half + 1).min(n);
        scratch.clear();
        scratch.extend_from_slice(&x[lo..hi]);
        let med = median_in_place(&mut scratch);
        let sigma = MAD_SCALE * mad(&x[lo..hi], med);
        if (x[i] - med).abs() > n_sigmas * sigma {
            out[i] = med;
        }
    }
    Ok(trace.with_values(out))
}

/// Centered moving average with mirrored edges, so every input sample
/// carries unit total weight and the mean is preserved.
pub fn smooth(trace: &FrequencyTrace, window: usize) -> Result<FrequencyTrace, DspError> {
    if window == 0 || window % 2 == 0 {
        return Err(DspError::InvalidParameter("smoothing window must be odd and >= 1"));
    }
    let x = &trace.values;
    let n = x.len();
    if window == 1 || n == 0 {
        return Ok(trace.clone());
    }
    let half = window / 2;
    let period = 2 * n as i64;
    let mirror = |k: i64| {
        let m = k.rem_euclid(period) as usize;
        if m < n {
            m
        } else {
            2 * n - 1 - m
        }
    };
    let mut prefix = Vec::with_capacity(n + 2 * half + 1);
    prefix.push(0.0);
    let mut acc = 0.0;
    for k in -(half as i64)..(n + half) as i64 {
        acc += x[mirror(k)];
        prefix.push(acc);
    }
    let out = (0..n)
        .map(|i| (prefix[i + window] - prefix[i]) / window as f64)
        .collect();
    Ok(trace.with_values(out))
}

/// Edge-truncated centered moving median, `O(n · half)`.
fn moving_median(x: &[f64], half: usize) -> Vec<f64> {
    let n = x.len();
    let mut out = Vec::with_capacity(n);
    if n == 0 {
        return out;
    }
    let mut window: Vec<f64> = Vec::with_capacity(2 * half + 1);
    let insert = |w: &mut Vec<f64>, v: f64| {
        let at = w.partition_point(|p| p.total_cmp(&v).is_lt());
        w.insert(at, v);
    };
    for &v in &x[..=half.min(n - 1)] {
        insert(&mut window, v);
    }
    for i in 0..n {
        let m = window.len();
        out.push(if m % 2 == 1 {
            window[m / 2]
        } else {
            0.5 * (window[m / 2 - 1] + window[m / 2])
        });
        if i + 1 + half < n {
            insert(&mut window, x[i + 1 + half]);
        }
        if i >= half {
            let v = x[i - half];
            let at = window.partition_point(|p| p.total_cmp(&v).is_lt());
            window.remove(at);
        }
    }
    out
}
