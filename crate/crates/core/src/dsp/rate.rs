use alloc::vec::Vec;

use libm::{ceil, sqrt};
use num_complex::Complex64;

use super::stats::mean;
use super::{DspError, Fft};
use crate::signal::UniformSeries;

/// Adult breathing band in hertz, about 5 to 42 breaths per minute.
pub const DEFAULT_BAND: (f64, f64) = (0.08, 0.7);

/// Finest spectral spacing after zero padding, hertz.
const TARGET_RESOLUTION: f64 = 0.005;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateEstimate {
    pub bpm: f64,
    /// 0 to 1; 0 means no usable periodicity was found.
    pub confidence: f64,
    /// Frequency band searched (spectral) or spanned by the breath intervals
    /// (time domain), hertz.
    pub band: (f64, f64),
}

fn check_band(band: (f64, f64)) -> Result<(), DspError> {
    if !(band.0 > 0.0) || !(band.1 > band.0) || !band.1.is_finite() {
        return Err(DspError::InvalidParameter("band must satisfy 0 < lo < hi"));
    }
    Ok(())
}

/// Dominant in-band frequency of the mean-removed series from a zero-padded
/// FFT with parabolic peak interpolation.
///
/// Confidence is the power in the peak's main lobe over all in-band power.
pub fn estimate_rate<S: UniformSeries + ?Sized>(series: &S, band: (f64, f64)) -> Result<RateEstimate, DspError> {
    check_band(band)?;
    let fs = series.sample_rate();
    if !(band.1 < fs / 2.0) {
        return Err(DspError::InvalidParameter("band exceeds the Nyquist frequency"));
    }
    let required = 2.0 / band.0;
    if series.duration() < required {
        return Err(DspError::TooShort {
            required,
            actual: series.duration(),
        });
    }

    let x = series.values();
    let n = x.len();
    let m = mean(x);
    let rms = sqrt(x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n as f64);
    let silent = RateEstimate {
        bpm: 0.0,
        confidence: 0.0,
        band,
    };
    if rms <= 1e-12 * (m.abs() + rms) {
        return Ok(silent);
    }

    let padded = n.max(ceil(fs / TARGET_RESOLUTION) as usize).next_power_of_two();
    let mut buf: Vec<Complex64> = x.iter().map(|v| Complex64::new(v - m, 0.0)).collect();
    buf.resize(padded, Complex64::new(0.0, 0.0));
    Fft::new(padded)?.forward(&mut buf);
    let power: Vec<f64> = buf[..padded / 2 + 1].iter().map(|c| c.norm_sqr()).collect();

    let df = fs / padded as f64;
    let lo = (ceil(band.0 / df) as usize).max(1);
    let hi = ((band.1 / df) as usize).min(padded / 2);
    if lo > hi {
        return Err(DspError::InvalidParameter("band narrower than one bin"));
    }
    let in_band: f64 = power[lo..=hi].iter().sum();
    if !(in_band > 0.0) {
        return Ok(silent);
    }
    let peak = (lo..=hi).fold(lo, |best, k| if power[k] > power[best] { k } else { best });

    let mag = |k: usize| sqrt(power[k]);
    let delta = if peak > 0 && peak < padded / 2 {
        let (a, b, c) = (mag(peak - 1), mag(peak), mag(peak + 1));
        let denom = a - 2.0 * b + c;
        if denom < 0.0 {
            (0.5 * (a - c) / denom).clamp(-0.5, 0.5)
        } else {
            0.0
        }
    } else {
        0.0
    };

    // main lobe of the unpadded rectangular window spans one original bin each side
    let lobe = padded.div_ceil(n);
    let lobe_lo = peak.saturating_sub(lobe).max(lo);
    let lobe_hi = (peak + lobe).min(hi);
    let lobe_power: f64 = power[lobe_lo..=lobe_hi].iter().sum();

    Ok(RateEstimate {
        bpm: 60.0 * (peak as f64 + delta) * df,
        confidence: (lobe_power / in_band).clamp(0.0, 1.0),
        band,
    })
}

/// Time-domain cross-check: counts local maxima whose prominence is at least
/// `min_prominence` and converts the mean spacing between them to a rate.
///
/// Confidence is one minus the coefficient of variation of the intervals.
pub fn count_breaths<S: UniformSeries + ?Sized>(series: &S, min_prominence: f64) -> Result<RateEstimate, DspError> {
    if !(min_prominence >= 0.0) {
        return Err(DspError::InvalidParameter("min_prominence must be >= 0"));
    }
    let x = series.values();
    let peaks: Vec<usize> = local_maxima(x)
        .into_iter()
        .filter(|&p| prominence(x, p) >= min_prominence)
        .collect();
    if peaks.len() < 2 {
        return Err(DspError::InsufficientCycles { peaks: peaks.len() });
    }

    let dt = series.sample_interval();
    let intervals: Vec<f64> = peaks.windows(2).map(|w| (w[1] - w[0]) as f64 * dt).collect();
    let span = (peaks[peaks.len() - 1] - peaks[0]) as f64 * dt;
    let mean_interval = mean(&intervals);
    let sd = sqrt(intervals.iter().map(|v| (v - mean_interval) * (v - mean_interval)).sum::<f64>() / intervals.len() as f64);
    let (shortest, longest) = intervals
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(s, l), v| (s.min(*v), l.max(*v)));

    Ok(RateEstimate {
        bpm: 60.0 * (peaks.len() - 1) as f64 / span,
        confidence: (1.0 - sd / mean_interval).clamp(0.0, 1.0),
        band: (1.0 / longest, 1.0 / shortest),
    })
}

/// Indices of strict local maxima; a flat top counts once, at its middle.
fn local_maxima(x: &[f64]) -> Vec<usize> {
    let mut out = Vec::new();
    let mut i = 1;
    while i + 1 < x.len() {
        if x[i] > x[i - 1] {
            let mut j = i;
            while j + 1 < x.len() && x[j + 1] == x[i] {
                j += 1;
            }
            if j + 1 < x.len() && x[j + 1] < x[i] {
                out.push((i + j) / 2);
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    out
}

/// Height of a peak above the higher of the two minima separating it from
/// taller samples (or the edges) on either side. Of two equally tall peaks
/// the earlier one counts as taller, so twins are not both prominent.
fn prominence(x: &[f64], peak: usize) -> f64 {
    let h = x[peak];
    let mut start = peak;
    while start > 0 && x[start - 1] == h {
        start -= 1;
    }
    let mut left_min = h;
    for &v in x[..start].iter().rev() {
        if v >= h {
            break;
        }
        left_min = left_min.min(v);
    }
    let mut right_min = h;
    for &v in &x[peak + 1..] {
        if v > h {
            break;
        }
        right_min = right_min.min(v);
    }
    h - left_min.max(right_min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::FrequencyTrace;
    use core::f64::consts::TAU;
    use proptest::prelude::*;
    use rand_chacha::rand_core::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};

    fn sine(freq: f64, seconds: f64, fs: f64, amp: f64, offset: f64) -> FrequencyTrace {
        let n = (seconds * fs) as usize;
        FrequencyTrace::new(
            0.0,
            1.0 / fs,
            (0..n).map(|k| offset + amp * libm::sin(TAU * freq * k as f64 / fs + 0.3)).collect(),
        )
    }

    #[test]
    fn recovers_quarter_hertz() {
        let est = estimate_rate(&sine(0.25, 60.0, 20.0, 1000.0, 868e6), DEFAULT_BAND).unwrap();
        assert!((est.bpm - 15.0).abs() < 0.3, "{est:?}");
        assert!(est.confidence > 0.8, "{est:?}");
        assert_eq!(est.band, DEFAULT_BAND);
    }

    #[test]
    fn matches_rustfft_peak_bin() {
        use rustfft::{num_complex::Complex, FftPlanner};
        let tr = sine(0.31, 45.0, 20.0, 1.0, 0.0);
        let est = estimate_rate(&tr, DEFAULT_BAND).unwrap();
        let n = 4096;
        let m = mean(&tr.values);
        let mut buf: Vec<Complex<f64>> = tr.values.iter().map(|v| Complex::new(v - m, 0.0)).collect();
        buf.resize(n, Complex::new(0.0, 0.0));
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        let df = 20.0 / n as f64;
        let lo = (0.08 / df).ceil() as usize;
        let hi = (0.7 / df) as usize;
        let peak = (lo..=hi).max_by(|a, b| buf[*a].norm_sqr().total_cmp(&buf[*b].norm_sqr())).unwrap();
        assert!((est.bpm / 60.0 - peak as f64 * df).abs() <= 0.5 * df);
    }

    #[test]
    fn constant_has_zero_confidence() {
        let tr = FrequencyTrace::new(0.0, 0.05, alloc::vec![868e6; 1200]);
        let est = estimate_rate(&tr, DEFAULT_BAND).unwrap();
        assert_eq!(est.confidence, 0.0);
    }

    #[test]
    fn noise_has_low_confidence() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let tr = FrequencyTrace::new(0.0, 0.05, (0..1200).map(|_| StandardNormal.sample(&mut rng)).collect());
        let est = estimate_rate(&tr, DEFAULT_BAND).unwrap();
        assert!(est.confidence < 0.3, "{est:?}");
    }

    #[test]
    fn short_or_bad_input_rejected() {
        let tr = sine(0.25, 20.0, 20.0, 1.0, 0.0);
        assert!(matches!(estimate_rate(&tr, DEFAULT_BAND), Err(DspError::TooShort { .. })));
        assert!(estimate_rate(&tr, (0.5, 0.2)).is_err());
        assert!(estimate_rate(&tr, (0.1, 15.0)).is_err());
    }

    #[test]
    fn counts_five_cycles() {
        let tr = sine(0.25, 20.0, 20.0, 1.0, 0.0);
        let est = count_breaths(&tr, 0.5).unwrap();
        assert!((est.bpm - 15.0).abs() < 1.0, "{est:?}");
        assert!(est.confidence > 0.99);
        assert!((est.band.0 - 0.25).abs() < 0.01 && (est.band.1 - 0.25).abs() < 0.01);
    }

    #[test]
    fn monotone_has_no_cycles() {
        let tr = FrequencyTrace::new(0.0, 0.05, (0..400).map(|k| k as f64).collect());
        assert_eq!(count_breaths(&tr, 0.0), Err(DspError::InsufficientCycles { peaks: 0 }));
    }

    #[test]
    fn prominence_ignores_ripple() {
        // small ripples on top of a slow wave must not count as breaths
        let tr = FrequencyTrace::new(
            0.0,
            0.05,
            (0..800)
                .map(|k| {
                    let t = k as f64 * 0.05;
                    libm::sin(TAU * 0.2 * t) + 0.05 * libm::sin(TAU * 3.0 * t)
                })
                .collect(),
        );
        let est = count_breaths(&tr, 0.5).unwrap();
        assert!((est.bpm - 12.0).abs() < 0.5, "{est:?}");
    }

    #[test]
    fn prominence_against_brute_force() {
        let x = [0.0, 3.0, 1.0, 2.0, 0.5, 4.0, 0.0, 2.5, 2.5, 1.0];
        assert_eq!(local_maxima(&x), alloc::vec![1, 3, 5, 7]);
        assert_eq!(prominence(&x, 1), 2.5);
        assert_eq!(prominence(&x, 3), 1.0);
        assert_eq!(prominence(&x, 5), 4.0);
        assert_eq!(prominence(&x, 7), 1.5);
    }

    proptest! {
        #[test]
        fn invariant_to_offset_and_scale(
            freq in 0.1f64..0.6,
            offset in -1e9f64..1e9,
            scale in 1e-3f64..1e3,
            seed in 0u64..1000,
        ) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let base: Vec<f64> = (0..1200)
                .map(|k| 1000.0 * libm::sin(TAU * freq * k as f64 / 20.0) + 300.0 * { let z: f64 = StandardNormal.sample(&mut rng); z })
                .collect();
            let a = estimate_rate(&FrequencyTrace::new(0.0, 0.05, base.clone()), DEFAULT_BAND).unwrap();
            let moved: Vec<f64> = base.iter().map(|v| v * scale + offset).collect();
            let b = estimate_rate(&FrequencyTrace::new(0.0, 0.05, moved), DEFAULT_BAND).unwrap();
            prop_assert!((a.bpm - b.bpm).abs() <= 1e-9 * a.bpm, "{a:?} {b:?}");
            prop_assert!((a.confidence - b.confidence).abs() <= 1e-9 * a.confidence, "{a:?} {b:?}");
        }
    }
}
