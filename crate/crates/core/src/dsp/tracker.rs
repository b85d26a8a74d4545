use alloc::vec::Vec;
use core::f64::consts::TAU;

use libm::{cos, log};
use num_complex::Complex64;

use super::{DspError, Fft};
use crate::signal::{IqRecording, TrackedTrace};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowFunction {
    Hann,
    Rectangular,
}

impl WindowFunction {
    fn coefficients(self, len: usize) -> Vec<f64> {
        match self {
            // periodic Hann
            WindowFunction::Hann => (0..len)
                .map(|i| 0.5 - 0.5 * cos(TAU * i as f64 / len as f64))
                .collect(),
            WindowFunction::Rectangular => alloc::vec![1.0; len],
        }
    }
}

/// Short-time FFT peak tracker settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackerConfig {
    pub fft_length: usize,
    pub hop: usize,
    pub window: WindowFunction,
    /// Allowed carrier offsets `(min, max)` from the center frequency, Hz.
    pub search_band: (f64, f64),
}

impl Default for TrackerConfig {
    fn default() -> Self {
        Self {
            fft_length: 4096,
            hop: 4096,
            window: WindowFunction::Hann,
            search_band: (-250.0e3, 250.0e3),
        }
    }
}

impl TrackerConfig {
    pub fn validate(&self, sample_rate: f64) -> Result<(), DspError> {
        if self.fft_length < 4 || !self.fft_length.is_power_of_two() {
            return Err(DspError::InvalidParameter("fft_length must be a power of two >= 4"));
        }
        if self.hop == 0 || self.hop > self.fft_length {
            return Err(DspError::InvalidParameter("hop must be in 1..=fft_length"));
        }
        let (lo, hi) = self.search_band;
        let nyquist = sample_rate / 2.0;
        if !(lo < hi) || lo < -nyquist || hi > nyquist {
            return Err(DspError::InvalidParameter("search band must be ordered and within ±sample_rate/2"));
        }
        Ok(())
    }

    fn bin_width(&self, sample_rate: f64) -> f64 {
        sample_rate / self.fft_length as f64
    }
}

/// Per-hop windowed FFT peak within the search band, refined by a
/// three-point parabola on log power. Windows without signal energy yield
/// `None`.
pub fn track_frequency(iq: &IqRecording, cfg: &TrackerConfig) -> Result<TrackedTrace, DspError> {
    let fs = iq.sample_rate;
    if !(fs > 0.0) {
        return Err(DspError::InvalidParameter("sample_rate must be > 0"));
    }
    cfg.validate(fs)?;
    let n = cfg.fft_length;
    if iq.samples.len() < n {
        return Err(DspError::TooShort {
            required: n as f64,
            actual: iq.samples.len() as f64,
        });
    }

    let fft = Fft::new(n)?;
    let window = cfg.window.coefficients(n);
    let df = cfg.bin_width(fs);
    let k_lo = libm::ceil(cfg.search_band.0 / df) as i64;
    let k_hi = libm::floor(cfg.search_band.1 / df) as i64;
    let wrap = |k: i64| k.rem_euclid(n as i64) as usize;

    let frames = (iq.samples.len() - n) / cfg.hop + 1;
    let mut values = Vec::with_capacity(frames);
    let mut buf = alloc::vec![Complex64::new(0.0, 0.0); n];
    let mut power = alloc::vec![0.0f64; n];
    for frame in 0..frames {
        let start = frame * cfg.hop;
        let mut energy = 0.0;
        for ((b, s), w) in buf.iter_mut().zip(&iq.samples[start..start + n]).zip(&window) {
            *b = Complex64::new(s.re as f64 * w, s.im as f64 * w);
            energy += b.norm_sqr();
        }
        if energy == 0.0 {
            values.push(None);
            continue;
        }
        fft.forward(&mut buf);
        for (p, b) in power.iter_mut().zip(&buf) {
            *p = b.norm_sqr();
        }

        let mut peak = k_lo;
        for k in k_lo..=k_hi {
            if power[wrap(k)] > power[wrap(peak)] {
                peak = k;
            }
        }
        let centre = power[wrap(peak)];
        if centre <= 0.0 {
            values.push(None);
            continue;
        }
        let left = power[wrap(peak - 1)];
        let right = power[wrap(peak + 1)];
        let delta = parabolic_log_offset(left, centre, right);
        values.push(Some(iq.center_frequency + (peak as f64 + delta) * df));
    }

    Ok(TrackedTrace {
        start_time: iq.start_time + (n as f64 / 2.0) / fs,
        sample_interval: cfg.hop as f64 / fs,
        values,
    })
}

/// Vertex offset in bins of the parabola through the log powers.
fn parabolic_log_offset(left: f64, centre: f64, right: f64) -> f64 {
    if left <= 0.0 || right <= 0.0 {
        return 0.0;
    }
    let (a, b, c) = (log(left), log(centre), log(right));
    let denom = a - 2.0 * b + c;
    if denom >= 0.0 {
        return 0.0;
    }
    (0.5 * (a - c) / denom).clamp(-0.5, 0.5)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex32;

    fn tone(offsets: &[(f64, f32)], fs: f64, len: usize) -> IqRecording {
        let samples = (0..len)
            .map(|i| {
                offsets.iter().fold(Complex32::new(0.0, 0.0), |acc, &(f, a)| {
                    let (s, c) = libm::sincos(TAU * f * i as f64 / fs);
                    acc + Complex32::new(c as f32, s as f32) * a
                })
            })
            .collect();
        IqRecording::from_samples(fs, 868e6, 0.0, samples)
    }

    #[test]
    fn interpolates_off_bin_tone() {
        let iq = tone(&[(1234.0, 1.0)], 1e6, 40_000);
        let tr = track_frequency(&iq, &TrackerConfig::default()).unwrap();
        assert_eq!(tr.values.len(), 9);
        assert_eq!(tr.sample_interval, 4096.0 / 1e6);
        for v in &tr.values {
            let off = v.unwrap() - 868e6;
            assert!((off - 1234.0).abs() < 25.0, "{off}");
        }
    }

    #[test]
    fn on_bin_tone_needs_no_correction() {
        let bin = 1e6 / 4096.0;
        let iq = tone(&[(5.0 * bin, 1.0)], 1e6, 4096 * 3);
        let tr = track_frequency(&iq, &TrackerConfig::default()).unwrap();
        for v in &tr.values {
            assert!((v.unwrap() - 868e6 - 5.0 * bin).abs() < 1e-6);
        }
    }

    #[test]
    fn ignores_out_of_band_interferer() {
        let iq = tone(&[(-20_000.0, 1.0), (150_000.0, 4.0)], 1e6, 4096 * 4);
        let cfg = TrackerConfig { search_band: (-50e3, 50e3), ..Default::default() };
        let tr = track_frequency(&iq, &cfg).unwrap();
        for v in &tr.values {
            assert!((v.unwrap() - 868e6 + 20_000.0).abs() < 25.0);
        }
        // with the full band it locks to the stronger tone instead
        let tr = track_frequency(&iq, &TrackerConfig::default()).unwrap();
        assert!((tr.values[0].unwrap() - 868e6 - 150_000.0).abs() < 25.0);
    }

    #[test]
    fn silent_windows_are_missing() {
        let mut iq = tone(&[(1000.0, 1.0)], 1e6, 4096 * 3);
        for s in &mut iq.samples[4096..8192] {
            *s = Complex32::new(0.0, 0.0);
        }
        let tr = track_frequency(&iq, &TrackerConfig::default()).unwrap();
        assert!(tr.values[0].is_some());
        assert_eq!(tr.values[1], None);
        assert!(tr.values[2].is_some());
        assert_eq!(tr.missing_count(), 1);
    }

    #[test]
    fn config_checks() {
        let iq = tone(&[(0.0, 1.0)], 1e6, 1000);
        assert!(matches!(track_frequency(&iq, &TrackerConfig::default()), Err(DspError::TooShort { .. })));
        let bad = [
            TrackerConfig { fft_length: 1000, ..Default::default() },
            TrackerConfig { hop: 5000, ..Default::default() },
            TrackerConfig { hop: 0, ..Default::default() },
            TrackerConfig { search_band: (1e3, -1e3), ..Default::default() },
            TrackerConfig { search_band: (-600e3, 0.0), ..Default::default() },
        ];
        for cfg in bad {
            assert!(cfg.validate(1e6).is_err(), "{cfg:?}");
        }
    }
}
