use alloc::vec::Vec;

use libm::{floor, sqrt};

use super::stats::mean;
use super::DspError;
use crate::signal::UniformSeries;

/// Shortest common span two traces must share to be aligned, seconds.
pub const MIN_OVERLAP_S: f64 = 10.0;

/// Largest lag searched, as a fraction of the overlap.
const MAX_LAG_FRACTION: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlignmentResult {
    /// Seconds to advance `b` so it lines up with `a`: `b(t + lag) ≈ a(t)`.
    pub lag: f64,
    /// Pearson correlation over the shared samples at `lag`, signed.
    pub correlation: f64,
    /// Grid spacing both traces were resampled to.
    pub sample_interval: f64,
}

/// Normalized cross-correlation of two traces over their common span.
///
/// Both are linearly resampled to the finer of their two sample intervals.
/// Lags up to a quarter of the overlap are searched. The coarse pick is the
/// largest |correlation| with products divided by the full-overlap energies,
/// so a periodic signal prefers the cycle nearest zero lag (ties go to the
/// smaller |lag|). It is then moved to the nearest local maximum of the
/// Pearson |correlation| over the shared samples, which is what gets reported.
pub fn align<A, B>(a: &A, b: &B) -> Result<AlignmentResult, DspError>
where
    A: UniformSeries + ?Sized,
    B: UniformSeries + ?Sized,
{
    if a.len() < 2 || b.len() < 2 {
        return Err(DspError::NoSamples);
    }
    let t0 = a.start_time().max(b.start_time());
    let t1 = a.time_at(a.len() - 1).min(b.time_at(b.len() - 1));
    let overlap = t1 - t0;
    if !(overlap >= MIN_OVERLAP_S) {
        return Err(DspError::InsufficientOverlap {
            overlap: overlap.max(0.0),
            required: MIN_OVERLAP_S,
        });
    }

    let dt = a.sample_interval().min(b.sample_interval());
    let m = floor(overlap / dt + 1e-9) as usize + 1;
    let ra = centred(resample(a, t0, dt, m))?;
    let rb = centred(resample(b, t0, dt, m))?;

    // coarse: energy-normalized, so lags sharing fewer samples score lower
    let norm = sqrt(energy(&ra) * energy(&rb));
    let max_lag = floor(MAX_LAG_FRACTION * m as f64) as i64;
    let mut coarse = (0i64, coeff(&ra, &rb, 0) / norm);
    for k in 1..=max_lag {
        for lag in [k, -k] {
            let r = coeff(&ra, &rb, lag) / norm;
            if r.abs() > coarse.1.abs() {
                coarse = (lag, r);
            }
        }
    }
    // refine: climb to the nearest local maximum of the overlap |Pearson|
    let mut best = (coarse.0, pearson(&ra, &rb, coarse.0));
    loop {
        let step = [best.0 - 1, best.0 + 1]
            .into_iter()
            .filter(|l| l.abs() <= max_lag)
            .map(|l| (l, pearson(&ra, &rb, l)))
            .filter(|c| c.1.abs() > best.1.abs())
            .fold(None, |acc: Option<(i64, f64)>, c| match acc {
                Some(a) if a.1.abs() >= c.1.abs() => Some(a),
                _ => Some(c),
            });
        match step {
            Some(next) => best = next,
            None => break,
        }
    }
    Ok(AlignmentResult {
        lag: best.0 as f64 * dt,
        correlation: best.1,
        sample_interval: dt,
    })
}

fn resample<S: UniformSeries + ?Sized>(s: &S, t0: f64, dt: f64, m: usize) -> Vec<f64> {
    let x = s.values();
    let last = x.len() - 1;
    (0..m)
        .map(|k| {
            let pos = ((t0 + k as f64 * dt - s.start_time()) / s.sample_interval()).max(0.0);
            let i = (pos as usize).min(last);
            if i == last {
                x[last]
            } else {
                let frac = pos - i as f64;
                x[i] + frac * (x[i + 1] - x[i])
            }
        })
        .collect()
}

fn centred(mut x: Vec<f64>) -> Result<Vec<f64>, DspError> {
    let m = mean(&x);
    let mut ss = 0.0;
    for v in &mut x {
        *v -= m;
        ss += *v * *v;
    }
    if !(ss > 0.0) {
        return Err(DspError::ZeroVariance);
    }
    Ok(x)
}

fn energy(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

/// `Σ a[k] · b[k + lag]` over the indices both cover.
fn coeff(a: &[f64], b: &[f64], lag: i64) -> f64 {
    let n = a.len() as i64;
    (0.max(-lag)..n.min(n - lag))
        .map(|k| a[k as usize] * b[(k + lag) as usize])
        .sum()
}

/// Pearson correlation of `a[k]` with `b[k + lag]` over the indices both
/// cover. Zero when either side is flat over that span.
fn pearson(a: &[f64], b: &[f64], lag: i64) -> f64 {
    let n = a.len() as i64;
    let (lo, hi) = (0.max(-lag), n.min(n - lag));
    if hi - lo < 2 {
        return 0.0;
    }
    let pairs = || (lo..hi).map(|k| (a[k as usize], b[(k + lag) as usize]));
    let count = (hi - lo) as f64;
    let (sa, sb) = pairs().fold((0.0, 0.0), |(sa, sb), (x, y)| (sa + x, sb + y));
    let (ma, mb) = (sa / count, sb / count);
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in pairs() {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa <= 0.0 || sbb <= 0.0 {
        return 0.0;
    }
    sab / sqrt(saa * sbb)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::{FrequencyTrace, RespTrace};
    use proptest::prelude::*;
    use rand_chacha::rand_core::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};

    /// Smoothed random walk: aperiodic, so the correlation peak is unique.
    fn wander(seed: u64, n: usize) -> Vec<f64> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut level = 0.0;
        let raw: Vec<f64> = (0..n)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                level += z;
                level
            })
            .collect();
        (0..n)
            .map(|i| {
                let lo = i.saturating_sub(3);
                let hi = (i + 4).min(n);
                raw[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
            })
            .collect()
    }

    fn trace(start: f64, dt: f64, values: Vec<f64>) -> FrequencyTrace {
        FrequencyTrace::new(start, dt, values)
    }

    #[test]
    fn identical_traces() {
        let t = trace(0.0, 0.05, wander(1, 1200));
        let r = align(&t, &t).unwrap();
        assert_eq!(r.lag, 0.0);
        assert!((r.correlation - 1.0).abs() < 1e-6);
    }

    #[test]
    fn negated_trace() {
        let x = wander(2, 1200);
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        let r = align(&trace(0.0, 0.05, x), &trace(0.0, 0.05, neg)).unwrap();
        assert_eq!(r.lag, 0.0);
        assert!((r.correlation + 1.0).abs() < 1e-6);
    }

    #[test]
    fn recovers_two_second_delay() {
        let x = wander(3, 1600);
        let a = trace(0.0, 0.05, x[40..].to_vec());
        // b(t) = a(t - 2)
        let b = trace(0.0, 0.05, x[..1560].to_vec());
        let r = align(&a, &b).unwrap();
        assert!((r.lag - 2.0).abs() <= 0.05, "{r:?}");
        assert!(r.correlation > 0.999);
    }

    #[test]
    fn mixed_rates_and_types() {
        let x = wander(4, 4000);
        // reference at 50 Hz, the other copy decimated to 10 Hz and delayed by 1.5 s
        let fine = RespTrace {
            start_time: 0.0,
            sample_interval: 0.02,
            force_values: x[75..].to_vec(),
        };
        let coarse = trace(0.0, 0.1, x.iter().step_by(5).copied().collect());
        let r = align(&fine, &coarse).unwrap();
        assert_eq!(r.sample_interval, 0.02);
        assert!((r.lag - 1.5).abs() <= 0.02, "{r:?}");
    }

    #[test]
    fn periodic_signal_locks_to_nearest_cycle() {
        // 4 s period, true delay 0.5 s; cycles at 4.5 s, 8.5 s, ... score lower
        let x: Vec<f64> = (0..1200).map(|i| libm::sin(core::f64::consts::TAU * 0.25 * (i as f64 * 0.05))).collect();
        let y: Vec<f64> = (0..1200).map(|i| libm::sin(core::f64::consts::TAU * 0.25 * (i as f64 * 0.05 - 0.5))).collect();
        let r = align(&trace(0.0, 0.05, x.clone()), &trace(0.0, 0.05, y)).unwrap();
        assert!((r.lag - 0.5).abs() <= 0.05, "{r:?}");
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        let r = align(&trace(0.0, 0.05, x), &trace(0.0, 0.05, neg)).unwrap();
        assert_eq!(r.lag, 0.0);
        assert!((r.correlation + 1.0).abs() < 1e-6);
    }

    #[test]
    fn rejects_short_overlap_and_flat_input() {
        let a = trace(0.0, 0.05, wander(5, 400));
        let b = trace(15.0, 0.05, wander(6, 400));
        assert!(matches!(align(&a, &b), Err(DspError::InsufficientOverlap { .. })));
        let flat = trace(0.0, 0.05, alloc::vec![3.0; 400]);
        assert_eq!(align(&a, &flat), Err(DspError::ZeroVariance));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn lag_is_antisymmetric(seed in 0u64..10_000, shift in 0usize..60, off in -3.0f64..3.0) {
            let x = wander(seed, 500);
            let a = trace(0.0, 0.05, x[shift..].to_vec());
            let b = trace(off, 0.05, wander(seed + 1, 500).iter().zip(&x).map(|(n, v)| v + 0.3 * n).collect());
            let ab = align(&a, &b).unwrap();
            let ba = align(&b, &a).unwrap();
            prop_assert!((ab.lag + ba.lag).abs() <= ab.sample_interval + 1e-9, "{ab:?} {ba:?}");
        }
    }
}
