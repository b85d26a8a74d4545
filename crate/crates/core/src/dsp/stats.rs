//! Small descriptive statistics used across the pipeline.

use alloc::vec::Vec;

pub fn mean(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    x.iter().sum::<f64>() / x.len() as f64
}

/// Population variance.
pub fn variance(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    let m = mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / x.len() as f64
}

/// Median of a slice; NaN for an empty slice.
pub fn median(x: &[f64]) -> f64 {
    let mut v: Vec<f64> = x.to_vec();
    median_in_place(&mut v)
}

pub(crate) fn median_in_place(v: &mut [f64]) -> f64 {
    let n = v.len();
    if n == 0 {
        return f64::NAN;
    }
    v.sort_unstable_by(f64::total_cmp);
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Median absolute deviation about `center`.
pub fn mad(x: &[f64], center: f64) -> f64 {
    let mut dev: Vec<f64> = x.iter().map(|v| (v - center).abs()).collect();
    median_in_place(&mut dev)
}

/// Moment estimate `m4 / m2² - 3`; zero for constant input.
pub fn excess_kurtosis(x: &[f64]) -> f64 {
    let m = mean(x);
    let (mut m2, mut m4) = (0.0, 0.0);
    for v in x {
        let d = (v - m) * (v - m);
        m2 += d;
        m4 += d * d;
    }
    if m2 == 0.0 {
        return 0.0;
    }
    let n = x.len() as f64;
    (m4 / n) / ((m2 / n) * (m2 / n)) - 3.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basics() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        assert!(median(&[]).is_nan());
        assert_eq!(mad(&[1.0, 2.0, 3.0, 4.0, 100.0], 3.0), 1.0);
        assert_eq!(variance(&[1.0, 1.0]), 0.0);
        assert_eq!(excess_kurtosis(&[2.0; 10]), 0.0);
    }

    #[test]
    fn kurtosis_of_sine_and_spikes() {
        let sine: Vec<f64> = (0..10_000).map(|k| libm::sin(k as f64 * 0.01)).collect();
        assert!((excess_kurtosis(&sine) + 1.5).abs() < 0.01);
        let mut spiky = alloc::vec![0.0; 1000];
        spiky[10] = 1.0;
        assert!(excess_kurtosis(&spiky) > 100.0);
    }
}
