use alloc::vec::Vec;
use core::f64::consts::TAU;

use libm::sincos;
use num_complex::Complex64;

use super::DspError;

/// Iterative radix-2 forward FFT with precomputed twiddles.
#[derive(Debug, Clone)]
pub struct Fft {
    len: usize,
    twiddles: Vec<Complex64>,
    bit_reverse: Vec<usize>,
}

impl Fft {
    pub fn new(len: usize) -> Result<Self, DspError> {
        if len < 2 || !len.is_power_of_two() {
            return Err(DspError::InvalidParameter("FFT length must be a power of two >= 2"));
        }
        let twiddles = (0..len / 2)
            .map(|k| {
                let (s, c) = sincos(-TAU * k as f64 / len as f64);
                Complex64::new(c, s)
            })
            .collect();
        let bits = len.trailing_zeros();
        let bit_reverse = (0..len)
            .map(|i| i.reverse_bits() >> (usize::BITS - bits))
            .collect();
        Ok(Self {
            len,
            twiddles,
            bit_reverse,
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// In-place unnormalized DFT, `X[k] = Σ x[n] e^{-2πikn/N}`.
    pub fn forward(&self, buf: &mut [Complex64]) {
        assert_eq!(buf.len(), self.len, "buffer length must match FFT length");
        for (i, &j) in self.bit_reverse.iter().enumerate() {
            if i < j {
                buf.swap(i, j);
            }
        }
        let mut size = 2;
        while size <= self.len {
            let half = size / 2;
            let stride = self.len / size;
            for block in buf.chunks_exact_mut(size) {
                let (lo, hi) = block.split_at_mut(half);
                for (j, (a, b)) in lo.iter_mut().zip(hi.iter_mut()).enumerate() {
                    let t = self.twiddles[j * stride] * *b;
                    *b = *a - t;
                    *a += t;
                }
            }
            size *= 2;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rustfft::FftPlanner;

    fn naive_dft(x: &[Complex64]) -> Vec<Complex64> {
        let n = x.len();
        (0..n)
            .map(|k| {
                x.iter().enumerate().fold(Complex64::new(0.0, 0.0), |acc, (i, v)| {
                    let (s, c) = sincos(-TAU * (k * i % n) as f64 / n as f64);
                    acc + v * Complex64::new(c, s)
                })
            })
            .collect()
    }

    #[test]
    fn rejects_bad_lengths() {
        assert!(Fft::new(0).is_err());
        assert!(Fft::new(12).is_err());
        assert!(Fft::new(16).is_ok());
    }

    #[test]
    fn matches_naive_dft() {
        let x: Vec<Complex64> = (0..64)
            .map(|i| Complex64::new(libm::sin(i as f64 * 0.3), libm::cos(i as f64 * 1.7) * 0.5))
            .collect();
        let mut y = x.clone();
        Fft::new(64).unwrap().forward(&mut y);
        for (a, b) in y.iter().zip(naive_dft(&x)) {
            assert!((a - b).norm() < 1e-9);
        }
    }

    proptest! {
        #[test]
        fn matches_rustfft(log2 in 1u32..12, seed in any::<u64>()) {
            let n = 1usize << log2;
            let mut state = seed | 1;
            let mut next = || {
                state ^= state << 13; state ^= state >> 7; state ^= state << 17;
                (state % 2001) as f64 / 1000.0 - 1.0
            };
            let x: Vec<Complex64> = (0..n).map(|_| Complex64::new(next(), next())).collect();
            let mut ours = x.clone();
            Fft::new(n).unwrap().forward(&mut ours);
            let mut theirs: Vec<rustfft::num_complex::Complex<f64>> =
                x.iter().map(|c| rustfft::num_complex::Complex::new(c.re, c.im)).collect();
            FftPlanner::new().plan_fft_forward(n).process(&mut theirs);
            for (a, b) in ours.iter().zip(&theirs) {
                prop_assert!((a.re - b.re).abs() < 1e-9 * n as f64 && (a.im - b.im).abs() < 1e-9 * n as f64);
            }
        }
    }
}
