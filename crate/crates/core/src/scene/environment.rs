use alloc::vec::Vec;

use libm::exp;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Pareto, Uniform};

use super::SceneError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnvironmentKind {
    StaticIndoor,
    /// People walking near the subject.
    DynamicIndoor,
    /// Walkers and traffic; adds heavy-tailed spikes.
    Outdoor,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvironmentProfile {
    pub kind: EnvironmentKind,
    /// Mean disturbance events per second.
    pub disturbance_rate: f64,
    /// Frequency-shift scale of a disturbance in hertz.
    pub disturbance_magnitude: f64,
    /// Receiver SNR over the full IQ bandwidth.
    pub noise_floor_snr_db: f64,
}

impl Default for EnvironmentProfile {
    fn default() -> Self {
        Self::static_indoor()
    }
}

impl EnvironmentProfile {
    pub fn static_indoor() -> Self {
        Self {
            kind: EnvironmentKind::StaticIndoor,
            disturbance_rate: 0.0,
            disturbance_magnitude: 0.0,
            noise_floor_snr_db: 20.0,
        }
    }

    pub fn dynamic_indoor() -> Self {
        Self {
            kind: EnvironmentKind::DynamicIndoor,
            disturbance_rate: 0.1,
            disturbance_magnitude: 2.0e3,
            noise_floor_snr_db: 15.0,
        }
    }

    pub fn outdoor() -> Self {
        Self {
            kind: EnvironmentKind::Outdoor,
            disturbance_rate: 0.2,
            disturbance_magnitude: 3.0e3,
            noise_floor_snr_db: 10.0,
        }
    }

    pub fn for_kind(kind: EnvironmentKind) -> Self {
        match kind {
            EnvironmentKind::StaticIndoor => Self::static_indoor(),
            EnvironmentKind::DynamicIndoor => Self::dynamic_indoor(),
            EnvironmentKind::Outdoor => Self::outdoor(),
        }
    }

    pub fn validate(&self) -> Result<(), SceneError> {
        if !(self.disturbance_rate >= 0.0) || !self.disturbance_rate.is_finite() {
            return Err(SceneError::Invalid("disturbance_rate must be >= 0"));
        }
        if !(self.disturbance_magnitude >= 0.0) || !self.disturbance_magnitude.is_finite() {
            return Err(SceneError::Invalid("disturbance_magnitude must be >= 0"));
        }
        if self.noise_floor_snr_db.is_nan() {
            return Err(SceneError::Invalid("noise_floor_snr_db is NaN"));
        }
        Ok(())
    }
}

/// Smooth Gaussian frequency excursion from someone passing by.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bump {
    pub center: f64,
    /// Full width at half maximum, seconds.
    pub width: f64,
    pub magnitude: f64,
}

/// Rectangular outlier lasting [`SPIKE_DURATION`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spike {
    pub start: f64,
    pub magnitude: f64,
}

/// One sample at the default 20 Hz trace rate.
pub const SPIKE_DURATION: f64 = 0.05;

const BUMP_MIN_WIDTH: f64 = 0.5;
const BUMP_MAX_WIDTH: f64 = 2.0;
const PARETO_SHAPE: f64 = 1.5;
/// Spikes are truncated at this multiple of the disturbance magnitude so a
/// single draw cannot leave the receiver bandwidth.
const SPIKE_CAP: f64 = 20.0;
const FWHM_PER_SIGMA: f64 = 2.354_820_045_030_949;
/// Bumps are drawn this far outside the window so the edges see their tails.
const EDGE_MARGIN: f64 = 4.0;

/// A realization of the environment's disturbance process over a time span.
///
/// Bumps arrive as a Poisson process; outdoor scenes add an independent
/// Poisson stream of Pareto-magnitude spikes at the same rate, capped at
/// 20 times the disturbance magnitude.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DisturbanceField {
    pub bumps: Vec<Bump>,
    pub spikes: Vec<Spike>,
}

impl DisturbanceField {
    pub fn sample(env: &EnvironmentProfile, duration: f64, rng: &mut ChaCha8Rng) -> Self {
        let mut field = Self::default();
        if env.kind == EnvironmentKind::StaticIndoor
            || env.disturbance_rate <= 0.0
            || env.disturbance_magnitude <= 0.0
        {
            return field;
        }
        let arrivals = Exp::new(env.disturbance_rate).expect("rate checked positive");
        let width = Uniform::new_inclusive(BUMP_MIN_WIDTH, BUMP_MAX_WIDTH).expect("static bounds");
        let signed = Uniform::new_inclusive(-1.0, 1.0).expect("static bounds");

        let mut t = -EDGE_MARGIN + arrivals.sample(rng);
        while t < duration + EDGE_MARGIN {
            field.bumps.push(Bump {
                center: t,
                width: width.sample(rng),
                magnitude: env.disturbance_magnitude * signed.sample(rng),
            });
            t += arrivals.sample(rng);
        }

        if env.kind == EnvironmentKind::Outdoor {
            let pareto = Pareto::new(env.disturbance_magnitude, PARETO_SHAPE).expect("magnitude checked positive");
            let coin = Uniform::new(0.0, 1.0).expect("static bounds");
            let mut t = arrivals.sample(rng);
            while t < duration {
                let sign = if coin.sample(rng) < 0.5 { -1.0 } else { 1.0 };
                field.spikes.push(Spike {
                    start: t,
                    magnitude: sign * pareto.sample(rng).min(SPIKE_CAP * env.disturbance_magnitude),
                });
                t += arrivals.sample(rng);
            }
        }
        field
    }

    /// Frequency disturbance in hertz at time `t`.
    pub fn value_at(&self, t: f64) -> f64 {
        let mut total = 0.0;
        for b in &self.bumps {
            let sigma = b.width / FWHM_PER_SIGMA;
            let z = (t - b.center) / sigma;
            if z.abs() < 8.0 {
                total += b.magnitude * exp(-0.5 * z * z);
            }
        }
        for s in &self.spikes {
            if t >= s.start && t < s.start + SPIKE_DURATION {
                total += s.magnitude;
            }
        }
        total
    }

    pub fn is_empty(&self) -> bool {
        self.bumps.is_empty() && self.spikes.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::stats::excess_kurtosis;
    use rand_chacha::rand_core::SeedableRng;

    fn field(env: &EnvironmentProfile, duration: f64, seed: u64) -> DisturbanceField {
        DisturbanceField::sample(env, duration, &mut ChaCha8Rng::seed_from_u64(seed))
    }

    #[test]
    fn static_scene_is_quiet() {
        let f = field(&EnvironmentProfile::static_indoor(), 100.0, 1);
        assert!(f.is_empty());
        for k in 0..1000 {
            assert_eq!(f.value_at(k as f64 * 0.1), 0.0);
        }
    }

    #[test]
    fn bump_count_is_poisson() {
        let env = EnvironmentProfile { disturbance_rate: 0.1, ..EnvironmentProfile::dynamic_indoor() };
        let mut total = 0usize;
        let seeds = 200;
        for seed in 0..seeds {
            let f = field(&env, 100.0, seed);
            let n = f.bumps.iter().filter(|b| (0.0..100.0).contains(&b.center)).count();
            assert!((3..=20).contains(&n), "seed {seed}: {n} bumps");
            total += n;
            assert!(f.spikes.is_empty());
        }
        let mean = total as f64 / seeds as f64;
        assert!((mean - 10.0).abs() < 1.0, "{mean}");
    }

    #[test]
    fn bumps_respect_bounds() {
        let env = EnvironmentProfile::dynamic_indoor();
        let f = field(&env, 1000.0, 9);
        for b in &f.bumps {
            assert!(b.width >= 0.5 && b.width <= 2.0);
            assert!(b.magnitude.abs() <= env.disturbance_magnitude);
        }
    }

    #[test]
    fn outdoor_is_heavier_tailed() {
        let sample = |env: &EnvironmentProfile, seed| {
            let f = field(env, 1000.0, seed);
            (0..20_000).map(|k| f.value_at(k as f64 * 0.05)).collect::<Vec<_>>()
        };
        for seed in 0..5 {
            let k_dyn = excess_kurtosis(&sample(&EnvironmentProfile::dynamic_indoor(), seed));
            let k_out = excess_kurtosis(&sample(&EnvironmentProfile::outdoor(), seed));
            assert!(k_out > k_dyn, "seed {seed}: outdoor {k_out} dynamic {k_dyn}");
        }
    }

    #[test]
    fn spikes_are_heavy_tailed_but_capped() {
        let env = EnvironmentProfile::outdoor();
        let f = field(&env, 20_000.0, 3);
        let mags: Vec<f64> = f.spikes.iter().map(|s| s.magnitude.abs()).collect();
        assert!(mags.len() > 3000);
        assert!(mags.iter().all(|m| *m >= env.disturbance_magnitude && *m <= 20.0 * env.disturbance_magnitude));
        // Pareto(1.5) survival at 4x the scale is 4^-1.5 = 0.125
        let tail = mags.iter().filter(|m| **m > 4.0 * env.disturbance_magnitude).count() as f64 / mags.len() as f64;
        assert!((tail - 0.125).abs() < 0.02, "{tail}");
    }

    #[test]
    fn spikes_hit_one_sample_at_twenty_hz() {
        let f = DisturbanceField {
            bumps: Vec::new(),
            spikes: alloc::vec![Spike { start: 1.013, magnitude: 5.0 }],
        };
        let hits = (0..100).filter(|k| f.value_at(*k as f64 * 0.05) != 0.0).count();
        assert_eq!(hits, 1);
    }
}
