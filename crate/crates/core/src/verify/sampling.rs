//! Seeded sampling of densities and potentials.
//!
//! Sample `i` of purpose `p` is drawn from `ChaCha8Rng` seeded with the run
//! seed on stream `(p << 48) | i`, so every sample is reproducible on its
//! own and independent of how many samples are drawn or how they are
//! scheduled across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

/// Smallest probability mass given to a state by the sampler.
pub const SAMPLE_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Purpose {
    Bochner = 1,
    Mlsi = 2,
    Ced = 3,
    Lanczos = 4,
}

pub(crate) fn rng_for(seed: u64, purpose: Purpose, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((purpose as u64) << 48) | index);
    rng
}

/// Number of samples, seed and how many of the best samples to refine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplingConfig {
    pub samples: usize,
    pub seed: u64,
    pub refine: usize,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        Self {
            samples: 2000,
            seed: 0,
            refine: 10,
        }
    }
}

/// Masses drawn uniformly from the simplex, floored at `floor` and
/// renormalized, turned into a density with respect to `pi`.
pub(crate) fn sample_density<R: Rng>(rng: &mut R, pi: &[f64], floor: f64) -> Vec<f64> {
    let w: Vec<f64> = pi.iter().map(|_| rng.sample::<f64, _>(Exp1)).collect();
    mass_to_density(&w, pi, floor)
}

pub(crate) fn mass_to_density(weights: &[f64], pi: &[f64], floor: f64) -> Vec<f64> {
    let total: f64 = weights.iter().sum();
    let floored: Vec<f64> = weights.iter().map(|w| (w / total).max(floor)).collect();
    let total: f64 = floored.iter().sum();
    floored.iter().zip(pi).map(|(m, p)| m / total / p).collect()
}

pub(crate) fn sample_potential<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n)
        .map(|_| rng.sample::<f64, _>(StandardNormal))
        .collect()
}
