//! Sampled checks of the modified log-Sobolev and convex entropy decay
//! inequalities.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calculus::{dirichlet, entropy, entropy_decay_expression, Density};
use crate::chain::MarkovChain;

use super::sampling::{rng_for, sample_density, Purpose, SamplingConfig, SAMPLE_FLOOR};

/// Samples with smaller relative entropy are skipped by the log-Sobolev scan.
pub const ENTROPY_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanSummary {
    pub samples: usize,
    pub skipped: usize,
    /// Smallest value seen, `+inf` if every sample was skipped.
    pub min: f64,
}

fn densities<'a>(
    chain: &'a MarkovChain,
    config: &SamplingConfig,
    purpose: Purpose,
) -> impl ParallelIterator<Item = Density> + 'a {
    let seed = config.seed;
    (0..config.samples).into_par_iter().map(move |i| {
        let mut rng = rng_for(seed, purpose, i as u64);
        let rho = sample_density(&mut rng, chain.pi(), SAMPLE_FLOOR);
        Density::new(rho, chain.pi()).expect("sampled densities are normalized")
    })
}

fn summarize(values: Vec<Option<f64>>) -> ScanSummary {
    let skipped = values.iter().filter(|v| v.is_none()).count();
    ScanSummary {
        samples: values.len(),
        skipped,
        min: values.into_iter().flatten().fold(f64::INFINITY, f64::min),
    }
}

/// `min E(rho, log rho) / (2 H(rho))` over sampled densities; a curvature
/// bound `kappa` requires this to be at least `kappa`.
pub fn mlsi_scan(chain: &MarkovChain, config: &SamplingConfig) -> ScanSummary {
    let values = densities(chain, config, Purpose::Mlsi)
        .map(|rho| {
            let h = entropy(chain.pi(), &rho);
            if h < ENTROPY_FLOOR {
                return None;
            }
            let log_rho = rho.log().expect("sampled densities are strict");
            Some(dirichlet(chain, rho.values(), log_rho.values()) / (2.0 * h))
        })
        .collect();
    summarize(values)
}

/// `min sum[L rho L log rho + (L rho)^2 / rho] pi - kappa E(rho, log rho)`
/// over sampled densities.
pub fn ced_check(chain: &MarkovChain, kappa: f64, config: &SamplingConfig) -> ScanSummary {
    let values = densities(chain, config, Purpose::Ced)
        .map(|rho| {
            let log_rho = rho.log().expect("sampled densities are strict");
            let ced = entropy_decay_expression(chain, &rho).expect("sampled densities are strict");
            Some(ced - kappa * dirichlet(chain, rho.values(), log_rho.values()))
        })
        .collect();
    summarize(values)
}
