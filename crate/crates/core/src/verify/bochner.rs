//! Empirical search for the smallest ratio `B(rho, psi) / A(rho, psi)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calculus::{action_raw, hessian_b_triple, hessian_raw, Density, Potential};
use crate::criteria::check_triple_budget;
use crate::error::Result;
use crate::mapping::MappingRepresentation;

use super::sampling::{
    mass_to_density, rng_for, sample_density, sample_potential, Purpose, SamplingConfig,
    SAMPLE_FLOOR,
};

/// Samples with a smaller action are skipped.
pub const ACTION_FLOOR: f64 = 1e-12;
/// Coordinate-descent sweeps per refined sample.
pub const REFINE_ITERATIONS: usize = 200;
/// Initial coordinate step, halved whenever a sweep makes no progress.
pub const REFINE_STEP: f64 = 0.5;
/// Mass floor used while refining.
pub const REFINE_FLOOR: f64 = 1e-9;
/// Refinement is skipped above this many states.
pub const REFINE_MAX_STATES: usize = 128;

/// Which expression of `B` to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HessianForm {
    /// The `O(|X| |G|)` form with the inner sum done by the generator.
    #[default]
    Fast,
    /// The explicit triple sum, as an oracle.
    Triple,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BochnerSample {
    pub rho: Vec<f64>,
    pub psi: Vec<f64>,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BochnerReport {
    pub seed: u64,
    pub samples: usize,
    /// Samples whose action fell below the floor.
    pub skipped: usize,
    /// Minimum over the raw samples; nonincreasing in `samples`.
    pub sample_min_ratio: f64,
    /// Minimum after refinement.
    pub min_ratio: f64,
    pub refined: bool,
    pub argmin: Option<BochnerSample>,
}

struct Evaluator<'a> {
    rep: &'a MappingRepresentation,
    pi: &'a [f64],
    form: HessianForm,
}

impl Evaluator<'_> {
    fn ratio(&self, rho: &[f64], psi: &[f64]) -> Option<f64> {
        let a = action_raw(self.rep, self.pi, rho, psi);
        if !(a >= ACTION_FLOOR) {
            return None;
        }
        let b = match self.form {
            HessianForm::Fast => hessian_raw(self.rep, self.pi, rho, psi),
            HessianForm::Triple => {
                let density = Density::new(rho.to_vec(), self.pi).ok()?;
                hessian_b_triple(self.rep, self.pi, &density, &Potential(psi.to_vec())).ok()?
            }
        };
        Some(b / a)
    }

    /// Coordinate descent on log-masses and potential values.
    fn refine(&self, start: &BochnerSample) -> BochnerSample {
        let n = self.pi.len();
        let mut log_mass: Vec<f64> = start
            .rho
            .iter()
            .zip(self.pi)
            .map(|(r, p)| (r * p).ln())
            .collect();
        let mut psi = start.psi.clone();
        let mut best = start.ratio;
        let mut step = REFINE_STEP;
        let density = |lm: &[f64]| {
            let w: Vec<f64> = lm.iter().map(|v| v.exp()).collect();
            mass_to_density(&w, self.pi, REFINE_FLOOR)
        };
        for _ in 0..REFINE_ITERATIONS {
            let mut improved = false;
            for k in 0..2 * n {
                for sign in [1.0, -1.0] {
                    let (mut lm, mut ps) = (log_mass.clone(), psi.clone());
                    if k < n {
                        lm[k] += sign * step;
                    } else {
                        ps[k - n] += sign * step * (1.0 + ps[k - n].abs());
                    }
                    if let Some(r) = self.ratio(&density(&lm), &ps) {
                        if r < best {
                            best = r;
                            log_mass = lm;
                            psi = ps;
                            improved = true;
                            break;
                        }
                    }
                }
            }
            if !improved {
                step *= 0.5;
                if step < 1e-12 {
                    break;
                }
            }
        }
        BochnerSample {
            rho: density(&log_mass),
            psi,
            ratio: best,
        }
    }
}

/// Draws `config.samples` pairs `(rho, psi)`, evaluates `B / A` on each and
/// refines the best `config.refine` by coordinate descent.
pub fn bochner_scan(
    rep: &MappingRepresentation,
    pi: &[f64],
    config: &SamplingConfig,
    form: HessianForm,
) -> Result<BochnerReport> {
    check_triple_budget(rep)?;
    let eval = Evaluator { rep, pi, form };
    let results: Vec<Option<BochnerSample>> = (0..config.samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_for(config.seed, Purpose::Bochner, i as u64);
            let rho = sample_density(&mut rng, pi, SAMPLE_FLOOR);
            let psi = sample_potential(&mut rng, pi.len());
            eval.ratio(&rho, &psi)
                .map(|ratio| BochnerSample { rho, psi, ratio })
        })
        .collect();
    let skipped = results.iter().filter(|r| r.is_none()).count();
    let mut kept: Vec<(usize, BochnerSample)> = results
        .into_iter()
        .enumerate()
        .filter_map(|(i, r)| r.map(|s| (i, s)))
        .collect();
    // ties resolve to the lower index, keeping the result order-independent
    kept.sort_by(|a, b| a.1.ratio.total_cmp(&b.1.ratio).then(a.0.cmp(&b.0)));
    let sample_min_ratio = kept.first().map_or(f64::INFINITY, |s| s.1.ratio);
    let refined = config.refine > 0 && pi.len() <= REFINE_MAX_STATES && !kept.is_empty();
    let mut argmin = kept.first().map(|s| s.1.clone());
    if refined {
        let polished: Vec<BochnerSample> = kept
            .iter()
            .take(config.refine)
            .collect::<Vec<_>>()
            .into_par_iter()
            .map(|(_, s)| eval.refine(s))
            .collect();
        for s in polished {
            if argmin.as_ref().is_none_or(|a| s.ratio < a.ratio) {
                argmin = Some(s);
            }
        }
    }
    Ok(BochnerReport {
        seed: config.seed,
        samples: config.samples,
        skipped,
        sample_min_ratio,
        min_ratio: argmin.as_ref().map_or(f64::INFINITY, |s| s.ratio),
        refined,
        argmin,
    })
}
