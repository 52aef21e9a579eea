//! Independent numerical checks of a curvature bound `kappa`.
//!
//! A bound `Ric >= kappa` implies `B >= kappa A` everywhere, a spectral gap
//! of at least `kappa`, the modified log-Sobolev inequality with constant
//! `kappa` and convex entropy decay with rate `kappa`. Each is sampled or
//! computed here and compared with `kappa`.

mod bochner;
mod functional;
mod sampling;
mod spectral;

pub use bochner::{
    bochner_scan, BochnerReport, BochnerSample, HessianForm, ACTION_FLOOR, REFINE_FLOOR,
    REFINE_ITERATIONS, REFINE_MAX_STATES, REFINE_STEP,
};
pub use functional::{ced_check, mlsi_scan, ScanSummary, ENTROPY_FLOOR};
pub use sampling::{SamplingConfig, SAMPLE_FLOOR};
pub use spectral::{spectral_gap, spectrum, DENSE_LIMIT, LANCZOS_TOL};

use serde::{Deserialize, Serialize};

use crate::chain::MarkovChain;
use crate::error::Result;
use crate::mapping::MappingRepresentation;

/// Allowed shortfall of each check below the certified bound.
pub const VERIFY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub required: f64,
    /// `value - required`.
    pub slack: f64,
    pub passed: bool,
}

impl Check {
    fn new(name: &str, value: f64, required: f64) -> Self {
        let slack = value - required;
        Self {
            name: name.into(),
            value,
            required,
            slack,
            passed: slack >= -VERIFY_TOL,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub seed: u64,
    pub samples: usize,
    /// The bound being checked; 0 when no certificate was supplied.
    pub kappa: f64,
    pub bochner: BochnerReport,
    pub spectral_gap: f64,
    pub mlsi: ScanSummary,
    pub ced: ScanSummary,
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl VerificationReport {
    pub fn min_ratio(&self) -> f64 {
        self.bochner.min_ratio
    }

    pub fn mlsi_min_ratio(&self) -> f64 {
        self.mlsi.min
    }

    pub fn ced_min_gap(&self) -> f64 {
        self.ced.min
    }
}

/// Runs every check against `kappa`.
pub fn verify(
    chain: &MarkovChain,
    rep: &MappingRepresentation,
    kappa: f64,
    config: &SamplingConfig,
    form: HessianForm,
) -> Result<VerificationReport> {
    let bochner = bochner_scan(rep, chain.pi(), config, form)?;
    let gap = spectral_gap(chain);
    let mlsi = mlsi_scan(chain, config);
    let ced = ced_check(chain, kappa, config);
    let checks = vec![
        Check::new("bochner", bochner.min_ratio, kappa),
        Check::new("spectral_gap", gap, kappa),
        Check::new("mlsi", mlsi.min, kappa),
        Check::new("ced", ced.min, 0.0),
    ];
    let passed = checks.iter().all(|c| c.passed);
    Ok(VerificationReport {
        seed: config.seed,
        samples: config.samples,
        kappa,
        bochner,
        spectral_gap: gap,
        mlsi,
        ced,
        checks,
        passed,
    })
}
