use std::fs;

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};

use curvlab::cayley::cayley_epsilon;
use curvlab::chain::validate_chain;
use curvlab::chain::ValidationReport;
use curvlab::criteria::{epsilon_corollary, lambda_criterion, split_lambda_criterion};
use curvlab::mapping::{commutativity_report, CommutativityReport};
use curvlab::models::{ising_threshold, EpsilonFamily, Model, ModelDetails, ModelSpec};
use curvlab::verify::{
    spectral_gap, spectrum, verify, HessianForm, SamplingConfig, VerificationReport, DENSE_LIMIT,
};
use curvlab::{CurvatureCertificate, MappingRepresentation};

use crate::args::{BoundArgs, Common, ScanArgs, VerifyArgs};

/// How a successful run ended, mapped to the process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Ok,
    NoCertificate,
    VerificationFailed,
}

impl Outcome {
    pub fn code(self) -> u8 {
        match self {
            Outcome::Ok => 0,
            Outcome::NoCertificate => 2,
            Outcome::VerificationFailed => 3,
        }
    }
}

pub fn load_spec(common: &Common) -> anyhow::Result<ModelSpec> {
    let text = match (&common.model, &common.inline) {
        (Some(path), None) => {
            fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?
        }
        (None, Some(text)) => text.clone(),
        _ => bail!("give exactly one of --model and --inline"),
    };
    Ok(ModelSpec::from_json(&text)?)
}

fn build(spec: &ModelSpec) -> anyhow::Result<Model> {
    spec.build().context("building the model")
}

pub fn model_type(spec: &ModelSpec) -> String {
    serde_json::to_value(spec)
        .ok()
        .and_then(|v| v.get("type").and_then(|t| t.as_str()).map(str::to_owned))
        .unwrap_or_default()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidateOutput {
    pub model: ModelSpec,
    pub states: usize,
    pub moves: usize,
    pub chain: ValidationReport,
    pub mapping: CommutativityReport,
}

pub fn validate(common: &Common) -> anyhow::Result<(ValidateOutput, Outcome)> {
    let spec = load_spec(common)?;
    let model = build(&spec)?;
    let chain = validate_chain(&model.chain);
    if !chain.passed() {
        bail!("chain fails validation: {:?}", chain.failures);
    }
    let out = ValidateOutput {
        states: model.chain.len(),
        moves: model.rep.n_moves(),
        mapping: commutativity_report(&model.rep),
        chain,
        model: spec,
    };
    Ok((out, Outcome::Ok))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Skipped {
    pub criterion: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundOutput {
    pub model: ModelSpec,
    pub states: usize,
    pub moves: usize,
    pub certificates: Vec<CurvatureCertificate>,
    /// Criteria that apply to the model but could not be evaluated.
    pub skipped: Vec<Skipped>,
    /// Index into `certificates` of the largest valid bound.
    pub best: Option<usize>,
    /// Family-specific constants such as the Ising epsilon or the hard-core
    /// blocking parameters.
    pub details: serde_json::Value,
}

impl BoundOutput {
    pub fn best_certificate(&self) -> Option<&CurvatureCertificate> {
        self.best.map(|i| &self.certificates[i])
    }
}

fn move_index(rep: &MappingRepresentation, token: &str) -> anyhow::Result<usize> {
    let token = token.trim();
    if let Some(i) = rep.moves().iter().position(|m| m.name() == Some(token)) {
        return Ok(i);
    }
    token
        .parse()
        .with_context(|| format!("{token:?} is neither a move name nor a move index"))
}

/// Parses `H1=a,b,...,H2=c,d,...`.
pub fn parse_split(
    rep: &MappingRepresentation,
    text: &str,
) -> anyhow::Result<(Vec<usize>, Vec<usize>)> {
    let rest = text
        .trim()
        .strip_prefix("H1=")
        .context("split must start with H1=")?;
    let (h1, h2) = rest.split_once(",H2=").context("split must contain ,H2=")?;
    let list = |s: &str| -> anyhow::Result<Vec<usize>> {
        s.split(',')
            .filter(|t| !t.trim().is_empty())
            .map(|t| move_index(rep, t))
            .collect()
    };
    Ok((list(h1)?, list(h2)?))
}

fn details(model: &Model) -> serde_json::Value {
    let value = match &model.details {
        ModelDetails::Generic => return serde_json::Value::Null,
        ModelDetails::Ising(d) => serde_json::to_value(d),
        ModelDetails::HardCore(d) => serde_json::to_value(d),
        ModelDetails::Cayley { cycles, .. } => serde_json::to_value(cycles),
    };
    value.unwrap_or(serde_json::Value::Null)
}

fn run_criteria(
    model: &Model,
    spec: ModelSpec,
    split: Option<&str>,
) -> anyhow::Result<BoundOutput> {
    let (rep, pi) = (&model.rep, model.chain.pi());
    let mut certificates = Vec::new();
    let mut skipped = Vec::new();
    let mut record = |name: &str, result: curvlab::Result<CurvatureCertificate>| match result {
        Ok(c) => certificates.push(c),
        Err(e) => skipped.push(Skipped {
            criterion: name.into(),
            reason: e.to_string(),
        }),
    };

    record("lambda", lambda_criterion(rep, pi));
    let split = match (split, &model.details) {
        (Some(text), _) => Some(parse_split(rep, text)?),
        // creations against annihilations is the natural split for gases
        (None, ModelDetails::HardCore(d)) => Some((d.creations.clone(), d.annihilations.clone())),
        _ => None,
    };
    if let Some((h1, h2)) = split {
        record("split_lambda", split_lambda_criterion(rep, pi, &h1, &h2));
    }
    if rep.all_involutive() {
        record("epsilon_corollary", epsilon_corollary(rep, pi));
    }
    if let ModelDetails::Cayley { walk, .. } = &model.details {
        record("cayley_epsilon", cayley_epsilon(walk));
    }

    let best = certificates
        .iter()
        .enumerate()
        .filter_map(|(i, c)| c.bound.filter(|_| c.valid).map(|b| (i, b)))
        .fold(None, |acc: Option<(usize, f64)>, (i, b)| match acc {
            Some((_, best)) if best >= b => acc,
            _ => Some((i, b)),
        })
        .map(|(i, _)| i);
    Ok(BoundOutput {
        states: model.chain.len(),
        moves: rep.n_moves(),
        certificates,
        skipped,
        best,
        details: details(model),
        model: spec,
    })
}

pub fn bound(args: &BoundArgs) -> anyhow::Result<(BoundOutput, Outcome)> {
    let spec = load_spec(&args.common)?;
    let model = build(&spec)?;
    let out = run_criteria(&model, spec, args.split.as_deref())?;
    let outcome = if out.best.is_some() {
        Outcome::Ok
    } else {
        Outcome::NoCertificate
    };
    Ok((out, outcome))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    /// `point` for grid rows, `root` for the crossing `epsilon = 1`.
    pub kind: String,
    /// Which epsilon the root belongs to; empty on grid rows.
    pub family: String,
    pub beta: f64,
    /// Exact epsilon of the couplings at `beta` (or the family's epsilon at
    /// its root).
    pub epsilon: Option<f64>,
    /// Closed form stated for the named family, if any.
    pub epsilon_stated: Option<f64>,
    pub lambda: Option<f64>,
    /// `(1 - epsilon) 2 c_*` when `epsilon <= 1`.
    pub bound: Option<f64>,
}

pub const SCAN_COLUMNS: [&str; 7] = [
    "kind",
    "family",
    "beta",
    "epsilon",
    "epsilon_stated",
    "lambda",
    "bound",
];

fn family_name(f: &EpsilonFamily) -> &'static str {
    match f {
        EpsilonFamily::Lattice { .. } => "lattice",
        EpsilonFamily::CurieWeiss { .. } => "curie_weiss",
        EpsilonFamily::CurieWeissLimit => "curie_weiss_limit",
        EpsilonFamily::Exact { .. } => "exact",
    }
}

pub fn beta_grid(min: f64, max: f64, steps: usize, log_spaced: bool) -> anyhow::Result<Vec<f64>> {
    if !(min.is_finite() && max.is_finite() && min >= 0.0 && min < max) {
        bail!("need 0 <= beta-min < beta-max, got {min} and {max}");
    }
    if steps < 2 {
        bail!("beta-steps must be at least 2");
    }
    if log_spaced && min <= 0.0 {
        bail!("a log-spaced grid needs beta-min > 0");
    }
    let last = (steps - 1) as f64;
    Ok((0..steps)
        .map(|i| {
            let t = i as f64 / last;
            if i + 1 == steps {
                max
            } else if log_spaced {
                min * (max / min).powf(t)
            } else {
                min + (max - min) * t
            }
        })
        .collect())
}

pub fn scan(args: &ScanArgs) -> anyhow::Result<(Vec<ScanRow>, Outcome)> {
    let spec = load_spec(&args.common)?;
    if spec.beta().is_none() {
        bail!(
            "scan needs a model with an inverse temperature (ising, curie_weiss or lattice_ising)"
        );
    }
    let grid = beta_grid(
        args.beta_min,
        args.beta_max,
        args.beta_steps,
        args.log_spaced,
    )?;
    let ising = spec.ising_spec()?;
    let stated = spec.stated_family();

    let mut rows = Vec::with_capacity(grid.len() + 3);
    for &beta in &grid {
        let at = ising.with_beta(beta)?;
        // lambda needs the full chain, which may be over the state cap
        let lambda = spec
            .with_beta(beta)
            .and_then(|s| s.build())
            .and_then(|m| lambda_criterion(&m.rep, m.chain.pi()))
            .ok()
            .and_then(|c| c.intermediates.lambda);
        rows.push(ScanRow {
            kind: "point".into(),
            family: String::new(),
            beta,
            epsilon: Some(at.epsilon()),
            epsilon_stated: stated.as_ref().map(|f| f.epsilon(beta)),
            lambda,
            bound: at.theorem_bound(),
        });
    }

    let mut families = vec![EpsilonFamily::Exact { spec: ising }];
    families.extend(stated.clone());
    if matches!(stated, Some(EpsilonFamily::CurieWeiss { .. })) {
        families.push(EpsilonFamily::CurieWeissLimit);
    }
    for family in &families {
        let Ok(root) = ising_threshold(family) else {
            continue;
        };
        if root.beta < args.beta_min || root.beta > args.beta_max {
            continue;
        }
        rows.push(ScanRow {
            kind: "root".into(),
            family: family_name(family).into(),
            beta: root.beta,
            epsilon: Some(root.epsilon),
            epsilon_stated: None,
            lambda: None,
            bound: None,
        });
    }
    Ok((rows, Outcome::Ok))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyOutput {
    pub model: ModelSpec,
    /// The certificate whose bound was checked, if any criterion succeeded.
    pub certificate: Option<CurvatureCertificate>,
    pub report: VerificationReport,
}

pub fn verify_cmd(args: &VerifyArgs) -> anyhow::Result<(VerifyOutput, Outcome)> {
    let spec = load_spec(&args.bound.common)?;
    let model = build(&spec)?;
    let bounds = run_criteria(&model, spec.clone(), args.bound.split.as_deref())?;
    let certificate = bounds.best_certificate().cloned();
    let mut kappa = certificate.as_ref().and_then(|c| c.bound).unwrap_or(0.0);
    if let Some(factor) = args.inflate_bound {
        kappa *= factor;
    }
    let config = SamplingConfig {
        samples: args.samples,
        seed: args.seed,
        refine: args.refine,
    };
    let form = if args.oracle_b {
        HessianForm::Triple
    } else {
        HessianForm::Fast
    };
    let report = verify(&model.chain, &model.rep, kappa, &config, form)?;
    // without a certificate there is no claim to falsify
    let outcome = match (&certificate, report.passed) {
        (None, _) => Outcome::NoCertificate,
        (Some(_), false) => Outcome::VerificationFailed,
        (Some(_), true) => Outcome::Ok,
    };
    Ok((
        VerifyOutput {
            model: spec,
            certificate,
            report,
        },
        outcome,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumOutput {
    pub states: usize,
    pub gap: f64,
    /// All eigenvalues of `-L` in increasing order; empty above the dense
    /// solver's limit.
    pub eigenvalues: Vec<f64>,
}

pub fn spectrum_cmd(common: &Common) -> anyhow::Result<(SpectrumOutput, Outcome)> {
    let spec = load_spec(common)?;
    let model = build(&spec)?;
    let eigenvalues = if model.chain.len() <= DENSE_LIMIT {
        spectrum(&model.chain)
    } else {
        Vec::new()
    };
    let gap = match eigenvalues.get(1) {
        Some(&g) => g.max(0.0),
        None => spectral_gap(&model.chain),
    };
    let out = SpectrumOutput {
        states: model.chain.len(),
        gap,
        eigenvalues,
    };
    Ok((out, Outcome::Ok))
}
