//! Perturbative curvature certificates.
//!
//! Every criterion returns a [`CurvatureCertificate`] carrying the
//! intermediate quantities it computed. A certificate is `valid` when the
//! criterion's hypotheses hold; only then does it carry a `bound`.

use serde::{Deserialize, Serialize};

use crate::calculus::{b_scalar, Density, Potential};
use crate::error::{Error, Result};
use crate::mapping::{commutativity_report, MappingRepresentation};
use crate::numeric::{self, CompensatedSum};

/// Upper limit on `|X| |G|^2` for the exhaustive triple loops.
pub const TRIPLE_BUDGET: usize = 100_000_000;

/// Upper limit on the number of entries of a dense `R` table.
pub const R_TABLE_BUDGET: usize = 20_000_000;

pub(crate) fn check_triple_budget(rep: &MappingRepresentation) -> Result<()> {
    let g = rep.n_moves();
    let work = rep.n_states().saturating_mul(g).saturating_mul(g);
    if work > TRIPLE_BUDGET {
        return Err(Error::Budget(format!(
            "|X| |G|^2 = {work} exceeds {TRIPLE_BUDGET}"
        )));
    }
    Ok(())
}

/// Which criterion produced a certificate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    Lambda,
    SplitLambda,
    EpsilonCorollary,
    CayleyEpsilon,
    CayleyInvolutive,
    GammaNumeric,
}

impl Criterion {
    pub fn name(self) -> &'static str {
        match self {
            Criterion::Lambda => "lambda",
            Criterion::SplitLambda => "split_lambda",
            Criterion::EpsilonCorollary => "epsilon_corollary",
            Criterion::CayleyEpsilon => "cayley_epsilon",
            Criterion::CayleyInvolutive => "cayley_involutive",
            Criterion::GammaNumeric => "gamma_numeric",
        }
    }
}

/// Named intermediate quantities. Fields a criterion does not use stay `None`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Intermediates {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon_prime: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_star: Option<f64>,
}

impl Intermediates {
    /// `(name, value)` pairs of the fields that are set, in a fixed order.
    pub fn entries(&self) -> Vec<(&'static str, f64)> {
        let fields = [
            ("lambda", self.lambda),
            ("lambda1", self.lambda1),
            ("lambda2", self.lambda2),
            ("n", self.n.map(|n| n as f64)),
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("epsilon", self.epsilon),
            ("alpha1", self.alpha1),
            ("alpha2", self.alpha2),
            ("epsilon_prime", self.epsilon_prime),
            ("c_star", self.c_star),
        ];
        fields
            .into_iter()
            .filter_map(|(k, v)| v.map(|v| (k, v)))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvatureCertificate {
    pub criterion: Criterion,
    pub intermediates: Intermediates,
    /// Certified lower bound on the curvature; present iff `valid`.
    pub bound: Option<f64>,
    pub valid: bool,
    /// Why the certificate is invalid, when it is.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

impl CurvatureCertificate {
    fn new(criterion: Criterion, intermediates: Intermediates, bound: f64) -> Self {
        Self {
            criterion,
            intermediates,
            bound: Some(bound),
            valid: true,
            reason: None,
        }
    }

    fn invalid(
        criterion: Criterion,
        intermediates: Intermediates,
        reason: impl Into<String>,
    ) -> Self {
        Self {
            criterion,
            intermediates,
            bound: None,
            valid: false,
            reason: Some(reason.into()),
        }
    }
}

/// The products `q(x, delta, eta) = c(x, delta) c(x, eta) pi(x)` and their
/// four-point minima, evaluated on demand.
#[derive(Debug, Clone, Copy)]
pub struct QTable<'a> {
    rep: &'a MappingRepresentation,
    pi: &'a [f64],
}

pub fn q_table<'a>(rep: &'a MappingRepresentation, pi: &'a [f64]) -> QTable<'a> {
    assert_eq!(pi.len(), rep.n_states());
    QTable { rep, pi }
}

impl<'a> QTable<'a> {
    #[inline]
    pub fn q(&self, x: usize, delta: usize, eta: usize) -> f64 {
        self.rep.rate(x, delta) * self.rep.rate(x, eta) * self.pi[x]
    }

    #[inline]
    fn q_at(&self, x: Option<usize>, delta: usize, eta: usize) -> f64 {
        x.map_or(0.0, |x| self.q(x, delta, eta))
    }

    /// `min{q(x,d,e), q(dx,d^-1,e), q(ex,d,e^-1), q(dex,d^-1,e^-1)}` for
    /// `e` outside `{d, d^-1}`.
    pub fn qstar(&self, x: usize, delta: usize, eta: usize) -> Result<f64> {
        let rep = self.rep;
        let (di, ei) = (rep.inverse(delta), rep.inverse(eta));
        if eta == delta || eta == di {
            return Err(Error::UndefinedQStar { delta, eta });
        }
        let dx = rep.step(x, delta);
        let ex = rep.step(x, eta);
        let dex = rep.step_from(ex, delta);
        Ok(self
            .q(x, delta, eta)
            .min(self.q_at(dx, di, eta))
            .min(self.q_at(ex, delta, ei))
            .min(self.q_at(dex, di, ei)))
    }

    pub fn rep(&self) -> &'a MappingRepresentation {
        self.rep
    }

    pub fn pi(&self) -> &'a [f64] {
        self.pi
    }
}

fn c_star(rep: &MappingRepresentation) -> Result<f64> {
    rep.min_positive_rate()
        .ok_or_else(|| Error::InvalidMapping("all rates are zero".into()))
}

/// The bracket of the lambda criterion at `(x, delta)`, which must have
/// `c(x, delta) > 0`.
fn lambda_summand(qt: &QTable, x: usize, delta: usize) -> f64 {
    let rep = qt.rep;
    let c = rep.rate(x, delta);
    let dx = rep.step(x, delta).expect("positive rate stays inside");
    let di = rep.inverse(delta);
    let mut value = c;
    if di != delta {
        value -= rep.rate(dx, delta);
    }
    let norm = c * qt.pi[x];
    let mut excess = CompensatedSum::new();
    for eta in 0..rep.n_moves() {
        if eta == delta || eta == di {
            continue;
        }
        let q = qt.q(dx, di, eta);
        if q == 0.0 {
            continue;
        }
        let qs = qt
            .qstar(dx, di, eta)
            .expect("eta outside {delta, delta^-1}");
        excess.add((q - qs) / norm);
    }
    value - excess.value()
}

fn lambda_over(qt: &QTable, moves: &[usize]) -> f64 {
    let rep = qt.rep;
    let mut lambda = f64::INFINITY;
    for x in 0..rep.n_states() {
        for &d in moves {
            if rep.rate(x, d) > 0.0 {
                lambda = lambda.min(lambda_summand(qt, x, d));
            }
        }
    }
    lambda
}

/// Fails with [`Error::NotCommutative`] unless the moves commute wherever
/// both orders of a two-step path carry positive rates.
pub fn require_commutative(rep: &MappingRepresentation) -> Result<()> {
    let report = commutativity_report(rep);
    match report.support_witnesses.first() {
        Some(&(x, delta, eta)) => Err(Error::NotCommutative { x, delta, eta }),
        None => Ok(()),
    }
}

/// The lambda criterion. `lambda` is reported even when it is negative or
/// the representation is not commutative; the certificate is then invalid.
pub fn lambda_criterion(rep: &MappingRepresentation, pi: &[f64]) -> Result<CurvatureCertificate> {
    check_triple_budget(rep)?;
    let qt = q_table(rep, pi);
    let all: Vec<usize> = (0..rep.n_moves()).collect();
    let lambda = lambda_over(&qt, &all);
    let im = Intermediates {
        lambda: Some(lambda),
        c_star: Some(c_star(rep)?),
        ..Default::default()
    };
    if let Err(e) = require_commutative(rep) {
        return Ok(CurvatureCertificate::invalid(
            Criterion::Lambda,
            im,
            e.to_string(),
        ));
    }
    if lambda < 0.0 {
        return Ok(CurvatureCertificate::invalid(
            Criterion::Lambda,
            im,
            format!("lambda = {lambda} is negative"),
        ));
    }
    Ok(CurvatureCertificate::new(
        Criterion::Lambda,
        im,
        2.0 * lambda,
    ))
}

fn check_split(rep: &MappingRepresentation, h1: &[usize], h2: &[usize]) -> Result<()> {
    let g = rep.n_moves();
    for (name, h) in [("H1", h1), ("H2", h2)] {
        if let Some(d) = h.iter().find(|&&d| d >= g) {
            return Err(Error::BadSplit(format!("{name} names unknown move {d}")));
        }
        let mut covered = vec![false; g];
        for &d in h {
            covered[d] = true;
            covered[rep.inverse(d)] = true;
        }
        if let Some(d) = covered.iter().position(|c| !c) {
            return Err(Error::BadSplit(format!(
                "{name} together with its inverses misses move {d}"
            )));
        }
    }
    if let Some(d) = h1.iter().find(|d| h2.contains(d)) {
        return Err(Error::BadSplit(format!("move {d} is in both H1 and H2")));
    }
    Ok(())
}

/// The split form of the lambda criterion with bound `(lambda1 + lambda2) / 2`.
pub fn split_lambda_criterion(
    rep: &MappingRepresentation,
    pi: &[f64],
    h1: &[usize],
    h2: &[usize],
) -> Result<CurvatureCertificate> {
    check_split(rep, h1, h2)?;
    check_triple_budget(rep)?;
    let qt = q_table(rep, pi);
    let lambda1 = lambda_over(&qt, h1);
    let lambda2 = lambda_over(&qt, h2);
    let im = Intermediates {
        lambda1: Some(lambda1),
        lambda2: Some(lambda2),
        c_star: Some(c_star(rep)?),
        ..Default::default()
    };
    if let Err(e) = require_commutative(rep) {
        return Ok(CurvatureCertificate::invalid(
            Criterion::SplitLambda,
            im,
            e.to_string(),
        ));
    }
    if lambda1 < 0.0 || lambda2 < 0.0 {
        return Ok(CurvatureCertificate::invalid(
            Criterion::SplitLambda,
            im,
            format!("lambda1 = {lambda1}, lambda2 = {lambda2}: both must be nonnegative"),
        ));
    }
    Ok(CurvatureCertificate::new(
        Criterion::SplitLambda,
        im,
        0.5 * (lambda1 + lambda2),
    ))
}

/// `max c(x, eta) / c(x, delta)` over `c(x, delta) > 0`.
pub(crate) fn rate_ratio_beta(rep: &MappingRepresentation) -> f64 {
    let mut beta: f64 = 0.0;
    for x in 0..rep.n_states() {
        let rates = rep.rates_at(x);
        let lo = rates
            .iter()
            .copied()
            .filter(|&c| c > 0.0)
            .fold(f64::INFINITY, f64::min);
        let hi = rates.iter().copied().fold(0.0, f64::max);
        if lo.is_finite() {
            beta = beta.max(hi / lo);
        }
    }
    beta
}

/// The epsilon corollary for involutive commutative representations:
/// `epsilon = beta N (e^(2 alpha) - 1)` and bound `(1 - epsilon) 2 c_*`.
pub fn epsilon_corollary(rep: &MappingRepresentation, pi: &[f64]) -> Result<CurvatureCertificate> {
    let _ = pi;
    let g = rep.n_moves();
    if let Some(d) = (0..g).find(|&d| !rep.is_involutive(d)) {
        return Err(Error::NotInvolutive(d));
    }
    check_triple_budget(rep)?;
    let mut inhomogeneous = vec![false; g * g];
    let mut alpha = f64::NEG_INFINITY;
    for x in 0..rep.n_states() {
        for d in 0..g {
            let dx = rep.step(x, d);
            for e in 0..g {
                let (cx, cdx) = (rep.rate(x, e), rep.rate_at(dx, e));
                if cdx != cx {
                    inhomogeneous[d.min(e) * g + d.max(e)] = true;
                }
                if cx > 0.0 {
                    alpha = alpha.max((cdx / cx).ln());
                }
            }
        }
    }
    let n = (0..g)
        .flat_map(|d| (d + 1..g).map(move |e| (d, e)))
        .filter(|&(d, e)| inhomogeneous[d * g + e])
        .count() as u64;
    let beta = rate_ratio_beta(rep);
    let epsilon = if n == 0 {
        0.0
    } else {
        beta * n as f64 * (2.0 * alpha).exp_m1()
    };
    let c_star = c_star(rep)?;
    let im = Intermediates {
        n: Some(n),
        alpha: Some(alpha),
        beta: Some(beta),
        epsilon: Some(epsilon),
        c_star: Some(c_star),
        ..Default::default()
    };
    if let Err(e) = require_commutative(rep) {
        return Ok(CurvatureCertificate::invalid(
            Criterion::EpsilonCorollary,
            im,
            e.to_string(),
        ));
    }
    if epsilon > 1.0 {
        return Ok(CurvatureCertificate::invalid(
            Criterion::EpsilonCorollary,
            im,
            format!("epsilon = {epsilon} exceeds 1"),
        ));
    }
    Ok(CurvatureCertificate::new(
        Criterion::EpsilonCorollary,
        im,
        (1.0 - epsilon) * 2.0 * c_star,
    ))
}

/// A nonnegative table `R(x, delta, eta)` satisfying the admissibility
/// clauses, checked on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmissibleR {
    n_moves: usize,
    values: Vec<f64>,
}

/// Relative tolerance for the symmetry clauses of admissibility.
pub const ADMISSIBILITY_RTOL: f64 = 1e-12;

impl AdmissibleR {
    /// Validates `values`, laid out as `values[(x * g + delta) * g + eta]`.
    ///
    /// Besides the three admissibility clauses, `R` must vanish wherever
    /// `c(x, delta) c(x, eta) = 0`; such entries never enter the Hessian
    /// and a positive value there could only be meaningless.
    pub fn new(rep: &MappingRepresentation, values: Vec<f64>) -> Result<Self> {
        let g = rep.n_moves();
        let expected = rep.n_states() * g * g;
        if values.len() != expected {
            return Err(Error::InvalidMapping(format!(
                "R table has {} entries, expected {expected}",
                values.len()
            )));
        }
        let at = |x: usize, d: usize, e: usize| values[(x * g + d) * g + e];
        let close = |a: f64, b: f64| numeric::close(a, b, ADMISSIBILITY_RTOL, 0.0);
        for x in 0..rep.n_states() {
            for d in 0..g {
                for e in 0..g {
                    let r = at(x, d, e);
                    if !r.is_finite() || r < 0.0 {
                        return Err(Error::InadmissibleR {
                            clause: "nonnegative",
                            x,
                            delta: d,
                            eta: e,
                        });
                    }
                    let active = rep.rate(x, d) * rep.rate(x, e) > 0.0;
                    if !active {
                        if r > 0.0 {
                            return Err(Error::InadmissibleR {
                                clause: "support",
                                x,
                                delta: d,
                                eta: e,
                            });
                        }
                        continue;
                    }
                    if r > 0.0 {
                        let de = rep.step_from(rep.step(x, e), d);
                        let ed = rep.step_from(rep.step(x, d), e);
                        if de != ed {
                            return Err(Error::InadmissibleR {
                                clause: "i",
                                x,
                                delta: d,
                                eta: e,
                            });
                        }
                    }
                    if !close(r, at(x, e, d)) {
                        return Err(Error::InadmissibleR {
                            clause: "ii",
                            x,
                            delta: d,
                            eta: e,
                        });
                    }
                    let dx = rep.step(x, d).expect("positive rate stays inside");
                    if !close(r, at(dx, rep.inverse(d), e)) {
                        return Err(Error::InadmissibleR {
                            clause: "iii",
                            x,
                            delta: d,
                            eta: e,
                        });
                    }
                }
            }
        }
        Ok(Self { n_moves: g, values })
    }

    /// The zero table.
    pub fn zero(rep: &MappingRepresentation) -> Self {
        Self {
            n_moves: rep.n_moves(),
            values: vec![0.0; rep.n_states() * rep.n_moves() * rep.n_moves()],
        }
    }

    #[inline]
    pub fn get(&self, x: usize, delta: usize, eta: usize) -> f64 {
        self.values[(x * self.n_moves + delta) * self.n_moves + eta]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// The admissible function used in the proof of the lambda criterion:
/// `q*` off the diagonal (restricted to commuting moves), `q` on inverse
/// pairs, `c(dx,d) c(dx,d^-1) pi(dx)` on the diagonal of non-involutive
/// moves and zero on the diagonal of involutive ones.
pub fn q_star_r(rep: &MappingRepresentation, pi: &[f64]) -> Result<AdmissibleR> {
    let g = rep.n_moves();
    let n = rep.n_states();
    if n.saturating_mul(g).saturating_mul(g) > R_TABLE_BUDGET {
        return Err(Error::Budget(format!(
            "R table would hold {} entries",
            n * g * g
        )));
    }
    for x in 0..n {
        for d in (0..g).filter(|&d| !rep.is_involutive(d)) {
            if let Some(dx) = rep.step(x, d) {
                if rep.rate(x, d) > 0.0 && rep.rate(dx, d) > rep.rate(x, d) {
                    return Err(Error::HypothesisFailed(format!(
                        "c(delta x, delta) = {} > c(x, delta) = {} at x={x}, delta={d}",
                        rep.rate(dx, d),
                        rep.rate(x, d)
                    )));
                }
            }
        }
    }
    let qt = q_table(rep, pi);
    let mut values = vec![0.0; n * g * g];
    for x in 0..n {
        for d in 0..g {
            if rep.rate(x, d) == 0.0 {
                continue;
            }
            let di = rep.inverse(d);
            let dx = rep.step(x, d).expect("positive rate stays inside");
            for e in 0..g {
                if rep.rate(x, e) == 0.0 {
                    continue;
                }
                let r = if e == d {
                    if di == d {
                        0.0
                    } else {
                        rep.rate(dx, d) * rep.rate(dx, di) * pi[dx]
                    }
                } else if e == di {
                    qt.q(x, d, e)
                } else {
                    let de = rep.step_from(rep.step(x, e), d);
                    let ed = rep.step(dx, e);
                    if de == ed {
                        qt.qstar(x, d, e)?
                    } else {
                        0.0
                    }
                };
                values[(x * g + d) * g + e] = r;
            }
        }
    }
    AdmissibleR::new(rep, values)
}

/// `sum Gamma(x,d,e) B(x,d,e)` with `Gamma = q - R`, a lower bound on the
/// Hessian `B(rho, psi)`.
pub fn gamma_lower_bound(
    rep: &MappingRepresentation,
    pi: &[f64],
    r: &AdmissibleR,
    rho: &Density,
    psi: &Potential,
) -> Result<f64> {
    if !rho.is_strict() {
        return Err(Error::Domain("density must be strictly positive".into()));
    }
    let (rv, pv) = (rho.values(), psi.values());
    let qt = q_table(rep, pi);
    let g = rep.n_moves();
    let mut acc = CompensatedSum::new();
    for x in 0..rep.n_states() {
        for d in 0..g {
            if rep.rate(x, d) == 0.0 {
                continue;
            }
            let dx = rep.step(x, d).expect("positive rate stays inside");
            for e in 0..g {
                if rep.rate(x, e) == 0.0 {
                    continue;
                }
                let ex = rep.step(x, e).expect("positive rate stays inside");
                let gamma = qt.q(x, d, e) - r.get(x, d, e);
                let b = b_scalar(pv[dx] - pv[x], pv[ex] - pv[x], rv[x], rv[dx], rv[ex]);
                acc.add(gamma * b);
            }
        }
    }
    Ok(acc.value())
}

/// Curvature certificate from an admissible `R`:
/// `lambda_R = min [Gamma(x,d,d) - sum_{e != d^-1} Gamma(dx,d^-1,e)] / (c(x,d) pi(x))`
/// over `c(x, d) > 0`, valid when `Gamma >= 0` off the diagonal and
/// `lambda_R >= 0`. With [`q_star_r`] this reproduces the lambda criterion.
pub fn gamma_certificate(
    rep: &MappingRepresentation,
    pi: &[f64],
    r: &AdmissibleR,
) -> Result<CurvatureCertificate> {
    check_triple_budget(rep)?;
    let qt = q_table(rep, pi);
    let g = rep.n_moves();
    let gamma = |x: usize, d: usize, e: usize| qt.q(x, d, e) - r.get(x, d, e);
    let mut negative = None;
    let mut lambda = f64::INFINITY;
    for x in 0..rep.n_states() {
        for d in 0..g {
            for e in (0..g).filter(|&e| e != d) {
                if negative.is_none() && gamma(x, d, e) < 0.0 {
                    negative = Some((x, d, e));
                }
            }
            let c = rep.rate(x, d);
            if c == 0.0 {
                continue;
            }
            let dx = rep.step(x, d).expect("positive rate stays inside");
            let di = rep.inverse(d);
            let mut m = CompensatedSum::new();
            m.add(gamma(x, d, d));
            for e in (0..g).filter(|&e| e != d) {
                m.add(-gamma(dx, di, e));
            }
            lambda = lambda.min(m.value() / (c * pi[x]));
        }
    }
    let im = Intermediates {
        lambda: Some(lambda),
        c_star: Some(c_star(rep)?),
        ..Default::default()
    };
    if let Some((x, d, e)) = negative {
        return Ok(CurvatureCertificate::invalid(
            Criterion::GammaNumeric,
            im,
            format!("Gamma({x},{d},{e}) is negative"),
        ));
    }
    if lambda < 0.0 {
        return Ok(CurvatureCertificate::invalid(
            Criterion::GammaNumeric,
            im,
            format!("lambda = {lambda} is negative"),
        ));
    }
    Ok(CurvatureCertificate::new(
        Criterion::GammaNumeric,
        im,
        2.0 * lambda,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::{action_a, hessian_b, hessian_b_triple};
    use crate::mapping::Move;
    use crate::testing::{
        cycle_walk, hardcore_star, hypercube, ising_chain, random_density, random_potential,
    };
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn homogeneous_product_has_q_equal_qstar() {
        let (chain, rep) = hypercube(3, 0.6);
        let qt = q_table(&rep, chain.pi());
        for x in 0..chain.len() {
            for d in 0..3 {
                for e in (0..3).filter(|&e| e != d) {
                    assert_eq!(qt.q(x, d, e), qt.qstar(x, d, e).unwrap());
                }
                assert_eq!(
                    qt.qstar(x, d, d),
                    Err(Error::UndefinedQStar { delta: d, eta: d })
                );
            }
        }
    }

    #[test]
    fn two_spin_qstar_is_the_four_point_minimum() {
        let spec =
            crate::models::IsingSpec::new(vec![vec![0.0, 0.5], vec![0.5, 0.0]], 0.1).unwrap();
        let model = crate::models::build_ising(&spec).unwrap();
        let (pi, rep) = (model.chain.pi(), &model.rep);
        let qt = q_table(rep, pi);
        for x in 0..4usize {
            // spin flips on bitmasks; (x ^ 1) ^ 2 is the opposite corner
            let pts = [(x, 0, 1), (x ^ 1, 0, 1), (x ^ 2, 0, 1), (x ^ 3, 0, 1)];
            let brute = pts
                .iter()
                .map(|&(y, d, e)| rep.rate(y, d) * rep.rate(y, e) * pi[y])
                .fold(f64::INFINITY, f64::min);
            assert_eq!(qt.qstar(x, 0, 1).unwrap(), brute);
        }
    }

    #[test]
    fn qstar_is_invariant_under_moving_the_base_point() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for (chain, rep) in [ising_chain(4, 0.4, &mut rng), hardcore_star(0.3)] {
            let qt = q_table(&rep, chain.pi());
            let g = rep.n_moves();
            for x in 0..chain.len() {
                for d in 0..g {
                    if rep.rate(x, d) == 0.0 {
                        continue;
                    }
                    let dx = rep.step(x, d).unwrap();
                    for e in (0..g).filter(|&e| e != d && e != rep.inverse(d)) {
                        let a = qt.qstar(x, d, e).unwrap();
                        let b = qt.qstar(dx, rep.inverse(d), e).unwrap();
                        assert_eq!(a, b, "x={x} d={d} e={e}");
                        assert!(a <= qt.q(x, d, e));
                    }
                }
            }
        }
    }

    #[test]
    fn homogeneous_involutive_gives_twice_the_rate() {
        let (chain, rep) = hypercube(3, 0.6);
        let cert = lambda_criterion(&rep, chain.pi()).unwrap();
        assert!(cert.valid);
        assert_eq!(cert.intermediates.lambda, Some(0.6));
        assert_eq!(cert.bound, Some(1.2));
    }

    #[test]
    fn homogeneous_cycle_gives_zero() {
        let (chain, rep) = cycle_walk(5, 0.7);
        let cert = lambda_criterion(&rep, chain.pi()).unwrap();
        assert!(cert.valid);
        assert_eq!(cert.intermediates.lambda, Some(0.0));
        assert_eq!(cert.bound, Some(0.0));
    }

    #[test]
    fn two_spin_lambda_changes_sign() {
        let lambda = |beta: f64| {
            let spec =
                crate::models::IsingSpec::new(vec![vec![0.0, 1.0], vec![1.0, 0.0]], beta).unwrap();
            let m = crate::models::build_ising(&spec).unwrap();
            lambda_criterion(&m.rep, m.chain.pi()).unwrap()
        };
        let small = lambda(0.05);
        assert!(small.valid && small.intermediates.lambda.unwrap() > 0.0);
        let large = lambda(2.0);
        assert!(!large.valid);
        assert!(large.intermediates.lambda.unwrap() < 0.0);
        assert!(large.bound.is_none());
    }

    #[test]
    fn non_commutative_rep_is_invalid_or_an_error_in_strict_mode() {
        let model = crate::models::symmetric_group_walk(3, 2).unwrap();
        let cert = lambda_criterion(&model.rep, model.chain.pi()).unwrap();
        assert!(!cert.valid);
        assert!(matches!(
            require_commutative(&model.rep),
            Err(Error::NotCommutative { .. })
        ));
    }

    #[test]
    fn split_rejects_bad_partitions() {
        let (chain, rep) = hypercube(2, 1.0);
        assert!(matches!(
            split_lambda_criterion(&rep, chain.pi(), &[0, 1], &[0, 1]),
            Err(Error::BadSplit(_))
        ));
        assert!(matches!(
            split_lambda_criterion(&rep, chain.pi(), &[0], &[1]),
            Err(Error::BadSplit(_))
        ));
        let (chain, rep) = cycle_walk(4, 1.0);
        let cert = split_lambda_criterion(&rep, chain.pi(), &[0], &[1]).unwrap();
        assert_eq!(cert.intermediates.lambda1, Some(0.0));
        assert_eq!(cert.intermediates.lambda2, Some(0.0));
    }

    #[test]
    fn split_on_hardcore_star() {
        let (chain, rep) = hardcore_star(0.1);
        let g = rep.n_moves();
        let h1: Vec<usize> = (0..g).step_by(2).collect();
        let h2: Vec<usize> = (1..g).step_by(2).collect();
        let cert = split_lambda_criterion(&rep, chain.pi(), &h1, &h2).unwrap();
        assert!(cert.valid);
        assert!((cert.intermediates.lambda1.unwrap() - 0.1).abs() < 1e-15);
        assert!((cert.intermediates.lambda2.unwrap() - 0.7).abs() < 1e-15);
    }

    #[test]
    fn epsilon_corollary_cases() {
        let (chain, rep) = hypercube(3, 0.5);
        let cert = epsilon_corollary(&rep, chain.pi()).unwrap();
        assert_eq!(cert.intermediates.n, Some(0));
        assert_eq!(cert.intermediates.epsilon, Some(0.0));
        assert_eq!(cert.bound, Some(1.0));

        let (chain, rep) = cycle_walk(5, 1.0);
        assert_eq!(
            epsilon_corollary(&rep, chain.pi()),
            Err(Error::NotInvolutive(0))
        );
    }

    #[test]
    fn perturbed_hypercube_counts_only_affected_pairs() {
        // Flip 0 gets a rate that depends on bit 1, symmetric so pi stays uniform.
        let n = 3;
        let (_, base) = hypercube(n, 1.0);
        let mut rates = base.rate_rows();
        for (x, row) in rates.iter_mut().enumerate() {
            row[0] = if x & 2 != 0 { 1.5 } else { 1.0 };
        }
        let rep = MappingRepresentation::new(1 << n, base.moves().to_vec(), rates).unwrap();
        let pi = vec![1.0 / 8.0; 8];
        let cert = epsilon_corollary(&rep, &pi).unwrap();
        assert_eq!(cert.intermediates.n, Some(1));
        assert!((cert.intermediates.alpha.unwrap() - 1.5f64.ln()).abs() < 1e-15);
        assert_eq!(cert.intermediates.beta, Some(1.5));
    }

    #[test]
    fn corollary_never_beats_the_theorem() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for beta in [0.01, 0.03, 0.05, 0.1] {
            let (chain, rep) = ising_chain(4, beta, &mut rng);
            let thm = lambda_criterion(&rep, chain.pi()).unwrap();
            let cor = epsilon_corollary(&rep, chain.pi()).unwrap();
            if let (Some(b_cor), Some(b_thm)) = (cor.bound, thm.bound) {
                assert!(b_cor <= b_thm + 1e-12);
            }
            if cor.valid {
                assert!(thm.valid);
            }
        }
    }

    #[test]
    fn q_star_r_is_admissible_and_reproduces_lambda() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let spec = crate::models::IsingSpec::random(3, 0.5, 0.05, &mut rng).unwrap();
        let m = crate::models::build_ising(&spec).unwrap();
        for (chain, rep) in [(m.chain, m.rep), hypercube(3, 0.7), cycle_walk(5, 1.0)] {
            let r = q_star_r(&rep, chain.pi()).unwrap();
            let gamma = gamma_certificate(&rep, chain.pi(), &r).unwrap();
            let lambda = lambda_criterion(&rep, chain.pi()).unwrap();
            let (a, b) = (
                gamma.intermediates.lambda.unwrap(),
                lambda.intermediates.lambda.unwrap(),
            );
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
            assert_eq!(gamma.valid, lambda.valid);
        }
    }

    #[test]
    fn q_star_r_on_homogeneous_hypercube() {
        let (chain, rep) = hypercube(2, 1.0);
        let r = q_star_r(&rep, chain.pi()).unwrap();
        let qt = q_table(&rep, chain.pi());
        for x in 0..4 {
            assert_eq!(r.get(x, 0, 1), qt.q(x, 0, 1));
            assert_eq!(r.get(x, 0, 0), 0.0);
        }
    }

    #[test]
    fn q_star_r_restricts_to_commuting_pairs() {
        let model = crate::models::symmetric_group_walk(3, 2).unwrap();
        let rep = &model.rep;
        let r = q_star_r(rep, model.chain.pi()).unwrap();
        for x in 0..rep.n_states() {
            for d in 0..3 {
                for e in 0..3 {
                    if r.get(x, d, e) > 0.0 {
                        let de = rep.step_from(rep.step(x, e), d);
                        let ed = rep.step_from(rep.step(x, d), e);
                        assert_eq!(de, ed);
                    }
                }
            }
        }
    }

    #[test]
    fn q_star_r_checks_its_hypothesis() {
        // a biased cycle walk where the forward rate grows along the move
        let n = 3;
        let forward: Vec<usize> = (0..n).map(|x| (x + 1) % n).collect();
        let backward: Vec<usize> = (0..n).map(|x| (x + n - 1) % n).collect();
        let moves = vec![
            Move::permutation(forward, 1),
            Move::permutation(backward, 0),
        ];
        let rates = vec![vec![1.0, 1.0], vec![2.0, 1.0], vec![1.0, 2.0]];
        let rep = MappingRepresentation::new(n, moves, rates).unwrap();
        let pi = vec![1.0 / 3.0; 3];
        assert!(matches!(
            q_star_r(&rep, &pi),
            Err(Error::HypothesisFailed(_))
        ));
    }

    #[test]
    fn zero_r_recovers_the_hessian() {
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        let (chain, rep) = ising_chain(3, 0.2, &mut rng);
        let r = AdmissibleR::zero(&rep);
        for _ in 0..50 {
            let rho = random_density(&mut rng, chain.pi());
            let psi = random_potential(&mut rng, chain.len());
            let gamma = gamma_lower_bound(&rep, chain.pi(), &r, &rho, &psi).unwrap();
            let b = hessian_b_triple(&rep, chain.pi(), &rho, &psi).unwrap();
            assert!(numeric::rel_diff(gamma, b, 1e-300) < 1e-12);
        }
    }

    #[test]
    fn gamma_bound_stays_below_the_hessian() {
        let mut rng = ChaCha8Rng::seed_from_u64(25);
        let spec = crate::models::IsingSpec::random(3, 0.5, 0.05, &mut rng).unwrap();
        let m = crate::models::build_ising(&spec).unwrap();
        let models = [(m.chain, m.rep), hypercube(3, 1.0), hardcore_star(0.2)];
        for (chain, rep) in models {
            let r = q_star_r(&rep, chain.pi()).unwrap();
            for _ in 0..200 {
                let rho = random_density(&mut rng, chain.pi());
                let psi = random_potential(&mut rng, chain.len());
                let lower = gamma_lower_bound(&rep, chain.pi(), &r, &rho, &psi).unwrap();
                let b = hessian_b(&rep, chain.pi(), &rho, &psi).unwrap();
                let a = action_a(&rep, chain.pi(), &rho, &psi);
                assert!(lower <= b + 1e-10 * a.max(1.0), "{lower} > {b}");
            }
        }
    }

    #[test]
    fn asymmetric_r_is_rejected() {
        let (chain, rep) = hypercube(2, 1.0);
        let mut values = q_star_r(&rep, chain.pi()).unwrap().values().to_vec();
        values[1] *= 0.5; // R(0, 0, 1)
        assert!(matches!(
            AdmissibleR::new(&rep, values),
            Err(Error::InadmissibleR { clause: "ii", .. })
        ));
    }

    #[test]
    fn certificate_json_round_trip() {
        let (chain, rep) = hypercube(2, 1.0);
        let cert = epsilon_corollary(&rep, chain.pi()).unwrap();
        let json = serde_json::to_string(&cert).unwrap();
        let back: CurvatureCertificate = serde_json::from_str(&json).unwrap();
        assert_eq!(back, cert);
    }
}
