//! The logarithmic mean and the quadratic forms of the discrete transport
//! calculus: the action `A(rho, psi)` and the Hessian of the entropy
//! `B(rho, psi)`, both in mapping form.

use crate::chain::MarkovChain;
use crate::error::{Error, Result};
use crate::mapping::MappingRepresentation;
use crate::numeric::{self, CompensatedSum};

/// Tolerance on `sum rho pi == 1`.
pub const DENSITY_NORMALIZATION_TOL: f64 = 1e-12;

/// Relative distance `|s - t| / (s + t)` below which the logarithmic mean
/// and its partials are evaluated from a series in `(s - t) / (s + t)`.
pub const SERIES_THRESHOLD: f64 = 1e-2;

fn check_nonnegative(s: f64, t: f64) -> Result<()> {
    if !(s.is_finite() && t.is_finite()) || s < 0.0 || t < 0.0 {
        return Err(Error::Domain(format!(
            "logarithmic mean needs finite nonnegative arguments, got ({s}, {t})"
        )));
    }
    Ok(())
}

// u / atanh(u) = f(u^2) and its derivative in w = u^2, truncated after w^3.
#[inline]
fn series(w: f64) -> (f64, f64) {
    let f = 1.0 - w / 3.0 - 4.0 * w * w / 45.0 - 44.0 * w * w * w / 945.0;
    let df = -1.0 / 3.0 - 8.0 * w / 45.0 - 44.0 * w * w / 315.0;
    (f, df)
}

/// The logarithmic mean `theta(s, t) = (s - t) / (ln s - ln t)`, with
/// `theta(t, t) = t` and `theta(0, t) = 0`.
pub fn log_mean(s: f64, t: f64) -> Result<f64> {
    check_nonnegative(s, t)?;
    Ok(log_mean_unchecked(s, t))
}

#[inline]
pub(crate) fn log_mean_unchecked(s: f64, t: f64) -> f64 {
    if s == 0.0 || t == 0.0 {
        return 0.0;
    }
    if s == t {
        return s;
    }
    let u = (s - t) / (s + t);
    if u.abs() <= SERIES_THRESHOLD {
        series_value(s, t)
    } else {
        closed(s, t)
    }
}

#[inline]
fn log_ratio(s: f64, t: f64) -> f64 {
    let r = s / t;
    if r.is_finite() && r > 0.0 {
        r.ln()
    } else {
        s.ln() - t.ln()
    }
}

#[inline]
fn closed(s: f64, t: f64) -> f64 {
    // ordered so that theta(s, t) and theta(t, s) round identically
    let (a, b) = if s >= t { (s, t) } else { (t, s) };
    (a - b) / log_ratio(a, b)
}

#[inline]
fn closed_partials(s: f64, t: f64) -> (f64, f64) {
    let theta = closed(s, t);
    (
        theta * (s - theta) / (s * (s - t)),
        theta * (theta - t) / (t * (s - t)),
    )
}

#[inline]
fn series_value(s: f64, t: f64) -> f64 {
    let u = (s - t) / (s + t);
    0.5 * (s + t) * series(u * u).0
}

#[inline]
fn series_partials(s: f64, t: f64) -> (f64, f64) {
    let u = (s - t) / (s + t);
    let (f, df) = series(u * u);
    (0.5 * f + u * (1.0 - u) * df, 0.5 * f - u * (1.0 + u) * df)
}

/// Partial derivatives `(d1, d2)` of the logarithmic mean. Both arguments
/// must be strictly positive.
pub fn log_mean_partials(s: f64, t: f64) -> Result<(f64, f64)> {
    check_nonnegative(s, t)?;
    if s == 0.0 || t == 0.0 {
        return Err(Error::Domain(format!(
            "partials of the logarithmic mean need positive arguments, got ({s}, {t})"
        )));
    }
    Ok(log_mean_partials_unchecked(s, t))
}

#[inline]
pub(crate) fn log_mean_partials_unchecked(s: f64, t: f64) -> (f64, f64) {
    let u = (s - t) / (s + t);
    if u.abs() <= SERIES_THRESHOLD {
        series_partials(s, t)
    } else {
        closed_partials(s, t)
    }
}

/// A probability density with respect to `pi`.
#[derive(Debug, Clone, PartialEq)]
pub struct Density {
    rho: Vec<f64>,
    strict: bool,
}

impl Density {
    /// Accepts `rho` as is; `sum rho pi` must already be 1.
    pub fn new(rho: Vec<f64>, pi: &[f64]) -> Result<Self> {
        if rho.len() != pi.len() {
            return Err(Error::Domain(format!(
                "density has {} entries for {} states",
                rho.len(),
                pi.len()
            )));
        }
        if let Some(v) = rho.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::Domain(format!(
                "density value {v} is not a finite nonnegative number"
            )));
        }
        let mass = numeric::sum(rho.iter().zip(pi).map(|(r, p)| r * p));
        if (mass - 1.0).abs() > DENSITY_NORMALIZATION_TOL {
            return Err(Error::Domain(format!(
                "density has total mass {mass}, expected 1"
            )));
        }
        let strict = rho.iter().all(|&v| v > 0.0);
        Ok(Self { rho, strict })
    }

    /// Rescales nonnegative weights into a density.
    pub fn from_weights(weights: &[f64], pi: &[f64]) -> Result<Self> {
        if weights.len() != pi.len() {
            return Err(Error::Domain("weights and pi differ in length".into()));
        }
        let mass = numeric::sum(weights.iter().zip(pi).map(|(r, p)| r * p));
        if !(mass.is_finite() && mass > 0.0) {
            return Err(Error::Domain(format!("weights have mass {mass}")));
        }
        Self::new(weights.iter().map(|w| w / mass).collect(), pi)
    }

    /// The equilibrium density `rho = 1`.
    pub fn uniform(n: usize) -> Self {
        Self {
            rho: vec![1.0; n],
            strict: true,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.rho
    }

    /// All values strictly positive.
    pub fn is_strict(&self) -> bool {
        self.strict
    }

    fn require_strict(&self) -> Result<()> {
        if self.strict {
            Ok(())
        } else {
            Err(Error::Domain("density must be strictly positive".into()))
        }
    }

    pub fn log(&self) -> Result<Potential> {
        self.require_strict()?;
        Ok(Potential(self.rho.iter().map(|v| v.ln()).collect()))
    }
}

/// A real function on the state space.
#[derive(Debug, Clone, PartialEq)]
pub struct Potential(pub Vec<f64>);

impl Potential {
    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for Potential {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

/// Relative entropy `H(rho) = sum pi rho log rho`, with `0 log 0 = 0`.
pub fn entropy(pi: &[f64], rho: &Density) -> f64 {
    numeric::sum(
        rho.values()
            .iter()
            .zip(pi)
            .filter(|(r, _)| **r > 0.0)
            .map(|(r, p)| p * r * r.ln()),
    )
}

/// Dirichlet form `E(psi, phi) = 1/2 sum (psi(y)-psi(x))(phi(y)-phi(x)) Q(x,y) pi(x)`.
pub fn dirichlet(chain: &MarkovChain, psi: &[f64], phi: &[f64]) -> f64 {
    let pi = chain.pi();
    let mut acc = CompensatedSum::new();
    for x in 0..chain.len() {
        for &(y, q) in chain.row(x) {
            acc.add(0.5 * (psi[y] - psi[x]) * (phi[y] - phi[x]) * q * pi[x]);
        }
    }
    acc.value()
}

/// `(L psi)(x) = sum_delta (psi(delta x) - psi(x)) c(x, delta)`.
pub fn generator_apply(rep: &MappingRepresentation, psi: &Potential) -> Potential {
    Potential(rep.generator_apply(psi.values()))
}

/// Action `A(rho, psi) = 1/2 sum (grad_delta psi)^2 theta(rho(x), rho(delta x)) c pi`.
pub fn action_a(rep: &MappingRepresentation, pi: &[f64], rho: &Density, psi: &Potential) -> f64 {
    action_raw(rep, pi, rho.values(), psi.values())
}

pub(crate) fn action_raw(rep: &MappingRepresentation, pi: &[f64], rho: &[f64], psi: &[f64]) -> f64 {
    let mut acc = CompensatedSum::new();
    for x in 0..rep.n_states() {
        for (d, &c) in rep.rates_at(x).iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let y = rep.step(x, d).expect("positive rate stays inside");
            let grad = psi[y] - psi[x];
            acc.add(0.5 * grad * grad * log_mean_unchecked(rho[x], rho[y]) * c * pi[x]);
        }
    }
    acc.value()
}

/// The summand `B(x, delta, eta)` of the Hessian, without rates:
/// `1/2 (grad_delta psi)^2 d1theta(rho(x), rho(delta x)) grad_eta rho(x)
///  + grad_delta psi grad_eta psi theta(rho(x), rho(delta x))`.
/// Both `delta x` and `eta x` must lie in the state space.
pub fn b_term(
    rep: &MappingRepresentation,
    rho: &Density,
    psi: &Potential,
    x: usize,
    delta: usize,
    eta: usize,
) -> Result<f64> {
    rho.require_strict()?;
    let (dx, ex) = match (rep.step(x, delta), rep.step(x, eta)) {
        (Some(dx), Some(ex)) => (dx, ex),
        _ => {
            return Err(Error::Domain(format!(
                "B({x},{delta},{eta}) involves a point outside the state space"
            )))
        }
    };
    let (rho, psi) = (rho.values(), psi.values());
    Ok(b_scalar(
        psi[dx] - psi[x],
        psi[ex] - psi[x],
        rho[x],
        rho[dx],
        rho[ex],
    ))
}

/// `B` from its scalar ingredients: `a = grad_delta psi(x)`,
/// `b = grad_eta psi(x)`, `s = rho(x)`, `t = rho(delta x)`, `r = rho(eta x)`.
#[inline]
pub(crate) fn b_scalar(a: f64, b: f64, s: f64, t: f64, r: f64) -> f64 {
    let (d1, _) = log_mean_partials_unchecked(s, t);
    0.5 * a * a * d1 * (r - s) + a * b * log_mean_unchecked(s, t)
}

/// The Hessian `B(rho, psi) = sum_{x, delta, eta} B(x, delta, eta) c(x, delta) c(x, eta) pi(x)`,
/// with the `eta` sum carried out first.
pub fn hessian_b(
    rep: &MappingRepresentation,
    pi: &[f64],
    rho: &Density,
    psi: &Potential,
) -> Result<f64> {
    rho.require_strict()?;
    Ok(hessian_raw(rep, pi, rho.values(), psi.values()))
}

pub(crate) fn hessian_raw(
    rep: &MappingRepresentation,
    pi: &[f64],
    rho: &[f64],
    psi: &[f64],
) -> f64 {
    let l_rho = rep.generator_apply(rho);
    let l_psi = rep.generator_apply(psi);
    let mut acc = CompensatedSum::new();
    for x in 0..rep.n_states() {
        for (d, &c) in rep.rates_at(x).iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let y = rep.step(x, d).expect("positive rate stays inside");
            let grad = psi[y] - psi[x];
            let (d1, _) = log_mean_partials_unchecked(rho[x], rho[y]);
            let theta = log_mean_unchecked(rho[x], rho[y]);
            acc.add((0.5 * grad * grad * d1 * l_rho[x] + grad * theta * l_psi[x]) * c * pi[x]);
        }
    }
    acc.value()
}

/// The Hessian as the explicit triple sum of [`b_term`] over all `(x, delta, eta)`.
pub fn hessian_b_triple(
    rep: &MappingRepresentation,
    pi: &[f64],
    rho: &Density,
    psi: &Potential,
) -> Result<f64> {
    rho.require_strict()?;
    let (r, p) = (rho.values(), psi.values());
    let mut acc = CompensatedSum::new();
    for x in 0..rep.n_states() {
        let rates = rep.rates_at(x);
        for (d, &cd) in rates.iter().enumerate().filter(|(_, c)| **c > 0.0) {
            let dx = rep.step(x, d).expect("positive rate stays inside");
            for (e, &ce) in rates.iter().enumerate().filter(|(_, c)| **c > 0.0) {
                let ex = rep.step(x, e).expect("positive rate stays inside");
                let b = b_scalar(p[dx] - p[x], p[ex] - p[x], r[x], r[dx], r[ex]);
                acc.add(b * cd * ce * pi[x]);
            }
        }
    }
    Ok(acc.value())
}

/// The Hessian in its symmetric two-line form
/// `1/4 sum c pi { (grad psi)^2 [d1theta L rho(x) + d2theta L rho(delta x)] -
/// 2 grad psi theta (L psi(delta x) - L psi(x)) }`,
/// with the inner generator sums written out. Slow; used as an oracle.
pub fn hessian_b_two_line(
    rep: &MappingRepresentation,
    pi: &[f64],
    rho: &Density,
    psi: &Potential,
) -> Result<f64> {
    rho.require_strict()?;
    let (r, p) = (rho.values(), psi.values());
    let g = rep.n_moves();
    let mut acc = CompensatedSum::new();
    for x in 0..rep.n_states() {
        for d in 0..g {
            let c = rep.rate(x, d);
            if c == 0.0 {
                continue;
            }
            let y = rep.step(x, d).expect("positive rate stays inside");
            let grad = p[y] - p[x];
            let theta = log_mean_unchecked(r[x], r[y]);
            let (d1, d2) = log_mean_partials_unchecked(r[x], r[y]);
            for e in 0..g {
                let cx = rep.rate(x, e);
                let cy = rep.rate(y, e);
                let (grad_rho_x, grad_psi_x) = match rep.step(x, e) {
                    Some(ex) if cx > 0.0 => ((r[ex] - r[x]) * cx, (p[ex] - p[x]) * cx),
                    _ => (0.0, 0.0),
                };
                let (grad_rho_y, grad_psi_y) = match rep.step(y, e) {
                    Some(ey) if cy > 0.0 => ((r[ey] - r[y]) * cy, (p[ey] - p[y]) * cy),
                    _ => (0.0, 0.0),
                };
                let term = grad * grad * (d1 * grad_rho_x + d2 * grad_rho_y)
                    - 2.0 * grad * theta * (grad_psi_y - grad_psi_x);
                acc.add(0.25 * term * c * pi[x]);
            }
        }
    }
    Ok(acc.value())
}

/// The convex-entropy-decay expression `sum [L rho L log rho + (L rho)^2 / rho] pi`,
/// computed from the chain's rate kernel.
pub fn entropy_decay_expression(chain: &MarkovChain, rho: &Density) -> Result<f64> {
    let log_rho = rho.log()?;
    let l_rho = chain.generator_apply(rho.values());
    let l_log = chain.generator_apply(log_rho.values());
    let r = rho.values();
    Ok(numeric::sum((0..chain.len()).map(|x| {
        (l_rho[x] * l_log[x] + l_rho[x] * l_rho[x] / r[x]) * chain.pi()[x]
    })))
}
