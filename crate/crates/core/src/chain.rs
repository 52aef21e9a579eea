//! Finite reversible Markov chains: state spaces, rate tables and their
//! validation.

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric;

/// Default maximum number of states.
pub const DEFAULT_STATE_CAP: usize = 20_000;

/// Environment variable that overrides [`DEFAULT_STATE_CAP`].
pub const STATE_CAP_ENV: &str = "CURVLAB_STATE_CAP";

/// Relative tolerance for detailed balance checks.
pub const DETAILED_BALANCE_RTOL: f64 = 1e-10;
/// Absolute floor below which detailed balance residuals are ignored.
pub const DETAILED_BALANCE_ATOL: f64 = 1e-14;
/// Tolerance on `sum(pi) == 1`.
pub const PI_NORMALIZATION_TOL: f64 = 1e-12;

/// The state cap, honoring `CURVLAB_STATE_CAP` when it parses.
pub fn state_cap_from_env() -> usize {
    std::env::var(STATE_CAP_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_STATE_CAP)
}

/// An ordered set of opaque state labels.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpace {
    labels: Vec<String>,
    index: HashMap<String, usize>,
}

impl StateSpace {
    /// Applies the cap from [`state_cap_from_env`].
    pub fn new(labels: Vec<String>) -> Result<Self> {
        Self::with_cap(labels, state_cap_from_env())
    }

    pub fn with_cap(labels: Vec<String>, cap: usize) -> Result<Self> {
        if labels.len() < 2 {
            return Err(Error::InvalidChain(format!(
                "a state space needs at least 2 states, got {}",
                labels.len()
            )));
        }
        if labels.len() > cap {
            return Err(Error::TooLarge {
                size: labels.len(),
                cap,
            });
        }
        let mut index = HashMap::with_capacity(labels.len());
        for (i, label) in labels.iter().enumerate() {
            if index.insert(label.clone(), i).is_some() {
                return Err(Error::InvalidChain(format!(
                    "duplicate state label {label:?}"
                )));
            }
        }
        Ok(Self { labels, index })
    }

    /// States labelled `"0"`, `"1"`, ... .
    pub fn indexed(n: usize) -> Result<Self> {
        Self::with_cap((0..n).map(|i| i.to_string()).collect(), usize::MAX)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }
}

/// A finite Markov chain with rate kernel `Q` and weights `pi`.
///
/// Rates are stored sparsely: row `x` lists `(y, Q(x, y))` for `y != x` and
/// `Q(x, y) > 0`, sorted by `y`. `pi` is normalized on construction and the
/// normalizer is kept.
#[derive(Debug, Clone)]
pub struct MarkovChain {
    space: StateSpace,
    rows: Vec<Vec<(usize, f64)>>,
    pi: Vec<f64>,
    normalizer: f64,
}

impl MarkovChain {
    /// Builds a chain from a dense `|X| x |X|` rate table.
    pub fn from_dense(space: StateSpace, q: &[Vec<f64>], pi_weights: &[f64]) -> Result<Self> {
        let n = space.len();
        if q.len() != n || q.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidChain(format!("rate table must be {n}x{n}")));
        }
        let mut rows = Vec::with_capacity(n);
        for (x, row) in q.iter().enumerate() {
            let mut sparse = Vec::new();
            for (y, &rate) in row.iter().enumerate() {
                check_rate(x, y, rate)?;
                if x == y {
                    if rate != 0.0 {
                        return Err(Error::InvalidChain(format!(
                            "diagonal rate Q({x},{x}) = {rate} must be zero"
                        )));
                    }
                } else if rate > 0.0 {
                    sparse.push((y, rate));
                }
            }
            rows.push(sparse);
        }
        Self::assemble(space, rows, pi_weights)
    }

    /// Builds a chain from sparse rows of `(target, rate)`. Duplicate targets
    /// are summed in the order given; self-loops and zero rates are dropped.
    pub fn from_sparse(
        space: StateSpace,
        rows: Vec<Vec<(usize, f64)>>,
        pi_weights: &[f64],
    ) -> Result<Self> {
        let n = space.len();
        if rows.len() != n {
            return Err(Error::InvalidChain(format!(
                "expected {n} rows, got {}",
                rows.len()
            )));
        }
        let mut merged = Vec::with_capacity(n);
        for (x, row) in rows.into_iter().enumerate() {
            let mut row: Vec<(usize, f64)> = row;
            for &(y, rate) in &row {
                if y >= n {
                    return Err(Error::InvalidChain(format!(
                        "target {y} out of range at row {x}"
                    )));
                }
                check_rate(x, y, rate)?;
            }
            row.retain(|&(y, rate)| y != x && rate > 0.0);
            row.sort_by_key(|&(y, _)| y);
            let mut out: Vec<(usize, f64)> = Vec::with_capacity(row.len());
            for (y, rate) in row {
                match out.last_mut() {
                    Some(last) if last.0 == y => last.1 += rate,
                    _ => out.push((y, rate)),
                }
            }
            merged.push(out);
        }
        Self::assemble(space, merged, pi_weights)
    }

    fn assemble(
        space: StateSpace,
        rows: Vec<Vec<(usize, f64)>>,
        pi_weights: &[f64],
    ) -> Result<Self> {
        let n = space.len();
        if pi_weights.len() != n {
            return Err(Error::InvalidChain(format!(
                "pi has {} entries for {n} states",
                pi_weights.len()
            )));
        }
        if let Some((x, w)) = pi_weights
            .iter()
            .enumerate()
            .find(|(_, w)| !w.is_finite() || **w <= 0.0)
        {
            return Err(Error::InvalidChain(format!(
                "pi({x}) = {w} is not strictly positive"
            )));
        }
        let normalizer = numeric::sum(pi_weights.iter().copied());
        let pi = pi_weights.iter().map(|w| w / normalizer).collect();
        Ok(Self {
            space,
            rows,
            pi,
            normalizer,
        })
    }

    pub fn len(&self) -> usize {
        self.space.len()
    }

    pub fn is_empty(&self) -> bool {
        self.space.is_empty()
    }

    pub fn space(&self) -> &StateSpace {
        &self.space
    }

    /// Normalized stationary weights.
    pub fn pi(&self) -> &[f64] {
        &self.pi
    }

    /// The normalizer `Z` that the supplied weights were divided by.
    pub fn normalizer(&self) -> f64 {
        self.normalizer
    }

    pub fn row(&self, x: usize) -> &[(usize, f64)] {
        &self.rows[x]
    }

    pub fn rate(&self, x: usize, y: usize) -> f64 {
        let row = &self.rows[x];
        match row.binary_search_by_key(&y, |&(t, _)| t) {
            Ok(i) => row[i].1,
            Err(_) => 0.0,
        }
    }

    pub fn dense_rates(&self) -> Vec<Vec<f64>> {
        let n = self.len();
        let mut q = vec![vec![0.0; n]; n];
        for (x, row) in self.rows.iter().enumerate() {
            for &(y, rate) in row {
                q[x][y] = rate;
            }
        }
        q
    }

    /// Total exit rate of `x`.
    pub fn exit_rate(&self, x: usize) -> f64 {
        numeric::sum(self.rows[x].iter().map(|&(_, r)| r))
    }

    /// `(L psi)(x) = sum_y Q(x, y) (psi(y) - psi(x))`.
    pub fn generator_apply(&self, psi: &[f64]) -> Vec<f64> {
        assert_eq!(psi.len(), self.len());
        self.rows
            .iter()
            .enumerate()
            .map(|(x, row)| numeric::sum(row.iter().map(|&(y, rate)| rate * (psi[y] - psi[x]))))
            .collect()
    }
}

fn check_rate(x: usize, y: usize, rate: f64) -> Result<()> {
    if !rate.is_finite() || rate < 0.0 {
        return Err(Error::InvalidChain(format!(
            "rate Q({x},{y}) = {rate} must be finite and nonnegative"
        )));
    }
    Ok(())
}

/// One failed chain invariant, with a witness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "invariant", rename_all = "snake_case")]
pub enum ValidationFailure {
    /// `to` cannot be reached from `from`.
    Irreducibility {
        from: usize,
        to: usize,
    },
    /// `Q(x,y) pi(x) != Q(y,x) pi(y)`; `violations` counts all offending
    /// ordered pairs.
    DetailedBalance {
        x: usize,
        y: usize,
        forward: f64,
        backward: f64,
        violations: usize,
    },
    PiNormalization {
        sum: f64,
    },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub failures: Vec<ValidationFailure>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Checks irreducibility, detailed balance and normalization of `pi`.
pub fn validate_chain(chain: &MarkovChain) -> ValidationReport {
    let mut failures = Vec::new();
    if let Some((from, to)) = reachability_witness(chain) {
        failures.push(ValidationFailure::Irreducibility { from, to });
    }

    let pi = chain.pi();
    let mut first = None;
    let mut violations = 0;
    for x in 0..chain.len() {
        for &(y, rate) in chain.row(x) {
            let forward = rate * pi[x];
            let backward = chain.rate(y, x) * pi[y];
            if !numeric::close(
                forward,
                backward,
                DETAILED_BALANCE_RTOL,
                DETAILED_BALANCE_ATOL,
            ) {
                violations += 1;
                first.get_or_insert((x, y, forward, backward));
            }
        }
    }
    if let Some((x, y, forward, backward)) = first {
        failures.push(ValidationFailure::DetailedBalance {
            x: x.min(y),
            y: x.max(y),
            forward,
            backward,
            violations,
        });
    }

    let total = numeric::sum(pi.iter().copied());
    if (total - 1.0).abs() > PI_NORMALIZATION_TOL {
        failures.push(ValidationFailure::PiNormalization { sum: total });
    }
    ValidationReport { failures }
}

/// Returns a pair `(a, b)` with `b` unreachable from `a`, if any.
fn reachability_witness(chain: &MarkovChain) -> Option<(usize, usize)> {
    let n = chain.len();
    let forward = bfs(n, 0, |x| chain.row(x).iter().map(|&(y, _)| y).collect());
    if let Some(y) = forward.iter().position(|seen| !seen) {
        return Some((0, y));
    }
    let mut reverse = vec![Vec::new(); n];
    for x in 0..n {
        for &(y, _) in chain.row(x) {
            reverse[y].push(x);
        }
    }
    let backward = bfs(n, 0, |y| reverse[y].clone());
    backward.iter().position(|seen| !seen).map(|x| (x, 0))
}

fn bfs(n: usize, start: usize, neighbors: impl Fn(usize) -> Vec<usize>) -> Vec<bool> {
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([start]);
    seen[start] = true;
    while let Some(x) = queue.pop_front() {
        for y in neighbors(x) {
            if !seen[y] {
                seen[y] = true;
                queue.push_back(y);
            }
        }
    }
    seen
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain(q: Vec<Vec<f64>>, pi: Vec<f64>) -> MarkovChain {
        let space = StateSpace::indexed(q.len()).unwrap();
        MarkovChain::from_dense(space, &q, &pi).unwrap()
    }

    #[test]
    fn symmetric_two_point_chain_passes() {
        let c = chain(vec![vec![0.0, 1.0], vec![1.0, 0.0]], vec![0.5, 0.5]);
        assert!(validate_chain(&c).passed());
    }

    #[test]
    fn detailed_balance_failure_is_witnessed() {
        let c = chain(vec![vec![0.0, 1.0], vec![2.0, 0.0]], vec![0.5, 0.5]);
        let report = validate_chain(&c);
        assert_eq!(report.failures.len(), 1);
        match &report.failures[0] {
            ValidationFailure::DetailedBalance { x, y, .. } => assert_eq!((*x, *y), (0, 1)),
            other => panic!("unexpected failure {other:?}"),
        }
    }

    #[test]
    fn isolated_state_breaks_irreducibility() {
        let c = chain(
            vec![
                vec![0.0, 1.0, 0.0],
                vec![1.0, 0.0, 0.0],
                vec![0.0, 0.0, 0.0],
            ],
            vec![1.0, 1.0, 1.0],
        );
        let report = validate_chain(&c);
        assert_eq!(
            report.failures,
            vec![ValidationFailure::Irreducibility { from: 0, to: 2 }]
        );
    }

    #[test]
    fn one_way_edge_is_caught_by_backward_search() {
        // 0 -> 1 -> 2 -> 0 is strongly connected; drop 2 -> 0 and add 1 -> 0.
        let c = chain(
            vec![
                vec![0.0, 1.0, 0.0],
                vec![1.0, 0.0, 1.0],
                vec![0.0, 0.0, 0.0],
            ],
            vec![1.0, 1.0, 1.0],
        );
        let report = validate_chain(&c);
        assert!(report
            .failures
            .contains(&ValidationFailure::Irreducibility { from: 2, to: 0 }));
    }

    #[test]
    fn pi_is_normalized_on_ingestion() {
        let c = chain(vec![vec![0.0, 2.0], vec![1.0, 0.0]], vec![1.0, 2.0]);
        assert_eq!(c.normalizer(), 3.0);
        assert!((c.pi()[0] - 1.0 / 3.0).abs() < 1e-16);
        assert!(validate_chain(&c).passed());
    }

    #[test]
    fn construction_rejects_bad_input() {
        let space = StateSpace::indexed(2).unwrap();
        assert!(MarkovChain::from_dense(
            space.clone(),
            &[vec![0.0, -1.0], vec![1.0, 0.0]],
            &[1.0, 1.0]
        )
        .is_err());
        assert!(MarkovChain::from_dense(
            space.clone(),
            &[vec![1.0, 1.0], vec![1.0, 0.0]],
            &[1.0, 1.0]
        )
        .is_err());
        assert!(
            MarkovChain::from_dense(space, &[vec![0.0, 1.0], vec![1.0, 0.0]], &[1.0, 0.0]).is_err()
        );
        assert!(StateSpace::new(vec!["a".into()]).is_err());
        assert!(StateSpace::new(vec!["a".into(), "a".into()]).is_err());
        assert!(matches!(
            StateSpace::with_cap((0..5).map(|i| i.to_string()).collect(), 4),
            Err(Error::TooLarge { size: 5, cap: 4 })
        ));
    }

    #[test]
    fn generator_of_constant_is_zero() {
        let c = chain(vec![vec![0.0, 1.0], vec![1.0, 0.0]], vec![0.5, 0.5]);
        assert_eq!(c.generator_apply(&[3.0, 3.0]), vec![0.0, 0.0]);
        assert_eq!(c.generator_apply(&[0.0, 1.0]), vec![1.0, -1.0]);
    }
}
