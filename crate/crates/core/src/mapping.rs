//! Mapping representations `(G, c)` of a generator: a set of moves acting on
//! the state space together with jump rates `c(x, delta)`.
//!
//! A move is a total function on the state space enlarged by a single
//! absorbing point outside it. `None` in a move's map means the move leaves
//! the physical state space; the rate of such a jump must be zero. This is how
//! models with a constrained configuration set (hard-core gases) are
//! represented without materializing the enlarged space.

use serde::{Deserialize, Serialize};

use crate::chain::{
    validate_chain, MarkovChain, StateSpace, DETAILED_BALANCE_ATOL, DETAILED_BALANCE_RTOL,
};
use crate::error::{Error, Result};
use crate::numeric;

/// A move `delta` together with the id of its inverse.
#[derive(Debug, Clone, PartialEq)]
pub struct Move {
    map: Vec<Option<usize>>,
    inverse: usize,
    name: Option<String>,
}

impl Move {
    pub fn new(map: Vec<Option<usize>>, inverse: usize) -> Self {
        Self {
            map,
            inverse,
            name: None,
        }
    }

    /// A move that stays inside the state space everywhere.
    pub fn permutation(map: Vec<usize>, inverse: usize) -> Self {
        Self::new(map.into_iter().map(Some).collect(), inverse)
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn map(&self) -> &[Option<usize>] {
        &self.map
    }

    pub fn inverse(&self) -> usize {
        self.inverse
    }

    #[inline]
    pub fn apply(&self, x: usize) -> Option<usize> {
        self.map[x]
    }
}

/// Moves plus the `|X| x |G|` rate table.
#[derive(Debug, Clone, PartialEq)]
pub struct MappingRepresentation {
    n_states: usize,
    moves: Vec<Move>,
    rates: Vec<f64>,
}

impl MappingRepresentation {
    /// Checks the structural invariants: table shapes, nonnegative rates,
    /// inverse closure and `delta^-1(delta x) = x` wherever `c(x, delta) > 0`.
    /// Reversibility needs `pi` and is checked by [`check_reversibility`].
    pub fn new(n_states: usize, moves: Vec<Move>, rates: Vec<Vec<f64>>) -> Result<Self> {
        let g = moves.len();
        if g == 0 {
            return Err(Error::InvalidMapping("no moves".into()));
        }
        if rates.len() != n_states || rates.iter().any(|r| r.len() != g) {
            return Err(Error::InvalidMapping(format!(
                "rate table must be {n_states}x{g}"
            )));
        }
        for (d, mv) in moves.iter().enumerate() {
            if mv.map.len() != n_states {
                return Err(Error::InvalidMapping(format!(
                    "move {d} maps {} states, expected {n_states}",
                    mv.map.len()
                )));
            }
            if let Some(y) = mv.map.iter().flatten().find(|&&y| y >= n_states) {
                return Err(Error::InvalidMapping(format!(
                    "move {d} maps to unknown state {y}"
                )));
            }
            if mv.inverse >= g {
                return Err(Error::InvalidMapping(format!(
                    "move {d} has unknown inverse {}",
                    mv.inverse
                )));
            }
            if moves[mv.inverse].inverse != d {
                return Err(Error::InvalidMapping(format!(
                    "inverse pairing is not closed: inv(inv({d})) = {}",
                    moves[mv.inverse].inverse
                )));
            }
        }
        let mut flat = Vec::with_capacity(n_states * g);
        for (x, row) in rates.iter().enumerate() {
            for (d, &c) in row.iter().enumerate() {
                if !c.is_finite() || c < 0.0 {
                    return Err(Error::InvalidMapping(format!(
                        "rate c({x},{d}) = {c} must be finite and nonnegative"
                    )));
                }
                if c > 0.0 {
                    match moves[d].map[x] {
                        None => {
                            return Err(Error::InvalidMapping(format!(
                                "c({x},{d}) > 0 but move {d} leaves the state space at {x}"
                            )))
                        }
                        Some(y) => {
                            if moves[moves[d].inverse].map[y] != Some(x) {
                                return Err(Error::InvalidMapping(format!(
                                    "inverse of move {d} does not undo it at state {x}"
                                )));
                            }
                        }
                    }
                }
            }
            flat.extend_from_slice(row);
        }
        Ok(Self {
            n_states,
            moves,
            rates: flat,
        })
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_moves(&self) -> usize {
        self.moves.len()
    }

    pub fn moves(&self) -> &[Move] {
        &self.moves
    }

    #[inline]
    pub fn rate(&self, x: usize, delta: usize) -> f64 {
        self.rates[x * self.moves.len() + delta]
    }

    /// Rates `c(x, .)` for all moves.
    #[inline]
    pub fn rates_at(&self, x: usize) -> &[f64] {
        let g = self.moves.len();
        &self.rates[x * g..(x + 1) * g]
    }

    /// Rate at a possibly-outside point; zero outside.
    #[inline]
    pub fn rate_at(&self, x: Option<usize>, delta: usize) -> f64 {
        x.map_or(0.0, |x| self.rate(x, delta))
    }

    #[inline]
    pub fn step(&self, x: usize, delta: usize) -> Option<usize> {
        self.moves[delta].map[x]
    }

    /// Applies a move to a possibly-outside point; the outside is absorbing.
    #[inline]
    pub fn step_from(&self, x: Option<usize>, delta: usize) -> Option<usize> {
        x.and_then(|x| self.step(x, delta))
    }

    #[inline]
    pub fn inverse(&self, delta: usize) -> usize {
        self.moves[delta].inverse
    }

    pub fn is_involutive(&self, delta: usize) -> bool {
        self.moves[delta].inverse == delta
    }

    pub fn all_involutive(&self) -> bool {
        (0..self.n_moves()).all(|d| self.is_involutive(d))
    }

    /// Minimal positive rate `c_*`.
    pub fn min_positive_rate(&self) -> Option<f64> {
        self.rates
            .iter()
            .copied()
            .filter(|&c| c > 0.0)
            .min_by(f64::total_cmp)
    }

    /// Dense rate table, one row per state.
    pub fn rate_rows(&self) -> Vec<Vec<f64>> {
        (0..self.n_states)
            .map(|x| self.rates_at(x).to_vec())
            .collect()
    }

    /// `(L psi)(x) = sum_delta (psi(delta x) - psi(x)) c(x, delta)`.
    pub fn generator_apply(&self, psi: &[f64]) -> Vec<f64> {
        assert_eq!(psi.len(), self.n_states);
        (0..self.n_states)
            .map(|x| {
                numeric::sum(
                    self.rates_at(x)
                        .iter()
                        .enumerate()
                        .filter(|(_, c)| **c > 0.0)
                        .map(|(d, &c)| {
                            let y = self.step(x, d).expect("positive rate stays inside");
                            (psi[y] - psi[x]) * c
                        }),
                )
            })
            .collect()
    }
}

/// Checks `c(x, delta) pi(x) = c(delta x, delta^-1) pi(delta x)` for all
/// `x, delta`, with the outside point carrying zero mass.
pub fn check_reversibility(rep: &MappingRepresentation, pi: &[f64]) -> Result<()> {
    if pi.len() != rep.n_states() {
        return Err(Error::InvalidMapping(format!(
            "pi has {} entries for {} states",
            pi.len(),
            rep.n_states()
        )));
    }
    for x in 0..rep.n_states() {
        for d in 0..rep.n_moves() {
            let forward = rep.rate(x, d) * pi[x];
            let backward = match rep.step(x, d) {
                Some(y) => rep.rate(y, rep.inverse(d)) * pi[y],
                None => 0.0,
            };
            if !numeric::close(
                forward,
                backward,
                DETAILED_BALANCE_RTOL,
                DETAILED_BALANCE_ATOL,
            ) {
                return Err(Error::InvalidMapping(format!(
                    "detailed balance fails at x={x}, move {d}: {forward} vs {backward}"
                )));
            }
        }
    }
    Ok(())
}

/// Checks `Q(x, y) = sum_{delta: delta x = y} c(x, delta)` for all `x != y`.
pub fn check_generator_consistency(chain: &MarkovChain, rep: &MappingRepresentation) -> Result<()> {
    if chain.len() != rep.n_states() {
        return Err(Error::InvalidMapping("state counts differ".into()));
    }
    let expected = rates_from_mapping(rep);
    for (x, row) in expected.iter().enumerate() {
        let actual = chain.row(x);
        let mismatch = row.len() != actual.len()
            || row.iter().zip(actual).any(|(a, b)| {
                a.0 != b.0
                    || !numeric::close(a.1, b.1, DETAILED_BALANCE_RTOL, DETAILED_BALANCE_ATOL)
            });
        if mismatch {
            return Err(Error::InvalidMapping(format!(
                "generator mismatch in row {x}: chain has {actual:?}, moves give {row:?}"
            )));
        }
    }
    Ok(())
}

fn rates_from_mapping(rep: &MappingRepresentation) -> Vec<Vec<(usize, f64)>> {
    (0..rep.n_states())
        .map(|x| {
            let mut row: Vec<(usize, f64)> = (0..rep.n_moves())
                .filter_map(|d| {
                    let c = rep.rate(x, d);
                    match rep.step(x, d) {
                        Some(y) if c > 0.0 && y != x => Some((y, c)),
                        _ => None,
                    }
                })
                .collect();
            row.sort_by_key(|&(y, _)| y);
            let mut merged: Vec<(usize, f64)> = Vec::with_capacity(row.len());
            for (y, c) in row {
                match merged.last_mut() {
                    Some(last) if last.0 == y => last.1 += c,
                    _ => merged.push((y, c)),
                }
            }
            merged
        })
        .collect()
}

/// Builds the chain generated by a mapping representation.
pub fn chain_from_mapping(
    space: StateSpace,
    rep: &MappingRepresentation,
    pi_weights: &[f64],
) -> Result<MarkovChain> {
    if space.len() != rep.n_states() {
        return Err(Error::InvalidMapping(format!(
            "representation acts on {} states, space has {}",
            rep.n_states(),
            space.len()
        )));
    }
    let chain = MarkovChain::from_sparse(space, rates_from_mapping(rep), pi_weights)
        .map_err(|e| Error::InvalidMapping(e.to_string()))?;
    check_reversibility(rep, chain.pi())?;
    let report = validate_chain(&chain);
    if !report.passed() {
        return Err(Error::InvalidMapping(format!(
            "generated chain is invalid: {:?}",
            report.failures
        )));
    }
    Ok(chain)
}

/// The representation by transpositions `t_{x,y}` that swap `x` and `y`,
/// one for every edge of the chain, each its own inverse.
pub fn canonical_transposition_representation(chain: &MarkovChain) -> MappingRepresentation {
    let n = chain.len();
    let mut edges = Vec::new();
    for x in 0..n {
        for &(y, _) in chain.row(x) {
            if x < y || chain.rate(y, x) == 0.0 {
                edges.push((x.min(y), x.max(y)));
            }
        }
    }
    edges.sort_unstable();
    edges.dedup();
    let g = edges.len();
    let mut moves = Vec::with_capacity(g);
    let mut rates = vec![vec![0.0; g]; n];
    for (d, &(a, b)) in edges.iter().enumerate() {
        let map = (0..n)
            .map(|z| {
                if z == a {
                    b
                } else if z == b {
                    a
                } else {
                    z
                }
            })
            .collect();
        moves.push(Move::permutation(map, d).with_name(format!(
            "t({},{})",
            chain.space().label(a),
            chain.space().label(b)
        )));
        rates[a][d] = chain.rate(a, b);
        rates[b][d] = chain.rate(b, a);
    }
    MappingRepresentation::new(n, moves, rates)
        .expect("transpositions of a chain form a valid representation")
}

/// Result of the exhaustive commutativity check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommutativityReport {
    /// `delta(eta x) == eta(delta x)` for all `x, delta, eta`.
    pub commutative: bool,
    /// Up to [`MAX_WITNESSES`] triples `(x, delta, eta)` where the moves
    /// disagree.
    pub witnesses: Vec<(usize, usize, usize)>,
    /// Total number of disagreeing triples with `delta < eta`.
    pub violations: usize,
    /// Every move is its own inverse.
    pub involutive: bool,
    /// The moves commute wherever both two-step paths `x -> delta x ->
    /// eta delta x` and `x -> eta x -> delta eta x` have positive rates.
    /// This is what the curvature criteria actually use.
    pub support_commutative: bool,
    pub support_witnesses: Vec<(usize, usize, usize)>,
}

pub const MAX_WITNESSES: usize = 64;

pub fn commutativity_report(rep: &MappingRepresentation) -> CommutativityReport {
    let g = rep.n_moves();
    let mut witnesses = Vec::new();
    let mut support_witnesses = Vec::new();
    let mut violations = 0;
    let mut support_violations = 0;
    for x in 0..rep.n_states() {
        for d in 0..g {
            let dx = rep.step(x, d);
            for e in d + 1..g {
                let ex = rep.step(x, e);
                let edx = rep.step_from(dx, e);
                let dex = rep.step_from(ex, d);
                if edx == dex {
                    continue;
                }
                violations += 1;
                if witnesses.len() < MAX_WITNESSES {
                    witnesses.push((x, d, e));
                }
                let on_support = rep.rate(x, d) > 0.0
                    && rep.rate(x, e) > 0.0
                    && rep.rate_at(dx, e) > 0.0
                    && rep.rate_at(ex, d) > 0.0;
                if on_support {
                    support_violations += 1;
                    if support_witnesses.len() < MAX_WITNESSES {
                        support_witnesses.push((x, d, e));
                    }
                }
            }
        }
    }
    CommutativityReport {
        commutative: violations == 0,
        witnesses,
        violations,
        involutive: rep.all_involutive(),
        support_commutative: support_violations == 0,
        support_witnesses,
    }
}
