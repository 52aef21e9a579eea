//! Small fixtures shared by the unit tests.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::calculus::{Density, Potential};
use crate::chain::{MarkovChain, StateSpace};
use crate::mapping::{chain_from_mapping, MappingRepresentation, Move};
use crate::models::{self, Graph, IsingSpec};

/// Two states swapped by one move at rate `c`, uniform `pi`.
pub(crate) fn two_point(c: f64) -> (MarkovChain, MappingRepresentation) {
    let rep = MappingRepresentation::new(
        2,
        vec![Move::permutation(vec![1, 0], 0)],
        vec![vec![c], vec![c]],
    )
    .unwrap();
    let chain = chain_from_mapping(StateSpace::indexed(2).unwrap(), &rep, &[1.0, 1.0]).unwrap();
    (chain, rep)
}

pub(crate) fn hypercube(n: usize, c: f64) -> (MarkovChain, MappingRepresentation) {
    let m = models::hypercube(n, c).unwrap();
    (m.chain, m.rep)
}

/// Ising model with couplings drawn from `[-1/2, 1/2]`.
pub(crate) fn ising_chain(
    n: usize,
    beta: f64,
    rng: &mut ChaCha8Rng,
) -> (MarkovChain, MappingRepresentation) {
    let m = models::build_ising(&IsingSpec::random(n, 0.5, beta, rng).unwrap()).unwrap();
    (m.chain, m.rep)
}

/// Hard-core gas on the star with three leaves.
pub(crate) fn hardcore_star(rho: f64) -> (MarkovChain, MappingRepresentation) {
    let m = models::build_graph_hardcore(&Graph::star(3), rho).unwrap();
    (m.chain, m.rep)
}

/// Walk on `Z/n` with move 0 stepping `+1`, move 1 stepping `-1`.
pub(crate) fn cycle_walk(n: usize, c: f64) -> (MarkovChain, MappingRepresentation) {
    let moves = vec![
        Move::permutation((0..n).map(|x| (x + 1) % n).collect(), 1),
        Move::permutation((0..n).map(|x| (x + n - 1) % n).collect(), 0),
    ];
    let rep = MappingRepresentation::new(n, moves, vec![vec![c, c]; n]).unwrap();
    let chain = chain_from_mapping(StateSpace::indexed(n).unwrap(), &rep, &vec![1.0; n]).unwrap();
    (chain, rep)
}

/// A strictly positive probability density with respect to `pi`.
pub(crate) fn random_density(rng: &mut ChaCha8Rng, pi: &[f64]) -> Density {
    let w: Vec<f64> = pi.iter().map(|_| rng.random_range(0.05..1.0)).collect();
    Density::from_weights(&w, pi).unwrap()
}

pub(crate) fn random_potential(rng: &mut ChaCha8Rng, n: usize) -> Potential {
    Potential((0..n).map(|_| rng.random_range(-2.0..2.0)).collect())
}

/// A connected reversible chain: a path plus random extra edges with
/// symmetric conductances, and random `pi`.
pub(crate) fn random_reversible_chain(rng: &mut ChaCha8Rng, n: usize) -> MarkovChain {
    let pi: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..1.0)).collect();
    let total: f64 = pi.iter().sum();
    let pi: Vec<f64> = pi.iter().map(|p| p / total).collect();
    let mut q = vec![vec![0.0; n]; n];
    for x in 0..n {
        for y in x + 1..n {
            if y == x + 1 || rng.random_bool(0.3) {
                let a = rng.random_range(0.1..1.0) * pi[x].min(pi[y]);
                q[x][y] = a / pi[x];
                q[y][x] = a / pi[y];
            }
        }
    }
    MarkovChain::from_dense(StateSpace::indexed(n).unwrap(), &q, &pi).unwrap()
}
