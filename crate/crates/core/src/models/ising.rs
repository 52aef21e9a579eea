//! Glauber dynamics for Ising models with arbitrary couplings.
//!
//! Configurations are bitmasks: bit `i` set means spin `x_i = +1`. The
//! Hamiltonian is the double sum `H(x) = -sum_{i,j} k_ij x_i x_j` over
//! ordered pairs, so each unordered bond enters twice.

use std::collections::{HashMap, VecDeque};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::chain::{state_cap_from_env, StateSpace};
use crate::error::{Error, Result};
use crate::mapping::{chain_from_mapping, MappingRepresentation, Move};
use crate::numeric;

use super::{Model, ModelDetails};

/// Couplings `k` (symmetric, zero diagonal) and inverse temperature `beta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsingSpec {
    k: Vec<Vec<f64>>,
    beta: f64,
}

impl IsingSpec {
    pub fn new(k: Vec<Vec<f64>>, beta: f64) -> Result<Self> {
        let n = k.len();
        if n == 0 {
            return Err(Error::BadParams(
                "an Ising model needs at least one site".into(),
            ));
        }
        if k.iter().any(|row| row.len() != n) {
            return Err(Error::BadParams(format!("coupling matrix must be {n}x{n}")));
        }
        if !(beta.is_finite() && beta >= 0.0) {
            return Err(Error::BadParams(format!(
                "beta = {beta} must be finite and nonnegative"
            )));
        }
        for i in 0..n {
            if k[i][i] != 0.0 {
                return Err(Error::BadParams(format!(
                    "k[{i}][{i}] = {} must be zero",
                    k[i][i]
                )));
            }
            for j in 0..n {
                if !k[i][j].is_finite() || k[i][j] != k[j][i] {
                    return Err(Error::BadParams(format!(
                        "couplings must be finite and symmetric, k[{i}][{j}] = {} vs k[{j}][{i}] = {}",
                        k[i][j], k[j][i]
                    )));
                }
            }
        }
        Ok(Self { k, beta })
    }

    /// Symmetric couplings drawn uniformly from `[-k_max, k_max]`.
    pub fn random<R: Rng + ?Sized>(n: usize, k_max: f64, beta: f64, rng: &mut R) -> Result<Self> {
        let mut k = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in i + 1..n {
                let v = rng.random_range(-k_max..=k_max);
                k[i][j] = v;
                k[j][i] = v;
            }
        }
        Self::new(k, beta)
    }

    pub fn n(&self) -> usize {
        self.k.len()
    }

    pub fn couplings(&self) -> &[Vec<f64>] {
        &self.k
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn with_beta(&self, beta: f64) -> Result<Self> {
        Self::new(self.k.clone(), beta)
    }

    #[inline]
    fn spin(x: usize, i: usize) -> f64 {
        if x >> i & 1 == 1 {
            1.0
        } else {
            -1.0
        }
    }

    /// `H(x) = -sum_{i,j} k_ij x_i x_j`.
    pub fn energy(&self, x: usize) -> f64 {
        let n = self.n();
        -numeric::sum(
            (0..n).flat_map(|i| {
                (0..n).map(move |j| self.k[i][j] * Self::spin(x, i) * Self::spin(x, j))
            }),
        )
    }

    /// `H(delta_i x) - H(x) = 4 x_i sum_m k_im x_m`.
    pub fn energy_change(&self, x: usize, i: usize) -> f64 {
        let field = numeric::sum((0..self.n()).map(|m| self.k[i][m] * Self::spin(x, m)));
        4.0 * Self::spin(x, i) * field
    }

    /// The Glauber rate `exp(-beta/2 (H(delta_i x) - H(x)))`.
    pub fn rate(&self, x: usize, i: usize) -> f64 {
        (-0.5 * self.beta * self.energy_change(x, i)).exp()
    }

    /// The perturbation parameter
    /// `max_i sum_{j != i} exp(2 beta sum_{m != i,j} (|k_im| + |k_jm|)) (e^{4 beta |k_ij|} - 1)`.
    pub fn epsilon(&self) -> f64 {
        let n = self.n();
        let b = self.beta;
        (0..n)
            .map(|i| {
                numeric::sum((0..n).filter(|&j| j != i).map(|j| {
                    let spread = numeric::sum(
                        (0..n)
                            .filter(|&m| m != i && m != j)
                            .map(|m| self.k[i][m].abs() + self.k[j][m].abs()),
                    );
                    (2.0 * b * spread).exp() * (4.0 * b * self.k[i][j].abs()).exp_m1()
                }))
            })
            .fold(0.0, f64::max)
    }

    /// The closed-form bound `(1 - epsilon) 2 c_*` with the exact minimal rate,
    /// when `epsilon <= 1`.
    pub fn theorem_bound(&self) -> Option<f64> {
        let eps = self.epsilon();
        (eps <= 1.0).then(|| (1.0 - eps) * 2.0 * self.min_rate())
    }

    /// Minimal Glauber rate `exp(-beta/2 max_x,i (H(delta_i x) - H(x)))`,
    /// using the worst case of `4 sum_m |k_im|` over sites.
    pub fn min_rate(&self) -> f64 {
        let worst = (0..self.n())
            .map(|i| 4.0 * numeric::sum(self.k[i].iter().map(|v| v.abs())))
            .fold(0.0, f64::max);
        (-0.5 * self.beta * worst).exp()
    }
}

/// Extra data kept for Ising models.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IsingDetails {
    pub spec: IsingSpec,
    pub epsilon: f64,
    /// `(1 - epsilon) 2 c_*` when `epsilon <= 1`.
    pub theorem_bound: Option<f64>,
    /// Closed-form constants as stated for the named families, kept alongside
    /// the exact ones for comparison.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<FamilyConstants>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilyConstants {
    pub name: String,
    /// Closed-form epsilon stated for the family.
    pub epsilon_stated: f64,
    /// Closed-form minimal rate stated for the family.
    pub c_star_stated: f64,
    /// `(1 - epsilon_stated) 2 c_star_stated` when `epsilon_stated <= 1`.
    pub bound_stated: Option<f64>,
}

impl FamilyConstants {
    fn new(name: &str, epsilon_stated: f64, c_star_stated: f64) -> Self {
        Self {
            name: name.into(),
            epsilon_stated,
            c_star_stated,
            bound_stated: (epsilon_stated <= 1.0)
                .then_some((1.0 - epsilon_stated) * 2.0 * c_star_stated),
        }
    }
}

fn spin_label(x: usize, n: usize) -> String {
    (0..n)
        .map(|i| if x >> i & 1 == 1 { '+' } else { '-' })
        .collect()
}

/// Builds the Glauber dynamics. States are all `2^n` bitmasks.
pub fn build_ising(spec: &IsingSpec) -> Result<Model> {
    build_ising_with_family(spec, None)
}

fn build_ising_with_family(spec: &IsingSpec, family: Option<FamilyConstants>) -> Result<Model> {
    let n = spec.n();
    let cap = state_cap_from_env();
    let size = 1usize
        .checked_shl(n as u32)
        .filter(|_| n < usize::BITS as usize);
    let size = match size {
        Some(s) if s <= cap => s,
        _ => {
            return Err(Error::TooLarge {
                size: size.unwrap_or(usize::MAX),
                cap,
            })
        }
    };
    let energies: Vec<f64> = (0..size).map(|x| spec.energy(x)).collect();
    let e_min = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let weights: Vec<f64> = energies
        .iter()
        .map(|e| (-spec.beta * (e - e_min)).exp())
        .collect();
    let moves = (0..n)
        .map(|i| {
            Move::permutation((0..size).map(|x| x ^ (1 << i)).collect(), i)
                .with_name(format!("flip{i}"))
        })
        .collect();
    let rates = (0..size)
        .map(|x| (0..n).map(|i| spec.rate(x, i)).collect())
        .collect();
    let rep = MappingRepresentation::new(size, moves, rates)?;
    let space = StateSpace::with_cap((0..size).map(|x| spin_label(x, n)).collect(), cap)?;
    let chain = chain_from_mapping(space, &rep, &weights)?;
    let details = IsingDetails {
        spec: spec.clone(),
        epsilon: spec.epsilon(),
        theorem_bound: spec.theorem_bound(),
        family,
    };
    Ok(Model {
        chain,
        rep,
        details: ModelDetails::Ising(Box::new(details)),
    })
}

/// Curie-Weiss couplings `k_ij = 1/(2n)` for `i != j`.
pub fn curie_weiss_spec(n: usize, beta: f64) -> Result<IsingSpec> {
    if n < 2 {
        return Err(Error::BadParams("Curie-Weiss needs n >= 2".into()));
    }
    let v = 1.0 / (2.0 * n as f64);
    let k = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 0.0 } else { v }).collect())
        .collect();
    IsingSpec::new(k, beta)
}

/// `(n-1) e^{2 beta (n-2)/n} (e^{2 beta / n} - 1)`.
pub fn curie_weiss_epsilon(n: usize, beta: f64) -> f64 {
    let n = n as f64;
    (n - 1.0) * (2.0 * beta * (n - 2.0) / n).exp() * (2.0 * beta / n).exp_m1()
}

/// The minimal rate as stated for Curie-Weiss, `e^{-beta (n-1)/(2n)}`.
pub fn curie_weiss_c_star_stated(n: usize, beta: f64) -> f64 {
    let n = n as f64;
    (-beta * (n - 1.0) / (2.0 * n)).exp()
}

/// The `n -> infinity` simplification `2 beta e^{2 beta}`.
pub fn curie_weiss_limit_epsilon(beta: f64) -> f64 {
    2.0 * beta * (2.0 * beta).exp()
}

pub fn build_curie_weiss(n: usize, beta: f64) -> Result<Model> {
    let spec = curie_weiss_spec(n, beta)?;
    let family = FamilyConstants::new(
        "curie_weiss",
        curie_weiss_epsilon(n, beta),
        curie_weiss_c_star_stated(n, beta),
    );
    build_ising_with_family(&spec, Some(family))
}

/// `(2d-1) e^{2 beta (2d-1)} (e^{2 beta} - 1)`, the bound stated for the
/// nearest-neighbour model on `Z^d`.
pub fn lattice_epsilon_stated(d: usize, beta: f64) -> f64 {
    let m = 2.0 * d as f64 - 1.0;
    m * (2.0 * beta * m).exp() * (2.0 * beta).exp_m1()
}

/// The minimal rate as stated for the lattice, `e^{-beta d}`.
pub fn lattice_c_star_stated(d: usize, beta: f64) -> f64 {
    (-beta * d as f64).exp()
}

/// A finite subset of `Z^d` with nearest-neighbour couplings `1/2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lattice {
    sites: Vec<Vec<i64>>,
}

impl Lattice {
    pub fn new(sites: Vec<Vec<i64>>) -> Result<Self> {
        let d = sites.first().map(Vec::len).unwrap_or(0);
        if d == 0 || sites.iter().any(|s| s.len() != d) {
            return Err(Error::BadParams(
                "lattice sites must be nonempty points of equal dimension".into(),
            ));
        }
        let index: HashMap<&Vec<i64>, usize> =
            sites.iter().enumerate().map(|(i, s)| (s, i)).collect();
        if index.len() != sites.len() {
            return Err(Error::BadParams("lattice sites must be distinct".into()));
        }
        let lattice = Self { sites };
        let adj = lattice.adjacency();
        let mut seen = vec![false; adj.len()];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        while let Some(i) = queue.pop_front() {
            for &j in &adj[i] {
                if !std::mem::replace(&mut seen[j], true) {
                    queue.push_back(j);
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::BadParams("lattice region must be connected".into()));
        }
        Ok(lattice)
    }

    /// The block `{0, ..., side-1}^d`.
    pub fn block(d: usize, side: usize) -> Result<Self> {
        if d == 0 || side == 0 {
            return Err(Error::BadParams("block needs d >= 1 and side >= 1".into()));
        }
        let total = side
            .checked_pow(d as u32)
            .ok_or_else(|| Error::BadParams("block too large".into()))?;
        let sites = (0..total)
            .map(|mut v| {
                (0..d)
                    .map(|_| {
                        let c = (v % side) as i64;
                        v /= side;
                        c
                    })
                    .collect()
            })
            .collect();
        Self::new(sites)
    }

    pub fn dimension(&self) -> usize {
        self.sites[0].len()
    }

    pub fn sites(&self) -> &[Vec<i64>] {
        &self.sites
    }

    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let n = self.sites.len();
        (0..n)
            .map(|i| {
                (0..n)
                    .filter(|&j| {
                        let dist: i64 = self.sites[i]
                            .iter()
                            .zip(&self.sites[j])
                            .map(|(a, b)| (a - b).abs())
                            .sum();
                        dist == 1
                    })
                    .collect()
            })
            .collect()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency().iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency().iter().map(Vec::len).max().unwrap_or(0)
    }
}

pub fn build_lattice_ising_spec(lattice: &Lattice, beta: f64) -> Result<IsingSpec> {
    let n = lattice.sites().len();
    let mut k = vec![vec![0.0; n]; n];
    for (i, nbrs) in lattice.adjacency().iter().enumerate() {
        for &j in nbrs {
            k[i][j] = 0.5;
        }
    }
    IsingSpec::new(k, beta)
}

pub fn build_lattice_ising(lattice: &Lattice, beta: f64) -> Result<Model> {
    let spec = build_lattice_ising_spec(lattice, beta)?;
    let d = lattice.dimension();
    let family = FamilyConstants::new(
        "lattice",
        lattice_epsilon_stated(d, beta),
        lattice_c_star_stated(d, beta),
    );
    build_ising_with_family(&spec, Some(family))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::validate_chain;
    use crate::criteria::q_table;
    use crate::mapping::commutativity_report;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_site_is_a_fair_coin() {
        let m = build_ising(&IsingSpec::new(vec![vec![0.0]], 0.7).unwrap()).unwrap();
        assert_eq!(m.chain.dense_rates(), vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
    }

    #[test]
    fn infinite_temperature_is_uniform() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let m = build_ising(&IsingSpec::random(3, 0.5, 0.0, &mut rng).unwrap()).unwrap();
        assert!(m.chain.pi().iter().all(|&p| p == 0.125));
        assert!((0..8).all(|x| m.rep.rates_at(x).iter().all(|&c| c == 1.0)));
    }

    #[test]
    fn two_spin_rate_by_hand() {
        let spec = IsingSpec::new(vec![vec![0.0, 0.25], vec![0.25, 0.0]], 1.0).unwrap();
        // (+,+) is mask 0b11, flipping site 0 gives (-,+) = mask 0b10
        assert_eq!(spec.energy(0b11), -0.5);
        assert_eq!(spec.energy(0b10), 0.5);
        let m = build_ising(&spec).unwrap();
        assert!((m.rep.rate(0b11, 0) - (-0.5f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn rates_are_square_roots_of_pi_ratios() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for n in 1..=5 {
            let spec = IsingSpec::random(n, 0.5, 0.8, &mut rng).unwrap();
            let m = build_ising(&spec).unwrap();
            assert!(validate_chain(&m.chain).passed());
            let report = commutativity_report(&m.rep);
            assert!(report.commutative && report.involutive);
            let pi = m.chain.pi();
            for x in 0..pi.len() {
                for i in 0..n {
                    let y = x ^ (1 << i);
                    let expected = (pi[y] / pi[x]).sqrt();
                    assert!(numeric::rel_diff(m.rep.rate(x, i), expected, 1e-300) < 1e-12);
                }
            }
        }
    }

    #[test]
    fn energy_pair_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let spec = IsingSpec::random(5, 0.5, 1.0, &mut rng).unwrap();
        let k = spec.couplings();
        let s = |x: usize, i: usize| IsingSpec::spin(x, i);
        for x in 0..32 {
            for i in 0..5 {
                for j in (0..5).filter(|&j| j != i) {
                    let lhs = spec.energy(x ^ (1 << i)) + spec.energy(x ^ (1 << j));
                    let mut rest = 0.0;
                    for l in (0..5).filter(|&l| l != i && l != j) {
                        for m in (0..5).filter(|&m| m != i && m != j) {
                            rest += k[l][m] * s(x, l) * s(x, m);
                        }
                    }
                    let rhs = -2.0 * rest + 4.0 * k[i][j] * s(x, i) * s(x, j);
                    assert!((lhs - rhs).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn pair_estimate_holds_everywhere() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for n in 2..=4 {
            for &beta in &[0.02, 0.05, 0.3, 1.0] {
                let spec = IsingSpec::random(n, 0.5, beta, &mut rng).unwrap();
                let m = build_ising(&spec).unwrap();
                assert_eq!(pair_estimate_violations(&spec, &m), 0);
            }
        }
    }

    /// Counts `(x, i, j)` where the pair estimate fails.
    pub(crate) fn pair_estimate_violations(spec: &IsingSpec, m: &Model) -> usize {
        let qt = q_table(&m.rep, m.chain.pi());
        let (n, k, b) = (spec.n(), spec.couplings(), spec.beta());
        let mut bad = 0;
        for x in 0..1usize << n {
            for i in 0..n {
                for j in (0..n).filter(|&j| j != i) {
                    let lhs =
                        (qt.q(x ^ (1 << i), i, j) - qt.qstar(x, i, j).unwrap()) / qt.q(x, i, i);
                    let spread: f64 = (0..n)
                        .filter(|&m| m != i && m != j)
                        .map(|m| k[i][m].abs() + k[j][m].abs())
                        .sum();
                    let rhs = (2.0 * b * spread).exp() * (4.0 * b * k[i][j].abs()).exp_m1();
                    if lhs > rhs * (1.0 + 1e-12) + 1e-15 {
                        bad += 1;
                    }
                }
            }
        }
        bad
    }

    #[test]
    fn epsilon_vanishes_at_infinite_temperature() {
        let spec = curie_weiss_spec(5, 0.0).unwrap();
        assert_eq!(spec.epsilon(), 0.0);
    }

    #[test]
    fn curie_weiss_epsilon_matches_closed_form() {
        for n in 2..=12 {
            for &beta in &[0.01, 0.1, 0.28, 0.5] {
                let general = curie_weiss_spec(n, beta).unwrap().epsilon();
                let closed = curie_weiss_epsilon(n, beta);
                assert!(
                    numeric::rel_diff(general, closed, 1e-300) < 1e-12,
                    "n={n} beta={beta}"
                );
            }
        }
    }

    #[test]
    fn curie_weiss_minimal_rate() {
        assert_eq!(curie_weiss_c_star_stated(4, 1.0), (-3.0f64 / 8.0).exp());
        let m = build_curie_weiss(4, 1.0).unwrap();
        let exact = m.rep.min_positive_rate().unwrap();
        assert!((exact - (-0.75f64).exp()).abs() < 1e-15);
        let spec = curie_weiss_spec(4, 1.0).unwrap();
        assert!((spec.min_rate() - exact).abs() < 1e-15);
    }

    #[test]
    fn lattice_geometry() {
        let square = Lattice::block(2, 2).unwrap();
        assert_eq!(square.edge_count(), 4);
        let cube = Lattice::block(2, 3).unwrap();
        assert_eq!(cube.max_degree(), 4);
        let cube3 = Lattice::block(3, 3).unwrap();
        assert_eq!(cube3.max_degree(), 6);
        assert!(Lattice::new(vec![vec![0, 0], vec![2, 0]]).is_err());
    }

    #[test]
    fn lattice_interior_epsilon_exceeds_the_stated_bound() {
        // An interior site has 2d neighbours, each contributing one term; the
        // stated bound counts only 2d - 1 of them.
        let beta = 0.05;
        let lattice = Lattice::block(2, 5).unwrap();
        let spec = build_lattice_ising_spec(&lattice, beta).unwrap();
        let exact = spec.epsilon();
        let interior = 4.0 * (6.0 * beta).exp() * (2.0 * beta).exp_m1();
        assert!((exact - interior).abs() < 1e-14);
        let stated = lattice_epsilon_stated(2, beta);
        assert!((exact / stated - 4.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn lattice_stated_bound_is_positive_at_small_beta() {
        let m = build_lattice_ising(&Lattice::block(2, 2).unwrap(), 0.05).unwrap();
        let ModelDetails::Ising(details) = &m.details else {
            panic!()
        };
        let family = details.family.as_ref().unwrap();
        assert!(family.bound_stated.unwrap() > 0.0);
        assert_eq!(family.c_star_stated, (-0.1f64).exp());
        // each site of a 2x2 block has two neighbours, so c_* = e^{-2 beta}
        assert!((m.rep.min_positive_rate().unwrap() - (-0.1f64).exp()).abs() < 1e-15);
        let big = build_lattice_ising_spec(&Lattice::block(2, 3).unwrap(), 0.05).unwrap();
        assert!((big.min_rate() - (-0.2f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn too_many_spins_are_rejected() {
        let spec = curie_weiss_spec(16, 0.1).unwrap();
        assert!(matches!(build_ising(&spec), Err(Error::TooLarge { .. })));
    }
}
