//! Birth and death dynamics on a decreasing set of occupation
//! configurations, with graph hard-core and long hard rods as special cases.
//!
//! Site `i` contributes two moves: creation `2i` and annihilation `2i + 1`.
//! A creation that would leave the allowed set, or an annihilation at an
//! empty site, leads outside the state space and carries rate zero.

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::chain::{state_cap_from_env, StateSpace};
use crate::error::{Error, Result};
use crate::mapping::{chain_from_mapping, MappingRepresentation, Move};

use super::{Model, ModelDetails};

/// Move id of the creation at site `i`.
pub fn creation(i: usize) -> usize {
    2 * i
}

/// Move id of the annihilation at site `i`.
pub fn annihilation(i: usize) -> usize {
    2 * i + 1
}

/// Intensities and an explicitly enumerated decreasing allowed set.
#[derive(Debug, Clone, PartialEq)]
pub struct HardCoreSpec {
    nu: Vec<f64>,
    configs: Vec<Vec<u32>>,
    index: HashMap<Vec<u32>, usize>,
}

impl HardCoreSpec {
    pub fn new(nu: Vec<f64>, configs: Vec<Vec<u32>>) -> Result<Self> {
        let sites = nu.len();
        if sites == 0 {
            return Err(Error::BadParams(
                "a hard-core model needs at least one site".into(),
            ));
        }
        if let Some(v) = nu.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::BadParams(format!(
                "intensity {v} must be positive and finite"
            )));
        }
        let cap = state_cap_from_env();
        if configs.len() > cap {
            return Err(Error::TooLarge {
                size: configs.len(),
                cap,
            });
        }
        let mut index = HashMap::with_capacity(configs.len());
        for (k, x) in configs.iter().enumerate() {
            if x.len() != sites {
                return Err(Error::BadParams(format!(
                    "configuration {k} has {} sites, expected {sites}",
                    x.len()
                )));
            }
            if index.insert(x.clone(), k).is_some() {
                return Err(Error::BadParams(format!(
                    "configuration {x:?} is listed twice"
                )));
            }
        }
        if !index.contains_key(&vec![0; sites]) {
            return Err(Error::NotDecreasing(
                "the empty configuration is missing".into(),
            ));
        }
        // removing one particle at a time reaches every smaller configuration
        for x in &configs {
            for i in (0..sites).filter(|&i| x[i] > 0) {
                let mut y = x.clone();
                y[i] -= 1;
                if !index.contains_key(&y) {
                    return Err(Error::NotDecreasing(format!(
                        "{x:?} is allowed but {y:?} is not"
                    )));
                }
            }
        }
        Ok(Self { nu, configs, index })
    }

    /// Collects every configuration reachable from the empty one by adding
    /// particles while `allowed` holds.
    pub fn from_predicate(nu: Vec<f64>, allowed: impl Fn(&[u32]) -> bool) -> Result<Self> {
        let sites = nu.len();
        let cap = state_cap_from_env();
        let zero = vec![0u32; sites];
        let mut seen: HashMap<Vec<u32>, ()> = HashMap::from([(zero.clone(), ())]);
        let mut configs = vec![zero.clone()];
        let mut queue = VecDeque::from([zero]);
        while let Some(x) = queue.pop_front() {
            for i in 0..sites {
                let mut y = x.clone();
                y[i] += 1;
                if seen.contains_key(&y) || !allowed(&y) {
                    continue;
                }
                seen.insert(y.clone(), ());
                configs.push(y.clone());
                if configs.len() > cap {
                    return Err(Error::TooLarge {
                        size: configs.len(),
                        cap,
                    });
                }
                queue.push_back(y);
            }
        }
        Self::new(nu, configs)
    }

    pub fn sites(&self) -> usize {
        self.nu.len()
    }

    pub fn intensities(&self) -> &[f64] {
        &self.nu
    }

    pub fn configs(&self) -> &[Vec<u32>] {
        &self.configs
    }

    pub fn index_of(&self, x: &[u32]) -> Option<usize> {
        self.index.get(x).copied()
    }

    pub fn contains(&self, x: &[u32]) -> bool {
        self.index.contains_key(x)
    }

    fn shifted(x: &[u32], plus: Option<usize>, minus: Option<usize>) -> Option<Vec<u32>> {
        let mut y = x.to_vec();
        if let Some(i) = minus {
            y[i] = y[i].checked_sub(1)?;
        }
        if let Some(j) = plus {
            y[j] += 1;
        }
        Some(y)
    }

    /// The blocking sum `sum_{j != i} nu(j) 1{x + 1_j - 1_i ∈ A} 1{x + 1_j ∉ A}`.
    pub fn epsilon0_at(&self, x: &[u32], i: usize) -> f64 {
        (0..self.sites())
            .filter(|&j| j != i)
            .filter(|&j| {
                let swapped = Self::shifted(x, Some(j), Some(i)).is_some_and(|y| self.contains(&y));
                let added = Self::shifted(x, Some(j), None).is_some_and(|y| self.contains(&y));
                swapped && !added
            })
            .map(|j| self.nu[j])
            .sum()
    }

    /// `epsilon_0`, the largest blocking sum over occupied sites.
    pub fn epsilon0(&self) -> Result<f64> {
        self.occupied()
            .map(|(x, i)| self.epsilon0_at(x, i))
            .reduce(f64::max)
            .ok_or_else(|| Error::BadParams("no allowed configuration has an occupied site".into()))
    }

    /// `epsilon_1 = min nu(i) 1{x + 1_i ∉ A}` over occupied sites.
    pub fn epsilon1(&self) -> Result<f64> {
        self.occupied()
            .map(|(x, i)| {
                let grown = Self::shifted(x, Some(i), None).is_some_and(|y| self.contains(&y));
                if grown {
                    0.0
                } else {
                    self.nu[i]
                }
            })
            .reduce(f64::min)
            .ok_or_else(|| Error::BadParams("no allowed configuration has an occupied site".into()))
    }

    fn occupied(&self) -> impl Iterator<Item = (&Vec<u32>, usize)> {
        self.configs
            .iter()
            .flat_map(|x| (0..x.len()).filter(move |&i| x[i] > 0).map(move |i| (x, i)))
    }

    /// `prod_i nu(i)^x(i) / x(i)!`, unnormalized.
    pub fn weight(&self, x: &[u32]) -> f64 {
        x.iter()
            .zip(&self.nu)
            .map(|(&n, &nu)| (1..=n).map(|m| nu / m as f64).product::<f64>())
            .product()
    }
}

fn label(x: &[u32]) -> String {
    if x.iter().all(|&n| n < 10) {
        x.iter()
            .map(|n| char::from_digit(*n, 10).unwrap())
            .collect()
    } else {
        x.iter().map(u32::to_string).collect::<Vec<_>>().join(",")
    }
}

/// Extra data kept for hard-core models.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HardCoreDetails {
    pub sites: usize,
    pub epsilon0: f64,
    pub epsilon1: f64,
    /// `(1 - epsilon0 + epsilon1) / 2` when `epsilon0 <= 1`.
    pub bound: Option<f64>,
    pub creations: Vec<usize>,
    pub annihilations: Vec<usize>,
    /// Largest conflict degree, for graph models.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_degree: Option<usize>,
}

pub fn build_hardcore(spec: &HardCoreSpec) -> Result<Model> {
    build_hardcore_with_degree(spec, None)
}

fn build_hardcore_with_degree(spec: &HardCoreSpec, max_degree: Option<usize>) -> Result<Model> {
    let sites = spec.sites();
    let n = spec.configs().len();
    let mut moves = Vec::with_capacity(2 * sites);
    for i in 0..sites {
        let up = spec
            .configs()
            .iter()
            .map(|x| HardCoreSpec::shifted(x, Some(i), None).and_then(|y| spec.index_of(&y)))
            .collect();
        let down = spec
            .configs()
            .iter()
            .map(|x| HardCoreSpec::shifted(x, None, Some(i)).and_then(|y| spec.index_of(&y)))
            .collect();
        moves.push(Move::new(up, annihilation(i)).with_name(format!("create{i}")));
        moves.push(Move::new(down, creation(i)).with_name(format!("annihilate{i}")));
    }
    let rates = spec
        .configs()
        .iter()
        .map(|x| {
            (0..sites)
                .flat_map(|i| {
                    let grown =
                        HardCoreSpec::shifted(x, Some(i), None).is_some_and(|y| spec.contains(&y));
                    [if grown { spec.nu[i] } else { 0.0 }, x[i] as f64]
                })
                .collect()
        })
        .collect();
    let rep = MappingRepresentation::new(n, moves, rates)?;
    let weights: Vec<f64> = spec.configs().iter().map(|x| spec.weight(x)).collect();
    let space = StateSpace::new(spec.configs().iter().map(|x| label(x)).collect())?;
    let chain = chain_from_mapping(space, &rep, &weights)?;
    let epsilon0 = spec.epsilon0()?;
    let epsilon1 = spec.epsilon1()?;
    let details = HardCoreDetails {
        sites,
        epsilon0,
        epsilon1,
        bound: (epsilon0 <= 1.0).then_some(0.5 * (1.0 - epsilon0 + epsilon1)),
        creations: (0..sites).map(creation).collect(),
        annihilations: (0..sites).map(annihilation).collect(),
        max_degree,
    };
    Ok(Model {
        chain,
        rep,
        details: ModelDetails::HardCore(Box::new(details)),
    })
}

/// A simple undirected graph on vertices `0..n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl Graph {
    pub fn new(n: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for &(a, b) in &edges {
            if a >= n || b >= n {
                return Err(Error::BadParams(format!("edge ({a}, {b}) leaves 0..{n}")));
            }
            if a == b {
                return Err(Error::BadParams(format!("self-loop at {a}")));
            }
            if !seen.insert((a.min(b), a.max(b))) {
                return Err(Error::BadParams(format!("edge ({a}, {b}) is repeated")));
            }
        }
        Ok(Self { n, edges })
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbours(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        adj
    }

    pub fn max_degree(&self) -> usize {
        self.neighbours().iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn path(n: usize) -> Self {
        Self::new(n, (1..n).map(|i| (i - 1, i)).collect()).expect("path is simple")
    }

    pub fn cycle(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::BadParams("a cycle needs at least 3 vertices".into()));
        }
        Self::new(n, (0..n).map(|i| (i, (i + 1) % n)).collect())
    }

    pub fn complete(n: usize) -> Self {
        Self::new(
            n,
            (0..n)
                .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
                .collect(),
        )
        .expect("complete graph is simple")
    }

    /// The star with centre `0` and `leaves` leaves.
    pub fn star(leaves: usize) -> Self {
        Self::new(leaves + 1, (1..=leaves).map(|i| (0, i)).collect()).expect("star is simple")
    }

    /// Whether the occupied vertices of `x` form an independent set.
    pub fn is_independent(&self, x: &[u32]) -> bool {
        x.iter().all(|&n| n <= 1) && self.edges.iter().all(|&(a, b)| x[a] * x[b] == 0)
    }
}

/// Independent sets of `graph` with constant intensity `rho`.
pub fn graph_hardcore_spec(graph: &Graph, rho: f64) -> Result<HardCoreSpec> {
    HardCoreSpec::from_predicate(vec![rho; graph.vertex_count()], |x| graph.is_independent(x))
}

pub fn build_graph_hardcore(graph: &Graph, rho: f64) -> Result<Model> {
    let spec = graph_hardcore_spec(graph, rho)?;
    build_hardcore_with_degree(&spec, Some(graph.max_degree()))
}

/// Horizontal and vertical rods of `k + 1` vertices in `{0..L}^2`. Two rods
/// conflict when their vertex sets intersect.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Rods {
    l: usize,
    k: usize,
    rods: Vec<Vec<(usize, usize)>>,
}

impl Rods {
    pub fn new(l: usize, k: usize) -> Result<Self> {
        if k == 0 || k > l {
            return Err(Error::BadParams(format!(
                "rods need 1 <= k <= L, got k={k}, L={l}"
            )));
        }
        let mut rods = Vec::new();
        for u2 in 0..=l {
            for u1 in 0..=l - k {
                rods.push((0..=k).map(|s| (u1 + s, u2)).collect());
            }
        }
        for u1 in 0..=l {
            for u2 in 0..=l - k {
                rods.push((0..=k).map(|s| (u1, u2 + s)).collect());
            }
        }
        Ok(Self { l, k, rods })
    }

    pub fn rods(&self) -> &[Vec<(usize, usize)>] {
        &self.rods
    }

    pub fn conflict_graph(&self) -> Graph {
        let m = self.rods.len();
        let mut edges = Vec::new();
        for a in 0..m {
            for b in a + 1..m {
                if self.rods[a].iter().any(|v| self.rods[b].contains(v)) {
                    edges.push((a, b));
                }
            }
        }
        Graph::new(m, edges).expect("conflict graph is simple")
    }

    /// Index of the horizontal rod starting at `(u1, u2)`.
    pub fn horizontal(&self, u1: usize, u2: usize) -> usize {
        u2 * (self.l - self.k + 1) + u1
    }

    /// Index of the vertical rod starting at `(u1, u2)`.
    pub fn vertical(&self, u1: usize, u2: usize) -> usize {
        (self.l + 1) * (self.l - self.k + 1) + u1 * (self.l - self.k + 1) + u2
    }

    /// Evaluates the blocking sum at the configuration with the given rods
    /// occupied and site `i` among them, without enumerating the allowed set.
    pub fn epsilon0_at(&self, occupied: &[usize], i: usize, rho: f64) -> f64 {
        let graph = self.conflict_graph();
        let mut x = vec![0u32; self.rods.len()];
        for &r in occupied {
            x[r] = 1;
        }
        (0..x.len())
            .filter(|&j| j != i)
            .filter(|&j| {
                let mut swapped = x.clone();
                swapped[i] -= 1;
                swapped[j] += 1;
                let mut added = x.clone();
                added[j] += 1;
                graph.is_independent(&swapped) && !graph.is_independent(&added)
            })
            .count() as f64
            * rho
    }
}

pub fn rods_spec(l: usize, k: usize, rho: f64) -> Result<HardCoreSpec> {
    graph_hardcore_spec(&Rods::new(l, k)?.conflict_graph(), rho)
}

pub fn build_rods(l: usize, k: usize, rho: f64) -> Result<Model> {
    build_graph_hardcore(&Rods::new(l, k)?.conflict_graph(), rho)
}
