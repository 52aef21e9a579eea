//! Permutation groups, random walks on their Cayley graphs and the
//! conjugacy-invariant curvature criterion.

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::chain::{MarkovChain, StateSpace};
use crate::criteria::{
    check_triple_budget, rate_ratio_beta, Criterion, CurvatureCertificate, Intermediates,
};
use crate::error::{Error, Result};
use crate::mapping::{chain_from_mapping, MappingRepresentation, Move};

/// Largest group the exhaustive conjugacy check will handle.
pub const GROUP_ORDER_CAP: usize = 10_000;

/// A permutation of `0..n`, stored as its image vector.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &i in &images {
            if i >= n || std::mem::replace(&mut seen[i], true) {
                return Err(Error::BadParams(format!("{images:?} is not a permutation")));
            }
        }
        Ok(Self(images))
    }

    pub fn identity(n: usize) -> Self {
        Self((0..n).collect())
    }

    /// The cycle `c[0] -> c[1] -> ... -> c[0]` on `0..n`.
    pub fn cycle(n: usize, cycle: &[usize]) -> Result<Self> {
        let mut images: Vec<usize> = (0..n).collect();
        for (i, &a) in cycle.iter().enumerate() {
            if a >= n {
                return Err(Error::BadParams(format!("cycle entry {a} out of range")));
            }
            images[a] = cycle[(i + 1) % cycle.len()];
        }
        Self::new(images)
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn images(&self) -> &[usize] {
        &self.0
    }

    /// `self ∘ other`, i.e. apply `other` first.
    pub fn compose(&self, other: &Self) -> Self {
        Self(other.0.iter().map(|&i| self.0[i]).collect())
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.0.len()];
        for (i, &j) in self.0.iter().enumerate() {
            inv[j] = i;
        }
        Self(inv)
    }

    pub fn is_involution(&self) -> bool {
        self.compose(self) == Self::identity(self.degree())
    }
}

/// The finite group generated by a set of permutations, with its elements
/// in breadth-first order from the identity.
#[derive(Debug, Clone)]
pub struct PermGroup {
    elements: Vec<Permutation>,
    index: HashMap<Permutation, usize>,
}

impl PermGroup {
    pub fn generated_by(generators: &[Permutation], cap: usize) -> Result<Self> {
        let n = generators
            .first()
            .ok_or_else(|| Error::BadParams("no generators".into()))?
            .degree();
        if generators.iter().any(|g| g.degree() != n) {
            return Err(Error::BadParams("generators act on different sets".into()));
        }
        let id = Permutation::identity(n);
        let mut elements = vec![id.clone()];
        let mut index = HashMap::from([(id, 0)]);
        let mut queue = VecDeque::from([0]);
        while let Some(i) = queue.pop_front() {
            for g in generators {
                let next = g.compose(&elements[i]);
                if !index.contains_key(&next) {
                    if elements.len() == cap {
                        return Err(Error::TooLarge { size: cap + 1, cap });
                    }
                    index.insert(next.clone(), elements.len());
                    queue.push_back(elements.len());
                    elements.push(next);
                }
            }
        }
        Ok(Self { elements, index })
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[Permutation] {
        &self.elements
    }

    pub fn index_of(&self, p: &Permutation) -> Option<usize> {
        self.index.get(p).copied()
    }
}

/// Left translation by `g` as a move on the group's elements.
fn left_translation(group: &PermGroup, g: &Permutation) -> Vec<usize> {
    group
        .elements()
        .iter()
        .map(|x| group.index_of(&g.compose(x)).expect("group is closed"))
        .collect()
}

/// A random walk on a Cayley graph: states are group elements and move
/// `delta` sends `x` to `delta x`.
#[derive(Debug, Clone)]
pub struct CayleyWalk {
    pub group: PermGroup,
    pub generators: Vec<Permutation>,
    pub chain: MarkovChain,
    pub rep: MappingRepresentation,
}

impl CayleyWalk {
    /// Builds the walk with `rates[x][d]` (or the constant `c` when `rates`
    /// is `None`) and stationary weights `pi` (uniform when `None`).
    pub fn new(
        generators: Vec<Permutation>,
        rates: Option<Vec<Vec<f64>>>,
        constant: f64,
        pi: Option<Vec<f64>>,
    ) -> Result<Self> {
        let group = PermGroup::generated_by(&generators, GROUP_ORDER_CAP)?;
        let mut ids: HashMap<&Permutation, usize> = HashMap::new();
        for (d, g) in generators.iter().enumerate() {
            if ids.insert(g, d).is_some() {
                return Err(Error::BadParams(format!("generator {d} is repeated")));
            }
        }
        let mut moves = Vec::with_capacity(generators.len());
        for (d, g) in generators.iter().enumerate() {
            let inverse = *ids.get(&g.inverse()).ok_or_else(|| {
                Error::BadParams(format!("the inverse of generator {d} is not a generator"))
            })?;
            moves.push(Move::permutation(left_translation(&group, g), inverse));
        }
        let order = group.order();
        let rates = rates.unwrap_or_else(|| vec![vec![constant; generators.len()]; order]);
        let rep = MappingRepresentation::new(order, moves, rates)?;
        let pi = pi.unwrap_or_else(|| vec![1.0 / order as f64; order]);
        let labels = group
            .elements()
            .iter()
            .map(|p| format!("{:?}", p.images()))
            .collect();
        let space = StateSpace::with_cap(labels, usize::MAX)?;
        let chain = chain_from_mapping(space, &rep, &pi)?;
        Ok(Self {
            group,
            generators,
            chain,
            rep,
        })
    }

    /// Checks `g delta g^-1 ∈ G` for every element `g` and generator `delta`,
    /// comparing permutations rather than ids. Returns the move id of each
    /// conjugate `g delta g^-1` for `g` ranging over the generators, indexed
    /// `[g][delta]`.
    pub fn conjugation_table(&self) -> Result<Vec<Vec<usize>>> {
        let ids: HashMap<&Permutation, usize> = self
            .generators
            .iter()
            .enumerate()
            .map(|(d, g)| (g, d))
            .collect();
        for (gi, g) in self.group.elements().iter().enumerate() {
            let g_inv = g.inverse();
            for (d, delta) in self.generators.iter().enumerate() {
                if !ids.contains_key(&g.compose(delta).compose(&g_inv)) {
                    return Err(Error::NotConjugacyInvariant {
                        generator: d,
                        conjugator: gi,
                    });
                }
            }
        }
        Ok(self
            .generators
            .iter()
            .map(|g| {
                let g_inv = g.inverse();
                self.generators
                    .iter()
                    .map(|delta| ids[&g.compose(delta).compose(&g_inv)])
                    .collect()
            })
            .collect())
    }
}

/// The criterion for conjugacy-invariant Cayley graphs. Uses the improved
/// `epsilon'` when every generator is an involution.
pub fn cayley_epsilon(walk: &CayleyWalk) -> Result<CurvatureCertificate> {
    let conj = walk.conjugation_table()?;
    let rep = &walk.rep;
    check_triple_budget(rep)?;
    let g = rep.n_moves();
    let involutive = rep.all_involutive();

    let mut alpha1 = f64::NEG_INFINITY;
    let mut alpha2: Option<f64> = None;
    for x in 0..rep.n_states() {
        for d in 0..g {
            let dx = rep.step(x, d).expect("group moves are total");
            if !rep.is_involutive(d) && rep.rate(x, d) > 0.0 {
                alpha1 = alpha1.max((rep.rate(dx, d) / rep.rate(x, d)).ln());
            }
            for e in 0..g {
                let cx = rep.rate(x, e);
                if e == d || rep.inverse(e) == d || cx == 0.0 {
                    continue;
                }
                let a = (rep.rate(dx, e) / cx)
                    .ln()
                    .max((rep.rate(dx, conj[d][e]) / cx).ln());
                alpha2 = Some(alpha2.map_or(a, |v| v.max(a)));
            }
        }
    }
    let beta = rate_ratio_beta(rep);
    let c_star = rep
        .min_positive_rate()
        .ok_or_else(|| Error::InvalidMapping("all rates are zero".into()))?;
    // With no pair delta outside {eta, eta^-1} the perturbation term is absent.
    let spread = alpha2.map_or(0.0, |a| (2.0 * a).exp_m1());
    let mut im = Intermediates {
        alpha2,
        beta: Some(beta),
        c_star: Some(c_star),
        ..Default::default()
    };
    let (criterion, epsilon) = if involutive {
        let eps = beta * (g as f64 - 1.0) * spread;
        im.epsilon_prime = Some(eps);
        (Criterion::CayleyInvolutive, eps)
    } else {
        let eps = alpha1.exp() + beta * (g as f64 - 2.0) * spread;
        im.alpha1 = Some(alpha1);
        im.epsilon = Some(eps);
        (Criterion::CayleyEpsilon, eps)
    };
    if epsilon > 1.0 {
        return Ok(CurvatureCertificate {
            criterion,
            intermediates: im,
            bound: None,
            valid: false,
            reason: Some(format!("epsilon = {epsilon} exceeds 1")),
        });
    }
    Ok(CurvatureCertificate {
        criterion,
        intermediates: im,
        bound: Some((1.0 - epsilon) * 2.0 * c_star),
        valid: true,
        reason: None,
    })
}
