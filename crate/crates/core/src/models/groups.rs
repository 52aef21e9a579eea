//! Walks on groups: k-cycles on the symmetric group and the hypercube.

use serde::Serialize;

use crate::cayley::{CayleyWalk, Permutation};
use crate::chain::{state_cap_from_env, StateSpace};
use crate::error::{Error, Result};
use crate::mapping::{chain_from_mapping, MappingRepresentation, Move};

use super::{Model, ModelDetails};

/// Largest `n` accepted for walks on `S_n`.
pub const MAX_SYMMETRIC_DEGREE: usize = 7;

/// Extra data kept for walks on the symmetric group.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CayleyDetails {
    pub n: usize,
    pub k: usize,
    /// Number of generators actually enumerated, `C(n,k) (k-1)!`.
    pub generator_count: usize,
    /// The binomial `C(n,k)` used as the inverse rate.
    pub binomial: u64,
    pub rate: f64,
    /// Order of the generated group; `n!/2` for odd `k`, which only reach
    /// the even permutations.
    pub group_order: usize,
    pub full_group: bool,
    /// `2 / C(n,k)`.
    pub bound_stated: f64,
}

pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    (0..k.min(n - k)).fold(1u64, |acc, i| acc * (n - i) as u64 / (i + 1) as u64)
}

fn factorial(n: usize) -> usize {
    (1..=n).product()
}

/// All `k`-cycles on `0..n`, each listed once.
pub fn k_cycles(n: usize, k: usize) -> Vec<Permutation> {
    let mut out = Vec::new();
    let mut subset: Vec<usize> = (0..k).collect();
    loop {
        // fix the smallest element first and order the rest in every way
        let mut rest = subset[1..].to_vec();
        permutations(&mut rest, 0, &mut |order| {
            let mut cycle = vec![subset[0]];
            cycle.extend_from_slice(order);
            out.push(Permutation::cycle(n, &cycle).expect("distinct points in range"));
        });
        // next subset in lexicographic order
        let Some(pos) = (0..k).rev().find(|&i| subset[i] < n - k + i) else {
            break;
        };
        subset[pos] += 1;
        for i in pos + 1..k {
            subset[i] = subset[i - 1] + 1;
        }
    }
    out
}

fn permutations(items: &mut [usize], start: usize, emit: &mut impl FnMut(&[usize])) {
    if start + 1 >= items.len() {
        emit(items);
        return;
    }
    for i in start..items.len() {
        items.swap(start, i);
        permutations(items, start + 1, emit);
        items.swap(start, i);
    }
}

/// The walk on `S_n` generated by all `k`-cycles, with constant rate
/// `1 / C(n,k)` and uniform stationary measure.
pub fn symmetric_group_walk(n: usize, k: usize) -> Result<Model> {
    if !(1 < k && k < n) {
        return Err(Error::BadParams(format!(
            "need 1 < k < n, got n={n}, k={k}"
        )));
    }
    if n > MAX_SYMMETRIC_DEGREE {
        return Err(Error::BadParams(format!(
            "n={n} exceeds the supported degree {MAX_SYMMETRIC_DEGREE}"
        )));
    }
    let generators = k_cycles(n, k);
    let b = binomial(n, k);
    let rate = 1.0 / b as f64;
    let generator_count = generators.len();
    let walk = CayleyWalk::new(generators, None, rate, None)?;
    let group_order = walk.group.order();
    let details = CayleyDetails {
        n,
        k,
        generator_count,
        binomial: b,
        rate,
        group_order,
        full_group: group_order == factorial(n),
        bound_stated: 2.0 * rate,
    };
    Ok(Model {
        chain: walk.chain.clone(),
        rep: walk.rep.clone(),
        details: ModelDetails::Cayley {
            walk: Box::new(walk),
            cycles: Some(details),
        },
    })
}

/// Independent flips of `n` bits at constant rate `c`; states are bitmasks.
pub fn hypercube(n: usize, c: f64) -> Result<Model> {
    if n == 0 || n > 20 {
        return Err(Error::BadParams(format!(
            "hypercube dimension {n} must be in 1..=20"
        )));
    }
    let size = 1usize << n;
    let cap = state_cap_from_env();
    if size > cap {
        return Err(Error::TooLarge { size, cap });
    }
    let moves = (0..n)
        .map(|i| {
            Move::permutation((0..size).map(|x| x ^ (1 << i)).collect(), i)
                .with_name(format!("flip{i}"))
        })
        .collect();
    let rep = MappingRepresentation::new(size, moves, vec![vec![c; n]; size])?;
    let labels = (0..size)
        .map(|x| {
            (0..n)
                .map(|i| if x >> i & 1 == 1 { '1' } else { '0' })
                .collect()
        })
        .collect();
    let space = StateSpace::new(labels)?;
    let chain = chain_from_mapping(space, &rep, &vec![1.0; size])?;
    Ok(Model {
        chain,
        rep,
        details: ModelDetails::Generic,
    })
}
