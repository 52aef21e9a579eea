//! Declarative model descriptions read from JSON.

use serde::{Deserialize, Serialize};

use crate::cayley::{CayleyWalk, Permutation};
use crate::document::ChainDocument;
use crate::error::{Error, Result};

use super::groups::{hypercube, symmetric_group_walk};
use super::hardcore::{build_graph_hardcore, build_hardcore, build_rods, Graph, HardCoreSpec};
use super::ising::{
    build_curie_weiss, build_ising, build_lattice_ising, build_lattice_ising_spec,
    curie_weiss_spec, IsingSpec, Lattice,
};
use super::threshold::EpsilonFamily;
use super::{Model, ModelDetails};

/// A model family with its parameters, tagged by `"type"`.
///
/// ```
/// use curvlab::models::ModelSpec;
/// let spec = ModelSpec::from_json(r#"{"type": "curie_weiss", "n": 4, "beta": 0.1}"#).unwrap();
/// let model = spec.build().unwrap();
/// assert_eq!(model.chain.len(), 16);
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ModelSpec {
    Ising {
        couplings: Vec<Vec<f64>>,
        beta: f64,
    },
    CurieWeiss {
        n: usize,
        beta: f64,
    },
    /// Either explicit `sites` or the block `{0..side-1}^d`.
    LatticeIsing {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        sites: Option<Vec<Vec<i64>>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        d: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        side: Option<usize>,
        beta: f64,
    },
    HardcoreGraph {
        vertices: usize,
        edges: Vec<(usize, usize)>,
        rho: f64,
    },
    Rods {
        #[serde(rename = "L")]
        l: usize,
        k: usize,
        rho: f64,
    },
    /// Intensities and the explicit allowed set.
    Hardcore {
        nu: Vec<f64>,
        configs: Vec<Vec<u32>>,
    },
    SymmetricGroup {
        n: usize,
        k: usize,
    },
    Hypercube {
        n: usize,
        #[serde(default = "one")]
        c: f64,
    },
    /// Permutation generators (image vectors) with a constant rate.
    Cayley {
        generators: Vec<Vec<usize>>,
        rate: f64,
    },
    Chain(ChainDocument),
}

fn one() -> f64 {
    1.0
}

impl ModelSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("model specs always serialize")
    }

    fn lattice(
        sites: &Option<Vec<Vec<i64>>>,
        d: Option<usize>,
        side: Option<usize>,
    ) -> Result<Lattice> {
        match (sites, d, side) {
            (Some(sites), None, None) => Lattice::new(sites.clone()),
            (None, Some(d), Some(side)) => Lattice::block(d, side),
            _ => Err(Error::BadParams(
                "lattice_ising needs either \"sites\" or both \"d\" and \"side\"".into(),
            )),
        }
    }

    pub fn build(&self) -> Result<Model> {
        match self {
            Self::Ising { couplings, beta } => {
                build_ising(&IsingSpec::new(couplings.clone(), *beta)?)
            }
            Self::CurieWeiss { n, beta } => build_curie_weiss(*n, *beta),
            Self::LatticeIsing {
                sites,
                d,
                side,
                beta,
            } => build_lattice_ising(&Self::lattice(sites, *d, *side)?, *beta),
            Self::HardcoreGraph {
                vertices,
                edges,
                rho,
            } => build_graph_hardcore(&Graph::new(*vertices, edges.clone())?, *rho),
            Self::Rods { l, k, rho } => build_rods(*l, *k, *rho),
            Self::Hardcore { nu, configs } => {
                build_hardcore(&HardCoreSpec::new(nu.clone(), configs.clone())?)
            }
            Self::SymmetricGroup { n, k } => symmetric_group_walk(*n, *k),
            Self::Hypercube { n, c } => hypercube(*n, *c),
            Self::Cayley { generators, rate } => {
                let gens = generators
                    .iter()
                    .map(|g| Permutation::new(g.clone()))
                    .collect::<Result<Vec<_>>>()?;
                let walk = CayleyWalk::new(gens, None, *rate, None)?;
                Ok(Model {
                    chain: walk.chain.clone(),
                    rep: walk.rep.clone(),
                    details: ModelDetails::Cayley {
                        walk: Box::new(walk),
                        cycles: None,
                    },
                })
            }
            Self::Chain(doc) => {
                let (chain, rep) = doc.build()?;
                Ok(Model {
                    chain,
                    rep,
                    details: ModelDetails::Generic,
                })
            }
        }
    }

    pub fn beta(&self) -> Option<f64> {
        match self {
            Self::Ising { beta, .. }
            | Self::CurieWeiss { beta, .. }
            | Self::LatticeIsing { beta, .. } => Some(*beta),
            _ => None,
        }
    }

    /// The same family at another inverse temperature.
    pub fn with_beta(&self, b: f64) -> Result<Self> {
        let mut out = self.clone();
        match &mut out {
            Self::Ising { beta, .. }
            | Self::CurieWeiss { beta, .. }
            | Self::LatticeIsing { beta, .. } => *beta = b,
            _ => return Err(Error::BadParams("model has no inverse temperature".into())),
        }
        Ok(out)
    }

    /// The exact Ising spec underlying a temperature-dependent model.
    pub fn ising_spec(&self) -> Result<IsingSpec> {
        match self {
            Self::Ising { couplings, beta } => IsingSpec::new(couplings.clone(), *beta),
            Self::CurieWeiss { n, beta } => curie_weiss_spec(*n, *beta),
            Self::LatticeIsing {
                sites,
                d,
                side,
                beta,
            } => build_lattice_ising_spec(&Self::lattice(sites, *d, *side)?, *beta),
            _ => Err(Error::BadParams("model has no inverse temperature".into())),
        }
    }

    /// The closed-form `epsilon(beta)` stated for the family, if any.
    pub fn stated_family(&self) -> Option<EpsilonFamily> {
        match self {
            Self::CurieWeiss { n, .. } => Some(EpsilonFamily::CurieWeiss { n: *n }),
            Self::LatticeIsing { sites, d, side, .. } => Self::lattice(sites, *d, *side)
                .ok()
                .map(|l| EpsilonFamily::Lattice { d: l.dimension() }),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_family_parses_and_builds() {
        let texts = [
            r#"{"type": "ising", "couplings": [[0, 0.25], [0.25, 0]], "beta": 1}"#,
            r#"{"type": "curie_weiss", "n": 3, "beta": 0.2}"#,
            r#"{"type": "lattice_ising", "d": 2, "side": 2, "beta": 0.05}"#,
            r#"{"type": "lattice_ising", "sites": [[0], [1], [2]], "beta": 0.05}"#,
            r#"{"type": "hardcore_graph", "vertices": 4, "edges": [[0, 1], [0, 2], [0, 3]], "rho": 0.1}"#,
            r#"{"type": "rods", "L": 3, "k": 2, "rho": 0.05}"#,
            r#"{"type": "hardcore", "nu": [0.5], "configs": [[0], [1], [2]]}"#,
            r#"{"type": "symmetric_group", "n": 4, "k": 2}"#,
            r#"{"type": "hypercube", "n": 3}"#,
            r#"{"type": "cayley", "generators": [[1, 0, 2], [0, 2, 1], [2, 1, 0]], "rate": 0.5}"#,
            r#"{"type": "chain", "states": ["a", "b"], "moves": [{"perm": [1, 0], "inverse": 0}], "rates": [[2.0], [1.0]], "pi": [1.0, 2.0]}"#,
        ];
        for text in texts {
            let spec = ModelSpec::from_json(text).unwrap_or_else(|e| panic!("{text}: {e}"));
            spec.build().unwrap_or_else(|e| panic!("{text}: {e}"));
            assert_eq!(ModelSpec::from_json(&spec.to_json()).unwrap(), spec);
        }
    }

    #[test]
    fn beta_rewrites() {
        let spec = ModelSpec::from_json(r#"{"type": "curie_weiss", "n": 3, "beta": 0.2}"#).unwrap();
        assert_eq!(spec.with_beta(0.4).unwrap().beta(), Some(0.4));
        let hc = ModelSpec::from_json(r#"{"type": "hypercube", "n": 2}"#).unwrap();
        assert!(hc.with_beta(0.4).is_err());
        assert_eq!(hc.beta(), None);
    }

    #[test]
    fn unknown_type_is_a_parse_error() {
        assert!(matches!(
            ModelSpec::from_json(r#"{"type": "potts"}"#),
            Err(Error::Parse(_))
        ));
        assert!(matches!(
            ModelSpec::from_json(r#"{"type": "lattice_ising", "d": 2, "beta": 0.1}"#)
                .unwrap()
                .build(),
            Err(Error::BadParams(_))
        ));
    }
}
