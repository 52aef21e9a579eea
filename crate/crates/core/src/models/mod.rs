//! Builders for the example families: Ising models, hard-core gases and
//! walks on groups.

mod groups;
mod hardcore;
mod ising;
mod spec;
mod threshold;

pub use groups::{
    binomial, hypercube, k_cycles, symmetric_group_walk, CayleyDetails, MAX_SYMMETRIC_DEGREE,
};
pub use hardcore::{
    annihilation, build_graph_hardcore, build_hardcore, build_rods, creation, graph_hardcore_spec,
    rods_spec, Graph, HardCoreDetails, HardCoreSpec, Rods,
};
pub use ising::{
    build_curie_weiss, build_ising, build_lattice_ising, build_lattice_ising_spec,
    curie_weiss_c_star_stated, curie_weiss_epsilon, curie_weiss_limit_epsilon, curie_weiss_spec,
    lattice_c_star_stated, lattice_epsilon_stated, FamilyConstants, IsingDetails, IsingSpec,
    Lattice,
};
pub use spec::ModelSpec;
pub use threshold::{ising_threshold, EpsilonFamily, Threshold, BETA_CAP, THRESHOLD_TOL};

use crate::cayley::CayleyWalk;
use crate::chain::MarkovChain;
use crate::mapping::MappingRepresentation;

/// A built chain, its mapping representation and family-specific data.
#[derive(Debug, Clone)]
pub struct Model {
    pub chain: MarkovChain,
    pub rep: MappingRepresentation,
    pub details: ModelDetails,
}

#[derive(Debug, Clone)]
pub enum ModelDetails {
    Generic,
    Ising(Box<IsingDetails>),
    HardCore(Box<HardCoreDetails>),
    Cayley {
        walk: Box<CayleyWalk>,
        /// Present for walks generated by all k-cycles of `S_n`.
        cycles: Option<CayleyDetails>,
    },
}
