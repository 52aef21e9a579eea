//! Entropic Ricci curvature lower bounds for finite reversible Markov chains.
//!
//! A chain is described by a [`mapping::MappingRepresentation`]: a set of
//! moves with an inverse map and a rate for every state. From it the crate
//! evaluates the discrete transport calculus (the action 𝒜 and the Hessian
//! form ℬ), the curvature criteria built on the `q` and `q*` tables, and the
//! example families in [`models`].

// Index loops mirror the formulas; `!(a >= b)` is how NaN gets rejected.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod calculus;
pub mod cayley;
pub mod chain;
pub mod criteria;
pub mod document;
pub mod error;
pub mod mapping;
pub mod models;
pub mod numeric;
pub mod verify;

#[cfg(test)]
pub(crate) mod testing;

pub use calculus::{Density, Potential};
pub use chain::{MarkovChain, StateSpace};
pub use criteria::{Criterion, CurvatureCertificate, Intermediates};
pub use error::{Error, Result};
pub use mapping::{MappingRepresentation, Move};

/// The guide's snippets, compiled and run as doc-tests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    struct Introduction;
    #[doc = include_str!("../../../book/src/chains.md")]
    struct Chains;
    #[doc = include_str!("../../../book/src/calculus.md")]
    struct Calculus;
    #[doc = include_str!("../../../book/src/criteria.md")]
    struct Criteria;
    #[doc = include_str!("../../../book/src/models.md")]
    struct Models;
    #[doc = include_str!("../../../book/src/verification.md")]
    struct Verification;
    #[doc = include_str!("../../../book/src/cli.md")]
    struct Cli;
}
