//! JSON form of a chain together with its mapping representation.
//!
//! ```json
//! {
//!   "states": ["a", "b"],
//!   "moves": [{"perm": [1, 0], "inverse": 0}],
//!   "rates": [[2.0], [1.0]],
//!   "pi": [1.0, 2.0]
//! }
//! ```
//!
//! `perm[x]` is the image of state `x` under the move, or `null` when the
//! move leaves the state space. `rates[x][d]` is the rate of move `d` at
//! `x`. `pi` may be unnormalized. An optional dense `q` matrix is checked
//! against the rates when present; its diagonal is ignored.

use serde::{Deserialize, Serialize};

use crate::chain::{MarkovChain, StateSpace};
use crate::error::{Error, Result};
use crate::mapping::{
    chain_from_mapping, check_generator_consistency, MappingRepresentation, Move,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MoveDocument {
    pub perm: Vec<Option<usize>>,
    pub inverse: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainDocument {
    pub states: Vec<String>,
    pub moves: Vec<MoveDocument>,
    pub rates: Vec<Vec<f64>>,
    pub pi: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<Vec<Vec<f64>>>,
}

impl ChainDocument {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("documents always serialize")
    }

    pub fn build(&self) -> Result<(MarkovChain, MappingRepresentation)> {
        let n = self.states.len();
        let moves = self
            .moves
            .iter()
            .map(|m| {
                let mv = Move::new(m.perm.clone(), m.inverse);
                match &m.name {
                    Some(name) => mv.with_name(name.clone()),
                    None => mv,
                }
            })
            .collect();
        let rep = MappingRepresentation::new(n, moves, self.rates.clone())?;
        let chain = chain_from_mapping(StateSpace::new(self.states.clone())?, &rep, &self.pi)?;
        if let Some(q) = &self.q {
            // the diagonal of a generator matrix carries no information here
            let mut off = q.clone();
            for (x, row) in off.iter_mut().enumerate() {
                if let Some(v) = row.get_mut(x) {
                    *v = 0.0;
                }
            }
            let given = MarkovChain::from_dense(StateSpace::indexed(n)?, &off, &self.pi)?;
            check_generator_consistency(&given, &rep)?;
        }
        Ok((chain, rep))
    }

    pub fn from_parts(chain: &MarkovChain, rep: &MappingRepresentation) -> Self {
        Self {
            states: chain.space().labels().to_vec(),
            moves: rep
                .moves()
                .iter()
                .map(|m| MoveDocument {
                    perm: m.map().to_vec(),
                    inverse: m.inverse(),
                    name: m.name().map(str::to_owned),
                })
                .collect(),
            rates: rep.rate_rows(),
            pi: chain.pi().to_vec(),
            q: None,
        }
    }
}
