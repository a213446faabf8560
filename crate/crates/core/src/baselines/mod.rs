//! Reference algorithms: the accumulative greedy broadcast and one-parent
//! game variants.

mod greedy;

pub use greedy::{greedy_mrc, GreedyOutcome, GreedyState};

use crate::cost::Scheme;
use crate::error::Result;
use crate::game::{run_to_ne, GameConfig, GameTrace};
use crate::model::Topology;

/// Best-response game where every node keeps a single parent.
pub fn opn_variants(topo: &Topology, scheme: Scheme) -> Result<GameTrace> {
    run_to_ne(topo, &GameConfig::new(scheme, false))
}
