use serde::{Deserialize, Serialize};

use super::GameConfig;
use crate::cost::{CostLedger, Scheme};
use crate::error::{Error, Result};
use crate::model::{ActionProfile, NetworkState, NodeId};

/// One accepted best-response move.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Move {
    pub round: usize,
    pub node: NodeId,
    pub old_cost: f64,
    pub new_cost: f64,
    /// Network power before and after the move.
    pub potential_before: f64,
    pub potential_after: f64,
}

/// Outcome of a best-response run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GameTrace {
    pub algorithm: String,
    pub scheme: Scheme,
    pub rounds: usize,
    pub converged: bool,
    pub moves: Vec<Move>,
    pub profile: ActionProfile,
    pub ledger: CostLedger,
    pub p_net_tot_mw: f64,
    pub p_net_tx_mw: f64,
    pub n_slots: usize,
    pub avg_pns_per_cn: f64,
}

impl GameTrace {
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn new(
        cfg: &GameConfig,
        rounds: usize,
        moves: Vec<Move>,
        converged: bool,
        profile: ActionProfile,
        state: &NetworkState,
        ledger: CostLedger,
        source: NodeId,
    ) -> Self {
        Self {
            algorithm: cfg.label(),
            scheme: cfg.scheme,
            rounds,
            converged,
            moves,
            profile,
            ledger,
            p_net_tot_mw: state.p_net_tot(),
            p_net_tx_mw: state.p_net_tx(),
            n_slots: state.schedule.n_slots(),
            avg_pns_per_cn: state.avg_pns_per_cn(source),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Per-move CSV: `round,node,old_cost,new_cost,potential_before,potential_after`.
    pub fn write_moves_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "round",
            "node",
            "old_cost",
            "new_cost",
            "potential_before",
            "potential_after",
        ])?;
        for m in &self.moves {
            w.write_record([
                m.round.to_string(),
                m.node.to_string(),
                format!("{:.9e}", m.old_cost),
                format!("{:.9e}", m.new_cost),
                format!("{:.9e}", m.potential_before),
                format!("{:.9e}", m.potential_after),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }
}

/// Result of re-checking every node's decision.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub certified: bool,
    /// Node with the largest improvement, when it exceeds the tolerance.
    pub worst_node: Option<NodeId>,
    pub worst_improvement: f64,
}
