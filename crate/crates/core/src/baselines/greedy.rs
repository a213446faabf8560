//! Centralized accumulative broadcast: repeatedly pick the transmission that
//! buys normalized SNR at the lowest radio-link power per unit, until every
//! node has decoded. Circuitry power is ignored while choosing and only added
//! in the reported totals.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{NodeId, Topology};

/// Tolerance on "accumulated normalized SNR reached 1".
const DECODE_TOL: f64 = 1e-12;

/// Working state of the greedy.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GreedyState {
    pub decoded: Vec<bool>,
    /// Fraction of the decoding threshold gathered so far.
    pub accumulated_snr: Vec<f64>,
    /// Transmitters in order of their first selection, with final powers.
    pub transmissions: Vec<(NodeId, f64)>,
    /// Transmitters each node listened to before decoding.
    pub heard_from: Vec<Vec<NodeId>>,
    pub decode_order: Vec<NodeId>,
}

impl GreedyState {
    fn new(topo: &Topology) -> Self {
        let n = topo.n_nodes();
        let s = topo.source();
        let mut decoded = vec![false; n];
        decoded[s] = true;
        let mut accumulated_snr = vec![0.0; n];
        accumulated_snr[s] = 1.0;
        Self {
            decoded,
            accumulated_snr,
            transmissions: Vec::new(),
            heard_from: vec![Vec::new(); n],
            decode_order: vec![s],
        }
    }

    fn power_of(&self, j: NodeId) -> f64 {
        self.transmissions
            .iter()
            .find(|t| t.0 == j)
            .map_or(0.0, |t| t.1)
    }
}

/// Schedule and metrics of one greedy run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GreedyOutcome {
    pub state: GreedyState,
    /// Sum of radio-link powers: the greedy's own objective.
    pub raw_radio_mw: f64,
    /// Transmit power including circuitry.
    pub p_net_tx_mw: f64,
    /// Transmit plus reception power.
    pub p_net_tot_mw: f64,
    pub n_slots: usize,
    pub avg_pns_per_cn: f64,
}

struct Pick {
    tx: NodeId,
    level: f64,
    ratio: f64,
}

/// Runs the greedy on a connected topology. Only neighbor links carry SNR.
pub fn greedy_mrc(topo: &Topology) -> Result<GreedyOutcome> {
    let phys = topo.phys();
    let n = topo.n_nodes();
    let mut st = GreedyState::new(topo);
    // normalized SNR per mW from j at i
    let rate = |i: NodeId, j: NodeId| 1.0 / topo.unicast_power(i, j);

    while st.decode_order.len() < n {
        let mut best: Option<Pick> = None;
        for j in 0..n {
            if !st.decoded[j] {
                continue;
            }
            let current = st.power_of(j);
            let pending: Vec<NodeId> = topo
                .neighbors(j)
                .iter()
                .copied()
                .filter(|&i| !st.decoded[i])
                .collect();
            for &target in &pending {
                let deficit = 1.0 - st.accumulated_snr[target];
                let level = current + deficit / rate(target, j);
                if level > phys.p_max_mw * (1.0 + 1e-12) || level <= current {
                    continue;
                }
                let level = level.min(phys.p_max_mw);
                let extra = level - current;
                let delivered: f64 = pending
                    .iter()
                    .map(|&i| (extra * rate(i, j)).min(1.0 - st.accumulated_snr[i]))
                    .sum();
                if delivered <= 0.0 {
                    continue;
                }
                let ratio = extra / delivered;
                let better = match &best {
                    None => true,
                    Some(b) => {
                        ratio < b.ratio * (1.0 - 1e-12)
                            || (ratio <= b.ratio * (1.0 + 1e-12)
                                && (j < b.tx || (j == b.tx && level < b.level)))
                    }
                };
                if better {
                    best = Some(Pick {
                        tx: j,
                        level,
                        ratio,
                    });
                }
            }
        }
        let Some(pick) = best else {
            let missing = n - st.decode_order.len();
            return Err(Error::Domain(format!(
                "greedy stalled with {missing} nodes undecoded"
            )));
        };
        let j = pick.tx;
        let extra = pick.level - st.power_of(j);
        match st.transmissions.iter_mut().find(|t| t.0 == j) {
            Some(t) => t.1 = pick.level,
            None => st.transmissions.push((j, pick.level)),
        }
        for &i in topo.neighbors(j) {
            if st.decoded[i] {
                continue;
            }
            st.accumulated_snr[i] += extra * rate(i, j);
            if !st.heard_from[i].contains(&j) {
                st.heard_from[i].push(j);
            }
            if st.accumulated_snr[i] >= 1.0 - DECODE_TOL {
                st.accumulated_snr[i] = st.accumulated_snr[i].max(1.0);
                st.decoded[i] = true;
                st.decode_order.push(i);
            }
        }
    }

    let raw_radio_mw: f64 = st.transmissions.iter().map(|t| t.1).sum();
    let p_net_tx_mw = raw_radio_mw + phys.p_ct_mw * st.transmissions.len() as f64;
    let receptions: usize = st.heard_from.iter().map(Vec::len).sum();
    let p_net_tot_mw = p_net_tx_mw + phys.p_cr_mw * receptions as f64;
    let receivers = n - 1;
    Ok(GreedyOutcome {
        n_slots: st.transmissions.len(),
        avg_pns_per_cn: receptions as f64 / receivers as f64,
        raw_radio_mw,
        p_net_tx_mw,
        p_net_tot_mw,
        state: st,
    })
}
