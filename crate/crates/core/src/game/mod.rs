//! Decentralized best-response dynamics over parent choices and requests.
//!
//! Nodes join one after another (closest to the source first), then take
//! turns re-optimizing until a full sweep changes nothing.

mod trace;

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use trace::{Certificate, GameTrace, Move};

use crate::cost::{ledger, node_cost, Scheme};
use crate::error::{Error, Result};
pub use crate::exact::SnrMode;
use crate::exact::{solve_node_decision, Candidate, NodeDecisionInput};
use crate::model::{action_set, hop_ranks, ActionProfile, HopRank, NetworkState, NodeId, Topology};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum OrderPolicy {
    /// Ascending node id every sweep.
    RoundRobin,
    /// Fresh permutation every sweep from a ChaCha8 stream of `seed`.
    RandomPermutation { seed: u64 },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GameConfig {
    pub scheme: Scheme,
    /// Without MRC every node keeps a single parent.
    pub mrc_enabled: bool,
    /// Cap on parents per node; `None` is unlimited.
    pub w_max: Option<usize>,
    pub max_rounds: usize,
    pub eps_improve: f64,
    pub order_policy: OrderPolicy,
    pub snr_mode: SnrMode,
}

impl GameConfig {
    pub fn new(scheme: Scheme, mrc_enabled: bool) -> Self {
        Self {
            scheme,
            mrc_enabled,
            w_max: None,
            max_rounds: 50,
            eps_improve: 1e-9,
            order_policy: OrderPolicy::RoundRobin,
            snr_mode: SnrMode::Equality,
        }
    }

    /// Parent cap in force.
    pub fn effective_w_max(&self) -> Option<usize> {
        if self.mrc_enabled {
            self.w_max
        } else {
            Some(1)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.w_max == Some(0) {
            return Err(Error::Config("w_max must be at least 1".into()));
        }
        if !(self.eps_improve > 0.0) {
            return Err(Error::Config("eps_improve must be > 0".into()));
        }
        Ok(())
    }

    /// Short label such as `MC-MRC` or `SV-OPN`.
    pub fn label(&self) -> String {
        let kind = if self.effective_w_max() == Some(1) {
            "OPN"
        } else {
            "MRC"
        };
        format!("{}-{kind}", self.scheme)
    }
}

/// Result of one best-response computation.
#[derive(Clone, Debug)]
pub struct Response {
    pub action: BTreeMap<NodeId, f64>,
    /// Node cost after adopting `action`, others unchanged.
    pub cost: f64,
}

/// Decision input of node `i` against the current profile.
pub fn decision_input(
    topo: &Topology,
    profile: &ActionProfile,
    ranks: &[HopRank],
    i: NodeId,
    cfg: &GameConfig,
) -> NodeDecisionInput {
    let candidates = action_set(topo, ranks, i)
        .into_iter()
        .map(|j| Candidate {
            pn: j,
            gain: topo.gain(i, j),
            others: profile.requests_to_except(j, i),
        })
        .collect();
    NodeDecisionInput {
        candidates,
        phys: topo.phys().clone(),
        scheme: cfg.scheme,
        w_max: cfg.effective_w_max(),
        snr_mode: cfg.snr_mode,
    }
}

/// Cost-minimizing action of node `i` with everybody else frozen; `None` if
/// no candidate set reaches the threshold.
pub fn best_response(
    topo: &Topology,
    profile: &ActionProfile,
    ranks: &[HopRank],
    i: NodeId,
    cfg: &GameConfig,
) -> Result<Option<Response>> {
    let input = decision_input(topo, profile, ranks, i, cfg);
    let Some(decision) = solve_node_decision(&input)? else {
        return Ok(None);
    };
    let mut trial = profile.clone();
    trial.set_action(i, decision.requests.clone());
    let cost = node_cost(cfg.scheme, i, &trial, topo.phys());
    Ok(Some(Response {
        action: decision.requests,
        cost,
    }))
}

/// Receivers sorted by distance to the source, ties by id.
fn join_order(topo: &Topology) -> Vec<NodeId> {
    let s = topo.source();
    let mut order: Vec<NodeId> = topo.receivers().collect();
    order.sort_by(|&a, &b| {
        topo.distance(a, s)
            .total_cmp(&topo.distance(b, s))
            .then(a.cmp(&b))
    });
    order
}

/// Sequential joining: nodes take their best response in order of distance to
/// the source; passes repeat until everybody is connected.
pub fn initial_join(topo: &Topology, cfg: &GameConfig) -> Result<(ActionProfile, Vec<HopRank>)> {
    cfg.validate()?;
    let mut profile = ActionProfile::empty(topo.n_nodes());
    let mut ranks = hop_ranks(&profile, topo.source())?;
    let order = join_order(topo);
    loop {
        let mut progress = false;
        for &i in &order {
            if ranks[i].is_some() {
                continue;
            }
            if let Some(r) = best_response(topo, &profile, &ranks, i, cfg)? {
                profile.set_action(i, r.action);
                ranks = hop_ranks(&profile, topo.source())?;
                progress = true;
            }
        }
        if ranks.iter().all(Option::is_some) {
            return Ok((profile, ranks));
        }
        if !progress {
            let missing = ranks.iter().filter(|r| r.is_none()).count();
            return Err(Error::Config(format!(
                "{missing} nodes cannot join the broadcast"
            )));
        }
    }
}

fn sweep_order(topo: &Topology, cfg: &GameConfig, round: usize) -> Vec<NodeId> {
    let mut order: Vec<NodeId> = topo.receivers().collect();
    if let OrderPolicy::RandomPermutation { seed } = cfg.order_policy {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(round as u64);
        order.shuffle(&mut rng);
    }
    order
}

/// Joins every node, then runs best-response sweeps until a sweep accepts no
/// move or `max_rounds` sweeps have run.
pub fn run_to_ne(topo: &Topology, cfg: &GameConfig) -> Result<GameTrace> {
    let (profile, ranks) = initial_join(topo, cfg)?;
    run_from(topo, cfg, profile, ranks)
}

/// Best-response sweeps from a given complete profile.
pub fn run_from(
    topo: &Topology,
    cfg: &GameConfig,
    mut profile: ActionProfile,
    mut ranks: Vec<HopRank>,
) -> Result<GameTrace> {
    let phys = topo.phys();
    let mut moves = Vec::new();
    let mut rounds = 0;
    let mut converged = false;
    let mut potential = NetworkState::compute(&profile, topo)?.p_net_tot();
    while rounds < cfg.max_rounds {
        rounds += 1;
        let mut accepted = 0;
        for i in sweep_order(topo, cfg, rounds) {
            let Some(r) = best_response(topo, &profile, &ranks, i, cfg)? else {
                continue;
            };
            let old = node_cost(cfg.scheme, i, &profile, phys);
            let joining = profile.pn_count(i) == 0;
            if !(joining || old - r.cost > cfg.eps_improve) {
                continue;
            }
            profile.set_action(i, r.action);
            ranks = hop_ranks(&profile, topo.source())?;
            let after = NetworkState::compute(&profile, topo)?.p_net_tot();
            moves.push(Move {
                round: rounds,
                node: i,
                old_cost: old,
                new_cost: r.cost,
                potential_before: potential,
                potential_after: after,
            });
            potential = after;
            accepted += 1;
        }
        if accepted == 0 {
            converged = true;
            break;
        }
    }
    let state = NetworkState::compute(&profile, topo)?;
    let ledger = ledger(&profile, cfg.scheme, phys)?;
    Ok(GameTrace::new(
        cfg,
        rounds,
        moves,
        converged,
        profile,
        &state,
        ledger,
        topo.source(),
    ))
}

/// Re-solves every node's decision against the fixed profile.
pub fn certify_ne(
    topo: &Topology,
    profile: &ActionProfile,
    cfg: &GameConfig,
) -> Result<Certificate> {
    let ranks = hop_ranks(profile, topo.source())?;
    let mut worst: Option<(NodeId, f64)> = None;
    for i in topo.receivers() {
        let Some(r) = best_response(topo, profile, &ranks, i, cfg)? else {
            continue;
        };
        let gain = if profile.pn_count(i) == 0 {
            f64::INFINITY
        } else {
            node_cost(cfg.scheme, i, profile, topo.phys()) - r.cost
        };
        if worst.is_none_or(|(_, g)| gain > g) {
            worst = Some((i, gain));
        }
    }
    let (node, improvement) = worst.unwrap_or((topo.source(), 0.0));
    Ok(Certificate {
        certified: improvement <= cfg.eps_improve,
        worst_node: (improvement > cfg.eps_improve).then_some(node),
        worst_improvement: improvement.max(0.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::PhysParams;

    fn line(xs: &[f64]) -> Topology {
        let pos = xs.iter().map(|&x| [x, 0.0]).collect();
        Topology::from_positions(pos, 0, 250.0, PhysParams::default().with_circuitry(10.0)).unwrap()
    }

    #[test]
    fn two_nodes_converge_in_one_sweep() {
        let t = line(&[0.0, 80.0]);
        for scheme in [Scheme::Mc, Scheme::Sv] {
            let tr = run_to_ne(&t, &GameConfig::new(scheme, true)).unwrap();
            assert!(tr.converged);
            assert_eq!(tr.rounds, 1);
            let p = tr.profile.parents(1)[&0];
            assert!((p - t.unicast_power(1, 0)).abs() < 1e-9);
        }
    }

    #[test]
    fn first_joiner_picks_the_source() {
        let t = line(&[0.0, 60.0, 120.0]);
        let cfg = GameConfig::new(Scheme::Mc, true);
        let ranks = hop_ranks(&ActionProfile::empty(3), 0).unwrap();
        assert_eq!(action_set(&t, &ranks, 1), vec![0]);
        let (p, r) = initial_join(&t, &cfg).unwrap();
        assert!(r.iter().all(Option::is_some));
        assert_eq!(p.parents(1).keys().copied().collect::<Vec<_>>(), vec![0]);
    }

    #[test]
    fn suboptimal_profile_is_not_certified() {
        // the source's unicast to node 1 already covers node 2
        let t = line(&[0.0, 100.0, 95.0]);
        let cfg = GameConfig::new(Scheme::Mc, true);
        let mut p = ActionProfile::empty(3);
        p.set_action(1, BTreeMap::from([(0, t.unicast_power(1, 0))]));
        // node 2 pays a fresh unicast from node 1 instead
        p.set_action(2, BTreeMap::from([(1, t.unicast_power(2, 1))]));
        let c = certify_ne(&t, &p, &cfg).unwrap();
        assert!(!c.certified);
        assert_eq!(c.worst_node, Some(2));
        assert!(c.worst_improvement > 0.0);
    }

    #[test]
    fn converged_runs_certify() {
        let phys = PhysParams::default().with_circuitry(10.0);
        for seed in 0..4 {
            let t = Topology::generate(8, 250.0, seed, &phys).unwrap();
            for scheme in [Scheme::Mc, Scheme::Sv] {
                for mrc in [true, false] {
                    let cfg = GameConfig::new(scheme, mrc);
                    let tr = run_to_ne(&t, &cfg).unwrap();
                    assert!(tr.converged);
                    assert!(certify_ne(&t, &tr.profile, &cfg).unwrap().certified);
                    if scheme == Scheme::Mc {
                        for m in &tr.moves {
                            assert!(m.potential_after <= m.potential_before + 1e-9);
                        }
                    }
                }
            }
        }
    }
}
