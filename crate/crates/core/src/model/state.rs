use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};

use serde::{Deserialize, Serialize};

use super::{ActionProfile, HopRank, NodeId, PhysParams, Topology};
use crate::error::{Error, Result};

/// Hop-ranks recomputed from scratch: the source has rank 0, a node with
/// parents has one more than its highest-ranked parent, a node without
/// parents (or below an unreached parent) is unreached.
pub fn hop_ranks(profile: &ActionProfile, source: NodeId) -> Result<Vec<HopRank>> {
    let n = profile.n_nodes();
    if profile.pn_count(source) != 0 {
        return Err(Error::Invariant("source has parents".into()));
    }
    let children = profile.children();
    let mut pending: Vec<usize> = (0..n).map(|i| profile.pn_count(i)).collect();
    let mut ranks: Vec<HopRank> = vec![None; n];
    let mut queue: VecDeque<NodeId> = (0..n).filter(|&i| pending[i] == 0).collect();
    ranks[source] = Some(0);
    let mut done = 0;
    while let Some(u) = queue.pop_front() {
        done += 1;
        if u != source && profile.pn_count(u) > 0 {
            ranks[u] = rank_from_parents(profile, &ranks, u);
        }
        for &c in &children[u] {
            pending[c] -= 1;
            if pending[c] == 0 {
                queue.push_back(c);
            }
        }
    }
    if done != n {
        return Err(Error::Invariant(format!(
            "transmission graph has a cycle ({} nodes unresolved)",
            n - done
        )));
    }
    Ok(ranks)
}

fn rank_from_parents(profile: &ActionProfile, ranks: &[HopRank], i: NodeId) -> HopRank {
    let mut best = None::<u32>;
    for &j in profile.parents(i).keys() {
        let r = ranks[j]?;
        best = Some(best.map_or(r, |b| b.max(r)));
    }
    best.map(|b| b + 1)
}

/// Propagates a change of `changed`'s parents to its descendants in place.
/// Equivalent to [`hop_ranks`] on a DAG.
pub fn update_hop_ranks_from(
    ranks: &mut [HopRank],
    profile: &ActionProfile,
    source: NodeId,
    changed: NodeId,
) -> Result<()> {
    let n = profile.n_nodes();
    let children = profile.children();
    let mut queue = VecDeque::from([changed]);
    let mut budget = n * n + n;
    let mut first = true;
    while let Some(u) = queue.pop_front() {
        if budget == 0 {
            return Err(Error::Invariant(
                "hop-rank propagation does not settle (cycle)".into(),
            ));
        }
        budget -= 1;
        let new = if u == source {
            Some(0)
        } else if profile.pn_count(u) == 0 {
            None
        } else {
            rank_from_parents(profile, ranks, u)
        };
        if new != ranks[u] || first {
            ranks[u] = new;
            queue.extend(children[u].iter().copied());
        }
        first = false;
    }
    Ok(())
}

/// Candidate parents of `i`: connected neighbors whose hop-rank does not
/// exceed that of `i`.
pub fn action_set(topo: &Topology, ranks: &[HopRank], i: NodeId) -> Vec<NodeId> {
    if i == topo.source() {
        return Vec::new();
    }
    topo.neighbors(i)
        .iter()
        .copied()
        .filter(|&j| match (ranks[j], ranks[i]) {
            (None, _) => false,
            (Some(_), None) => true,
            (Some(hj), Some(hi)) => hj <= hi,
        })
        .collect()
}

/// Power bookkeeping derived from a profile.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Powers {
    /// Children of each node.
    pub cn_sets: Vec<Vec<NodeId>>,
    /// Radio-link power of each PN: the largest request it received.
    pub radio_link: Vec<f64>,
    /// Sum transmit power (circuitry + radio link) of each active PN, else 0.
    pub ptx: Vec<f64>,
    /// Reception power: one receive-circuitry charge per parent.
    pub prx: Vec<f64>,
}

impl Powers {
    pub fn p_net_tx(&self) -> f64 {
        self.ptx.iter().sum()
    }

    pub fn p_net_rx(&self) -> f64 {
        self.prx.iter().sum()
    }

    /// Network power: every node's transmit plus reception power.
    pub fn p_net_tot(&self) -> f64 {
        self.p_net_tx() + self.p_net_rx()
    }
}

pub fn compute_powers(profile: &ActionProfile, phys: &PhysParams) -> Powers {
    let n = profile.n_nodes();
    let cn_sets = profile.children();
    let mut radio_link = vec![0.0; n];
    for i in 0..n {
        for (&j, &p) in profile.parents(i) {
            radio_link[j] = f64::max(radio_link[j], p);
        }
    }
    let ptx = (0..n)
        .map(|j| {
            if cn_sets[j].is_empty() {
                0.0
            } else {
                phys.p_ct_mw + radio_link[j]
            }
        })
        .collect();
    let prx = (0..n)
        .map(|i| profile.pn_count(i) as f64 * phys.p_cr_mw)
        .collect();
    Powers {
        cn_sets,
        radio_link,
        ptx,
        prx,
    }
}

/// One slot per transmitting node, in an order where every PN follows all of
/// its own parents.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlotSchedule {
    /// 1-based slot of each node, `None` for nodes that never transmit.
    pub slots: Vec<Option<usize>>,
    /// Transmitting nodes in slot order.
    pub order: Vec<NodeId>,
}

impl SlotSchedule {
    pub fn n_slots(&self) -> usize {
        self.order.len()
    }
}

/// Topological slot assignment over the transmitting nodes; among nodes that
/// are ready at the same time the lowest id goes first.
pub fn assign_slots(profile: &ActionProfile) -> Result<SlotSchedule> {
    let n = profile.n_nodes();
    let children = profile.children();
    let transmits: Vec<bool> = children.iter().map(|c| !c.is_empty()).collect();
    let mut pending: Vec<usize> = (0..n)
        .map(|k| profile.parents(k).keys().filter(|&&j| transmits[j]).count())
        .collect();
    let mut ready: BinaryHeap<Reverse<NodeId>> = (0..n)
        .filter(|&k| transmits[k] && pending[k] == 0)
        .map(Reverse)
        .collect();
    let mut slots = vec![None; n];
    let mut order = Vec::new();
    while let Some(Reverse(u)) = ready.pop() {
        order.push(u);
        slots[u] = Some(order.len());
        for &c in &children[u] {
            if transmits[c] {
                pending[c] -= 1;
                if pending[c] == 0 {
                    ready.push(Reverse(c));
                }
            }
        }
    }
    if order.len() != transmits.iter().filter(|&&t| t).count() {
        return Err(Error::Invariant("transmitters form a cycle".into()));
    }
    Ok(SlotSchedule { slots, order })
}

/// Everything derived from a profile on a topology.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NetworkState {
    pub hop_ranks: Vec<HopRank>,
    pub pn_counts: Vec<usize>,
    pub powers: Powers,
    pub schedule: SlotSchedule,
}

impl NetworkState {
    pub fn compute(profile: &ActionProfile, topo: &Topology) -> Result<Self> {
        let hop_ranks = hop_ranks(profile, topo.source())?;
        let pn_counts = (0..profile.n_nodes())
            .map(|i| profile.pn_count(i))
            .collect();
        let powers = compute_powers(profile, topo.phys());
        let schedule = assign_slots(profile)?;
        Ok(Self {
            hop_ranks,
            pn_counts,
            powers,
            schedule,
        })
    }

    pub fn p_net_tot(&self) -> f64 {
        self.powers.p_net_tot()
    }

    pub fn p_net_tx(&self) -> f64 {
        self.powers.p_net_tx()
    }

    pub fn all_reached(&self) -> bool {
        self.hop_ranks.iter().all(Option::is_some)
    }

    /// Mean number of parents over connected receivers.
    pub fn avg_pns_per_cn(&self, source: NodeId) -> f64 {
        let counts: Vec<usize> = self
            .pn_counts
            .iter()
            .enumerate()
            .filter(|&(i, &c)| i != source && c > 0)
            .map(|(_, &c)| c)
            .collect();
        if counts.is_empty() {
            0.0
        } else {
            counts.iter().sum::<usize>() as f64 / counts.len() as f64
        }
    }
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;

    fn profile(n: usize, edges: &[(NodeId, NodeId, f64)]) -> ActionProfile {
        let mut p = ActionProfile::empty(n);
        let mut acts = vec![BTreeMap::new(); n];
        for &(child, parent, req) in edges {
            acts[child].insert(parent, req);
        }
        for (i, a) in acts.into_iter().enumerate() {
            p.set_action(i, a);
        }
        p
    }

    #[test]
    fn ranks_follow_max_parent() {
        // 0 = source; 1 <- 0; 2 <- 1; 3 <- {1, 2}; 4 has no parents
        let p = profile(5, &[(1, 0, 1.0), (2, 1, 1.0), (3, 1, 1.0), (3, 2, 1.0)]);
        let r = hop_ranks(&p, 0).unwrap();
        assert_eq!(r, vec![Some(0), Some(1), Some(2), Some(3), None]);
    }

    #[test]
    fn cycle_is_an_invariant_violation() {
        let p = profile(3, &[(1, 2, 1.0), (2, 1, 1.0)]);
        assert!(matches!(hop_ranks(&p, 0), Err(Error::Invariant(_))));
    }

    #[test]
    fn incremental_matches_scratch() {
        let mut p = profile(5, &[(1, 0, 1.0), (2, 1, 1.0), (3, 2, 1.0), (4, 3, 1.0)]);
        let mut r = hop_ranks(&p, 0).unwrap();
        // node 2 re-parents directly on the source
        p.set_action(2, BTreeMap::from([(0, 2.0)]));
        update_hop_ranks_from(&mut r, &p, 0, 2).unwrap();
        assert_eq!(r, hop_ranks(&p, 0).unwrap());
        assert_eq!(r[4], Some(3));
    }

    #[test]
    fn powers_use_max_request() {
        let phys = PhysParams::default().with_circuitry(10.0);
        let p = profile(4, &[(1, 0, 3.0), (2, 0, 7.0), (3, 0, 5.0)]);
        let w = compute_powers(&p, &phys);
        assert_eq!(w.radio_link[0], 7.0);
        assert_eq!(w.ptx[0], 17.0);
        assert_eq!(w.ptx[1], 0.0);
        assert_eq!(w.p_net_tx(), 17.0);
        assert_eq!(w.p_net_tot(), 17.0 + 30.0);
    }

    #[test]
    fn reception_power_counts_parents() {
        let phys = PhysParams::default().with_circuitry(10.0);
        let p = profile(3, &[(1, 0, 3.0), (2, 0, 1.0), (2, 1, 1.0)]);
        let w = compute_powers(&p, &phys);
        assert_eq!(w.prx[2], 20.0);
        assert!((w.p_net_tot() - (w.p_net_tx() + 30.0)).abs() < 1e-12);
    }

    #[test]
    fn slots_on_chain_and_star() {
        let chain = profile(3, &[(1, 0, 1.0), (2, 1, 1.0)]);
        let s = assign_slots(&chain).unwrap();
        assert_eq!(s.slots, vec![Some(1), Some(2), None]);
        assert_eq!(s.n_slots(), 2);

        let star = profile(4, &[(1, 0, 1.0), (2, 0, 1.0), (3, 0, 1.0)]);
        assert_eq!(assign_slots(&star).unwrap().n_slots(), 1);
    }

    #[test]
    fn slots_for_two_parent_reception() {
        // S=0 serves 1 and 3; node 2 combines 1 and 3; node 4 combines 2 and 3
        let p = profile(
            5,
            &[
                (1, 0, 1.0),
                (3, 0, 1.0),
                (2, 1, 1.0),
                (2, 3, 1.0),
                (4, 2, 1.0),
                (4, 3, 1.0),
            ],
        );
        let s = assign_slots(&p).unwrap();
        assert_eq!(s.order, vec![0, 1, 3, 2]);
        let s1 = s.slots[1].unwrap();
        let s3 = s.slots[3].unwrap();
        assert_ne!(s1, s3);
        assert!(s.slots[2].unwrap() > s1.max(s3));
    }

    #[test]
    fn action_set_filters_by_rank() {
        let phys = PhysParams::default();
        // all within range of each other
        let topo = Topology::from_positions(
            vec![[0.0, 0.0], [10.0, 0.0], [20.0, 0.0], [30.0, 0.0]],
            0,
            100.0,
            phys,
        )
        .unwrap();
        // nobody joined yet: only the source qualifies
        let r0 = vec![Some(0), None, None, None];
        for i in 1..4 {
            assert_eq!(action_set(&topo, &r0, i), vec![0]);
        }
        let r = vec![Some(0), Some(1), Some(2), None];
        assert_eq!(action_set(&topo, &r, 1), vec![0]);
        assert_eq!(action_set(&topo, &r, 2), vec![0, 1]);
        assert_eq!(action_set(&topo, &r, 3), vec![0, 1, 2]);
        assert!(action_set(&topo, &r, 0).is_empty());
    }
}
