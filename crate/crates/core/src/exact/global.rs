//! Centralized time-slot formulation of the whole broadcast.
//!
//! Per slot `s` and node `j`: radio-link power `p[j][s]`, transmit flag
//! `t[j][s]`; per receiver `i`: receive flag `r[i][s]` and the normalized SNR
//! `γ[i][s]` it actually collects. The normalized SNR on offer,
//! `γ̂[i][s] = Σ_{j≠i} p[j][s]·g_ij / (γ_th σ²)`, is substituted into the rows
//! that use it; gains of non-neighbor pairs count as zero.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::instance::{MilpInstance, MilpSolution, Relation};
use crate::cost::{ledger, Scheme};
use crate::error::{Error, Result};
use crate::model::{snr_mrc, ActionProfile, NodeId, Topology};

/// What the global problem minimizes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GlobalScenario {
    /// Network power: transmit plus reception power.
    Power,
    /// Social cost: reception circuitry dropped from the objective.
    SocialCost,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GlobalOptions {
    pub scenario: GlobalScenario,
    /// Slot budget; `None` means one slot per receiver.
    pub slots: Option<usize>,
    /// Restrict every receiver to a single reception slot (no MRC).
    pub one_parent: bool,
    /// Add rows that every optimal schedule satisfies: idle slots last,
    /// per-slot useful SNR capped at 1 and transmit power capped at the
    /// farthest neighbor's unicast power. They only shrink the search.
    pub strengthen: bool,
}

impl Default for GlobalOptions {
    fn default() -> Self {
        Self {
            scenario: GlobalScenario::Power,
            slots: None,
            one_parent: false,
            strengthen: true,
        }
    }
}

/// Variable indices of a built global instance.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GlobalLayout {
    pub n_nodes: usize,
    pub n_slots: usize,
    pub source: NodeId,
    /// `[node][slot]`
    pub p: Vec<Vec<usize>>,
    pub t: Vec<Vec<usize>>,
    /// `[node][slot]`, `usize::MAX` for the source.
    pub r: Vec<Vec<usize>>,
    pub gamma: Vec<Vec<usize>>,
}

/// Normalized SNR per mW from `j` at `i` (zero off the neighbor graph).
fn snr_rate(topo: &Topology, i: NodeId, j: NodeId) -> f64 {
    if i != j && topo.is_neighbor(i, j) {
        1.0 / topo.unicast_power(i, j)
    } else {
        0.0
    }
}

pub fn build_global(topo: &Topology, opts: &GlobalOptions) -> Result<(MilpInstance, GlobalLayout)> {
    let n = topo.n_nodes();
    let src = topo.source();
    let n_slots = opts.slots.unwrap_or(n - 1);
    if n_slots == 0 {
        return Err(Error::Config("slot budget must be at least 1".into()));
    }
    let phys = topo.phys();
    let p_cr = match opts.scenario {
        GlobalScenario::Power => phys.p_cr_mw,
        GlobalScenario::SocialCost => 0.0,
    };
    let mut m = MilpInstance::new(format!(
        "global_{}_{}",
        match opts.scenario {
            GlobalScenario::Power => "power",
            GlobalScenario::SocialCost => "social",
        },
        if opts.one_parent { "opn" } else { "mrc" }
    ));
    let none = usize::MAX;
    let mut p = vec![vec![0; n_slots]; n];
    let mut t = vec![vec![0; n_slots]; n];
    let mut r = vec![vec![none; n_slots]; n];
    let mut gamma = vec![vec![none; n_slots]; n];
    for j in 0..n {
        for s in 0..n_slots {
            p[j][s] = m.add_continuous(format!("p_{j}_{}", s + 1), 0.0, phys.p_max_mw);
            t[j][s] = m.add_binary(format!("t_{j}_{}", s + 1));
            m.variables[t[j][s]].branch_priority = s as u32;
        }
    }
    // per-receiver big-M: 1 + largest normalized SNR all neighbors could offer
    let big_m: Vec<f64> = (0..n)
        .map(|i| {
            1.0 + (0..n)
                .map(|j| phys.p_max_mw * snr_rate(topo, i, j))
                .sum::<f64>()
        })
        .collect();
    for i in topo.receivers() {
        for s in 0..n_slots {
            r[i][s] = m.add_binary(format!("r_{i}_{}", s + 1));
            m.variables[r[i][s]].branch_priority = s as u32;
            gamma[i][s] = m.add_continuous(format!("g_{i}_{}", s + 1), 0.0, big_m[i]);
        }
    }

    let mut obj = Vec::new();
    for j in 0..n {
        for s in 0..n_slots {
            obj.push((p[j][s], 1.0));
            obj.push((t[j][s], phys.p_ct_mw));
        }
    }
    if p_cr > 0.0 {
        for i in topo.receivers() {
            for s in 0..n_slots {
                obj.push((r[i][s], p_cr));
            }
        }
    }
    m.set_objective(obj);

    for j in 0..n {
        for s in 0..n_slots {
            let sl = s + 1;
            m.add_constraint(
                format!("pmin_{j}_{sl}"),
                vec![(p[j][s], 1.0), (t[j][s], -phys.p_min_mw)],
                Relation::Ge,
                0.0,
            );
            m.add_constraint(
                format!("pmax_{j}_{sl}"),
                vec![(p[j][s], 1.0), (t[j][s], -phys.p_max_mw)],
                Relation::Le,
                0.0,
            );
        }
        m.add_constraint(
            format!("tx_{j}"),
            t[j].iter().map(|&v| (v, 1.0)).collect(),
            Relation::Le,
            1.0,
        );
    }
    for i in topo.receivers() {
        let row: Vec<(usize, f64)> = r[i].iter().map(|&v| (v, 1.0)).collect();
        if opts.one_parent {
            m.add_constraint(format!("rx_{i}"), row, Relation::Eq, 1.0);
        } else {
            m.add_constraint(format!("rx_{i}"), row, Relation::Ge, 1.0);
        }
    }
    for s in 0..n_slots {
        let sl = s + 1;
        m.add_constraint(
            format!("single_tx_{sl}"),
            (0..n).map(|j| (t[j][s], 1.0)).collect(),
            Relation::Le,
            1.0,
        );
    }
    for i in topo.receivers() {
        for s in 0..n_slots {
            let sl = s + 1;
            // reception needs a transmission in the slot
            let mut row = vec![(r[i][s], 1.0)];
            row.extend((0..n).map(|j| (t[j][s], -1.0)));
            m.add_constraint(format!("rx_tx_{i}_{sl}"), row, Relation::Le, 0.0);
            // no reception once the node has transmitted
            let mut row = vec![(r[i][s], 1.0)];
            row.extend((0..=s).map(|q| (t[i][q], 1.0)));
            m.add_constraint(format!("no_rx_after_tx_{i}_{sl}"), row, Relation::Le, 1.0);

            let offer: Vec<(usize, f64)> = (0..n)
                .filter(|&j| snr_rate(topo, i, j) > 0.0)
                .map(|j| (p[j][s], snr_rate(topo, i, j)))
                .collect();
            let g = gamma[i][s];
            // γ ≤ γ̂
            let mut row = vec![(g, 1.0)];
            row.extend(offer.iter().map(|&(v, a)| (v, -a)));
            m.add_constraint(format!("gamma_le_offer_{i}_{sl}"), row, Relation::Le, 0.0);
            // γ ≥ γ̂ − M(1 − r)
            let mut row = vec![(g, 1.0), (r[i][s], -big_m[i])];
            row.extend(offer.iter().map(|&(v, a)| (v, -a)));
            m.add_constraint(
                format!("gamma_ge_offer_{i}_{sl}"),
                row,
                Relation::Ge,
                -big_m[i],
            );
            // γ ≤ M r
            m.add_constraint(
                format!("gamma_le_mr_{i}_{sl}"),
                vec![(g, 1.0), (r[i][s], -big_m[i])],
                Relation::Le,
                0.0,
            );
        }
        m.add_constraint(
            format!("snr_{i}"),
            gamma[i].iter().map(|&v| (v, 1.0)).collect(),
            Relation::Ge,
            1.0,
        );
        // transmit only after decoding in earlier slots
        for s in 0..n_slots {
            let mut row = vec![(t[i][s], 1.0)];
            row.extend((0..s).map(|q| (gamma[i][q], -1.0)));
            m.add_constraint(
                format!("tx_after_decode_{i}_{}", s + 1),
                row,
                Relation::Le,
                0.0,
            );
        }
    }
    m.add_constraint("source_first", vec![(t[src][0], 1.0)], Relation::Eq, 1.0);

    if opts.strengthen {
        add_strengthening(&mut m, topo, n_slots, &p, &t, &r, &gamma);
    }

    Ok((
        m,
        GlobalLayout {
            n_nodes: n,
            n_slots,
            source: src,
            p,
            t,
            r,
            gamma,
        },
    ))
}

fn add_strengthening(
    m: &mut MilpInstance,
    topo: &Topology,
    n_slots: usize,
    p: &[Vec<usize>],
    t: &[Vec<usize>],
    r: &[Vec<usize>],
    gamma: &[Vec<usize>],
) {
    let n = topo.n_nodes();
    let phys = topo.phys();
    // idle slots come last
    for s in 0..n_slots.saturating_sub(1) {
        let mut row: Vec<(usize, f64)> = (0..n).map(|j| (t[j][s], 1.0)).collect();
        row.extend((0..n).map(|j| (t[j][s + 1], -1.0)));
        m.add_constraint(format!("busy_prefix_{}", s + 1), row, Relation::Ge, 0.0);
    }
    // useful SNR e ≤ min(γ, 1) per slot, capped per transmitter
    for i in topo.receivers() {
        let mut e_row = Vec::new();
        let mut e = Vec::new();
        for s in 0..n_slots {
            let v = m.add_continuous(format!("e_{i}_{}", s + 1), 0.0, 1.0);
            e.push(v);
            m.add_constraint(
                format!("e_le_gamma_{i}_{}", s + 1),
                vec![(v, 1.0), (gamma[i][s], -1.0)],
                Relation::Le,
                0.0,
            );
            m.add_constraint(
                format!("e_le_r_{i}_{}", s + 1),
                vec![(v, 1.0), (r[i][s], -1.0)],
                Relation::Le,
                0.0,
            );
            let mut row = vec![(v, 1.0)];
            for j in 0..n {
                let c = (snr_rate(topo, i, j) * phys.p_max_mw).min(1.0);
                if c > 0.0 {
                    row.push((t[j][s], -c));
                }
            }
            m.add_constraint(format!("e_le_tx_{i}_{}", s + 1), row, Relation::Le, 0.0);
            e_row.push((v, 1.0));
        }
        m.add_constraint(format!("e_sum_{i}"), e_row, Relation::Ge, 1.0);
        for s in 0..n_slots {
            let mut row = vec![(t[i][s], 1.0)];
            row.extend((0..s).map(|q| (e[q], -1.0)));
            m.add_constraint(format!("tx_after_e_{i}_{}", s + 1), row, Relation::Le, 0.0);
        }
    }
    // power beyond the farthest neighbor's unicast buys nothing
    for j in 0..n {
        let cap = topo
            .neighbors(j)
            .iter()
            .map(|&i| topo.unicast_power(i, j))
            .fold(0.0, f64::max)
            .min(phys.p_max_mw);
        for s in 0..n_slots {
            m.add_constraint(
                format!("pcap_{j}_{}", s + 1),
                vec![(p[j][s], 1.0), (t[j][s], -cap)],
                Relation::Le,
                0.0,
            );
        }
    }
}

/// Schedule read back from a global solution, with metrics recomputed by the
/// model and cost modules.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GlobalSchedule {
    /// `(slot, node, radio-link power)` in slot order, slots 1-based.
    pub transmissions: Vec<(usize, NodeId, f64)>,
    /// Per node, the `(slot, transmitter)` pairs it listens to.
    pub receptions: Vec<Vec<(usize, NodeId)>>,
    /// Parent/request view: each receiver requests its transmitters' powers.
    pub profile: ActionProfile,
    pub n_slots: usize,
    pub p_net_tx_mw: f64,
    pub p_net_tot_mw: f64,
    /// SV social cost of `profile`.
    pub social_cost: f64,
    pub avg_pns_per_cn: f64,
}

/// Reads the schedule back and checks it against the model: every receiver
/// decodes, transmitters decode before their slot, and the recomputed power
/// matches the objective.
pub fn extract_profile(
    sol: &MilpSolution,
    layout: &GlobalLayout,
    topo: &Topology,
    scenario: GlobalScenario,
) -> Result<GlobalSchedule> {
    if !sol.has_incumbent() {
        return Err(Error::Domain("solution has no assignment".into()));
    }
    let x = &sol.assignment;
    let n = layout.n_nodes;
    let phys = topo.phys();
    let on = |v: usize| x[v] > 0.5;

    let mut slot_tx: Vec<Option<(NodeId, f64)>> = vec![None; layout.n_slots];
    let mut transmissions = Vec::new();
    for s in 0..layout.n_slots {
        for j in 0..n {
            if on(layout.t[j][s]) {
                let pw = x[layout.p[j][s]].clamp(phys.p_min_mw, phys.p_max_mw);
                slot_tx[s] = Some((j, pw));
                transmissions.push((s + 1, j, pw));
            }
        }
    }

    let mut receptions = vec![Vec::new(); n];
    let mut requests: Vec<BTreeMap<NodeId, f64>> = vec![BTreeMap::new(); n];
    let mut decode_slot = vec![0usize; n];
    for i in topo.receivers() {
        let mut links = Vec::new();
        for s in 0..layout.n_slots {
            if !on(layout.r[i][s]) {
                continue;
            }
            let Some((j, pw)) = slot_tx[s] else {
                return Err(Error::Invariant(format!(
                    "node {i} listens to silent slot {}",
                    s + 1
                )));
            };
            receptions[i].push((s + 1, j));
            if topo.is_neighbor(i, j) && pw > 0.0 {
                links.push((pw, topo.gain(i, j)));
                requests[i].insert(j, pw);
                if decode_slot[i] == 0
                    && snr_mrc(&links, phys.noise_mw) >= phys.snr_th * (1.0 - 1e-6)
                {
                    decode_slot[i] = s + 1;
                }
            }
        }
        if decode_slot[i] == 0 {
            return Err(Error::Invariant(format!(
                "node {i} never reaches the threshold"
            )));
        }
    }
    for &(s, j, _) in &transmissions {
        if j != layout.source && decode_slot[j] >= s {
            return Err(Error::Invariant(format!(
                "node {j} transmits in slot {s} before decoding (slot {})",
                decode_slot[j]
            )));
        }
    }

    let mut profile = ActionProfile::empty(n);
    for (i, req) in requests.into_iter().enumerate() {
        profile.set_action(i, req);
    }
    let p_net_tx_mw: f64 = transmissions
        .iter()
        .map(|&(_, _, pw)| phys.p_ct_mw + pw)
        .sum();
    let n_rx: usize = receptions.iter().map(Vec::len).sum();
    let p_net_tot_mw = p_net_tx_mw + phys.p_cr_mw * n_rx as f64;
    let expected = match scenario {
        GlobalScenario::Power => p_net_tot_mw,
        GlobalScenario::SocialCost => p_net_tx_mw,
    };
    if (expected - sol.objective).abs() > 1e-6 * sol.objective.abs().max(1.0) {
        return Err(Error::Invariant(format!(
            "recomputed power {expected} differs from objective {}",
            sol.objective
        )));
    }
    let social_cost = ledger(&profile, Scheme::Sv, phys)?.social_cost;
    Ok(GlobalSchedule {
        n_slots: transmissions.len(),
        transmissions,
        avg_pns_per_cn: n_rx as f64 / (n - 1) as f64,
        receptions,
        profile,
        p_net_tx_mw,
        p_net_tot_mw,
        social_cost,
    })
}
