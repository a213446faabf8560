use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{NodeId, Topology};
use crate::error::{Error, Result};

/// Joint action of all receivers: for each node, the parents it picked and
/// the radio-link power it requests from each of them.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ActionProfile {
    requests: Vec<BTreeMap<NodeId, f64>>,
}

impl ActionProfile {
    /// Everybody disconnected.
    pub fn empty(n_nodes: usize) -> Self {
        Self {
            requests: vec![BTreeMap::new(); n_nodes],
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.requests.len()
    }

    /// Parents of `i` with the requested radio-link powers.
    pub fn parents(&self, i: NodeId) -> &BTreeMap<NodeId, f64> {
        &self.requests[i]
    }

    /// Number of parents of `i`.
    pub fn pn_count(&self, i: NodeId) -> usize {
        self.requests[i].len()
    }

    pub fn set_action(&mut self, i: NodeId, action: BTreeMap<NodeId, f64>) {
        self.requests[i] = action;
    }

    pub fn clear(&mut self, i: NodeId) {
        self.requests[i].clear();
    }

    /// Requests received by PN `j`, as `(child, power)` in child order.
    pub fn requests_to(&self, j: NodeId) -> Vec<(NodeId, f64)> {
        self.requests
            .iter()
            .enumerate()
            .filter_map(|(i, a)| a.get(&j).map(|&p| (i, p)))
            .collect()
    }

    /// Requests received by PN `j` from children other than `i`.
    pub fn requests_to_except(&self, j: NodeId, i: NodeId) -> Vec<f64> {
        self.requests
            .iter()
            .enumerate()
            .filter(|&(k, _)| k != i)
            .filter_map(|(_, a)| a.get(&j).copied())
            .collect()
    }

    /// Children of every node.
    pub fn children(&self) -> Vec<Vec<NodeId>> {
        let mut out = vec![Vec::new(); self.n_nodes()];
        for (i, a) in self.requests.iter().enumerate() {
            for &j in a.keys() {
                out[j].push(i);
            }
        }
        out
    }

    /// Structural checks: the source has no parents, nobody is its own parent,
    /// parents are neighbors and requests sit inside the power box.
    pub fn validate(&self, topo: &Topology) -> Result<()> {
        let phys = topo.phys();
        if self.n_nodes() != topo.n_nodes() {
            return Err(Error::Domain(format!(
                "profile has {} nodes, topology {}",
                self.n_nodes(),
                topo.n_nodes()
            )));
        }
        if !self.requests[topo.source()].is_empty() {
            return Err(Error::Domain("the source cannot pick parents".into()));
        }
        let tol = 1e-9 * phys.p_max_mw;
        for (i, a) in self.requests.iter().enumerate() {
            for (&j, &p) in a {
                if j == i || j >= self.n_nodes() {
                    return Err(Error::Domain(format!("node {i} has invalid parent {j}")));
                }
                if !topo.is_neighbor(i, j) {
                    return Err(Error::Domain(format!(
                        "parent {j} of {i} is not a neighbor"
                    )));
                }
                if !(p > 0.0 && p >= phys.p_min_mw - tol && p <= phys.p_max_mw + tol) {
                    return Err(Error::Domain(format!(
                        "request {p} mW from {i} to {j} outside ({}, {}]",
                        phys.p_min_mw, phys.p_max_mw
                    )));
                }
            }
        }
        Ok(())
    }
}
