//! Cost sharing: marginal contribution (MC) and Shapley value (SV).
//!
//! Costs are in mW-equivalents: a scheme maps power one-to-one to cost.

mod ledger;
mod shapley;

use serde::{Deserialize, Serialize};

pub use ledger::{ledger, CostLedger, ShareRow};
pub use shapley::{
    sv_piecewise_all, sv_piecewise_coeffs, sv_share_closed, sv_share_joining, sv_share_oracle,
    sv_shares, ORACLE_MAX_GROUP,
};

use crate::error::{Error, Result};
use crate::model::{ActionProfile, NodeId, PhysParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scheme {
    #[serde(rename = "MC")]
    Mc,
    #[serde(rename = "SV")]
    Sv,
}

impl Scheme {
    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Mc => "MC",
            Scheme::Sv => "SV",
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// `1(requests ≠ ∅)·(p_ct + max request)`.
pub fn sum_transmit_power(requests: impl IntoIterator<Item = f64>, p_ct: f64) -> f64 {
    requests
        .into_iter()
        .fold(None, |m: Option<f64>, p| Some(m.map_or(p, |m| m.max(p))))
        .map_or(0.0, |max| p_ct + max)
}

/// MC share from raw numbers: the sum transmit power the PN needs with the
/// CN's request minus what it needs without it.
pub fn mc_share_of(own: f64, others: &[f64], p_ct: f64) -> f64 {
    sum_transmit_power(others.iter().copied().chain([own]), p_ct)
        - sum_transmit_power(others.iter().copied(), p_ct)
}

pub fn mc_share(j: NodeId, i: NodeId, profile: &ActionProfile, phys: &PhysParams) -> Result<f64> {
    let own = *profile
        .parents(i)
        .get(&j)
        .ok_or_else(|| Error::Domain(format!("node {i} is not a child of {j}")))?;
    Ok(mc_share_of(
        own,
        &profile.requests_to_except(j, i),
        phys.p_ct_mw,
    ))
}

/// `W_i·p_cr + Σ_j mc_share(j, i)`.
pub fn mc_node_cost(i: NodeId, profile: &ActionProfile, phys: &PhysParams) -> f64 {
    profile
        .parents(i)
        .keys()
        .map(|&j| phys.p_cr_mw + mc_share(j, i, profile, phys).expect("parent from profile"))
        .sum()
}

/// SV share of CN `i` at PN `j` under the current profile.
pub fn sv_share(j: NodeId, i: NodeId, profile: &ActionProfile, phys: &PhysParams) -> Result<f64> {
    if !profile.parents(i).contains_key(&j) {
        return Err(Error::Domain(format!("node {i} is not a child of {j}")));
    }
    let group = profile.requests_to(j);
    Ok(sv_shares(&group, phys.p_ct_mw)
        .into_iter()
        .find(|&(k, _)| k == i)
        .expect("child is in group")
        .1)
}

/// `Σ_j sv_share(j, i)`; reception power is not part of the SV cost.
pub fn sv_node_cost(i: NodeId, profile: &ActionProfile, phys: &PhysParams) -> f64 {
    profile
        .parents(i)
        .keys()
        .map(|&j| sv_share(j, i, profile, phys).expect("parent from profile"))
        .sum()
}

pub fn node_cost(scheme: Scheme, i: NodeId, profile: &ActionProfile, phys: &PhysParams) -> f64 {
    match scheme {
        Scheme::Mc => mc_node_cost(i, profile, phys),
        Scheme::Sv => sv_node_cost(i, profile, phys),
    }
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;

    /// Case analysis of the MC share kept as an independent check.
    fn mc_breakdown(own: f64, others: &[f64], p_ct: f64) -> f64 {
        if others.is_empty() {
            return p_ct + own;
        }
        let m = others.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if own > m {
            own - m
        } else {
            0.0
        }
    }

    #[test]
    fn mc_share_cases() {
        assert_eq!(mc_share_of(7.0, &[], 10.0), 17.0);
        assert_eq!(mc_share_of(7.0, &[5.0, 1.0], 10.0), 2.0);
        assert_eq!(mc_share_of(7.0, &[9.0], 10.0), 0.0);
        assert_eq!(mc_share_of(7.0, &[7.0], 10.0), 0.0);
        for (own, others) in [(3.0, vec![]), (4.0, vec![1.0, 2.0]), (2.0, vec![2.0, 8.0])] {
            assert_eq!(
                mc_share_of(own, &others, 10.0),
                mc_breakdown(own, &others, 10.0)
            );
        }
    }

    fn profile(n: usize, edges: &[(NodeId, NodeId, f64)]) -> ActionProfile {
        let mut p = ActionProfile::empty(n);
        let mut acts = vec![BTreeMap::new(); n];
        for &(c, j, r) in edges {
            acts[c].insert(j, r);
        }
        for (i, a) in acts.into_iter().enumerate() {
            p.set_action(i, a);
        }
        p
    }

    #[test]
    fn mc_node_costs() {
        let phys = PhysParams::default().with_circuitry(10.0);
        let p = profile(2, &[(1, 0, 7.0)]);
        assert_eq!(mc_node_cost(1, &p, &phys), 27.0);
        assert_eq!(mc_node_cost(0, &p, &phys), 0.0);
        // node 3 has two parents: share 2 at PN 0 (others max 5), 0 at PN 1 (others max 9)
        let p = profile(5, &[(2, 0, 5.0), (4, 1, 9.0), (3, 0, 7.0), (3, 1, 7.0)]);
        assert_eq!(mc_share(0, 3, &p, &phys).unwrap(), 2.0);
        assert_eq!(mc_share(1, 3, &p, &phys).unwrap(), 0.0);
        assert_eq!(mc_node_cost(3, &p, &phys), 22.0);
        assert!(matches!(mc_share(1, 2, &p, &phys), Err(Error::Domain(_))));
    }

    #[test]
    fn sv_share_on_profile() {
        let phys = PhysParams::default().with_circuitry(6.0);
        let p = profile(4, &[(1, 0, 1.0), (2, 0, 2.0), (3, 0, 3.0)]);
        assert!((sv_share(0, 3, &p, &phys).unwrap() - (11.0 / 6.0 + 2.0)).abs() < 1e-12);
        assert!((sv_node_cost(1, &p, &phys) - (1.0 / 3.0 + 2.0)).abs() < 1e-12);
    }
}
