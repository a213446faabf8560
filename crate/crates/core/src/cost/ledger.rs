use serde::{Deserialize, Serialize};

use super::{mc_share_of, sum_transmit_power, sv_shares, Scheme};
use crate::error::{Error, Result};
use crate::model::{ActionProfile, NodeId, PhysParams};

/// One `(PN, CN)` share.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShareRow {
    pub scheme: Scheme,
    pub pn: NodeId,
    pub cn: NodeId,
    pub share: f64,
}

/// Every share of a profile under one scheme, plus node totals and the
/// social cost.
///
/// `node_totals[i] = reception[i] + Σ_j share(j, i)`; `reception` is
/// `W_i·p_cr` under MC and zero under SV.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CostLedger {
    pub scheme: Scheme,
    pub shares: Vec<ShareRow>,
    pub reception: Vec<f64>,
    pub node_totals: Vec<f64>,
    pub social_cost: f64,
}

impl CostLedger {
    /// Shares collected by PN `j`.
    pub fn collected_by(&self, j: NodeId) -> f64 {
        self.shares
            .iter()
            .filter(|r| r.pn == j)
            .map(|r| r.share)
            .sum()
    }

    /// Rows as CSV (`run,scheme,node,pn,share`).
    pub fn write_csv<W: std::io::Write>(&self, run: &str, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["run", "scheme", "node", "pn", "share"])?;
        for r in &self.shares {
            w.write_record([
                run,
                r.scheme.as_str(),
                &r.cn.to_string(),
                &r.pn.to_string(),
                &format!("{:.9e}", r.share),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }
}

/// Builds the full ledger. Under SV every PN's collected shares must equal its
/// sum transmit power to 1e-9 relative.
pub fn ledger(profile: &ActionProfile, scheme: Scheme, phys: &PhysParams) -> Result<CostLedger> {
    let n = profile.n_nodes();
    let children = profile.children();
    let mut shares = Vec::new();
    let mut node_totals = vec![0.0; n];
    let reception: Vec<f64> = (0..n)
        .map(|i| match scheme {
            Scheme::Mc => profile.pn_count(i) as f64 * phys.p_cr_mw,
            Scheme::Sv => 0.0,
        })
        .collect();
    for (j, kids) in children.iter().enumerate() {
        if kids.is_empty() {
            continue;
        }
        let group: Vec<(NodeId, f64)> = kids.iter().map(|&i| (i, profile.parents(i)[&j])).collect();
        let rows: Vec<(NodeId, f64)> = match scheme {
            Scheme::Sv => sv_shares(&group, phys.p_ct_mw),
            Scheme::Mc => group
                .iter()
                .map(|&(i, own)| {
                    let others: Vec<f64> = group.iter().filter(|g| g.0 != i).map(|g| g.1).collect();
                    (i, mc_share_of(own, &others, phys.p_ct_mw))
                })
                .collect(),
        };
        if scheme == Scheme::Sv {
            let ptx = sum_transmit_power(group.iter().map(|g| g.1), phys.p_ct_mw);
            let got: f64 = rows.iter().map(|r| r.1).sum();
            if (got - ptx).abs() > 1e-9 * ptx.abs().max(1.0) {
                return Err(Error::Invariant(format!(
                    "PN {j} collects {got} but transmits {ptx}"
                )));
            }
        }
        for (i, share) in rows {
            node_totals[i] += share;
            shares.push(ShareRow {
                scheme,
                pn: j,
                cn: i,
                share,
            });
        }
    }
    for (t, r) in node_totals.iter_mut().zip(&reception) {
        *t += r;
    }
    let social_cost = node_totals.iter().sum();
    Ok(CostLedger {
        scheme,
        shares,
        reception,
        node_totals,
        social_cost,
    })
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::cost::{mc_node_cost, sv_node_cost};
    use crate::model::compute_powers;

    #[test]
    fn empty_profile_is_all_zero() {
        let p = ActionProfile::empty(4);
        for s in [Scheme::Mc, Scheme::Sv] {
            let l = ledger(&p, s, &PhysParams::default()).unwrap();
            assert!(l.shares.is_empty());
            assert_eq!(l.social_cost, 0.0);
            assert!(l.node_totals.iter().all(|&t| t == 0.0));
        }
    }

    #[test]
    fn sv_social_cost_is_network_transmit_power() {
        let phys = PhysParams::default().with_circuitry(10.0);
        let mut p = ActionProfile::empty(5);
        p.set_action(1, BTreeMap::from([(0, 30.0)]));
        p.set_action(2, BTreeMap::from([(0, 12.0), (1, 4.0)]));
        p.set_action(3, BTreeMap::from([(1, 9.0)]));
        p.set_action(4, BTreeMap::from([(2, 1.0), (3, 2.0), (0, 5.0)]));
        let l = ledger(&p, Scheme::Sv, &phys).unwrap();
        let w = compute_powers(&p, &phys);
        assert!((l.social_cost - w.p_net_tx()).abs() < 1e-9);
        for j in 0..5 {
            assert!((l.collected_by(j) - w.ptx[j]).abs() < 1e-9);
        }
        for i in 0..5 {
            assert!((l.node_totals[i] - sv_node_cost(i, &p, &phys)).abs() < 1e-12);
        }
        let m = ledger(&p, Scheme::Mc, &phys).unwrap();
        for i in 0..5 {
            assert!((m.node_totals[i] - mc_node_cost(i, &p, &phys)).abs() < 1e-12);
        }
        let mut buf = Vec::new();
        l.write_csv("r0", &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1 + l.shares.len());
        assert!(text.starts_with("run,scheme,node,pn,share\n"));
    }
}
