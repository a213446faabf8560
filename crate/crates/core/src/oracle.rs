//! Slow reference implementations used by tests and the `verify` command.
//!
//! None of these share code with the routines they check beyond the cost
//! functions themselves.

use std::collections::BTreeMap;

use crate::cost::{mc_share_of, sv_share_joining, Scheme};
use crate::error::{Error, Result};
use crate::exact::{MilpInstance, NodeDecisionInput, Relation, SnrMode};
use crate::model::NodeId;

pub use crate::cost::sv_share_oracle;

/// Largest candidate set the decision oracle enumerates.
pub const ORACLE_MAX_CANDIDATES: usize = 8;
/// Largest LP the vertex oracle enumerates.
pub const ORACLE_MAX_LP_VARS: usize = 8;
/// Largest all-binary problem the enumeration oracle accepts.
pub const ORACLE_MAX_BINARIES: usize = 20;

const FEAS: f64 = 1e-9;

/// MC share by the three printed cases: sole CN pays circuitry plus its
/// request, a CN above the others pays the excess, anyone else pays nothing.
pub fn mc_share_breakdown(own: f64, others: &[f64], p_ct: f64) -> f64 {
    if others.is_empty() {
        return p_ct + own;
    }
    let top = others.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if own > top {
        own - top
    } else {
        0.0
    }
}

/// Best parent set and requests found by enumeration.
#[derive(Clone, Debug)]
pub struct OracleDecision {
    pub requests: BTreeMap<NodeId, f64>,
    pub objective: f64,
}

/// Cost the deciding node pays for `requests` (parent id → mW), computed
/// straight from the sharing rules.
pub fn decision_cost(input: &NodeDecisionInput, requests: &BTreeMap<NodeId, f64>) -> f64 {
    let phys = &input.phys;
    requests
        .iter()
        .map(|(&j, &p)| {
            let c = input
                .candidates
                .iter()
                .find(|c| c.pn == j)
                .expect("request to a candidate");
            match input.scheme {
                Scheme::Mc => phys.p_cr_mw + mc_share_of(p, &c.others, phys.p_ct_mw),
                Scheme::Sv => sv_share_joining(p, &c.others, phys.p_ct_mw),
            }
        })
        .sum()
}

/// Exhaustive search over every parent subset. For a fixed subset the cost
/// is a sum of convex piecewise-linear terms under one linear SNR row, so some
/// optimum has every request but one on a breakpoint or bound; all such
/// points are tried.
pub fn node_decision_oracle(input: &NodeDecisionInput) -> Result<Option<OracleDecision>> {
    let k = input.candidates.len();
    if k > ORACLE_MAX_CANDIDATES {
        return Err(Error::Capacity(format!(
            "decision oracle limited to {ORACLE_MAX_CANDIDATES} candidates, got {k}"
        )));
    }
    let phys = &input.phys;
    let unicast: Vec<f64> = input
        .candidates
        .iter()
        .map(|c| phys.unicast_power(c.gain))
        .collect();
    let cap: Vec<f64> = unicast
        .iter()
        .map(|&u| match input.snr_mode {
            SnrMode::Equality => phys.p_max_mw.min(u),
            SnrMode::AtLeast => phys.p_max_mw,
        })
        .collect();
    // candidate request levels per parent
    let levels: Vec<Vec<f64>> = input
        .candidates
        .iter()
        .zip(&cap)
        .map(|(c, &hi)| {
            let lo = phys.p_min_mw;
            let mut v = vec![lo, hi];
            v.extend(c.others.iter().copied().filter(|&q| q > lo && q < hi));
            v.sort_by(f64::total_cmp);
            v.dedup();
            v
        })
        .collect();

    let mut best: Option<OracleDecision> = None;
    let mut offer = |requests: BTreeMap<NodeId, f64>| {
        let cost = decision_cost(input, &requests);
        let better = match &best {
            None => true,
            Some(b) => {
                let tol = 1e-9 * b.objective.abs().max(1.0);
                cost < b.objective - tol
                    || (cost <= b.objective + tol
                        && (requests.len(), requests.keys().collect::<Vec<_>>())
                            < (b.requests.len(), b.requests.keys().collect::<Vec<_>>()))
            }
        };
        if better {
            best = Some(OracleDecision {
                requests,
                objective: cost,
            });
        }
    };

    for mask in 1u32..(1 << k) {
        let subset: Vec<usize> = (0..k).filter(|&b| mask & (1 << b) != 0).collect();
        if input.w_max.is_some_and(|w| subset.len() > w) {
            continue;
        }
        // one member is free, the rest sit on a level
        for free in 0..subset.len() {
            let fixed: Vec<usize> = subset
                .iter()
                .enumerate()
                .filter(|&(pos, _)| pos != free)
                .map(|(_, &b)| b)
                .collect();
            for_each_choice(&fixed, &levels, &mut |chosen| {
                let used: f64 = fixed
                    .iter()
                    .zip(chosen)
                    .map(|(&b, &p)| p / unicast[b])
                    .sum();
                let f = subset[free];
                let p = (1.0 - used) * unicast[f];
                let slack = FEAS * unicast[f].max(1.0);
                if p < phys.p_min_mw - slack || p > cap[f] + slack {
                    return;
                }
                let mut req = BTreeMap::new();
                for (&b, &q) in fixed.iter().zip(chosen) {
                    req.insert(input.candidates[b].pn, q);
                }
                req.insert(input.candidates[f].pn, p.clamp(phys.p_min_mw, cap[f]));
                offer(req);
            });
        }
        if input.snr_mode == SnrMode::AtLeast {
            for_each_choice(&subset, &levels, &mut |chosen| {
                let snr: f64 = subset
                    .iter()
                    .zip(chosen)
                    .map(|(&b, &p)| p / unicast[b])
                    .sum();
                if snr >= 1.0 - FEAS {
                    let req = subset
                        .iter()
                        .zip(chosen)
                        .map(|(&b, &p)| (input.candidates[b].pn, p))
                        .collect();
                    offer(req);
                }
            });
        }
    }
    Ok(best)
}

fn for_each_choice(members: &[usize], levels: &[Vec<f64>], f: &mut dyn FnMut(&[f64])) {
    let mut idx = vec![0usize; members.len()];
    let mut chosen: Vec<f64> = members.iter().map(|&b| levels[b][0]).collect();
    loop {
        f(&chosen);
        let mut pos = 0;
        loop {
            if pos == members.len() {
                return;
            }
            idx[pos] += 1;
            if idx[pos] < levels[members[pos]].len() {
                chosen[pos] = levels[members[pos]][idx[pos]];
                break;
            }
            idx[pos] = 0;
            chosen[pos] = levels[members[pos]][0];
            pos += 1;
        }
    }
}

/// Optimum of the LP relaxation by trying every basic point: each choice of
/// `n` tight hyperplanes among the rows and bounds. `Ok(None)` when no
/// vertex is feasible.
pub fn lp_vertex_oracle(inst: &MilpInstance) -> Result<Option<(f64, Vec<f64>)>> {
    let n = inst.n_vars();
    if n > ORACLE_MAX_LP_VARS {
        return Err(Error::Capacity(format!(
            "vertex oracle limited to {ORACLE_MAX_LP_VARS} variables, got {n}"
        )));
    }
    let mut planes: Vec<(Vec<f64>, f64)> = Vec::new();
    for c in &inst.constraints {
        let mut a = vec![0.0; n];
        for &(j, v) in &c.coeffs {
            a[j] += v;
        }
        planes.push((a, c.rhs));
    }
    for (j, v) in inst.variables.iter().enumerate() {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        planes.push((e.clone(), v.lower));
        planes.push((e, v.upper));
    }
    let feasible = |x: &[f64]| {
        inst.variables
            .iter()
            .zip(x)
            .all(|(v, &xj)| xj >= v.lower - FEAS && xj <= v.upper + FEAS)
            && inst.constraints.iter().all(|c| {
                let lhs = c.activity(x);
                let tol = FEAS * (1.0 + c.rhs.abs());
                match c.relation {
                    Relation::Le => lhs <= c.rhs + tol,
                    Relation::Ge => lhs >= c.rhs - tol,
                    Relation::Eq => (lhs - c.rhs).abs() <= tol,
                }
            })
    };
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut pick: Vec<usize> = (0..n).collect();
    if n == 0 {
        return Ok(Some((inst.objective_value(&[]), Vec::new())));
    }
    loop {
        let a: Vec<Vec<f64>> = pick.iter().map(|&r| planes[r].0.clone()).collect();
        let b: Vec<f64> = pick.iter().map(|&r| planes[r].1).collect();
        if let Some(x) = solve_square(a, b) {
            if feasible(&x) {
                let v = inst.objective_value(&x);
                if best.as_ref().is_none_or(|(bv, _)| v < *bv) {
                    best = Some((v, x));
                }
            }
        }
        // next n-combination of planes
        let total = planes.len();
        let mut i = n;
        loop {
            if i == 0 {
                return Ok(best);
            }
            i -= 1;
            if pick[i] < total - n + i {
                pick[i] += 1;
                for k in i + 1..n {
                    pick[k] = pick[k - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Gaussian elimination with partial pivoting; `None` when singular.
fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&r, &s| a[r][col].abs().total_cmp(&a[s][col].abs()))?;
        if a[piv][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            if f != 0.0 {
                for c in col..n {
                    a[r][c] -= f * a[col][c];
                }
                b[r] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

/// Optimum of an all-binary problem by trying every assignment.
pub fn enumerate_binary(inst: &MilpInstance) -> Result<Option<(f64, Vec<f64>)>> {
    let n = inst.n_vars();
    if n > ORACLE_MAX_BINARIES {
        return Err(Error::Capacity(format!(
            "enumeration oracle limited to {ORACLE_MAX_BINARIES} binaries, got {n}"
        )));
    }
    if inst.variables.iter().any(|v| !v.binary) {
        return Err(Error::Domain(
            "enumeration oracle needs an all-binary problem".into(),
        ));
    }
    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 0u64..(1 << n) {
        let x: Vec<f64> = (0..n).map(|j| ((mask >> j) & 1) as f64).collect();
        if inst.max_violation(&x) > FEAS {
            continue;
        }
        let v = inst.objective_value(&x);
        if best.as_ref().is_none_or(|(bv, _)| v < *bv) {
            best = Some((v, x));
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::Candidate;
    use crate::model::PhysParams;

    #[test]
    fn breakdown_cases() {
        assert_eq!(mc_share_breakdown(7.0, &[], 10.0), 17.0);
        assert_eq!(mc_share_breakdown(7.0, &[5.0], 10.0), 2.0);
        assert_eq!(mc_share_breakdown(7.0, &[9.0], 10.0), 0.0);
    }

    #[test]
    fn single_parent_pays_unicast() {
        let phys = PhysParams::default().with_circuitry(10.0);
        let g = phys.snr_th * phys.noise_mw / 40.0;
        let input = NodeDecisionInput {
            candidates: vec![Candidate {
                pn: 3,
                gain: g,
                others: vec![],
            }],
            phys,
            scheme: Scheme::Mc,
            w_max: None,
            snr_mode: SnrMode::Equality,
        };
        let d = node_decision_oracle(&input).unwrap().unwrap();
        assert!((d.requests[&3] - 40.0).abs() < 1e-9);
        assert!((d.objective - 60.0).abs() < 1e-9);
    }

    #[test]
    fn vertex_oracle_on_a_square() {
        let mut p = MilpInstance::new("sq");
        let x = p.add_continuous("x", 0.0, 1.0);
        let y = p.add_continuous("y", 0.0, 1.0);
        p.add_constraint("c", vec![(x, 1.0), (y, 1.0)], Relation::Le, 1.0);
        p.set_objective(vec![(x, -1.0), (y, -2.0)]);
        let (v, s) = lp_vertex_oracle(&p).unwrap().unwrap();
        assert_eq!(v, -2.0);
        assert_eq!(s, vec![0.0, 1.0]);
    }

    #[test]
    fn knapsack_by_enumeration() {
        let mut p = MilpInstance::new("k");
        let w = [3.0, 4.0, 5.0];
        let v = [4.0, 5.0, 6.0];
        let xs: Vec<usize> = (0..3).map(|k| p.add_binary(format!("x{k}"))).collect();
        p.add_constraint(
            "w",
            xs.iter().zip(w).map(|(&x, a)| (x, a)).collect(),
            Relation::Le,
            8.0,
        );
        p.set_objective(xs.iter().zip(v).map(|(&x, c)| (x, -c)).collect());
        let (best, x) = enumerate_binary(&p).unwrap().unwrap();
        assert_eq!(best, -10.0);
        assert_eq!(x, vec![1.0, 0.0, 1.0]);
    }
}
