//! Shapley-value sharing of one PN's sum transmit power among its CNs.
//!
//! The coalition cost of a set `S` of CNs is `1(S ≠ ∅)·(p_ct + max_{k∈S} p_k)`.

use crate::error::{Error, Result};
use crate::model::NodeId;

/// Largest group the permutation-sum oracle accepts.
pub const ORACLE_MAX_GROUP: usize = 9;

fn coalition_cost(requests: &[f64], members: u32, p_ct: f64) -> f64 {
    if members == 0 {
        return 0.0;
    }
    let mut max = f64::NEG_INFINITY;
    for (k, &p) in requests.iter().enumerate() {
        if members & (1 << k) != 0 {
            max = max.max(p);
        }
    }
    p_ct + max
}

/// Share of `requests[i]` by direct evaluation of the coalition sum.
pub fn sv_share_oracle(i: usize, requests: &[f64], p_ct: f64) -> Result<f64> {
    let m = requests.len();
    if m > ORACLE_MAX_GROUP {
        return Err(Error::Capacity(format!(
            "Shapley oracle limited to {ORACLE_MAX_GROUP} CNs, got {m}"
        )));
    }
    if i >= m {
        return Err(Error::Domain(format!("CN index {i} outside group of {m}")));
    }
    let mut fact = [1.0f64; ORACLE_MAX_GROUP + 1];
    for k in 1..=ORACLE_MAX_GROUP {
        fact[k] = fact[k - 1] * k as f64;
    }
    let me = 1u32 << i;
    let mut total = 0.0;
    for s in 0..(1u32 << m) {
        if s & me != 0 {
            continue;
        }
        let size = s.count_ones() as usize;
        let weight = fact[size] * fact[m - size - 1] / fact[m];
        total +=
            weight * (coalition_cost(requests, s | me, p_ct) - coalition_cost(requests, s, p_ct));
    }
    Ok(total)
}

/// Share of the CN at 1-based position `rank` of the ascending request list
/// (the sentinel `p_0 = 0` is implicit):
/// `p_ct/M + Σ_{n=1..rank} (p_n − p_{n−1}) / (M + 1 − n)`.
pub fn sv_share_closed(rank: usize, requests_sorted: &[f64], p_ct: f64) -> Result<f64> {
    let m = requests_sorted.len();
    if rank == 0 || rank > m {
        return Err(Error::Domain(format!("rank {rank} outside 1..={m}")));
    }
    if requests_sorted.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Domain("requests are not sorted ascending".into()));
    }
    let mut share = p_ct / m as f64;
    let mut prev = 0.0;
    for (k, &p) in requests_sorted[..rank].iter().enumerate() {
        share += (p - prev) / (m - k) as f64;
        prev = p;
    }
    Ok(share)
}

/// Shares of a whole group given as `(cn, request)` pairs, in input order.
///
/// Equal requests are ordered by CN id; the result does not depend on it.
pub fn sv_shares(group: &[(NodeId, f64)], p_ct: f64) -> Vec<(NodeId, f64)> {
    let m = group.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| {
        group[a]
            .1
            .total_cmp(&group[b].1)
            .then(group[a].0.cmp(&group[b].0))
    });
    let mut out = vec![(0, 0.0); m];
    let mut acc = if m > 0 { p_ct / m as f64 } else { 0.0 };
    let mut prev = 0.0;
    for (k, &idx) in order.iter().enumerate() {
        let p = group[idx].1;
        acc += (p - prev) / (m - k) as f64;
        prev = p;
        out[idx] = (group[idx].0, acc);
    }
    out
}

/// Slope and intercept of segment `n` of a CN's share as a function of its
/// own request `x`, valid while `x` lies between the `n`-th and `(n+1)`-th
/// smallest of the other requests (`others_sorted`, ascending):
///
/// `m(n) = 1/(M'+1−n)`,
/// `y(n) = p_ct/(M'+1) − Σ_{k=1..n} p_k / ((M'−k+1)(M'−k+2))`
///
/// where `M'` is the number of other CNs.
pub fn sv_piecewise_coeffs(n: usize, others_sorted: &[f64], p_ct: f64) -> Result<(f64, f64)> {
    let mo = others_sorted.len();
    if n > mo {
        return Err(Error::Domain(format!("segment {n} outside 0..={mo}")));
    }
    let slope = 1.0 / (mo + 1 - n) as f64;
    let mut intercept = p_ct / (mo + 1) as f64;
    for (k, &p) in others_sorted[..n].iter().enumerate() {
        let k = k + 1;
        intercept -= p / ((mo - k + 1) * (mo - k + 2)) as f64;
    }
    Ok((slope, intercept))
}

/// All `M'+1` segments; the share is their pointwise maximum (it is convex).
pub fn sv_piecewise_all(others_sorted: &[f64], p_ct: f64) -> Vec<(f64, f64)> {
    (0..=others_sorted.len())
        .map(|n| sv_piecewise_coeffs(n, others_sorted, p_ct).expect("segment in range"))
        .collect()
}

/// Share a newcomer requesting `x` would pay on top of `others`.
pub fn sv_share_joining(x: f64, others: &[f64], p_ct: f64) -> f64 {
    let mut group: Vec<(NodeId, f64)> = others
        .iter()
        .enumerate()
        .map(|(k, &p)| (k + 1, p))
        .collect();
    group.push((0, x));
    sv_shares(&group, p_ct).last().expect("non-empty").1
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * b.abs().max(1.0)
    }

    #[test]
    fn oracle_examples() {
        assert!(close(sv_share_oracle(0, &[7.0], 10.0).unwrap(), 17.0));
        assert!(close(sv_share_oracle(0, &[4.0, 4.0], 0.0).unwrap(), 2.0));
        let r = [1.0, 2.0, 3.0];
        let s: Vec<f64> = (0..3)
            .map(|i| sv_share_oracle(i, &r, 0.0).unwrap())
            .collect();
        assert!(close(s[0], 1.0 / 3.0));
        assert!(close(s[1], 5.0 / 6.0));
        assert!(close(s[2], 11.0 / 6.0));
        assert!(close(s.iter().sum(), 3.0));
    }

    #[test]
    fn oracle_capacity_guard() {
        let r = [1.0; 10];
        assert!(matches!(
            sv_share_oracle(0, &r, 0.0),
            Err(Error::Capacity(_))
        ));
    }

    #[test]
    fn closed_form_examples() {
        let r = [1.0, 2.0, 3.0];
        let expect = [1.0 / 3.0, 5.0 / 6.0, 11.0 / 6.0];
        for k in 0..3 {
            assert!(close(sv_share_closed(k + 1, &r, 0.0).unwrap(), expect[k]));
            assert!(close(
                sv_share_closed(k + 1, &r, 6.0).unwrap(),
                expect[k] + 2.0
            ));
        }
        assert!(close(sv_share_closed(1, &[7.0], 10.0).unwrap(), 17.0));
        assert!(matches!(
            sv_share_closed(1, &[3.0, 1.0], 0.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn group_shares_are_order_free_and_balanced() {
        let g = [(4, 3.0), (1, 1.0), (9, 2.0), (2, 2.0)];
        let s = sv_shares(&g, 10.0);
        let total: f64 = s.iter().map(|x| x.1).sum();
        assert!(close(total, 13.0));
        assert_eq!(s[0].0, 4);
        // equal requests pay equal shares
        assert!(close(s[2].1, s[3].1));
        for (k, &(_, v)) in s.iter().enumerate() {
            let req: Vec<f64> = g.iter().map(|x| x.1).collect();
            assert!(close(v, sv_share_oracle(k, &req, 10.0).unwrap()));
        }
    }

    #[test]
    fn piecewise_examples() {
        let o = [2.0, 5.0];
        let (m0, y0) = sv_piecewise_coeffs(0, &o, 0.0).unwrap();
        assert!(close(m0, 1.0 / 3.0) && close(y0, 0.0));
        let (m1, y1) = sv_piecewise_coeffs(1, &o, 0.0).unwrap();
        assert!(close(m1, 0.5) && close(y1, -1.0 / 3.0));
        let (m2, y2) = sv_piecewise_coeffs(2, &o, 0.0).unwrap();
        assert!(close(m2, 1.0) && close(y2, -17.0 / 6.0));
        assert!(sv_piecewise_coeffs(3, &o, 0.0).is_err());
        // continuity at the breakpoints
        assert!(close(m0 * 2.0 + y0, m1 * 2.0 + y1));
        assert!(close(m1 * 5.0 + y1, m2 * 5.0 + y2));
    }

    #[test]
    fn piecewise_matches_joining_share() {
        let o = [2.0, 5.0, 5.0, 11.0];
        let segs = sv_piecewise_all(&o, 10.0);
        for x in [0.5, 2.0, 3.0, 5.0, 7.5, 11.0, 40.0] {
            let pw = segs
                .iter()
                .map(|&(m, y)| m * x + y)
                .fold(f64::NEG_INFINITY, f64::max);
            assert!(close(pw, sv_share_joining(x, &o, 10.0)), "x = {x}");
        }
    }
}
