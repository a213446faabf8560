//! Reductions applied before every LP solve: fixed columns are substituted,
//! single-entry rows become bounds and parallel rows are merged into one
//! ranged row.

use std::collections::HashMap;

use super::instance::{MilpInstance, Relation};

/// Row `lo ≤ Σ a_j x_j ≤ hi` over reduced column indices.
#[derive(Clone, Debug)]
pub(super) struct RangedRow {
    pub coeffs: Vec<(usize, f64)>,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Clone, Debug)]
pub(super) struct Reduced {
    /// Original index of each kept column.
    pub cols: Vec<usize>,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub cost: Vec<f64>,
    pub rows: Vec<RangedRow>,
    /// Full-length point holding the values of removed columns.
    pub fixed: Vec<f64>,
}

impl Reduced {
    /// Expands a reduced point to all original columns.
    pub fn expand(&self, xr: &[f64]) -> Vec<f64> {
        let mut x = self.fixed.clone();
        for (k, &j) in self.cols.iter().enumerate() {
            x[j] = xr[k];
        }
        x
    }
}

const FIX_TOL: f64 = 1e-12;
const ROW_TOL: f64 = 1e-9;

/// `None` when the reductions alone prove infeasibility.
pub(super) fn presolve(inst: &MilpInstance, lo: &[f64], hi: &[f64]) -> Option<Reduced> {
    let n = inst.n_vars();
    let mut lo = lo.to_vec();
    let mut hi = hi.to_vec();
    let mut row_live = vec![true; inst.constraints.len()];

    // tighten bounds from single-entry rows until nothing changes
    for _ in 0..8 {
        let mut changed = false;
        for (r, c) in inst.constraints.iter().enumerate() {
            if !row_live[r] {
                continue;
            }
            let (rlo, rhi, free) = residual_row(c.coeffs.as_slice(), c.relation, c.rhs, &lo, &hi);
            match free.as_slice() {
                [] => {
                    let tol = ROW_TOL * (1.0 + c.rhs.abs());
                    if rlo > tol || rhi < -tol {
                        return None;
                    }
                    row_live[r] = false;
                }
                [(j, a)] if a.abs() > 1e-9 => {
                    let (mut l, mut h) = (rlo / a, rhi / a);
                    if *a < 0.0 {
                        std::mem::swap(&mut l, &mut h);
                    }
                    let j = *j;
                    if l > lo[j] {
                        lo[j] = l;
                    }
                    if h < hi[j] {
                        hi[j] = h;
                    }
                    if lo[j] > hi[j] {
                        if lo[j] > hi[j] + ROW_TOL * (1.0 + lo[j].abs()) {
                            return None;
                        }
                        let mid = 0.5 * (lo[j] + hi[j]);
                        lo[j] = mid;
                        hi[j] = mid;
                    }
                    row_live[r] = false;
                    changed = true;
                }
                _ => {}
            }
        }
        if !changed {
            break;
        }
    }

    let is_fixed = |j: usize| hi[j] - lo[j] <= FIX_TOL * (1.0 + lo[j].abs());
    let mut col_of = vec![usize::MAX; n];
    let mut cols = Vec::new();
    for j in 0..n {
        if !is_fixed(j) {
            col_of[j] = cols.len();
            cols.push(j);
        }
    }
    let fixed: Vec<f64> = (0..n)
        .map(|j| if is_fixed(j) { lo[j] } else { 0.0 })
        .collect();

    let mut rows: Vec<RangedRow> = Vec::new();
    let mut seen: HashMap<Vec<(usize, u64)>, usize> = HashMap::new();
    for (r, c) in inst.constraints.iter().enumerate() {
        if !row_live[r] {
            continue;
        }
        let (rlo, rhi, free) = residual_row(c.coeffs.as_slice(), c.relation, c.rhs, &lo, &hi);
        let mut coeffs: Vec<(usize, f64)> = free.into_iter().map(|(j, a)| (col_of[j], a)).collect();
        if coeffs.is_empty() {
            let tol = ROW_TOL * (1.0 + c.rhs.abs());
            if rlo > tol || rhi < -tol {
                return None;
            }
            continue;
        }
        coeffs.sort_by_key(|&(k, _)| k);
        // normalize so the largest entry is +1
        let (_, big) = coeffs
            .iter()
            .copied()
            .fold((0usize, 0.0f64), |(bk, ba), (k, a)| {
                if a.abs() > ba.abs() {
                    (k, a)
                } else {
                    (bk, ba)
                }
            });
        let (mut l, mut h) = (rlo / big, rhi / big);
        if big < 0.0 {
            std::mem::swap(&mut l, &mut h);
        }
        for (_, a) in &mut coeffs {
            *a /= big;
        }
        let key: Vec<(usize, u64)> = coeffs.iter().map(|&(k, a)| (k, a.to_bits())).collect();
        match seen.get(&key) {
            Some(&idx) => {
                let row = &mut rows[idx];
                row.lo = row.lo.max(l);
                row.hi = row.hi.min(h);
            }
            None => {
                seen.insert(key, rows.len());
                rows.push(RangedRow {
                    coeffs,
                    lo: l,
                    hi: h,
                });
            }
        }
    }
    for row in &mut rows {
        if row.lo > row.hi {
            if row.lo > row.hi + ROW_TOL * (1.0 + row.lo.abs()) {
                return None;
            }
            let mid = 0.5 * (row.lo + row.hi);
            row.lo = mid;
            row.hi = mid;
        }
    }

    let mut cost = vec![0.0; cols.len()];
    for &(j, c) in &inst.objective {
        if col_of[j] != usize::MAX {
            cost[col_of[j]] += c;
        }
    }
    Some(Reduced {
        lo: cols.iter().map(|&j| lo[j]).collect(),
        hi: cols.iter().map(|&j| hi[j]).collect(),
        cols,
        cost,
        rows,
        fixed,
    })
}

/// Row bounds after moving fixed columns to the right-hand side, with the
/// remaining nonzero terms.
fn residual_row(
    coeffs: &[(usize, f64)],
    relation: Relation,
    rhs: f64,
    lo: &[f64],
    hi: &[f64],
) -> (f64, f64, Vec<(usize, f64)>) {
    let mut merged: Vec<(usize, f64)> = Vec::with_capacity(coeffs.len());
    for &(j, a) in coeffs {
        match merged.iter_mut().find(|(k, _)| *k == j) {
            Some((_, b)) => *b += a,
            None => merged.push((j, a)),
        }
    }
    let mut offset = 0.0;
    let mut free = Vec::new();
    for (j, a) in merged {
        if a == 0.0 {
            continue;
        }
        if hi[j] - lo[j] <= FIX_TOL * (1.0 + lo[j].abs()) {
            offset += a * lo[j];
        } else {
            free.push((j, a));
        }
    }
    let b = rhs - offset;
    let (l, h) = match relation {
        Relation::Le => (f64::NEG_INFINITY, b),
        Relation::Ge => (b, f64::INFINITY),
        Relation::Eq => (b, b),
    };
    (l, h, free)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_columns_and_singletons_are_removed() {
        let mut p = MilpInstance::new("t");
        let x = p.add_continuous("x", 0.0, 10.0);
        let y = p.add_continuous("y", 2.0, 2.0);
        let z = p.add_continuous("z", 0.0, 10.0);
        p.add_constraint("a", vec![(x, 1.0), (y, 1.0)], Relation::Le, 5.0);
        p.add_constraint("b", vec![(x, 1.0), (z, 2.0)], Relation::Ge, 1.0);
        p.add_constraint("c", vec![(x, 2.0), (z, 4.0)], Relation::Le, 8.0);
        let lo: Vec<f64> = p.variables.iter().map(|v| v.lower).collect();
        let hi: Vec<f64> = p.variables.iter().map(|v| v.upper).collect();
        let red = presolve(&p, &lo, &hi).unwrap();
        assert_eq!(red.cols, vec![x, z]);
        assert_eq!(red.hi[0], 3.0);
        // b and c are parallel: one ranged row 0.5 <= 0.5x + z <= 2
        assert_eq!(red.rows.len(), 1);
        assert_eq!((red.rows[0].lo, red.rows[0].hi), (0.5, 2.0));
        assert_eq!(red.expand(&[1.0, 1.5]), vec![1.0, 2.0, 1.5]);
    }

    #[test]
    fn contradictions_are_caught() {
        let mut p = MilpInstance::new("t");
        let x = p.add_continuous("x", 0.0, 1.0);
        let y = p.add_continuous("y", 0.0, 1.0);
        p.add_constraint("a", vec![(x, 1.0), (y, 1.0)], Relation::Ge, 1.5);
        p.add_constraint("b", vec![(x, 1.0), (y, 1.0)], Relation::Le, 1.0);
        let lo = vec![0.0; 2];
        let hi = vec![1.0; 2];
        assert!(presolve(&p, &lo, &hi).is_none());
        assert!(presolve(&p, &[0.0, 1.0], &[0.0, 1.0]).is_none());
    }
}
