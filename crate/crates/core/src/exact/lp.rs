//! Dense-tableau primal simplex for bounded variables.
//!
//! Every row gets a slack (`[0, ∞)` for `≤`, `(-∞, 0]` for `≥`, `[0, 0]` for
//! `=`) so the slacks form the starting basis. Rows whose slack would start
//! out of bounds get an artificial column; phase I drives those to zero.
//! Columns and rows are equilibrated before solving, the ratio test is the
//! two-pass Harris test, and the tableau is rebuilt from the original rows at
//! regular intervals and before optimality is declared.

use super::instance::MilpInstance;
use super::presolve::{presolve, Reduced};

/// Primal feasibility tolerance on scaled rows.
const FEAS_TOL: f64 = 1e-9;
/// Reduced-cost tolerance.
const OPT_TOL: f64 = 1e-9;
/// Smallest tableau entry accepted as a pivot.
const PIVOT_TOL: f64 = 1e-7;
/// Tableau entries below this are treated as zero.
const ZERO_TOL: f64 = 1e-12;
/// Bound relaxation used by the first pass of the ratio test.
const HARRIS_TOL: f64 = 1e-9;
/// Consecutive degenerate pivots before switching to Bland's rule.
const DEGENERATE_LIMIT: usize = 50;
/// Pivots between rebuilds of the tableau.
const REINVERT_EVERY: usize = 100;
/// Largest scaled row violation accepted in a returned point.
const CHECK_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
    /// The final point failed the row check.
    Numerical,
}

#[derive(Clone, Debug)]
pub struct LpOutcome {
    pub status: LpStatus,
    /// Structural variable values (empty unless optimal).
    pub x: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
}

impl LpOutcome {
    fn failed(status: LpStatus, iterations: usize) -> Self {
        Self {
            status,
            x: Vec::new(),
            objective: f64::NAN,
            iterations,
        }
    }
}

/// Solves the continuous relaxation under the instance's own bounds.
pub fn solve_lp(inst: &MilpInstance) -> LpOutcome {
    let lo: Vec<f64> = inst.variables.iter().map(|v| v.lower).collect();
    let hi: Vec<f64> = inst.variables.iter().map(|v| v.upper).collect();
    solve_lp_bounded(inst, &lo, &hi)
}

/// Solves the continuous relaxation with overriding variable bounds.
pub fn solve_lp_bounded(inst: &MilpInstance, lo: &[f64], hi: &[f64]) -> LpOutcome {
    let n = inst.n_vars();
    if (0..n).any(|j| lo[j] > hi[j] + FEAS_TOL) {
        return LpOutcome::failed(LpStatus::Infeasible, 0);
    }
    let Some(red) = presolve(inst, lo, hi) else {
        return LpOutcome::failed(LpStatus::Infeasible, 0);
    };
    let mut tab = Tableau::build(&red);
    let limit = 20_000 + 50 * (tab.m + tab.ncols);

    if tab.n_art > 0 {
        let mut cost = vec![0.0; tab.ncols];
        for c in &mut cost[tab.ncols - tab.n_art..] {
            *c = 1.0;
        }
        match tab.run(&cost, limit) {
            LpStatus::Optimal => {}
            LpStatus::Unbounded => unreachable!("phase I is bounded below by 0"),
            s => return LpOutcome::failed(s, tab.iterations),
        }
        let infeas: f64 = (tab.ncols - tab.n_art..tab.ncols)
            .map(|j| tab.value(j))
            .sum();
        if infeas > FEAS_TOL * (1.0 + tab.m as f64).sqrt() {
            return LpOutcome::failed(LpStatus::Infeasible, tab.iterations);
        }
        // artificials stay fixed where phase I left them, within tolerance
        // of zero
        for j in tab.ncols - tab.n_art..tab.ncols {
            let v = tab.value(j);
            tab.lo[j] = v;
            tab.hi[j] = v;
            tab.at_upper[j] = false;
        }
    }
    let mut cost = vec![0.0; tab.ncols];
    for (k, &c) in red.cost.iter().enumerate() {
        cost[k] = c * tab.col_scale[k];
    }
    let status = tab.run(&cost, limit);
    if status != LpStatus::Optimal {
        return LpOutcome::failed(status, tab.iterations);
    }
    let xr: Vec<f64> = (0..red.cols.len())
        .map(|k| (tab.value(k) * tab.col_scale[k]).clamp(red.lo[k], red.hi[k]))
        .collect();
    let x: Vec<f64> = red
        .expand(&xr)
        .into_iter()
        .enumerate()
        .map(|(j, v)| v.clamp(lo[j], hi[j]))
        .collect();
    // the basis can drift on long degenerate runs; never report such a point
    let worst = inst.constraints.iter().fold(0.0f64, |w, c| {
        let norm = c.coeffs.iter().fold(1.0f64, |s, &(_, a)| s.max(a.abs()));
        w.max(c.violation(&x) / norm)
    });
    if worst > CHECK_TOL {
        log::debug!("{}: LP point violates a row by {worst:e}", inst.name);
        return LpOutcome::failed(LpStatus::Numerical, tab.iterations);
    }
    LpOutcome {
        status,
        objective: inst.objective_value(&x),
        x,
        iterations: tab.iterations,
    }
}

struct Tableau {
    m: usize,
    ncols: usize,
    n_art: usize,
    /// `B⁻¹A`, row-major.
    t: Vec<f64>,
    basis: Vec<usize>,
    row_of: Vec<Option<usize>>,
    xb: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    at_upper: Vec<bool>,
    d: Vec<f64>,
    iterations: usize,
    /// Initial tableau and right-hand side, kept for rebuilds.
    a0: Vec<f64>,
    b0: Vec<f64>,
    /// Structural `x = scale · x'`.
    col_scale: Vec<f64>,
}

impl Tableau {
    fn build(red: &Reduced) -> Self {
        let n = red.cols.len();
        let m = red.rows.len();
        let mut dense = vec![vec![0.0; n]; m];
        for (r, row) in red.rows.iter().enumerate() {
            for &(k, a) in &row.coeffs {
                dense[r][k] += a;
            }
        }
        // row r reads a·x + s = 0 with slack s in [-hi, -lo]
        let mut slo: Vec<f64> = red.rows.iter().map(|r| -r.hi).collect();
        let mut shi: Vec<f64> = red.rows.iter().map(|r| -r.lo).collect();
        // geometric column scaling, then rows to unit max
        let mut col_scale = vec![1.0; n];
        for (j, cs) in col_scale.iter_mut().enumerate() {
            let (mut big, mut small) = (0.0f64, f64::INFINITY);
            for row in &dense {
                let a = row[j].abs();
                if a > 0.0 {
                    big = big.max(a);
                    small = small.min(a);
                }
            }
            if big > 0.0 {
                *cs = 1.0 / (big * small).sqrt();
            }
        }
        for r in 0..m {
            for j in 0..n {
                dense[r][j] *= col_scale[j];
            }
            let scale = dense[r].iter().fold(0.0f64, |s, a| s.max(a.abs()));
            let scale = if scale > 0.0 { scale } else { 1.0 };
            for a in &mut dense[r] {
                *a /= scale;
            }
            slo[r] /= scale;
            shi[r] /= scale;
        }
        let mut lo_all: Vec<f64> = (0..n).map(|j| red.lo[j] / col_scale[j]).collect();
        let mut hi_all: Vec<f64> = (0..n).map(|j| red.hi[j] / col_scale[j]).collect();

        let mut at_upper = Vec::with_capacity(n + m);
        let mut x0 = Vec::with_capacity(n);
        for j in 0..n {
            let up = !lo_all[j].is_finite();
            at_upper.push(up);
            x0.push(if up { hi_all[j] } else { lo_all[j] });
        }

        // rows whose slack would start out of bounds get an artificial
        let mut art_sign = vec![0.0; m];
        let mut slack_val = vec![0.0; m];
        let mut resid = vec![0.0; m];
        for r in 0..m {
            let (l, h) = (slo[r], shi[r]);
            resid[r] = -dense[r].iter().zip(&x0).map(|(a, x)| a * x).sum::<f64>();
            if resid[r] >= l - FEAS_TOL && resid[r] <= h + FEAS_TOL {
                slack_val[r] = resid[r].clamp(l, h);
            } else {
                let clamp = resid[r].clamp(l, h);
                slack_val[r] = clamp;
                art_sign[r] = if resid[r] > clamp { 1.0 } else { -1.0 };
            }
        }
        let n_art = art_sign.iter().filter(|&&s| s != 0.0).count();
        let ncols = n + m + n_art;

        let mut t = vec![0.0; m * ncols];
        let mut b0 = vec![0.0; m];
        let mut basis = vec![0; m];
        let mut row_of = vec![None; ncols];
        let mut xb = vec![0.0; m];
        lo_all.extend_from_slice(&slo);
        hi_all.extend_from_slice(&shi);
        let mut k = 0;
        for r in 0..m {
            let row = &mut t[r * ncols..(r + 1) * ncols];
            row[..n].copy_from_slice(&dense[r]);
            row[n + r] = 1.0;
            if art_sign[r] != 0.0 {
                let a = n + m + k;
                k += 1;
                let s = art_sign[r];
                row[a] = s;
                // basic column is the artificial: flip the row to make it +1
                for v in row.iter_mut() {
                    *v *= s;
                }
                b0[r] *= s;
                basis[r] = a;
                row_of[a] = Some(r);
                xb[r] = (resid[r] - slack_val[r]).abs();
                // slack rests at the bound it was clamped to
                at_upper.push(slo[r] != shi[r] && slack_val[r] == shi[r]);
            } else {
                basis[r] = n + r;
                row_of[n + r] = Some(r);
                xb[r] = slack_val[r];
                at_upper.push(false);
            }
        }
        lo_all.extend(std::iter::repeat_n(0.0, n_art));
        hi_all.extend(std::iter::repeat_n(f64::INFINITY, n_art));
        at_upper.extend(std::iter::repeat_n(false, n_art));
        Self {
            m,
            ncols,
            n_art,
            a0: t.clone(),
            t,
            basis,
            row_of,
            xb,
            lo: lo_all,
            hi: hi_all,
            at_upper,
            d: vec![0.0; ncols],
            iterations: 0,
            b0,
            col_scale,
        }
    }

    fn nonbasic_value(&self, j: usize) -> f64 {
        if self.at_upper[j] {
            self.hi[j]
        } else {
            self.lo[j]
        }
    }

    fn value(&self, j: usize) -> f64 {
        match self.row_of[j] {
            Some(r) => self.xb[r],
            None => self.nonbasic_value(j),
        }
    }

    /// Rebuilds `B⁻¹A` and the basic values from the original rows. Leaves
    /// the tableau untouched if the basis looks singular.
    fn reinvert(&mut self) -> bool {
        let (m, nc) = (self.m, self.ncols);
        let mut t = self.a0.clone();
        let mut b = self.b0.clone();
        let mut assigned = vec![false; m];
        let mut new_basis = vec![0; m];
        for &q in &self.basis {
            let mut best: Option<(usize, f64)> = None;
            for r in 0..m {
                let a = t[r * nc + q].abs();
                if !assigned[r] && best.is_none_or(|(_, v)| a > v) {
                    best = Some((r, a));
                }
            }
            let Some((r, piv)) = best else { return false };
            if piv < 1e-11 {
                return false;
            }
            let inv = 1.0 / t[r * nc + q];
            for v in &mut t[r * nc..(r + 1) * nc] {
                *v *= inv;
            }
            t[r * nc + q] = 1.0;
            b[r] *= inv;
            let (before, rest) = t.split_at_mut(r * nc);
            let (prow, after) = rest.split_at_mut(nc);
            let br = b[r];
            for (o, other) in before.chunks_exact_mut(nc).enumerate().chain(
                after
                    .chunks_exact_mut(nc)
                    .enumerate()
                    .map(|(k, c)| (k + r + 1, c)),
            ) {
                let f = other[q];
                if f != 0.0 {
                    for (v, &p) in other.iter_mut().zip(prow.iter()) {
                        *v -= f * p;
                    }
                    other[q] = 0.0;
                    b[o] -= f * br;
                }
            }
            assigned[r] = true;
            new_basis[r] = q;
        }
        self.row_of.iter_mut().for_each(|r| *r = None);
        for (r, &q) in new_basis.iter().enumerate() {
            self.row_of[q] = Some(r);
        }
        let nonbasic: Vec<(usize, f64)> = (0..nc)
            .filter(|&j| self.row_of[j].is_none())
            .map(|j| (j, self.nonbasic_value(j)))
            .filter(|&(_, v)| v != 0.0)
            .collect();
        for r in 0..m {
            let row = &t[r * nc..(r + 1) * nc];
            self.xb[r] = b[r] - nonbasic.iter().map(|&(j, v)| row[j] * v).sum::<f64>();
        }
        self.t = t;
        self.basis = new_basis;
        true
    }

    fn price(&mut self, cost: &[f64]) {
        self.d.copy_from_slice(cost);
        for r in 0..self.m {
            let cb = cost[self.basis[r]];
            if cb != 0.0 {
                let row = &self.t[r * self.ncols..(r + 1) * self.ncols];
                for (d, &a) in self.d.iter_mut().zip(row) {
                    *d -= cb * a;
                }
            }
        }
        for r in 0..self.m {
            self.d[self.basis[r]] = 0.0;
        }
    }

    /// Entering column and direction (+1 increase, -1 decrease). Dantzig's
    /// rule, or the lowest eligible index under Bland's rule.
    fn entering(&self, bland: bool, rejected: &[bool]) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64, f64)> = None;
        for j in 0..self.ncols {
            if self.row_of[j].is_some() || self.lo[j] == self.hi[j] || rejected[j] {
                continue;
            }
            let d = self.d[j];
            let dir = if !self.at_upper[j] && d < -OPT_TOL {
                1.0
            } else if self.at_upper[j] && d > OPT_TOL {
                -1.0
            } else {
                continue;
            };
            if bland {
                return Some((j, dir));
            }
            if best.is_none_or(|(_, _, s)| d.abs() > s) {
                best = Some((j, dir, d.abs()));
            }
        }
        best.map(|(j, dir, _)| (j, dir))
    }

    /// Step length and blocking row (with the side the leaving variable
    /// exits at) for entering column `q` moving in direction `dir`; `None`
    /// as the row means a bound flip of `q`. `Err` if the only blocking
    /// pivots are too small to use.
    fn ratio_test(&self, q: usize, dir: f64) -> Result<(f64, Option<(usize, bool)>), ()> {
        let nc = self.ncols;
        let flip = self.hi[q] - self.lo[q];
        let slack = HARRIS_TOL;
        let blocking = |r: usize| -> Option<(f64, f64, bool)> {
            let alpha = dir * self.t[r * nc + q];
            let b = self.basis[r];
            if alpha > ZERO_TOL && self.lo[b].is_finite() {
                Some((alpha, self.xb[r] - self.lo[b], false))
            } else if alpha < -ZERO_TOL && self.hi[b].is_finite() {
                Some((-alpha, self.hi[b] - self.xb[r], true))
            } else {
                None
            }
        };
        // pass 1: longest step that keeps every basic within relaxed bounds
        let mut theta_max = flip;
        for r in 0..self.m {
            if let Some((a, room, _)) = blocking(r) {
                theta_max = theta_max.min(((room + slack) / a).max(0.0));
            }
        }
        if !theta_max.is_finite() {
            return Ok((f64::INFINITY, None));
        }
        // pass 2: among rows blocking within that step, the largest pivot
        let mut pick: Option<(usize, f64, f64, bool)> = None;
        for r in 0..self.m {
            let Some((a, room, to_upper)) = blocking(r) else {
                continue;
            };
            let step = (room / a).max(0.0);
            if step > theta_max {
                continue;
            }
            let b = self.basis[r];
            let better = match pick {
                None => true,
                Some((pr, _, pa, _)) => a > pa || (a == pa && b < self.basis[pr]),
            };
            if better {
                pick = Some((r, step, a, to_upper));
            }
        }
        match pick {
            Some((_, step, a, _)) if step < flip && a < PIVOT_TOL => Err(()),
            Some((r, step, _, up)) if step < flip => Ok((step, Some((r, up)))),
            _ => Ok((flip, None)),
        }
    }

    fn run(&mut self, cost: &[f64], limit: usize) -> LpStatus {
        self.price(cost);
        let mut degenerate = 0;
        let mut since_reinvert = 0;
        let mut rejected = vec![false; self.ncols];
        loop {
            if self.iterations >= limit {
                return LpStatus::IterationLimit;
            }
            if since_reinvert >= REINVERT_EVERY {
                since_reinvert = 0;
                rejected.iter_mut().for_each(|r| *r = false);
                if self.reinvert() {
                    self.price(cost);
                }
            }
            let bland = degenerate > DEGENERATE_LIMIT;
            let Some((q, dir)) = self.entering(bland, &rejected) else {
                if since_reinvert == 0 {
                    return LpStatus::Optimal;
                }
                // confirm optimality on a fresh tableau
                since_reinvert = REINVERT_EVERY;
                continue;
            };
            let Ok((theta, leave)) = self.ratio_test(q, dir) else {
                rejected[q] = true;
                continue;
            };
            if rejected.iter().any(|&r| r) {
                rejected.iter_mut().for_each(|r| *r = false);
            }
            self.iterations += 1;
            since_reinvert += 1;
            if !theta.is_finite() {
                return LpStatus::Unbounded;
            }
            if theta <= 1e-12 {
                degenerate += 1;
            } else {
                degenerate = 0;
            }

            if theta > 0.0 {
                for r in 0..self.m {
                    let a = self.t[r * self.ncols + q];
                    if a != 0.0 {
                        self.xb[r] -= dir * theta * a;
                    }
                }
            }
            match leave {
                None => {
                    self.at_upper[q] = !self.at_upper[q];
                }
                Some((r, to_upper)) => {
                    let entering_value = self.nonbasic_value(q) + dir * theta;
                    let out = self.basis[r];
                    self.shift_bound(out, self.xb[r], to_upper);
                    self.at_upper[out] = if !self.lo[out].is_finite() {
                        true
                    } else if !self.hi[out].is_finite() {
                        false
                    } else {
                        to_upper
                    };
                    self.row_of[out] = None;
                    self.pivot(r, q);
                    self.basis[r] = q;
                    self.row_of[q] = Some(r);
                    self.xb[r] = entering_value;
                }
            }
        }
    }

    /// A variable leaving slightly past its bound (allowed by the Harris
    /// test) takes that value as its new bound. Snapping it back would move
    /// the other basics by the excess divided by the pivot.
    fn shift_bound(&mut self, j: usize, value: f64, to_upper: bool) {
        let fixed = self.lo[j] == self.hi[j];
        if to_upper && value > self.hi[j] {
            self.hi[j] = value;
            if fixed {
                self.lo[j] = value;
            }
        } else if !to_upper && value < self.lo[j] {
            self.lo[j] = value;
            if fixed {
                self.hi[j] = value;
            }
        }
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let nc = self.ncols;
        let piv = self.t[r * nc + q];
        {
            let row = &mut self.t[r * nc..(r + 1) * nc];
            let inv = 1.0 / piv;
            for v in row.iter_mut() {
                *v *= inv;
            }
            row[q] = 1.0;
        }
        let (before, rest) = self.t.split_at_mut(r * nc);
        let (prow, after) = rest.split_at_mut(nc);
        for other in before
            .chunks_exact_mut(nc)
            .chain(after.chunks_exact_mut(nc))
        {
            let f = other[q];
            if f != 0.0 {
                for (o, &p) in other.iter_mut().zip(prow.iter()) {
                    *o -= f * p;
                }
                other[q] = 0.0;
            }
        }
        let f = self.d[q];
        if f != 0.0 {
            for (d, &p) in self.d.iter_mut().zip(prow.iter()) {
                *d -= f * p;
            }
            self.d[q] = 0.0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::instance::Relation;

    #[test]
    fn single_bound_row() {
        let mut p = MilpInstance::new("t");
        let x = p.add_continuous("x", 0.0, 10.0);
        p.add_constraint("c", vec![(x, 1.0)], Relation::Ge, 3.0);
        p.set_objective(vec![(x, 1.0)]);
        let s = solve_lp(&p);
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective - 3.0).abs() < 1e-12);
    }

    #[test]
    fn two_vars() {
        let mut p = MilpInstance::new("t");
        let x = p.add_continuous("x", 0.0, 1.0);
        let y = p.add_continuous("y", 0.0, 1.0);
        p.add_constraint("c", vec![(x, 1.0), (y, 1.0)], Relation::Le, 1.0);
        p.set_objective(vec![(x, -1.0), (y, -1.0)]);
        let s = solve_lp(&p);
        assert!((s.objective + 1.0).abs() < 1e-12);
    }

    #[test]
    fn infeasible_rows() {
        let mut p = MilpInstance::new("t");
        let x = p.add_continuous("x", 0.0, 1.0);
        p.add_constraint("c", vec![(x, 1.0)], Relation::Ge, 2.0);
        assert_eq!(solve_lp(&p).status, LpStatus::Infeasible);
        let mut p = MilpInstance::new("t");
        let x = p.add_continuous("x", 0.0, 5.0);
        let y = p.add_continuous("y", 0.0, 5.0);
        p.add_constraint("a", vec![(x, 1.0), (y, 1.0)], Relation::Eq, 4.0);
        p.add_constraint("b", vec![(x, 1.0), (y, 1.0)], Relation::Le, 3.0);
        assert_eq!(solve_lp(&p).status, LpStatus::Infeasible);
    }

    #[test]
    fn equality_with_upper_bounds() {
        // min 2x + 3y + z s.t. x + y + z = 4, x - y >= -1, x,y,z in [0,2]
        let mut p = MilpInstance::new("t");
        let x = p.add_continuous("x", 0.0, 2.0);
        let y = p.add_continuous("y", 0.0, 2.0);
        let z = p.add_continuous("z", 0.0, 2.0);
        p.add_constraint("a", vec![(x, 1.0), (y, 1.0), (z, 1.0)], Relation::Eq, 4.0);
        p.add_constraint("b", vec![(x, 1.0), (y, -1.0)], Relation::Ge, -1.0);
        p.set_objective(vec![(x, 2.0), (y, 3.0), (z, 1.0)]);
        let s = solve_lp(&p);
        assert_eq!(s.status, LpStatus::Optimal);
        // z = 2, then x + y = 2 at cost 2x + 3y: x = 2, y = 0
        assert!((s.objective - 6.0).abs() < 1e-9, "{}", s.objective);
        assert!(p.max_violation(&s.x) < 1e-9);
    }

    fn solve_file(text: &str) -> (MilpInstance, LpOutcome) {
        let inst = crate::exact::from_lp_str(text).unwrap();
        let out = solve_lp(&inst);
        (inst, out)
    }

    #[test]
    fn degenerate_small_pivot_stays_feasible() {
        // a basic slightly past its bound leaves through a 7e-4 pivot
        let (inst, s) = solve_file(include_str!("../../tests/data/degenerate_node.lp"));
        assert_eq!(s.status, LpStatus::Optimal);
        assert!(inst.max_violation(&s.x) < 1e-7);
        assert!((s.objective - 1.10204).abs() < 1e-5, "{}", s.objective);
    }

    #[test]
    fn long_degenerate_run() {
        // reference optimum from an independent solver
        let (inst, s) = solve_file(include_str!("../../tests/data/degenerate_global.lp"));
        assert_eq!(s.status, LpStatus::Optimal);
        assert!(inst.max_violation(&s.x) < 1e-6);
        assert!((s.objective - 143.2406).abs() < 1e-4, "{}", s.objective);
    }
}
