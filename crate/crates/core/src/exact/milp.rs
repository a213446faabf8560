//! Best-first branch and bound over the binaries of a [`MilpInstance`].

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::instance::{MilpInstance, MilpSolution, MilpStatus};
use super::lp::{solve_lp_bounded, LpStatus};

#[derive(Clone, Debug)]
pub struct MilpOptions {
    /// Nodes explored before giving up with [`MilpStatus::GapLimit`].
    pub node_limit: usize,
    /// Absolute optimality gap.
    pub abs_gap: f64,
    /// Distance from {0, 1} below which a binary counts as integral.
    pub int_tol: f64,
}

impl Default for MilpOptions {
    fn default() -> Self {
        Self {
            node_limit: 200_000,
            abs_gap: 1e-6,
            int_tol: 1e-7,
        }
    }
}

struct Node {
    bound: f64,
    depth: usize,
    seq: usize,
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    // max-heap: smallest bound first, then deepest, then oldest
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then(self.depth.cmp(&other.depth))
            .then(other.seq.cmp(&self.seq))
    }
}

pub fn solve_milp(inst: &MilpInstance) -> MilpSolution {
    solve_milp_with(inst, &MilpOptions::default())
}

pub fn solve_milp_with(inst: &MilpInstance, opts: &MilpOptions) -> MilpSolution {
    let lo: Vec<f64> = inst.variables.iter().map(|v| v.lower).collect();
    let hi: Vec<f64> = inst.variables.iter().map(|v| v.upper).collect();
    let mut heap = BinaryHeap::new();
    // depth-first until the first incumbent, best-first afterwards
    let mut dive = vec![Node {
        bound: f64::NEG_INFINITY,
        depth: 0,
        seq: 0,
        lo,
        hi,
    }];
    let mut seq = 1;
    let mut incumbent: Option<(f64, Vec<f64>)> = None;
    let mut nodes = 0;
    let mut lp_iterations = 0;
    // nodes whose LP could not be solved stay open with their parent bound
    let mut unresolved: Vec<f64> = Vec::new();

    loop {
        let (node, diving) = match dive.pop() {
            Some(n) => (n, true),
            None => match heap.pop() {
                Some(n) => (n, false),
                None => break,
            },
        };
        let cutoff = incumbent
            .as_ref()
            .map_or(f64::INFINITY, |(v, _)| v - opts.abs_gap);
        if node.bound >= cutoff {
            if diving {
                continue;
            }
            // everything left is at least as bad
            heap.clear();
            break;
        }
        if nodes >= opts.node_limit {
            heap.push(node);
            break;
        }
        nodes += 1;
        let lp = solve_lp_bounded(inst, &node.lo, &node.hi);
        lp_iterations += lp.iterations;
        match lp.status {
            LpStatus::Optimal => {}
            LpStatus::Infeasible => continue,
            LpStatus::Unbounded if nodes == 1 => {
                return MilpSolution {
                    status: MilpStatus::Unbounded,
                    objective: f64::NEG_INFINITY,
                    assignment: Vec::new(),
                    bound: f64::NEG_INFINITY,
                    bnb_nodes: nodes,
                    lp_iterations,
                };
            }
            LpStatus::Unbounded | LpStatus::IterationLimit | LpStatus::Numerical => {
                log::warn!(
                    "{}: LP status {:?} at B&B node {nodes}",
                    inst.name,
                    lp.status
                );
                unresolved.push(node.bound);
                continue;
            }
        }
        if lp.objective >= cutoff {
            continue;
        }
        match pick_branch(inst, &lp.x, opts.int_tol) {
            None => {
                let (value, x) = polish(inst, &node, lp.x, lp.objective, &mut lp_iterations);
                if incumbent.as_ref().is_none_or(|(v, _)| value < *v) {
                    incumbent = Some((value, x));
                }
                heap.extend(dive.drain(..));
            }
            Some(j) => {
                // the rounded side is explored first when diving
                let sides = if lp.x[j] >= 0.5 {
                    [(0.0, 0.0), (1.0, 1.0)]
                } else {
                    [(1.0, 1.0), (0.0, 0.0)]
                };
                for (l, h) in sides {
                    let mut lo = node.lo.clone();
                    let mut hi = node.hi.clone();
                    lo[j] = l;
                    hi[j] = h;
                    let child = Node {
                        bound: lp.objective,
                        depth: node.depth + 1,
                        seq,
                        lo,
                        hi,
                    };
                    if incumbent.is_none() {
                        dive.push(child);
                    } else {
                        heap.push(child);
                    }
                    seq += 1;
                }
            }
        }
    }

    heap.extend(dive.drain(..));
    let cutoff = incumbent
        .as_ref()
        .map_or(f64::INFINITY, |(v, _)| v - opts.abs_gap);
    unresolved.retain(|&b| b < cutoff);
    let open_bound = heap
        .iter()
        .map(|n| n.bound)
        .chain(unresolved.iter().copied())
        .fold(f64::INFINITY, f64::min);
    let limited = !heap.is_empty() || !unresolved.is_empty();
    match incumbent {
        Some((value, x)) => MilpSolution {
            status: if limited {
                MilpStatus::GapLimit
            } else {
                MilpStatus::Optimal
            },
            objective: value,
            assignment: x,
            bound: if limited {
                open_bound.min(value)
            } else {
                value
            },
            bnb_nodes: nodes,
            lp_iterations,
        },
        None => MilpSolution {
            status: if limited {
                MilpStatus::GapLimit
            } else {
                MilpStatus::Infeasible
            },
            objective: f64::NAN,
            assignment: Vec::new(),
            bound: if limited { open_bound } else { f64::INFINITY },
            bnb_nodes: nodes,
            lp_iterations,
        },
    }
}

/// Fractional binary to split on: lowest priority class, then most
/// fractional, then lowest index.
fn pick_branch(inst: &MilpInstance, x: &[f64], tol: f64) -> Option<usize> {
    let mut best: Option<(usize, u32, f64)> = None;
    for (j, v) in inst.variables.iter().enumerate() {
        if !v.binary {
            continue;
        }
        let frac = (x[j] - x[j].floor()).min(x[j].ceil() - x[j]);
        if frac <= tol {
            continue;
        }
        let better = match best {
            None => true,
            Some((_, p, f)) => {
                v.branch_priority < p || (v.branch_priority == p && frac > f + 1e-12)
            }
        };
        if better {
            best = Some((j, v.branch_priority, frac));
        }
    }
    best.map(|b| b.0)
}

/// Snaps binaries to {0, 1} and re-solves the continuous part so the
/// reported point satisfies the rows exactly at integral binaries.
fn polish(
    inst: &MilpInstance,
    node: &Node,
    x: Vec<f64>,
    value: f64,
    lp_iterations: &mut usize,
) -> (f64, Vec<f64>) {
    let mut lo = node.lo.clone();
    let mut hi = node.hi.clone();
    let mut changed = false;
    for (j, v) in inst.variables.iter().enumerate() {
        if v.binary {
            let r = x[j].round();
            changed |= r != x[j];
            lo[j] = r;
            hi[j] = r;
        }
    }
    if !changed {
        return (value, x);
    }
    let lp = solve_lp_bounded(inst, &lo, &hi);
    *lp_iterations += lp.iterations;
    if lp.status == LpStatus::Optimal {
        (lp.objective, lp.x)
    } else {
        (value, x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::instance::Relation;

    #[test]
    fn integral_relaxation_needs_no_branching() {
        let mut p = MilpInstance::new("t");
        let a = p.add_binary("a");
        let b = p.add_binary("b");
        p.add_constraint("c", vec![(a, 1.0), (b, 1.0)], Relation::Ge, 1.0);
        p.set_objective(vec![(a, 1.0), (b, 2.0)]);
        let s = solve_milp(&p);
        assert!(s.is_optimal());
        assert_eq!(s.bnb_nodes, 1);
        assert!((s.objective - 1.0).abs() < 1e-12);
    }

    #[test]
    fn small_knapsack() {
        // max 5a + 4b + 3c s.t. 2a + 3b + c <= 4  ->  a, c: 8
        let mut p = MilpInstance::new("k");
        let v: Vec<usize> = (0..3).map(|k| p.add_binary(format!("x{k}"))).collect();
        p.add_constraint(
            "cap",
            vec![(v[0], 2.0), (v[1], 3.0), (v[2], 1.0)],
            Relation::Le,
            4.0,
        );
        p.set_objective(vec![(v[0], -5.0), (v[1], -4.0), (v[2], -3.0)]);
        let s = solve_milp(&p);
        assert!(s.is_optimal());
        assert!((s.objective + 8.0).abs() < 1e-9);
    }

    #[test]
    fn infeasible_integer_problem() {
        let mut p = MilpInstance::new("t");
        let a = p.add_binary("a");
        let b = p.add_binary("b");
        p.add_constraint("c", vec![(a, 1.0), (b, 1.0)], Relation::Eq, 1.5);
        assert_eq!(solve_milp(&p).status, MilpStatus::Infeasible);
    }

    #[test]
    fn node_limit_reports_gap_limit() {
        let mut p = MilpInstance::new("t");
        let v: Vec<usize> = (0..10).map(|k| p.add_binary(format!("x{k}"))).collect();
        p.add_constraint(
            "odd",
            v.iter().map(|&j| (j, 2.0)).collect(),
            Relation::Eq,
            9.0,
        );
        let s = solve_milp_with(
            &p,
            &MilpOptions {
                node_limit: 5,
                ..MilpOptions::default()
            },
        );
        assert_eq!(s.status, MilpStatus::GapLimit);
    }
}
