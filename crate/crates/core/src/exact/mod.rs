//! Exact optimization: LP/MILP kernel, LP text format, the global time-slot
//! formulation and the per-node decision problem.

mod global;
mod instance;
mod lp;
mod lp_format;
mod milp;
mod node;
mod presolve;

pub use global::{
    build_global, extract_profile, GlobalLayout, GlobalOptions, GlobalScenario, GlobalSchedule,
};
pub use instance::{Constraint, MilpInstance, MilpSolution, MilpStatus, Relation, Variable};
pub use lp::{solve_lp, solve_lp_bounded, LpOutcome, LpStatus};
pub use lp_format::{from_lp_str, to_lp_string};
pub use milp::{solve_milp, solve_milp_with, MilpOptions};
pub use node::{
    build_node_milp, solve_node_decision, Candidate, NodeDecision, NodeDecisionInput, NodeVars,
    SnrMode,
};
