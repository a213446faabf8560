//! Multi-hop broadcast in wireless networks where receivers combine copies of
//! the message from several parents (maximal-ratio combining).
//!
//! The crate covers the whole pipeline:
//!
//! - [`model`]: geometry, path-loss channel, SNR, neighbor and action sets,
//!   hop-ranks, power accounting and slot schedules.
//! - [`cost`]: marginal-contribution and Shapley-value cost sharing, node
//!   costs, social cost and ledgers.
//! - [`exact`]: a bounded-variable simplex, a branch-and-bound MILP kernel,
//!   the global time-slot formulation and the per-node decision problem.
//! - [`game`]: the decentralized best-response engine with Nash-equilibrium
//!   certification.
//! - [`baselines`]: the accumulative greedy broadcast and one-parent variants.
//! - [`harness`]: Monte-Carlo experiments, normalization and CSV/JSON output.
//!
//! Runnable walkthroughs live in `examples/`; `cargo run --example` lists them.

pub mod baselines;
pub mod cost;
pub mod error;
pub mod exact;
pub mod game;
pub mod harness;
pub mod model;
pub mod oracle;
pub mod verify;

pub use error::{Error, Result};
pub use model::{ActionProfile, NetworkState, NodeId, PhysParams, Topology};
