//! One receiver choosing its parents: the exact decision MILP next to the
//! exhaustive reference.
//!
//! cargo run --example node_decision

use mrcast::cost::Scheme;
use mrcast::exact::{solve_node_decision, Candidate, NodeDecisionInput, SnrMode};
use mrcast::oracle::node_decision_oracle;
use mrcast::PhysParams;

fn main() -> mrcast::Result<()> {
    let phys = PhysParams::default().with_circuitry(1.0);
    // candidate PN, its unicast power to us, requests others already make
    let offers = [
        (2, 60.0, vec![35.0]),
        (4, 45.0, vec![]),
        (7, 150.0, vec![140.0, 20.0]),
    ];
    let candidates: Vec<Candidate> = offers
        .iter()
        .map(|(pn, unicast, others)| Candidate {
            pn: *pn,
            gain: phys.snr_th * phys.noise_mw / unicast,
            others: others.clone(),
        })
        .collect();
    for scheme in [Scheme::Mc, Scheme::Sv] {
        let input = NodeDecisionInput {
            candidates: candidates.clone(),
            phys: phys.clone(),
            scheme,
            w_max: None,
            snr_mode: SnrMode::Equality,
        };
        let d = solve_node_decision(&input)?.expect("reachable");
        let o = node_decision_oracle(&input)?.expect("reachable");
        println!(
            "{scheme}: requests {:?} cost {:.4}",
            d.requests, d.objective
        );
        println!("    enumeration {:?} cost {:.4}", o.requests, o.objective);
    }
    Ok(())
}
