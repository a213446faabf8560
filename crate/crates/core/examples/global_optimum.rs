//! The centralized optimum of a small network as a MILP, read back into a
//! slot schedule and compared with the game outcome.
//!
//! cargo run --release --example global_optimum

use mrcast::cost::Scheme;
use mrcast::exact::{build_global, extract_profile, solve_milp, GlobalOptions, GlobalScenario};
use mrcast::game::{run_to_ne, GameConfig};
use mrcast::{PhysParams, Topology};

fn main() -> mrcast::Result<()> {
    let topo = Topology::generate(6, 250.0, 11, &PhysParams::default().with_circuitry(1.0))?;
    for (label, opts) in [
        ("power, MRC", GlobalOptions::default()),
        (
            "power, one parent",
            GlobalOptions {
                one_parent: true,
                ..GlobalOptions::default()
            },
        ),
        (
            "social cost, MRC",
            GlobalOptions {
                scenario: GlobalScenario::SocialCost,
                ..GlobalOptions::default()
            },
        ),
    ] {
        let (inst, layout) = build_global(&topo, &opts)?;
        let sol = solve_milp(&inst);
        let sched = extract_profile(&sol, &layout, &topo, opts.scenario)?;
        println!(
            "{label}: {} vars, {} rows, {} B&B nodes, objective {:.3}",
            inst.n_vars(),
            inst.constraints.len(),
            sol.bnb_nodes,
            sol.objective
        );
        for (slot, node, p) in &sched.transmissions {
            println!("    slot {slot}: node {node} sends at {p:.3} mW");
        }
        println!(
            "    P_tot {:.3} mW, social cost {:.3} mW, {:.2} PNs/CN",
            sched.p_net_tot_mw, sched.social_cost, sched.avg_pns_per_cn
        );
    }
    let ne = run_to_ne(&topo, &GameConfig::new(Scheme::Mc, true))?;
    println!("MC-MRC equilibrium: P_tot {:.3} mW", ne.p_net_tot_mw);
    Ok(())
}
