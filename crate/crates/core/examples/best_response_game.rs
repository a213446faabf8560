//! Best-response dynamics to a Nash equilibrium under both cost-sharing
//! schemes, with and without combining, and a check that nobody can improve.
//!
//! cargo run --example best_response_game [seed]

use mrcast::cost::Scheme;
use mrcast::game::{certify_ne, run_to_ne, GameConfig};
use mrcast::{PhysParams, Topology};

fn main() -> mrcast::Result<()> {
    let seed = std::env::args()
        .nth(1)
        .map_or(Ok(3), |s| s.parse())
        .unwrap_or(3);
    let topo = Topology::generate(16, 250.0, seed, &PhysParams::default().with_circuitry(10.0))?;
    for (scheme, mrc) in [
        (Scheme::Mc, true),
        (Scheme::Sv, true),
        (Scheme::Mc, false),
        (Scheme::Sv, false),
    ] {
        let cfg = GameConfig::new(scheme, mrc);
        let tr = run_to_ne(&topo, &cfg)?;
        let cert = certify_ne(&topo, &tr.profile, &cfg)?;
        println!(
            "{:<7} {} rounds, {:>3} moves, P_tot {:8.2} mW, P_tx {:8.2} mW, {:.2} PNs/CN, {} slots, equilibrium {}",
            tr.algorithm,
            tr.rounds,
            tr.moves.len(),
            tr.p_net_tot_mw,
            tr.p_net_tx_mw,
            tr.avg_pns_per_cn,
            tr.n_slots,
            cert.certified
        );
        if scheme == Scheme::Mc {
            let first = tr.moves.first().map_or(f64::NAN, |m| m.potential_before);
            println!(
                "        network power fell from {first:.2} to {:.2}",
                tr.p_net_tot_mw
            );
        }
    }
    Ok(())
}
