//! The centralized greedy: cheapest SNR per mW first, until everyone decodes.
//!
//! cargo run --example greedy_mrc

use mrcast::baselines::greedy_mrc;
use mrcast::{PhysParams, Topology};

fn main() -> mrcast::Result<()> {
    for p_c in [1.0, 10.0, 100.0] {
        let topo = Topology::generate(16, 250.0, 5, &PhysParams::default().with_circuitry(p_c))?;
        let g = greedy_mrc(&topo)?;
        println!(
            "p_c {p_c:>5} mW: radio {:8.2} mW, P_tot {:8.2} mW, {} transmitters, {} slots, {:.2} PNs/CN",
            g.raw_radio_mw,
            g.p_net_tot_mw,
            g.state.transmissions.len(),
            g.n_slots,
            g.avg_pns_per_cn
        );
    }
    let topo = Topology::generate(16, 250.0, 5, &PhysParams::default())?;
    let g = greedy_mrc(&topo)?;
    println!("decode order {:?}", g.state.decode_order);
    Ok(())
}
