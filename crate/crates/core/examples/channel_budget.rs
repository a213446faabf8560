//! Link budget of a drawn topology: distances, unicast powers and how much
//! normalized SNR two weak links add up to under maximal ratio combining.
//!
//! cargo run --example channel_budget

use mrcast::model::{mw_to_dbm, snr_mrc};
use mrcast::{PhysParams, Topology};

fn main() -> mrcast::Result<()> {
    let phys = PhysParams::default().with_circuitry(10.0);
    let topo = Topology::generate(6, 250.0, 7, &phys)?;
    println!(
        "topology {} with source {}",
        topo.fingerprint(),
        topo.source()
    );

    for i in topo.receivers() {
        for &j in topo.neighbors(i) {
            let u = topo.unicast_power(i, j);
            println!(
                "{j} -> {i}: {:6.1} m, unicast {:8.3} mW ({:5.1} dBm)",
                topo.distance(i, j),
                u,
                mw_to_dbm(u)
            );
        }
    }

    // two transmitters at 60% of their unicast power each
    let i = topo
        .receivers()
        .find(|&i| topo.neighbors(i).len() >= 2)
        .unwrap();
    let nb = topo.neighbors(i);
    let links: Vec<(f64, f64)> = nb[..2]
        .iter()
        .map(|&j| (0.6 * topo.unicast_power(i, j), topo.gain(i, j)))
        .collect();
    let snr = snr_mrc(&links, phys.noise_mw);
    println!(
        "node {i} combining {} and {} at 60% each: SNR {:.3} (threshold {})",
        nb[0], nb[1], snr, phys.snr_th
    );
    Ok(())
}
