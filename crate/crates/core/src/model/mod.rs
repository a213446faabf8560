//! Network model: channel, SNR, neighborhoods, hop-ranks and power accounting.

mod params;
mod profile;
mod state;
mod topology;

pub use params::{dbm_to_mw, mw_to_dbm, PhysParams};
pub use profile::ActionProfile;
pub use state::{
    action_set, assign_slots, compute_powers, hop_ranks, update_hop_ranks_from, NetworkState,
    Powers, SlotSchedule,
};
pub use topology::{Topology, TopologyDoc, MAX_TOPOLOGY_ATTEMPTS};

/// Node index. The source is an ordinary index recorded in the [`Topology`].
pub type NodeId = usize;

/// Hop distance from the source; `None` means the node is not connected.
pub type HopRank = Option<u32>;

/// Linear power gain of the path-loss channel at distance `dist_m`:
/// `(λ / (4π l0))² · (l0 / d)^α`.
///
/// Distances below the reference distance are clamped to it.
pub fn channel_gain(dist_m: f64, phys: &PhysParams) -> f64 {
    let d = if dist_m < phys.ref_dist_m {
        log::warn!(
            "distance {dist_m} m below reference distance {} m, clamping",
            phys.ref_dist_m
        );
        phys.ref_dist_m
    } else {
        dist_m
    };
    let near = phys.wavelength_m / (4.0 * std::f64::consts::PI * phys.ref_dist_m);
    near * near * (phys.ref_dist_m / d).powf(phys.pathloss_exp)
}

pub fn snr_unicast(p_mw: f64, gain: f64, noise_mw: f64) -> f64 {
    p_mw * gain / noise_mw
}

/// Aggregate SNR after maximal-ratio combining of independent copies, each
/// given as `(radio-link power, gain)`.
pub fn snr_mrc(links: &[(f64, f64)], noise_mw: f64) -> f64 {
    links.iter().map(|&(p, g)| p * g).sum::<f64>() / noise_mw
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn gain_matches_hand_arithmetic() {
        let phys = PhysParams::default();
        // (0.125 / 4π)² = 9.894640e-5
        assert!(rel(channel_gain(1.0, &phys), 9.89464e-5) < 1e-5);
        assert!(rel(channel_gain(100.0, &phys), 9.89464e-11) < 1e-5);
        let near = 0.125 / (4.0 * std::f64::consts::PI);
        assert_eq!(channel_gain(phys.ref_dist_m, &phys), near * near);
    }

    #[test]
    fn gain_clamps_below_reference() {
        let phys = PhysParams::default();
        assert_eq!(channel_gain(0.2, &phys), channel_gain(1.0, &phys));
    }

    #[test]
    fn unicast_snr() {
        let g = channel_gain(100.0, &PhysParams::default());
        assert!(rel(snr_unicast(200.0, g, 1e-9), 19.789) < 1e-4);
        assert_eq!(snr_unicast(0.0, g, 1e-9), 0.0);
        assert!(
            rel(
                snr_unicast(400.0, g, 1e-9),
                2.0 * snr_unicast(200.0, g, 1e-9)
            ) < 1e-15
        );
    }

    #[test]
    fn mrc_snr_is_additive() {
        let noise = 1e-9;
        assert!(rel(snr_mrc(&[(5e-9, 1.0), (5e-9, 1.0)], noise), 10.0) < 1e-12);
        let g = 3.3e-10;
        assert_eq!(snr_mrc(&[(17.0, g)], noise), snr_unicast(17.0, g, noise));
        let links = [(12.0, 1e-10), (150.0, 7.1e-11), (0.3, 4e-8)];
        let sum: f64 = links.iter().map(|&(p, g)| snr_unicast(p, g, noise)).sum();
        assert!(rel(snr_mrc(&links, noise), sum) < 1e-12);
    }
}
