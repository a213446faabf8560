use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{channel_gain, snr_unicast, NodeId, PhysParams};
use crate::error::{Error, Result};

/// Regeneration attempts before a seed is declared unusable.
pub const MAX_TOPOLOGY_ATTEMPTS: u32 = 100;

/// Node placement, source identity and the derived channel-gain matrix.
///
/// Immutable once built; share it freely between workers.
#[derive(Clone, Debug)]
pub struct Topology {
    source: NodeId,
    positions: Vec<[f64; 2]>,
    area_m: f64,
    phys: PhysParams,
    gains: Vec<f64>,
    neighbors: Vec<Vec<NodeId>>,
}

/// On-disk form of a [`Topology`]. Gains are recomputed on load and checked
/// against `gain_checksum`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TopologyDoc {
    pub source: NodeId,
    pub area_m: f64,
    pub positions: Vec<[f64; 2]>,
    pub phys: PhysParams,
    pub gain_checksum: String,
}

impl Topology {
    pub fn from_positions(
        positions: Vec<[f64; 2]>,
        source: NodeId,
        area_m: f64,
        phys: PhysParams,
    ) -> Result<Self> {
        phys.validate()?;
        let n = positions.len();
        if n < 2 {
            return Err(Error::Config(format!("need at least 2 nodes, got {n}")));
        }
        if source >= n {
            return Err(Error::Config(format!(
                "source {source} out of range for {n} nodes"
            )));
        }
        if !(area_m.is_finite() && area_m > 0.0) {
            return Err(Error::Config(format!("area must be > 0, got {area_m}")));
        }
        for (i, p) in positions.iter().enumerate() {
            if !p
                .iter()
                .all(|c| c.is_finite() && (0.0..=area_m).contains(c))
            {
                return Err(Error::Config(format!(
                    "node {i} at ({}, {}) lies outside the {area_m} m area",
                    p[0], p[1]
                )));
            }
        }
        let mut gains = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d = dist(&positions[i], &positions[j]);
                let g = channel_gain(d, &phys);
                gains[i * n + j] = g;
                gains[j * n + i] = g;
            }
        }
        let neighbors = (0..n)
            .map(|i| {
                (0..n)
                    .filter(|&j| {
                        j != i
                            && snr_unicast(phys.p_max_mw, gains[i * n + j], phys.noise_mw)
                                >= phys.snr_th
                    })
                    .collect()
            })
            .collect();
        Ok(Self {
            source,
            positions,
            area_m,
            phys,
            gains,
            neighbors,
        })
    }

    /// Draws `n` nodes uniformly in an `area_m` square and picks the source
    /// uniformly among them.
    ///
    /// Attempt `k` uses ChaCha8 stream `k` of `seed`: the source index is drawn
    /// first, then the x/y coordinates node by node. Draws whose neighbor
    /// graph does not reach every node from the source are discarded.
    pub fn generate(n: usize, area_m: f64, seed: u64, phys: &PhysParams) -> Result<Self> {
        if n < 2 {
            return Err(Error::Config(format!("need at least 2 nodes, got {n}")));
        }
        for attempt in 0..MAX_TOPOLOGY_ATTEMPTS {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(u64::from(attempt));
            let source = rng.gen_range(0..n);
            let positions = (0..n)
                .map(|_| [rng.gen_range(0.0..area_m), rng.gen_range(0.0..area_m)])
                .collect();
            let topo = Self::from_positions(positions, source, area_m, phys.clone())?;
            if topo.is_connected() {
                return Ok(topo);
            }
            log::debug!("seed {seed}: attempt {attempt} disconnected, redrawing");
        }
        Err(Error::Config(format!(
            "seed {seed}: no connected topology of {n} nodes in {area_m} m after {MAX_TOPOLOGY_ATTEMPTS} attempts"
        )))
    }

    /// Same placement under different physical parameters.
    pub fn with_phys(&self, phys: PhysParams) -> Result<Self> {
        Self::from_positions(self.positions.clone(), self.source, self.area_m, phys)
    }

    pub fn n_nodes(&self) -> usize {
        self.positions.len()
    }

    pub fn source(&self) -> NodeId {
        self.source
    }

    pub fn positions(&self) -> &[[f64; 2]] {
        &self.positions
    }

    pub fn area_m(&self) -> f64 {
        self.area_m
    }

    pub fn phys(&self) -> &PhysParams {
        &self.phys
    }

    pub fn gain(&self, i: NodeId, j: NodeId) -> f64 {
        self.gains[i * self.n_nodes() + j]
    }

    pub fn distance(&self, i: NodeId, j: NodeId) -> f64 {
        dist(&self.positions[i], &self.positions[j])
    }

    /// Nodes able to deliver the decoding threshold to `i` by unicast at full power.
    pub fn neighbors(&self, i: NodeId) -> &[NodeId] {
        &self.neighbors[i]
    }

    pub fn is_neighbor(&self, i: NodeId, j: NodeId) -> bool {
        self.neighbors[i].binary_search(&j).is_ok()
    }

    /// Radio-link power `j` needs to bring `i` exactly to the threshold alone.
    pub fn unicast_power(&self, i: NodeId, j: NodeId) -> f64 {
        self.phys.unicast_power(self.gain(i, j))
    }

    /// Receivers, i.e. every node except the source.
    pub fn receivers(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.n_nodes()).filter(move |&i| i != self.source)
    }

    /// Breadth-first reachability from the source over the neighbor graph.
    pub fn reachable_from_source(&self) -> Vec<bool> {
        let mut seen = vec![false; self.n_nodes()];
        let mut queue = VecDeque::from([self.source]);
        seen[self.source] = true;
        while let Some(u) = queue.pop_front() {
            for &v in &self.neighbors[u] {
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        seen
    }

    pub fn is_connected(&self) -> bool {
        self.reachable_from_source().into_iter().all(|r| r)
    }

    /// SHA-256 over the gain matrix bit patterns, hex encoded.
    pub fn gain_checksum(&self) -> String {
        let mut h = Sha256::new();
        for g in &self.gains {
            h.update(g.to_le_bytes());
        }
        hex::encode(h.finalize())
    }

    /// Short identifier of placement, source and channel; recorded with every
    /// experiment row so rows of one group can be checked to share a topology.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        h.update((self.source as u64).to_le_bytes());
        for p in &self.positions {
            h.update(p[0].to_le_bytes());
            h.update(p[1].to_le_bytes());
        }
        for g in &self.gains {
            h.update(g.to_le_bytes());
        }
        hex::encode(&h.finalize()[..8])
    }

    pub fn to_doc(&self) -> TopologyDoc {
        TopologyDoc {
            source: self.source,
            area_m: self.area_m,
            positions: self.positions.clone(),
            phys: self.phys.clone(),
            gain_checksum: self.gain_checksum(),
        }
    }

    pub fn from_doc(doc: TopologyDoc) -> Result<Self> {
        let topo = Self::from_positions(doc.positions, doc.source, doc.area_m, doc.phys)?;
        let actual = topo.gain_checksum();
        if actual != doc.gain_checksum {
            return Err(Error::Config(format!(
                "gain checksum mismatch: stored {}, recomputed {actual}",
                doc.gain_checksum
            )));
        }
        Ok(topo)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_doc())?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Self::from_doc(serde_json::from_str(s)?)
    }
}

fn dist(a: &[f64; 2], b: &[f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_nodes() {
        let phys = PhysParams::default();
        for seed in 0..20 {
            let t = Topology::generate(2, 250.0, seed, &phys).unwrap();
            assert_eq!(t.n_nodes(), 2);
            assert!(t.source() < 2);
            assert_eq!(t.gain(0, 1), t.gain(1, 0));
            assert_eq!(t.gain(0, 0), 0.0);
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let phys = PhysParams::default();
        let a = Topology::generate(12, 250.0, 99, &phys).unwrap();
        let b = Topology::generate(12, 250.0, 99, &phys).unwrap();
        assert_eq!(a.positions(), b.positions());
        assert_eq!(a.source(), b.source());
        assert_eq!(a.gain_checksum(), b.gain_checksum());
        let c = Topology::generate(12, 250.0, 100, &phys).unwrap();
        assert_ne!(a.positions(), c.positions());
    }

    #[test]
    fn gain_matrix_invariants() {
        let phys = PhysParams::default();
        let t = Topology::generate(20, 250.0, 3, &phys).unwrap();
        for i in 0..t.n_nodes() {
            assert_eq!(t.gain(i, i), 0.0);
            for j in 0..t.n_nodes() {
                assert_eq!(t.gain(i, j), t.gain(j, i));
                if i != j {
                    assert!(t.gain(i, j) > 0.0);
                }
            }
        }
    }

    #[test]
    fn neighbor_at_100m() {
        let phys = PhysParams::default();
        let t = Topology::from_positions(vec![[0.0, 0.0], [100.0, 0.0]], 0, 250.0, phys).unwrap();
        assert_eq!(t.neighbors(1), &[0]);
        assert_eq!(t.neighbors(0), &[1]);
    }

    #[test]
    fn infinite_threshold_has_no_neighbors() {
        let phys = PhysParams {
            snr_th: f64::MAX,
            ..PhysParams::default()
        };
        let t = Topology::from_positions(vec![[0.0, 0.0], [1.0, 0.0], [2.0, 2.0]], 0, 10.0, phys)
            .unwrap();
        for i in 0..3 {
            assert!(t.neighbors(i).is_empty());
        }
    }

    #[test]
    fn json_round_trip_and_checksum() {
        let t = Topology::generate(8, 250.0, 5, &PhysParams::default()).unwrap();
        let s = t.to_json().unwrap();
        let back = Topology::from_json(&s).unwrap();
        assert_eq!(back.positions(), t.positions());
        assert_eq!(back.fingerprint(), t.fingerprint());

        let mut doc: TopologyDoc = serde_json::from_str(&s).unwrap();
        doc.gain_checksum = "00".into();
        assert!(matches!(Topology::from_doc(doc), Err(Error::Config(_))));
    }

    #[test]
    fn positions_outside_area_rejected() {
        let r = Topology::from_positions(
            vec![[0.0, 0.0], [300.0, 0.0]],
            0,
            250.0,
            PhysParams::default(),
        );
        assert!(r.is_err());
    }

    #[test]
    fn impossible_density_fails_loudly() {
        // 2 nodes, tiny radio range relative to the area
        let phys = PhysParams {
            p_max_mw: 1e-6,
            ..PhysParams::default()
        };
        let r = Topology::generate(2, 10_000.0, 1, &phys);
        assert!(matches!(r, Err(Error::Config(_))));
    }
}
