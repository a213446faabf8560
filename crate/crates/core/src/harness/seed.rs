/// One step of the SplitMix64 generator: a bijective 64-bit mixer.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Topology seed of cell `(n, run)`:
/// `splitmix64(splitmix64(splitmix64(master) ^ n) ^ run)`.
///
/// The circuitry power and the algorithm list do not enter, so every `p_c`
/// value and every algorithm sees the same placement for a given run.
pub fn child_seed(master: u64, n: usize, run: usize) -> u64 {
    splitmix64(splitmix64(splitmix64(master) ^ n as u64) ^ run as u64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        // first outputs of the reference generator seeded with 0
        assert_eq!(splitmix64(0), 0xE220_A839_7B1D_CDAF);
        assert_eq!(splitmix64(0x9E37_79B9_7F4A_7C15), 0x6E78_9E6A_A1B9_65F4);
    }

    #[test]
    fn cells_get_distinct_seeds() {
        let mut seen = std::collections::BTreeSet::new();
        for n in 2..26 {
            for run in 0..200 {
                assert!(seen.insert(child_seed(1, n, run)));
            }
        }
    }
}
