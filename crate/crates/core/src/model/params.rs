use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical-layer constants shared by every node.
///
/// All powers are linear milliwatts and `snr_th` is a linear ratio; dB only
/// appears at I/O boundaries (see [`dbm_to_mw`]).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysParams {
    pub wavelength_m: f64,
    pub ref_dist_m: f64,
    pub pathloss_exp: f64,
    pub noise_mw: f64,
    pub snr_th: f64,
    pub p_max_mw: f64,
    pub p_min_mw: f64,
    /// Transmit circuitry power.
    pub p_ct_mw: f64,
    /// Receive circuitry power, paid once per slot a node listens to.
    pub p_cr_mw: f64,
}

impl Default for PhysParams {
    fn default() -> Self {
        Self {
            wavelength_m: 0.125,
            ref_dist_m: 1.0,
            pathloss_exp: 3.0,
            noise_mw: dbm_to_mw(-90.0),
            snr_th: 10.0,
            p_max_mw: 200.0,
            p_min_mw: 0.0,
            p_ct_mw: 10.0,
            p_cr_mw: 10.0,
        }
    }
}

impl PhysParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("wavelength_m", self.wavelength_m),
            ("ref_dist_m", self.ref_dist_m),
            ("pathloss_exp", self.pathloss_exp),
            ("noise_mw", self.noise_mw),
            ("snr_th", self.snr_th),
            ("p_max_mw", self.p_max_mw),
            ("p_ct_mw", self.p_ct_mw),
            ("p_cr_mw", self.p_cr_mw),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!(
                    "{name} must be finite and > 0, got {v}"
                )));
            }
        }
        if !(self.p_min_mw.is_finite() && self.p_min_mw >= 0.0) {
            return Err(Error::Config(format!(
                "p_min_mw must be finite and >= 0, got {}",
                self.p_min_mw
            )));
        }
        if self.p_min_mw > self.p_max_mw {
            return Err(Error::Config(format!(
                "p_min_mw ({}) exceeds p_max_mw ({})",
                self.p_min_mw, self.p_max_mw
            )));
        }
        Ok(())
    }

    /// Same parameters with transmit and receive circuitry both set to `p_c`.
    pub fn with_circuitry(mut self, p_c_mw: f64) -> Self {
        self.p_ct_mw = p_c_mw;
        self.p_cr_mw = p_c_mw;
        self
    }

    /// Radio-link power a single transmitter needs to deliver exactly the
    /// decoding threshold over a link with the given gain.
    pub fn unicast_power(&self, gain: f64) -> f64 {
        self.snr_th * self.noise_mw / gain
    }
}

pub fn dbm_to_mw(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

pub fn mw_to_dbm(mw: f64) -> f64 {
    10.0 * mw.log10()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noise_default_is_minus_90_dbm() {
        let p = PhysParams::default();
        assert!((p.noise_mw - 1e-9).abs() < 1e-24);
        assert!((mw_to_dbm(p.noise_mw) + 90.0).abs() < 1e-9);
    }

    #[test]
    fn validate_rejects_bad_values() {
        assert!(PhysParams::default().validate().is_ok());
        let mut p = PhysParams::default();
        p.p_min_mw = 300.0;
        assert!(p.validate().is_err());
        let mut p = PhysParams::default();
        p.noise_mw = 0.0;
        assert!(p.validate().is_err());
        let mut p = PhysParams::default();
        p.p_min_mw = -1.0;
        assert!(p.validate().is_err());
        // thresholds below 1 (negative dB) are fine
        let mut p = PhysParams::default();
        p.snr_th = 0.5;
        assert!(p.validate().is_ok());
    }
}
