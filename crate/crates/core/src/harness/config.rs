use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::PhysParams;

/// Algorithms the harness can run on a topology.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "MC-MRC")]
    McMrc,
    #[serde(rename = "SV-MRC")]
    SvMrc,
    #[serde(rename = "MC-OPN")]
    McOpn,
    #[serde(rename = "SV-OPN")]
    SvOpn,
    #[serde(rename = "MILP-MRC")]
    MilpMrc,
    #[serde(rename = "MILP-OPN")]
    MilpOpn,
    #[serde(rename = "GreedyMRC")]
    GreedyMrc,
}

impl Algorithm {
    pub const ALL: [Algorithm; 7] = [
        Algorithm::McMrc,
        Algorithm::SvMrc,
        Algorithm::McOpn,
        Algorithm::SvOpn,
        Algorithm::MilpMrc,
        Algorithm::MilpOpn,
        Algorithm::GreedyMrc,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::McMrc => "MC-MRC",
            Algorithm::SvMrc => "SV-MRC",
            Algorithm::McOpn => "MC-OPN",
            Algorithm::SvOpn => "SV-OPN",
            Algorithm::MilpMrc => "MILP-MRC",
            Algorithm::MilpOpn => "MILP-OPN",
            Algorithm::GreedyMrc => "GreedyMRC",
        }
    }

    pub fn is_milp(self) -> bool {
        matches!(self, Algorithm::MilpMrc | Algorithm::MilpOpn)
    }

    /// Allowed node counts.
    pub fn n_range(self) -> (usize, usize) {
        if self.is_milp() {
            (2, 8)
        } else {
            (2, 25)
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown algorithm '{s}' (expected one of {})",
                    Algorithm::ALL.map(|a| a.as_str()).join(", ")
                ))
            })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
    Both,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            "both" => Ok(OutputFormat::Both),
            _ => Err(Error::Config(format!(
                "unknown format '{s}' (csv, json or both)"
            ))),
        }
    }
}

/// Physical parameters that replace the defaults. Circuitry power is not
/// here: it comes from the `p_c_values` sweep.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhysOverrides {
    pub wavelength_m: Option<f64>,
    pub ref_dist_m: Option<f64>,
    pub pathloss_exp: Option<f64>,
    pub noise_mw: Option<f64>,
    pub snr_th: Option<f64>,
    pub p_max_mw: Option<f64>,
    pub p_min_mw: Option<f64>,
}

impl PhysOverrides {
    /// Defaults with the overrides applied and both circuitry powers at `p_c`.
    pub fn apply(&self, p_c_mw: f64) -> PhysParams {
        let d = PhysParams::default();
        PhysParams {
            wavelength_m: self.wavelength_m.unwrap_or(d.wavelength_m),
            ref_dist_m: self.ref_dist_m.unwrap_or(d.ref_dist_m),
            pathloss_exp: self.pathloss_exp.unwrap_or(d.pathloss_exp),
            noise_mw: self.noise_mw.unwrap_or(d.noise_mw),
            snr_th: self.snr_th.unwrap_or(d.snr_th),
            p_max_mw: self.p_max_mw.unwrap_or(d.p_max_mw),
            p_min_mw: self.p_min_mw.unwrap_or(d.p_min_mw),
            p_ct_mw: p_c_mw,
            p_cr_mw: p_c_mw,
        }
    }
}

/// One experiment. `n` counts every node, the source included.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n_values: Vec<usize>,
    pub p_c_values: Vec<f64>,
    pub runs: usize,
    pub seed: u64,
    pub algorithms: Vec<Algorithm>,
    pub area_m: f64,
    pub phys: PhysOverrides,
    /// Output directory; nothing is written when absent.
    pub output: Option<PathBuf>,
    pub format: OutputFormat,
    /// Worker threads; `None` uses one per core.
    pub threads: Option<usize>,
    /// Store measured wall time. Off by default so output is reproducible
    /// byte for byte.
    pub record_wall_time: bool,
    /// Slot budget of the global MILP; `None` is one slot per receiver.
    pub milp_slots: Option<usize>,
    pub max_rounds: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n_values: vec![16],
            p_c_values: vec![1.0, 10.0, 100.0],
            runs: 200,
            seed: 1,
            algorithms: vec![
                Algorithm::McMrc,
                Algorithm::SvMrc,
                Algorithm::McOpn,
                Algorithm::SvOpn,
                Algorithm::GreedyMrc,
            ],
            area_m: 250.0,
            phys: PhysOverrides::default(),
            output: None,
            format: OutputFormat::Csv,
            threads: None,
            record_wall_time: false,
            milp_slots: None,
            max_rounds: 50,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.runs == 0 {
            return Err(Error::Config("runs must be at least 1".into()));
        }
        if self.n_values.is_empty() || self.p_c_values.is_empty() || self.algorithms.is_empty() {
            return Err(Error::Config(
                "n_values, p_c_values and algorithms must be non-empty".into(),
            ));
        }
        for &a in &self.algorithms {
            let (lo, hi) = a.n_range();
            if let Some(&n) = self.n_values.iter().find(|&&n| n < lo || n > hi) {
                return Err(Error::Config(format!(
                    "{a} runs on {lo}..={hi} nodes, got n = {n}"
                )));
            }
        }
        if !(self.area_m.is_finite() && self.area_m > 0.0) {
            return Err(Error::Config(format!(
                "area_m must be > 0, got {}",
                self.area_m
            )));
        }
        for &p_c in &self.p_c_values {
            self.phys.apply(p_c).validate()?;
        }
        if self.threads == Some(0) {
            return Err(Error::Config("threads must be at least 1".into()));
        }
        if self.milp_slots == Some(0) {
            return Err(Error::Config("milp_slots must be at least 1".into()));
        }
        if self.max_rounds == 0 {
            return Err(Error::Config("max_rounds must be at least 1".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for a in Algorithm::ALL {
            assert_eq!(a.as_str().parse::<Algorithm>().unwrap(), a);
            let js = serde_json::to_string(&a).unwrap();
            assert_eq!(js, format!("\"{}\"", a.as_str()));
        }
        assert!("BIP".parse::<Algorithm>().is_err());
    }

    #[test]
    fn partial_json_keeps_defaults() {
        let cfg = ExperimentConfig::from_json(r#"{"runs": 3, "algorithms": ["MC-MRC"]}"#).unwrap();
        assert_eq!(cfg.runs, 3);
        assert_eq!(cfg.p_c_values, vec![1.0, 10.0, 100.0]);
        assert!(ExperimentConfig::from_json(r#"{"rusn": 3}"#).is_err());
    }

    #[test]
    fn guards() {
        let mut cfg = ExperimentConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.algorithms.push(Algorithm::MilpMrc);
        assert!(cfg.validate().is_err());
        cfg.n_values = vec![6];
        assert!(cfg.validate().is_ok());
        cfg.runs = 0;
        assert!(cfg.validate().is_err());
        cfg.runs = 1;
        cfg.n_values = vec![1];
        assert!(cfg.validate().is_err());
        cfg.n_values = vec![5];
        cfg.p_c_values = vec![-1.0];
        assert!(cfg.validate().is_err());
    }
}
