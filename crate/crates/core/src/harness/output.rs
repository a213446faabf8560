use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::{Algorithm, ExperimentConfig, OutputFormat};
use super::run::{ExperimentResult, RunRecord};
use crate::error::{Error, Result};

/// Normalization reference: 200 mW transmit plus 10 mW circuitry.
pub const NORMALIZATION_MW: f64 = 210.0;

pub const CSV_HEADER: [&str; 12] = [
    "seed",
    "n",
    "p_c_mw",
    "algorithm",
    "p_net_tot_mw",
    "p_net_tx_mw",
    "social_cost",
    "avg_pns_per_cn",
    "n_slots",
    "rounds",
    "wall_ms",
    "topo_hash",
];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalizedMetrics {
    pub p_net_tot: f64,
    pub social_cost: f64,
}

/// Network power and social cost divided by [`NORMALIZATION_MW`].
pub fn normalize(rec: &RunRecord) -> NormalizedMetrics {
    NormalizedMetrics {
        p_net_tot: rec.p_net_tot_mw / NORMALIZATION_MW,
        social_cost: rec.social_cost / NORMALIZATION_MW,
    }
}

/// `v` with 9 significant digits, shortest form (like C's `%.9g`).
pub fn fmt_sig9(v: f64) -> String {
    if v.is_nan() {
        return "NaN".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf" } else { "-inf" }.into();
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{v:.8e}");
    let (mant, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        let s = format!("{v:.decimals$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        let mant = if mant.contains('.') {
            mant.trim_end_matches('0').trim_end_matches('.')
        } else {
            mant
        };
        format!("{mant}e{exp}")
    }
}

/// Records as CSV text with [`CSV_HEADER`].
pub fn records_to_csv(records: &[RunRecord]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record([
            r.seed.to_string(),
            r.n.to_string(),
            fmt_sig9(r.p_c_mw),
            r.algorithm.to_string(),
            fmt_sig9(r.p_net_tot_mw),
            fmt_sig9(r.p_net_tx_mw),
            fmt_sig9(r.social_cost),
            fmt_sig9(r.avg_pns_per_cn),
            r.n_slots.to_string(),
            r.rounds.to_string(),
            fmt_sig9(r.wall_ms),
            r.topo_hash.clone(),
        ])?;
    }
    finish(w)
}

fn failures_to_csv(records: &[RunRecord]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["seed", "n", "p_c_mw", "run", "algorithm", "error"])?;
    for r in records.iter().filter(|r| r.failed()) {
        w.write_record([
            r.seed.to_string(),
            r.n.to_string(),
            fmt_sig9(r.p_c_mw),
            r.run.to_string(),
            r.algorithm.to_string(),
            r.error.clone().unwrap_or_default(),
        ])?;
    }
    finish(w)
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w
        .into_inner()
        .map_err(|e| Error::io("<csv>", e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

pub fn read_records_json(text: &str) -> Result<Vec<RunRecord>> {
    Ok(serde_json::from_str(text)?)
}

/// Mean and 95% normal-approximation half-width over the finite values.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanCi {
    pub count: usize,
    pub mean: f64,
    pub ci95: f64,
}

impl MeanCi {
    pub fn of(values: impl IntoIterator<Item = f64>) -> Self {
        let v: Vec<f64> = values.into_iter().filter(|x| x.is_finite()).collect();
        let k = v.len();
        if k == 0 {
            return Self {
                count: 0,
                mean: f64::NAN,
                ci95: f64::NAN,
            };
        }
        let mean = v.iter().sum::<f64>() / k as f64;
        let ci95 = if k > 1 {
            let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1) as f64;
            1.96 * (var / k as f64).sqrt()
        } else {
            f64::NAN
        };
        Self {
            count: k,
            mean,
            ci95,
        }
    }
}

/// Per-`(n, p_c, algorithm)` aggregates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub n: usize,
    pub p_c_mw: f64,
    pub algorithm: Algorithm,
    pub runs: usize,
    pub failures: usize,
    pub p_net_tot_norm: MeanCi,
    pub social_cost_norm: MeanCi,
    pub p_net_tot_mw: MeanCi,
    pub p_net_tx_mw: MeanCi,
    pub avg_pns_per_cn: MeanCi,
    pub n_slots: MeanCi,
    pub rounds: MeanCi,
}

/// Groups in first-appearance order of `(n, p_c)`, then by algorithm.
pub fn summarize(records: &[RunRecord]) -> Vec<GroupSummary> {
    let mut cells: Vec<(usize, f64)> = Vec::new();
    let mut groups: BTreeMap<(usize, Algorithm), Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        let cell = (r.n, r.p_c_mw);
        let idx = cells.iter().position(|&c| c == cell).unwrap_or_else(|| {
            cells.push(cell);
            cells.len() - 1
        });
        groups.entry((idx, r.algorithm)).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|((idx, algorithm), rs)| {
            let ok: Vec<&&RunRecord> = rs.iter().filter(|r| !r.failed()).collect();
            let stat = |f: &dyn Fn(&RunRecord) -> f64| MeanCi::of(ok.iter().map(|r| f(r)));
            GroupSummary {
                n: cells[idx].0,
                p_c_mw: cells[idx].1,
                algorithm,
                runs: rs.len(),
                failures: rs.len() - ok.len(),
                p_net_tot_norm: stat(&|r| normalize(r).p_net_tot),
                social_cost_norm: stat(&|r| normalize(r).social_cost),
                p_net_tot_mw: stat(&|r| r.p_net_tot_mw),
                p_net_tx_mw: stat(&|r| r.p_net_tx_mw),
                avg_pns_per_cn: stat(&|r| r.avg_pns_per_cn),
                n_slots: stat(&|r| r.n_slots as f64),
                rounds: stat(&|r| r.rounds as f64),
            }
        })
        .collect()
}

pub fn summary_to_csv(groups: &[GroupSummary]) -> Result<String> {
    let metrics = [
        "p_net_tot_norm",
        "social_cost_norm",
        "p_net_tot_mw",
        "p_net_tx_mw",
        "avg_pns_per_cn",
        "n_slots",
        "rounds",
    ];
    let mut header = vec![
        "n".to_string(),
        "p_c_mw".into(),
        "algorithm".into(),
        "runs".into(),
        "failures".into(),
    ];
    for m in metrics {
        header.push(format!("{m}_mean"));
        header.push(format!("{m}_ci95"));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&header)?;
    for g in groups {
        let mut row = vec![
            g.n.to_string(),
            fmt_sig9(g.p_c_mw),
            g.algorithm.to_string(),
            g.runs.to_string(),
            g.failures.to_string(),
        ];
        for s in [
            g.p_net_tot_norm,
            g.social_cost_norm,
            g.p_net_tot_mw,
            g.p_net_tx_mw,
            g.avg_pns_per_cn,
            g.n_slots,
            g.rounds,
        ] {
            row.push(fmt_sig9(s.mean));
            row.push(fmt_sig9(s.ci95));
        }
        w.write_record(&row)?;
    }
    finish(w)
}

fn write(path: PathBuf, text: &str) -> Result<PathBuf> {
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

/// Writes records, failures and the summary into `dir` in the configured
/// formats and returns the files written.
pub fn write_outputs(
    res: &ExperimentResult,
    cfg: &ExperimentConfig,
    dir: &Path,
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    let summary = summarize(&res.records);
    if matches!(cfg.format, OutputFormat::Csv | OutputFormat::Both) {
        written.push(write(
            dir.join("records.csv"),
            &records_to_csv(&res.records)?,
        )?);
        written.push(write(dir.join("summary.csv"), &summary_to_csv(&summary)?)?);
    }
    if matches!(cfg.format, OutputFormat::Json | OutputFormat::Both) {
        written.push(write(
            dir.join("records.json"),
            &serde_json::to_string_pretty(&res.records)?,
        )?);
        written.push(write(
            dir.join("summary.json"),
            &serde_json::to_string_pretty(&summary)?,
        )?);
    }
    written.push(write(
        dir.join("failures.csv"),
        &failures_to_csv(&res.records)?,
    )?);
    written.push(write(dir.join("config.json"), &cfg.to_json()?)?);
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(alg: Algorithm, tot: f64) -> RunRecord {
        RunRecord {
            seed: 7,
            n: 5,
            p_c_mw: 10.0,
            run: 0,
            algorithm: alg,
            p_net_tot_mw: tot,
            p_net_tx_mw: tot / 2.0,
            social_cost: tot / 2.0,
            avg_pns_per_cn: 1.25,
            n_slots: 3,
            rounds: 2,
            wall_ms: 0.0,
            topo_hash: "abcd".into(),
            error: None,
        }
    }

    #[test]
    fn significant_digits() {
        assert_eq!(fmt_sig9(210.0), "210");
        assert_eq!(fmt_sig9(1.0 / 3.0), "0.333333333");
        assert_eq!(fmt_sig9(123456789.4), "123456789");
        assert_eq!(fmt_sig9(1234567890.0), "1.23456789e9");
        assert_eq!(fmt_sig9(2.5e-7), "2.5e-7");
        assert_eq!(fmt_sig9(-0.5), "-0.5");
        assert_eq!(fmt_sig9(f64::NAN), "NaN");
        assert_eq!(fmt_sig9(0.0), "0");
    }

    #[test]
    fn normalization_reference() {
        let r = rec(Algorithm::McMrc, 210.0);
        assert_eq!(normalize(&r).p_net_tot, 1.0);
        assert_eq!(normalize(&rec(Algorithm::McMrc, 0.0)).p_net_tot, 0.0);
    }

    #[test]
    fn empty_csv_is_header_only() {
        let s = records_to_csv(&[]).unwrap();
        assert_eq!(s, format!("{}\n", CSV_HEADER.join(",")));
    }

    #[test]
    fn json_round_trip_keeps_digits() {
        let mut bad = rec(Algorithm::GreedyMrc, f64::NAN);
        bad.error = Some("stalled".into());
        let recs = vec![rec(Algorithm::McMrc, 1.0 / 7.0), bad];
        let js = serde_json::to_string(&recs).unwrap();
        let back = read_records_json(&js).unwrap();
        assert_eq!(
            records_to_csv(&recs).unwrap(),
            records_to_csv(&back).unwrap()
        );
        assert!(back[1].p_net_tot_mw.is_nan());
    }

    #[test]
    fn summary_groups() {
        let recs = vec![rec(Algorithm::McMrc, 100.0), rec(Algorithm::McMrc, 300.0)];
        let s = summarize(&recs);
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].p_net_tot_mw.mean, 200.0);
        assert_eq!(s[0].p_net_tot_mw.count, 2);
        let recs = vec![rec(Algorithm::McMrc, 100.0), rec(Algorithm::SvMrc, 300.0)];
        assert_eq!(summarize(&recs).len(), 2);
    }
}
