use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{Algorithm, ExperimentConfig};
use super::seed::child_seed;
use crate::baselines::greedy_mrc;
use crate::cost::Scheme;
use crate::error::{Error, Result};
use crate::exact::{build_global, extract_profile, solve_milp, GlobalOptions};
use crate::game::{run_to_ne, GameConfig};
use crate::model::Topology;

/// One algorithm on one topology.
///
/// `rounds` is the number of best-response sweeps for the games and 0 for
/// the MILP and the greedy. The greedy's social cost is its transmit power,
/// which is what any budget-balanced sharing collects. Failed runs carry NaN
/// metrics and the error text.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub seed: u64,
    pub n: usize,
    pub p_c_mw: f64,
    pub run: usize,
    pub algorithm: Algorithm,
    #[serde(with = "nan_as_null")]
    pub p_net_tot_mw: f64,
    #[serde(with = "nan_as_null")]
    pub p_net_tx_mw: f64,
    #[serde(with = "nan_as_null")]
    pub social_cost: f64,
    #[serde(with = "nan_as_null")]
    pub avg_pns_per_cn: f64,
    pub n_slots: usize,
    pub rounds: usize,
    pub wall_ms: f64,
    pub topo_hash: String,
    #[serde(default)]
    pub error: Option<String>,
}

/// JSON has no NaN; failed metrics travel as `null`.
mod nan_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_nan() {
            s.serialize_none()
        } else {
            s.serialize_f64(*v)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}

impl RunRecord {
    pub fn failed(&self) -> bool {
        self.error.is_some()
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub records: Vec<RunRecord>,
}

impl ExperimentResult {
    pub fn failures(&self) -> impl Iterator<Item = &RunRecord> {
        self.records.iter().filter(|r| r.failed())
    }

    pub fn n_failures(&self) -> usize {
        self.failures().count()
    }
}

/// Metrics of one run.
struct Metrics {
    p_net_tot_mw: f64,
    p_net_tx_mw: f64,
    social_cost: f64,
    avg_pns_per_cn: f64,
    n_slots: usize,
    rounds: usize,
}

fn game(topo: &Topology, scheme: Scheme, mrc: bool, max_rounds: usize) -> Result<Metrics> {
    let mut cfg = GameConfig::new(scheme, mrc);
    cfg.max_rounds = max_rounds;
    let tr = run_to_ne(topo, &cfg)?;
    if !tr.converged {
        return Err(Error::Domain(format!(
            "no equilibrium after {max_rounds} rounds"
        )));
    }
    Ok(Metrics {
        p_net_tot_mw: tr.p_net_tot_mw,
        p_net_tx_mw: tr.p_net_tx_mw,
        social_cost: tr.ledger.social_cost,
        avg_pns_per_cn: tr.avg_pns_per_cn,
        n_slots: tr.n_slots,
        rounds: tr.rounds,
    })
}

fn milp(topo: &Topology, one_parent: bool, slots: Option<usize>) -> Result<Metrics> {
    let opts = GlobalOptions {
        one_parent,
        slots,
        ..GlobalOptions::default()
    };
    let (inst, layout) = build_global(topo, &opts)?;
    let sol = solve_milp(&inst);
    if !sol.is_optimal() {
        return Err(Error::Domain(format!(
            "global MILP ended with {:?} after {} nodes",
            sol.status, sol.bnb_nodes
        )));
    }
    let s = extract_profile(&sol, &layout, topo, opts.scenario)?;
    Ok(Metrics {
        p_net_tot_mw: s.p_net_tot_mw,
        p_net_tx_mw: s.p_net_tx_mw,
        social_cost: s.social_cost,
        avg_pns_per_cn: s.avg_pns_per_cn,
        n_slots: s.n_slots,
        rounds: 0,
    })
}

fn greedy(topo: &Topology) -> Result<Metrics> {
    let g = greedy_mrc(topo)?;
    Ok(Metrics {
        p_net_tot_mw: g.p_net_tot_mw,
        p_net_tx_mw: g.p_net_tx_mw,
        social_cost: g.p_net_tx_mw,
        avg_pns_per_cn: g.avg_pns_per_cn,
        n_slots: g.n_slots,
        rounds: 0,
    })
}

fn dispatch(topo: &Topology, alg: Algorithm, cfg: &ExperimentConfig) -> Result<Metrics> {
    match alg {
        Algorithm::McMrc => game(topo, Scheme::Mc, true, cfg.max_rounds),
        Algorithm::SvMrc => game(topo, Scheme::Sv, true, cfg.max_rounds),
        Algorithm::McOpn => game(topo, Scheme::Mc, false, cfg.max_rounds),
        Algorithm::SvOpn => game(topo, Scheme::Sv, false, cfg.max_rounds),
        Algorithm::MilpMrc => milp(topo, false, cfg.milp_slots),
        Algorithm::MilpOpn => milp(topo, true, cfg.milp_slots),
        Algorithm::GreedyMrc => greedy(topo),
    }
}

struct Cell {
    n: usize,
    p_c_mw: f64,
    run: usize,
}

/// Runs one algorithm on a topology and fills a record.
pub fn run_algorithm(
    topo: &Topology,
    alg: Algorithm,
    cfg: &ExperimentConfig,
    seed: u64,
    run: usize,
) -> RunRecord {
    let start = Instant::now();
    let out = dispatch(topo, alg, cfg);
    let wall_ms = if cfg.record_wall_time {
        start.elapsed().as_secs_f64() * 1e3
    } else {
        0.0
    };
    let mut rec = RunRecord {
        seed,
        n: topo.n_nodes(),
        p_c_mw: topo.phys().p_ct_mw,
        run,
        algorithm: alg,
        p_net_tot_mw: f64::NAN,
        p_net_tx_mw: f64::NAN,
        social_cost: f64::NAN,
        avg_pns_per_cn: f64::NAN,
        n_slots: 0,
        rounds: 0,
        wall_ms,
        topo_hash: topo.fingerprint(),
        error: None,
    };
    match out {
        Ok(m) => {
            rec.p_net_tot_mw = m.p_net_tot_mw;
            rec.p_net_tx_mw = m.p_net_tx_mw;
            rec.social_cost = m.social_cost;
            rec.avg_pns_per_cn = m.avg_pns_per_cn;
            rec.n_slots = m.n_slots;
            rec.rounds = m.rounds;
        }
        Err(e) => {
            log::warn!("{alg} on seed {seed}: {e}");
            rec.error = Some(e.to_string());
        }
    }
    rec
}

fn run_cell(cell: &Cell, cfg: &ExperimentConfig) -> Vec<RunRecord> {
    let seed = child_seed(cfg.seed, cell.n, cell.run);
    let phys = cfg.phys.apply(cell.p_c_mw);
    let topo = match Topology::generate(cell.n, cfg.area_m, seed, &phys) {
        Ok(t) => t,
        Err(e) => {
            log::warn!("seed {seed}: {e}");
            return cfg
                .algorithms
                .iter()
                .map(|&alg| RunRecord {
                    seed,
                    n: cell.n,
                    p_c_mw: cell.p_c_mw,
                    run: cell.run,
                    algorithm: alg,
                    p_net_tot_mw: f64::NAN,
                    p_net_tx_mw: f64::NAN,
                    social_cost: f64::NAN,
                    avg_pns_per_cn: f64::NAN,
                    n_slots: 0,
                    rounds: 0,
                    wall_ms: 0.0,
                    topo_hash: String::new(),
                    error: Some(e.to_string()),
                })
                .collect();
        }
    };
    cfg.algorithms
        .iter()
        .map(|&alg| run_algorithm(&topo, alg, cfg, seed, cell.run))
        .collect()
}

/// Runs every cell of the configuration. Individual failures are recorded,
/// not returned; only an invalid configuration is an error.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let mut cells = Vec::new();
    for &n in &cfg.n_values {
        for &p_c_mw in &cfg.p_c_values {
            for run in 0..cfg.runs {
                cells.push(Cell { n, p_c_mw, run });
            }
        }
    }
    let work = || -> Vec<RunRecord> {
        cells
            .par_iter()
            .flat_map_iter(|c| run_cell(c, cfg))
            .collect()
    };
    let mut records = match cfg.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(work),
        None => work(),
    };
    let n_pos = |n: usize| cfg.n_values.iter().position(|&v| v == n);
    let pc_pos = |p: f64| cfg.p_c_values.iter().position(|&v| v == p);
    records.sort_by(|a, b| {
        (n_pos(a.n), pc_pos(a.p_c_mw), a.run, a.algorithm).cmp(&(
            n_pos(b.n),
            pc_pos(b.p_c_mw),
            b.run,
            b.algorithm,
        ))
    });
    Ok(ExperimentResult { records })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ExperimentConfig {
        ExperimentConfig {
            n_values: vec![5],
            p_c_values: vec![10.0],
            runs: 2,
            algorithms: vec![Algorithm::McMrc, Algorithm::GreedyMrc],
            threads: Some(1),
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn one_topology_per_cell() {
        let res = run_experiment(&small()).unwrap();
        assert_eq!(res.records.len(), 4);
        assert_eq!(res.n_failures(), 0);
        for pair in res.records.chunks(2) {
            assert_eq!(pair[0].topo_hash, pair[1].topo_hash);
            assert_eq!(pair[0].seed, pair[1].seed);
            assert!(pair[0].p_net_tot_mw >= pair[0].p_net_tx_mw);
        }
        assert_ne!(res.records[0].topo_hash, res.records[2].topo_hash);
    }

    #[test]
    fn milp_is_below_the_game() {
        let cfg = ExperimentConfig {
            n_values: vec![5],
            runs: 2,
            p_c_values: vec![10.0],
            algorithms: vec![Algorithm::McMrc, Algorithm::MilpMrc],
            threads: Some(1),
            ..ExperimentConfig::default()
        };
        let res = run_experiment(&cfg).unwrap();
        for pair in res.records.chunks(2) {
            assert!(pair[1].p_net_tot_mw <= pair[0].p_net_tot_mw + 1e-6);
        }
    }
}
