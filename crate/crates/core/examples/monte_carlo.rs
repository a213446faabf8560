//! A small Monte-Carlo sweep over circuitry power with the summary table and
//! the trend checks on paired runs.
//!
//! cargo run --release --example monte_carlo [runs] [output-dir]

use mrcast::harness::{run_experiment, summarize, write_outputs, Algorithm, ExperimentConfig};
use mrcast::verify::trend_checks;

fn main() -> mrcast::Result<()> {
    let mut args = std::env::args().skip(1);
    let runs = args.next().and_then(|s| s.parse().ok()).unwrap_or(30);
    let cfg = ExperimentConfig {
        runs,
        algorithms: vec![
            Algorithm::McMrc,
            Algorithm::SvMrc,
            Algorithm::McOpn,
            Algorithm::GreedyMrc,
        ],
        ..ExperimentConfig::default()
    };
    let res = run_experiment(&cfg)?;
    for g in summarize(&res.records) {
        println!(
            "n={} p_c={:<5} {:<9} P_tot/210 {:.3} ± {:.3}  PNs/CN {:.3}  slots {:.2}",
            g.n,
            g.p_c_mw,
            g.algorithm.as_str(),
            g.p_net_tot_norm.mean,
            g.p_net_tot_norm.ci95,
            g.avg_pns_per_cn.mean,
            g.n_slots.mean
        );
    }
    for r in trend_checks(&res, 16) {
        println!("{}", r.line());
    }
    if let Some(dir) = args.next() {
        write_outputs(&res, &cfg, dir.as_ref())?;
        println!("wrote {dir}");
    }
    Ok(())
}
