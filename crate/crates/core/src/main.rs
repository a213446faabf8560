use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use mrcast::exact::{
    build_global, extract_profile, from_lp_str, solve_milp, to_lp_string, GlobalOptions,
    GlobalScenario,
};
use mrcast::harness::{
    run_algorithm, run_experiment, summarize, write_outputs, Algorithm, ExperimentConfig,
    OutputFormat,
};
use mrcast::verify::{reports_to_csv, run_suite, SUITES};
use mrcast::{Error, PhysParams, Topology};

#[derive(Parser)]
#[command(
    name = "mrcast",
    version,
    about = "Multi-hop broadcast with MRC: games, global optimum, greedy baseline"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Monte-Carlo experiment from a JSON config and/or flags.
    Run(RunArgs),
    /// One algorithm on one topology, or an LP file.
    Solve(SolveArgs),
    /// Randomized property suites.
    Verify(VerifyArgs),
    /// Write the global MILP of a topology in LP format.
    ExportLp(ExportArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON experiment config; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Node counts, source included.
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    /// Circuitry powers in mW.
    #[arg(long, value_delimiter = ',')]
    p_c: Option<Vec<f64>>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_delimiter = ',')]
    algorithms: Option<Vec<Algorithm>>,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    format: Option<OutputFormat>,
    #[arg(long)]
    threads: Option<usize>,
    /// Record measured wall time (output is then not reproducible).
    #[arg(long)]
    wall_time: bool,
}

/// Where the topology comes from.
#[derive(Args)]
struct TopoArgs {
    /// Topology JSON file.
    #[arg(long, conflicts_with_all = ["n", "seed"])]
    topology: Option<PathBuf>,
    /// Nodes to draw, source included.
    #[arg(long, default_value_t = 8)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 250.0)]
    area: f64,
    /// Circuitry power in mW; replaces the file's value when given.
    #[arg(long)]
    p_c: Option<f64>,
    /// Also write the topology as JSON.
    #[arg(long)]
    save_topology: Option<PathBuf>,
}

impl TopoArgs {
    fn load(&self) -> Result<Topology, Error> {
        let topo = match &self.topology {
            Some(path) => {
                let topo = Topology::from_json(&read(path)?)?;
                match self.p_c {
                    Some(p_c) => topo.with_phys(topo.phys().clone().with_circuitry(p_c))?,
                    None => topo,
                }
            }
            None => {
                let phys = PhysParams::default().with_circuitry(self.p_c.unwrap_or(10.0));
                Topology::generate(self.n, self.area, self.seed, &phys)?
            }
        };
        if let Some(path) = &self.save_topology {
            write(path, &topo.to_json()?)?;
        }
        Ok(topo)
    }
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    topo: TopoArgs,
    #[arg(long, default_value = "MC-MRC")]
    algorithm: Algorithm,
    /// Solve this LP file instead.
    #[arg(long, conflicts_with = "topology")]
    lp: Option<PathBuf>,
    /// Print every accepted best-response move as CSV.
    #[arg(long)]
    trace: bool,
    /// Write the full solution as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Suite name or `all`.
    #[arg(long, default_value = "all")]
    suite: String,
    /// Smaller case counts.
    #[arg(long)]
    quick: bool,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Write the reports as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScenarioArg {
    Power,
    Social,
}

#[derive(Args)]
struct ExportArgs {
    #[command(flatten)]
    topo: TopoArgs,
    #[arg(long, value_enum, default_value = "power")]
    scenario: ScenarioArg,
    /// Slot budget; one per receiver when absent.
    #[arg(long)]
    slots: Option<usize>,
    /// One reception slot per receiver.
    #[arg(long)]
    one_parent: bool,
    /// Leave out the redundant strengthening rows.
    #[arg(long)]
    literal: bool,
    /// Output file; stdout when absent.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

fn read(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.into(),
        source,
    })
}

fn write(path: &Path, text: &str) -> Result<(), Error> {
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.into(),
        source,
    })
}

fn cmd_run(a: RunArgs) -> Result<ExitCode, Error> {
    let mut cfg = match &a.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(v) = a.n {
        cfg.n_values = v;
    }
    if let Some(v) = a.p_c {
        cfg.p_c_values = v;
    }
    if let Some(v) = a.runs {
        cfg.runs = v;
    }
    if let Some(v) = a.seed {
        cfg.seed = v;
    }
    if let Some(v) = a.algorithms {
        cfg.algorithms = v;
    }
    if a.output.is_some() {
        cfg.output = a.output;
    }
    if let Some(v) = a.format {
        cfg.format = v;
    }
    if a.threads.is_some() {
        cfg.threads = a.threads;
    }
    cfg.record_wall_time |= a.wall_time;
    cfg.validate()?;

    let res = run_experiment(&cfg)?;
    println!(
        "{:>4} {:>7} {:<10} {:>12} {:>12} {:>9} {:>7} {:>5}",
        "n", "p_c", "algorithm", "P_tot mW", "P_tx mW", "PNs/CN", "slots", "fail"
    );
    for g in summarize(&res.records) {
        println!(
            "{:>4} {:>7} {:<10} {:>12.3} {:>12.3} {:>9.3} {:>7.2} {:>5}",
            g.n,
            g.p_c_mw,
            g.algorithm.as_str(),
            g.p_net_tot_mw.mean,
            g.p_net_tx_mw.mean,
            g.avg_pns_per_cn.mean,
            g.n_slots.mean,
            g.failures
        );
    }
    if let Some(dir) = &cfg.output {
        write_outputs(&res, &cfg, dir)?;
        eprintln!("wrote results to {}", dir.display());
    }
    let failed = res.n_failures();
    if failed > 0 {
        eprintln!("{failed} runs failed");
        return Ok(ExitCode::from(1));
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_solve(a: SolveArgs) -> Result<ExitCode, Error> {
    if let Some(path) = &a.lp {
        let inst = from_lp_str(&read(path)?)?;
        let sol = solve_milp(&inst);
        println!("status {:?}", sol.status);
        println!("objective {}", sol.objective);
        println!("bound {}", sol.bound);
        println!("nodes {}", sol.bnb_nodes);
        if sol.has_incumbent() {
            for (v, x) in inst.variables.iter().zip(&sol.assignment) {
                if x.abs() > 1e-12 {
                    println!("{} = {x}", v.name);
                }
            }
        }
        if let Some(out) = &a.json {
            write(out, &serde_json::to_string_pretty(&sol)?)?;
        }
        return Ok(if sol.is_optimal() {
            ExitCode::SUCCESS
        } else {
            ExitCode::from(1)
        });
    }

    let topo = a.topo.load()?;
    let cfg = ExperimentConfig::default();
    let rec = run_algorithm(&topo, a.algorithm, &cfg, a.topo.seed, 0);
    println!("{}", serde_json::to_string_pretty(&rec)?);
    if a.trace || a.json.is_some() {
        let detail = detail_json(&topo, a.algorithm, a.trace)?;
        if let Some(out) = &a.json {
            write(out, &detail)?;
        }
    }
    Ok(if rec.failed() {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    })
}

/// Full solution of one algorithm as JSON; with `trace`, game moves go to
/// stdout as CSV.
fn detail_json(topo: &Topology, alg: Algorithm, trace: bool) -> Result<String, Error> {
    use mrcast::cost::Scheme;
    use mrcast::game::{run_to_ne, GameConfig};
    let game = |scheme, mrc| -> Result<String, Error> {
        let tr = run_to_ne(topo, &GameConfig::new(scheme, mrc))?;
        if trace {
            tr.write_moves_csv(std::io::stdout().lock())?;
        }
        tr.to_json()
    };
    match alg {
        Algorithm::McMrc => game(Scheme::Mc, true),
        Algorithm::SvMrc => game(Scheme::Sv, true),
        Algorithm::McOpn => game(Scheme::Mc, false),
        Algorithm::SvOpn => game(Scheme::Sv, false),
        Algorithm::MilpMrc | Algorithm::MilpOpn => {
            let opts = GlobalOptions {
                one_parent: alg == Algorithm::MilpOpn,
                ..GlobalOptions::default()
            };
            let (inst, layout) = build_global(topo, &opts)?;
            let sol = solve_milp(&inst);
            let sched = extract_profile(&sol, &layout, topo, opts.scenario)?;
            Ok(serde_json::to_string_pretty(&sched)?)
        }
        Algorithm::GreedyMrc => {
            let g = mrcast::baselines::greedy_mrc(topo)?;
            Ok(serde_json::to_string_pretty(&g)?)
        }
    }
}

fn cmd_verify(a: VerifyArgs) -> Result<ExitCode, Error> {
    let Some(reports) = run_suite(&a.suite, a.quick, a.seed) else {
        return Err(Error::Config(format!(
            "unknown suite '{}' (all, {})",
            a.suite,
            SUITES.join(", ")
        )));
    };
    for r in &reports {
        println!("{}", r.line());
    }
    if let Some(path) = &a.csv {
        write(path, &reports_to_csv(&reports)?)?;
    }
    Ok(if reports.iter().all(|r| r.passed()) {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn cmd_export(a: ExportArgs) -> Result<ExitCode, Error> {
    let topo = a.topo.load()?;
    let opts = GlobalOptions {
        scenario: match a.scenario {
            ScenarioArg::Power => GlobalScenario::Power,
            ScenarioArg::Social => GlobalScenario::SocialCost,
        },
        slots: a.slots,
        one_parent: a.one_parent,
        strengthen: !a.literal,
    };
    let (inst, _) = build_global(&topo, &opts)?;
    let text = to_lp_string(&inst);
    match &a.output {
        Some(path) => write(path, &text)?,
        None => print!("{text}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let out = match cli.cmd {
        Cmd::Run(a) => cmd_run(a),
        Cmd::Solve(a) => cmd_solve(a),
        Cmd::Verify(a) => cmd_verify(a),
        Cmd::ExportLp(a) => cmd_export(a),
    };
    out.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        ExitCode::from(2)
    })
}
