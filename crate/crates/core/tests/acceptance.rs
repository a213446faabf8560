//! Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
//! fails. Sizes and tolerances are the full ones; expect a few minutes.

use std::time::Instant;

use mrcast::harness::{records_to_csv, run_experiment, write_outputs, Algorithm, ExperimentConfig};
use mrcast::verify::{self, reports_to_csv, CheckReport};

const SEED: u64 = 1;

struct Outcome {
    passed: bool,
    detail: String,
}

impl Outcome {
    fn from_reports(reports: &[CheckReport]) -> Self {
        Self {
            passed: reports.iter().all(CheckReport::passed),
            detail: reports
                .iter()
                .map(CheckReport::line)
                .collect::<Vec<_>>()
                .join("\n  "),
        }
    }
}

fn trend_config() -> ExperimentConfig {
    ExperimentConfig {
        n_values: vec![16],
        p_c_values: vec![1.0, 10.0, 100.0],
        runs: 200,
        seed: SEED,
        algorithms: vec![
            Algorithm::McMrc,
            Algorithm::SvMrc,
            Algorithm::McOpn,
            Algorithm::GreedyMrc,
        ],
        ..ExperimentConfig::default()
    }
}

fn reproducible_csv() -> Outcome {
    let cfg = ExperimentConfig {
        n_values: vec![4, 6],
        p_c_values: vec![1.0, 100.0],
        runs: 4,
        seed: 42,
        algorithms: vec![
            Algorithm::McMrc,
            Algorithm::SvOpn,
            Algorithm::MilpMrc,
            Algorithm::GreedyMrc,
        ],
        ..ExperimentConfig::default()
    };
    let mut notes = Vec::new();
    let mut csvs = Vec::new();
    for threads in [Some(1), None] {
        let dir = tempfile::tempdir().expect("temp dir");
        let cfg = ExperimentConfig {
            threads,
            ..cfg.clone()
        };
        let res = run_experiment(&cfg).expect("valid config");
        if res.n_failures() > 0 {
            notes.push(format!("{} failed runs", res.n_failures()));
        }
        write_outputs(&res, &cfg, dir.path()).expect("writable temp dir");
        let written = std::fs::read(dir.path().join("records.csv")).expect("records.csv");
        csvs.push((records_to_csv(&res.records).expect("csv"), written));
    }
    let v1 = reports_to_csv(&verify::run_suite("all", true, 9).unwrap()).unwrap();
    let v2 = reports_to_csv(&verify::run_suite("all", true, 9).unwrap()).unwrap();
    let same_records = csvs[0] == csvs[1];
    let same_file = csvs[0].0.as_bytes() == csvs[0].1.as_slice();
    let same_verify = v1 == v2;
    Outcome {
        passed: same_records && same_file && same_verify && notes.is_empty(),
        detail: format!(
            "records identical across reruns {same_records}, file matches {same_file}, \
             verify report identical {same_verify} ({} bytes of records){}",
            csvs[0].0.len(),
            notes.iter().map(|n| format!(", {n}")).collect::<String>()
        ),
    }
}

fn main() {
    let start = Instant::now();
    let mut results: Vec<(u32, &str, Outcome)> = Vec::new();

    let mut run = |k: u32, what: &'static str, f: &dyn Fn() -> Outcome| {
        let t = Instant::now();
        let o = f();
        eprintln!("[criterion {k} took {:.1}s]", t.elapsed().as_secs_f64());
        results.push((k, what, o));
    };

    run(
        1,
        "Shapley closed form vs permutation sum, 1000 groups",
        &|| Outcome::from_reports(&[verify::shapley_closed_form(1000, SEED)]),
    );
    run(
        2,
        "SV budget balance and social cost, 500 profiles",
        &|| Outcome::from_reports(&[verify::budget_balance(500, SEED)]),
    );
    run(
        3,
        "MC exact potential, 500 deviations on 50 topologies",
        &|| Outcome::from_reports(&[verify::mc_exact_potential(50, 10, SEED)]),
    );
    run(
        4,
        "best-response convergence, 100 topologies of 15 receivers",
        &|| Outcome::from_reports(&[verify::convergence(100, 15, &[1.0, 10.0, 100.0], SEED)]),
    );
    run(5, "node decision vs enumeration, 200 instances", &|| {
        Outcome::from_reports(&[verify::node_decisions(200, SEED)])
    });
    let sandwich = verify::optimality_sandwich(50, SEED);
    run(
        6,
        "global optimum below equilibria and greedy, 50 instances",
        &|| Outcome::from_reports(&[sandwich.sandwich.clone(), sandwich.extraction.clone()]),
    );
    run(
        7,
        "social-cost MILP objective equals SV social cost",
        &|| Outcome::from_reports(std::slice::from_ref(&sandwich.scenario)),
    );
    run(8, "SV share piecewise-linear, 1000 settings", &|| {
        Outcome::from_reports(&[verify::sv_piecewise(1000, SEED)])
    });
    run(9, "trends at 15 receivers, 200 runs", &|| {
        let res = run_experiment(&trend_config()).expect("valid config");
        let mut reports = verify::trend_checks(&res, 16);
        let mut failed = CheckReport {
            name: "runs without failure".into(),
            cases: res.records.len(),
            violations: res.n_failures(),
            worst: res.n_failures() as f64,
            tolerance: 0.0,
            elapsed_s: 0.0,
            time_limit_s: None,
            notes: Vec::new(),
        };
        if let Some(r) = res.failures().next() {
            failed
                .notes
                .push(format!("{} run {}: {:?}", r.algorithm, r.run, r.error));
        }
        reports.push(failed);
        Outcome::from_reports(&reports)
    });
    run(
        10,
        "byte-identical CSV on reruns with the same seed",
        &reproducible_csv,
    );

    println!();
    let mut all = true;
    for (k, what, o) in &results {
        all &= o.passed;
        println!(
            "criterion {k:>2} {}: {what}\n  {}",
            if o.passed { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    println!(
        "\n{} of {} criteria passed in {:.0}s",
        results.iter().filter(|r| r.2.passed).count(),
        results.len(),
        start.elapsed().as_secs_f64()
    );
    if !all {
        std::process::exit(1);
    }
}
