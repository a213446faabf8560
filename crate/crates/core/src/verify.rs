//! Randomized property suites comparing the fast routines with the slow
//! references in [`crate::oracle`] and with the identities the model must
//! satisfy. The `verify` command and the acceptance tests both run these.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::baselines::greedy_mrc;
use crate::cost::{
    ledger, mc_node_cost, sum_transmit_power, sv_piecewise_all, sv_share_closed, sv_share_joining,
    sv_share_oracle, Scheme,
};
use crate::error::Result;
use crate::exact::{
    build_global, extract_profile, solve_lp, solve_milp, solve_node_decision, Candidate,
    GlobalOptions, GlobalScenario, MilpInstance, NodeDecisionInput, Relation, SnrMode,
};
use crate::game::{certify_ne, decision_input, run_to_ne, GameConfig};
use crate::harness::{child_seed, normalize, Algorithm, ExperimentResult, RunRecord};
use crate::model::{compute_powers, hop_ranks, ActionProfile, NodeId, PhysParams, Topology};
use crate::oracle::{decision_cost, enumerate_binary, lp_vertex_oracle, node_decision_oracle};

/// Outcome of one suite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub cases: usize,
    pub violations: usize,
    /// Largest error seen, in the unit of `tolerance`.
    pub worst: f64,
    pub tolerance: f64,
    pub elapsed_s: f64,
    /// Budget for the whole suite, if it has one.
    pub time_limit_s: Option<f64>,
    pub notes: Vec<String>,
}

impl CheckReport {
    fn new(name: &str, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            cases: 0,
            violations: 0,
            worst: 0.0,
            tolerance,
            elapsed_s: 0.0,
            time_limit_s: None,
            notes: Vec::new(),
        }
    }

    /// Counts one case with error `err`.
    fn record(&mut self, err: f64) {
        self.cases += 1;
        if err.is_nan() || err > self.tolerance {
            self.violations += 1;
        }
        if err.is_nan() || err > self.worst {
            self.worst = err;
        }
    }

    /// Counts one case that either holds or does not.
    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.violations += 1;
            if self.notes.len() < 5 {
                self.notes.push(what());
            }
        }
    }

    fn note(&mut self, what: String) {
        if self.notes.len() < 5 {
            self.notes.push(what);
        }
    }

    fn finish(mut self, start: Instant) -> Self {
        self.elapsed_s = start.elapsed().as_secs_f64();
        self
    }

    pub fn within_time(&self) -> bool {
        self.time_limit_s.is_none_or(|t| self.elapsed_s < t)
    }

    pub fn passed(&self) -> bool {
        self.cases > 0 && self.violations == 0 && self.within_time()
    }

    /// One human-readable line.
    pub fn line(&self) -> String {
        let mut s = format!(
            "{} {}: {} cases, {} violations, worst {:.3e} (tol {:.0e}), {:.2}s",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.cases,
            self.violations,
            self.worst,
            self.tolerance,
            self.elapsed_s
        );
        if let Some(t) = self.time_limit_s {
            s.push_str(&format!(" (limit {t}s)"));
        }
        for n in &self.notes {
            s.push_str(&format!("\n    {n}"));
        }
        s
    }
}

/// Reports as CSV without timing, so reruns compare byte for byte.
pub fn reports_to_csv(reports: &[CheckReport]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["check", "cases", "violations", "worst", "tolerance"])?;
    for r in reports {
        w.write_record([
            r.name.clone(),
            r.cases.to_string(),
            r.violations.to_string(),
            format!("{:.9e}", r.worst),
            format!("{:.0e}", r.tolerance),
        ])?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| crate::Error::io("<csv>", e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

fn rel_err(a: f64, b: f64) -> f64 {
    let d = (a - b).abs();
    if d == 0.0 {
        0.0
    } else {
        d / a.abs().max(b.abs())
    }
}

/// Random receiver-ordered profile: nodes are visited in a randomized BFS
/// order from the source and each picks a random non-empty set of earlier
/// neighbors with requests in `(0, p_max]`.
pub fn random_profile(topo: &Topology, rng: &mut ChaCha8Rng) -> (ActionProfile, Vec<NodeId>) {
    let n = topo.n_nodes();
    let p_max = topo.phys().p_max_mw;
    let mut order = vec![topo.source()];
    let mut seen = vec![false; n];
    seen[topo.source()] = true;
    let mut head = 0;
    while head < order.len() {
        let mut nb: Vec<NodeId> = topo.neighbors(order[head]).to_vec();
        nb.shuffle(rng);
        for j in nb {
            if !seen[j] {
                seen[j] = true;
                order.push(j);
            }
        }
        head += 1;
    }
    let mut profile = ActionProfile::empty(n);
    for k in 1..order.len() {
        let action = random_action(topo, &order[..k], order[k], rng, p_max);
        profile.set_action(order[k], action);
    }
    (profile, order)
}

fn random_action(
    topo: &Topology,
    earlier: &[NodeId],
    i: NodeId,
    rng: &mut ChaCha8Rng,
    p_max: f64,
) -> BTreeMap<NodeId, f64> {
    let cands: Vec<NodeId> = earlier
        .iter()
        .copied()
        .filter(|&j| topo.is_neighbor(i, j))
        .collect();
    let mut action = BTreeMap::new();
    while action.is_empty() {
        for &j in &cands {
            if rng.gen_bool(0.5) {
                action.insert(j, rng.gen_range(1e-6..p_max));
            }
        }
    }
    action
}

fn random_topology(n: usize, seed: u64, p_c: f64) -> Topology {
    let phys = PhysParams::default().with_circuitry(p_c);
    Topology::generate(n, 250.0, seed, &phys).expect("connected draw within retries")
}

/// Closed-form Shapley shares against the permutation sum: groups of 1 to 7
/// CNs, requests uniform on (0, 200) mW, circuitry 0 or 10 mW.
pub fn shapley_closed_form(cases: usize, seed: u64) -> CheckReport {
    let start = Instant::now();
    let mut rep = CheckReport::new("shapley closed form vs permutation sum", 1e-9);
    rep.time_limit_s = Some(5.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..cases {
        let m = rng.gen_range(1..=7);
        let p_ct = if rng.gen_bool(0.5) { 0.0 } else { 10.0 };
        let reqs: Vec<f64> = (0..m).map(|_| rng.gen_range(0.0..200.0)).collect();
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| reqs[a].total_cmp(&reqs[b]).then(a.cmp(&b)));
        let sorted: Vec<f64> = order.iter().map(|&k| reqs[k]).collect();
        let mut worst: f64 = 0.0;
        for (rank, &k) in order.iter().enumerate() {
            let closed = sv_share_closed(rank + 1, &sorted, p_ct).expect("sorted input");
            let oracle = sv_share_oracle(k, &reqs, p_ct).expect("small group");
            worst = worst.max(rel_err(closed, oracle));
        }
        rep.record(worst);
    }
    rep.finish(start)
}

/// SV budget balance per PN and the social-cost identity on random profiles.
pub fn budget_balance(profiles: usize, seed: u64) -> CheckReport {
    let start = Instant::now();
    let mut rep = CheckReport::new("SV budget balance and social cost = transmit power", 1e-9);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for k in 0..profiles {
        let n = rng.gen_range(3..=16);
        let p_c = [1.0, 10.0, 100.0][k % 3];
        let topo = random_topology(n, rng.gen(), p_c);
        let (profile, _) = random_profile(&topo, &mut rng);
        let led = match ledger(&profile, Scheme::Sv, topo.phys()) {
            Ok(l) => l,
            Err(e) => {
                rep.record(f64::NAN);
                rep.note(format!("profile {k}: {e}"));
                continue;
            }
        };
        let powers = compute_powers(&profile, topo.phys());
        let mut worst: f64 = 0.0;
        for (j, kids) in profile.children().iter().enumerate() {
            let ptx = sum_transmit_power(
                kids.iter().map(|&i| profile.parents(i)[&j]),
                topo.phys().p_ct_mw,
            );
            worst = worst.max(rel_err(led.collected_by(j), ptx));
        }
        worst = worst.max(rel_err(led.social_cost, powers.p_net_tx()));
        rep.record(worst);
    }
    rep.finish(start)
}

/// Unilateral deviations under MC: the mover's cost change equals the change
/// of total network power.
pub fn mc_exact_potential(topologies: usize, per_topology: usize, seed: u64) -> CheckReport {
    let start = Instant::now();
    let mut rep = CheckReport::new("MC exact potential", 1e-9);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for k in 0..topologies {
        let n = rng.gen_range(3..=16);
        let p_c = [1.0, 10.0, 100.0][k % 3];
        let topo = random_topology(n, rng.gen(), p_c);
        let phys = topo.phys();
        let (mut profile, order) = random_profile(&topo, &mut rng);
        for _ in 0..per_topology {
            let pos = rng.gen_range(1..order.len());
            let i = order[pos];
            let before_cost = mc_node_cost(i, &profile, phys);
            let before_pot = compute_powers(&profile, phys).p_net_tot();
            let action = random_action(&topo, &order[..pos], i, &mut rng, phys.p_max_mw);
            profile.set_action(i, action);
            let d_cost = mc_node_cost(i, &profile, phys) - before_cost;
            let d_pot = compute_powers(&profile, phys).p_net_tot() - before_pot;
            rep.record((d_cost - d_pot).abs());
        }
    }
    rep.finish(start)
}

/// Best-response dynamics on random topologies with `receivers + 1` nodes:
/// every run must converge within `max_rounds` sweeps to a certified
/// equilibrium, and the MC network power may never rise on an accepted move.
pub fn convergence(
    topologies: usize,
    receivers: usize,
    p_c_values: &[f64],
    seed: u64,
) -> CheckReport {
    let start = Instant::now();
    let mut rep = CheckReport::new("best-response convergence and certification", 0.0);
    rep.time_limit_s = Some(300.0);
    let mut max_rounds_seen = 0;
    for k in 0..topologies {
        let s = child_seed(seed, receivers + 1, k);
        for &p_c in p_c_values {
            let topo = random_topology(receivers + 1, s, p_c);
            for (scheme, mrc) in [
                (Scheme::Mc, true),
                (Scheme::Sv, true),
                (Scheme::Mc, false),
                (Scheme::Sv, false),
            ] {
                let cfg = GameConfig::new(scheme, mrc);
                let label = format!("topology {k}, p_c {p_c}, {}", cfg.label());
                let tr = match run_to_ne(&topo, &cfg) {
                    Ok(t) => t,
                    Err(e) => {
                        rep.check(false, || format!("{label}: {e}"));
                        continue;
                    }
                };
                max_rounds_seen = max_rounds_seen.max(tr.rounds);
                let cert = certify_ne(&topo, &tr.profile, &cfg);
                let certified = cert.as_ref().is_ok_and(|c| c.certified);
                rep.check(tr.converged && tr.rounds <= 50 && certified, || {
                    format!(
                        "{label}: converged {} in {} rounds, certificate {cert:?}",
                        tr.converged, tr.rounds
                    )
                });
                if scheme == Scheme::Mc {
                    for m in &tr.moves {
                        let tol = 1e-9 * m.potential_before.abs().max(1.0);
                        rep.check(m.potential_after <= m.potential_before + tol, || {
                            format!(
                                "{label}: potential rose {} -> {} at node {}",
                                m.potential_before, m.potential_after, m.node
                            )
                        });
                    }
                }
            }
        }
    }
    rep.notes
        .insert(0, format!("most sweeps needed: {max_rounds_seen}"));
    rep.finish(start)
}

fn synthetic_decision(rng: &mut ChaCha8Rng) -> NodeDecisionInput {
    let p_c = [1.0, 10.0, 100.0][rng.gen_range(0..3)];
    let phys = PhysParams::default().with_circuitry(p_c);
    let k = rng.gen_range(1..=4);
    let mut ids: Vec<NodeId> = (0..12).collect();
    ids.shuffle(rng);
    let mut ids: Vec<NodeId> = ids[..k].to_vec();
    ids.sort_unstable();
    let candidates = ids
        .into_iter()
        .map(|pn| {
            let unicast = rng.gen_range(2.0..400.0);
            let n_others = rng.gen_range(0..=3);
            Candidate {
                pn,
                gain: phys.snr_th * phys.noise_mw / unicast,
                others: (0..n_others).map(|_| rng.gen_range(0.5..200.0)).collect(),
            }
        })
        .collect();
    NodeDecisionInput {
        candidates,
        phys,
        scheme: if rng.gen_bool(0.5) {
            Scheme::Mc
        } else {
            Scheme::Sv
        },
        w_max: match rng.gen_range(0..4) {
            0 => Some(1),
            1 => Some(2),
            _ => None,
        },
        snr_mode: if rng.gen_bool(0.85) {
            SnrMode::Equality
        } else {
            SnrMode::AtLeast
        },
    }
}

fn game_decision(rng: &mut ChaCha8Rng) -> NodeDecisionInput {
    let p_c = [1.0, 10.0, 100.0][rng.gen_range(0..3)];
    let topo = random_topology(rng.gen_range(4..=10), rng.gen(), p_c);
    let (profile, order) = random_profile(&topo, rng);
    let ranks = hop_ranks(&profile, topo.source()).expect("profile is acyclic");
    let i = order[rng.gen_range(1..order.len())];
    let scheme = if rng.gen_bool(0.5) {
        Scheme::Mc
    } else {
        Scheme::Sv
    };
    let cfg = GameConfig::new(scheme, rng.gen_bool(0.75));
    let mut input = decision_input(&topo, &profile, &ranks, i, &cfg);
    input.candidates.truncate(4);
    input
}

/// Exact node decisions against exhaustive enumeration, on synthetic inputs
/// and on inputs taken from random game states; at most four candidates.
pub fn node_decisions(cases: usize, seed: u64) -> CheckReport {
    let start = Instant::now();
    let mut rep = CheckReport::new("node decision vs subset/breakpoint enumeration", 1e-6);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut done = 0;
    while done < cases {
        let input = if done % 2 == 0 {
            synthetic_decision(&mut rng)
        } else {
            game_decision(&mut rng)
        };
        if input.candidates.is_empty() {
            continue;
        }
        done += 1;
        let fast = solve_node_decision(&input);
        let slow = node_decision_oracle(&input).expect("small candidate set");
        match (fast, slow) {
            (Ok(None), None) => rep.record(0.0),
            (Ok(Some(d)), Some(o)) => {
                let recomputed = decision_cost(&input, &d.requests);
                let err = rel_err(recomputed, o.objective).max(rel_err(d.objective, o.objective));
                if err > rep.tolerance {
                    rep.note(format!(
                        "case {done}: decision {:?} costs {recomputed}, oracle {:?} costs {}",
                        d.requests, o.requests, o.objective
                    ));
                }
                rep.record(err);
            }
            (fast, slow) => {
                rep.record(f64::NAN);
                rep.note(format!(
                    "case {done}: feasibility differs: {:?} vs {:?}",
                    fast.map(|d| d.map(|d| d.requests)),
                    slow.map(|o| o.requests)
                ));
            }
        }
    }
    rep.finish(start)
}

/// Shapley share of a CN as a function of its own request with the other
/// requests fixed: nondecreasing, continuous at every breakpoint and made of
/// segments with nondecreasing slopes.
pub fn sv_piecewise(cases: usize, seed: u64) -> CheckReport {
    let start = Instant::now();
    let mut rep = CheckReport::new("SV share piecewise-linear and nondecreasing", 1e-9);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..cases {
        let m = rng.gen_range(0..=8);
        let mut others: Vec<f64> = (0..m).map(|_| rng.gen_range(0.0..200.0)).collect();
        others.sort_by(f64::total_cmp);
        let p_ct = [0.0, 1.0, 10.0, 100.0][rng.gen_range(0..4)];
        let segs = sv_piecewise_all(&others, p_ct);
        let f = |x: f64| sv_share_joining(x, &others, p_ct);
        let mut worst: f64 = 0.0;
        // segment slopes
        for w in segs.windows(2) {
            if w[1].0 < w[0].0 {
                worst = f64::INFINITY;
            }
        }
        // continuity: neighboring segments meet at the breakpoint, and the
        // share there matches both
        for (n, &b) in others.iter().enumerate() {
            let left = segs[n].0 * b + segs[n].1;
            let right = segs[n + 1].0 * b + segs[n + 1].1;
            worst = worst.max((left - right).abs()).max((f(b) - left).abs());
            let below = f((b - 1e-7).max(0.0));
            let above = f(b + 1e-7);
            worst = worst.max((above - below - 2e-7 * segs[n + 1].0.max(segs[n].0)).max(0.0));
        }
        // monotone on a grid through every breakpoint
        let mut xs: Vec<f64> = (0..=400).map(|k| k as f64 * 0.5).collect();
        xs.extend(others.iter().copied());
        xs.sort_by(f64::total_cmp);
        let mut prev = f64::NEG_INFINITY;
        for &x in &xs {
            let v = f(x);
            worst = worst.max(prev - v);
            prev = v;
            // the share is the upper envelope of the segments
            let env = segs
                .iter()
                .map(|(a, c)| a * x + c)
                .fold(f64::NEG_INFINITY, f64::max);
            worst = worst.max((env - v).abs());
        }
        rep.record(worst);
    }
    rep.finish(start)
}

/// Reports of the optimality sandwich and of the scenario equivalence.
pub struct SandwichReports {
    pub sandwich: CheckReport,
    pub scenario: CheckReport,
    pub extraction: CheckReport,
}

/// Global MILP against the equilibria and the greedy on small topologies of
/// 3 to 6 receivers with one slot per receiver.
pub fn optimality_sandwich(instances: usize, seed: u64) -> SandwichReports {
    let start = Instant::now();
    let mut sandwich = CheckReport::new("global optimum below equilibria and greedy", 1e-6);
    let mut scenario = CheckReport::new("social-cost MILP equals SV social cost", 1e-9);
    let mut extraction = CheckReport::new("MILP objective equals recomputed schedule", 1e-6);
    let mut slowest: f64 = 0.0;
    let mut nodes_max = 0;
    for k in 0..instances {
        let receivers = 3 + k % 4;
        let p_c = [1.0, 10.0, 100.0][k % 3];
        let topo = random_topology(receivers + 1, child_seed(seed, receivers + 1, k), p_c);
        let label = format!("instance {k} (N={receivers}, p_c {p_c})");
        let mut solve = |opts: GlobalOptions| {
            let (inst, layout) = build_global(&topo, &opts).expect("valid options");
            let t = Instant::now();
            let sol = solve_milp(&inst);
            let secs = t.elapsed().as_secs_f64();
            slowest = slowest.max(secs);
            nodes_max = nodes_max.max(sol.bnb_nodes);
            let sched = extract_profile(&sol, &layout, &topo, opts.scenario);
            (sol, sched, secs)
        };
        let (mrc, mrc_s, t1) = solve(GlobalOptions::default());
        let (opn, opn_s, t2) = solve(GlobalOptions {
            one_parent: true,
            ..GlobalOptions::default()
        });
        let (soc, soc_s, t3) = solve(GlobalOptions {
            scenario: GlobalScenario::SocialCost,
            ..GlobalOptions::default()
        });
        for (what, sol, sched, secs) in [
            ("MRC", &mrc, &mrc_s, t1),
            ("OPN", &opn, &opn_s, t2),
            ("social", &soc, &soc_s, t3),
        ] {
            sandwich.check(sol.is_optimal() && secs < 60.0, || {
                format!("{label}: {what} MILP {:?} in {secs:.1}s", sol.status)
            });
            match sched {
                // the social-cost objective is checked by `scenario`
                Ok(_) if what == "social" => {}
                Ok(s) => extraction.record(rel_err(s.p_net_tot_mw, sol.objective)),
                Err(e) => {
                    extraction.record(f64::NAN);
                    extraction.note(format!("{label}: {what}: {e}"));
                }
            }
        }
        if let Ok(s) = &soc_s {
            scenario.record(rel_err(s.social_cost, soc.objective));
        } else {
            scenario.record(f64::NAN);
        }
        let slack = |v: f64| 1e-6 * v.abs().max(1.0);
        let bounded = |rep: &mut CheckReport, name: &str, opt: f64, other: f64| {
            rep.check(opt <= other + slack(other), || {
                format!("{label}: MILP {opt} above {name} {other}")
            });
        };
        bounded(&mut sandwich, "MILP-OPN", mrc.objective, opn.objective);
        for (alg, scheme, parents) in [
            (Algorithm::McMrc, Scheme::Mc, true),
            (Algorithm::SvMrc, Scheme::Sv, true),
            (Algorithm::McOpn, Scheme::Mc, false),
            (Algorithm::SvOpn, Scheme::Sv, false),
        ] {
            match run_to_ne(&topo, &GameConfig::new(scheme, parents)) {
                Ok(tr) => {
                    bounded(&mut sandwich, alg.as_str(), mrc.objective, tr.p_net_tot_mw);
                    if !parents {
                        bounded(&mut sandwich, alg.as_str(), opn.objective, tr.p_net_tot_mw);
                    }
                }
                Err(e) => sandwich.check(false, || format!("{label}: {alg}: {e}")),
            }
        }
        match greedy_mrc(&topo) {
            Ok(g) => bounded(&mut sandwich, "GreedyMRC", mrc.objective, g.p_net_tot_mw),
            Err(e) => sandwich.check(false, || format!("{label}: greedy: {e}")),
        }
    }
    sandwich.notes.insert(
        0,
        format!("slowest MILP {slowest:.2}s, most B&B nodes {nodes_max}"),
    );
    let elapsed = start.elapsed().as_secs_f64();
    sandwich.elapsed_s = elapsed;
    scenario.elapsed_s = elapsed;
    extraction.elapsed_s = elapsed;
    SandwichReports {
        sandwich,
        scenario,
        extraction,
    }
}

/// Simplex against vertex enumeration on random bounded LPs of 2 to 5
/// variables.
pub fn lp_vertices(cases: usize, seed: u64) -> CheckReport {
    let start = Instant::now();
    let mut rep = CheckReport::new("simplex vs vertex enumeration", 1e-8);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for k in 0..cases {
        let n = rng.gen_range(2..=5);
        let mut inst = MilpInstance::new(format!("lp{k}"));
        let xs: Vec<usize> = (0..n)
            .map(|j| {
                let lo = rng.gen_range(-5.0..0.0);
                inst.add_continuous(format!("x{j}"), lo, lo + rng.gen_range(0.5..10.0))
            })
            .collect();
        for r in 0..rng.gen_range(1..=4) {
            let mut row: Vec<(usize, f64)> = Vec::new();
            for &x in &xs {
                if rng.gen_bool(0.7) {
                    row.push((x, rng.gen_range(-3.0..3.0)));
                }
            }
            if row.is_empty() {
                continue;
            }
            let rel = [Relation::Le, Relation::Ge, Relation::Eq][rng.gen_range(0..3)];
            inst.add_constraint(format!("r{r}"), row, rel, rng.gen_range(-4.0..4.0));
        }
        inst.set_objective(xs.iter().map(|&x| (x, rng.gen_range(-2.0..2.0))).collect());
        let fast = solve_lp(&inst);
        let slow = lp_vertex_oracle(&inst).expect("small LP");
        match slow {
            None => rep.check(fast.status == crate::exact::LpStatus::Infeasible, || {
                format!("lp{k}: oracle infeasible, simplex {:?}", fast.status)
            }),
            Some((v, _)) => {
                if fast.status == crate::exact::LpStatus::Optimal {
                    let err = (fast.objective - v).abs() / v.abs().max(1.0);
                    rep.record(err.max(inst.max_violation(&fast.x)));
                } else {
                    rep.check(false, || {
                        format!("lp{k}: oracle {v}, simplex {:?}", fast.status)
                    });
                }
            }
        }
    }
    rep.finish(start)
}

/// Branch and bound against enumeration on random knapsack-style problems.
pub fn milp_enumeration(cases: usize, seed: u64) -> CheckReport {
    let start = Instant::now();
    let mut rep = CheckReport::new("branch and bound vs enumeration", 1e-9);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for k in 0..cases {
        let n = rng.gen_range(3..=12);
        let mut inst = MilpInstance::new(format!("bin{k}"));
        let xs: Vec<usize> = (0..n).map(|j| inst.add_binary(format!("x{j}"))).collect();
        for r in 0..rng.gen_range(1..=3) {
            let row: Vec<(usize, f64)> =
                xs.iter().map(|&x| (x, rng.gen_range(1.0..10.0))).collect();
            let cap: f64 = row.iter().map(|r| r.1).sum::<f64>() * rng.gen_range(0.3..0.7);
            inst.add_constraint(format!("w{r}"), row, Relation::Le, cap);
        }
        inst.set_objective(xs.iter().map(|&x| (x, -rng.gen_range(1.0..10.0))).collect());
        let fast = solve_milp(&inst);
        let (v, _) = enumerate_binary(&inst)
            .expect("small problem")
            .expect("zero is feasible");
        rep.record(if fast.is_optimal() {
            (fast.objective - v).abs() / v.abs().max(1.0)
        } else {
            f64::NAN
        });
    }
    rep.finish(start)
}

/// Paired differences `b - a` over runs present in both, as (mean, half-width
/// of the 95% normal interval, pairs).
fn paired(a: &[&RunRecord], b: &[&RunRecord], f: impl Fn(&RunRecord) -> f64) -> (f64, f64, usize) {
    let by_run: BTreeMap<usize, &RunRecord> = a.iter().map(|r| (r.run, *r)).collect();
    let d: Vec<f64> = b
        .iter()
        .filter_map(|rb| by_run.get(&rb.run).map(|ra| f(rb) - f(ra)))
        .filter(|x| x.is_finite())
        .collect();
    let k = d.len();
    if k < 2 {
        return (f64::NAN, f64::NAN, k);
    }
    let mean = d.iter().sum::<f64>() / k as f64;
    let var = d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1) as f64;
    (mean, 1.96 * (var / k as f64).sqrt(), k)
}

/// Directional trends on a Monte-Carlo result with MC-MRC, MC-OPN, SV-MRC
/// and GreedyMRC at circuitry powers 1, 10 and 100 mW. Each claim is checked
/// on paired per-run differences: a strict claim needs the whole 95%
/// interval above zero.
pub fn trend_checks(res: &ExperimentResult, n: usize) -> Vec<CheckReport> {
    let pick = |alg: Algorithm, p_c: f64| -> Vec<&RunRecord> {
        res.records
            .iter()
            .filter(|r| r.n == n && r.algorithm == alg && r.p_c_mw == p_c && !r.failed())
            .collect()
    };
    let mut out = Vec::new();
    let claim = |name: &str, (mean, ci, k): (f64, f64, usize), strict: bool| {
        let mut rep = CheckReport::new(name, 0.0);
        let lower = mean - ci;
        let ok = if strict { lower > 0.0 } else { lower >= 0.0 };
        rep.check(ok && k > 1, String::new);
        rep.notes = vec![format!("mean difference {mean:.6} ± {ci:.6} over {k} runs")];
        rep.worst = if lower.is_nan() {
            f64::NAN
        } else {
            (-lower).max(0.0)
        };
        rep
    };

    let norm = |r: &RunRecord| normalize(r).p_net_tot;
    let (mrc1, opn1) = (pick(Algorithm::McMrc, 1.0), pick(Algorithm::McOpn, 1.0));
    let (mrc100, opn100) = (pick(Algorithm::McMrc, 100.0), pick(Algorithm::McOpn, 100.0));
    out.push(claim(
        "(a) MC-MRC at most MC-OPN at 1 mW",
        paired(&mrc1, &opn1, norm),
        false,
    ));
    // per-run gap at 1 mW minus per-run gap at 100 mW
    let gap = |mrc: &[&RunRecord], opn: &[&RunRecord]| -> BTreeMap<usize, f64> {
        let m: BTreeMap<usize, f64> = mrc.iter().map(|r| (r.run, norm(r))).collect();
        opn.iter()
            .filter_map(|r| m.get(&r.run).map(|v| (r.run, norm(r) - v)))
            .collect()
    };
    let (g1, g100) = (gap(&mrc1, &opn1), gap(&mrc100, &opn100));
    let shrink: Vec<f64> = g1
        .iter()
        .filter_map(|(run, a)| g100.get(run).map(|b| a - b))
        .filter(|x| x.is_finite())
        .collect();
    let k = shrink.len();
    let mean = shrink.iter().sum::<f64>() / k.max(1) as f64;
    let var =
        shrink.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / k.saturating_sub(1).max(1) as f64;
    out.push(claim(
        "(a) MRC advantage shrinks from 1 to 100 mW",
        (mean, 1.96 * (var / k.max(1) as f64).sqrt(), k),
        true,
    ));

    for alg in [Algorithm::McMrc, Algorithm::SvMrc] {
        for (lo, hi) in [(1.0, 10.0), (10.0, 100.0)] {
            out.push(claim(
                &format!("(b) {alg} parents per CN fall from {lo} to {hi} mW"),
                paired(&pick(alg, hi), &pick(alg, lo), |r| r.avg_pns_per_cn),
                true,
            ));
        }
        out.push(claim(
            &format!("(c) {alg} slots fall from 10 to 100 mW"),
            paired(&pick(alg, 100.0), &pick(alg, 10.0), |r| r.n_slots as f64),
            true,
        ));
    }
    out.push(claim(
        "(d) MC-MRC below GreedyMRC at 100 mW",
        paired(
            &pick(Algorithm::McMrc, 100.0),
            &pick(Algorithm::GreedyMrc, 100.0),
            |r| r.p_net_tot_mw,
        ),
        true,
    ));
    out
}

/// Suite names accepted by [`run_suite`].
pub const SUITES: [&str; 9] = [
    "shapley",
    "budget",
    "potential",
    "convergence",
    "decision",
    "piecewise",
    "sandwich",
    "lp",
    "milp",
];

/// Runs one named suite (or `all`). `quick` shrinks every suite.
pub fn run_suite(name: &str, quick: bool, seed: u64) -> Option<Vec<CheckReport>> {
    let s = |full: usize, small: usize| if quick { small } else { full };
    let names: BTreeSet<&str> = if name == "all" {
        SUITES.into_iter().collect()
    } else if SUITES.contains(&name) {
        [name].into_iter().collect()
    } else {
        return None;
    };
    let mut out = Vec::new();
    for n in SUITES.into_iter().filter(|n| names.contains(n)) {
        match n {
            "shapley" => out.push(shapley_closed_form(s(1000, 100), seed)),
            "budget" => out.push(budget_balance(s(500, 50), seed)),
            "potential" => out.push(mc_exact_potential(s(50, 5), 10, seed)),
            "convergence" => out.push(convergence(s(100, 5), 15, &[1.0, 10.0, 100.0], seed)),
            "decision" => out.push(node_decisions(s(200, 40), seed)),
            "piecewise" => out.push(sv_piecewise(s(1000, 100), seed)),
            "sandwich" => {
                let r = optimality_sandwich(s(50, 4), seed);
                out.extend([r.sandwich, r.scenario, r.extraction]);
            }
            "lp" => out.push(lp_vertices(s(300, 50), seed)),
            "milp" => out.push(milp_enumeration(s(100, 20), seed)),
            _ => unreachable!(),
        }
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quick_suites_pass() {
        for name in ["shapley", "budget", "potential", "piecewise", "lp", "milp"] {
            for r in run_suite(name, true, 3).unwrap() {
                assert!(r.passed(), "{}", r.line());
            }
        }
        assert!(run_suite("nope", true, 0).is_none());
    }

    #[test]
    fn random_profiles_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for seed in 0..10 {
            let topo = random_topology(9, seed, 10.0);
            let (p, order) = random_profile(&topo, &mut rng);
            p.validate(&topo).unwrap();
            assert_eq!(order.len(), 9);
            assert!(hop_ranks(&p, topo.source())
                .unwrap()
                .iter()
                .all(Option::is_some));
        }
    }
}
