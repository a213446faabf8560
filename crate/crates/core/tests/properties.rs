use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use mrcast::baselines::greedy_mrc;
use mrcast::cost::{
    ledger, mc_node_cost, mc_share_of, sum_transmit_power, sv_share_closed, sv_share_joining,
    sv_share_oracle, sv_shares, Scheme,
};
use mrcast::exact::{solve_lp, MilpInstance, Relation};
use mrcast::game::{certify_ne, run_to_ne, GameConfig};
use mrcast::harness::{child_seed, fmt_sig9};
use mrcast::model::{compute_powers, hop_ranks, snr_mrc, snr_unicast};
use mrcast::verify::random_profile;
use mrcast::{PhysParams, Topology};

fn topo(n: usize, seed: u64, p_c: f64) -> Topology {
    Topology::generate(n, 250.0, seed, &PhysParams::default().with_circuitry(p_c)).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn shapley_shares_sum_to_transmit_power(
        reqs in prop::collection::vec(0.01f64..200.0, 1..9),
        p_ct in prop::sample::select(vec![0.0, 1.0, 10.0, 100.0]),
    ) {
        let group: Vec<(usize, f64)> = reqs.iter().copied().enumerate().collect();
        let total: f64 = sv_shares(&group, p_ct).iter().map(|s| s.1).sum();
        let ptx = sum_transmit_power(reqs.iter().copied(), p_ct);
        prop_assert!(rel(total, ptx) < 1e-12);
    }

    #[test]
    fn closed_form_matches_permutations(
        reqs in prop::collection::vec(0.0f64..200.0, 1..7),
        p_ct in prop::sample::select(vec![0.0, 10.0]),
    ) {
        let mut sorted = reqs.clone();
        sorted.sort_by(f64::total_cmp);
        for (k, &r) in reqs.iter().enumerate() {
            let rank = sorted.iter().position(|&s| s == r).unwrap() + 1;
            let closed = sv_share_closed(rank, &sorted, p_ct).unwrap();
            let oracle = sv_share_oracle(k, &reqs, p_ct).unwrap();
            prop_assert!((closed - oracle).abs() <= 1e-9 * oracle.abs().max(1.0));
        }
    }

    #[test]
    fn shares_grow_with_own_request(
        others in prop::collection::vec(0.0f64..200.0, 0..6),
        a in 0.0f64..200.0,
        b in 0.0f64..200.0,
        p_ct in prop::sample::select(vec![0.0, 10.0, 100.0]),
    ) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(sv_share_joining(lo, &others, p_ct) <= sv_share_joining(hi, &others, p_ct) + 1e-12);
        prop_assert!(mc_share_of(lo, &others, p_ct) <= mc_share_of(hi, &others, p_ct) + 1e-12);
    }

    #[test]
    fn shapley_never_charges_more_than_standalone(
        others in prop::collection::vec(0.0f64..200.0, 0..6),
        x in 0.0f64..200.0,
        p_ct in prop::sample::select(vec![0.0, 10.0, 100.0]),
    ) {
        prop_assert!(sv_share_joining(x, &others, p_ct) <= x + p_ct + 1e-12);
    }

    #[test]
    fn combining_adds_unicast_snrs(
        links in prop::collection::vec((0.0f64..200.0, 1e-9f64..1e-5), 1..5),
    ) {
        let noise = 1e-7;
        let sum: f64 = links.iter().map(|&(p, g)| snr_unicast(p, g, noise)).sum();
        prop_assert!(rel(snr_mrc(&links, noise), sum) < 1e-12);
    }

    #[test]
    fn sig9_round_trips(v in prop::num::f64::NORMAL) {
        let back: f64 = fmt_sig9(v).parse().unwrap();
        prop_assert!(rel(back, v) <= 5e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn random_profiles_are_balanced(
        n in 3usize..14,
        seed in any::<u64>(),
        p_c in prop::sample::select(vec![1.0, 10.0, 100.0]),
    ) {
        let t = topo(n, seed, p_c);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (profile, _) = random_profile(&t, &mut rng);
        prop_assert!(profile.validate(&t).is_ok());
        prop_assert!(hop_ranks(&profile, t.source()).is_ok());
        let sv = ledger(&profile, Scheme::Sv, t.phys()).unwrap();
        let powers = compute_powers(&profile, t.phys());
        prop_assert!(rel(sv.social_cost, powers.p_net_tx()) < 1e-9);
        // marginal charges never collect more than the network spends
        let total: f64 = t.receivers().map(|i| mc_node_cost(i, &profile, t.phys())).sum();
        prop_assert!(total <= powers.p_net_tot() + 1e-9);
    }

    #[test]
    fn equilibria_are_certified(
        n in 3usize..10,
        seed in any::<u64>(),
        p_c in prop::sample::select(vec![1.0, 10.0, 100.0]),
        scheme in prop::sample::select(vec![Scheme::Mc, Scheme::Sv]),
        mrc in any::<bool>(),
    ) {
        let t = topo(n, seed, p_c);
        let cfg = GameConfig::new(scheme, mrc);
        let tr = run_to_ne(&t, &cfg).unwrap();
        prop_assert!(tr.converged);
        prop_assert!(certify_ne(&t, &tr.profile, &cfg).unwrap().certified);
        prop_assert!(tr.p_net_tot_mw >= tr.p_net_tx_mw);
        prop_assert!(tr.avg_pns_per_cn >= 1.0 && (mrc || tr.avg_pns_per_cn == 1.0));
    }

    #[test]
    fn greedy_reaches_everyone(n in 2usize..20, seed in any::<u64>()) {
        let g = greedy_mrc(&topo(n, seed, 10.0)).unwrap();
        prop_assert!(g.state.decoded.iter().all(|&d| d));
        prop_assert!(g.p_net_tot_mw >= g.p_net_tx_mw && g.p_net_tx_mw >= g.raw_radio_mw);
    }

    #[test]
    fn lp_optimum_beats_feasible_points(
        costs in prop::collection::vec(-3.0f64..3.0, 3),
        point in prop::collection::vec(0.0f64..4.0, 3),
        rows in prop::collection::vec(prop::collection::vec(-2.0f64..2.0, 3), 1..4),
    ) {
        // rows are built to hold at `point`, so the LP is feasible
        let mut inst = MilpInstance::new("p");
        let xs: Vec<usize> = (0..3).map(|k| inst.add_continuous(format!("x{k}"), 0.0, 4.0)).collect();
        for (r, a) in rows.iter().enumerate() {
            let act: f64 = a.iter().zip(&point).map(|(a, x)| a * x).sum();
            inst.add_constraint(format!("r{r}"), xs.iter().copied().zip(a.iter().copied()).collect(), Relation::Le, act + 0.5);
        }
        inst.set_objective(xs.iter().copied().zip(costs.iter().copied()).collect());
        let s = solve_lp(&inst);
        prop_assert_eq!(s.status, mrcast::exact::LpStatus::Optimal);
        prop_assert!(inst.max_violation(&s.x) < 1e-9);
        prop_assert!(s.objective <= inst.objective_value(&point) + 1e-9);
    }
}

#[test]
fn child_seeds_do_not_collide() {
    let mut seen = std::collections::BTreeSet::new();
    for n in [4, 8, 16] {
        for run in 0..500 {
            assert!(seen.insert(child_seed(1, n, run)));
        }
    }
}
