//! Splitting one transmission among the nodes that requested it: the
//! marginal-contribution charge against the Shapley split.
//!
//! cargo run --example shapley_sharing

use mrcast::cost::{mc_share_of, sum_transmit_power, sv_share_oracle, sv_shares};

fn main() {
    let p_ct = 10.0;
    let group = [(3, 12.0), (5, 40.0), (8, 40.0), (9, 95.0)];
    let total = sum_transmit_power(group.iter().map(|g| g.1), p_ct);
    println!("transmit power {total} mW for requests {group:?}");

    let requests: Vec<f64> = group.iter().map(|g| g.1).collect();
    let sv = sv_shares(&group, p_ct);
    println!(
        "{:>4} {:>8} {:>10} {:>10} {:>10}",
        "CN", "request", "MC", "SV", "SV perm"
    );
    for (k, &(cn, req)) in group.iter().enumerate() {
        let others: Vec<f64> = requests
            .iter()
            .enumerate()
            .filter(|&(o, _)| o != k)
            .map(|(_, &r)| r)
            .collect();
        let mc = mc_share_of(req, &others, p_ct);
        let perm = sv_share_oracle(k, &requests, p_ct).unwrap();
        println!(
            "{cn:>4} {req:>8.1} {mc:>10.3} {:>10.3} {perm:>10.3}",
            sv[k].1
        );
    }
    let collected: f64 = sv.iter().map(|s| s.1).sum();
    println!("Shapley shares collect {collected} mW");
}
