//! Writes the global MILP in LP format, reads it back and solves the copy.
//!
//! cargo run --release --example lp_export [file]

use mrcast::exact::{build_global, from_lp_str, solve_milp, to_lp_string, GlobalOptions};
use mrcast::{PhysParams, Topology};

fn main() -> mrcast::Result<()> {
    let topo = Topology::generate(5, 250.0, 2, &PhysParams::default().with_circuitry(10.0))?;
    let (inst, _) = build_global(&topo, &GlobalOptions::default())?;
    let text = to_lp_string(&inst);
    if let Some(path) = std::env::args().nth(1) {
        std::fs::write(&path, &text).expect("writable path");
        println!("wrote {path}");
    } else {
        println!("{}", text.lines().take(12).collect::<Vec<_>>().join("\n"));
        println!("...");
    }
    let copy = from_lp_str(&text)?;
    let (a, b) = (solve_milp(&inst), solve_milp(&copy));
    println!(
        "original {:.6} ({:?}), reread {:.6} ({:?})",
        a.objective, a.status, b.objective, b.status
    );
    Ok(())
}
