//! Runtime of the three lattice algorithms for N = 1..10 (10 timed runs
//! each, reference parameters, random-expiry call).

use reopt::bench::{ranking_at, run_bench};
use reopt::{MarketParams, Payoff};

fn main() -> reopt::Result<()> {
    let n_list: Vec<usize> = (1..=10).collect();
    let rows = run_bench(
        &MarketParams::default(),
        0.10,
        &Payoff::call(100.0)?,
        &n_list,
        10,
    )?;
    println!(
        "{:>3} {:>10} {:>12} {:>10}",
        "N", "algo", "mean_ns", "nodes"
    );
    for r in &rows {
        println!(
            "{:>3} {:>10} {:>12} {:>10}",
            r.n_steps, r.algo, r.mean_ns, r.nodes_touched
        );
    }
    let order: Vec<&str> = ranking_at(&rows, 10).iter().map(|a| a.tag()).collect();
    println!("fastest to slowest at N = 10: {}", order.join(" < "));
    Ok(())
}
