//! Magnetization under plus, minus and periodic boundaries, and the
//! periodic ensemble's symmetry. Defaults are small; pass `L H replicas
//! sweeps` to scale up, e.g. `2048 16 10 4000`.
//!
//! ```bash
//! cargo run --release --example phase_ordering -- 512 8 6 2000
//! ```

use layered_kac::experiments::{dip_statistic, magnetization_cell, SweepCell, SweepPlan};
use layered_kac::io::SweepBc;

fn main() -> layered_kac::Result<()> {
    let args: Vec<usize> = std::env::args().skip(1).map(|a| a.parse().expect("integer argument")).collect();
    let get = |i: usize, d: usize| args.get(i).copied().unwrap_or(d);
    let sweeps = get(3, 1500);
    let plan = SweepPlan {
        alpha: 0.3,
        a: 0.05,
        width: get(0, 512),
        height: get(1, 8),
        sweeps,
        burn_in: sweeps / 4,
        measure_every: 5,
        replicas: get(2, 6),
        seed: 2024,
        max_site_sweeps: None,
    };
    for bc in [SweepBc::Plus, SweepBc::Minus, SweepBc::Periodic] {
        let cell = SweepCell { beta: 2.0, gamma: 0.15, vertical_exponent: 2.0, bc };
        let row = magnetization_cell(&plan, &cell)?;
        println!(
            "{:>8}: mean {:+.4} ± {:.4}, |deviation| {:.4}, replicas {:?}",
            bc.name(),
            row.mean,
            row.se,
            row.deviation,
            row.replica_means.iter().map(|m| format!("{m:+.3}")).collect::<Vec<_>>()
        );
        if bc == SweepBc::Periodic {
            println!("          dip statistic of replica means {:.4}", dip_statistic(&row.replica_means));
        }
    }
    Ok(())
}
