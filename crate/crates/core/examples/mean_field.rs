//! Mean-field magnetization `m_β` across the transition.
//!
//! ```bash
//! cargo run --example mean_field
//! ```

use layered_kac::meanfield::solve_mbeta;

fn main() {
    println!("{:>6} {:>14} {:>10}", "beta", "m_beta", "residual");
    for beta in [0.5, 1.0, 1.05, 1.2, 1.5, 2.0, 3.0, 5.0] {
        let s = solve_mbeta(beta);
        println!("{:>6.2} {:>14.10} {:>10.1e}", beta, s.m_beta, s.residual);
    }
}
