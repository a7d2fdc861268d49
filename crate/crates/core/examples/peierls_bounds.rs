//! Peierls summability verdicts along γ and the threshold γ₀.
//!
//! ```bash
//! cargo run --example peierls_bounds
//! ```

use layered_kac::bounds::{find_gamma0, peierls_sum_check, BoundConstants, BoundExponents};

fn main() -> layered_kac::Result<()> {
    let exps = BoundExponents::new(0.1, 0.01, 2.0)?;
    let consts = BoundConstants::new(1.0, 0.2);
    for gamma in [0.9, 1e-2, 1e-3, 1e-4, 1e-6] {
        let v = peierls_sum_check(gamma, &exps, &consts)?;
        println!(
            "γ = {gamma:.0e}: ln ψ = {:.3e}, tree margin {:.3e}, stripe margin {:?}, counting dominates {}, passes {}",
            v.log_psi, v.tree_margin, v.stripe_margin, v.counting_dominates, v.passes
        );
    }
    let r = find_gamma0(&exps, &consts, 1e-8, 1.0, 161)?;
    println!("γ₀ ≈ {:.4e}", r.gamma0);
    Ok(())
}
