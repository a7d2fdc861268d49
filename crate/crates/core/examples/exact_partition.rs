//! Exact log-partition functions by enumeration and by transfer matrix on
//! the fixture lattices.
//!
//! ```bash
//! cargo run --release --example exact_partition
//! ```

use layered_kac::oracle::{enumerate_z, lattice_fixtures, transfer_matrix_log_z, ConstraintSpec, LatticeSystem};

fn main() -> layered_kac::Result<()> {
    println!("{:>3}x{:<3} {:>6} {:>5} {:>20} {:>20} {:>9}", "L", "H", "gamma", "beta", "enumeration", "transfer", "rel");
    for f in lattice_fixtures() {
        let (lat, kernel) = f.lattice()?;
        let sys = LatticeSystem::all_free(lat, kernel.clone(), f.beta, f.epsilon);
        let e = enumerate_z(&sys, &ConstraintSpec::none())?;
        let t = transfer_matrix_log_z(&lat, &kernel, f.beta, f.epsilon)?;
        println!(
            "{:>3}x{:<3} {:>6.3} {:>5.2} {:>20.14} {:>20.14} {:>9.1e}",
            f.width,
            f.height,
            f.gamma,
            f.beta,
            e.log_z,
            t,
            (e.log_z - t).exp_m1().abs()
        );
    }
    Ok(())
}
