//! Holley and FKG checks on randomized 6-spin blocks, then exact deviation
//! tails on a 12-spin block.
//!
//! ```bash
//! cargo run --release --example domination
//! ```

use layered_kac::oracle::{block_family, check_deviation_bound, check_fkg_sandwich, check_holley, EventFamily, DEVIATION_B_GRID};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> layered_kac::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let family = block_family(6);
    for k in 0..5 {
        let inst = family.sample(&mut rng)?;
        let strict = check_holley(&inst, 3.0)?;
        let loose = check_holley(&inst, 0.0)?;
        let fkg = check_fkg_sandwich(&inst, 3.0, EventFamily::AllSubsets)?;
        println!(
            "instance {k}: Holley(M=3) holds {}, violations at M=0: {}, FKG holds {}",
            strict.holds(),
            loose.upper_violations,
            fkg.holds()
        );
    }

    let inst = block_family(12).sample(&mut rng)?;
    let dev = check_deviation_bound(&inst, &DEVIATION_B_GRID, &[0.01, 0.1, 1.0])?;
    println!("{}", serde_json::to_string_pretty(&dev).expect("report serializes"));
    Ok(())
}
