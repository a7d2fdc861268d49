//! A short heat-bath run under plus boundaries, with a spin snapshot
//! written to and read back from the binary format.
//!
//! ```bash
//! cargo run --release --example heat_bath
//! ```

use layered_kac::io::{params_hash, read_spins, write_spins};
use layered_kac::mc::{run, Channel, RunSpec};
use layered_kac::model::{HorizontalBc, Lattice, ModelParams, VerticalBc};

fn main() -> layered_kac::Result<()> {
    let params = ModelParams::new(2.0, 0.15, 2.0, 0.3, 0.05)?;
    let lattice = Lattice::with_blocks(256, 4, HorizontalBc::Plus, VerticalBc::Plus, params.kac_range(), params.ell_plus())?;
    let mut spec = RunSpec::new(params, lattice, 3000, 500, 42);
    spec.replicas = 4;
    spec.measure_every = 10;
    spec.measurements = vec![Channel::Magnetization, Channel::Energy];

    let out = run(&spec)?;
    for r in &out.replicas {
        println!(
            "replica {}: <m> = {:+.4}  <E> = {:.2}  flip rate {:.3}  cache drift {:.1e}",
            r.replica,
            out.time_average(r.replica, Channel::Magnetization).unwrap_or(f64::NAN),
            out.time_average(r.replica, Channel::Energy).unwrap_or(f64::NAN),
            r.flip_rate,
            r.max_cache_drift,
        );
    }

    let last = &out.replicas[0].final_config;
    let mut bytes = Vec::new();
    write_spins(&mut bytes, last, &params_hash(&params)).expect("in-memory write");
    let (back, hash) = read_spins(bytes.as_slice())?;
    assert_eq!(&back, last);
    assert_eq!(hash, params_hash(&params));
    println!("snapshot: {} bytes, round trip ok", bytes.len());
    Ok(())
}
