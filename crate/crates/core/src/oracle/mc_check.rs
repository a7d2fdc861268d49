use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::constraint::ConstraintSpec;
use super::lattice_z::{enumerate_with, LatticeSystem};
use crate::error::{Error, Result};
use crate::mc::{heat_bath_sweep, FieldCache, CACHE_TOLERANCE};
use crate::model::{KacKernel, Lattice, SpinConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarginalRow {
    pub x: usize,
    pub layer: usize,
    pub exact: f64,
    pub sampled: f64,
    pub se: f64,
    /// `|sampled - exact| / se`.
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalReport {
    pub sweeps: usize,
    pub burn_in: usize,
    pub batches: usize,
    pub rows: Vec<MarginalRow>,
    pub max_z: f64,
}

impl MarginalReport {
    pub fn within(&self, z: f64) -> bool {
        self.max_z <= z
    }
}

/// Single-site means from a heat-bath chain against exact enumeration;
/// standard errors by batch means over `batches` equal batches.
#[allow(clippy::too_many_arguments)]
pub fn mc_marginals(
    lattice: Lattice,
    gamma: f64,
    beta: f64,
    epsilon: f64,
    sweeps: usize,
    burn_in: usize,
    batches: usize,
    seed: u64,
) -> Result<MarginalReport> {
    if batches < 2 || sweeps <= burn_in || (sweeps - burn_in) < batches {
        return Err(Error::invalid("sweeps", "need at least one sweep per batch and two batches"));
    }
    let kernel = KacKernel::new(gamma)?;
    let sys = LatticeSystem::all_free(lattice, kernel.clone(), beta, epsilon);
    let n = lattice.sites();
    let exact = enumerate_with(&sys, &ConstraintSpec::none(), n, |s, out| {
        for (o, &v) in out.iter_mut().zip(s) {
            *o = v as f64;
        }
    })?
    .means;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cfg = SpinConfig::random(lattice, &mut rng);
    let mut cache = FieldCache::new(&cfg, &kernel);
    let mut order = Vec::new();
    let per_batch = (sweeps - burn_in) / batches;
    let mut batch_means = vec![vec![0.0; n]; batches];
    for sweep in 1..=burn_in + per_batch * batches {
        heat_bath_sweep(&mut cfg, &mut cache, &kernel, beta, epsilon, &mut order, &mut rng);
        if sweep % 10_000 == 0 {
            cache.resync(&cfg, &kernel, CACHE_TOLERANCE)?;
        }
        if sweep > burn_in {
            let b = (sweep - burn_in - 1) / per_batch;
            for (acc, &s) in batch_means[b].iter_mut().zip(cfg.spins()) {
                *acc += s as f64;
            }
        }
    }
    let k = batches as f64;
    let rows: Vec<MarginalRow> = (0..n)
        .map(|i| {
            let means: Vec<f64> = batch_means.iter().map(|b| b[i] / per_batch as f64).collect();
            let mean = means.iter().sum::<f64>() / k;
            let var = means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (k - 1.0);
            let se = (var / k).sqrt();
            let (x, layer) = lattice.coords(i);
            MarginalRow {
                x,
                layer,
                exact: exact[i],
                sampled: mean,
                se,
                z: if se > 0.0 { (mean - exact[i]).abs() / se } else if mean == exact[i] { 0.0 } else { f64::INFINITY },
            }
        })
        .collect();
    Ok(MarginalReport {
        sweeps,
        burn_in,
        batches,
        max_z: rows.iter().map(|r| r.z).fold(0.0, f64::max),
        rows,
    })
}
