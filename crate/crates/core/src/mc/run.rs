use std::sync::mpsc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cache::FieldCache;
use super::intervals::interval_histogram;
use super::sweep::heat_bath_sweep;
use crate::coarse::CoarseFields;
use crate::error::{Error, Result};
use crate::meanfield::solve_mbeta;
use crate::model::{
    check_block_width, hamiltonian_with_epsilon, HorizontalBc, KacKernel, Lattice, ModelParams, Scales,
    SpinConfig, VerticalBc,
};
use crate::numerics::NeumaierSum;

pub const DEFAULT_RESYNC_EVERY: usize = 10_000;
pub const CACHE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    Magnetization,
    LayerProfile,
    BlockEtaHistogram,
    IntervalLengths,
    Energy,
}

impl Channel {
    pub const ALL: [Channel; 5] = [
        Channel::Magnetization,
        Channel::LayerProfile,
        Channel::BlockEtaHistogram,
        Channel::IntervalLengths,
        Channel::Energy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Channel::Magnetization => "magnetization",
            Channel::LayerProfile => "layer_profile",
            Channel::BlockEtaHistogram => "block_eta_histogram",
            Channel::IntervalLengths => "interval_lengths",
            Channel::Energy => "energy",
        }
    }

    fn needs_blocks(self) -> bool {
        matches!(self, Channel::BlockEtaHistogram | Channel::IntervalLengths)
    }
}

impl std::str::FromStr for Channel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Channel::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::invalid("measurements", format!("unknown channel {s:?}")))
    }
}

/// Starting configuration of every replica.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialState {
    /// Follow the boundary: uniform for ± boundaries, split at mid-height
    /// for mixed ones, random when fully periodic.
    #[default]
    Aligned,
    Plus,
    Minus,
    Random,
}

impl InitialState {
    pub fn build(self, lattice: Lattice, rng: &mut ChaCha8Rng) -> SpinConfig {
        let uniform = |s| SpinConfig::uniform(lattice, s);
        match self {
            InitialState::Plus => uniform(1),
            InitialState::Minus => uniform(-1),
            InitialState::Random => SpinConfig::random(lattice, rng),
            InitialState::Aligned => {
                if lattice.vertical.is_dobrushin() {
                    let upper = lattice.vertical.frozen_layer(true).unwrap_or(1);
                    return SpinConfig::from_fn(lattice, |_, l| {
                        if 2 * l >= lattice.height {
                            upper
                        } else {
                            -upper
                        }
                    });
                }
                match (lattice.horizontal, lattice.vertical) {
                    (HorizontalBc::Plus, _) | (HorizontalBc::Periodic, VerticalBc::Plus) => uniform(1),
                    (HorizontalBc::Minus, _) | (HorizontalBc::Periodic, VerticalBc::Minus) => uniform(-1),
                    _ => SpinConfig::random(lattice, rng),
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSpec {
    pub params: ModelParams,
    pub lattice: Lattice,
    pub sweeps: usize,
    pub burn_in: usize,
    pub seed: u64,
    pub measure_every: usize,
    pub measurements: Vec<Channel>,
    pub replicas: usize,
    pub init: InitialState,
    /// Run the decoupled model (ε = 0).
    pub decoupled: bool,
    /// Block scales for η-based channels; defaults to those of `params`.
    pub scales: Option<Scales>,
    pub resync_every: usize,
}

impl RunSpec {
    pub fn new(params: ModelParams, lattice: Lattice, sweeps: usize, burn_in: usize, seed: u64) -> Self {
        RunSpec {
            params,
            lattice,
            sweeps,
            burn_in,
            seed,
            measure_every: 1,
            measurements: vec![Channel::Magnetization],
            replicas: 1,
            init: InitialState::Aligned,
            decoupled: false,
            scales: None,
            resync_every: DEFAULT_RESYNC_EVERY,
        }
    }

    pub fn epsilon(&self) -> f64 {
        if self.decoupled {
            0.0
        } else {
            self.params.epsilon()
        }
    }

    pub fn block_scales(&self) -> Scales {
        self.scales.unwrap_or_else(|| self.params.scales())
    }

    pub fn validate(&self) -> Result<()> {
        if self.burn_in >= self.sweeps {
            return Err(Error::invalid(
                "burn_in",
                format!("must be < sweeps = {}, got {}", self.sweeps, self.burn_in),
            ));
        }
        if self.measure_every == 0 {
            return Err(Error::invalid("measure_every", "must be >= 1"));
        }
        if self.replicas == 0 {
            return Err(Error::invalid("replicas", "must be >= 1"));
        }
        if self.resync_every == 0 {
            return Err(Error::invalid("resync_every", "must be >= 1"));
        }
        let l = self.lattice;
        Lattice::new(l.width, l.height, l.horizontal, l.vertical, self.params.kac_range())?;
        if self.measurements.iter().any(|c| c.needs_blocks()) {
            check_block_width(l.width, self.block_scales().ell_plus)?;
        }
        Ok(())
    }

    /// Sweep indices (1-based) at which measurements are taken.
    pub fn measured_sweeps(&self) -> impl Iterator<Item = usize> + '_ {
        (self.burn_in + 1..=self.sweeps).filter(move |s| s % self.measure_every == 0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub replica: usize,
    pub sweep: usize,
    pub channel: Channel,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicaResult {
    pub replica: usize,
    pub final_config: SpinConfig,
    /// Fraction of site updates that changed the spin, after burn-in.
    pub flip_rate: f64,
    pub max_cache_drift: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    /// Sorted by replica, then sweep, then channel.
    pub records: Vec<Record>,
    pub replicas: Vec<ReplicaResult>,
}

impl RunOutput {
    pub fn channel(&self, replica: usize, channel: Channel) -> impl Iterator<Item = &Record> + '_ {
        self.records
            .iter()
            .filter(move |r| r.replica == replica && r.channel == channel)
    }

    /// Time average of the first value of `channel` for one replica.
    pub fn time_average(&self, replica: usize, channel: Channel) -> Option<f64> {
        let (sum, n) = self
            .channel(replica, channel)
            .fold((NeumaierSum::new(), 0usize), |(mut s, n), r| {
                s += r.values[0];
                (s, n + 1)
            });
        (n > 0).then(|| sum.value() / n as f64)
    }

    /// The magnetization series of one replica.
    pub fn magnetization_series(&self, replica: usize) -> Vec<f64> {
        self.channel(replica, Channel::Magnetization).map(|r| r.values[0]).collect()
    }
}

/// Runs all replicas, in parallel, and gathers their records through a
/// single consumer.
pub fn run(spec: &RunSpec) -> Result<RunOutput> {
    spec.validate()?;
    let kernel = KacKernel::new(spec.params.gamma())?;
    let (tx, rx) = mpsc::channel::<Record>();
    let results = std::thread::scope(|scope| {
        let handle = scope.spawn(|| {
            (0..spec.replicas)
                .into_par_iter()
                .map_with(tx, |tx, r| run_replica(spec, &kernel, r, &mut |rec| {
                    // the consumer outlives all producers
                    let _ = tx.send(rec);
                }))
                .collect::<Vec<_>>()
        });
        let mut per_replica: Vec<Vec<Record>> = vec![Vec::new(); spec.replicas];
        for rec in rx {
            per_replica[rec.replica].push(rec);
        }
        let results = handle.join().expect("replica worker panicked");
        (per_replica, results)
    });
    let (per_replica, results) = results;
    let replicas = results.into_iter().collect::<Result<Vec<_>>>()?;
    let mut records: Vec<Record> = per_replica.into_iter().flatten().collect();
    records.sort_by_key(|a| (a.replica, a.sweep, a.channel));
    Ok(RunOutput { records, replicas })
}

/// Runs one replica, streaming its records to `sink`.
pub fn run_replica(
    spec: &RunSpec,
    kernel: &KacKernel,
    replica: usize,
    sink: &mut dyn FnMut(Record),
) -> Result<ReplicaResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(replica as u64);
    let cfg = spec.init.build(spec.lattice, &mut rng);
    run_from(spec, kernel, replica, cfg, &mut rng, sink)
}

/// Runs one replica from a given starting configuration.
pub fn run_from(
    spec: &RunSpec,
    kernel: &KacKernel,
    replica: usize,
    mut cfg: SpinConfig,
    rng: &mut ChaCha8Rng,
    sink: &mut dyn FnMut(Record),
) -> Result<ReplicaResult> {
    let beta = spec.params.beta();
    let eps = spec.epsilon();
    let m_beta = solve_mbeta(beta).m_beta;
    let scales = spec.block_scales();
    let mut cache = FieldCache::new(&cfg, kernel);
    let mut order = Vec::new();
    let (mut flips, mut attempted) = (0usize, 0usize);
    let mut max_drift: f64 = 0.0;
    for sweep in 1..=spec.sweeps {
        let stats = heat_bath_sweep(&mut cfg, &mut cache, kernel, beta, eps, &mut order, rng);
        if sweep > spec.burn_in {
            flips += stats.flips;
            attempted += stats.attempted;
        }
        if sweep % spec.resync_every == 0 {
            max_drift = max_drift.max(cache.resync(&cfg, kernel, CACHE_TOLERANCE)?);
        }
        if sweep > spec.burn_in && sweep % spec.measure_every == 0 {
            measure(spec, &cfg, kernel, eps, scales, m_beta, replica, sweep, sink)?;
        }
    }
    max_drift = max_drift.max(cache.resync(&cfg, kernel, CACHE_TOLERANCE)?);
    Ok(ReplicaResult {
        replica,
        final_config: cfg,
        flip_rate: if attempted == 0 { 0.0 } else { flips as f64 / attempted as f64 },
        max_cache_drift: max_drift,
    })
}

#[allow(clippy::too_many_arguments)]
fn measure(
    spec: &RunSpec,
    cfg: &SpinConfig,
    kernel: &KacKernel,
    eps: f64,
    scales: Scales,
    m_beta: f64,
    replica: usize,
    sweep: usize,
    sink: &mut dyn FnMut(Record),
) -> Result<()> {
    let mut fields = None;
    let mut channels = spec.measurements.clone();
    channels.sort();
    channels.dedup();
    for channel in channels {
        let values = match channel {
            Channel::Magnetization => vec![cfg.magnetization()],
            Channel::LayerProfile => (0..cfg.lattice().height).map(|l| cfg.layer_magnetization(l)).collect(),
            Channel::Energy => vec![hamiltonian_with_epsilon(cfg, kernel, eps) / cfg.lattice().sites() as f64],
            Channel::BlockEtaHistogram | Channel::IntervalLengths => {
                if fields.is_none() {
                    fields = Some(CoarseFields::compute(cfg, scales, m_beta)?);
                }
                let f = fields.as_ref().unwrap();
                if channel == Channel::BlockEtaHistogram {
                    let mut counts = [0.0; 3];
                    for layer in 0..cfg.lattice().height {
                        for &e in f.eta_row(layer) {
                            counts[(e + 1) as usize] += 1.0;
                        }
                    }
                    counts.to_vec()
                } else {
                    let h = interval_histogram(f);
                    vec![h.total_runs() as f64, h.mean_length(), h.median_length() as f64]
                }
            }
        };
        sink(Record {
            replica,
            sweep,
            channel,
            values,
        });
    }
    Ok(())
}

/// Batch-means standard error of a correlated series.
pub fn batch_means_se(series: &[f64], batches: usize) -> f64 {
    let batches = batches.max(2).min(series.len().max(2));
    let size = series.len() / batches;
    if size == 0 {
        return f64::NAN;
    }
    let means: Vec<f64> = series
        .chunks_exact(size)
        .take(batches)
        .map(|c| c.iter().sum::<f64>() / size as f64)
        .collect();
    let k = means.len() as f64;
    let mean = means.iter().sum::<f64>() / k;
    let var = means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (k - 1.0);
    (var / k).sqrt()
}
