use rand::seq::SliceRandom;
use rand::Rng;

use super::cache::FieldCache;
use crate::model::{conditional_gibbs, vertical_neighbours, KacKernel, SpinConfig};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SweepStats {
    pub attempted: usize,
    pub flips: usize,
}

/// One heat-bath sweep in a fresh random order.
pub fn heat_bath_sweep<R: Rng + ?Sized>(
    cfg: &mut SpinConfig,
    cache: &mut FieldCache,
    kernel: &KacKernel,
    beta: f64,
    epsilon: f64,
    order: &mut Vec<usize>,
    rng: &mut R,
) -> SweepStats {
    sweep_with(cfg, cache, kernel, epsilon, order, rng, |f| conditional_gibbs(f, beta))
}

/// One sweep with an arbitrary update rule.
///
/// `aligned(|f|)` is the probability that the spin takes the sign of its
/// total field `f` (the current spin when `f = 0`); the rule is covariant
/// under a global flip for any random sequence.
pub fn sweep_with<R: Rng + ?Sized>(
    cfg: &mut SpinConfig,
    cache: &mut FieldCache,
    kernel: &KacKernel,
    epsilon: f64,
    order: &mut Vec<usize>,
    rng: &mut R,
    aligned: impl Fn(f64) -> f64,
) -> SweepStats {
    let lat = *cfg.lattice();
    if order.len() != lat.sites() {
        *order = (0..lat.sites()).collect();
    }
    order.shuffle(rng);
    let mut stats = SweepStats { attempted: order.len(), flips: 0 };
    for &i in order.iter() {
        let (x, layer) = lat.coords(i);
        let f = cache.field(i) + epsilon * vertical_neighbours(cfg, x, layer) as f64;
        let u: f64 = rng.gen();
        let sign: i8 = if f > 0.0 {
            1
        } else if f < 0.0 {
            -1
        } else {
            cfg.spins()[i]
        };
        let s = if u < aligned(f.abs()) { sign } else { -sign };
        if s != cfg.spins()[i] {
            cfg.set_index(i, s);
            cache.apply_flip(cfg, kernel, x, layer, s);
            stats.flips += 1;
        }
    }
    stats
}
