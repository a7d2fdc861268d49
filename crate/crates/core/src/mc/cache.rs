use crate::error::{Error, Result};
use crate::model::{local_field, KacKernel, SpinConfig};

/// Horizontal Kac field of every site, kept current under single flips.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldCache {
    fields: Vec<f64>,
}

impl FieldCache {
    pub fn new(cfg: &SpinConfig, kernel: &KacKernel) -> Self {
        let lat = cfg.lattice();
        let mut fields = Vec::with_capacity(lat.sites());
        for layer in 0..lat.height {
            for x in 0..lat.width {
                fields.push(local_field(cfg, kernel, x, layer));
            }
        }
        FieldCache { fields }
    }

    #[inline]
    pub fn field(&self, index: usize) -> f64 {
        self.fields[index]
    }

    pub fn fields(&self) -> &[f64] {
        &self.fields
    }

    /// Records that site `(x, layer)` now holds `new_spin` (it held
    /// `-new_spin` before).
    pub fn apply_flip(&mut self, cfg: &SpinConfig, kernel: &KacKernel, x: usize, layer: usize, new_spin: i8) {
        let lat = cfg.lattice();
        let w = lat.width;
        let row = &mut self.fields[layer * w..(layer + 1) * w];
        let delta = 2.0 * new_spin as f64;
        let periodic = lat.margin_spin(layer).is_none();
        for (k, &wt) in kernel.positive_weights().iter().enumerate() {
            let d = k + 1;
            let dw = wt * delta;
            if periodic {
                row[(x + d) % w] += dw;
                row[(x + w - d % w) % w] += dw;
            } else {
                if x + d < w {
                    row[x + d] += dw;
                }
                if x >= d {
                    row[x - d] += dw;
                }
            }
        }
    }

    /// Largest deviation from a fresh recomputation and its site index.
    pub fn max_drift(&self, cfg: &SpinConfig, kernel: &KacKernel) -> (f64, usize) {
        let fresh = FieldCache::new(cfg, kernel);
        self.fields
            .iter()
            .zip(&fresh.fields)
            .map(|(a, b)| (a - b).abs())
            .enumerate()
            .fold((0.0, 0), |acc, (i, d)| if d > acc.0 { (d, i) } else { acc })
    }

    /// Recomputes all fields, failing if the cached values had drifted
    /// by more than `tolerance`.
    pub fn resync(&mut self, cfg: &SpinConfig, kernel: &KacKernel, tolerance: f64) -> Result<f64> {
        let (drift, site) = self.max_drift(cfg, kernel);
        if drift > tolerance {
            return Err(Error::CacheDesync { drift, site });
        }
        *self = FieldCache::new(cfg, kernel);
        Ok(drift)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{HorizontalBc, Lattice, VerticalBc};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn flips_track_fresh_fields() {
        let kernel = KacKernel::new(0.15).unwrap();
        for hbc in [HorizontalBc::Periodic, HorizontalBc::Minus] {
            let lat = Lattice::new(24, 3, hbc, VerticalBc::Plus, kernel.range()).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(3);
            let mut cfg = SpinConfig::random(lat, &mut rng);
            let mut cache = FieldCache::new(&cfg, &kernel);
            for _ in 0..2000 {
                let (x, l) = (rng.gen_range(0..24), rng.gen_range(0..3));
                let s = -cfg.get(x, l);
                cfg.set(x, l, s);
                cache.apply_flip(&cfg, &kernel, x, l, s);
            }
            let (drift, _) = cache.max_drift(&cfg, &kernel);
            assert!(drift < 1e-10, "{drift}");
            assert!(cache.resync(&cfg, &kernel, 1e-9).is_ok());
        }
    }

    #[test]
    fn desync_is_detected() {
        let kernel = KacKernel::new(0.25).unwrap();
        let lat = Lattice::new(16, 1, HorizontalBc::Periodic, VerticalBc::Plus, kernel.range()).unwrap();
        let cfg = SpinConfig::uniform(lat, 1);
        let mut cache = FieldCache::new(&cfg, &kernel);
        cache.fields[5] += 1e-6;
        assert!(matches!(cache.resync(&cfg, &kernel, 1e-9), Err(Error::CacheDesync { site: 5, .. })));
    }
}
