use std::f64::consts::PI;
use std::fmt::Debug;
use std::sync::Arc;

use crate::error::{Error, Result};

/// A symmetric, nonnegative interaction profile supported on `[-1, 1]`.
pub trait KacProfile: Debug + Send + Sync {
    fn value(&self, r: f64) -> f64;

    fn name(&self) -> &'static str;
}

/// `J(r) = (1 + cos πr) / 2` on `|r| < 1`, zero outside.
#[derive(Debug, Clone, Copy, Default)]
pub struct CosineProfile;

impl KacProfile for CosineProfile {
    fn value(&self, r: f64) -> f64 {
        if r.abs() >= 1.0 {
            0.0
        } else {
            0.5 * (1.0 + (PI * r).cos())
        }
    }

    fn name(&self) -> &'static str {
        "cosine"
    }
}

/// Discrete Kac coupling table `w(d)`, renormalized so `Σ_{d≠0} w(d) = 1`.
#[derive(Debug, Clone)]
pub struct KacKernel {
    gamma: f64,
    range: usize,
    // weights[d - 1] = w(d) = w(-d) for d = 1..range-1
    weights: Vec<f64>,
    profile: Arc<dyn KacProfile>,
}

impl KacKernel {
    pub fn new(gamma: f64) -> Result<Self> {
        Self::with_profile(gamma, Arc::new(CosineProfile))
    }

    pub fn with_profile(gamma: f64, profile: Arc<dyn KacProfile>) -> Result<Self> {
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(Error::invalid("gamma", format!("must lie in (0, 1), got {gamma}")));
        }
        let range = (1.0 / gamma).ceil() as usize;
        if range < 2 {
            return Err(Error::invalid("gamma", "kernel degenerate: range below two sites"));
        }
        let raw: Vec<f64> = (1..range).map(|d| profile.value(gamma * d as f64)).collect();
        if raw.iter().any(|w| *w < 0.0 || !w.is_finite()) {
            return Err(Error::invalid("profile", "negative or non-finite profile value"));
        }
        let total = 2.0 * crate::numerics::compensated_sum(&raw);
        if total <= 0.0 {
            return Err(Error::invalid("profile", "profile vanishes on every lattice offset"));
        }
        let weights = raw.iter().map(|w| w / total).collect();
        Ok(KacKernel {
            gamma,
            range,
            weights,
            profile,
        })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// `ceil(1/γ)`; couplings vanish for `|d| >= range`.
    pub fn range(&self) -> usize {
        self.range
    }

    /// Largest interacting offset.
    pub fn max_offset(&self) -> usize {
        self.range - 1
    }

    pub fn weight(&self, d: isize) -> f64 {
        let a = d.unsigned_abs();
        if a == 0 || a >= self.range {
            0.0
        } else {
            self.weights[a - 1]
        }
    }

    /// Positive-offset weights `w(1), …, w(range-1)`.
    pub fn positive_weights(&self) -> &[f64] {
        &self.weights
    }

    /// All nonzero offsets `(d, w(d))`, negative ones first.
    pub fn offsets(&self) -> impl Iterator<Item = (isize, f64)> + '_ {
        let neg = self.weights.iter().enumerate().rev().map(|(k, w)| (-(k as isize + 1), *w));
        let pos = self.weights.iter().enumerate().map(|(k, w)| (k as isize + 1, *w));
        neg.chain(pos)
    }

    pub fn profile(&self) -> &dyn KacProfile {
        self.profile.as_ref()
    }

    /// Continuum profile value `J(r)`.
    pub fn profile_value(&self, r: f64) -> f64 {
        self.profile.value(r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cosine_profile_values() {
        assert_eq!(CosineProfile.value(0.0), 1.0);
        assert!((CosineProfile.value(0.5) - 0.5).abs() < 1e-15);
        assert_eq!(CosineProfile.value(1.0), 0.0);
        assert_eq!(CosineProfile.value(-1.3), 0.0);
    }

    #[test]
    fn normalized_and_symmetric() {
        for gamma in [0.1, 0.15, 0.25, 0.3, 0.5, 0.6] {
            let k = KacKernel::new(gamma).unwrap();
            let total: f64 = k.offsets().map(|(_, w)| w).sum();
            assert!((total - 1.0).abs() < 1e-12, "gamma {gamma}: {total}");
            for d in 1..k.range() as isize + 3 {
                assert_eq!(k.weight(d), k.weight(-d));
                assert!(k.weight(d) >= 0.0);
            }
            assert_eq!(k.weight(k.range() as isize), 0.0);
            assert_eq!(k.weight(0), 0.0);
        }
    }

    #[test]
    fn gamma_half_is_nearest_neighbour() {
        let k = KacKernel::new(0.5).unwrap();
        assert_eq!(k.range(), 2);
        assert!((k.weight(1) - 0.5).abs() < 1e-15);
    }

    #[derive(Debug)]
    struct Epanechnikov;

    impl KacProfile for Epanechnikov {
        fn value(&self, r: f64) -> f64 {
            if r.abs() >= 1.0 {
                0.0
            } else {
                0.75 * (1.0 - r * r)
            }
        }

        fn name(&self) -> &'static str {
            "epanechnikov"
        }
    }

    #[test]
    fn alternate_profile_is_swappable() {
        let k = KacKernel::with_profile(0.2, Arc::new(Epanechnikov)).unwrap();
        let total: f64 = k.offsets().map(|(_, w)| w).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert_eq!(k.profile().name(), "epanechnikov");
        assert!(k.weight(1) > k.weight(4));
    }
}
