use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numerics::{LogSumExp, NeumaierSum};

/// Largest number of free spins accepted by exhaustive enumeration.
pub const MAX_FREE_SPINS: usize = 26;

const CHUNK_BITS: usize = 14;

/// A quadratic Ising energy on `n` free spins,
/// `E(σ) = c - Σ_{i<j} J_ij σ_i σ_j - Σ_i h_i σ_i`, weighted by `exp(-βE)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MicroSystem {
    n: usize,
    coupling: Vec<f64>,
    field: Vec<f64>,
    constant: f64,
    beta: f64,
}

/// Outcome of an exhaustive sum.
#[derive(Debug, Clone, PartialEq)]
pub struct Enumeration {
    /// `ln Z`, `-inf` when no configuration is admissible.
    pub log_z: f64,
    /// `Z` summed directly without a shift (may overflow).
    pub direct_z: f64,
    pub admissible: u64,
    pub total: u64,
    /// Gibbs means of the requested observables.
    pub means: Vec<f64>,
}

impl Enumeration {
    pub fn z(&self) -> f64 {
        self.log_z.exp()
    }

    pub fn unsatisfiable(&self) -> bool {
        self.admissible == 0
    }
}

/// Bit `j` of a configuration index set means spin `j` is `+1`.
#[inline]
pub fn spins_from_bits(bits: u64, out: &mut [i8]) {
    for (j, s) in out.iter_mut().enumerate() {
        *s = if bits >> j & 1 == 1 { 1 } else { -1 };
    }
}

impl MicroSystem {
    pub fn new(n: usize, beta: f64) -> Result<Self> {
        if n > MAX_FREE_SPINS {
            return Err(Error::VolumeTooLarge {
                free: n,
                limit: MAX_FREE_SPINS,
            });
        }
        Ok(MicroSystem {
            n,
            coupling: vec![0.0; n * n],
            field: vec![0.0; n],
            constant: 0.0,
            beta,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    pub fn field(&self, i: usize) -> f64 {
        self.field[i]
    }

    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        self.coupling[i * self.n + j]
    }

    pub fn add_coupling(&mut self, i: usize, j: usize, value: f64) {
        assert_ne!(i, j, "self-coupling is a constant");
        self.coupling[i * self.n + j] += value;
        self.coupling[j * self.n + i] += value;
    }

    pub fn add_field(&mut self, i: usize, value: f64) {
        self.field[i] += value;
    }

    pub fn add_constant(&mut self, value: f64) {
        self.constant += value;
    }

    pub fn with_beta(&self, beta: f64) -> Self {
        MicroSystem { beta, ..self.clone() }
    }

    pub fn energy(&self, s: &[i8]) -> f64 {
        let mut e = NeumaierSum::new();
        e += self.constant;
        for i in 0..self.n {
            let si = s[i] as f64;
            e += -self.field[i] * si;
            for j in i + 1..self.n {
                e += -self.coupling[i * self.n + j] * si * s[j] as f64;
            }
        }
        e.value()
    }

    /// `-βE` of every configuration, indexed by its bit pattern.
    pub fn log_weights(&self) -> Result<Vec<f64>> {
        if self.n > 22 {
            return Err(Error::VolumeTooLarge { free: self.n, limit: 22 });
        }
        let mut s = vec![0i8; self.n];
        Ok((0..1u64 << self.n)
            .map(|b| {
                spins_from_bits(b, &mut s);
                -self.beta * self.energy(&s)
            })
            .collect())
    }

    /// Exhaustive sum over configurations accepted by `accept`, with Gibbs
    /// means of `n_obs` observables written by `observe`.
    ///
    /// The index space is split into chunks with fixed high bits; each
    /// chunk starts from an exact energy and walks its low bits in Gray
    /// order. Chunk results are merged in index order.
    pub fn enumerate<A, O>(&self, accept: A, n_obs: usize, observe: O) -> Enumeration
    where
        A: Fn(&[i8]) -> bool + Sync,
        O: Fn(&[i8], &mut [f64]) + Sync,
    {
        let n = self.n;
        let low = n.min(CHUNK_BITS);
        let chunks = 1u64 << (n - low);
        let parts: Vec<(LogSumExp, NeumaierSum, u64)> = (0..chunks)
            .into_par_iter()
            .map(|c| self.enumerate_chunk(c << low, low, &accept, n_obs, &observe))
            .collect();
        let mut lse = LogSumExp::new(n_obs);
        let mut direct = NeumaierSum::new();
        let mut admissible = 0;
        for (l, d, a) in parts {
            lse.merge(&l);
            direct.merge(&d);
            admissible += a;
        }
        let means = (0..n_obs)
            .map(|j| if admissible > 0 { lse.mean(j) } else { f64::NAN })
            .collect();
        Enumeration {
            log_z: lse.log_sum(),
            direct_z: direct.value(),
            admissible,
            total: 1u64 << n,
            means,
        }
    }

    fn enumerate_chunk<A, O>(
        &self,
        base: u64,
        low: usize,
        accept: &A,
        n_obs: usize,
        observe: &O,
    ) -> (LogSumExp, NeumaierSum, u64)
    where
        A: Fn(&[i8]) -> bool,
        O: Fn(&[i8], &mut [f64]),
    {
        let n = self.n;
        let mut s = vec![0i8; n];
        spins_from_bits(base, &mut s);
        let mut energy = self.energy(&s);
        // local fields f_i = h_i + Σ_j J_ij σ_j
        let mut local: Vec<f64> = (0..n)
            .map(|i| {
                self.field[i]
                    + (0..n)
                        .map(|j| self.coupling[i * n + j] * s[j] as f64)
                        .sum::<f64>()
            })
            .collect();
        let mut lse = LogSumExp::new(n_obs);
        let mut direct = NeumaierSum::new();
        let mut obs = vec![0.0; n_obs];
        let mut admissible = 0u64;
        let steps = 1u64 << low;
        for step in 0..steps {
            if step > 0 {
                let i = step.trailing_zeros() as usize;
                let old = s[i] as f64;
                energy += 2.0 * old * local[i];
                s[i] = -s[i];
                let row = &self.coupling[i * n..(i + 1) * n];
                for (f, &j) in local.iter_mut().zip(row) {
                    *f -= 2.0 * old * j;
                }
            }
            if !accept(&s) {
                continue;
            }
            admissible += 1;
            let lw = -self.beta * energy;
            observe(&s, &mut obs);
            lse.push_with(lw, &obs);
            direct += lw.exp();
        }
        (lse, direct, admissible)
    }

    /// `ln Z` without constraint or observables.
    pub fn log_partition(&self) -> f64 {
        self.enumerate(|_| true, 0, |_, _| {}).log_z
    }
}
