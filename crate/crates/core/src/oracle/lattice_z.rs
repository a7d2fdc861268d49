use serde::{Deserialize, Serialize};

use super::constraint::{CompiledConstraint, ConstraintSpec};
use super::micro::{Enumeration, MicroSystem};
use crate::error::{Error, Result};
use crate::model::{hamiltonian_with_epsilon, HorizontalBc, KacKernel, Lattice, SpinConfig};
use crate::numerics::LogSumExp;

/// A lattice volume with some sites free and the rest held at `boundary`.
#[derive(Debug, Clone)]
pub struct LatticeSystem {
    pub kernel: KacKernel,
    pub beta: f64,
    pub epsilon: f64,
    /// Vertical coupling between two free sites; `None` means `epsilon`.
    pub inner_epsilon: Option<f64>,
    pub boundary: SpinConfig,
    /// Site indices of the free spins, in enumeration order.
    pub free: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZResult {
    pub log_z: f64,
    pub z: f64,
    pub direct_z: f64,
    pub admissible: u64,
    pub total: u64,
    pub unsatisfiable: bool,
    pub means: Vec<f64>,
}

impl From<Enumeration> for ZResult {
    fn from(e: Enumeration) -> Self {
        ZResult {
            log_z: e.log_z,
            z: e.z(),
            direct_z: e.direct_z,
            admissible: e.admissible,
            total: e.total,
            unsatisfiable: e.unsatisfiable(),
            means: e.means,
        }
    }
}

impl LatticeSystem {
    /// Every site free.
    pub fn all_free(lattice: Lattice, kernel: KacKernel, beta: f64, epsilon: f64) -> Self {
        LatticeSystem {
            kernel,
            beta,
            epsilon,
            inner_epsilon: None,
            boundary: SpinConfig::uniform(lattice, 1),
            free: (0..lattice.sites()).collect(),
        }
    }

    /// Sites `(x, layer)` free, the rest fixed to `boundary`.
    pub fn with_free_sites(
        boundary: SpinConfig,
        kernel: KacKernel,
        beta: f64,
        epsilon: f64,
        sites: impl IntoIterator<Item = (usize, usize)>,
    ) -> Self {
        let lat = *boundary.lattice();
        let mut free: Vec<usize> = sites.into_iter().map(|(x, l)| lat.index(x, l)).collect();
        free.sort_unstable();
        free.dedup();
        LatticeSystem {
            kernel,
            beta,
            epsilon,
            inner_epsilon: None,
            boundary,
            free,
        }
    }

    pub fn lattice(&self) -> &Lattice {
        self.boundary.lattice()
    }

    pub fn flipped(&self) -> Self {
        LatticeSystem {
            boundary: self.boundary.flipped(),
            ..self.clone()
        }
    }

    fn quadratic_form(&self, inner_eps: f64) -> Result<MicroSystem> {
        let lat = *self.lattice();
        let mut slot = vec![None; lat.sites()];
        for (k, &i) in self.free.iter().enumerate() {
            slot[i] = Some(k);
        }
        let mut m = MicroSystem::new(self.free.len(), self.beta)?;
        let w = lat.width as isize;
        let h = lat.height as isize;
        let spins = self.boundary.spins();
        for (k, &i) in self.free.iter().enumerate() {
            let (x, layer) = lat.coords(i);
            for (d, wt) in self.kernel.offsets() {
                let y = x as isize + d;
                let y = match lat.horizontal {
                    HorizontalBc::Periodic => y.rem_euclid(w),
                    _ if (0..w).contains(&y) => y,
                    _ => {
                        m.add_field(k, wt * lat.margin_spin(layer).unwrap() as f64);
                        continue;
                    }
                };
                let j = lat.index(y as usize, layer);
                match slot[j] {
                    Some(kj) => m.add_coupling(k, kj, 0.5 * wt),
                    None => m.add_field(k, wt * spins[j] as f64),
                }
            }
            for up in [true, false] {
                let l = layer as isize + if up { 1 } else { -1 };
                let l = if (0..h).contains(&l) {
                    l as usize
                } else if let Some(s) = lat.vertical.frozen_layer(l >= h) {
                    m.add_field(k, self.epsilon * s as f64);
                    continue;
                } else {
                    l.rem_euclid(h) as usize
                };
                let j = lat.index(x, l);
                match slot[j] {
                    Some(kj) if up => m.add_coupling(k, kj, inner_eps),
                    Some(_) => {}
                    None => m.add_field(k, self.epsilon * spins[j] as f64),
                }
            }
        }
        Ok(m)
    }

    /// The energy of the free spins as a quadratic form, including the
    /// constant from fixed-fixed bonds.
    pub fn micro(&self) -> Result<MicroSystem> {
        let inner = self.inner_epsilon.unwrap_or(self.epsilon);
        let mut m = self.quadratic_form(inner)?;
        let reference = self.quadratic_form(self.epsilon)?;
        let mut cfg = self.boundary.clone();
        for &i in &self.free {
            cfg.set_index(i, 1);
        }
        let ones = vec![1i8; self.free.len()];
        m.add_constant(hamiltonian_with_epsilon(&cfg, &self.kernel, self.epsilon) - reference.energy(&ones));
        Ok(m)
    }

    /// Full configuration for given free spins.
    pub fn config(&self, free_spins: &[i8]) -> SpinConfig {
        let mut cfg = self.boundary.clone();
        for (&i, &s) in self.free.iter().zip(free_spins) {
            cfg.set_index(i, s);
        }
        cfg
    }
}

/// Exact constrained partition function `Σ exp(-βH)` over the free spins.
pub fn enumerate_z(system: &LatticeSystem, constraint: &ConstraintSpec) -> Result<ZResult> {
    enumerate_with(system, constraint, 0, |_, _| {})
}

/// As [`enumerate_z`], with Gibbs means of observables of the free spins.
pub fn enumerate_with<O>(system: &LatticeSystem, constraint: &ConstraintSpec, n_obs: usize, observe: O) -> Result<ZResult>
where
    O: Fn(&[i8], &mut [f64]) + Sync,
{
    let micro = system.micro()?;
    let compiled = CompiledConstraint::compile(constraint, system.lattice(), system.boundary.spins(), &system.free)?;
    Ok(micro.enumerate(|s| compiled.accepts(s), n_obs, observe).into())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContourWeight {
    pub weight: f64,
    pub log_numerator: f64,
    pub log_denominator: f64,
}

/// `Z(numerator) / Z(denominator)` on the same volume.
pub fn contour_weight(
    system: &LatticeSystem,
    numerator: &ConstraintSpec,
    denominator: &ConstraintSpec,
) -> Result<ContourWeight> {
    let num = enumerate_z(system, numerator)?;
    let den = enumerate_z(system, denominator)?;
    if den.unsatisfiable {
        return Err(Error::Numerical("contour weight denominator is zero".into()));
    }
    let log_w = num.log_z - den.log_z;
    Ok(ContourWeight {
        weight: log_w.exp(),
        log_numerator: num.log_z,
        log_denominator: den.log_z,
    })
}

const MAX_TRANSFER_STATES: usize = 1 << 16;

/// `ln Z` with every site free, computed by a transfer matrix along the
/// layers whose state is the last `range - 1` columns.
pub fn transfer_matrix_log_z(lattice: &Lattice, kernel: &KacKernel, beta: f64, epsilon: f64) -> Result<f64> {
    let (w, h) = (lattice.width, lattice.height);
    let window = kernel.max_offset();
    let states = 1usize
        .checked_shl((h * window) as u32)
        .filter(|&s| s <= MAX_TRANSFER_STATES)
        .ok_or(Error::VolumeTooLarge {
            free: h * window,
            limit: 16,
        })?;
    let columns = 1usize << h;
    let spin = |c: usize, l: usize| if c >> l & 1 == 1 { 1.0 } else { -1.0 };
    let overlap = |a: usize, b: usize| h as f64 - 2.0 * (a ^ b).count_ones() as f64;
    let vertical: Vec<f64> = (0..columns)
        .map(|c| {
            let mut v = 0.0;
            for l in 0..h.saturating_sub(1) {
                v += spin(c, l) * spin(c, l + 1);
            }
            match (lattice.vertical.frozen_layer(true), lattice.vertical.frozen_layer(false)) {
                (Some(top), Some(bottom)) => v += spin(c, h - 1) * top as f64 + spin(c, 0) * bottom as f64,
                _ if h >= 2 => v += spin(c, h - 1) * spin(c, 0),
                _ => {}
            }
            v
        })
        .collect();
    let weights = kernel.positive_weights();
    let periodic = lattice.horizontal == HorizontalBc::Periodic;
    // column field from the frozen horizontal margins
    let margin: Vec<Vec<f64>> = (0..w)
        .map(|x| {
            (0..h)
                .map(|l| match lattice.margin_spin(l) {
                    None => 0.0,
                    Some(s) => {
                        let reach: f64 = (1..=window)
                            .filter(|&d| x < d || x + d >= w)
                            .map(|d| weights[d - 1] * if x < d && x + d >= w { 2.0 } else { 1.0 })
                            .sum();
                        reach * s as f64
                    }
                })
                .collect()
        })
        .collect();
    let mask = states - 1;
    let step = |x: usize, v: &[f64], counted: usize| -> (Vec<f64>, f64) {
        let mut out = vec![0.0; states];
        for (s, &vs) in v.iter().enumerate() {
            if vs == 0.0 {
                continue;
            }
            for c in 0..columns {
                let mut e = epsilon * vertical[c];
                for k in 1..=counted {
                    e += weights[k - 1] * overlap(c, s >> (h * (k - 1)) & (columns - 1));
                }
                for (l, hm) in margin[x].iter().enumerate() {
                    e += hm * spin(c, l);
                }
                let next = ((s << h) | c) & mask;
                out[next] += vs * (beta * e).exp();
            }
        }
        let scale = out.iter().cloned().fold(0.0, f64::max);
        if scale > 0.0 {
            out.iter_mut().for_each(|o| *o /= scale);
        }
        (out, scale.ln())
    };
    if periodic {
        let mut total = LogSumExp::new(0);
        for s0 in 0..states {
            let mut v = vec![0.0; states];
            v[s0] = 1.0;
            let mut log_scale = 0.0;
            for x in 0..w {
                let (nv, ls) = step(x, &v, window);
                v = nv;
                log_scale += ls;
            }
            if v[s0] > 0.0 {
                total.push(log_scale + v[s0].ln());
            }
        }
        Ok(total.log_sum())
    } else {
        let mut v = vec![0.0; states];
        v[0] = 1.0;
        let mut log_scale = 0.0;
        for x in 0..w {
            let (nv, ls) = step(x, &v, window.min(x));
            v = nv;
            log_scale += ls;
        }
        Ok(log_scale + v.iter().sum::<f64>().ln())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::VerticalBc;

    fn check(w: usize, h: usize, gamma: f64, beta: f64, eps: f64, hbc: HorizontalBc, vbc: VerticalBc) {
        let kernel = KacKernel::new(gamma).unwrap();
        let lat = Lattice::new(w, h, hbc, vbc, kernel.range()).unwrap();
        let sys = LatticeSystem::all_free(lat, kernel.clone(), beta, eps);
        let e = enumerate_z(&sys, &ConstraintSpec::none()).unwrap();
        let t = transfer_matrix_log_z(&lat, &kernel, beta, eps).unwrap();
        let rel = ((e.log_z - t).exp() - 1.0).abs();
        assert!(rel < 1e-10, "{w}x{h} {hbc:?} {vbc:?}: {} vs {t}", e.log_z);
    }

    #[test]
    fn four_by_two_matches_transfer_matrix() {
        check(4, 2, 0.5, 1.0, 0.25, HorizontalBc::Periodic, VerticalBc::Plus);
        check(4, 2, 0.5, 1.0, 0.25, HorizontalBc::Plus, VerticalBc::Periodic);
        check(4, 2, 0.5, 1.0, 0.25, HorizontalBc::Minus, VerticalBc::MixedDobrushin);
    }

    #[test]
    fn single_spin_all_fixed_around() {
        // one free spin, zero external field: Z = 2 for β·field = 0
        let kernel = KacKernel::new(0.5).unwrap();
        let lat = Lattice::new(3, 1, HorizontalBc::Periodic, VerticalBc::Plus, kernel.range()).unwrap();
        let boundary = SpinConfig::from_spins(lat, vec![1, 1, -1]).unwrap();
        let sys = LatticeSystem::with_free_sites(boundary, kernel, 1.0, 0.0, [(1, 0)]);
        let m = sys.micro().unwrap();
        assert!(m.field(0).abs() < 1e-15);
    }

    #[test]
    fn micro_energy_matches_hamiltonian() {
        use rand::SeedableRng;
        let kernel = KacKernel::new(0.3).unwrap();
        let lat = Lattice::new(10, 3, HorizontalBc::Plus, VerticalBc::MixedDobrushinInverted, kernel.range()).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let boundary = SpinConfig::random(lat, &mut rng);
        let sites = [(0, 0), (1, 1), (2, 1), (9, 2), (5, 1), (5, 2)];
        let sys = LatticeSystem::with_free_sites(boundary, kernel.clone(), 1.0, 0.09, sites);
        let m = sys.micro().unwrap();
        let mut s = vec![0i8; sites.len()];
        for bits in 0..64u64 {
            super::super::micro::spins_from_bits(bits, &mut s);
            let direct = hamiltonian_with_epsilon(&sys.config(&s), &kernel, 0.09);
            assert!((m.energy(&s) - direct).abs() < 1e-12);
        }
    }
}
