use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::micro::MicroSystem;
use crate::error::{Error, Result};
use crate::model::{CosineProfile, KacProfile};

/// One ℓ- block in layer 0 with its frozen surroundings: the lateral
/// blocks of the same layer and the spins directly above and below.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockInstance {
    pub beta: f64,
    pub gamma: f64,
    pub alpha: f64,
    pub epsilon: f64,
    pub zeta: f64,
    pub m_beta: f64,
    pub ell_minus: usize,
    /// `(k, spins)` for lateral blocks `k != 0`.
    pub lateral: Vec<(isize, Vec<i8>)>,
    pub above: Vec<i8>,
    pub below: Vec<i8>,
}

/// Parameters for drawing random block instances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockFamily {
    pub beta: f64,
    pub gamma: f64,
    pub alpha: f64,
    pub epsilon: f64,
    pub zeta: f64,
    pub m_beta: f64,
    pub ell_minus: usize,
}

impl BlockFamily {
    /// A random instance whose surrounding blocks all have `η = +1`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<BlockInstance> {
        let n = self.ell_minus;
        let reach = (1.0 / self.gamma).ceil() as usize;
        let blocks = reach.div_ceil(n) as isize;
        let draw = |rng: &mut R| self.plus_block(rng);
        let mut lateral = Vec::new();
        for k in (-blocks..=blocks).filter(|&k| k != 0) {
            lateral.push((k, draw(rng)?));
        }
        let above = draw(rng)?;
        let below = draw(rng)?;
        Ok(BlockInstance {
            beta: self.beta,
            gamma: self.gamma,
            alpha: self.alpha,
            epsilon: self.epsilon,
            zeta: self.zeta,
            m_beta: self.m_beta,
            ell_minus: n,
            lateral,
            above,
            below,
        })
    }

    fn plus_block<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vec<i8>> {
        let n = self.ell_minus;
        let counts: Vec<usize> = (0..=n)
            .filter(|&minus| {
                let avg = (n as f64 - 2.0 * minus as f64) / n as f64;
                (avg - self.m_beta).abs() <= self.zeta
            })
            .collect();
        let minus = *counts
            .choose(rng)
            .ok_or_else(|| Error::Infeasible(format!("no ℓ- = {n} block average within ζ of m_β")))?;
        let mut spins: Vec<i8> = (0..n).map(|i| if i < minus { -1 } else { 1 }).collect();
        spins.shuffle(rng);
        Ok(spins)
    }
}

impl BlockInstance {
    pub fn len(&self) -> usize {
        self.ell_minus
    }

    pub fn is_empty(&self) -> bool {
        self.ell_minus == 0
    }

    fn j(&self, d: isize) -> f64 {
        CosineProfile.value(self.gamma * d as f64)
    }

    /// External field `h_y` from the lateral blocks and vertical neighbours.
    pub fn fields(&self) -> Vec<f64> {
        let n = self.ell_minus as isize;
        let ga = self.gamma.powf(self.alpha);
        (0..n)
            .map(|y| {
                let mut h = 0.0;
                for (k, spins) in &self.lateral {
                    let avg: f64 = spins
                        .iter()
                        .enumerate()
                        .map(|(j, &s)| self.j(k * n + j as isize - y) * s as f64)
                        .sum::<f64>()
                        / n as f64;
                    h += ga * avg;
                }
                h + self.epsilon * (self.above[y as usize] + self.below[y as usize]) as f64
            })
            .collect()
    }

    /// Smallest `κ >= 0` with `|h_y - m_β| <= ζ + κ γ^α` for every `y`.
    pub fn kappa(&self) -> f64 {
        let ga = self.gamma.powf(self.alpha);
        self.fields()
            .iter()
            .map(|h| ((h - self.m_beta).abs() - self.zeta) / ga)
            .fold(0.0, f64::max)
    }

    /// The block Hamiltonian: in-block pair term plus boundary field.
    pub fn system(&self) -> Result<MicroSystem> {
        let n = self.ell_minus;
        let c = self.gamma.powf(self.alpha) / n as f64;
        let mut m = MicroSystem::new(n, self.beta)?;
        for y in 0..n {
            for z in y + 1..n {
                m.add_coupling(y, z, 2.0 * c * self.j(z as isize - y as isize));
            }
        }
        m.add_constant(-c * n as f64 * self.j(0));
        for (y, h) in self.fields().into_iter().enumerate() {
            m.add_field(y, h);
        }
        Ok(m)
    }

    /// Uniform comparison field `m_β ± [ζ + (M + κ) γ^α]`.
    pub fn comparison_field(&self, big_m: f64, upper: bool) -> f64 {
        let shift = self.zeta + (big_m + self.kappa()) * self.gamma.powf(self.alpha);
        if upper {
            self.m_beta + shift
        } else {
            self.m_beta - shift
        }
    }

    /// Independent spins in the comparison field.
    pub fn product_system(&self, big_m: f64, upper: bool) -> Result<MicroSystem> {
        let mut m = MicroSystem::new(self.ell_minus, self.beta)?;
        let h = self.comparison_field(big_m, upper);
        for y in 0..self.ell_minus {
            m.add_field(y, h);
        }
        Ok(m)
    }

    pub fn flipped(&self) -> Self {
        let neg = |v: &Vec<i8>| v.iter().map(|s| -s).collect::<Vec<i8>>();
        BlockInstance {
            lateral: self.lateral.iter().map(|(k, v)| (*k, neg(v))).collect(),
            above: neg(&self.above),
            below: neg(&self.below),
            ..self.clone()
        }
    }
}

fn energies(m: &MicroSystem) -> Result<Vec<f64>> {
    let beta = m.beta();
    Ok(m.log_weights()?.into_iter().map(|lw| -lw / beta).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolleyReport {
    pub big_m: f64,
    pub kappa: f64,
    pub pairs: u64,
    pub upper_violations: u64,
    pub lower_violations: u64,
    /// Smallest `LHS - RHS` over all pairs.
    pub upper_min_margin: f64,
    pub lower_min_margin: f64,
}

impl HolleyReport {
    pub fn holds(&self) -> bool {
        self.upper_violations == 0 && self.lower_violations == 0
    }
}

const SLACK: f64 = 1e-12;

/// Holley's lattice condition for `μ ≤ μ+` and `μ- ≤ μ` at one pair,
/// with configurations given as bit patterns (bit set = spin `+1`).
/// Returns the two margins `LHS - RHS`.
pub fn holley_margins(h: &[f64], hp: &[f64], hm: &[f64], sigma: usize, tau: usize) -> (f64, f64) {
    let (meet, join) = (sigma & tau, sigma | tau);
    let upper = (-h[meet] - hp[join]) - (-h[sigma] - hp[tau]);
    let lower = (-hm[meet] - h[join]) - (-hm[sigma] - h[tau]);
    (upper, lower)
}

/// Exhaustive check over all ordered pairs of block configurations.
pub fn check_holley(inst: &BlockInstance, big_m: f64) -> Result<HolleyReport> {
    if inst.len() > 12 {
        return Err(Error::VolumeTooLarge {
            free: inst.len(),
            limit: 12,
        });
    }
    let h = energies(&inst.system()?)?;
    let hp = energies(&inst.product_system(big_m, true)?)?;
    let hm = energies(&inst.product_system(big_m, false)?)?;
    let n = h.len();
    let mut report = HolleyReport {
        big_m,
        kappa: inst.kappa(),
        pairs: (n * n) as u64,
        upper_violations: 0,
        lower_violations: 0,
        upper_min_margin: f64::INFINITY,
        lower_min_margin: f64::INFINITY,
    };
    for sigma in 0..n {
        for tau in 0..n {
            let (u, l) = holley_margins(&h, &hp, &hm, sigma, tau);
            report.upper_min_margin = report.upper_min_margin.min(u);
            report.lower_min_margin = report.lower_min_margin.min(l);
            report.upper_violations += (u < -SLACK) as u64;
            report.lower_violations += (l < -SLACK) as u64;
        }
    }
    Ok(report)
}

fn probabilities(m: &MicroSystem) -> Result<Vec<f64>> {
    let lw = m.log_weights()?;
    let shift = lw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = lw.iter().map(|l| (l - shift).exp()).collect();
    let z: f64 = w.iter().sum();
    Ok(w.into_iter().map(|v| v / z).collect())
}

/// Subsets of the block whose spin sums define the threshold events.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EventFamily {
    /// All nonempty subsets.
    AllSubsets,
    /// Contiguous windows plus `extra` random subsets.
    Windows { extra: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FkgReport {
    pub big_m: f64,
    pub events: u64,
    pub violations: u64,
    /// `min(μ(E) - μ-(E))` and `min(μ+(E) - μ(E))` over the events.
    pub lower_min_gap: f64,
    pub upper_min_gap: f64,
    /// The complementary decreasing events satisfy the reversed order.
    pub complements_hold: bool,
}

impl FkgReport {
    pub fn holds(&self) -> bool {
        self.violations == 0 && self.complements_hold
    }
}

/// `μ-(E) <= μ(E | σ') <= μ+(E)` for threshold events
/// `E = {Σ_{y∈S} σ_y >= t}`, all three measures enumerated exactly.
pub fn check_fkg_sandwich(inst: &BlockInstance, big_m: f64, family: EventFamily) -> Result<FkgReport> {
    let n = inst.len();
    if n > 16 {
        return Err(Error::VolumeTooLarge { free: n, limit: 16 });
    }
    let mu = probabilities(&inst.system()?)?;
    let plus = probabilities(&inst.product_system(big_m, true)?)?;
    let minus = probabilities(&inst.product_system(big_m, false)?)?;
    let subsets: Vec<u32> = match family {
        EventFamily::AllSubsets => (1..1u32 << n).collect(),
        EventFamily::Windows { extra, seed } => {
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut v: Vec<u32> = Vec::new();
            for a in 0..n {
                for b in a + 1..=n {
                    v.push(((1u32 << b) - 1) & !((1u32 << a) - 1));
                }
            }
            for _ in 0..extra {
                let s = rng.gen_range(1..1u32 << n);
                v.push(s);
            }
            v
        }
    };
    let mut report = FkgReport {
        big_m,
        events: 0,
        violations: 0,
        lower_min_gap: f64::INFINITY,
        upper_min_gap: f64::INFINITY,
        complements_hold: true,
    };
    for subset in subsets {
        let size = subset.count_ones() as usize;
        // distribution of the number of + spins in the subset
        let mut dist = [vec![0.0; size + 1], vec![0.0; size + 1], vec![0.0; size + 1]];
        for c in 0..mu.len() {
            let k = (c as u32 & subset).count_ones() as usize;
            dist[0][k] += minus[c];
            dist[1][k] += mu[c];
            dist[2][k] += plus[c];
        }
        // E_t = {at least t plus spins}, t = 0 is the whole space
        let mut tail = [0.0f64; 3];
        for t in (0..=size).rev() {
            for m in 0..3 {
                tail[m] += dist[m][t];
            }
            report.events += 1;
            let lo = tail[1] - tail[0];
            let hi = tail[2] - tail[1];
            report.lower_min_gap = report.lower_min_gap.min(lo);
            report.upper_min_gap = report.upper_min_gap.min(hi);
            if lo < -SLACK || hi < -SLACK {
                report.violations += 1;
            }
            let comp = tail.map(|p| 1.0 - p);
            if comp[0] < comp[1] - SLACK || comp[1] < comp[2] - SLACK {
                report.complements_hold = false;
            }
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationRow {
    pub b: f64,
    /// `P(|σ^(ℓ-) - m_β| > bζ | σ', η = 1)`.
    pub tail: f64,
    /// Largest `c_b` with `tail <= exp(-c_b ℓ- ζ²)`; `None` when the tail
    /// is zero (every `c_b` works).
    pub feasible_c_b: Option<f64>,
    /// Whether the bound holds for each entry of the `c_b` grid.
    pub bound_holds: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationReport {
    pub c_grid: Vec<f64>,
    pub rows: Vec<DeviationRow>,
    pub monotone: bool,
}

impl DeviationReport {
    pub fn all_nonzero(&self) -> bool {
        self.rows.iter().all(|r| r.tail > 0.0)
    }

    pub fn all_feasible(&self) -> bool {
        self.rows.iter().all(|r| r.feasible_c_b.is_none_or(|c| c > 0.0))
    }
}

/// Exact deviation tails of the block average under the Gibbs measure
/// conditioned on the block itself having `η = +1`.
pub fn check_deviation_bound(inst: &BlockInstance, b_grid: &[f64], c_grid: &[f64]) -> Result<DeviationReport> {
    let n = inst.len();
    let probs = probabilities(&inst.system()?)?;
    let dev: Vec<f64> = (0..probs.len())
        .map(|c| ((2.0 * (c as u32).count_ones() as f64 - n as f64) / n as f64 - inst.m_beta).abs())
        .collect();
    let window: f64 = probs
        .iter()
        .zip(&dev)
        .filter(|(_, &d)| d <= inst.zeta)
        .map(|(p, _)| p)
        .sum();
    if window <= 0.0 {
        return Err(Error::Infeasible("the conditioning event η = 1 has probability 0".into()));
    }
    let scale = n as f64 * inst.zeta * inst.zeta;
    let rows: Vec<DeviationRow> = b_grid
        .iter()
        .map(|&b| {
            let tail = probs
                .iter()
                .zip(&dev)
                .filter(|(_, &d)| d <= inst.zeta && d > b * inst.zeta)
                .map(|(p, _)| p)
                .sum::<f64>()
                / window;
            let tail = tail.min(1.0);
            DeviationRow {
                b,
                tail,
                feasible_c_b: (tail > 0.0).then(|| -tail.ln() / scale),
                bound_holds: c_grid.iter().map(|c| tail <= (-c * scale).exp() * (1.0 + 1e-12)).collect(),
            }
        })
        .collect();
    let mut sorted: Vec<&DeviationRow> = rows.iter().collect();
    sorted.sort_by(|a, b| a.b.total_cmp(&b.b));
    let monotone = sorted.windows(2).all(|w| w[1].tail <= w[0].tail + 1e-15);
    Ok(DeviationReport {
        c_grid: c_grid.to_vec(),
        rows,
        monotone,
    })
}
