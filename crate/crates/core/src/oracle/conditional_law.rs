use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::coarse::eta_from_average;
use crate::error::Result;
use crate::model::{conditional_gibbs, hamiltonian_with_epsilon, total_field, KacKernel, SpinConfig};

/// A configuration with a marked site whose ℓ- block is conditioned on
/// `η = target`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalInstance {
    pub cfg: SpinConfig,
    pub x: usize,
    pub layer: usize,
    pub ell_minus: usize,
    pub zeta: f64,
    pub m_beta: f64,
    pub beta: f64,
    pub epsilon: f64,
    pub target: i8,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum ConditionalVerdict {
    /// The window condition held; `discrepancy` is `|μ(+|σ', η) - G(+|σ')|`.
    Checked { discrepancy: f64 },
    /// The window condition failed; the discrepancy is still reported.
    Skipped { discrepancy: f64 },
}

impl ConditionalVerdict {
    pub fn discrepancy(self) -> f64 {
        match self {
            ConditionalVerdict::Checked { discrepancy } | ConditionalVerdict::Skipped { discrepancy } => discrepancy,
        }
    }

    pub fn is_checked(self) -> bool {
        matches!(self, ConditionalVerdict::Checked { .. })
    }
}

impl ConditionalInstance {
    fn block(&self) -> std::ops::Range<usize> {
        let start = self.x / self.ell_minus * self.ell_minus;
        start..start + self.ell_minus
    }

    /// Sum of the block's spins other than the marked one.
    pub fn others_sum(&self) -> i32 {
        self.block()
            .filter(|&y| y != self.x)
            .map(|y| self.cfg.get(y, self.layer) as i32)
            .sum()
    }

    /// `|(1/ℓ-) Σ_{y≠x} σ(y) - target·m_β| < ζ - 1/ℓ-`.
    pub fn window_condition(&self) -> bool {
        let n = self.ell_minus as f64;
        (self.others_sum() as f64 / n - self.target as f64 * self.m_beta).abs() < self.zeta - 1.0 / n
    }

    pub fn flipped(&self) -> Self {
        ConditionalInstance {
            cfg: self.cfg.flipped(),
            target: -self.target,
            ..self.clone()
        }
    }
}

/// Compares the conditional law of the marked spin given everything else
/// and `η = target` (from total energies) with the single-site heat-bath
/// law of its field.
pub fn check_conditional_law(inst: &ConditionalInstance, kernel: &KacKernel) -> ConditionalVerdict {
    let n = inst.ell_minus as f64;
    let rest = inst.others_sum();
    let mut log_w = [f64::NEG_INFINITY; 2];
    for (k, s) in [1i8, -1].into_iter().enumerate() {
        let eta = eta_from_average((rest + s as i32) as f64 / n, inst.m_beta, inst.zeta);
        if eta == inst.target {
            let mut cfg = inst.cfg.clone();
            cfg.set(inst.x, inst.layer, s);
            log_w[k] = -inst.beta * hamiltonian_with_epsilon(&cfg, kernel, inst.epsilon);
        }
    }
    let top = log_w[0].max(log_w[1]);
    let conditional_plus = if top == f64::NEG_INFINITY {
        f64::NAN
    } else {
        let (a, b) = ((log_w[0] - top).exp(), (log_w[1] - top).exp());
        a / (a + b)
    };
    let field = total_field(&inst.cfg, kernel, inst.epsilon, inst.x, inst.layer);
    let discrepancy = (conditional_plus - conditional_gibbs(field, inst.beta)).abs();
    if inst.window_condition() {
        ConditionalVerdict::Checked { discrepancy }
    } else {
        ConditionalVerdict::Skipped { discrepancy }
    }
}

/// Random instance; the marked block's other spins sum to `others_sum`
/// and every other spin is uniform.
pub fn conditional_instance<R: Rng + ?Sized>(
    template: &ConditionalInstance,
    others_sum: i32,
    rng: &mut R,
) -> ConditionalInstance {
    use rand::seq::SliceRandom;
    let lat = *template.cfg.lattice();
    let mut inst = template.clone();
    inst.cfg = SpinConfig::random(lat, rng);
    inst.layer = rng.gen_range(0..lat.height);
    let blocks = lat.width / inst.ell_minus;
    let start = rng.gen_range(0..blocks) * inst.ell_minus;
    inst.x = start + rng.gen_range(0..inst.ell_minus);
    let others = inst.ell_minus as i32 - 1;
    let plus = ((others + others_sum) / 2) as usize;
    let mut spins: Vec<i8> = (0..others as usize).map(|i| if i < plus { 1 } else { -1 }).collect();
    spins.shuffle(rng);
    let mut it = spins.into_iter();
    for y in start..start + inst.ell_minus {
        if y != inst.x {
            inst.cfg.set(y, inst.layer, it.next().unwrap());
        }
    }
    inst.cfg.set(inst.x, inst.layer, if rng.gen() { 1 } else { -1 });
    inst
}

/// Sums of the other spins that satisfy the window condition for `η = +1`.
pub fn satisfying_sums(template: &ConditionalInstance) -> Vec<i32> {
    let others = template.ell_minus as i32 - 1;
    let n = template.ell_minus as f64;
    (-others..=others)
        .step_by(2)
        .filter(|&s| (s as f64 / n - template.m_beta).abs() < template.zeta - 1.0 / n)
        .collect()
}

/// Sums for which exactly one value of the marked spin gives `η = +1`.
pub fn splitting_sums(template: &ConditionalInstance) -> Vec<i32> {
    let others = template.ell_minus as i32 - 1;
    let n = template.ell_minus as f64;
    let eta = |s: i32| eta_from_average(s as f64 / n, template.m_beta, template.zeta);
    (-others..=others)
        .step_by(2)
        .filter(|&s| (eta(s + 1) == 1) != (eta(s - 1) == 1))
        .collect()
}

pub fn run_conditional_law<R: Rng + ?Sized>(
    template: &ConditionalInstance,
    kernel: &KacKernel,
    instances: usize,
    rng: &mut R,
) -> Result<Vec<ConditionalVerdict>> {
    let sums = satisfying_sums(template);
    if sums.is_empty() {
        return Err(crate::error::Error::Infeasible("no block sum satisfies the window condition".into()));
    }
    Ok((0..instances)
        .map(|_| {
            let s = sums[rng.gen_range(0..sums.len())];
            check_conditional_law(&conditional_instance(template, s, rng), kernel)
        })
        .collect())
}
