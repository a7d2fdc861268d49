//! Closed-form Peierls inequalities and the numerical search for `γ₀`.
//!
//! Everything is evaluated in log space.

use serde::{Deserialize, Serialize};

use crate::coarse::ContourStats;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundExponents {
    pub alpha: f64,
    pub a: f64,
    #[serde(rename = "A")]
    pub vertical: f64,
}

impl BoundExponents {
    pub fn new(alpha: f64, a: f64, vertical: f64) -> Result<Self> {
        if !(a > 0.0 && a < alpha && alpha < 1.0) {
            return Err(Error::invalid("alpha", format!("need 0 < a < alpha < 1, got a = {a}, alpha = {alpha}")));
        }
        if !(vertical > 0.0) {
            return Err(Error::invalid("A", format!("must be > 0, got {vertical}")));
        }
        Ok(BoundExponents { alpha, a, vertical })
    }

    /// `γ^{-1+α+2a}`.
    pub fn block_scale(&self, gamma: f64) -> f64 {
        gamma.powf(-1.0 + self.alpha + 2.0 * self.a)
    }

    /// `ℓ+/ℓ- = γ^{-2α}`, unrounded.
    pub fn blocks_per_contour_block(&self, gamma: f64) -> f64 {
        gamma.powf(-2.0 * self.alpha)
    }
}

/// The named constants of the Peierls argument. `c` and `c_tilde` drive
/// the inequalities; the others are carried through reports.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundConstants {
    pub c: f64,
    pub c_tilde: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_star: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none", rename = "M")]
    pub big_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none", rename = "K")]
    pub big_k: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psi: Option<f64>,
}

impl BoundConstants {
    pub fn new(c: f64, c_tilde: f64) -> Self {
        BoundConstants { c, c_tilde, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0) {
            return Err(Error::invalid("c", format!("must be > 0, got {}", self.c)));
        }
        if !(self.c_tilde > 0.0 && self.c_tilde < self.c / 4.0) {
            return Err(Error::invalid(
                "c_tilde",
                format!("need 0 < c_tilde < c/4 = {}, got {}", self.c / 4.0, self.c_tilde),
            ));
        }
        Ok(())
    }
}

/// `ln` of `exp(-c(N₀ γ^{-1+α+2a} + γ^A S))`.
pub fn log_weight_bound(stats: &ContourStats, gamma: f64, exps: &BoundExponents, c: f64) -> f64 {
    -c * exposure(stats, gamma, exps)
}

pub fn weight_bound(stats: &ContourStats, gamma: f64, exps: &BoundExponents, c: f64) -> f64 {
    log_weight_bound(stats, gamma, exps, c).exp()
}

fn exposure(stats: &ContourStats, gamma: f64, exps: &BoundExponents) -> f64 {
    stats.n0 as f64 * exps.block_scale(gamma) + gamma.powf(exps.vertical) * stats.s_total as f64
}

/// Largest `c` with `weight <= weight_bound(c)`; `None` when the contour
/// has zero exposure or the weight is not below 1.
pub fn largest_feasible_c(weight: f64, stats: &ContourStats, gamma: f64, exps: &BoundExponents) -> Option<f64> {
    let e = exposure(stats, gamma, exps);
    (e > 0.0 && weight > 0.0 && weight < 1.0).then(|| -weight.ln() / e)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeierlsVerdict {
    pub gamma: f64,
    pub log_psi: f64,
    /// `ln(ψ/2) - ln((1+ψ)^8 e^{-(c/2)X} 3^{ℓ+/ℓ-})`.
    pub tree_margin: f64,
    /// Same for the stripe series; `None` when it diverges.
    pub stripe_margin: Option<f64>,
    /// `(ℓ+/ℓ-) ln 3` exceeds `(c/2) X`: the η-counting factor dominates.
    pub counting_dominates: bool,
    pub passes: bool,
}

impl PeierlsVerdict {
    pub fn diverges(&self) -> bool {
        self.stripe_margin.is_none()
    }
}

fn ln_1p_exp(log_x: f64) -> f64 {
    log_x.exp().ln_1p()
}

/// Evaluates both summability inequalities at `gamma`.
pub fn peierls_sum_check(gamma: f64, exps: &BoundExponents, consts: &BoundConstants) -> Result<PeierlsVerdict> {
    consts.validate()?;
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::invalid("gamma", format!("must lie in (0, 1], got {gamma}")));
    }
    let x = exps.block_scale(gamma);
    let log_psi = -consts.c_tilde * x;
    let l1psi = ln_1p_exp(log_psi);
    let rhs = log_psi - std::f64::consts::LN_2;

    let counting = exps.blocks_per_contour_block(gamma) * 3f64.ln();
    let tree_lhs = 8.0 * l1psi - 0.5 * consts.c * x + counting;
    let tree_margin = rhs - tree_lhs;

    let stripe_margin = log_stripe_sum(gamma, exps, consts.c, log_psi).map(|lhs| rhs - lhs);
    Ok(PeierlsVerdict {
        gamma,
        log_psi,
        tree_margin,
        stripe_margin,
        counting_dominates: counting > 0.5 * consts.c * x,
        passes: tree_margin > 0.0 && stripe_margin.is_some_and(|m| m > 0.0),
    })
}

/// `ln Σ_{n≥1} 4n(1+ψ)^{2n+8} e^{-ncγ^A} e^{-(c/4)X}` via `Σ n qⁿ = q/(1-q)²`.
pub fn log_stripe_sum(gamma: f64, exps: &BoundExponents, c: f64, log_psi: f64) -> Option<f64> {
    let l1psi = ln_1p_exp(log_psi);
    let log_q = 2.0 * l1psi - c * gamma.powf(exps.vertical);
    if log_q >= 0.0 {
        return None;
    }
    let log_one_minus_q = (-log_q.exp_m1()).ln();
    Some(4f64.ln() + 8.0 * l1psi + log_q - 2.0 * log_one_minus_q - 0.25 * c * exps.block_scale(gamma))
}

/// Truncated partial sum of the same series, for cross-checking.
pub fn log_stripe_partial_sum(gamma: f64, exps: &BoundExponents, c: f64, log_psi: f64, terms: usize) -> f64 {
    let l1psi = ln_1p_exp(log_psi);
    let log_q = 2.0 * l1psi - c * gamma.powf(exps.vertical);
    let logs: Vec<f64> = (1..=terms).map(|n| (n as f64).ln() + n as f64 * log_q).collect();
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let s: f64 = logs.iter().map(|l| (l - top).exp()).sum();
    4f64.ln() + 8.0 * l1psi + top + s.ln() - 0.25 * c * exps.block_scale(gamma)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gamma0Report {
    pub gamma0: f64,
    /// `(γ, passes)` on the ascending log grid.
    pub scan: Vec<(f64, bool)>,
    /// Grid points above `γ₀` that pass again.
    pub monotonicity_violations: Vec<f64>,
}

/// Largest `γ` in `[lo, hi]` where the check passes and passes at every
/// smaller grid point; `points` log-spaced grid values, then bisection.
pub fn find_gamma0(exps: &BoundExponents, consts: &BoundConstants, lo: f64, hi: f64, points: usize) -> Result<Gamma0Report> {
    if !(lo > 0.0 && lo < hi && hi <= 1.0 && points >= 2) {
        return Err(Error::invalid("range", format!("need 0 < lo < hi <= 1 and at least 2 points, got [{lo}, {hi}] with {points}")));
    }
    let (llo, lhi) = (lo.ln(), hi.ln());
    let grid: Vec<f64> = (0..points)
        .map(|i| (llo + (lhi - llo) * i as f64 / (points - 1) as f64).exp())
        .collect();
    let mut scan = Vec::with_capacity(points);
    for &g in &grid {
        scan.push((g, peierls_sum_check(g, exps, consts)?.passes));
    }
    let first_fail = scan.iter().position(|(_, p)| !p);
    let gamma0 = match first_fail {
        Some(0) => return Err(Error::Infeasible(format!("no γ₀ found in [{lo}, {hi}]"))),
        None => hi,
        Some(k) => {
            let (mut a, mut b) = (grid[k - 1].ln(), grid[k].ln());
            for _ in 0..100 {
                let mid = 0.5 * (a + b);
                if peierls_sum_check(mid.exp(), exps, consts)?.passes {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            a.exp()
        }
    };
    let monotonicity_violations = match first_fail {
        Some(k) => scan[k..].iter().filter(|(_, p)| *p).map(|(g, _)| *g).collect(),
        None => Vec::new(),
    };
    Ok(Gamma0Report { gamma0, scan, monotonicity_violations })
}
