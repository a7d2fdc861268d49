use serde::{Deserialize, Serialize};

use super::entropy::fbeta;
use super::minimize::{minimize, MinimizeOptions, Minimum};
use super::problem::{FunctionalGrid, LayerCells, Objective, Problem, WindowConstraint};
use crate::error::{Error, Result};
use crate::meanfield::solve_mbeta;

fn cells_per(grid: &FunctionalGrid, sites: usize, what: &str) -> Result<usize> {
    if sites == 0 || !sites.is_multiple_of(grid.spacing) {
        return Err(Error::invalid(
            what,
            format!("{sites} sites is not a positive multiple of the grid spacing {}", grid.spacing),
        ));
    }
    Ok(sites / grid.spacing)
}

/// A window of `ell_plus` sites cut into `ell_minus` blocks, flanked by
/// conditioning at `left·m_β` and `right·m_β`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayInstance {
    pub gamma: f64,
    pub beta: f64,
    pub zeta: f64,
    pub ell_minus: usize,
    pub ell_plus: usize,
    pub left: i8,
    pub right: i8,
    /// η of every block; empty means all `+1`.
    #[serde(default)]
    pub etas: Vec<i8>,
}

impl DecayInstance {
    pub fn problem(&self) -> Result<Problem> {
        let grid = FunctionalGrid::new(self.gamma)?;
        let per_block = cells_per(&grid, self.ell_minus, "ell_minus")?;
        let window = cells_per(&grid, self.ell_plus, "ell_plus")?;
        if window % per_block != 0 {
            return Err(Error::invalid("ell_plus", "must be a multiple of ell_minus"));
        }
        let blocks = window / per_block;
        let etas = if self.etas.is_empty() { vec![1; blocks] } else { self.etas.clone() };
        if etas.len() != blocks {
            return Err(Error::invalid("etas", format!("expected {blocks} entries, got {}", etas.len())));
        }
        let m_beta = solve_mbeta(self.beta).m_beta;
        let margin = grid.reach();
        let mut cells = vec![Some(self.left as f64 * m_beta); margin];
        cells.extend(std::iter::repeat_n(None, window));
        cells.extend(std::iter::repeat_n(Some(self.right as f64 * m_beta), margin));
        let constraints = etas
            .iter()
            .enumerate()
            .map(|(b, &eta)| WindowConstraint {
                layer: 0,
                cells: margin + b * per_block..margin + (b + 1) * per_block,
                eta,
            })
            .collect();
        Ok(Problem {
            grid,
            beta: self.beta,
            m_beta,
            zeta: self.zeta,
            layers: vec![LayerCells { cells, periodic: false }],
            constraints,
            objective: Objective::Conditioned,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub ell_plus: usize,
    /// `sup |m - m_β|` over cells within `γ^{-1}` of the window centre.
    pub mid_deviation: f64,
    /// `sup |m - m_β|` over cells within `γ^{-1}` of either window end.
    pub edge_deviation: f64,
    pub minimum: Minimum,
}

pub fn check_decay(instance: &DecayInstance, opts: &MinimizeOptions) -> Result<DecayReport> {
    let problem = instance.problem()?;
    let minimum = minimize(&problem, opts)?;
    let delta = problem.grid.delta();
    let margin = problem.grid.reach();
    let window = instance.ell_plus / problem.grid.spacing;
    let reach_sites = 1.0 / instance.gamma;
    let centre = instance.ell_plus as f64 / 2.0;
    let row = &minimum.profile[0][margin..margin + window];
    let dev = |keep: &dyn Fn(f64) -> bool| {
        row.iter()
            .enumerate()
            .filter(|(i, _)| keep((*i as f64 + 0.5) * delta))
            .map(|(_, v)| (v - problem.m_beta).abs())
            .fold(0.0, f64::max)
    };
    let len = instance.ell_plus as f64;
    Ok(DecayReport {
        ell_plus: instance.ell_plus,
        mid_deviation: dev(&|r| (r - centre).abs() <= reach_sites),
        edge_deviation: dev(&|r| r <= reach_sites || len - r <= reach_sites),
        minimum,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    /// Fitted `ω` in `dev ≈ c·exp(-ω γ ℓ+)`.
    pub omega: f64,
    pub prefactor: f64,
    pub points: usize,
}

/// Least-squares fit of `ln dev` against `γ ℓ+`, ignoring deviations at or
/// below `floor`.
pub fn fit_decay(gamma: f64, points: &[(usize, f64)], floor: f64) -> Option<DecayFit> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(_, d)| *d > floor)
        .map(|&(l, d)| (gamma * l as f64, d.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / n, sy / n);
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    Some(DecayFit {
        omega: -slope,
        prefactor: (my - slope * mx).exp(),
        points: pts.len(),
    })
}

/// An interval of `ell_minus` blocks with a prescribed η pattern and no
/// conditioning.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExcessInstance {
    pub gamma: f64,
    pub beta: f64,
    pub zeta: f64,
    pub ell_minus: usize,
    pub etas: Vec<i8>,
}

impl ExcessInstance {
    /// Sign changes between consecutive nonzero η.
    pub fn sign_changes(&self) -> usize {
        let signs: Vec<i8> = self.etas.iter().copied().filter(|&e| e != 0).collect();
        signs.windows(2).filter(|w| w[0] != w[1]).count()
    }

    pub fn zero_intervals(&self) -> usize {
        self.etas.iter().filter(|&&e| e == 0).count()
    }

    pub fn problem(&self) -> Result<Problem> {
        let grid = FunctionalGrid::new(self.gamma)?;
        let per_block = cells_per(&grid, self.ell_minus, "ell_minus")?;
        if self.etas.is_empty() {
            return Err(Error::invalid("etas", "must not be empty"));
        }
        let constraints = self
            .etas
            .iter()
            .enumerate()
            .map(|(b, &eta)| WindowConstraint {
                layer: 0,
                cells: b * per_block..(b + 1) * per_block,
                eta,
            })
            .collect();
        Ok(Problem {
            grid,
            beta: self.beta,
            m_beta: solve_mbeta(self.beta).m_beta,
            zeta: self.zeta,
            layers: vec![LayerCells {
                cells: vec![None; per_block * self.etas.len()],
                periodic: false,
            }],
            constraints,
            objective: Objective::Excess,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExcessReport {
    pub n: usize,
    pub p: usize,
    /// `𝓕(m₀) - |I₀| f_β(m_β)` at the constrained minimizer.
    pub excess: f64,
    /// `(c, excess - c ℓ- ζ² (2n + p))` per grid value.
    pub margins: Vec<(f64, f64)>,
    /// `excess / (ℓ- ζ² (2n + p))`; `None` when `2n + p = 0`.
    pub largest_c: Option<f64>,
    pub minimum: Minimum,
}

pub fn excess_bound_check(instance: &ExcessInstance, c_grid: &[f64], opts: &MinimizeOptions) -> Result<ExcessReport> {
    let problem = instance.problem()?;
    let minimum = minimize(&problem, opts)?;
    let reference = problem.domain_length() * fbeta(problem.m_beta, instance.beta)?;
    let excess = minimum.value - reference;
    let (n, p) = (instance.sign_changes(), instance.zero_intervals());
    let scale = instance.ell_minus as f64 * instance.zeta * instance.zeta * (2 * n + p) as f64;
    Ok(ExcessReport {
        n,
        p,
        excess,
        margins: c_grid.iter().map(|&c| (c, excess - c * scale)).collect(),
        largest_c: (scale > 0.0).then(|| excess / scale),
        minimum,
    })
}
