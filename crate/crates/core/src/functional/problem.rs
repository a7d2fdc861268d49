use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::entropy::{entropy_unchecked, fbeta_derivative};
use crate::error::{Error, Result};
use crate::model::{CosineProfile, KacProfile};
use crate::numerics::{round_to_power_of_two, NeumaierSum};

/// Values are kept this far inside `[-1, 1]` so the entropy gradient is finite.
pub const BOX_MARGIN: f64 = 1e-12;
/// Slack turning the strict "outside the window" branch into a closed set.
pub const STRICT_SLACK: f64 = 1e-9;

/// The cell grid of spacing `δ ≈ γ^{-1/2}` sites with the normalized
/// discrete kernel `k_d ∝ J(γ δ d)`, `Σ_d k_d = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionalGrid {
    pub gamma: f64,
    /// Sites per cell.
    pub spacing: usize,
    weights: Vec<f64>,
}

impl FunctionalGrid {
    pub fn new(gamma: f64) -> Result<Self> {
        Self::with_spacing(gamma, round_to_power_of_two(gamma.powf(-0.5)))
    }

    pub fn with_spacing(gamma: f64, spacing: usize) -> Result<Self> {
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(Error::invalid("gamma", format!("must lie in (0, 1), got {gamma}")));
        }
        if spacing == 0 {
            return Err(Error::invalid("spacing", "must be positive"));
        }
        let step = gamma * spacing as f64;
        let mut raw = Vec::new();
        let mut d = 0usize;
        while (d as f64) * step < 1.0 {
            raw.push(CosineProfile.value(d as f64 * step));
            d += 1;
        }
        let total = raw[0] + 2.0 * raw[1..].iter().sum::<f64>();
        Ok(FunctionalGrid {
            gamma,
            spacing,
            weights: raw.into_iter().map(|w| w / total).collect(),
        })
    }

    /// Largest cell offset with nonzero weight.
    pub fn reach(&self) -> usize {
        self.weights.len() - 1
    }

    #[inline]
    pub fn k(&self, d: isize) -> f64 {
        self.weights.get(d.unsigned_abs()).copied().unwrap_or(0.0)
    }

    pub fn delta(&self) -> f64 {
        self.spacing as f64
    }
}

/// One layer of cells; `None` marks a cell of the domain, `Some(v)` a
/// fixed conditioning value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerCells {
    pub cells: Vec<Option<f64>>,
    pub periodic: bool,
}

/// `|average - target·m_β| <= ζ` for `eta = ±1`, both windows missed
/// for `eta = 0`, over a run of domain cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowConstraint {
    pub layer: usize,
    pub cells: Range<usize>,
    pub eta: i8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Objective {
    /// `F(m | m_c)`: interaction within the domain, cross term with the
    /// conditioning, entropy.
    Conditioned,
    /// `∫ f_β(m) + ¼ ∬ J (m(r) - m(r'))²` over the domain alone.
    Excess,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Problem {
    pub grid: FunctionalGrid,
    pub beta: f64,
    pub m_beta: f64,
    pub zeta: f64,
    pub layers: Vec<LayerCells>,
    pub constraints: Vec<WindowConstraint>,
    pub objective: Objective,
}

/// Values on every cell of every layer; only domain cells are variables.
pub type Profile = Vec<Vec<f64>>;

impl Problem {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0) {
            return Err(Error::invalid("beta", "must be > 0"));
        }
        let reach = self.grid.reach();
        for (l, layer) in self.layers.iter().enumerate() {
            if layer.cells.iter().flatten().any(|v| !(-1.0..=1.0).contains(v)) {
                return Err(Error::invalid("conditioning", format!("layer {l} has values outside [-1, 1]")));
            }
            if !layer.periodic && self.objective == Objective::Conditioned {
                let n = layer.cells.len();
                let touches = layer
                    .cells
                    .iter()
                    .enumerate()
                    .any(|(i, c)| c.is_none() && (i < reach || i + reach >= n));
                if touches {
                    return Err(Error::invalid(
                        "conditioning",
                        format!("layer {l}: the domain must keep {reach} conditioning cells to each open end"),
                    ));
                }
            }
        }
        for c in &self.constraints {
            let layer = self
                .layers
                .get(c.layer)
                .ok_or_else(|| Error::invalid("constraint", format!("layer {} does not exist", c.layer)))?;
            if c.cells.is_empty() || c.cells.end > layer.cells.len() || layer.cells[c.cells.clone()].iter().any(|v| v.is_some()) {
                return Err(Error::invalid("constraint", format!("window {:?} is not inside the domain", c.cells)));
            }
            if !(-1..=1).contains(&c.eta) {
                return Err(Error::invalid("constraint", format!("eta {}", c.eta)));
            }
            if allowed_intervals(c.eta, self.m_beta, self.zeta).is_empty() {
                return Err(Error::Infeasible(format!(
                    "window {:?} with eta = {} is empty for m_beta = {}, zeta = {}",
                    c.cells, c.eta, self.m_beta, self.zeta
                )));
            }
        }
        Ok(())
    }

    fn neighbour(&self, layer: &LayerCells, i: usize, d: isize) -> Option<usize> {
        let n = layer.cells.len() as isize;
        let j = i as isize + d;
        if layer.periodic {
            Some(j.rem_euclid(n) as usize)
        } else if (0..n).contains(&j) {
            Some(j as usize)
        } else {
            None
        }
    }

    /// Profile with `value` on every domain cell and the conditioning elsewhere.
    pub fn filled(&self, mut value: impl FnMut(usize, usize) -> f64) -> Profile {
        self.layers
            .iter()
            .enumerate()
            .map(|(l, layer)| {
                layer
                    .cells
                    .iter()
                    .enumerate()
                    .map(|(i, c)| c.unwrap_or_else(|| value(l, i)))
                    .collect()
            })
            .collect()
    }

    pub fn domain_cells(&self) -> usize {
        self.layers.iter().map(|l| l.cells.iter().filter(|c| c.is_none()).count()).sum()
    }

    /// Domain length in sites.
    pub fn domain_length(&self) -> f64 {
        self.domain_cells() as f64 * self.grid.delta()
    }

    pub fn value(&self, m: &Profile) -> f64 {
        let delta = self.grid.delta();
        let r = self.grid.reach() as isize;
        let mut total = NeumaierSum::new();
        for (layer, row) in self.layers.iter().zip(m) {
            for (i, cell) in layer.cells.iter().enumerate() {
                if cell.is_some() {
                    continue;
                }
                let mi = row[i];
                match self.objective {
                    Objective::Conditioned => {
                        let (mut inner, mut outer) = (0.0, 0.0);
                        for d in -r..=r {
                            if let Some(j) = self.neighbour(layer, i, d) {
                                let v = self.grid.k(d) * row[j];
                                if layer.cells[j].is_none() {
                                    inner += v;
                                } else {
                                    outer += v;
                                }
                            }
                        }
                        total += delta * (-0.5 * inner * mi - outer * mi - entropy_unchecked(mi) / self.beta);
                    }
                    Objective::Excess => {
                        let mut grad_term = 0.0;
                        for d in -r..=r {
                            if let Some(j) = self.neighbour(layer, i, d) {
                                if layer.cells[j].is_none() {
                                    grad_term += self.grid.k(d) * (mi - row[j]).powi(2);
                                }
                            }
                        }
                        let f = -0.5 * mi * mi - entropy_unchecked(mi) / self.beta;
                        total += delta * (f + 0.25 * grad_term);
                    }
                }
            }
        }
        total.value()
    }

    /// Gradient with respect to the domain values (zero on fixed cells).
    pub fn gradient(&self, m: &Profile) -> Profile {
        let delta = self.grid.delta();
        let r = self.grid.reach() as isize;
        self.layers
            .iter()
            .zip(m)
            .map(|(layer, row)| {
                (0..row.len())
                    .map(|i| {
                        if layer.cells[i].is_some() {
                            return 0.0;
                        }
                        let mi = row[i];
                        match self.objective {
                            Objective::Conditioned => {
                                let mut h = 0.0;
                                for d in -r..=r {
                                    if let Some(j) = self.neighbour(layer, i, d) {
                                        h += self.grid.k(d) * row[j];
                                    }
                                }
                                delta * (-h + mi.atanh() / self.beta)
                            }
                            Objective::Excess => {
                                let mut g = fbeta_derivative(mi, self.beta);
                                for d in -r..=r {
                                    if let Some(j) = self.neighbour(layer, i, d) {
                                        if layer.cells[j].is_none() {
                                            g += self.grid.k(d) * (mi - row[j]);
                                        }
                                    }
                                }
                                delta * g
                            }
                        }
                    })
                    .collect()
            })
            .collect()
    }

    /// Euclidean projection onto the box and the window constraints.
    pub fn project(&self, m: &mut Profile) {
        let hi = 1.0 - BOX_MARGIN;
        for (layer, row) in self.layers.iter().zip(m.iter_mut()) {
            for (v, c) in row.iter_mut().zip(&layer.cells) {
                if c.is_none() {
                    *v = v.clamp(-hi, hi);
                }
            }
        }
        for c in &self.constraints {
            let window = &mut m[c.layer][c.cells.clone()];
            project_window(window, &allowed_intervals(c.eta, self.m_beta, self.zeta));
        }
    }

    pub fn is_feasible(&self, m: &Profile, tolerance: f64) -> bool {
        self.constraints.iter().all(|c| {
            let w = &m[c.layer][c.cells.clone()];
            let avg = w.iter().sum::<f64>() / w.len() as f64;
            allowed_intervals(c.eta, self.m_beta, self.zeta)
                .iter()
                .any(|&(lo, hi)| avg >= lo - tolerance && avg <= hi + tolerance)
        })
    }

    pub fn flipped(&self) -> Self {
        let mut p = self.clone();
        for layer in &mut p.layers {
            for c in layer.cells.iter_mut().flatten() {
                *c = -*c;
            }
        }
        for c in &mut p.constraints {
            c.eta = -c.eta;
        }
        p
    }
}

/// Allowed values of a window average for a given η.
pub fn allowed_intervals(eta: i8, m_beta: f64, zeta: f64) -> Vec<(f64, f64)> {
    let hi = 1.0 - BOX_MARGIN;
    let clip = |(a, b): (f64, f64)| {
        let (a, b) = (a.max(-hi), b.min(hi));
        (a <= b).then_some((a, b))
    };
    let e = STRICT_SLACK;
    let pieces: Vec<(f64, f64)> = match eta {
        1 => vec![(m_beta - zeta, m_beta + zeta)],
        -1 => vec![(-m_beta - zeta, -m_beta + zeta)],
        _ => vec![
            (-1.0, -m_beta - zeta - e),
            (-m_beta + zeta + e, m_beta - zeta - e),
            (m_beta + zeta + e, 1.0),
        ],
    };
    pieces.into_iter().filter_map(clip).collect()
}

fn project_window(window: &mut [f64], intervals: &[(f64, f64)]) {
    let hi = 1.0 - BOX_MARGIN;
    let y: Vec<f64> = window.to_vec();
    let n = y.len() as f64;
    let shifted = |lambda: f64| -> Vec<f64> { y.iter().map(|v| (v - lambda).clamp(-hi, hi)).collect() };
    let mean = |v: &[f64]| v.iter().sum::<f64>() / n;
    let mut best: Option<(f64, Vec<f64>)> = None;
    for &(lo, up) in intervals {
        let base = shifted(0.0);
        let avg = mean(&base);
        let candidate = if avg < lo || avg > up {
            let target = if avg < lo { lo } else { up };
            // mean(clip(y - λ)) is non-increasing in λ
            let (mut a, mut b) = (-2.0 - 2.0 * hi, 2.0 + 2.0 * hi);
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                if mean(&shifted(mid)) > target {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            let mut v = shifted(0.5 * (a + b));
            // land exactly inside the closed window
            let drift = mean(&v) - target;
            if drift != 0.0 {
                for x in v.iter_mut() {
                    *x = (*x - drift).clamp(-hi, hi);
                }
            }
            v
        } else {
            base
        };
        let dist: f64 = candidate.iter().zip(&y).map(|(a, b)| (a - b).powi(2)).sum();
        if best.as_ref().is_none_or(|(d, _)| dist < *d) {
            best = Some((dist, candidate));
        }
    }
    if let Some((_, v)) = best {
        window.copy_from_slice(&v);
    }
}
