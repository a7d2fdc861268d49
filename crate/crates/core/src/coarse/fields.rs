use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{check_block_width, Lattice, Scales, SpinConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Plus,
    Minus,
    Undetermined,
}

impl Phase {
    pub fn sign(self) -> i8 {
        match self {
            Phase::Plus => 1,
            Phase::Minus => -1,
            Phase::Undetermined => 0,
        }
    }
}

/// How the vertical neighbours enter the phase label.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhaseRule {
    /// `Θ(x,i) = Θ(x,i+1) = Θ(x,i-1)`.
    #[default]
    BothNeighbours,
    /// `Θ(x,i)` equal to at least one of `Θ(x,i±1)`.
    EitherNeighbour,
}

/// η value of an ℓ- block with empirical average `avg`.
///
/// Window boundaries are inclusive. If both windows contain `avg` (only
/// possible when `ζ >= m_β`) the block is reported as 0 to keep the
/// labelling flip-symmetric.
#[inline]
pub fn eta_from_average(avg: f64, m_beta: f64, zeta: f64) -> i8 {
    let plus = (avg - m_beta).abs() <= zeta;
    let minus = (avg + m_beta).abs() <= zeta;
    match (plus, minus) {
        (true, false) => 1,
        (false, true) => -1,
        _ => 0,
    }
}

/// A cell of the ℓ+ block grid: block `block` of layer `layer`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BlockCell {
    pub layer: usize,
    pub block: usize,
}

/// Coarse-grained fields of one configuration.
///
/// η lives on ℓ- blocks, θ, Θ and the phase on ℓ+ blocks; per-site
/// accessors look up the containing block.
#[derive(Debug, Clone, PartialEq)]
pub struct CoarseFields {
    lattice: Lattice,
    scales: Scales,
    m_beta: f64,
    rule: PhaseRule,
    block_average: Vec<f64>,
    eta: Vec<i8>,
    theta: Vec<i8>,
    big_theta: Vec<i8>,
    phase: Vec<Phase>,
    // θ of the frozen horizontal margin per layer, Θ of frozen layers
    margin_theta: Vec<Option<i8>>,
    frozen_big_theta: [Option<i8>; 2],
}

impl CoarseFields {
    pub fn compute(cfg: &SpinConfig, scales: Scales, m_beta: f64) -> Result<Self> {
        Self::compute_with_rule(cfg, scales, m_beta, PhaseRule::BothNeighbours)
    }

    pub fn compute_with_rule(
        cfg: &SpinConfig,
        scales: Scales,
        m_beta: f64,
        rule: PhaseRule,
    ) -> Result<Self> {
        let lat = *cfg.lattice();
        check_block_width(lat.width, scales.ell_plus)?;
        if !(0.0..=1.0).contains(&m_beta) {
            return Err(Error::invalid("m_beta", format!("must lie in [0, 1], got {m_beta}")));
        }
        let (lm, lp, zeta) = (scales.ell_minus, scales.ell_plus, scales.zeta);
        let n_minus = lat.width / lm;
        let n_plus = lat.width / lp;
        let per = scales.minus_per_plus();

        let mut block_average = Vec::with_capacity(n_minus * lat.height);
        for layer in 0..lat.height {
            let row = &cfg.spins()[layer * lat.width..(layer + 1) * lat.width];
            for chunk in row.chunks_exact(lm) {
                let s: i32 = chunk.iter().map(|&v| v as i32).sum();
                block_average.push(s as f64 / lm as f64);
            }
        }
        let eta: Vec<i8> = block_average
            .iter()
            .map(|&a| eta_from_average(a, m_beta, zeta))
            .collect();

        let mut theta = Vec::with_capacity(n_plus * lat.height);
        for layer in 0..lat.height {
            for b in 0..n_plus {
                let start = layer * n_minus + b * per;
                theta.push(uniform_sign(&eta[start..start + per]));
            }
        }

        let margin_theta: Vec<Option<i8>> = (0..lat.height)
            .map(|layer| lat.margin_spin(layer).map(|s| eta_from_average(s as f64, m_beta, zeta)))
            .collect();
        let frozen_big_theta = [false, true].map(|upper| {
            lat.vertical
                .frozen_layer(upper)
                .map(|s| eta_from_average(s as f64, m_beta, zeta))
        });

        let theta_at = |layer: usize, b: isize| -> i8 {
            if (0..n_plus as isize).contains(&b) {
                theta[layer * n_plus + b as usize]
            } else {
                match margin_theta[layer] {
                    Some(t) => t,
                    None => theta[layer * n_plus + b.rem_euclid(n_plus as isize) as usize],
                }
            }
        };
        let mut big_theta = Vec::with_capacity(n_plus * lat.height);
        for layer in 0..lat.height {
            for b in 0..n_plus as isize {
                let t = theta_at(layer, b);
                let same = t != 0 && theta_at(layer, b - 1) == t && theta_at(layer, b + 1) == t;
                big_theta.push(if same { t } else { 0 });
            }
        }

        let mut fields = CoarseFields {
            lattice: lat,
            scales,
            m_beta,
            rule,
            block_average,
            eta,
            theta,
            big_theta,
            phase: Vec::new(),
            margin_theta,
            frozen_big_theta,
        };
        let mut phase = Vec::with_capacity(n_plus * lat.height);
        for layer in 0..lat.height as isize {
            for b in 0..n_plus {
                let t = fields.big_theta_cell(layer, b);
                let up = fields.big_theta_cell(layer + 1, b);
                let down = fields.big_theta_cell(layer - 1, b);
                let agrees = match rule {
                    PhaseRule::BothNeighbours => up == t && down == t,
                    PhaseRule::EitherNeighbour => up == t || down == t,
                };
                phase.push(match (t, agrees) {
                    (1, true) => Phase::Plus,
                    (-1, true) => Phase::Minus,
                    _ => Phase::Undetermined,
                });
            }
        }
        fields.phase = phase;
        Ok(fields)
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn scales(&self) -> &Scales {
        &self.scales
    }

    pub fn m_beta(&self) -> f64 {
        self.m_beta
    }

    pub fn rule(&self) -> PhaseRule {
        self.rule
    }

    /// Number of ℓ+ blocks per layer.
    pub fn blocks_per_layer(&self) -> usize {
        self.lattice.width / self.scales.ell_plus
    }

    /// Number of ℓ- blocks per layer.
    pub fn sub_blocks_per_layer(&self) -> usize {
        self.lattice.width / self.scales.ell_minus
    }

    /// Θ on the block grid, resolving vertical boundaries (frozen layers are
    /// uniform) and periodic wrap. Horizontal indices must be in range.
    pub fn big_theta_cell(&self, layer: isize, block: usize) -> i8 {
        let h = self.lattice.height as isize;
        if (0..h).contains(&layer) {
            self.big_theta[layer as usize * self.blocks_per_layer() + block]
        } else {
            match self.frozen_big_theta[(layer >= h) as usize] {
                Some(t) => t,
                None => self.big_theta[layer.rem_euclid(h) as usize * self.blocks_per_layer() + block],
            }
        }
    }

    /// θ of the frozen horizontal margin of `layer`, `None` if periodic.
    pub fn margin_theta(&self, layer: usize) -> Option<i8> {
        self.margin_theta[layer]
    }

    /// Θ of the frozen layer above (`upper`) or below, `None` if periodic.
    pub fn frozen_big_theta(&self, upper: bool) -> Option<i8> {
        self.frozen_big_theta[upper as usize]
    }

    /// θ on the block grid including the frozen horizontal margin.
    pub fn theta_cell(&self, layer: usize, block: isize) -> i8 {
        let n = self.blocks_per_layer() as isize;
        if (0..n).contains(&block) {
            self.theta[layer * n as usize + block as usize]
        } else {
            match self.margin_theta[layer] {
                Some(t) => t,
                None => self.theta[layer * n as usize + block.rem_euclid(n) as usize],
            }
        }
    }

    pub fn phase_cell(&self, cell: BlockCell) -> Phase {
        self.phase[cell.layer * self.blocks_per_layer() + cell.block]
    }

    pub fn big_theta_of(&self, cell: BlockCell) -> i8 {
        self.big_theta[cell.layer * self.blocks_per_layer() + cell.block]
    }

    /// η values of the ℓ- sub-blocks of an ℓ+ cell.
    pub fn eta_of(&self, cell: BlockCell) -> &[i8] {
        let per = self.scales.minus_per_plus();
        let start = cell.layer * self.sub_blocks_per_layer() + cell.block * per;
        &self.eta[start..start + per]
    }

    /// η of ℓ- block `k` in `layer`.
    pub fn eta_block(&self, layer: usize, k: usize) -> i8 {
        self.eta[layer * self.sub_blocks_per_layer() + k]
    }

    pub fn eta_row(&self, layer: usize) -> &[i8] {
        let n = self.sub_blocks_per_layer();
        &self.eta[layer * n..(layer + 1) * n]
    }

    pub fn block_average(&self, layer: usize, k: usize) -> f64 {
        self.block_average[layer * self.sub_blocks_per_layer() + k]
    }

    pub fn sigma_ellminus(&self, x: usize, layer: usize) -> f64 {
        self.block_average(layer, x / self.scales.ell_minus)
    }

    pub fn eta(&self, x: usize, layer: usize) -> i8 {
        self.eta_block(layer, x / self.scales.ell_minus)
    }

    pub fn theta(&self, x: usize, layer: usize) -> i8 {
        self.theta[layer * self.blocks_per_layer() + x / self.scales.ell_plus]
    }

    pub fn big_theta(&self, x: usize, layer: usize) -> i8 {
        self.big_theta[layer * self.blocks_per_layer() + x / self.scales.ell_plus]
    }

    pub fn phase(&self, x: usize, layer: usize) -> Phase {
        self.phase[layer * self.blocks_per_layer() + x / self.scales.ell_plus]
    }

    pub fn cells(&self) -> impl Iterator<Item = BlockCell> + '_ {
        let n = self.blocks_per_layer();
        (0..self.lattice.height).flat_map(move |layer| (0..n).map(move |block| BlockCell { layer, block }))
    }

    /// Sites of an ℓ+ cell as `(x, layer)`.
    pub fn sites_of(&self, cell: BlockCell) -> impl Iterator<Item = (usize, usize)> {
        let lp = self.scales.ell_plus;
        (cell.block * lp..(cell.block + 1) * lp).map(move |x| (x, cell.layer))
    }
}

fn uniform_sign(values: &[i8]) -> i8 {
    match values.first() {
        Some(&v) if v != 0 && values.iter().all(|&u| u == v) => v,
        _ => 0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{HorizontalBc, VerticalBc};

    const M: f64 = 0.957_504_024_077_268_8;

    fn lattice(w: usize, h: usize) -> Lattice {
        Lattice::new(w, h, HorizontalBc::Plus, VerticalBc::Plus, 2).unwrap()
    }

    #[test]
    fn all_plus_is_plus_phase() {
        let cfg = SpinConfig::uniform(lattice(32, 3), 1);
        let f = CoarseFields::compute(&cfg, Scales::new(2, 4, 0.3).unwrap(), M).unwrap();
        for layer in 0..3 {
            for x in 0..32 {
                assert_eq!(f.eta(x, layer), 1);
                assert_eq!(f.theta(x, layer), 1);
                assert_eq!(f.big_theta(x, layer), 1);
                assert_eq!(f.phase(x, layer), Phase::Plus);
            }
        }
    }

    #[test]
    fn zero_block_spreads_to_neighbours() {
        // one ℓ- block with average 0 in block 3 of layer 1
        let lat = lattice(32, 3);
        let cfg = SpinConfig::from_fn(lat, |x, l| if l == 1 && x == 12 { -1 } else { 1 });
        let f = CoarseFields::compute(&cfg, Scales::new(2, 4, 0.3).unwrap(), M).unwrap();
        assert_eq!(f.sigma_ellminus(12, 1), 0.0);
        assert_eq!(f.eta(12, 1), 0);
        assert_eq!(f.eta(14, 1), 1);
        for x in 12..16 {
            assert_eq!(f.theta(x, 1), 0);
        }
        assert_eq!(f.theta(8, 1), 1);
        for x in 8..20 {
            assert_eq!(f.big_theta(x, 1), 0);
        }
        assert_eq!(f.big_theta(7, 1), 1);
        assert_eq!(f.big_theta(20, 1), 1);
        // phase is undetermined on blocks 2..=4 of layers 0, 1 and 2
        for l in 0..3 {
            assert_eq!(f.phase(8, l), Phase::Undetermined);
            assert_eq!(f.phase(19, l), Phase::Undetermined);
            assert_eq!(f.phase(4, l), Phase::Plus);
        }
    }

    #[test]
    fn inclusive_window_boundary() {
        let lat = lattice(8, 1);
        // ℓ- = 4, one minus spin: average 0.5
        let cfg = SpinConfig::from_fn(lat, |x, _| if x == 0 { -1 } else { 1 });
        let zeta = M - 0.5;
        let f = CoarseFields::compute(&cfg, Scales::new(4, 8, zeta).unwrap(), M).unwrap();
        assert_eq!(f.sigma_ellminus(0, 0), M - zeta);
        assert_eq!(f.eta(0, 0), 1);
        let f = CoarseFields::compute(&cfg, Scales::new(4, 8, zeta * (1.0 - 1e-12)).unwrap(), M).unwrap();
        assert_eq!(f.eta(0, 0), 0);
    }

    #[test]
    fn either_rule_is_weaker() {
        let lat = Lattice::new(16, 3, HorizontalBc::Periodic, VerticalBc::Periodic, 2).unwrap();
        let cfg = SpinConfig::from_fn(lat, |_, l| if l == 2 { -1 } else { 1 });
        let s = Scales::new(2, 4, 0.3).unwrap();
        let both = CoarseFields::compute(&cfg, s, M).unwrap();
        let either = CoarseFields::compute_with_rule(&cfg, s, M, PhaseRule::EitherNeighbour).unwrap();
        assert_eq!(both.phase(0, 0), Phase::Undetermined);
        assert_eq!(either.phase(0, 0), Phase::Plus);
        assert_eq!(both.phase(0, 2), Phase::Undetermined);
        assert_eq!(either.phase(0, 2), Phase::Undetermined);
    }

    #[test]
    fn scale_mismatch_rejected() {
        let cfg = SpinConfig::uniform(lattice(12, 1), 1);
        assert!(CoarseFields::compute(&cfg, Scales::new(2, 8, 0.3).unwrap(), M).is_err());
    }
}
