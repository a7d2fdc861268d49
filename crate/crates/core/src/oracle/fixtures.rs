use serde::{Deserialize, Serialize};

use super::block::BlockFamily;
use super::constraint::{ConstraintSpec, Predicate};
use super::lattice_z::LatticeSystem;
use super::conditional_law::ConditionalInstance;
use crate::error::Result;
use crate::meanfield::solve_mbeta;
use crate::model::{HorizontalBc, KacKernel, Lattice, Scales, SpinConfig, VerticalBc};

/// A fully free lattice used to cross-check enumeration and the transfer
/// matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeFixture {
    pub width: usize,
    pub height: usize,
    pub gamma: f64,
    pub beta: f64,
    pub epsilon: f64,
    pub horizontal: HorizontalBc,
    pub vertical: VerticalBc,
}

impl LatticeFixture {
    pub fn lattice(&self) -> Result<(Lattice, KacKernel)> {
        let kernel = KacKernel::new(self.gamma)?;
        let lat = Lattice::new(self.width, self.height, self.horizontal, self.vertical, kernel.range())?;
        Ok((lat, kernel))
    }
}

pub fn lattice_fixtures() -> Vec<LatticeFixture> {
    use HorizontalBc as Hb;
    use VerticalBc as Vb;
    let f = |width, height, gamma, beta, epsilon, horizontal, vertical| LatticeFixture {
        width,
        height,
        gamma,
        beta,
        epsilon,
        horizontal,
        vertical,
    };
    vec![
        f(4, 2, 0.5, 1.0, 0.25, Hb::Periodic, Vb::Plus),
        f(4, 2, 0.5, 1.0, 0.25, Hb::Plus, Vb::Periodic),
        f(8, 2, 0.5, 2.0, 0.25, Hb::Plus, Vb::Plus),
        f(8, 2, 0.5, 2.0, 0.25, Hb::Minus, Vb::MixedDobrushin),
        f(12, 2, 0.3, 1.5, 0.09, Hb::Periodic, Vb::Periodic),
        f(12, 2, 0.3, 2.0, 0.09, Hb::Plus, Vb::MixedDobrushinInverted),
        f(8, 3, 0.4, 1.2, 0.16, Hb::Periodic, Vb::Minus),
        f(6, 4, 0.5, 0.8, 0.25, Hb::Minus, Vb::Periodic),
        f(24, 1, 0.25, 2.0, 0.0625, Hb::Periodic, Vb::Plus),
        f(24, 1, 0.15, 3.0, 0.0225, Hb::Plus, Vb::Minus),
        f(10, 2, 0.2, 2.5, 0.04, Hb::Plus, Vb::Plus),
        f(20, 1, 0.125, 2.0, 0.0, Hb::Periodic, Vb::Plus),
    ]
}

/// A one-zero-block contour on a 6 × 2 block toy (ℓ- = 2, ℓ+ = 4).
#[derive(Debug, Clone)]
pub struct ToyContour {
    pub system: LatticeSystem,
    /// Support cells `(layer, block)`.
    pub support: Vec<(usize, usize)>,
    pub specification: Vec<Vec<i8>>,
    pub numerator: ConstraintSpec,
    pub denominator: ConstraintSpec,
}

pub fn toy_contour(beta: f64) -> Result<ToyContour> {
    let kernel = KacKernel::new(0.25)?;
    let lat = Lattice::new(24, 2, HorizontalBc::Plus, VerticalBc::Plus, kernel.range())?;
    let scales = Scales::new(2, 4, 0.3)?;
    let m_beta = solve_mbeta(beta).m_beta;
    let support: Vec<(usize, usize)> = (0..2).flat_map(|l| (1..4).map(move |b| (l, b))).collect();
    let specification: Vec<Vec<i8>> = support
        .iter()
        .map(|&(l, b)| if (l, b) == (0, 2) { vec![0, 1] } else { vec![1, 1] })
        .collect();
    let sites = support
        .iter()
        .flat_map(|&(l, b)| (b * 4..b * 4 + 4).map(move |x| (x, l)));
    let system = LatticeSystem::with_free_sites(SpinConfig::uniform(lat, 1), kernel, beta, 0.0625, sites);
    let numerator = ConstraintSpec::eta_on_cells(scales, m_beta, &support, &specification);
    let denominator = ConstraintSpec::new(
        scales,
        m_beta,
        support
            .iter()
            .map(|&(layer, block)| Predicate::BigTheta { layer, block, value: 1 })
            .collect(),
    );
    Ok(ToyContour {
        system,
        support,
        specification,
        numerator,
        denominator,
    })
}

/// Template for the conditional-law check: ℓ- = 16, ζ = 0.4, β = 2.
pub fn conditional_law_template() -> Result<(ConditionalInstance, KacKernel)> {
    let kernel = KacKernel::new(0.1)?;
    let lat = Lattice::new(64, 3, HorizontalBc::Plus, VerticalBc::Plus, kernel.range())?;
    Ok((
        ConditionalInstance {
            cfg: SpinConfig::uniform(lat, 1),
            x: 0,
            layer: 0,
            ell_minus: 16,
            zeta: 0.4,
            m_beta: solve_mbeta(2.0).m_beta,
            beta: 2.0,
            epsilon: 0.01,
            target: 1,
        },
        kernel,
    ))
}

/// Block family for the Holley, FKG and deviation checks.
pub fn block_family(ell_minus: usize) -> BlockFamily {
    BlockFamily {
        beta: 2.0,
        gamma: 0.3,
        alpha: 0.5,
        epsilon: 0.09,
        zeta: 0.35,
        m_beta: solve_mbeta(2.0).m_beta,
        ell_minus,
    }
}

/// `b` values at which deviation tails are reported.
pub const DEVIATION_B_GRID: [f64; 3] = [0.25, 0.5, 0.75];
