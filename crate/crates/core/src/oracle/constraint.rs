use serde::{Deserialize, Serialize};

use crate::coarse::eta_from_average;
use crate::error::{Error, Result};
use crate::model::{Lattice, Scales};

/// A single predicate on a configuration. Block indices refer to ℓ- blocks
/// for `Eta` and ℓ+ blocks for `Theta` and `BigTheta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Predicate {
    Spin { x: usize, layer: usize, value: i8 },
    Eta { layer: usize, block: usize, value: i8 },
    Theta { layer: usize, block: usize, value: i8 },
    BigTheta { layer: usize, block: usize, value: i8 },
}

impl Predicate {
    pub fn flipped(self) -> Self {
        match self {
            Predicate::Spin { x, layer, value } => Predicate::Spin { x, layer, value: -value },
            Predicate::Eta { layer, block, value } => Predicate::Eta { layer, block, value: -value },
            Predicate::Theta { layer, block, value } => Predicate::Theta { layer, block, value: -value },
            Predicate::BigTheta { layer, block, value } => Predicate::BigTheta { layer, block, value: -value },
        }
    }
}

/// Conjunction of predicates, evaluated with the given block scales and
/// `m_β`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConstraintSpec {
    pub scales: Option<Scales>,
    pub m_beta: f64,
    pub predicates: Vec<Predicate>,
}

impl ConstraintSpec {
    pub fn none() -> Self {
        ConstraintSpec::default()
    }

    pub fn new(scales: Scales, m_beta: f64, predicates: Vec<Predicate>) -> Self {
        ConstraintSpec {
            scales: Some(scales),
            m_beta,
            predicates,
        }
    }

    pub fn and(mut self, other: &ConstraintSpec) -> Self {
        self.predicates.extend_from_slice(&other.predicates);
        self
    }

    pub fn flipped(&self) -> Self {
        ConstraintSpec {
            predicates: self.predicates.iter().map(|p| p.flipped()).collect(),
            ..self.clone()
        }
    }

    /// `η = value` on every ℓ- block of the listed ℓ+ cells.
    pub fn eta_on_cells(scales: Scales, m_beta: f64, cells: &[(usize, usize)], values: &[Vec<i8>]) -> Self {
        let per = scales.minus_per_plus();
        let mut predicates = Vec::new();
        for (&(layer, block), vals) in cells.iter().zip(values) {
            for (k, &value) in vals.iter().enumerate() {
                predicates.push(Predicate::Eta {
                    layer,
                    block: block * per + k,
                    value,
                });
            }
        }
        ConstraintSpec::new(scales, m_beta, predicates)
    }

    pub fn validate(&self, lattice: &Lattice) -> Result<()> {
        let needs_blocks = self.predicates.iter().any(|p| !matches!(p, Predicate::Spin { .. }));
        let scales = match (self.scales, needs_blocks) {
            (Some(s), _) => Some(s),
            (None, false) => None,
            (None, true) => return Err(Error::invalid("constraint", "block predicates need scales")),
        };
        let check = |ok: bool, what: String| if ok { Ok(()) } else { Err(Error::invalid("constraint", what)) };
        for p in &self.predicates {
            match *p {
                Predicate::Spin { x, layer, value } => {
                    check(x < lattice.width && layer < lattice.height, format!("site ({x}, {layer}) outside volume"))?;
                    check(value == 1 || value == -1, format!("spin value {value}"))?;
                }
                Predicate::Eta { layer, block, value } => {
                    let s = scales.unwrap();
                    check(lattice.width.is_multiple_of(s.ell_minus), "width must be a multiple of ell_minus".into())?;
                    check(
                        layer < lattice.height && block < lattice.width / s.ell_minus,
                        format!("eta block ({block}, {layer}) outside volume"),
                    )?;
                    check((-1..=1).contains(&value), format!("eta value {value}"))?;
                }
                Predicate::Theta { layer, block, value } | Predicate::BigTheta { layer, block, value } => {
                    let s = scales.unwrap();
                    check(lattice.width.is_multiple_of(s.ell_plus), "width must be a multiple of ell_plus".into())?;
                    check(
                        layer < lattice.height && block < lattice.width / s.ell_plus,
                        format!("theta block ({block}, {layer}) outside volume"),
                    )?;
                    check((-1..=1).contains(&value), format!("theta value {value}"))?;
                }
            }
        }
        Ok(())
    }
}

/// A constraint resolved against a volume with a fixed part.
///
/// Every ℓ- block keeps the sum of its fixed spins and the positions of
/// its free spins in the enumeration order.
pub(crate) struct CompiledConstraint {
    predicates: Vec<Predicate>,
    width: usize,
    zeta: f64,
    m_beta: f64,
    ell_minus: usize,
    per_plus: usize,
    minus_blocks: usize,
    block_fixed: Vec<i32>,
    block_free: Vec<Vec<usize>>,
    site_free: Vec<Option<usize>>,
    fixed_spins: Vec<i8>,
    margin_eta: Vec<Option<i8>>,
}

impl CompiledConstraint {
    pub(crate) fn compile(
        spec: &ConstraintSpec,
        lattice: &Lattice,
        boundary: &[i8],
        free_sites: &[usize],
    ) -> Result<Self> {
        spec.validate(lattice)?;
        let scales = spec.scales.unwrap_or(Scales {
            ell_minus: 1,
            ell_plus: 1,
            zeta: 1.0,
        });
        let mut site_free = vec![None; lattice.sites()];
        for (k, &i) in free_sites.iter().enumerate() {
            site_free[i] = Some(k);
        }
        let lm = scales.ell_minus;
        let minus_blocks = if lattice.width.is_multiple_of(lm) { lattice.width / lm } else { 0 };
        let mut block_fixed = vec![0; minus_blocks * lattice.height];
        let mut block_free = vec![Vec::new(); minus_blocks * lattice.height];
        if minus_blocks > 0 {
            for layer in 0..lattice.height {
                for x in 0..lattice.width {
                    let i = lattice.index(x, layer);
                    let b = layer * minus_blocks + x / lm;
                    match site_free[i] {
                        Some(k) => block_free[b].push(k),
                        None => block_fixed[b] += boundary[i] as i32,
                    }
                }
            }
        }
        let margin_eta = (0..lattice.height)
            .map(|l| lattice.margin_spin(l).map(|s| eta_from_average(s as f64, spec.m_beta, scales.zeta)))
            .collect();
        Ok(CompiledConstraint {
            predicates: spec.predicates.clone(),
            width: lattice.width,
            zeta: scales.zeta,
            m_beta: spec.m_beta,
            ell_minus: lm,
            per_plus: scales.minus_per_plus(),
            minus_blocks,
            block_fixed,
            block_free,
            site_free,
            fixed_spins: boundary.to_vec(),
            margin_eta,
        })
    }

    #[inline]
    fn eta(&self, free: &[i8], layer: usize, block: usize) -> i8 {
        let b = layer * self.minus_blocks + block;
        let s = self.block_fixed[b] + self.block_free[b].iter().map(|&k| free[k] as i32).sum::<i32>();
        eta_from_average(s as f64 / self.ell_minus as f64, self.m_beta, self.zeta)
    }

    fn theta(&self, free: &[i8], layer: usize, block: isize) -> i8 {
        let n = (self.minus_blocks / self.per_plus) as isize;
        let block = if (0..n).contains(&block) {
            block
        } else if let Some(e) = self.margin_eta[layer] {
            return e;
        } else {
            block.rem_euclid(n)
        } as usize;
        let first = self.eta(free, layer, block * self.per_plus);
        if first != 0 && (1..self.per_plus).all(|k| self.eta(free, layer, block * self.per_plus + k) == first) {
            first
        } else {
            0
        }
    }

    pub(crate) fn accepts(&self, free: &[i8]) -> bool {
        self.predicates.iter().all(|p| match *p {
            Predicate::Spin { x, layer, value } => {
                let i = layer * self.width + x;
                match self.site_free[i] {
                    Some(k) => free[k] == value,
                    None => self.fixed_spins[i] == value,
                }
            }
            Predicate::Eta { layer, block, value } => self.eta(free, layer, block) == value,
            Predicate::Theta { layer, block, value } => self.theta(free, layer, block as isize) == value,
            Predicate::BigTheta { layer, block, value } => {
                let b = block as isize;
                let t = self.theta(free, layer, b);
                let big = if t != 0 && self.theta(free, layer, b - 1) == t && self.theta(free, layer, b + 1) == t {
                    t
                } else {
                    0
                };
                big == value
            }
        })
    }
}
