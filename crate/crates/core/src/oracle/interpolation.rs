use serde::{Deserialize, Serialize};

use super::constraint::{ConstraintSpec, Predicate};
use super::lattice_z::{enumerate_with, LatticeSystem};
use crate::error::Result;
use crate::meanfield::solve_mbeta;
use crate::model::{HorizontalBc, KacKernel, Lattice, Scales, SpinConfig, VerticalBc};
use crate::numerics::simpson_converged;

/// Which η pattern the two stripe layers are conditioned on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StripeConstraint {
    None,
    /// `η = +1` on both layers.
    Aligned,
    /// `η = +1` on the upper layer, `η = -1` on the lower one.
    Mixed,
}

/// Two free layers of width `width` between frozen layers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StripeInstance {
    pub name: &'static str,
    pub width: usize,
    pub beta: f64,
    pub gamma: f64,
    pub vertical_exponent: f64,
    pub ell_minus: usize,
    pub zeta: f64,
    pub constraint: StripeConstraint,
}

/// The shipped stripe instances.
pub fn stripe_fixtures() -> Vec<StripeInstance> {
    let base = StripeInstance {
        name: "",
        width: 4,
        beta: 2.0,
        gamma: 0.3,
        vertical_exponent: 2.0,
        ell_minus: 2,
        zeta: 0.3,
        constraint: StripeConstraint::None,
    };
    vec![
        StripeInstance { name: "2x4-free", ..base },
        StripeInstance { name: "2x4-mixed", constraint: StripeConstraint::Mixed, ..base },
        StripeInstance { name: "2x4-aligned", constraint: StripeConstraint::Aligned, ..base },
        StripeInstance { name: "2x8-mixed", width: 8, constraint: StripeConstraint::Mixed, ..base },
        StripeInstance { name: "2x6-mixed-beta3", width: 6, beta: 3.0, gamma: 0.4, vertical_exponent: 1.5, constraint: StripeConstraint::Mixed, ..base },
        StripeInstance { name: "2x10-free-beta1.5", width: 10, beta: 1.5, gamma: 0.25, ..base },
        StripeInstance { name: "2x10-mixed", width: 10, gamma: 0.25, constraint: StripeConstraint::Mixed, ..base },
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterpolationReport {
    pub name: String,
    pub epsilon: f64,
    /// `ln Z(ε) - ln Z(0)`.
    pub lhs: f64,
    /// `β ∫_0^ε Σ_x μ^e(σ(x,0) σ(x,1)) de`.
    pub rhs: f64,
    pub residual: f64,
    pub quadrature_change: f64,
    pub quadrature_intervals: usize,
    pub converged: bool,
    /// Mean of `Σ_x σσ / width` at the endpoints `0` and `ε`.
    pub correlation_endpoints: (f64, f64),
}

impl StripeInstance {
    pub fn epsilon(&self) -> f64 {
        self.gamma.powf(self.vertical_exponent)
    }

    pub fn system(&self, epsilon: f64) -> Result<(LatticeSystem, ConstraintSpec)> {
        let kernel = KacKernel::new(self.gamma)?;
        let vertical = match self.constraint {
            StripeConstraint::Mixed => VerticalBc::MixedDobrushin,
            _ => VerticalBc::Plus,
        };
        let lat = Lattice::new(self.width, 2, HorizontalBc::Plus, vertical, kernel.range())?;
        let mut system = LatticeSystem::all_free(lat, kernel, self.beta, epsilon);
        system.boundary = SpinConfig::uniform(lat, 1);
        let scales = Scales::new(self.ell_minus, self.ell_minus, self.zeta)?;
        let m_beta = solve_mbeta(self.beta).m_beta;
        let blocks = self.width / self.ell_minus;
        let upper = lat.vertical.frozen_layer(true).unwrap_or(1);
        let predicates = match self.constraint {
            StripeConstraint::None => Vec::new(),
            StripeConstraint::Aligned | StripeConstraint::Mixed => {
                let lower = if self.constraint == StripeConstraint::Mixed { -upper } else { upper };
                (0..blocks)
                    .flat_map(|block| {
                        [
                            Predicate::Eta { layer: 1, block, value: upper },
                            Predicate::Eta { layer: 0, block, value: lower },
                        ]
                    })
                    .collect()
            }
        };
        Ok((system, ConstraintSpec::new(scales, m_beta, predicates)))
    }
}

/// Compares `ln Z(ε)/Z(0)`, where only the bonds between the two free
/// layers are interpolated, with `β` times the integral of the exact
/// vertical correlations.
pub fn check_interpolation(inst: &StripeInstance, epsilon: f64, tolerance: f64) -> Result<InterpolationReport> {
    let (base, constraint) = inst.system(epsilon)?;
    let width = inst.width;
    let at = |e: f64| -> Result<(f64, f64)> {
        let mut sys = base.clone();
        sys.inner_epsilon = Some(e);
        let r = enumerate_with(&sys, &constraint, 1, |s, o| {
            o[0] = (0..width).map(|x| (s[x] * s[x + width]) as f64).sum();
        })?;
        Ok((r.log_z, r.means[0]))
    };
    let (log_z1, c1) = at(epsilon)?;
    let (log_z0, c0) = at(0.0)?;
    let lhs = log_z1 - log_z0;
    let failure = std::cell::RefCell::new(None);
    let quad = simpson_converged(
        |e| match at(e) {
            Ok((_, c)) => c,
            Err(err) => {
                failure.borrow_mut().get_or_insert(err);
                f64::NAN
            }
        },
        0.0,
        epsilon,
        tolerance,
        1 << 12,
    );
    if let Some(err) = failure.into_inner() {
        return Err(err);
    }
    let rhs = inst.beta * quad.value;
    Ok(InterpolationReport {
        name: inst.name.to_string(),
        epsilon,
        lhs,
        rhs,
        residual: (lhs - rhs).abs(),
        quadrature_change: inst.beta * quad.last_change,
        quadrature_intervals: quad.intervals,
        converged: inst.beta * quad.last_change <= 1e-8,
        correlation_endpoints: (c0 / width as f64, c1 / width as f64),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_coupling_gives_zero_sides() {
        let inst = stripe_fixtures()[0];
        let r = check_interpolation(&inst, 0.0, 1e-12).unwrap();
        assert_eq!(r.lhs, 0.0);
        assert_eq!(r.rhs, 0.0);
    }

    #[test]
    fn small_stripe_identity() {
        let inst = stripe_fixtures()[0];
        let r = check_interpolation(&inst, inst.epsilon(), 1e-11).unwrap();
        assert!(r.converged);
        assert!(r.residual < 1e-8, "{r:?}");
    }

    #[test]
    fn mixed_stripe_has_negative_log_ratio() {
        let inst = stripe_fixtures()[1];
        let r = check_interpolation(&inst, inst.epsilon(), 1e-11).unwrap();
        assert!(r.lhs < 0.0);
        assert!(r.correlation_endpoints.0 < -0.5);
    }
}
