use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::round_to_power_of_two;

/// Scalar parameters of the layered Kac model.
///
/// Only the five inputs are stored; the block lengths, accuracy, vertical
/// coupling and interaction range are derived on demand.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct ModelParams {
    beta: f64,
    gamma: f64,
    vertical_exponent: f64,
    alpha: f64,
    accuracy: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawParams {
    pub beta: f64,
    pub gamma: f64,
    #[serde(rename = "A")]
    pub vertical_exponent: f64,
    pub alpha: f64,
    pub a: f64,
}

impl TryFrom<RawParams> for ModelParams {
    type Error = Error;

    fn try_from(raw: RawParams) -> Result<Self> {
        ModelParams::new(raw.beta, raw.gamma, raw.vertical_exponent, raw.alpha, raw.a)
    }
}

impl From<ModelParams> for RawParams {
    fn from(p: ModelParams) -> Self {
        RawParams {
            beta: p.beta,
            gamma: p.gamma,
            vertical_exponent: p.vertical_exponent,
            alpha: p.alpha,
            a: p.accuracy,
        }
    }
}

impl ModelParams {
    /// Validate and build. `vertical_exponent` is `A` in `ε = γ^A`,
    /// `accuracy` is `a` in `ζ = γ^a`.
    pub fn new(
        beta: f64,
        gamma: f64,
        vertical_exponent: f64,
        alpha: f64,
        accuracy: f64,
    ) -> Result<Self> {
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::invalid("beta", format!("must be > 0, got {beta}")));
        }
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(Error::invalid(
                "gamma",
                format!("must lie in (0, 1), got {gamma}"),
            ));
        }
        if !(vertical_exponent.is_finite() && vertical_exponent >= 2.0) {
            return Err(Error::invalid(
                "A",
                format!("must be >= 2, got {vertical_exponent}"),
            ));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::invalid(
                "alpha",
                format!("must lie in (0, 1), got {alpha}"),
            ));
        }
        if !(accuracy > 0.0 && accuracy < alpha) {
            return Err(Error::invalid(
                "a",
                format!("scale ordering requires 0 < a < alpha < 1, got a = {accuracy}, alpha = {alpha}"),
            ));
        }
        let p = ModelParams {
            beta,
            gamma,
            vertical_exponent,
            alpha,
            accuracy,
        };
        if p.kac_range() < 2 {
            return Err(Error::invalid("gamma", "kernel range below two sites"));
        }
        // Rounding each length moves it by at most sqrt(2); the ratio must stay
        // within a factor 4 of gamma^(-2 alpha).
        let ratio = (p.ell_plus() as f64 / p.ell_minus() as f64) / gamma.powf(-2.0 * alpha);
        if !(0.25..=4.0).contains(&ratio) {
            return Err(Error::invalid(
                "alpha",
                format!("power-of-two rounding distorts l+/l- by a factor {ratio:.3}"),
            ));
        }
        Ok(p)
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn vertical_exponent(&self) -> f64 {
        self.vertical_exponent
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn accuracy(&self) -> f64 {
        self.accuracy
    }

    /// Copy with a different inverse temperature.
    pub fn with_beta(&self, beta: f64) -> Result<Self> {
        Self::new(beta, self.gamma, self.vertical_exponent, self.alpha, self.accuracy)
    }

    pub fn ell_plus(&self) -> usize {
        round_to_power_of_two(self.gamma.powf(-(1.0 + self.alpha)))
    }

    pub fn ell_minus(&self) -> usize {
        round_to_power_of_two(self.gamma.powf(-(1.0 - self.alpha)))
    }

    pub fn zeta(&self) -> f64 {
        self.gamma.powf(self.accuracy)
    }

    /// Vertical coupling `γ^A`.
    pub fn epsilon(&self) -> f64 {
        self.gamma.powf(self.vertical_exponent)
    }

    /// `ceil(1/γ)`: offsets with `|d| >= kac_range` do not interact.
    pub fn kac_range(&self) -> usize {
        (1.0 / self.gamma).ceil() as usize
    }

    pub fn scales(&self) -> Scales {
        Scales {
            ell_minus: self.ell_minus(),
            ell_plus: self.ell_plus(),
            zeta: self.zeta(),
        }
    }
}

/// The coarse-graining lengths and accuracy.
///
/// Normally derived from [`ModelParams`]; exact enumeration sets them
/// directly ("shrunk" scales) so that blocks fit in tiny volumes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scales {
    pub ell_minus: usize,
    pub ell_plus: usize,
    pub zeta: f64,
}

impl Scales {
    pub fn new(ell_minus: usize, ell_plus: usize, zeta: f64) -> Result<Self> {
        if !ell_minus.is_power_of_two() {
            return Err(Error::invalid("ell_minus", format!("{ell_minus} is not a power of two")));
        }
        if !ell_plus.is_power_of_two() || ell_plus < ell_minus {
            return Err(Error::invalid(
                "ell_plus",
                format!("{ell_plus} must be a power of two and >= ell_minus = {ell_minus}"),
            ));
        }
        if !(zeta > 0.0 && zeta.is_finite()) {
            return Err(Error::invalid("zeta", format!("must be > 0, got {zeta}")));
        }
        Ok(Scales {
            ell_minus,
            ell_plus,
            zeta,
        })
    }

    /// Number of ℓ- blocks in one ℓ+ block.
    pub fn minus_per_plus(&self) -> usize {
        self.ell_plus / self.ell_minus
    }
}
