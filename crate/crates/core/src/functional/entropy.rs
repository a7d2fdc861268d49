use crate::error::{Error, Result};

fn check(m: f64) -> Result<()> {
    if !(-1.0..=1.0).contains(&m) {
        return Err(Error::invalid("m", format!("must lie in [-1, 1], got {m}")));
    }
    Ok(())
}

fn xlnx(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

/// Entropy `I(m)` of a ±1 variable with mean `m`.
pub fn entropy_i(m: f64) -> Result<f64> {
    check(m)?;
    Ok(entropy_unchecked(m))
}

#[inline]
pub(crate) fn entropy_unchecked(m: f64) -> f64 {
    -xlnx((1.0 - m) / 2.0) - xlnx((1.0 + m) / 2.0)
}

/// Mean-field free energy density `f_β(m) = -m²/2 - I(m)/β`.
pub fn fbeta(m: f64, beta: f64) -> Result<f64> {
    check(m)?;
    if !(beta > 0.0) {
        return Err(Error::invalid("beta", format!("must be > 0, got {beta}")));
    }
    Ok(-0.5 * m * m - entropy_unchecked(m) / beta)
}

/// `f_β'(m) = -m + atanh(m)/β`.
pub fn fbeta_derivative(m: f64, beta: f64) -> f64 {
    -m + m.atanh() / beta
}
