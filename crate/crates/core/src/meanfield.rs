//! Mean-field equation `m = tanh(βm)` and the map `t_β`.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanFieldSolution {
    pub beta: f64,
    pub m_beta: f64,
    pub residual: f64,
}

/// Largest nonnegative root of `m = tanh(βm)` by bisection on
/// `tanh(βm) - m` over `[1e-9, 1]`; zero for `β <= 1`.
pub fn solve_mbeta(beta: f64) -> MeanFieldSolution {
    assert!(beta > 0.0, "beta must be positive");
    let g = |m: f64| (beta * m).tanh() - m;
    let (mut lo, mut hi) = (1e-9, 1.0);
    if beta <= 1.0 || g(lo) <= 0.0 {
        return MeanFieldSolution {
            beta,
            m_beta: 0.0,
            residual: 0.0,
        };
    }
    while hi - lo > 1e-15 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if mid == lo && mid == hi {
            break;
        }
    }
    let m = 0.5 * (lo + hi);
    MeanFieldSolution {
        beta,
        m_beta: m,
        residual: g(m).abs(),
    }
}

/// `t_β(x) = tanh(βx)`.
pub fn tbeta(x: f64, beta: f64) -> f64 {
    (beta * x).tanh()
}

/// `t_β'(x) = β(1 - tanh²(βx))`.
pub fn tbeta_derivative(x: f64, beta: f64) -> f64 {
    let t = (beta * x).tanh();
    beta * (1.0 - t * t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subcritical_and_critical_vanish() {
        for beta in [0.3, 0.8, 1.0] {
            assert_eq!(solve_mbeta(beta).m_beta, 0.0);
        }
    }

    #[test]
    fn reference_roots() {
        // frozen from an independent Brent root-finder run at xtol 1e-15
        let s = solve_mbeta(2.0);
        assert!((s.m_beta - 0.957_504_024_077_268_8).abs() < 1e-12);
        assert!(s.residual < 1e-12);
        let s = solve_mbeta(1.5);
        assert!((s.m_beta - 0.858_559_636_640_110_3).abs() < 1e-12);
    }

    #[test]
    fn derivative_contracts_at_root() {
        let m = solve_mbeta(2.0).m_beta;
        let d = tbeta_derivative(m, 2.0);
        assert!(d < 1.0);
        assert!((d - 0.166_372_087_751_674_3).abs() < 1e-9);
        assert_eq!(tbeta(0.0, 2.0), 0.0);
        for x in [0.1, 0.5, 2.0] {
            assert_eq!(tbeta(-x, 1.7), -tbeta(x, 1.7));
        }
    }

    #[test]
    fn fixed_point_is_stable() {
        for beta in [1.2, 2.0, 3.0] {
            let m = solve_mbeta(beta).m_beta;
            for k in 1..=20 {
                let delta = k as f64 * 1e-3;
                assert!(tbeta(m + delta, beta) < m + delta);
                assert!(tbeta(m - delta, beta) > m - delta);
            }
        }
    }

    #[test]
    fn monotone_in_beta() {
        let mut prev = 0.0;
        for k in 0..=80 {
            let beta = 1.05 + k as f64 * 0.05;
            let m = solve_mbeta(beta).m_beta;
            assert!(m > prev);
            prev = m;
        }
    }
}
