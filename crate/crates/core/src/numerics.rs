//! Compensated summation, streaming log-sum-exp and small quadrature helpers.

use std::ops::AddAssign;

/// Kahan-Babuska-Neumaier summator.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct NeumaierSum {
    sum: f64,
    compensation: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }

    pub fn scale(&mut self, factor: f64) {
        self.sum *= factor;
        self.compensation *= factor;
    }

    pub fn merge(&mut self, other: &NeumaierSum) {
        *self += other.sum;
        *self += other.compensation;
    }
}

impl AddAssign<f64> for NeumaierSum {
    #[inline]
    fn add_assign(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }
}

impl FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = NeumaierSum::new();
        for x in iter {
            acc += x;
        }
        acc
    }
}

/// Compensated sum of a slice.
pub fn compensated_sum(values: &[f64]) -> f64 {
    values.iter().copied().collect::<NeumaierSum>().value()
}

/// Streaming accumulator for `log Σ exp(x_k)` and companion weighted sums
/// `Σ exp(x_k) o_k` for a fixed number of observables.
///
/// The running shift is the largest exponent seen so far; every partial sum
/// is stored relative to it so nothing overflows.
#[derive(Debug, Clone)]
pub struct LogSumExp {
    shift: f64,
    total: NeumaierSum,
    weighted: Vec<NeumaierSum>,
    count: u64,
}

impl LogSumExp {
    pub fn new(observables: usize) -> Self {
        Self {
            shift: f64::NEG_INFINITY,
            total: NeumaierSum::new(),
            weighted: vec![NeumaierSum::new(); observables],
            count: 0,
        }
    }

    #[inline]
    fn rescale_to(&mut self, shift: f64) {
        if self.shift > f64::NEG_INFINITY {
            let factor = (self.shift - shift).exp();
            self.total.scale(factor);
            for w in &mut self.weighted {
                w.scale(factor);
            }
        }
        self.shift = shift;
    }

    #[inline]
    pub fn push(&mut self, log_weight: f64) {
        if log_weight > self.shift {
            self.rescale_to(log_weight);
        }
        self.total += (log_weight - self.shift).exp();
        self.count += 1;
    }

    /// Push a term together with its observable values.
    #[inline]
    pub fn push_with(&mut self, log_weight: f64, observables: &[f64]) {
        if log_weight > self.shift {
            self.rescale_to(log_weight);
        }
        let w = (log_weight - self.shift).exp();
        self.total += w;
        for (acc, o) in self.weighted.iter_mut().zip(observables) {
            *acc += w * o;
        }
        self.count += 1;
    }

    /// Fold another accumulator into this one. Merging in a fixed order keeps
    /// the result bit-reproducible.
    pub fn merge(&mut self, other: &LogSumExp) {
        if other.count == 0 {
            return;
        }
        if other.shift > self.shift {
            self.rescale_to(other.shift);
        }
        let factor = (other.shift - self.shift).exp();
        let mut t = other.total;
        t.scale(factor);
        self.total.merge(&t);
        for (acc, o) in self.weighted.iter_mut().zip(&other.weighted) {
            let mut o = *o;
            o.scale(factor);
            acc.merge(&o);
        }
        self.count += other.count;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    /// `log Σ exp(x_k)`; `-inf` when empty.
    pub fn log_sum(&self) -> f64 {
        if self.count == 0 {
            f64::NEG_INFINITY
        } else {
            self.shift + self.total.value().ln()
        }
    }

    /// Weighted mean `Σ e^{x_k} o_k / Σ e^{x_k}` of observable `j`.
    pub fn mean(&self, j: usize) -> f64 {
        self.weighted[j].value() / self.total.value()
    }
}

/// Composite Simpson rule with `intervals` (rounded up to even) panels.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, intervals: usize) -> f64 {
    let n = intervals.max(2) + intervals % 2;
    let h = (b - a) / n as f64;
    let mut acc = NeumaierSum::new();
    acc += f(a);
    acc += f(b);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + k as f64 * h);
    }
    acc.value() * h / 3.0
}

/// Result of [`simpson_converged`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    /// |S(n) - S(n/2)| at the final refinement.
    pub last_change: f64,
    pub intervals: usize,
    pub converged: bool,
}

/// Simpson quadrature, doubling the panel count until two successive
/// estimates differ by less than `tol` or `max_intervals` is reached.
pub fn simpson_converged<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    tol: f64,
    max_intervals: usize,
) -> Quadrature {
    let mut n = 2;
    let mut prev = simpson(&f, a, b, n);
    loop {
        n *= 2;
        let cur = simpson(&f, a, b, n);
        let change = (cur - prev).abs();
        if change < tol || n >= max_intervals {
            return Quadrature {
                value: cur,
                last_change: change,
                intervals: n,
                converged: change < tol,
            };
        }
        prev = cur;
    }
}

/// Largest power of two nearest to `x` in log scale (at least 1).
pub fn round_to_power_of_two(x: f64) -> usize {
    if x <= 1.0 {
        return 1;
    }
    let e = x.log2().round() as u32;
    1usize << e
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neumaier_recovers_cancelled_terms() {
        let values = [1.0, 1e100, 1.0, -1e100];
        assert_eq!(compensated_sum(&values), 2.0);
        let naive: f64 = values.iter().sum();
        assert_eq!(naive, 0.0);
    }

    #[test]
    fn log_sum_exp_matches_direct_and_merges() {
        let xs: Vec<f64> = (0..50).map(|k| (k as f64 * 0.37).sin() * 20.0).collect();
        let direct = xs.iter().map(|x| x.exp()).sum::<f64>().ln();
        let mut acc = LogSumExp::new(0);
        for &x in &xs {
            acc.push(x);
        }
        assert!((acc.log_sum() - direct).abs() < 1e-12);

        let mut left = LogSumExp::new(0);
        let mut right = LogSumExp::new(0);
        for (k, &x) in xs.iter().enumerate() {
            if k < 20 {
                left.push(x)
            } else {
                right.push(x)
            }
        }
        left.merge(&right);
        assert!((left.log_sum() - direct).abs() < 1e-12);
        assert_eq!(left.count(), 50);
    }

    #[test]
    fn weighted_mean() {
        let mut acc = LogSumExp::new(1);
        acc.push_with(0.0, &[1.0]);
        acc.push_with(0.0, &[-1.0]);
        acc.push_with(2.0_f64.ln(), &[1.0]);
        assert!((acc.mean(0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn simpson_is_exact_on_cubics() {
        let v = simpson(|x| x * x * x - 2.0 * x, 0.0, 2.0, 2);
        assert!((v - 0.0).abs() < 1e-14);
        let q = simpson_converged(|x: f64| x.exp(), 0.0, 1.0, 1e-12, 1 << 16);
        assert!(q.converged);
        assert!((q.value - (1f64.exp() - 1.0)).abs() < 1e-11);
    }

    #[test]
    fn power_of_two_rounding() {
        assert_eq!(round_to_power_of_two(8.06), 8);
        assert_eq!(round_to_power_of_two(5.5), 4);
        assert_eq!(round_to_power_of_two(6.0), 8);
        assert_eq!(round_to_power_of_two(0.3), 1);
    }
}
