//! Log-domain arithmetic helpers.
//!
//! Tail bounds are evaluated as logarithms because their interesting values
//! sit far below `f64::MIN_POSITIVE`. Sums of bounds therefore need
//! log-sum-exp, implemented with the usual max shift so no intermediate
//! exponential can overflow.

/// ln(exp(a) + exp(b)) without leaving log space.
///
/// `f64::NEG_INFINITY` is the additive identity: logsumexp(-inf, b) == b.
pub fn logsumexp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// ln(sum_i exp(xs[i])) over a slice; NEG_INFINITY for an empty slice.
pub fn logsumexp_slice(xs: &[f64]) -> f64 {
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let sum: f64 = xs.iter().map(|&x| (x - hi).exp()).sum();
    hi + sum.ln()
}

/// Streaming log-sum-exp accumulator for sums too long to buffer.
#[derive(Debug, Clone, Copy)]
pub struct LogSumAcc {
    hi: f64,
    /// sum of exp(x - hi) over absorbed terms
    scaled: f64,
}

impl LogSumAcc {
    pub fn new() -> Self {
        LogSumAcc {
            hi: f64::NEG_INFINITY,
            scaled: 0.0,
        }
    }

    pub fn add(&mut self, x: f64) {
        if x == f64::NEG_INFINITY {
            return;
        }
        if x <= self.hi {
            self.scaled += (x - self.hi).exp();
        } else {
            // rescale existing mass to the new maximum
            self.scaled = self.scaled * (self.hi - x).exp() + 1.0;
            self.hi = x;
        }
    }

    /// Merge another accumulator (associative, used by parallel reductions).
    pub fn merge(&mut self, other: &LogSumAcc) {
        if other.hi == f64::NEG_INFINITY {
            return;
        }
        if other.hi <= self.hi {
            self.scaled += other.scaled * (other.hi - self.hi).exp();
        } else {
            self.scaled = self.scaled * (self.hi - other.hi).exp() + other.scaled;
            self.hi = other.hi;
        }
    }

    pub fn log_sum(&self) -> f64 {
        if self.hi == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.hi + self.scaled.ln()
        }
    }
}

impl Default for LogSumAcc {
    fn default() -> Self {
        Self::new()
    }
}

/// Sample mean and unbiased variance. Returns (0, 0) for an empty slice.
pub fn mean_variance(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (0.0, 0.0);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let ss = xs.iter().map(|&x| (x - mean) * (x - mean)).sum::<f64>();
    (mean, ss / (n as f64 - 1.0))
}
