//! Statistical machinery for the Monte Carlo verifiers: exact binomial
//! confidence intervals, two-proportion tolerances, and the two-sample
//! Kolmogorov-Smirnov distance.

use statrs::function::beta::beta_reg;

/// Two-sided 99% standard normal quantile z_{0.995}.
///
/// Frozen rather than computed: it is a fixed mathematical constant and the
/// verification margins must not drift with a dependency's quantile solver.
pub const Z_995: f64 = 2.5758293035488986;

/// Standard normal CDF.
pub fn standard_normal_cdf(x: f64) -> f64 {
    0.5 * (1.0 + statrs::function::erf::erf(x / std::f64::consts::SQRT_2))
}

/// Inverse of the regularized incomplete beta function I_x(a, b) = q,
/// by bisection driven to f64 resolution.
///
/// Bisection rather than a library quantile: the intervals here sit at
/// probabilities of 1e-5 and below, where a fixed-tolerance solver's
/// absolute error dwarfs the answer. I_x is monotone in x, so halving
/// until the midpoint collides with an endpoint is exact to one ulp,
/// at ~60 incomplete-beta evaluations.
fn beta_inv_reg(a: f64, b: f64, q: f64) -> f64 {
    debug_assert!(a > 0.0 && b > 0.0 && (0.0..=1.0).contains(&q));
    if q <= 0.0 {
        return 0.0;
    }
    if q >= 1.0 {
        return 1.0;
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return mid;
        }
        if beta_reg(a, b, mid) < q {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

/// Exact (Clopper-Pearson) two-sided confidence interval for a binomial
/// proportion with `successes` out of `trials` at confidence `level`.
///
/// The bounds are the usual beta quantiles; the interval is conservative,
/// which is the right direction for soundness checks against upper bounds.
pub fn clopper_pearson(successes: u64, trials: u64, level: f64) -> (f64, f64) {
    assert!(trials > 0, "clopper_pearson needs at least one trial");
    assert!(successes <= trials);
    assert!((0.0..1.0).contains(&(1.0 - level)) && level > 0.0);
    let alpha = 1.0 - level;
    let k = successes as f64;
    let n = trials as f64;
    // the end cases have closed forms: (alpha/2)^(1/n) and its mirror,
    // computed via expm1 so tiny tails keep their precision
    let lo = if successes == 0 {
        0.0
    } else if successes == trials {
        ((alpha / 2.0).ln() / n).exp()
    } else {
        beta_inv_reg(k, n - k + 1.0, alpha / 2.0)
    };
    let hi = if successes == trials {
        1.0
    } else if successes == 0 {
        -((alpha / 2.0).ln() / n).exp_m1()
    } else {
        beta_inv_reg(k + 1.0, n - k, 1.0 - alpha / 2.0)
    };
    (lo, hi)
}

/// Normal-approximation margin for the difference of two independent
/// proportions, at the given z quantile.
pub fn two_proportion_margin(p1: f64, n1: u64, p2: f64, n2: u64, z: f64) -> f64 {
    let v1 = p1 * (1.0 - p1) / n1 as f64;
    let v2 = p2 * (1.0 - p2) / n2 as f64;
    z * (v1 + v2).sqrt()
}

/// Two-sample Kolmogorov-Smirnov statistic sup_x |F_a(x) - F_b(x)|.
/// Sorts both samples in place.
pub fn ks_statistic(a: &mut [f64], b: &mut [f64]) -> f64 {
    assert!(!a.is_empty() && !b.is_empty());
    a.sort_unstable_by(|x, y| x.partial_cmp(y).expect("no NaN in KS input"));
    b.sort_unstable_by(|x, y| x.partial_cmp(y).expect("no NaN in KS input"));
    let (n, m) = (a.len(), b.len());
    let mut i = 0usize;
    let mut j = 0usize;
    let mut d = 0.0f64;
    while i < n && j < m {
        let x = a[i].min(b[j]);
        while i < n && a[i] <= x {
            i += 1;
        }
        while j < m && b[j] <= x {
            j += 1;
        }
        let diff = (i as f64 / n as f64 - j as f64 / m as f64).abs();
        if diff > d {
            d = diff;
        }
    }
    d
}

/// Asymptotic two-sample KS critical value at significance `alpha`:
/// c(alpha) * sqrt((n + m) / (n m)) with c(alpha) = sqrt(-ln(alpha/2) / 2).
pub fn ks_critical_value(n: usize, m: usize, alpha: f64) -> f64 {
    assert!(alpha > 0.0 && alpha < 1.0);
    let c = (-(alpha / 2.0).ln() / 2.0).sqrt();
    c * ((n + m) as f64 / (n as f64 * m as f64)).sqrt()
}
