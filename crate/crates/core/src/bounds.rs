//! Closed-form tail bounds for the two-agent difference process.
//!
//! Two regimes are covered, matching the two stability classes of the
//! dynamics:
//!
//! * **Bounded noise, slowly decaying influence** (G(x) = B/(1 + x^(1-δ)),
//!   noise supported on [-D, D]): a single Chernoff step with the tilt λ
//!   chosen from the horizon gives
//!   `P(|Y(t)| >= k) <= 2 (γ(λ)/α + 1) exp(-λ k)`.
//! * **Sub-Gaussian noise, faster-decaying influence**
//!   (G(x) = B/(1 + x^(2-δ))): the process is first confined to a growing
//!   envelope d_τ = D τ^(1/2+β'), contributing a walk-style failure term,
//!   and the confined process is then tilted, giving
//!   `P(|Y(t)| >= k) <= 2 (t - h) exp(-c' h^(2β'))
//!    + 2 [exp(λ²σ²h/2) + γ(λ)/α] exp(-λ k)` with h = floor(t^ζ).
//!
//! Everything is evaluated in log space: the interesting regime of these
//! bounds (say t = 10^40) is far below `f64::MIN_POSITIVE` and far above
//! what naive arithmetic survives. The γ(λ)·(1-G) cancellation in the
//! rigorous α' is likewise rearranged so no catastrophic subtraction occurs.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::math::{logsumexp, LogSumAcc};
use crate::model::{InfluenceSpec, NoiseSpec};
use crate::Result;

const LN_2: f64 = std::f64::consts::LN_2;

/// Decay regime a tail query targets, with its regime-specific exponents.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Regime {
    /// Influence G(x) = B/(1 + x^(1-δ)) with noise bounded in [-D, D].
    BoundedNoise { delta: f64 },
    /// Influence G(x) = B/(1 + x^(2-δ)) with sub-Gaussian noise.
    SubGaussian {
        delta: f64,
        beta_prime: f64,
        zeta: f64,
    },
}

/// A tail event: does |Y(t)| reach k = c * t^(1/2 - β)?
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TailQuery {
    /// Time of the query. Integer-valued; kept as f64 because bound sweeps
    /// go far beyond u64 range.
    pub t: f64,
    pub c: f64,
    pub beta: f64,
    pub regime: Regime,
}

impl TailQuery {
    /// The queried threshold k = c * t^(1/2 - β).
    pub fn threshold(&self) -> f64 {
        self.c * self.t.powf(0.5 - self.beta)
    }

    /// Structural validation (finiteness and positivity); regime windows
    /// are checked separately because only the bound evaluators need them.
    pub fn validate(&self) -> Result<()> {
        if !(self.t.is_finite() && self.t >= 1.0) {
            return Err(Error::config(format!("query t must be >= 1, got {}", self.t)));
        }
        // c = 0 (threshold k = 0) is structurally fine: estimators answer it
        // trivially; only the bound evaluators insist on c > 0
        if !(self.c.is_finite() && self.c >= 0.0) {
            return Err(Error::config(format!("query c must be >= 0, got {}", self.c)));
        }
        if !(self.beta.is_finite() && self.beta > 0.0) {
            return Err(Error::config(format!(
                "query beta must be > 0, got {}",
                self.beta
            )));
        }
        match self.regime {
            Regime::BoundedNoise { delta } => {
                if !delta.is_finite() {
                    return Err(Error::config("delta must be finite"));
                }
            }
            Regime::SubGaussian {
                delta,
                beta_prime,
                zeta,
            } => {
                if !(delta.is_finite() && beta_prime.is_finite() && zeta.is_finite()) {
                    return Err(Error::config("regime parameters must be finite"));
                }
            }
        }
        Ok(())
    }

    /// Full validity-window check for the regime the query targets.
    /// Violations name the failed inequality.
    pub fn validate_regime(&self) -> Result<()> {
        self.validate()?;
        if self.c == 0.0 {
            return Err(Error::config("bound evaluation needs c > 0"));
        }
        match self.regime {
            Regime::BoundedNoise { delta } => {
                if !(delta > 0.0 && delta <= 1.0) {
                    return Err(Error::regime("0 < δ ≤ 1", format!("got δ = {delta}")));
                }
                if !(self.beta < delta / 2.0) {
                    return Err(Error::regime(
                        "β < δ/2",
                        format!("got β = {}, δ = {delta}", self.beta),
                    ));
                }
            }
            Regime::SubGaussian {
                delta,
                beta_prime,
                zeta,
            } => {
                if !(delta > 0.0 && delta < 2.0) {
                    return Err(Error::regime("0 < δ < 2", format!("got δ = {delta}")));
                }
                if !(self.beta < delta / 4.0) {
                    return Err(Error::regime(
                        "β < δ/4",
                        format!("got β = {}, δ = {delta}", self.beta),
                    ));
                }
                if !(zeta > 0.0 && zeta < 1.0 - delta / 2.0) {
                    return Err(Error::regime(
                        "0 < ζ < 1 − δ/2",
                        format!("got ζ = {zeta}, δ = {delta}"),
                    ));
                }
                let lo = (delta / 4.0 - self.beta) / (3.0 - 1.5 * delta);
                let hi = (delta / 4.0 - self.beta) / (1.0 - 0.5 * delta);
                if !(beta_prime > lo && beta_prime < hi) {
                    return Err(Error::regime(
                        "β′ ∈ ((δ/4−β)/(3−3δ/2), (δ/4−β)/(1−δ/2))",
                        format!("got β′ = {beta_prime}, window is ({lo}, {hi})"),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Chernoff tilt and the constants that accompany it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChernoffParams {
    /// Tilt λ.
    pub lambda: f64,
    /// Printed contraction constant α.
    pub alpha: f64,
    /// Second-order Taylor proxy 1 + λ²s²/2 for the noise MGF.
    pub gamma_taylor: f64,
    /// Full MGF bound exp(λ²s²/2); always a true upper bound.
    pub gamma_exp: f64,
    /// Contraction constant α' = 1 - γ(λ)(1 - G(D t)) that makes the
    /// geometric-sum step airtight at finite t (bounded regime only).
    /// May be nonpositive, in which case the rigorous variant is vacuous.
    pub alpha_effective: Option<f64>,
}

impl ChernoffParams {
    /// Value of exp(λ²s²/2), the certified noise MGF bound at the tilt.
    pub fn mgf_bound(&self) -> f64 {
        self.gamma_exp
    }
}

fn check_common(b: f64, d: f64, t: f64) -> Result<()> {
    if !(b.is_finite() && b > 0.0 && b <= 1.0) {
        return Err(Error::config(format!("B must lie in (0, 1], got {b}")));
    }
    if !(d.is_finite() && d > 0.0) {
        return Err(Error::config(format!("D must be > 0, got {d}")));
    }
    if !(t.is_finite() && t >= 1.0) {
        return Err(Error::config(format!("t must be >= 1, got {t}")));
    }
    Ok(())
}

/// Tilt selection for the bounded-noise regime.
///
/// With q = 1 + (D t)^(1-δ): λ = (1/D) sqrt(B / (q - B)), α = B / (2 q).
/// λ is exactly the tilt that makes the Taylor identity
/// (1 + λ²D²/2)(1 - G(D t)) = 1 - α hold, and α' replaces the Taylor proxy
/// by the full exponential so that γ(λ)(1 - G(D t)) = 1 - α' exactly.
pub fn chernoff_bounded(b: f64, d: f64, delta: f64, t: f64) -> Result<ChernoffParams> {
    check_common(b, d, t)?;
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::regime("0 < δ ≤ 1", format!("got δ = {delta}")));
    }
    let q = 1.0 + (d * t).powf(1.0 - delta);
    if !(q > b) {
        return Err(Error::regime(
            "1 + (D t)^(1−δ) > B",
            format!("got q = {q}, B = {b}"),
        ));
    }
    let lambda = (b / (q - b)).sqrt() / d;
    let alpha = b / (2.0 * q);
    let x = lambda * lambda * d * d / 2.0;
    let g_at_dt = b / q;
    // 1 - e^x (1 - G) rearranged as G e^x - (e^x - 1): the direct form
    // cancels to zero in f64 once x and G drop below ~1e-16
    let alpha_effective = g_at_dt * x.exp() - x.exp_m1();
    let params = ChernoffParams {
        lambda,
        alpha,
        gamma_taylor: 1.0 + x,
        gamma_exp: x.exp(),
        alpha_effective: Some(alpha_effective),
    };
    if alpha_effective > 0.0 {
        // e^x >= 1 + x makes α' <= α a theorem; allow rounding ties
        assert!(
            alpha_effective <= alpha * (1.0 + 1e-12),
            "effective alpha {alpha_effective} exceeded printed alpha {alpha}"
        );
    }
    Ok(params)
}

/// Tilt selection for the sub-Gaussian regime.
///
/// With the envelope d_t = D t^(1/2+β') and q = 1 + d_t^(2-δ):
/// λ = (1/σ) sqrt(B / (q - B)), α = B / (2 q).
pub fn chernoff_subgaussian(
    b: f64,
    sigma: f64,
    d: f64,
    delta: f64,
    beta_prime: f64,
    t: f64,
) -> Result<ChernoffParams> {
    check_common(b, d, t)?;
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::config(format!("sigma must be > 0, got {sigma}")));
    }
    if !(delta > 0.0 && delta < 2.0) {
        return Err(Error::regime("0 < δ < 2", format!("got δ = {delta}")));
    }
    if !(beta_prime.is_finite() && beta_prime > 0.0) {
        return Err(Error::config(format!(
            "beta_prime must be > 0, got {beta_prime}"
        )));
    }
    let d_t = d * t.powf(0.5 + beta_prime);
    let q = 1.0 + d_t.powf(2.0 - delta);
    if !(q > b) {
        return Err(Error::regime(
            "1 + d_t^(2−δ) > B",
            format!("got q = {q}, B = {b}"),
        ));
    }
    let lambda = (b / (q - b)).sqrt() / sigma;
    let x = lambda * lambda * sigma * sigma / 2.0;
    Ok(ChernoffParams {
        lambda,
        alpha: b / (2.0 * q),
        gamma_taylor: 1.0 + x,
        gamma_exp: x.exp(),
        alpha_effective: None,
    })
}

/// Which form of the bounded-regime prefactor to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundVariant {
    /// As printed: Taylor γ = 1 + λ²D²/2 with the matching α. Asymptotically
    /// exact, but the Taylor step is only an approximation at finite t.
    Taylor,
    /// Full γ = exp(λ²D²/2) with the effective α' = 1 - γ(1 - G(D t)):
    /// a certified upper bound at every finite t (α' < α, so it is never
    /// smaller than the printed form).
    Rigorous,
}

/// A fully evaluated bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundEvaluation {
    /// ln of the bound; `f64::INFINITY` when the variant is infeasible.
    pub log_bound: f64,
    /// ln of the dominant-structure terms; their log-sum-exp is `log_bound`.
    pub log_term1: f64,
    pub log_term2: f64,
    /// The contraction constant actually used in the prefactor.
    pub effective_alpha: f64,
    /// True when the bound is >= 1 and says nothing.
    pub vacuous: bool,
    /// Threshold k the bound was evaluated at.
    pub threshold: f64,
    pub params: ChernoffParams,
}

impl BoundEvaluation {
    /// The bound as a probability, clamped to [0, 1].
    pub fn probability(&self) -> f64 {
        self.log_bound.exp().min(1.0)
    }
}

/// Bounded-regime bound at an explicit threshold k (hidden: the public entry
/// derives k from the query; tests exercise degenerate thresholds directly).
#[doc(hidden)]
pub fn bounded_log_terms(
    params: &ChernoffParams,
    variant: BoundVariant,
    k: f64,
) -> (f64, f64, f64, f64) {
    let (gamma, alpha) = match variant {
        BoundVariant::Taylor => (params.gamma_taylor, params.alpha),
        BoundVariant::Rigorous => (
            params.gamma_exp,
            params.alpha_effective.expect("bounded params carry alpha'"),
        ),
    };
    if alpha <= 0.0 {
        return (f64::INFINITY, f64::INFINITY, f64::INFINITY, alpha);
    }
    // 2 (gamma/alpha) e^{-lambda k}  and  2 e^{-lambda k}
    let log_term1 = LN_2 + gamma.ln() - alpha.ln() - params.lambda * k;
    let log_term2 = LN_2 - params.lambda * k;
    (logsumexp(log_term1, log_term2), log_term1, log_term2, alpha)
}

/// Evaluate the bounded-noise tail bound 2 (γ(λ)/α + 1) exp(-λ k) at the
/// query's (t, k).
///
/// Errors when the query's regime window is violated (naming the failed
/// inequality) or when the model constants are out of range. An infeasible
/// rigorous prefactor (α' <= 0) is not an error: the evaluation comes back
/// with `log_bound = +inf` and `vacuous` set.
pub fn bound_bounded_noise(
    query: &TailQuery,
    b: f64,
    d: f64,
    variant: BoundVariant,
) -> Result<BoundEvaluation> {
    let delta = match query.regime {
        Regime::BoundedNoise { delta } => delta,
        Regime::SubGaussian { .. } => {
            return Err(Error::config(
                "query targets the sub-Gaussian regime; use bound_subgaussian",
            ))
        }
    };
    query.validate_regime()?;
    let params = chernoff_bounded(b, d, delta, query.t)?;
    let k = query.threshold();
    let (log_bound, log_term1, log_term2, alpha_used) = bounded_log_terms(&params, variant, k);
    Ok(BoundEvaluation {
        log_bound,
        log_term1,
        log_term2,
        effective_alpha: alpha_used,
        vacuous: !(log_bound < 0.0),
        threshold: k,
        params,
    })
}

/// Sub-Gaussian bound terms at raw parameters, skipping the validity-window
/// checks (hidden: used by the public entry and by diagnostics that need to
/// evaluate outside the window).
#[doc(hidden)]
pub fn subgaussian_log_terms(
    b: f64,
    sigma: f64,
    d: f64,
    delta: f64,
    beta: f64,
    beta_prime: f64,
    zeta: f64,
    c: f64,
    t: f64,
) -> Result<(f64, f64, f64, ChernoffParams, f64)> {
    let params = chernoff_subgaussian(b, sigma, d, delta, beta_prime, t)?;
    let h = t.powf(zeta).floor().max(1.0);
    let c_prime = d * d / (2.0 * sigma * sigma);
    let k = c * t.powf(0.5 - beta);
    let log_term1 = if t - h > 0.0 {
        LN_2 + (t - h).ln() - c_prime * h.powf(2.0 * beta_prime)
    } else {
        f64::NEG_INFINITY
    };
    let lam_sq_sig_sq = params.lambda * params.lambda * sigma * sigma;
    // 2 [exp(λ²σ²h/2) + γ/α] e^{-λk}, summed in log space
    let log_confined_mgf = lam_sq_sig_sq * h / 2.0;
    let log_gamma_over_alpha = lam_sq_sig_sq / 2.0 - params.alpha.ln();
    let log_term2 =
        LN_2 + logsumexp(log_confined_mgf, log_gamma_over_alpha) - params.lambda * k;
    Ok((log_term1, log_term2, k, params, h))
}

/// Evaluate the sub-Gaussian tail bound
/// 2 (t - h) exp(-c' h^(2β')) + 2 [exp(λ²σ²h/2) + γ(λ)/α] exp(-λ k)
/// with h = floor(t^ζ) (at least 1) and c' = D²/(2σ²).
///
/// The regime window (β < δ/4, 0 < ζ < 1 - δ/2, and the β' interval) is
/// enforced; violations name the inequality.
pub fn bound_subgaussian(
    query: &TailQuery,
    b: f64,
    sigma: f64,
    d: f64,
) -> Result<BoundEvaluation> {
    let (delta, beta_prime, zeta) = match query.regime {
        Regime::SubGaussian {
            delta,
            beta_prime,
            zeta,
        } => (delta, beta_prime, zeta),
        Regime::BoundedNoise { .. } => {
            return Err(Error::config(
                "query targets the bounded-noise regime; use bound_bounded_noise",
            ))
        }
    };
    query.validate_regime()?;
    let (log_term1, log_term2, k, params, _h) = subgaussian_log_terms(
        b, sigma, d, delta, query.beta, beta_prime, zeta, query.c, query.t,
    )?;
    let log_bound = logsumexp(log_term1, log_term2);
    Ok(BoundEvaluation {
        log_bound,
        log_term1,
        log_term2,
        effective_alpha: params.alpha,
        vacuous: !(log_bound < 0.0),
        threshold: k,
        params,
    })
}

/// Log of the finite union bound sum_{τ = t}^{t_max} bound(τ), where each
/// summand is the regime bound at the query's (c, β) evaluated at time τ.
///
/// The sum runs over every integer time in [t, t_max]; cost is linear in
/// the range, so enumerable ranges must stay below 2^53 (and practically
/// far smaller). The log-sum-exp accumulation keeps the result finite even
/// when individual summands underflow.
pub fn envelope_union_bound(
    query: &TailQuery,
    b: f64,
    sigma: f64,
    d: f64,
    t_max: f64,
    variant: BoundVariant,
) -> Result<f64> {
    query.validate_regime()?;
    if !(t_max >= query.t) {
        return Err(Error::config(format!(
            "t_max must be >= t, got t = {}, t_max = {t_max}",
            query.t
        )));
    }
    const MAX_ENUMERABLE: f64 = 9_007_199_254_740_992.0; // 2^53
    if query.t.fract() != 0.0 || t_max.fract() != 0.0 || t_max >= MAX_ENUMERABLE {
        return Err(Error::config(
            "envelope summation enumerates integer times and needs t, t_max integral \
             and below 2^53",
        ));
    }
    let mut acc = LogSumAcc::new();
    let mut tau = query.t;
    while tau <= t_max {
        let q_tau = TailQuery { t: tau, ..*query };
        let eval = match query.regime {
            Regime::BoundedNoise { .. } => bound_bounded_noise(&q_tau, b, d, variant)?,
            Regime::SubGaussian { .. } => bound_subgaussian(&q_tau, b, sigma, d)?,
        };
        acc.add(eval.log_bound);
        tau += 1.0;
    }
    Ok(acc.log_sum())
}

/// Log of the comparator-walk tail bound 2 exp(-k² / (2 σ² t)), where σ² is
/// the sub-Gaussian parameter of the difference noise.
pub fn baseline_walk_tail_log(noise: &NoiseSpec, t: f64, k: f64) -> Result<f64> {
    noise.validate()?;
    if !(t.is_finite() && t >= 1.0) {
        return Err(Error::config(format!("t must be >= 1, got {t}")));
    }
    if !(k.is_finite() && k >= 0.0) {
        return Err(Error::config(format!("k must be >= 0, got {k}")));
    }
    let var = noise.subgaussian_parameter();
    if var == 0.0 {
        // noiseless walk never leaves the origin
        return Ok(if k == 0.0 { LN_2 } else { f64::NEG_INFINITY });
    }
    Ok(LN_2 - k * k / (2.0 * var * t))
}

/// The comparator-walk tail bound as a probability, clamped to [0, 1].
pub fn baseline_walk_tail(noise: &NoiseSpec, t: f64, k: f64) -> Result<f64> {
    Ok(baseline_walk_tail_log(noise, t, k)?.exp().min(1.0))
}

/// Stability classification of an influence function by its decay exponent.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RegimeClass {
    /// p < 1: influence decays slower than 1/x, the bounded-noise bound
    /// applies with δ = 1 - p (and a fortiori the sub-Gaussian one).
    StableBounded { delta: f64 },
    /// 1 <= p < 2: the sub-Gaussian bound applies with δ = 2 - p.
    StableSubgaussian { delta: f64 },
    /// p = 2: between the stability and instability criteria; neither
    /// conclusion applies.
    Boundary,
    /// p > 2: influence decays fast enough that the gap escapes; δ = p - 2.
    Unstable { delta: f64 },
    /// The taxonomy is about power-law decay and says nothing here.
    NotApplicable { reason: String },
}

/// Classify an influence spec against the stability taxonomy.
pub fn classify_regime(influence: &InfluenceSpec) -> Result<RegimeClass> {
    influence.validate()?;
    Ok(match *influence {
        InfluenceSpec::PowerLaw { p, .. } => {
            if p < 1.0 {
                RegimeClass::StableBounded { delta: 1.0 - p }
            } else if p < 2.0 {
                RegimeClass::StableSubgaussian { delta: 2.0 - p }
            } else if p == 2.0 {
                RegimeClass::Boundary
            } else {
                RegimeClass::Unstable { delta: p - 2.0 }
            }
        }
        InfluenceSpec::HardThreshold { .. } => RegimeClass::NotApplicable {
            reason: "influence vanishes beyond the confidence threshold instead of \
                     decaying polynomially"
                .into(),
        },
        InfluenceSpec::Constant { .. } => RegimeClass::NotApplicable {
            reason: "constant influence is the linear special case; the decay taxonomy \
                     does not apply"
                .into(),
        },
    })
}

/// One row of a bound sweep; on per-row failure the numeric fields are NaN
/// and `error` explains why, so a sweep never aborts half way.
#[derive(Debug, Clone, Serialize)]
pub struct BoundRow {
    pub t: f64,
    pub k: f64,
    pub lambda: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub log_term1: f64,
    pub log_term2: f64,
    pub log_bound: f64,
    pub vacuous: bool,
    pub error: Option<String>,
}

/// Evaluate the query's regime bound over a grid of times.
pub fn sweep_bound(
    query: &TailQuery,
    b: f64,
    sigma: f64,
    d: f64,
    variant: BoundVariant,
    t_grid: &[f64],
) -> Vec<BoundRow> {
    t_grid
        .iter()
        .map(|&t| {
            let q_t = TailQuery { t, ..*query };
            let eval = match query.regime {
                Regime::BoundedNoise { .. } => bound_bounded_noise(&q_t, b, d, variant),
                Regime::SubGaussian { .. } => bound_subgaussian(&q_t, b, sigma, d),
            };
            match eval {
                Ok(e) => BoundRow {
                    t,
                    k: e.threshold,
                    lambda: e.params.lambda,
                    alpha: e.effective_alpha,
                    gamma: match (query.regime, variant) {
                        (Regime::BoundedNoise { .. }, BoundVariant::Taylor) => {
                            e.params.gamma_taylor
                        }
                        _ => e.params.gamma_exp,
                    },
                    log_term1: e.log_term1,
                    log_term2: e.log_term2,
                    log_bound: e.log_bound,
                    vacuous: e.vacuous,
                    error: None,
                },
                Err(err) => BoundRow {
                    t,
                    k: f64::NAN,
                    lambda: f64::NAN,
                    alpha: f64::NAN,
                    gamma: f64::NAN,
                    log_term1: f64::NAN,
                    log_term2: f64::NAN,
                    log_bound: f64::NAN,
                    vacuous: true,
                    error: Some(err.to_string()),
                },
            }
        })
        .collect()
}

/// Multiplicatively spaced grid: start, start*factor, ... capped at stop
/// (stop itself is included when the progression lands within one part in
/// 10^9 of it).
pub fn log_grid(start: f64, stop: f64, factor: f64) -> Result<Vec<f64>> {
    if !(start.is_finite() && stop.is_finite() && start > 0.0 && stop >= start) {
        return Err(Error::config(format!(
            "grid needs 0 < start <= stop, got {start}..{stop}"
        )));
    }
    if !(factor.is_finite() && factor > 1.0) {
        return Err(Error::config(format!("grid factor must be > 1, got {factor}")));
    }
    let mut grid = Vec::new();
    let mut t = start;
    while t <= stop * (1.0 + 1e-9) {
        grid.push(t.min(stop));
        t *= factor;
    }
    Ok(grid)
}

/// Write sweep rows as CSV. Column order is part of the format contract:
/// `t,k,lambda,alpha,gamma,log_term1,log_term2,log_bound,vacuous,error`.
pub fn write_bound_rows_csv<W: Write>(w: &mut W, rows: &[BoundRow]) -> std::io::Result<()> {
    writeln!(
        w,
        "t,k,lambda,alpha,gamma,log_term1,log_term2,log_bound,vacuous,error"
    )?;
    for r in rows {
        let err = match &r.error {
            Some(e) => format!("\"{}\"", e.replace('"', "\"\"")),
            None => String::new(),
        };
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{}",
            r.t,
            r.k,
            r.lambda,
            r.alpha,
            r.gamma,
            r.log_term1,
            r.log_term2,
            r.log_bound,
            r.vacuous,
            err
        )?;
    }
    Ok(())
}
