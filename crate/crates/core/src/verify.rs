//! Monte Carlo estimation and statistical verification.
//!
//! Four checks back the analytic machinery empirically: direct tail
//! estimation with exact binomial intervals, envelope-exceedance estimation,
//! the stochastic-ordering comparison against the influence-free walk, and
//! two moment-generating-function checks (unconditional sub-Gaussian
//! envelopes, and the conditional restriction property the sub-Gaussian
//! bound's proof leans on).
//!
//! Every estimator derives one rng substream per replicate from the seed
//! policy and reduces with order-independent operations (counts, sums over
//! an index-stable sample vector), so results are bit-identical for any
//! worker count and any execution order.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::step_two_agent_diff;
use crate::error::Error;
use crate::math::mean_variance;
use crate::model::{NoiseSpec, TwoAgentConfig};
use crate::rng::{stream_id, SeedPolicy};
use crate::stats::{clopper_pearson, two_proportion_margin, Z_995};
use crate::bounds::TailQuery;
use crate::Result;

/// Confidence level used when none is given.
pub const DEFAULT_CI_LEVEL: f64 = 0.99;
/// Default number of levels in the stochastic-ordering threshold grid.
pub const ORDERING_GRID_SIZE: usize = 32;
/// The default ordering grid spans `[0.1, 5.0]` times the walk's sd.
pub const ORDERING_GRID_SPAN: (f64, f64) = (0.1, 5.0);
/// Minimum accepted trajectories for a conditional-MGF verdict.
pub const ACCEPTANCE_FLOOR: u64 = 100;
/// Bootstrap resamples behind the conditional-MGF tolerance.
pub const BOOTSTRAP_RESAMPLES: usize = 1000;
/// Empirical MGFs are only trusted while λ · scale stays at or below this
/// (scale = support half-width, or σ for unbounded noise): beyond it the
/// estimate is dominated by draws the sample is unlikely to contain.
pub const MGF_RELIABLE_LAMBDA_SCALE: f64 = 5.0;

/// Monte Carlo estimate of P0(|Y(t)| >= k) with an exact binomial CI.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailEstimate {
    pub t: f64,
    pub k: f64,
    pub c: f64,
    pub beta: f64,
    pub n_replicates: u64,
    pub n_exceed: u64,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub ci_level: f64,
    pub master_seed: u64,
}

fn integral_steps(t: f64) -> Result<u64> {
    if !(t.is_finite() && t >= 1.0 && t.fract() == 0.0 && t < 9_007_199_254_740_992.0) {
        return Err(Error::config(format!(
            "simulation needs an integer horizon in [1, 2^53), got t = {t}"
        )));
    }
    Ok(t as u64)
}

fn require_zero_start(config: &TwoAgentConfig) -> Result<()> {
    if config.y0 != 0.0 {
        return Err(Error::config(format!(
            "tail quantities condition on Y(0) = 0; got y0 = {}",
            config.y0
        )));
    }
    Ok(())
}

/// Simulate one difference trajectory for `steps` steps and return the final
/// value, allocation-free. The query horizon is authoritative here; the
/// config's own `horizon` field is not consulted.
fn final_diff_value(config: &TwoAgentConfig, steps: u64, seed: &SeedPolicy, replicate: u64) -> f64 {
    let mut rng = seed.stream(replicate, stream_id::PRIMARY);
    let mut y = 0.0;
    for _ in 0..steps {
        y = step_two_agent_diff(y, config, &mut rng);
    }
    y
}

/// Estimate P0(|Y(t)| >= k) at the query's (t, k) over independent
/// replicates, with the default 99% Clopper-Pearson interval.
///
/// The result is a function of (config, query, n_replicates, master seed)
/// only: worker_count changes scheduling, never the estimate.
pub fn estimate_tail(
    config: &TwoAgentConfig,
    query: &TailQuery,
    n_replicates: u64,
    seed: &SeedPolicy,
    worker_count: usize,
) -> Result<TailEstimate> {
    estimate_tail_at_level(config, query, n_replicates, seed, worker_count, DEFAULT_CI_LEVEL)
}

/// `estimate_tail` with an explicit confidence level in (0, 1).
pub fn estimate_tail_at_level(
    config: &TwoAgentConfig,
    query: &TailQuery,
    n_replicates: u64,
    seed: &SeedPolicy,
    worker_count: usize,
    ci_level: f64,
) -> Result<TailEstimate> {
    config.validate()?;
    query.validate()?;
    require_zero_start(config)?;
    if n_replicates == 0 {
        return Err(Error::config("n_replicates must be >= 1"));
    }
    if worker_count == 0 {
        return Err(Error::config("worker_count must be >= 1"));
    }
    if !(ci_level > 0.0 && ci_level < 1.0) {
        return Err(Error::config(format!("ci level must lie in (0, 1), got {ci_level}")));
    }
    let steps = integral_steps(query.t)?;
    let k = query.threshold();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_count)
        .build()
        .map_err(|e| Error::config(format!("could not build worker pool: {e}")))?;
    let n_exceed = pool.install(|| {
        (0..n_replicates)
            .into_par_iter()
            .filter(|&r| final_diff_value(config, steps, seed, r).abs() >= k)
            .count() as u64
    });
    let p_hat = n_exceed as f64 / n_replicates as f64;
    let (ci_low, ci_high) = clopper_pearson(n_exceed, n_replicates, ci_level);
    Ok(TailEstimate {
        t: query.t,
        k,
        c: query.c,
        beta: query.beta,
        n_replicates,
        n_exceed,
        p_hat,
        ci_low,
        ci_high,
        ci_level,
        master_seed: seed.master_seed,
    })
}

/// Monte Carlo estimate of the envelope-exceedance probability
/// P0(∃ τ ∈ [t_start, t_end]: |Y(τ)| >= c τ^(1/2−β)).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnvelopeEstimate {
    pub t_start: u64,
    pub t_end: u64,
    pub c: f64,
    pub beta: f64,
    pub n_replicates: u64,
    pub n_exceed: u64,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub ci_level: f64,
    pub master_seed: u64,
}

/// Estimate the probability that a trajectory ever pierces the envelope
/// c τ^(1/2−β) on τ ∈ [t_start, t_end].
///
/// Replicate r consumes exactly the same substream as `estimate_tail`'s
/// replicate r, so with equal seeds the two estimators see identical paths
/// and exceedance here pathwise contains exceedance at any single t in the
/// window.
pub fn estimate_envelope_exceedance(
    config: &TwoAgentConfig,
    c: f64,
    beta: f64,
    t_start: u64,
    t_end: u64,
    n_replicates: u64,
    seed: &SeedPolicy,
) -> Result<EnvelopeEstimate> {
    config.validate()?;
    require_zero_start(config)?;
    if !(c.is_finite() && c >= 0.0) {
        return Err(Error::config(format!("c must be >= 0, got {c}")));
    }
    if !beta.is_finite() {
        return Err(Error::config("beta must be finite"));
    }
    if t_start < 1 {
        return Err(Error::config("t_start must be >= 1"));
    }
    if t_end < t_start {
        return Err(Error::config(format!(
            "t_end must be >= t_start, got [{t_start}, {t_end}]"
        )));
    }
    if n_replicates == 0 {
        return Err(Error::config("n_replicates must be >= 1"));
    }
    // thresholds are shared read-only across workers; +inf outside the window
    let thresholds: Vec<f64> = (0..=t_end)
        .map(|tau| {
            if tau < t_start {
                f64::INFINITY
            } else {
                c * (tau as f64).powf(0.5 - beta)
            }
        })
        .collect();
    let n_exceed = (0..n_replicates)
        .into_par_iter()
        .filter(|&r| {
            let mut rng = seed.stream(r, stream_id::PRIMARY);
            let mut y = 0.0;
            for tau in 1..=t_end {
                y = step_two_agent_diff(y, config, &mut rng);
                if y.abs() >= thresholds[tau as usize] {
                    return true;
                }
            }
            false
        })
        .count() as u64;
    let p_hat = n_exceed as f64 / n_replicates as f64;
    let (ci_low, ci_high) = clopper_pearson(n_exceed, n_replicates, DEFAULT_CI_LEVEL);
    Ok(EnvelopeEstimate {
        t_start,
        t_end,
        c,
        beta,
        n_replicates,
        n_exceed,
        p_hat,
        ci_low,
        ci_high,
        ci_level: DEFAULT_CI_LEVEL,
        master_seed: seed.master_seed,
    })
}

/// One threshold level of the stochastic-ordering comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrderingRow {
    pub level: f64,
    pub freq_y: f64,
    pub freq_walk: f64,
    /// 99% two-proportion tolerance; the row is ok when
    /// freq_y <= freq_walk + margin.
    pub margin: f64,
    pub ok: bool,
}

/// Result of the survival-dominance check of |Y(t)| against the walk |Y'(t)|.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderingReport {
    pub t: u64,
    pub n_replicates: u64,
    /// Empirical sd of the signed comparator walk, the default grid's scale.
    pub walk_sd: f64,
    pub rows: Vec<OrderingRow>,
    pub pass: bool,
    pub master_seed: u64,
}

/// Check empirical survival dominance freq(|Y(t)| > l) <= freq(|Y'(t)| > l)
/// at every level l, within a 99% two-proportion margin.
///
/// The comparator Y' is the influence-free walk with the identical noise
/// spec, driven by each replicate's comparator substream (independent of the
/// Y sample). `levels: None` uses 32 log-spaced levels spanning
/// [0.1, 5.0] × sd(Y'(t)).
pub fn check_stochastic_ordering(
    config: &TwoAgentConfig,
    t: u64,
    levels: Option<&[f64]>,
    n_replicates: u64,
    seed: &SeedPolicy,
) -> Result<OrderingReport> {
    config.validate()?;
    require_zero_start(config)?;
    if t < 1 {
        return Err(Error::config("t must be >= 1"));
    }
    if n_replicates == 0 {
        return Err(Error::config("n_replicates must be >= 1"));
    }
    if let Some(ls) = levels {
        if ls.is_empty() {
            return Err(Error::config("level grid must be nonempty"));
        }
        if ls.iter().any(|l| !l.is_finite() || *l < 0.0) {
            return Err(Error::config("levels must be finite and >= 0"));
        }
    }
    // (|Y(t)|, signed Y'(t)) per replicate, order-stable in r
    let samples: Vec<(f64, f64)> = (0..n_replicates)
        .into_par_iter()
        .map(|r| {
            let y = final_diff_value(config, t, seed, r);
            let mut rng = seed.stream(r, stream_id::COMPARATOR);
            let mut w = 0.0;
            for _ in 0..t {
                let _coin = rng.next_f64();
                w += config.noise.sample_diff(&mut rng);
            }
            (y.abs(), w)
        })
        .collect();
    let walk: Vec<f64> = samples.iter().map(|s| s.1).collect();
    let (_, walk_var) = mean_variance(&walk);
    let walk_sd = walk_var.sqrt();
    let grid: Vec<f64> = match levels {
        Some(ls) => ls.to_vec(),
        None => {
            let lo = ORDERING_GRID_SPAN.0 * walk_sd;
            let hi = ORDERING_GRID_SPAN.1 * walk_sd;
            let ratio = if lo > 0.0 {
                (hi / lo).powf(1.0 / (ORDERING_GRID_SIZE as f64 - 1.0))
            } else {
                1.0
            };
            (0..ORDERING_GRID_SIZE)
                .map(|i| lo * ratio.powi(i as i32))
                .collect()
        }
    };
    let n = n_replicates as f64;
    let rows: Vec<OrderingRow> = grid
        .iter()
        .map(|&level| {
            let exceed_y = samples.iter().filter(|s| s.0 > level).count() as f64;
            let exceed_w = samples.iter().filter(|s| s.1.abs() > level).count() as f64;
            let freq_y = exceed_y / n;
            let freq_walk = exceed_w / n;
            let margin =
                two_proportion_margin(freq_y, n_replicates, freq_walk, n_replicates, Z_995);
            OrderingRow {
                level,
                freq_y,
                freq_walk,
                margin,
                ok: freq_y <= freq_walk + margin,
            }
        })
        .collect();
    let pass = rows.iter().all(|r| r.ok);
    Ok(OrderingReport {
        t,
        n_replicates,
        walk_sd,
        rows,
        pass,
        master_seed: seed.master_seed,
    })
}

/// Result of the conditional-MGF restriction check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CondMgfReport {
    pub t: u64,
    pub h: u64,
    pub lambda: f64,
    pub beta_prime: f64,
    pub n_replicates: u64,
    /// Trajectories satisfying the full event A_t (respectively A_{t-1});
    /// A_t ⊆ A_{t-1}, so accepted_t <= accepted_t_minus_1.
    pub accepted_t: u64,
    pub accepted_t_minus_1: u64,
    pub acceptance_rate_t: f64,
    /// Conditional estimates of E[exp(λ Y(t)) | A]. The claim under test is
    /// that conditioning on the tighter event can only shrink the MGF.
    pub mgf_cond_t: f64,
    pub mgf_cond_t_minus_1: f64,
    pub delta: f64,
    /// 1% bootstrap quantile of delta; the check fails only when even this
    /// lower limit is positive.
    pub delta_lower_99: f64,
    pub pass: bool,
    pub master_seed: u64,
}

/// Verify E[exp(λ Y(t)) | A_t] <= E[exp(λ Y(t)) | A_{t−1}], where
/// A_s = ∩_{τ=h}^{s} {|Y(τ)| <= d_τ} and d_τ = D τ^(1/2+β') with D the
/// difference-noise support half-width (σ for unbounded noise).
///
/// Conditioning is by rejection: trajectories violating the event are
/// discarded, and the two conditional means are estimated on the same
/// replicate set (paired). The tolerance is a one-sided 99% bootstrap
/// interval over replicates. Fewer than [`ACCEPTANCE_FLOOR`] accepted
/// trajectories is an insufficient-samples error, never a verdict.
pub fn check_conditional_mgf(
    config: &TwoAgentConfig,
    t: u64,
    lambda: f64,
    beta_prime: f64,
    h: u64,
    n_replicates: u64,
    seed: &SeedPolicy,
) -> Result<CondMgfReport> {
    config.validate()?;
    require_zero_start(config)?;
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(Error::config(format!("lambda must be >= 0, got {lambda}")));
    }
    if !(beta_prime.is_finite() && beta_prime > 0.0) {
        return Err(Error::config(format!(
            "beta_prime must be > 0, got {beta_prime}"
        )));
    }
    if !(h >= 1 && h < t) {
        return Err(Error::config(format!(
            "need 1 <= h < t, got h = {h}, t = {t}"
        )));
    }
    if n_replicates == 0 {
        return Err(Error::config("n_replicates must be >= 1"));
    }
    let d_scale = config
        .noise
        .support_half_width()
        .unwrap_or_else(|| config.noise.subgaussian_parameter().sqrt());
    let envelope: Vec<f64> = (0..=t)
        .map(|tau| d_scale * (tau as f64).powf(0.5 + beta_prime))
        .collect();
    // per replicate: weight exp(lambda * Y(t)) and the two event indicators
    let outcomes: Vec<(f64, bool, bool)> = (0..n_replicates)
        .into_par_iter()
        .map(|r| {
            let mut rng = seed.stream(r, stream_id::PRIMARY);
            let mut y = 0.0;
            let mut in_at = true;
            let mut in_atm1 = true;
            for tau in 1..=t {
                y = step_two_agent_diff(y, config, &mut rng);
                if tau >= h && y.abs() > envelope[tau as usize] {
                    in_at = false;
                    if tau <= t - 1 {
                        in_atm1 = false;
                    }
                }
            }
            ((lambda * y).exp(), in_at, in_atm1)
        })
        .collect();
    let accepted_t = outcomes.iter().filter(|o| o.1).count() as u64;
    let accepted_tm1 = outcomes.iter().filter(|o| o.2).count() as u64;
    if accepted_t < ACCEPTANCE_FLOOR {
        return Err(Error::InsufficientSamples {
            accepted: accepted_t,
            floor: ACCEPTANCE_FLOOR,
        });
    }
    let cond_mean = |pick: fn(&(f64, bool, bool)) -> bool| {
        let (sum, cnt) = outcomes
            .iter()
            .filter(|o| pick(o))
            .fold((0.0, 0u64), |(s, c), o| (s + o.0, c + 1));
        sum / cnt as f64
    };
    let mgf_cond_t = cond_mean(|o| o.1);
    let mgf_cond_tm1 = cond_mean(|o| o.2);
    let delta = mgf_cond_t - mgf_cond_tm1;

    // paired bootstrap over replicates
    let mut boot = seed.stream(0, stream_id::BOOTSTRAP);
    let n = outcomes.len();
    let mut deltas = Vec::with_capacity(BOOTSTRAP_RESAMPLES);
    for _ in 0..BOOTSTRAP_RESAMPLES {
        let (mut s_t, mut c_t, mut s_tm1, mut c_tm1) = (0.0, 0u64, 0.0, 0u64);
        for _ in 0..n {
            let o = &outcomes[boot.next_index(n)];
            if o.1 {
                s_t += o.0;
                c_t += 1;
            }
            if o.2 {
                s_tm1 += o.0;
                c_tm1 += 1;
            }
        }
        if c_t > 0 && c_tm1 > 0 {
            deltas.push(s_t / c_t as f64 - s_tm1 / c_tm1 as f64);
        }
    }
    if deltas.len() < BOOTSTRAP_RESAMPLES / 2 {
        return Err(Error::InsufficientSamples {
            accepted: accepted_t,
            floor: ACCEPTANCE_FLOOR,
        });
    }
    deltas.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let delta_lower_99 = deltas[deltas.len() / 100];
    Ok(CondMgfReport {
        t,
        h,
        lambda,
        beta_prime,
        n_replicates,
        accepted_t,
        accepted_t_minus_1: accepted_tm1,
        acceptance_rate_t: accepted_t as f64 / n_replicates as f64,
        mgf_cond_t,
        mgf_cond_t_minus_1: mgf_cond_tm1,
        delta,
        delta_lower_99,
        pass: delta_lower_99 <= 0.0,
        master_seed: seed.master_seed,
    })
}

/// Verdict for one λ of the sub-Gaussian envelope check.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MgfOutcome {
    Pass,
    Fail,
    /// Estimation would be unreliable at this λ; no verdict.
    Skipped { reason: String },
}

/// One λ of the sub-Gaussian envelope check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MgfCheck {
    pub lambda: f64,
    /// Empirical mean of exp(λ ñ); NaN when skipped.
    pub m_hat: f64,
    pub std_error: f64,
    /// The certified envelope exp(λ²σ²/2).
    pub bound: f64,
    /// Statistical slack as a fraction of the bound (99% CI half-width).
    pub epsilon_stat: f64,
    pub outcome: MgfOutcome,
}

/// Check the sub-Gaussian envelope: empirical E[exp(λ ñ)] <= exp(λ²σ²/2)
/// within a 99% CI of the empirical mean, per λ.
///
/// One shared draw set is used for every λ. λ values beyond the reliable
/// range (λ · scale > [`MGF_RELIABLE_LAMBDA_SCALE`]) are skipped with a
/// reason instead of risking a noise-driven verdict.
pub fn check_mgf_envelope(
    noise: &NoiseSpec,
    lambdas: &[f64],
    n_draws: u64,
    seed: &SeedPolicy,
) -> Result<Vec<MgfCheck>> {
    noise.validate()?;
    if n_draws < 2 {
        return Err(Error::config("n_draws must be >= 2"));
    }
    if lambdas.iter().any(|l| !l.is_finite() || *l < 0.0) {
        return Err(Error::config("lambda grid must be finite and >= 0"));
    }
    let sigma_sq = noise.subgaussian_parameter();
    let scale = noise
        .support_half_width()
        .unwrap_or_else(|| sigma_sq.sqrt());
    let mut rng = seed.stream(0, stream_id::MGF);
    let draws: Vec<f64> = (0..n_draws).map(|_| noise.sample_diff(&mut rng)).collect();
    Ok(lambdas
        .iter()
        .map(|&lambda| {
            let bound = (lambda * lambda * sigma_sq / 2.0).exp();
            if lambda * scale > MGF_RELIABLE_LAMBDA_SCALE {
                return MgfCheck {
                    lambda,
                    m_hat: f64::NAN,
                    std_error: f64::NAN,
                    bound,
                    epsilon_stat: f64::NAN,
                    outcome: MgfOutcome::Skipped {
                        reason: format!(
                            "λ·scale = {} exceeds the reliable-estimation limit {}",
                            lambda * scale,
                            MGF_RELIABLE_LAMBDA_SCALE
                        ),
                    },
                };
            }
            let vals: Vec<f64> = draws.iter().map(|&x| (lambda * x).exp()).collect();
            let (m_hat, var) = mean_variance(&vals);
            let std_error = (var / n_draws as f64).sqrt();
            let slack = Z_995 * std_error;
            MgfCheck {
                lambda,
                m_hat,
                std_error,
                bound,
                epsilon_stat: slack / bound,
                outcome: if m_hat <= bound + slack {
                    MgfOutcome::Pass
                } else {
                    MgfOutcome::Fail
                },
            }
        })
        .collect())
}

/// Batch tail estimation: one estimate per (config, query) job, all sharing
/// the seed policy and replicate partitioning. Parallelism lives inside each
/// job (by replicate, matching `estimate_tail` exactly); per-job errors are
/// returned in place so sibling jobs still run.
pub fn run_ensemble(
    jobs: &[(TwoAgentConfig, TailQuery)],
    n_replicates: u64,
    seed: &SeedPolicy,
    worker_count: usize,
) -> Vec<Result<TailEstimate>> {
    jobs.iter()
        .map(|(config, query)| estimate_tail(config, query, n_replicates, seed, worker_count))
        .collect()
}

/// Write tail estimates as CSV. Column order is part of the format contract:
/// `t,k,c,beta,n_replicates,n_exceed,p_hat,ci_low,ci_high,master_seed`.
pub fn write_tail_estimates_csv<W: Write>(
    w: &mut W,
    estimates: &[TailEstimate],
) -> std::io::Result<()> {
    writeln!(w, "t,k,c,beta,n_replicates,n_exceed,p_hat,ci_low,ci_high,master_seed")?;
    for e in estimates {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{}",
            e.t, e.k, e.c, e.beta, e.n_replicates, e.n_exceed, e.p_hat, e.ci_low, e.ci_high,
            e.master_seed
        )?;
    }
    Ok(())
}

/// Write an ordering report as CSV with columns
/// `level,freq_y,freq_walk,margin,ok`.
pub fn write_ordering_report_csv<W: Write>(
    w: &mut W,
    report: &OrderingReport,
) -> std::io::Result<()> {
    writeln!(w, "level,freq_y,freq_walk,margin,ok")?;
    for r in &report.rows {
        writeln!(
            w,
            "{},{},{},{},{}",
            r.level, r.freq_y, r.freq_walk, r.margin, r.ok
        )?;
    }
    Ok(())
}
