//! Subcommand implementations: simulate, bound, compare, verify.
//!
//! Everything here is plumbing around sbc-core. The one piece of real logic
//! is `bound_inputs`, which derives the bound constants (B, sigma, D) from a
//! model section and refuses model/query pairs whose regime parameters are
//! inconsistent.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;

use sbc_core::bounds::{
    self, baseline_walk_tail, bound_bounded_noise, bound_subgaussian, sweep_bound,
    BoundEvaluation, BoundVariant, Regime, TailQuery,
};
use sbc_core::dynamics::{
    simulate_diff_trajectory, simulate_multi_agent, write_diff_trajectory_csv,
    write_opinion_trajectory_csv,
};
use sbc_core::verify::{
    check_conditional_mgf, check_mgf_envelope, check_stochastic_ordering, estimate_tail,
    write_ordering_report_csv, MgfOutcome, OrderingReport,
};
use sbc_core::{
    Error, InfluenceSpec, MultiAgentConfig, NoiseFamily, NoiseLevel, NoiseSpec, SeedPolicy,
    TwoAgentConfig,
};

use crate::config::{self, ExperimentConfig, ModelSection, OutputSection, RunSection};
use crate::{BoundArgs, CheckArg, Failure, RegimeArg};

/// Seed used by `verify` when no config supplies one; documented in --help
/// output via the report, overridable with SBC_SEED.
const DEFAULT_VERIFY_SEED: u64 = 0x5bc5eed;

// ---------------------------------------------------------------- simulate

pub(crate) fn simulate(
    cfg_path: &Path,
    reps: Option<u64>,
    out: Option<PathBuf>,
) -> Result<(), Failure> {
    let mut config = config::load(cfg_path)?;
    if let Some(r) = reps {
        if r == 0 {
            return Err(Failure::Schema("--reps must be >= 1".into()));
        }
        config.run.n_replicates = r;
    }
    if let Some(q) = &config.query {
        q.validate_regime()?;
    }
    let horizon = config
        .model
        .horizon
        .ok_or_else(|| Failure::Schema("model.horizon is required to simulate".into()))?;
    let dir = resolve_out_dir(&out, &config);
    fs::create_dir_all(&dir)?;
    let seed = SeedPolicy::new(config.run.master_seed);
    let n = config.run.n_replicates;
    let formats = config
        .output
        .as_ref()
        .map(|o| o.formats.clone())
        .unwrap_or_else(|| vec!["csv".into()]);
    let want_json = formats.iter().any(|f| f == "json");

    if let Some(graph) = &config.model.graph {
        let mcfg = MultiAgentConfig {
            influence: config.model.influence,
            noise: config.model.noise,
            n_agents: graph.n_agents,
            edges: graph.edges.clone(),
            initial_opinions: graph.initial_opinions.clone(),
            pairing: graph.pairing,
            horizon,
        };
        for r in 0..n {
            let traj = simulate_multi_agent(&mcfg, &seed, r)?;
            let mut buf = Vec::new();
            write_opinion_trajectory_csv(&mut buf, &traj)?;
            fs::write(dir.join(format!("trajectory_opinions_{r}.csv")), &buf)?;
            if want_json {
                write_json(&dir.join(format!("trajectory_opinions_{r}.json")), &traj)?;
            }
        }
        println!(
            "wrote {n} multi-agent trajectories ({} agents, horizon {horizon}) to {}",
            graph.n_agents,
            dir.display()
        );
    } else {
        let tcfg = TwoAgentConfig {
            influence: config.model.influence,
            noise: config.model.noise,
            y0: config.model.y0,
            horizon,
        };
        for r in 0..n {
            let traj = simulate_diff_trajectory(&tcfg, &seed, r)?;
            let mut buf = Vec::new();
            write_diff_trajectory_csv(&mut buf, &traj)?;
            fs::write(dir.join(format!("trajectory_diff_{r}.csv")), &buf)?;
            if want_json {
                write_json(&dir.join(format!("trajectory_diff_{r}.json")), &traj)?;
            }
        }
        println!(
            "wrote {n} difference trajectories (horizon {horizon}) to {}",
            dir.display()
        );
    }

    let resolved = ExperimentConfig {
        output: Some(OutputSection {
            directory: dir.clone(),
            formats,
        }),
        ..config
    };
    config::write_sidecar(&dir, &resolved)?;
    Ok(())
}

fn resolve_out_dir(out: &Option<PathBuf>, config: &ExperimentConfig) -> PathBuf {
    out.clone()
        .or_else(|| config.output.as_ref().map(|o| o.directory.clone()))
        .unwrap_or_else(|| PathBuf::from("sbc_out"))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| Failure::Io(format!("serializing {}: {e}", path.display())))?;
    fs::write(path, text + "\n")?;
    Ok(())
}

// ------------------------------------------------------------------- bound

pub(crate) fn bound(args: &BoundArgs) -> Result<(), Failure> {
    let grid = parse_t_grid(&args.t_grid)?;
    let (regime, sigma) = match args.regime {
        RegimeArg::Bounded => {
            if args.sigma.is_some() || args.beta_prime.is_some() || args.zeta.is_some() {
                // Silently accepting these would suggest they did something.
                return Err(Failure::Schema(
                    "--sigma/--beta-prime/--zeta apply only to --regime subgauss".into(),
                ));
            }
            (Regime::BoundedNoise { delta: args.delta }, f64::NAN)
        }
        RegimeArg::Subgauss => {
            let sigma = args
                .sigma
                .ok_or_else(|| Failure::Schema("--regime subgauss requires --sigma".into()))?;
            let beta_prime = args.beta_prime.ok_or_else(|| {
                Failure::Schema("--regime subgauss requires --beta-prime".into())
            })?;
            let zeta = args
                .zeta
                .ok_or_else(|| Failure::Schema("--regime subgauss requires --zeta".into()))?;
            (
                Regime::SubGaussian {
                    delta: args.delta,
                    beta_prime,
                    zeta,
                },
                sigma,
            )
        }
    };
    let template = TailQuery {
        t: grid.first().copied().unwrap_or(1.0),
        c: args.c,
        beta: args.beta,
        regime,
    };
    template.validate()?;
    template.validate_regime()?;
    let rows = sweep_bound(&template, args.b, sigma, args.d, args.variant.into(), &grid);
    let mut buf = Vec::new();
    bounds::write_bound_rows_csv(&mut buf, &rows)?;
    match &args.out {
        Some(path) => {
            if let Some(parent) = path.parent() {
                if !parent.as_os_str().is_empty() {
                    fs::create_dir_all(parent)?;
                }
            }
            fs::write(path, &buf)?;
        }
        None => io::stdout().write_all(&buf)?,
    }
    Ok(())
}

/// Parse a time grid: "" (empty), a single value, or START:STOP:log<FACTOR>
/// for a multiplicative grid.
pub(crate) fn parse_t_grid(spec: &str) -> Result<Vec<f64>, Failure> {
    let s = spec.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    let parts: Vec<&str> = s.split(':').collect();
    match parts.len() {
        1 => Ok(vec![parse_f64(parts[0], "t grid")?]),
        3 => {
            let start = parse_f64(parts[0], "t grid start")?;
            let stop = parse_f64(parts[1], "t grid stop")?;
            let factor_text = parts[2].strip_prefix("log").ok_or_else(|| {
                Failure::Schema(format!(
                    "t grid step must look like log<FACTOR>, got '{}'",
                    parts[2]
                ))
            })?;
            let factor = parse_f64(factor_text, "t grid factor")?;
            Ok(bounds::log_grid(start, stop, factor)?)
        }
        _ => Err(Failure::Schema(format!(
            "t grid must be a single value or START:STOP:log<FACTOR>, got '{s}'"
        ))),
    }
}

fn parse_f64(s: &str, what: &str) -> Result<f64, Failure> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Failure::Schema(format!("{what}: '{s}' is not a number")))
}

// ----------------------------------------------------------------- compare

/// One joined row of the empirical-vs-analytic comparison.
pub(crate) struct CompareRow {
    pub t: f64,
    pub k: f64,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub log_bound: f64,
    pub bound: f64,
    pub vacuous: bool,
    pub baseline_tail: f64,
    pub walk_p_hat: f64,
    pub violation: bool,
    pub error: Option<String>,
}

pub(crate) fn compare(
    cfg_path: &Path,
    t_grid: Option<&str>,
    budget: u64,
    variant: BoundVariant,
    out: Option<PathBuf>,
) -> Result<(), Failure> {
    let config = config::load(cfg_path)?;
    let query = config
        .query
        .as_ref()
        .ok_or_else(|| Failure::Schema("compare needs a query section in the config".into()))?;
    let grid = match t_grid {
        Some(s) => parse_t_grid(s)?,
        None => vec![query.t],
    };
    let rows = run_compare(&config.model, query, &config.run, &grid, variant, budget)?;
    let mut buf = Vec::new();
    write_compare_csv(&mut buf, &rows)?;
    match out {
        Some(dir) => {
            fs::create_dir_all(&dir)?;
            fs::write(dir.join("compare.csv"), &buf)?;
            let resolved = ExperimentConfig {
                output: Some(OutputSection {
                    directory: dir.clone(),
                    formats: vec!["csv".into()],
                }),
                ..config
            };
            config::write_sidecar(&dir, &resolved)?;
            let violations = rows.iter().filter(|r| r.violation).count();
            println!(
                "compare: {} rows, {} soundness violations -> {}",
                rows.len(),
                violations,
                dir.join("compare.csv").display()
            );
        }
        None => io::stdout().write_all(&buf)?,
    }
    Ok(())
}

/// Run the empirical/analytic/baseline join over a shared t grid. Also used
/// by the theorem presets.
pub(crate) fn run_compare(
    model: &ModelSection,
    query: &TailQuery,
    run: &RunSection,
    grid: &[f64],
    variant: BoundVariant,
    budget: u64,
) -> Result<Vec<CompareRow>, Failure> {
    query.validate()?;
    query.validate_regime()?;
    if model.graph.is_some() {
        return Err(Failure::Schema(
            "compare works on the two-agent difference process; remove model.graph".into(),
        ));
    }
    let n = run.n_replicates;
    for &t in grid {
        if !(t.is_finite() && t >= 1.0 && t.fract() == 0.0) {
            return Err(Failure::Schema(format!(
                "compare needs integral t >= 1 to simulate, got {t}"
            )));
        }
        let cost = (t as u64).saturating_mul(n);
        if cost > budget {
            let max_t = budget / n.max(1);
            return Err(Failure::Budget(format!(
                "t = {t} with n_replicates = {n} needs {cost} simulated steps, over the \
                 budget {budget}; cap the grid at t <= {max_t}, lower n_replicates, or raise \
                 --budget"
            )));
        }
    }
    let (b, sigma, d) = bound_inputs(model, &query.regime)?;
    let config = TwoAgentConfig {
        influence: model.influence,
        noise: model.noise,
        y0: model.y0,
        horizon: 0,
    };
    // Same substreams as the SBC runs: the walk column is a paired sample.
    let walk_config = TwoAgentConfig {
        influence: InfluenceSpec::Constant { g: 0.0 },
        ..config
    };
    let seed = SeedPolicy::new(run.master_seed);
    let mut rows = Vec::with_capacity(grid.len());
    for &t in grid {
        let q_t = TailQuery { t, ..*query };
        let est = estimate_tail(&config, &q_t, n, &seed, run.worker_count)?;
        let walk = estimate_tail(&walk_config, &q_t, n, &seed, run.worker_count)?;
        let (log_bound, vacuous, error) = match evaluate_bound(&q_t, b, sigma, d, variant) {
            Ok(ev) => (ev.log_bound, ev.vacuous, None),
            Err(e) => (f64::NAN, true, Some(e.to_string())),
        };
        let bound = if log_bound.is_nan() {
            f64::NAN
        } else {
            log_bound.exp().min(1.0)
        };
        let baseline_tail = baseline_walk_tail(&model.noise, t, q_t.threshold())?;
        // A sound bound keeps the whole CI below it; vacuous rows can't be
        // violated.
        let violation = error.is_none() && !vacuous && est.ci_high > bound;
        rows.push(CompareRow {
            t,
            k: q_t.threshold(),
            p_hat: est.p_hat,
            ci_low: est.ci_low,
            ci_high: est.ci_high,
            log_bound,
            bound,
            vacuous,
            baseline_tail,
            walk_p_hat: walk.p_hat,
            violation,
            error,
        });
    }
    Ok(rows)
}

fn evaluate_bound(
    query: &TailQuery,
    b: f64,
    sigma: f64,
    d: f64,
    variant: BoundVariant,
) -> sbc_core::Result<BoundEvaluation> {
    match query.regime {
        Regime::BoundedNoise { .. } => bound_bounded_noise(query, b, d, variant),
        Regime::SubGaussian { .. } => bound_subgaussian(query, b, sigma, d),
    }
}

/// Derive the bound constants (B, sigma, D) from the model, rejecting
/// model/query pairs whose regime parameters disagree.
fn bound_inputs(model: &ModelSection, regime: &Regime) -> Result<(f64, f64, f64), Failure> {
    let (b, p) = match model.influence {
        InfluenceSpec::PowerLaw { b, p } => (b, p),
        _ => {
            return Err(Failure::Schema(
                "the analytic bounds cover power-law influence only; compare needs \
                 model.influence = power_law"
                    .into(),
            ))
        }
    };
    let sigma = model.noise.subgaussian_parameter().sqrt();
    let support = model.noise.support_half_width();
    match *regime {
        Regime::BoundedNoise { delta } => {
            let d = support.ok_or_else(|| {
                Failure::Schema(
                    "the bounded-noise bound needs noise with bounded support \
                     (uniform_bounded, truncated_gaussian, or rademacher)"
                        .into(),
                )
            })?;
            let implied = 1.0 - p;
            if (implied - delta).abs() > 1e-9 {
                return Err(Failure::Schema(format!(
                    "query delta = {delta} is inconsistent with influence exponent p = {p}: \
                     the bounded-noise regime has delta = 1 - p = {implied}"
                )));
            }
            Ok((b, sigma, d))
        }
        Regime::SubGaussian { delta, .. } => {
            let implied = 2.0 - p;
            if (implied - delta).abs() > 1e-9 {
                return Err(Failure::Schema(format!(
                    "query delta = {delta} is inconsistent with influence exponent p = {p}: \
                     the sub-Gaussian regime has delta = 2 - p = {implied}"
                )));
            }
            // Envelope scale: the noise bound when there is one, else sigma.
            let d = support.unwrap_or(sigma);
            Ok((b, sigma, d))
        }
    }
}

pub(crate) fn write_compare_csv<W: Write>(w: &mut W, rows: &[CompareRow]) -> io::Result<()> {
    writeln!(
        w,
        "t,k,p_hat,ci_low,ci_high,log_bound,bound,vacuous,baseline_tail,walk_p_hat,violation,error"
    )?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.t,
            r.k,
            r.p_hat,
            r.ci_low,
            r.ci_high,
            r.log_bound,
            r.bound,
            r.vacuous,
            r.baseline_tail,
            r.walk_p_hat,
            r.violation,
            csv_error_field(r.error.as_deref()),
        )?;
    }
    Ok(())
}

fn csv_error_field(error: Option<&str>) -> String {
    match error {
        None => String::new(),
        Some(s) => format!("\"{}\"", s.replace('"', "\"\"")),
    }
}

// ------------------------------------------------------------------ verify

#[derive(Serialize)]
struct CheckRecord {
    name: String,
    /// None: the check could not reach a verdict (inconclusive).
    pass: Option<bool>,
    detail: serde_json::Value,
}

pub(crate) fn verify(
    check: CheckArg,
    cfg_path: Option<&Path>,
    out: Option<PathBuf>,
) -> Result<(), Failure> {
    let loaded = match cfg_path {
        Some(p) => Some(config::load(p)?),
        None => None,
    };
    let mut master_seed = loaded
        .as_ref()
        .map(|c| c.run.master_seed)
        .unwrap_or(DEFAULT_VERIFY_SEED);
    if loaded.is_none() {
        // config::load already applied the override when a config is given.
        if let Some(s) = config::env_seed_override()? {
            master_seed = s;
        }
    }
    let n_override = loaded.as_ref().map(|c| c.run.n_replicates);
    let seed = SeedPolicy::new(master_seed);
    let two_agent = match &loaded {
        Some(c) => TwoAgentConfig {
            influence: c.model.influence,
            noise: c.model.noise,
            y0: c.model.y0,
            horizon: 0,
        },
        None => TwoAgentConfig {
            influence: InfluenceSpec::PowerLaw { b: 1.0, p: 1.5 },
            noise: NoiseSpec::new(
                NoiseFamily::UniformBounded { half_width: 0.5 },
                NoiseLevel::PerAgent,
            ),
            y0: 0.0,
            horizon: 0,
        },
    };

    let mut records: Vec<CheckRecord> = Vec::new();
    let mut ordering_reports: Vec<OrderingReport> = Vec::new();

    if matches!(check, CheckArg::Ordering | CheckArg::All) {
        let n = n_override.unwrap_or(20_000);
        for &t in &[64u64, 256] {
            let report = check_stochastic_ordering(&two_agent, t, None, n, &seed)?;
            records.push(CheckRecord {
                name: format!("ordering:t={t}"),
                pass: Some(report.pass),
                detail: json!({
                    "walk_sd": report.walk_sd,
                    "levels": report.rows.len(),
                    "violated_levels": report.rows.iter().filter(|r| !r.ok).count(),
                }),
            });
            ordering_reports.push(report);
        }
    }

    if matches!(check, CheckArg::Mgf | CheckArg::All) {
        let n = n_override.unwrap_or(1_000_000);
        let lambdas = [0.25, 0.5, 1.0, 2.0];
        let noises: Vec<(String, NoiseSpec)> = match &loaded {
            Some(c) => vec![("config".into(), c.model.noise)],
            None => builtin_noises(),
        };
        for (label, spec) in noises {
            let checks = check_mgf_envelope(&spec, &lambdas, n, &seed)?;
            let failed = checks
                .iter()
                .any(|c| matches!(c.outcome, MgfOutcome::Fail));
            records.push(CheckRecord {
                name: format!("mgf:{label}"),
                pass: Some(!failed),
                detail: serde_json::to_value(&checks)
                    .map_err(|e| Failure::Io(e.to_string()))?,
            });
        }
    }

    if matches!(check, CheckArg::CondMgf | CheckArg::All) {
        let n = n_override.unwrap_or(20_000);
        for &lambda in &[0.0, 0.1, 0.5] {
            let name = format!("cond-mgf:lambda={lambda}");
            match check_conditional_mgf(&two_agent, 8, lambda, 0.1, 2, n, &seed) {
                Ok(report) => records.push(CheckRecord {
                    name,
                    pass: Some(report.pass),
                    detail: serde_json::to_value(&report)
                        .map_err(|e| Failure::Io(e.to_string()))?,
                }),
                Err(e @ Error::InsufficientSamples { .. }) => records.push(CheckRecord {
                    name,
                    pass: None,
                    detail: json!({ "reason": e.to_string() }),
                }),
                Err(e) => return Err(e.into()),
            }
        }
    }

    let failed = records.iter().filter(|r| r.pass == Some(false)).count();
    let inconclusive = records.iter().filter(|r| r.pass.is_none()).count();
    let all_pass = failed == 0 && inconclusive == 0;
    let report = json!({
        "master_seed": master_seed,
        "checks": records,
        "all_pass": all_pass,
    });
    let text = serde_json::to_string_pretty(&report)
        .map_err(|e| Failure::Io(e.to_string()))?;
    println!("{text}");
    if let Some(dir) = out {
        fs::create_dir_all(&dir)?;
        fs::write(dir.join("verify_report.json"), text.clone() + "\n")?;
        for rep in &ordering_reports {
            let mut buf = Vec::new();
            write_ordering_report_csv(&mut buf, rep)?;
            fs::write(dir.join(format!("ordering_t{}.csv", rep.t)), &buf)?;
        }
    }
    if failed > 0 {
        return Err(Failure::Check(format!(
            "{failed} verification check(s) failed"
        )));
    }
    if inconclusive > 0 {
        return Err(Failure::Inconclusive(format!(
            "{inconclusive} verification check(s) were inconclusive"
        )));
    }
    Ok(())
}

fn builtin_noises() -> Vec<(String, NoiseSpec)> {
    let diff = NoiseLevel::DifferenceDirect;
    vec![
        (
            "uniform_bounded".into(),
            NoiseSpec::new(NoiseFamily::UniformBounded { half_width: 1.0 }, diff),
        ),
        (
            "gaussian".into(),
            NoiseSpec::new(NoiseFamily::Gaussian { sigma: 1.0 }, diff),
        ),
        (
            "truncated_gaussian".into(),
            NoiseSpec::new(
                NoiseFamily::TruncatedGaussian {
                    sigma: 1.0,
                    half_width: 2.0,
                },
                diff,
            ),
        ),
        (
            "rademacher".into(),
            NoiseSpec::new(NoiseFamily::Rademacher { magnitude: 1.0 }, diff),
        ),
    ]
}
