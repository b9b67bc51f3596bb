//! Named preset bundles. Each runs a pinned-seed experiment end to end and
//! drops its artifacts (CSVs + resolved-config sidecar) in a subdirectory
//! named after the preset. SBC_SEED still overrides the pinned seed.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use sbc_core::bounds::{BoundVariant, Regime, TailQuery};
use sbc_core::dynamics::{
    simulate_diff_trajectory, simulate_multi_agent, write_opinion_trajectory_csv,
};
use sbc_core::{
    InfluenceSpec, MultiAgentConfig, NoiseFamily, NoiseLevel, NoiseSpec, PairingPolicy,
    SeedPolicy, TwoAgentConfig,
};

use crate::config::{self, ExperimentConfig, GraphSection, ModelSection, OutputSection, RunSection};
use crate::{commands, Failure, DEFAULT_BUDGET};

const PRESETS: [&str; 5] = [
    "theorem1-regime",
    "theorem2-regime",
    "unstable-demo",
    "linear-special-case",
    "bounded-confidence-special-case",
];

pub(crate) fn run(name: &str, out: Option<PathBuf>) -> Result<(), Failure> {
    let root = out.unwrap_or_else(|| PathBuf::from("sbc_out"));
    let dir = root.join(name);
    match name {
        "theorem1-regime" => {
            fs::create_dir_all(&dir)?;
            theorem1_regime(&dir, pinned_seed(1001)?)
        }
        "theorem2-regime" => {
            fs::create_dir_all(&dir)?;
            theorem2_regime(&dir, pinned_seed(2002)?)
        }
        "unstable-demo" => {
            fs::create_dir_all(&dir)?;
            unstable_demo(&dir, pinned_seed(3003)?)
        }
        "linear-special-case" => {
            fs::create_dir_all(&dir)?;
            linear_special_case(&dir, pinned_seed(4004)?)
        }
        "bounded-confidence-special-case" => {
            fs::create_dir_all(&dir)?;
            bounded_confidence_special_case(&dir, pinned_seed(5005)?)
        }
        other => Err(Failure::Schema(format!(
            "unknown preset '{other}'; known presets: {}",
            PRESETS.join(", ")
        ))),
    }
}

fn pinned_seed(default: u64) -> Result<u64, Failure> {
    Ok(config::env_seed_override()?.unwrap_or(default))
}

fn uniform_per_agent(half_width: f64) -> NoiseSpec {
    NoiseSpec::new(
        NoiseFamily::UniformBounded { half_width },
        NoiseLevel::PerAgent,
    )
}

/// Shared tail of the two theorem presets: run the compare join, persist
/// compare.csv + sidecar, summarize to stdout, and fail hard on any
/// soundness violation.
fn compare_bundle(
    dir: &Path,
    model: ModelSection,
    query: TailQuery,
    run: RunSection,
    grid: &[f64],
) -> Result<(), Failure> {
    let rows = commands::run_compare(&model, &query, &run, grid, BoundVariant::Taylor, DEFAULT_BUDGET)?;
    let mut buf = Vec::new();
    commands::write_compare_csv(&mut buf, &rows)?;
    fs::write(dir.join("compare.csv"), &buf)?;
    let resolved = ExperimentConfig {
        model,
        query: Some(query),
        run,
        output: Some(OutputSection {
            directory: dir.to_path_buf(),
            formats: vec!["csv".into()],
        }),
    };
    config::write_sidecar(dir, &resolved)?;
    let mut violations = 0usize;
    for r in &rows {
        println!(
            "t = {:>6}: p_hat = {:<10} bound = {:<12} vacuous = {:<5} walk p_hat = {}",
            r.t, r.p_hat, r.bound, r.vacuous, r.walk_p_hat
        );
        if r.violation {
            violations += 1;
        }
    }
    println!("wrote {}", dir.join("compare.csv").display());
    if violations > 0 {
        return Err(Failure::Check(format!(
            "{violations} soundness violation(s): an empirical CI exceeded a non-vacuous bound"
        )));
    }
    Ok(())
}

/// Bounded-noise regime compare at simulateable t. With these parameters
/// (delta = 0.5, beta = 0.125, c = 1) the bound only bites at very large t,
/// so the rows are marked vacuous; the empirical column still sits far below
/// the walk column, which is the point of the bundle.
fn theorem1_regime(dir: &Path, master_seed: u64) -> Result<(), Failure> {
    let model = ModelSection {
        influence: InfluenceSpec::PowerLaw { b: 1.0, p: 0.5 },
        noise: uniform_per_agent(0.5),
        y0: 0.0,
        horizon: None,
        graph: None,
    };
    let query = TailQuery {
        t: 256.0,
        c: 1.0,
        beta: 0.125,
        regime: Regime::BoundedNoise { delta: 0.5 },
    };
    let run = RunSection {
        n_replicates: 10_000,
        worker_count: 1,
        master_seed,
    };
    compare_bundle(dir, model, query, run, &[256.0, 1024.0, 4096.0])
}

/// Sub-Gaussian regime compare with genuinely unbounded (Gaussian) noise.
fn theorem2_regime(dir: &Path, master_seed: u64) -> Result<(), Failure> {
    let model = ModelSection {
        influence: InfluenceSpec::PowerLaw { b: 1.0, p: 1.0 },
        noise: NoiseSpec::new(NoiseFamily::Gaussian { sigma: 0.5 }, NoiseLevel::PerAgent),
        y0: 0.0,
        horizon: None,
        graph: None,
    };
    let query = TailQuery {
        t: 256.0,
        c: 1.0,
        beta: 0.05,
        regime: Regime::SubGaussian {
            delta: 1.0,
            beta_prime: 0.2,
            zeta: 0.45,
        },
    };
    let run = RunSection {
        n_replicates: 10_000,
        worker_count: 1,
        master_seed,
    };
    compare_bundle(dir, model, query, run, &[256.0, 1024.0, 4096.0])
}

/// Above the stability window (p = 2.5 puts the influence tail below
/// 1/x^2), |Y(t)| drifts like the free walk; the bundle asserts only that
/// the replicate mean of |Y(t)| grows along the grid.
fn unstable_demo(dir: &Path, master_seed: u64) -> Result<(), Failure> {
    let checkpoints: [usize; 3] = [256, 1024, 4096];
    let n_replicates: u64 = 2_000;
    let model = ModelSection {
        influence: InfluenceSpec::PowerLaw { b: 1.0, p: 2.5 },
        noise: uniform_per_agent(0.5),
        y0: 0.0,
        horizon: Some(4096),
        graph: None,
    };
    let config = TwoAgentConfig {
        influence: model.influence,
        noise: model.noise,
        y0: 0.0,
        horizon: 4096,
    };
    let seed = SeedPolicy::new(master_seed);
    let mut sums = [0.0f64; 3];
    for r in 0..n_replicates {
        let traj = simulate_diff_trajectory(&config, &seed, r)?;
        for (i, &t) in checkpoints.iter().enumerate() {
            sums[i] += traj.values[t].abs();
        }
    }
    let means: Vec<f64> = sums.iter().map(|s| s / n_replicates as f64).collect();
    let mut buf = Vec::new();
    writeln!(&mut buf, "t,mean_abs_y")?;
    for (i, &t) in checkpoints.iter().enumerate() {
        writeln!(&mut buf, "{t},{}", means[i])?;
    }
    fs::write(dir.join("trend.csv"), &buf)?;
    let run = RunSection {
        n_replicates,
        worker_count: 1,
        master_seed,
    };
    let resolved = ExperimentConfig {
        model,
        query: None,
        run,
        output: Some(OutputSection {
            directory: dir.to_path_buf(),
            formats: vec!["csv".into()],
        }),
    };
    config::write_sidecar(dir, &resolved)?;
    for (i, &t) in checkpoints.iter().enumerate() {
        println!("t = {t:>5}: mean |Y(t)| = {}", means[i]);
    }
    let monotone = means.windows(2).all(|w| w[1] > w[0]);
    println!("monotone growth: {monotone}");
    println!("wrote {}", dir.join("trend.csv").display());
    if !monotone {
        return Err(Failure::Check(
            "mean |Y(t)| did not grow along the grid in the unstable regime".into(),
        ));
    }
    Ok(())
}

fn complete_edges(n: u32) -> Vec<(u32, u32)> {
    let mut edges = Vec::with_capacity((n * (n - 1) / 2) as usize);
    for i in 0..n {
        for j in (i + 1)..n {
            edges.push((i, j));
        }
    }
    edges
}

fn multi_agent_bundle_files(
    dir: &Path,
    config: &MultiAgentConfig,
    master_seed: u64,
) -> Result<Vec<Vec<f64>>, Failure> {
    let seed = SeedPolicy::new(master_seed);
    let traj = simulate_multi_agent(config, &seed, 0)?;
    let mut buf = Vec::new();
    write_opinion_trajectory_csv(&mut buf, &traj)?;
    fs::write(dir.join("trajectory_opinions_0.csv"), &buf)?;
    Ok(traj.values)
}

fn spread(opinions: &[f64]) -> f64 {
    let max = opinions.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = opinions.iter().cloned().fold(f64::INFINITY, f64::min);
    max - min
}

/// Constant influence g = 1: every matched pair averages, so the dynamics
/// are linear and the spread contracts to the noise floor.
fn linear_special_case(dir: &Path, master_seed: u64) -> Result<(), Failure> {
    let n_agents = 8u32;
    let horizon = 200u64;
    let graph = GraphSection {
        n_agents: n_agents as usize,
        edges: complete_edges(n_agents),
        initial_opinions: (0..n_agents).map(|i| i as f64).collect(),
        pairing: PairingPolicy::RandomMaximalMatching,
    };
    let noise = NoiseSpec::new(NoiseFamily::Gaussian { sigma: 0.1 }, NoiseLevel::PerAgent);
    let config = MultiAgentConfig {
        influence: InfluenceSpec::Constant { g: 1.0 },
        noise,
        n_agents: graph.n_agents,
        edges: graph.edges.clone(),
        initial_opinions: graph.initial_opinions.clone(),
        pairing: graph.pairing,
        horizon,
    };
    let values = multi_agent_bundle_files(dir, &config, master_seed)?;
    let mut buf = Vec::new();
    writeln!(&mut buf, "t,spread")?;
    for (t, row) in values.iter().enumerate() {
        writeln!(&mut buf, "{t},{}", spread(row))?;
    }
    fs::write(dir.join("spread.csv"), &buf)?;
    let model = ModelSection {
        influence: config.influence,
        noise,
        y0: 0.0,
        horizon: Some(horizon),
        graph: Some(graph),
    };
    let resolved = ExperimentConfig {
        model,
        query: None,
        run: RunSection {
            n_replicates: 1,
            worker_count: 1,
            master_seed,
        },
        output: Some(OutputSection {
            directory: dir.to_path_buf(),
            formats: vec!["csv".into()],
        }),
    };
    config::write_sidecar(dir, &resolved)?;
    let initial = spread(&values[0]);
    let last = spread(values.last().expect("horizon >= 1"));
    println!("initial spread = {initial}, final spread = {last}");
    println!("wrote {}", dir.join("spread.csv").display());
    if !(last < initial / 2.0) {
        return Err(Failure::Check(format!(
            "spread failed to contract under averaging: {initial} -> {last}"
        )));
    }
    Ok(())
}

/// Hard-threshold influence with zero noise: the classic bounded-confidence
/// reduction. Opinions freeze into clusters separated by more than the
/// confidence radius.
fn bounded_confidence_special_case(dir: &Path, master_seed: u64) -> Result<(), Failure> {
    let n_agents = 16u32;
    let horizon = 400u64;
    let graph = GraphSection {
        n_agents: n_agents as usize,
        edges: complete_edges(n_agents),
        initial_opinions: (0..n_agents).map(|i| i as f64 * 0.4).collect(),
        pairing: PairingPolicy::RandomMaximalMatching,
    };
    // Rademacher with magnitude 0 is the supported zero-noise spec.
    let noise = NoiseSpec::new(
        NoiseFamily::Rademacher { magnitude: 0.0 },
        NoiseLevel::PerAgent,
    );
    let config = MultiAgentConfig {
        influence: InfluenceSpec::HardThreshold { d: 1.0 },
        noise,
        n_agents: graph.n_agents,
        edges: graph.edges.clone(),
        initial_opinions: graph.initial_opinions.clone(),
        pairing: graph.pairing,
        horizon,
    };
    let values = multi_agent_bundle_files(dir, &config, master_seed)?;
    let finals = values.last().expect("horizon >= 1").clone();
    let mut buf = Vec::new();
    writeln!(&mut buf, "agent_id,opinion")?;
    for (a, v) in finals.iter().enumerate() {
        writeln!(&mut buf, "{a},{v}")?;
    }
    fs::write(dir.join("final_opinions.csv"), &buf)?;
    let model = ModelSection {
        influence: config.influence,
        noise,
        y0: 0.0,
        horizon: Some(horizon),
        graph: Some(graph),
    };
    let resolved = ExperimentConfig {
        model,
        query: None,
        run: RunSection {
            n_replicates: 1,
            worker_count: 1,
            master_seed,
        },
        output: Some(OutputSection {
            directory: dir.to_path_buf(),
            formats: vec!["csv".into()],
        }),
    };
    config::write_sidecar(dir, &resolved)?;
    let clusters = cluster_count(&finals, 0.5);
    println!("final opinions settle into {clusters} cluster(s)");
    println!("wrote {}", dir.join("final_opinions.csv").display());
    if clusters < 2 {
        return Err(Failure::Check(
            "bounded-confidence run collapsed to consensus; expected separated clusters".into(),
        ));
    }
    Ok(())
}

/// Number of groups after sorting, splitting at gaps wider than `gap`.
fn cluster_count(opinions: &[f64], gap: f64) -> usize {
    let mut sorted = opinions.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite opinions"));
    let mut clusters = 1;
    for w in sorted.windows(2) {
        if w[1] - w[0] > gap {
            clusters += 1;
        }
    }
    clusters
}
