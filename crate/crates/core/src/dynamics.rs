//! Process simulators: the two-agent difference process, the explicit
//! two-agent opinion pair, multi-agent graph dynamics, and the influence-free
//! comparator random walk.
//!
//! Draw-consumption contracts are part of the API. A two-agent difference
//! step always consumes exactly one uniform (the influence coin) followed by
//! one difference-noise draw, whichever branch is taken; the comparator walk
//! consumes the identical pattern and simply ignores the coin. Two processes
//! driven by the same stream therefore see the same noise sequence, and with
//! G == 0 the difference process IS the walk, sample path by sample path.

use std::io::Write;

use serde::Serialize;

use crate::error::Error;
use crate::model::{
    InfluenceSpec, MultiAgentConfig, NoiseLevel, PairingPolicy, TwoAgentConfig,
};
use crate::rng::{stream_id, RngStream, SeedPolicy};
use crate::Result;

/// A simulated difference-process path Y(0), ..., Y(horizon), together with
/// the configuration and seeds that generated it.
#[derive(Debug, Clone, Serialize)]
pub struct DiffTrajectory {
    pub values: Vec<f64>,
    pub config: TwoAgentConfig,
    pub master_seed: u64,
    pub replicate: u64,
}

/// A simulated multi-agent path; `values[t][a]` is agent a's opinion at t.
#[derive(Debug, Clone, Serialize)]
pub struct OpinionTrajectory {
    pub n_agents: usize,
    pub values: Vec<Vec<f64>>,
    pub master_seed: u64,
    pub replicate: u64,
}

/// One step of the two-agent difference process.
///
/// Draws the influence coin U, then the difference noise; returns fresh
/// noise if U < G(|y|) (the agents met at their midpoint) and y + noise
/// otherwise. Exactly one coin and one noise draw are consumed on every
/// path, so trajectories are insensitive to branch refactoring.
#[inline]
pub fn step_two_agent_diff(y: f64, config: &TwoAgentConfig, rng: &mut RngStream) -> f64 {
    let u = rng.next_f64();
    let noise = config.noise.sample_diff(rng);
    if u < config.influence.eval_gap(y.abs()) {
        noise
    } else {
        y + noise
    }
}

/// Simulate the difference process from the configured y0 for
/// `config.horizon` steps on the replicate's primary stream.
pub fn simulate_diff_trajectory(
    config: &TwoAgentConfig,
    seed: &SeedPolicy,
    replicate: u64,
) -> Result<DiffTrajectory> {
    config.validate()?;
    let mut rng = seed.stream(replicate, stream_id::PRIMARY);
    let mut values = Vec::with_capacity(config.horizon as usize + 1);
    let mut y = config.y0;
    values.push(y);
    for _ in 0..config.horizon {
        y = step_two_agent_diff(y, config, &mut rng);
        values.push(y);
    }
    Ok(DiffTrajectory {
        values,
        config: *config,
        master_seed: seed.master_seed,
        replicate,
    })
}

/// Simulate the explicit two-agent opinion pair (X_1, X_2) from `x0`.
///
/// Both agents flip one shared influence coin per step (influence is
/// mutual); an influenced pair moves to its midpoint and each agent then
/// adds its own fresh noise term, a non-influenced agent adds noise in
/// place. Requires per-agent noise: a difference-direct spec does not say
/// how to noise the individual opinions.
pub fn simulate_two_agent_opinions(
    config: &TwoAgentConfig,
    x0: (f64, f64),
    seed: &SeedPolicy,
    replicate: u64,
) -> Result<OpinionTrajectory> {
    config.validate()?;
    if config.noise.level != NoiseLevel::PerAgent {
        return Err(Error::config(
            "opinion-pair simulation needs per_agent noise; difference_direct only \
             determines the gap, not the individual opinions",
        ));
    }
    if !x0.0.is_finite() || !x0.1.is_finite() {
        return Err(Error::config("initial opinions must be finite"));
    }
    let mut rng = seed.stream(replicate, stream_id::OPINION);
    let (mut x1, mut x2) = x0;
    let mut values = Vec::with_capacity(config.horizon as usize + 1);
    values.push(vec![x1, x2]);
    for _ in 0..config.horizon {
        let u = rng.next_f64();
        let n1 = config.noise.sample_agent(&mut rng);
        let n2 = config.noise.sample_agent(&mut rng);
        if u < config.influence.eval_gap((x1 - x2).abs()) {
            let mid = (x1 + x2) / 2.0;
            x1 = mid + n1;
            x2 = mid + n2;
        } else {
            x1 += n1;
            x2 += n2;
        }
        values.push(vec![x1, x2]);
    }
    Ok(OpinionTrajectory {
        n_agents: 2,
        values,
        master_seed: seed.master_seed,
        replicate,
    })
}

/// Influence-free comparator: the cumulative sum of difference-noise draws
/// started at 0.
///
/// Each step consumes and discards one uniform before the noise draw so the
/// walk's consumption pattern matches `step_two_agent_diff` exactly; driving
/// both from the same stream yields identical noise and, with G == 0,
/// identical paths. The returned trajectory carries the equivalent
/// constant-zero-influence config.
pub fn simulate_random_walk(
    noise: &crate::model::NoiseSpec,
    horizon: u64,
    seed: &SeedPolicy,
    replicate: u64,
) -> Result<DiffTrajectory> {
    noise.validate()?;
    let mut rng = seed.stream(replicate, stream_id::PRIMARY);
    let mut values = Vec::with_capacity(horizon as usize + 1);
    let mut y = 0.0;
    values.push(y);
    for _ in 0..horizon {
        let _coin = rng.next_f64();
        y += noise.sample_diff(&mut rng);
        values.push(y);
    }
    Ok(DiffTrajectory {
        values,
        config: TwoAgentConfig {
            influence: InfluenceSpec::Constant { g: 0.0 },
            noise: *noise,
            y0: 0.0,
            horizon,
        },
        master_seed: seed.master_seed,
        replicate,
    })
}

/// Select the interacting pairs for one multi-agent step.
///
/// `SingleRandomEdge` picks one edge uniformly (empty graph: no pair).
/// `RandomMaximalMatching` shuffles the edge list uniformly and adds edges
/// greedily while both endpoints are free, producing a maximal matching.
/// Selected pairs are vertex-disjoint by construction.
pub fn select_pairs(
    edges: &[(u32, u32)],
    pairing: PairingPolicy,
    rng: &mut RngStream,
) -> Vec<(u32, u32)> {
    match pairing {
        PairingPolicy::SingleRandomEdge => {
            if edges.is_empty() {
                Vec::new()
            } else {
                vec![edges[rng.next_index(edges.len())]]
            }
        }
        PairingPolicy::RandomMaximalMatching => {
            let mut order: Vec<(u32, u32)> = edges.to_vec();
            rng.shuffle(&mut order);
            let max_vertex = order
                .iter()
                .map(|&(u, v)| u.max(v))
                .max()
                .map(|m| m as usize + 1)
                .unwrap_or(0);
            let mut matched = vec![false; max_vertex];
            let mut pairs = Vec::new();
            for (u, v) in order {
                if !matched[u as usize] && !matched[v as usize] {
                    matched[u as usize] = true;
                    matched[v as usize] = true;
                    pairs.push((u, v));
                }
            }
            pairs
        }
    }
}

/// One step of the multi-agent dynamics; returns the new state.
///
/// Order of random draws: pair selection, then one influence coin per
/// selected pair (in selection order), then one noise term per agent in
/// index order. An influenced pair moves to its shared midpoint; every
/// agent, influenced or not, then adds its own fresh noise. With zero noise
/// the total opinion mass is conserved up to one rounding per interaction.
pub fn step_multi_agent(
    state: &[f64],
    config: &MultiAgentConfig,
    rng: &mut RngStream,
) -> Result<Vec<f64>> {
    if state.len() != config.n_agents {
        return Err(Error::config(format!(
            "state has length {}, expected {}",
            state.len(),
            config.n_agents
        )));
    }
    config.validate()?;
    Ok(step_multi_agent_unchecked(state, config, rng))
}

pub(crate) fn step_multi_agent_unchecked(
    state: &[f64],
    config: &MultiAgentConfig,
    rng: &mut RngStream,
) -> Vec<f64> {
    let pairs = select_pairs(&config.edges, config.pairing, rng);
    let mut next = state.to_vec();
    for (u, v) in pairs {
        let (u, v) = (u as usize, v as usize);
        let coin = rng.next_f64();
        if coin < config.influence.eval_gap((state[u] - state[v]).abs()) {
            let mid = (state[u] + state[v]) / 2.0;
            next[u] = mid;
            next[v] = mid;
        }
    }
    for x in next.iter_mut() {
        *x += config.noise.sample_agent(rng);
    }
    next
}

/// Simulate the multi-agent dynamics for `config.horizon` steps.
pub fn simulate_multi_agent(
    config: &MultiAgentConfig,
    seed: &SeedPolicy,
    replicate: u64,
) -> Result<OpinionTrajectory> {
    config.validate()?;
    let mut rng = seed.stream(replicate, stream_id::PRIMARY);
    let mut state = config.initial_opinions.clone();
    let mut values = Vec::with_capacity(config.horizon as usize + 1);
    values.push(state.clone());
    for _ in 0..config.horizon {
        state = step_multi_agent_unchecked(&state, config, &mut rng);
        values.push(state.clone());
    }
    Ok(OpinionTrajectory {
        n_agents: config.n_agents,
        values,
        master_seed: seed.master_seed,
        replicate,
    })
}

/// Write a difference trajectory as CSV with header `t,value`.
/// Values use shortest round-trip decimal formatting, so output is
/// byte-stable across runs and platforms.
pub fn write_diff_trajectory_csv<W: Write>(w: &mut W, traj: &DiffTrajectory) -> std::io::Result<()> {
    writeln!(w, "t,value")?;
    for (t, v) in traj.values.iter().enumerate() {
        writeln!(w, "{t},{v}")?;
    }
    Ok(())
}

/// Write an opinion trajectory as CSV with header `t,agent_id,value`,
/// rows ordered by time then agent id.
pub fn write_opinion_trajectory_csv<W: Write>(
    w: &mut W,
    traj: &OpinionTrajectory,
) -> std::io::Result<()> {
    writeln!(w, "t,agent_id,value")?;
    for (t, row) in traj.values.iter().enumerate() {
        for (a, v) in row.iter().enumerate() {
            writeln!(w, "{t},{a},{v}")?;
        }
    }
    Ok(())
}
