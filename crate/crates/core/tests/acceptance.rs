//! Acceptance gate for the crate: one test per criterion, each printing an
//! `ACCEPT <id> PASS` line (visible under --nocapture; the test name carries
//! the same id). Monte Carlo criteria use pinned seeds and tolerances wide
//! enough that a pass is deterministic, not lucky.
//!
//! accept_02b is expected to fail: the tuple it pins cannot certify decay.
//! The assertion message carries the full analysis; accept_02c shows the
//! same evaluator certifying decay just inside the admissible window.

use sbc_core::bounds::{
    bound_bounded_noise, bound_subgaussian, chernoff_bounded, log_grid, subgaussian_log_terms,
    BoundVariant, Regime, TailQuery,
};
use sbc_core::dynamics::{select_pairs, simulate_diff_trajectory, simulate_multi_agent, simulate_two_agent_opinions};
use sbc_core::math::logsumexp;
use sbc_core::stats::{ks_critical_value, ks_statistic};
use sbc_core::verify::{
    check_conditional_mgf, check_mgf_envelope, check_stochastic_ordering, estimate_tail,
    run_ensemble, MgfOutcome,
};
use sbc_core::{
    Error, InfluenceSpec, MultiAgentConfig, NoiseFamily, NoiseLevel, NoiseSpec, PairingPolicy,
    RngStream, SeedPolicy, TwoAgentConfig,
};

const Z_995: f64 = 2.5758293035488986;

fn rel_eq(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1e-300)
}

fn uniform_per_agent(half_width: f64) -> NoiseSpec {
    NoiseSpec::new(
        NoiseFamily::UniformBounded { half_width },
        NoiseLevel::PerAgent,
    )
}

fn power_law_config(b: f64, p: f64, noise: NoiseSpec) -> TwoAgentConfig {
    TwoAgentConfig {
        influence: InfluenceSpec::PowerLaw { b, p },
        noise,
        y0: 0.0,
        horizon: 0,
    }
}

fn bounded_query(t: f64, c: f64, beta: f64, delta: f64) -> TailQuery {
    TailQuery {
        t,
        c,
        beta,
        regime: Regime::BoundedNoise { delta },
    }
}

/// Index of the maximum, for "eventually strictly decreasing" checks.
fn peak_index(values: &[f64]) -> usize {
    let mut idx = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[idx] {
            idx = i;
        }
    }
    idx
}

#[test]
fn accept_01_chernoff_closed_form() {
    let params = chernoff_bounded(1.0, 1.0, 0.5, 1e4).unwrap();
    assert!(
        rel_eq(params.lambda, 0.1, 1e-12),
        "ACCEPT 01 FAIL: lambda = {}, want 0.1",
        params.lambda
    );
    assert!(
        rel_eq(params.alpha, 1.0 / 202.0, 1e-12),
        "ACCEPT 01 FAIL: alpha = {}, want 1/202",
        params.alpha
    );
    println!("ACCEPT 01 PASS: lambda = 0.1, alpha = 1/202 at (B=1, D=1, delta=0.5, t=1e4)");
}

#[test]
fn accept_02a_bounded_bound_decays_along_log_grid() {
    let grid = log_grid(1e2, 1e40, 100.0).unwrap();
    assert_eq!(grid.len(), 20);
    let evals: Vec<_> = grid
        .iter()
        .map(|&t| {
            bound_bounded_noise(&bounded_query(t, 1.0, 0.125, 0.5), 1.0, 1.0, BoundVariant::Taylor)
                .unwrap()
        })
        .collect();
    let logs: Vec<f64> = evals.iter().map(|e| e.log_bound).collect();
    let peak = peak_index(&logs);
    assert!(
        logs[peak..].windows(2).all(|w| w[1] < w[0]),
        "ACCEPT 02a FAIL: log bound not strictly decreasing past its peak: {logs:?}"
    );
    let at_1e10 = evals[4].probability();
    assert!(rel_eq(grid[4], 1e10, 1e-9));
    assert!(
        !evals[4].vacuous && at_1e10 < 0.05,
        "ACCEPT 02a FAIL: bound at t = 1e10 is {at_1e10}, want non-vacuous and < 0.05"
    );
    let last = *logs.last().unwrap();
    assert!(
        last < -1e4,
        "ACCEPT 02a FAIL: log bound at t = 1e40 is {last}, want < -1e4"
    );
    println!("ACCEPT 02a PASS: peak at t = {}, bound(1e10) = {at_1e10}, log bound(1e40) = {last}", grid[peak]);
}

/// The pinned sub-Gaussian tuple (delta=1, beta=0.2, beta'=0.15, zeta=0.45,
/// B=sigma=D=c=1) cannot certify decay, so this test fails by construction;
/// the assertion message carries the analysis. accept_02c runs the same
/// check just inside the admissible window.
#[test]
fn accept_02b_subgaussian_decay_at_pinned_tuple() {
    let (delta, beta, beta_prime, zeta, c) = (1.0, 0.2, 0.15, 0.45, 1.0);
    let lo = (delta / 4.0 - beta) / (3.0 - 1.5 * delta);
    let hi = (delta / 4.0 - beta) / (1.0 - 0.5 * delta);
    let query = TailQuery {
        t: 1e30,
        c,
        beta,
        regime: Regime::SubGaussian {
            delta,
            beta_prime,
            zeta,
        },
    };
    let window_verdict = bound_subgaussian(&query, 1.0, 1.0, 1.0);
    assert!(
        matches!(window_verdict, Err(Error::Regime { .. })),
        "the evaluator must reject beta' = {beta_prime} outside ({lo}, {hi})"
    );
    // Window checks ignored, the raw bound grows without limit: evaluate the
    // log terms directly along a grid.
    let raw: Vec<(f64, f64)> = [1e10f64, 1e20, 1e30]
        .iter()
        .map(|&t| {
            let (t1, t2, _k, _params, _h) =
                subgaussian_log_terms(1.0, 1.0, 1.0, delta, beta, beta_prime, zeta, c, t).unwrap();
            (t, logsumexp(t1, t2))
        })
        .collect();
    let diverges = raw.windows(2).all(|w| w[1].1 > w[0].1);
    let msg = format!(
        "ACCEPT 02b FAIL: the pinned tuple (delta={delta}, beta={beta}, beta'={beta_prime}, \
         zeta={zeta}, B=sigma=D=c=1) cannot reach log bound < -100 by t = 1e30.\n\
         (1) Admissibility: decay of the dominant term 2[exp(lambda^2 sigma^2 h/2) + \
         gamma/alpha] e^(-lambda k) needs the exponent lambda*k ~ t^((1/2-beta) - \
         (1/2+beta')(2-delta)/2) to grow, i.e. beta' < (delta/4 - beta)/(1 - delta/2); with \
         delta = {delta}, beta = {beta} the admissible window is beta' in ({lo:.6}, {hi:.6}) \
         and {beta_prime} lies above it, so the evaluator rejects the tuple: {window_verdict:?}.\n\
         (2) Evaluated with the window check disabled, the raw log bound rises like \
         (1/2+beta')(2-delta) ln t = 0.65 ln t, because lambda*k ~ t^(-0.025) -> 0 while \
         -ln(alpha) ~ (1/2+beta')(2-delta) ln t grows: {raw:?} (monotone increasing: {diverges}).\n\
         (3) The companion run in accept_02c flips beta to 0.05 so beta' = 0.2 sits inside \
         its window (0.133..., 0.4) and the same evaluator reaches log bound = -950.259... \
         at t = 1e30."
    );
    println!("{msg}");
    panic!("{msg}");
}

#[test]
fn accept_02c_subgaussian_bound_decays_inside_window() {
    let grid = log_grid(1e2, 1e30, 100.0).unwrap();
    let evals: Vec<_> = grid
        .iter()
        .map(|&t| {
            let query = TailQuery {
                t,
                c: 1.0,
                beta: 0.05,
                regime: Regime::SubGaussian {
                    delta: 1.0,
                    beta_prime: 0.2,
                    zeta: 0.45,
                },
            };
            bound_subgaussian(&query, 1.0, 1.0, 1.0).unwrap()
        })
        .collect();
    let logs: Vec<f64> = evals.iter().map(|e| e.log_bound).collect();
    let peak = peak_index(&logs);
    assert!(
        logs[peak..].windows(2).all(|w| w[1] < w[0]),
        "ACCEPT 02c FAIL: log bound not strictly decreasing past its peak: {logs:?}"
    );
    let last = *logs.last().unwrap();
    assert!(
        last < -100.0,
        "ACCEPT 02c FAIL: log bound at t = 1e30 is {last}, want < -100"
    );
    assert!(
        rel_eq(last, -950.2594186860075, 1e-9),
        "ACCEPT 02c FAIL: regression drift, log bound(1e30) = {last}"
    );
    println!("ACCEPT 02c PASS: log bound(1e30) = {last} with (delta=1, beta=0.05, beta'=0.2, zeta=0.45)");
}

#[test]
fn accept_03_concentration_versus_free_walk() {
    let n = 100_000;
    let seed = SeedPolicy::new(303);
    let config = power_law_config(1.0, 1.5, uniform_per_agent(0.5));
    let walk = TwoAgentConfig {
        influence: InfluenceSpec::Constant { g: 0.0 },
        ..config
    };
    let query = bounded_query(4096.0, 1.0, 0.125, 0.5);
    let est = estimate_tail(&config, &query, n, &seed, 1).unwrap();
    let walk_est = estimate_tail(&walk, &query, n, &seed, 1).unwrap();
    assert_eq!(est.ci_level, 0.99);
    assert!(
        est.p_hat < 0.01,
        "ACCEPT 03 FAIL: sbc tail p_hat = {} at k = {}, want < 0.01",
        est.p_hat,
        est.k
    );
    assert!(
        walk_est.p_hat > 0.2,
        "ACCEPT 03 FAIL: walk tail p_hat = {}, want > 0.2",
        walk_est.p_hat
    );
    println!(
        "ACCEPT 03 PASS: p_hat = {} (CI [{}, {}]) vs walk {} at k = {}",
        est.p_hat, est.ci_low, est.ci_high, walk_est.p_hat, est.k
    );
}

/// Bound soundness on the feasible-and-non-vacuous intersection. The
/// strong-reset corner (delta = 0.9, beta = 0.4, c = 3) is the one place the
/// bounded-noise bound is already informative at simulateable t, so that is
/// where the CI-vs-bound comparison carries force. The sub-Gaussian bound is
/// vacuous at every simulateable t, so its feasible intersection is empty.
#[test]
fn accept_04_soundness_where_bound_informative_and_feasible() {
    let n = 50_000;
    let seed = SeedPolicy::new(404);
    let config = power_law_config(1.0, 0.1, uniform_per_agent(0.5));
    for &t in &[256.0f64, 1024.0, 4096.0] {
        let query = bounded_query(t, 3.0, 0.4, 0.9);
        let est = estimate_tail(&config, &query, n, &seed, 1).unwrap();
        for variant in [BoundVariant::Taylor, BoundVariant::Rigorous] {
            let eval = bound_bounded_noise(&query, 1.0, 1.0, variant).unwrap();
            assert!(
                !eval.vacuous,
                "ACCEPT 04 FAIL: bound vacuous at t = {t} ({variant:?}); the grid no longer \
                 exercises the criterion"
            );
            assert!(
                est.ci_high <= eval.probability(),
                "ACCEPT 04 FAIL: CI upper {} exceeds the {variant:?} bound {} at t = {t}",
                est.ci_high,
                eval.probability()
            );
        }
    }
    println!("ACCEPT 04 PASS: 99% CI upper below both bound variants at t in {{256, 1024, 4096}}");
}

#[test]
fn accept_05_stochastic_ordering_against_walk() {
    let n = 100_000;
    let seed = SeedPolicy::new(505);
    let noise = uniform_per_agent(0.5);
    let configs = [
        power_law_config(1.0, 1.5, noise),
        TwoAgentConfig {
            influence: InfluenceSpec::HardThreshold { d: 1.0 },
            noise,
            y0: 0.0,
            horizon: 0,
        },
    ];
    for config in &configs {
        for &t in &[64u64, 256, 1024] {
            let report = check_stochastic_ordering(config, t, None, n, &seed).unwrap();
            assert!(
                report.pass,
                "ACCEPT 05 FAIL: ordering violated at t = {t} under {:?}: {} of {} levels",
                config.influence,
                report.rows.iter().filter(|r| !r.ok).count(),
                report.rows.len()
            );
        }
    }
    println!("ACCEPT 05 PASS: Y below the walk at every level, t in {{64, 256, 1024}}, both influence shapes");
}

#[test]
fn accept_06_mgf_envelopes_and_closed_forms() {
    let n = 1_000_000;
    let seed = SeedPolicy::new(606);
    let diff = NoiseLevel::DifferenceDirect;
    let lambdas = [0.25, 0.5, 1.0, 2.0];
    let families: [(NoiseFamily, &str); 4] = [
        (NoiseFamily::UniformBounded { half_width: 1.0 }, "uniform"),
        (NoiseFamily::Gaussian { sigma: 1.0 }, "gaussian"),
        (
            NoiseFamily::TruncatedGaussian {
                sigma: 1.0,
                half_width: 2.0,
            },
            "truncated",
        ),
        (NoiseFamily::Rademacher { magnitude: 1.0 }, "rademacher"),
    ];
    for (family, label) in families {
        let checks = check_mgf_envelope(&NoiseSpec::new(family, diff), &lambdas, n, &seed).unwrap();
        for check in &checks {
            assert!(
                matches!(check.outcome, MgfOutcome::Pass),
                "ACCEPT 06 FAIL: {label} at lambda = {} gave {:?} (m_hat = {}, bound = {})",
                check.lambda,
                check.outcome,
                check.m_hat,
                check.bound
            );
        }
        // Closed-form spot values sit inside the 99% CI of their estimates.
        let spot = match label {
            "rademacher" => Some((2usize, 1.0f64.cosh())),      // E e^{1·X} = cosh 1
            "uniform" => Some((3usize, 2.0f64.sinh() / 2.0)),   // E e^{2·X} = sinh 2 / 2
            _ => None,
        };
        if let Some((idx, want)) = spot {
            let check = &checks[idx];
            assert!(
                (check.m_hat - want).abs() <= Z_995 * check.std_error,
                "ACCEPT 06 FAIL: {label} spot value {} outside CI around {}",
                want,
                check.m_hat
            );
        }
    }
    println!("ACCEPT 06 PASS: all envelopes hold; cosh(1) and sinh(2)/2 recovered in-CI");
}

#[test]
fn accept_07_conditional_mgf_across_20_seeds() {
    let n = 20_000;
    let config = power_law_config(1.0, 1.5, uniform_per_agent(0.5));
    let mut inconclusive = 0u32;
    for master in 700..720u64 {
        let seed = SeedPolicy::new(master);
        for &lambda in &[0.0, 0.1, 0.5] {
            match check_conditional_mgf(&config, 8, lambda, 0.1, 2, n, &seed) {
                Ok(report) => assert!(
                    report.pass,
                    "ACCEPT 07 FAIL: restriction violated at seed {master}, lambda = {lambda}: \
                     delta_lower_99 = {} > 0",
                    report.delta_lower_99
                ),
                Err(Error::InsufficientSamples { .. }) => inconclusive += 1,
                Err(e) => panic!("ACCEPT 07 FAIL: unexpected error {e}"),
            }
        }
    }
    println!("ACCEPT 07 PASS: 60 checks passed or inconclusive ({inconclusive} inconclusive), never violated");
}

#[test]
fn accept_08_ensemble_bitwise_deterministic_across_workers() {
    let n = 20_000;
    let seed = SeedPolicy::new(808);
    let jobs = vec![
        (
            power_law_config(1.0, 1.5, uniform_per_agent(0.5)),
            bounded_query(256.0, 1.0, 0.125, 0.5),
        ),
        (
            TwoAgentConfig {
                influence: InfluenceSpec::HardThreshold { d: 1.0 },
                noise: uniform_per_agent(0.5),
                y0: 0.0,
                horizon: 0,
            },
            bounded_query(512.0, 1.0, 0.2, 0.5),
        ),
    ];
    let reference: Vec<_> = run_ensemble(&jobs, n, &seed, 1)
        .into_iter()
        .map(|r| r.unwrap())
        .collect();
    for workers in [4usize, 8] {
        let got: Vec<_> = run_ensemble(&jobs, n, &seed, workers)
            .into_iter()
            .map(|r| r.unwrap())
            .collect();
        assert_eq!(
            got, reference,
            "ACCEPT 08 FAIL: worker_count = {workers} changed a TailEstimate"
        );
    }
    println!("ACCEPT 08 PASS: bit-identical estimates for worker_count in {{1, 4, 8}}");
}

#[test]
fn accept_09_opinion_pair_and_difference_agree_in_law() {
    let n = 100_000u64;
    let seed = SeedPolicy::new(909);
    let config = TwoAgentConfig {
        horizon: 64,
        ..power_law_config(1.0, 1.5, uniform_per_agent(0.5))
    };
    let mut from_pairs = Vec::with_capacity(n as usize);
    let mut from_diff = Vec::with_capacity(n as usize);
    for r in 0..n {
        let pair = simulate_two_agent_opinions(&config, (0.0, 0.0), &seed, r).unwrap();
        let last = pair.values.last().unwrap();
        from_pairs.push((last[0] - last[1]).abs());
        let diff = simulate_diff_trajectory(&config, &seed, r).unwrap();
        from_diff.push(diff.values.last().unwrap().abs());
    }
    let d = ks_statistic(&mut from_pairs, &mut from_diff);
    let crit = ks_critical_value(n as usize, n as usize, 0.01);
    assert!(
        d <= crit,
        "ACCEPT 09 FAIL: KS statistic {d} above the 1% critical value {crit}"
    );
    println!("ACCEPT 09 PASS: KS = {d} <= {crit} on |Y(64)| with 1e5 replicates per representation");
}

#[test]
fn accept_10_multi_agent_conservation_and_matching() {
    // Fixed random graph on 16 vertices.
    let mut graph_rng = SeedPolicy::new(1010).stream(0, 0);
    let mut edges = Vec::new();
    for i in 0..16u32 {
        for j in (i + 1)..16 {
            if graph_rng.next_f64() < 0.3 {
                edges.push((i, j));
            }
        }
    }
    assert!(edges.len() >= 16, "graph too sparse to exercise matching");
    let config = MultiAgentConfig {
        influence: InfluenceSpec::HardThreshold { d: 2.0 },
        noise: NoiseSpec::new(
            NoiseFamily::Rademacher { magnitude: 0.0 },
            NoiseLevel::PerAgent,
        ),
        n_agents: 16,
        edges: edges.clone(),
        initial_opinions: (0..16).map(|i| i as f64 * 0.7).collect(),
        pairing: PairingPolicy::RandomMaximalMatching,
        horizon: 10_000,
    };
    let seed = SeedPolicy::new(1010);
    let traj = simulate_multi_agent(&config, &seed, 0).unwrap();
    let sum0: f64 = traj.values[0].iter().sum();
    for (t, row) in traj.values.iter().enumerate() {
        let sum: f64 = row.iter().sum();
        assert!(
            (sum - sum0).abs() <= 1e-12 * sum0.abs().max(1.0),
            "ACCEPT 10 FAIL: zero-noise opinion sum drifted at step {t}: {sum0} -> {sum}"
        );
    }
    // Pair selection never gives a vertex two partners, under either policy.
    for policy in [PairingPolicy::RandomMaximalMatching, PairingPolicy::SingleRandomEdge] {
        let mut rng = RngStream::from_state(SeedPolicy::new(1010).master_seed ^ 0x9e37);
        for step in 0..10_000 {
            let pairs = select_pairs(&edges, policy, &mut rng);
            let mut seen = [false; 16];
            for &(i, j) in &pairs {
                assert!(edges.contains(&(i, j)), "pair outside the edge set");
                for v in [i as usize, j as usize] {
                    assert!(
                        !seen[v],
                        "ACCEPT 10 FAIL: vertex {v} matched twice in step {step} under {policy:?}"
                    );
                    seen[v] = true;
                }
            }
        }
    }
    println!("ACCEPT 10 PASS: sum conserved to 1e-12 over 1e4 steps; matching sound under both policies");
}

#[test]
fn accept_11_walk_tail_grows_at_sub_diffusive_threshold() {
    let n = 20_000;
    let seed = SeedPolicy::new(1111);
    let walk = TwoAgentConfig {
        influence: InfluenceSpec::Constant { g: 0.0 },
        noise: uniform_per_agent(0.5),
        y0: 0.0,
        horizon: 0,
    };
    // k = t^0.4 grows slower than the sqrt(t) diffusive scale, so the walk's
    // exceedance probability must rise along the grid.
    let p_hats: Vec<f64> = [256.0f64, 1024.0, 4096.0]
        .iter()
        .map(|&t| {
            estimate_tail(&walk, &bounded_query(t, 1.0, 0.1, 0.5), n, &seed, 1)
                .unwrap()
                .p_hat
        })
        .collect();
    assert!(
        p_hats.windows(2).all(|w| w[1] > w[0]),
        "ACCEPT 11 FAIL: walk tail not monotone along the grid: {p_hats:?}"
    );
    println!("ACCEPT 11 PASS: walk tail rises {p_hats:?} at k = t^0.4");
}
