//! Property-based invariants over randomized inputs, plus the Monte Carlo
//! reference checks that are too slow for unit tests. Every proptest asserts
//! an exact mathematical invariant (no statistical tolerance), so random
//! inputs cannot make them flaky; the two sampling checks at the bottom use
//! 5-sigma tolerances.

use proptest::prelude::*;

use sbc_core::bounds::{
    bound_bounded_noise, chernoff_bounded, BoundVariant, Regime, TailQuery,
};
use sbc_core::dynamics::{simulate_multi_agent, simulate_random_walk};
use sbc_core::math::mean_variance;
use sbc_core::stats::clopper_pearson;
use sbc_core::verify::{estimate_envelope_exceedance, estimate_tail};
use sbc_core::{
    InfluenceSpec, MultiAgentConfig, NoiseFamily, NoiseLevel, NoiseSpec, PairingPolicy,
    SeedPolicy, TwoAgentConfig,
};

fn influence_strategy() -> impl Strategy<Value = InfluenceSpec> {
    prop_oneof![
        ((0.01f64..=1.0), (0.0f64..4.0)).prop_map(|(b, p)| InfluenceSpec::PowerLaw { b, p }),
        (0.01f64..10.0).prop_map(|d| InfluenceSpec::HardThreshold { d }),
        (0.0f64..=1.0).prop_map(|g| InfluenceSpec::Constant { g }),
    ]
}

fn family_strategy() -> impl Strategy<Value = NoiseFamily> {
    prop_oneof![
        (0.05f64..3.0).prop_map(|half_width| NoiseFamily::UniformBounded { half_width }),
        ((0.05f64..2.0), (0.5f64..3.0)).prop_map(|(sigma, m)| NoiseFamily::TruncatedGaussian {
            sigma,
            half_width: sigma * m,
        }),
        (0.05f64..2.0).prop_map(|sigma| NoiseFamily::Gaussian { sigma }),
        (0.0f64..2.0).prop_map(|magnitude| NoiseFamily::Rademacher { magnitude }),
    ]
}

fn level_strategy() -> impl Strategy<Value = NoiseLevel> {
    prop_oneof![
        Just(NoiseLevel::PerAgent),
        Just(NoiseLevel::DifferenceDirect)
    ]
}

/// Agent count plus a random subset of the complete graph's edges.
fn graph_strategy() -> impl Strategy<Value = (usize, Vec<(u32, u32)>)> {
    (2usize..8).prop_flat_map(|n| {
        let all: Vec<(u32, u32)> = (0..n as u32)
            .flat_map(|i| ((i + 1)..n as u32).map(move |j| (i, j)))
            .collect();
        let len = all.len();
        proptest::collection::vec(proptest::bool::weighted(0.6), len).prop_map(move |mask| {
            let edges: Vec<(u32, u32)> = all
                .iter()
                .zip(&mask)
                .filter(|(_, &keep)| keep)
                .map(|(&e, _)| e)
                .collect();
            (n, edges)
        })
    })
}

proptest! {
    #[test]
    fn influence_is_nonincreasing_and_in_unit_interval(
        influence in influence_strategy(),
        x in 0.0f64..50.0,
        y in 0.0f64..50.0,
    ) {
        let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
        let g_lo = influence.eval(lo).unwrap();
        let g_hi = influence.eval(hi).unwrap();
        prop_assert!((0.0..=1.0).contains(&g_lo));
        prop_assert!((0.0..=1.0).contains(&g_hi));
        prop_assert!(g_hi <= g_lo, "G must be non-increasing: G({lo}) = {g_lo} < G({hi}) = {g_hi}");
    }

    #[test]
    fn substreams_are_reproducible_and_replicate_distinct(
        master in any::<u64>(),
        r1 in 0u64..1_000_000,
        r2 in 0u64..1_000_000,
        s in 0u64..5,
    ) {
        prop_assume!(r1 != r2);
        let policy = SeedPolicy::new(master);
        let mut a = policy.stream(r1, s);
        let mut b = policy.stream(r1, s);
        for _ in 0..4 {
            prop_assert_eq!(a.next_u64(), b.next_u64());
        }
        let mut c = policy.stream(r2, s);
        prop_assert_ne!(policy.stream(r1, s).next_u64(), c.next_u64());
    }

    #[test]
    fn rigorous_alpha_never_exceeds_taylor_alpha(
        b in 0.01f64..=1.0,
        d in 0.01f64..10.0,
        delta in 0.01f64..=1.0,
        t in 1.0f64..1e12,
    ) {
        let params = chernoff_bounded(b, d, delta, t).unwrap();
        if let Some(alpha_eff) = params.alpha_effective {
            prop_assert!(
                alpha_eff <= params.alpha * (1.0 + 1e-12),
                "alpha' = {alpha_eff} > alpha = {}",
                params.alpha
            );
        }
    }

    #[test]
    fn bounded_evaluation_is_total_and_flags_vacuity(
        b in 0.01f64..=1.0,
        d in 0.01f64..10.0,
        delta in 0.01f64..=1.0,
        beta_frac in 0.05f64..0.95,
        c in 0.01f64..5.0,
        t in 1.0f64..1e12,
    ) {
        let query = TailQuery {
            t,
            c,
            beta: beta_frac * delta / 2.0,
            regime: Regime::BoundedNoise { delta },
        };
        for variant in [BoundVariant::Taylor, BoundVariant::Rigorous] {
            let eval = bound_bounded_noise(&query, b, d, variant).unwrap();
            prop_assert!(!eval.log_bound.is_nan());
            prop_assert_eq!(eval.vacuous, eval.log_bound >= 0.0);
            let p = eval.probability();
            prop_assert!((0.0..=1.0).contains(&p));
        }
    }

    #[test]
    fn clopper_pearson_brackets_the_point_estimate(
        trials in 1u64..5_000,
        frac in 0.0f64..=1.0,
        level in prop_oneof![Just(0.9f64), Just(0.95), Just(0.99)],
    ) {
        let successes = ((trials as f64) * frac).floor() as u64;
        let (lo, hi) = clopper_pearson(successes, trials, level);
        let p_hat = successes as f64 / trials as f64;
        prop_assert!((0.0..=1.0).contains(&lo));
        prop_assert!((0.0..=1.0).contains(&hi));
        prop_assert!(lo <= p_hat + 1e-15, "lo = {lo} above p_hat = {p_hat}");
        prop_assert!(hi >= p_hat - 1e-15, "hi = {hi} below p_hat = {p_hat}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn zero_noise_multi_agent_conserves_opinion_sum(
        (n_agents, edges) in graph_strategy(),
        influence in influence_strategy(),
        pairing in prop_oneof![
            Just(PairingPolicy::SingleRandomEdge),
            Just(PairingPolicy::RandomMaximalMatching)
        ],
        opinions_seed in any::<u64>(),
        horizon in 1u64..128,
    ) {
        prop_assume!(!edges.is_empty());
        let mut rng = SeedPolicy::new(opinions_seed).stream(0, 0);
        let initial: Vec<f64> = (0..n_agents).map(|_| rng.next_f64() * 10.0 - 5.0).collect();
        let config = MultiAgentConfig {
            influence,
            noise: NoiseSpec::new(
                NoiseFamily::Rademacher { magnitude: 0.0 },
                NoiseLevel::PerAgent,
            ),
            n_agents,
            edges,
            initial_opinions: initial,
            pairing,
            horizon,
        };
        let traj = simulate_multi_agent(&config, &SeedPolicy::new(7), 0).unwrap();
        let sum0: f64 = traj.values[0].iter().sum();
        for row in &traj.values {
            let sum: f64 = row.iter().sum();
            prop_assert!(
                (sum - sum0).abs() <= 1e-12 * sum0.abs().max(1.0),
                "sum drifted: {sum0} -> {sum}"
            );
        }
    }

    #[test]
    fn envelope_exceedance_dominates_single_time_tail(
        master in any::<u64>(),
        t_span in (2u64..48).prop_flat_map(|end| (1..=end).prop_map(move |start| (start, end))),
        probe_frac in 0.0f64..=1.0,
        c in 0.1f64..2.0,
        n in 50u64..200,
    ) {
        let (t_start, t_end) = t_span;
        let config = TwoAgentConfig {
            influence: InfluenceSpec::PowerLaw { b: 1.0, p: 1.5 },
            noise: NoiseSpec::new(
                NoiseFamily::UniformBounded { half_width: 0.5 },
                NoiseLevel::PerAgent,
            ),
            y0: 0.0,
            horizon: 0,
        };
        let seed = SeedPolicy::new(master);
        let beta = 0.125;
        let envelope =
            estimate_envelope_exceedance(&config, c, beta, t_start, t_end, n, &seed).unwrap();
        let probe_t = t_start + ((t_end - t_start) as f64 * probe_frac).round() as u64;
        let query = TailQuery {
            t: probe_t as f64,
            c,
            beta,
            regime: Regime::BoundedNoise { delta: 0.5 },
        };
        let single = estimate_tail(&config, &query, n, &seed, 1).unwrap();
        // Same replicate substreams, so domination holds pathwise, count
        // for count.
        prop_assert!(
            envelope.n_exceed >= single.n_exceed,
            "envelope exceedances {} below single-t exceedances {} at t = {probe_t}",
            envelope.n_exceed,
            single.n_exceed
        );
    }

    #[test]
    fn noise_families_center_on_zero_and_are_symmetric(
        family in family_strategy(),
        level in level_strategy(),
        master in any::<u64>(),
    ) {
        let spec = NoiseSpec::new(family, level);
        let mut rng = SeedPolicy::new(master).stream(0, 0);
        let n = 2_000usize;
        let draws: Vec<f64> = (0..n).map(|_| spec.sample_diff(&mut rng)).collect();
        let (mean, var) = mean_variance(&draws);
        let tolerance = 5.0 * (var / n as f64).sqrt() + 1e-15;
        prop_assert!(mean.abs() <= tolerance, "mean {mean} beyond {tolerance}");
        let plus = draws.iter().filter(|&&x| x > 0.0).count() as f64 / n as f64;
        let minus = draws.iter().filter(|&&x| x < 0.0).count() as f64 / n as f64;
        prop_assert!(
            (plus - minus).abs() <= 5.0 / (n as f64).sqrt(),
            "asymmetry: {plus} above zero vs {minus} below"
        );
    }
}

/// Reference value: the free walk with U[-1, 1] difference noise has
/// Var(Y'(t)) = t/3 exactly; the estimate over 1e5 replicates must land
/// within 2%.
#[test]
fn walk_variance_matches_t_over_3_at_4096() {
    let noise = NoiseSpec::new(
        NoiseFamily::UniformBounded { half_width: 1.0 },
        NoiseLevel::DifferenceDirect,
    );
    let seed = SeedPolicy::new(416);
    let n = 100_000u64;
    let finals: Vec<f64> = (0..n)
        .map(|r| {
            *simulate_random_walk(&noise, 4096, &seed, r)
                .unwrap()
                .values
                .last()
                .unwrap()
        })
        .collect();
    let (_, var) = mean_variance(&finals);
    let want = 4096.0 / 3.0;
    assert!(
        (var - want).abs() <= 0.02 * want,
        "Var(Y'(4096)) = {var}, want {want} within 2%"
    );
}
