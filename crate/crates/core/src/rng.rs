//! Deterministic random number streams.
//!
//! Every simulation draws from an [`RngStream`] derived from a
//! [`SeedPolicy`] master seed plus a (replicate, purpose) pair. Derivation
//! uses a SplitMix-style 64-bit finalizer, so substreams are platform
//! independent, bit exact, and statistically uncorrelated. Parallel drivers
//! hand each replicate its own stream and reduce with order-independent
//! operations; results therefore never depend on worker count.

/// Purpose tags for substream derivation. Distinct tags keep estimators that
/// share a master seed statistically independent of each other.
pub mod stream_id {
    /// Primary process trajectory (difference process or multi-agent state).
    pub const PRIMARY: u64 = 0;
    /// Influence-free comparator random walk.
    pub const COMPARATOR: u64 = 1;
    /// Explicit two-agent opinion-pair simulation.
    pub const OPINION: u64 = 2;
    /// Raw noise draws for moment-generating-function checks.
    pub const MGF: u64 = 3;
    /// Bootstrap resampling indices.
    pub const BOOTSTRAP: u64 = 4;
}

/// SplitMix64 finalizer: bijective avalanche mix of a 64-bit word.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// Names a master seed and derives per-(replicate, purpose) substreams.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedPolicy {
    pub master_seed: u64,
}

impl SeedPolicy {
    pub fn new(master_seed: u64) -> Self {
        SeedPolicy { master_seed }
    }

    /// Derive the substream for `replicate` and purpose tag `substream`.
    ///
    /// The derivation chains the finalizer over (master, replicate, tag);
    /// for a fixed master seed and replicate the map from tag to stream
    /// state is bijective, and collisions across the full (replicate, tag)
    /// space are no more likely than for a 64-bit hash.
    pub fn stream(&self, replicate: u64, substream: u64) -> RngStream {
        let mut s = mix64(self.master_seed ^ GOLDEN_GAMMA);
        s = mix64(s.wrapping_add(mix64(replicate.wrapping_add(0xD1B5_4A32_D192_ED03))));
        s = mix64(s.wrapping_add(mix64(substream.wrapping_add(0x8CB9_2BA7_2F3D_8DD7))));
        RngStream { state: s }
    }
}

/// SplitMix64 sequence generator.
///
/// Small state, full 2^64 period, passes standard statistical batteries,
/// and, unlike library generators, guaranteed stable across releases,
/// which the reproducibility contract requires.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RngStream {
    state: u64,
}

impl RngStream {
    /// Construct directly from a raw state (tests; prefer `SeedPolicy`).
    pub fn from_state(state: u64) -> Self {
        RngStream { state }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        mix64(self.state)
    }

    /// Uniform f64 in [0, 1), using the top 53 bits.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
        (self.next_u64() >> 11) as f64 * SCALE
    }

    /// Uniform index in [0, n). Lemire's multiply-shift with rejection, so
    /// the distribution is exactly uniform.
    #[inline]
    pub fn next_index(&mut self, n: usize) -> usize {
        debug_assert!(n > 0, "next_index needs a nonempty range");
        let n = n as u64;
        let threshold = n.wrapping_neg() % n;
        loop {
            let x = self.next_u64();
            let m = (x as u128) * (n as u128);
            if (m as u64) >= threshold {
                return (m >> 64) as usize;
            }
        }
    }

    /// Standard normal via Box-Muller (cosine branch).
    ///
    /// Consumes exactly two uniforms per call; self-contained so the draw
    /// sequence can never shift under a dependency upgrade.
    #[inline]
    pub fn next_gaussian(&mut self) -> f64 {
        let u1 = 1.0 - self.next_f64(); // (0, 1]: keeps ln away from 0
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// Fisher-Yates shuffle driven by this stream.
    pub fn shuffle<T>(&mut self, xs: &mut [T]) {
        for i in (1..xs.len()).rev() {
            let j = self.next_index(i + 1);
            xs.swap(i, j);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn same_seed_same_sequence() {
        let policy = SeedPolicy::new(0xDEAD_BEEF);
        let mut a = policy.stream(7, stream_id::PRIMARY);
        let mut b = policy.stream(7, stream_id::PRIMARY);
        for _ in 0..1000 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn distinct_replicate_and_purpose_pairs_yield_distinct_streams() {
        let policy = SeedPolicy::new(42);
        let mut seen = HashSet::new();
        for r in 0..64u64 {
            for s in 0..64u64 {
                let mut st = policy.stream(r, s);
                // compare stream prefixes, not just state
                let fingerprint = (st.next_u64(), st.next_u64());
                assert!(seen.insert(fingerprint), "collision at r={r} s={s}");
            }
        }
    }

    #[test]
    fn derivation_is_frozen() {
        // Canonical values; a change here breaks every recorded experiment.
        let mut s = SeedPolicy::new(0).stream(0, 0);
        assert_eq!(s.next_u64(), 0x0387_5ae0_dbd7_9f19);
        assert_eq!(s.next_u64(), 0xe98a_3b66_17c6_8cf8);
        assert_eq!(s.next_u64(), 0x72d7_89b8_c6d8_5af6);
        let mut s = SeedPolicy::new(0).stream(0, 0);
        assert_eq!(s.next_f64(), 0.013784103295476746);
    }

    #[test]
    fn uniform_f64_is_in_unit_interval_with_right_moments() {
        let mut s = SeedPolicy::new(1).stream(0, 0);
        let n = 200_000;
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for _ in 0..n {
            let u = s.next_f64();
            assert!((0.0..1.0).contains(&u));
            sum += u;
            sumsq += u * u;
        }
        let mean = sum / n as f64;
        let var = sumsq / n as f64 - mean * mean;
        assert!((mean - 0.5).abs() < 0.005, "mean {mean}");
        assert!((var - 1.0 / 12.0).abs() < 0.003, "var {var}");
    }

    #[test]
    fn gaussian_moments() {
        let mut s = SeedPolicy::new(2).stream(0, 0);
        let n = 200_000;
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for _ in 0..n {
            let z = s.next_gaussian();
            sum += z;
            sumsq += z * z;
        }
        let mean = sum / n as f64;
        let var = sumsq / n as f64 - mean * mean;
        assert!(mean.abs() < 0.01, "mean {mean}");
        assert!((var - 1.0).abs() < 0.02, "var {var}");
    }

    #[test]
    fn next_index_is_unbiased_over_small_range() {
        let mut s = SeedPolicy::new(3).stream(0, 0);
        let mut counts = [0u32; 5];
        let n = 250_000;
        for _ in 0..n {
            counts[s.next_index(5)] += 1;
        }
        for (i, &c) in counts.iter().enumerate() {
            let f = c as f64 / n as f64;
            assert!((f - 0.2).abs() < 0.005, "index {i} frequency {f}");
        }
    }

    #[test]
    fn shuffle_permutes() {
        let mut s = SeedPolicy::new(4).stream(0, 0);
        let mut xs: Vec<u32> = (0..50).collect();
        s.shuffle(&mut xs);
        let mut sorted = xs.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..50).collect::<Vec<_>>());
        assert_ne!(xs, (0..50).collect::<Vec<_>>());
    }
}
