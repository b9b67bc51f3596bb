//! Model vocabulary: noise families, influence functions, and the
//! configurations that tie them to a process.
//!
//! All types serialize with serde (externally tagged enums, snake_case) so
//! experiment configs can be written as JSON. Validation is explicit via
//! `validate()`; the simulation and bound entry points call it, so invalid
//! specs are rejected before any randomness is consumed.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::rng::RngStream;
use crate::Result;

/// Distribution family of a single noise term. Every family is symmetric
/// about zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum NoiseFamily {
    /// Uniform on [-half_width, half_width].
    UniformBounded { half_width: f64 },
    /// Gaussian with scale `sigma`, conditioned on [-half_width, half_width]
    /// by rejection.
    TruncatedGaussian { sigma: f64, half_width: f64 },
    /// Gaussian with scale `sigma` (unbounded support).
    Gaussian { sigma: f64 },
    /// +magnitude or -magnitude with equal probability. Magnitude zero is
    /// allowed and gives the noiseless process.
    Rademacher { magnitude: f64 },
}

/// Whether the spec describes per-agent noise terms (the difference process
/// then sees n_1 - n_2) or the difference noise directly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseLevel {
    PerAgent,
    DifferenceDirect,
}

/// Noise specification: a family plus the level it applies at.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    pub family: NoiseFamily,
    pub level: NoiseLevel,
}

impl NoiseSpec {
    pub fn new(family: NoiseFamily, level: NoiseLevel) -> Self {
        NoiseSpec { family, level }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        match self.family {
            NoiseFamily::UniformBounded { half_width } => {
                if !ok(half_width) {
                    return Err(Error::config(format!(
                        "uniform_bounded half_width must be finite and > 0, got {half_width}"
                    )));
                }
            }
            NoiseFamily::TruncatedGaussian { sigma, half_width } => {
                if !ok(sigma) || !ok(half_width) {
                    return Err(Error::config(format!(
                        "truncated_gaussian needs sigma > 0 and half_width > 0, got sigma={sigma}, half_width={half_width}"
                    )));
                }
            }
            NoiseFamily::Gaussian { sigma } => {
                if !ok(sigma) {
                    return Err(Error::config(format!(
                        "gaussian sigma must be finite and > 0, got {sigma}"
                    )));
                }
            }
            // magnitude 0 is the supported noiseless degenerate case
            NoiseFamily::Rademacher { magnitude } => {
                if !(magnitude.is_finite() && magnitude >= 0.0) {
                    return Err(Error::config(format!(
                        "rademacher magnitude must be finite and >= 0, got {magnitude}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// One draw of a single agent's noise term.
    pub fn sample_agent(&self, rng: &mut RngStream) -> f64 {
        match self.family {
            NoiseFamily::UniformBounded { half_width } => {
                (2.0 * rng.next_f64() - 1.0) * half_width
            }
            NoiseFamily::TruncatedGaussian { sigma, half_width } => {
                // rejection sampling; acceptance region |x| <= half_width,
                // acceptance probability 2*Phi(half_width/sigma) - 1
                loop {
                    let x = sigma * rng.next_gaussian();
                    if x.abs() <= half_width {
                        return x;
                    }
                }
            }
            NoiseFamily::Gaussian { sigma } => sigma * rng.next_gaussian(),
            NoiseFamily::Rademacher { magnitude } => {
                if rng.next_f64() < 0.5 {
                    -magnitude
                } else {
                    magnitude
                }
            }
        }
    }

    /// One draw of the difference-process noise: n_1 - n_2 of two
    /// independent per-agent terms, or a single direct draw.
    pub fn sample_diff(&self, rng: &mut RngStream) -> f64 {
        match self.level {
            NoiseLevel::PerAgent => {
                let n1 = self.sample_agent(rng);
                let n2 = self.sample_agent(rng);
                n1 - n2
            }
            NoiseLevel::DifferenceDirect => self.sample_agent(rng),
        }
    }

    /// Sub-Gaussian variance proxy sigma^2 of the difference noise: the
    /// smallest s^2 this crate certifies with E[exp(l X)] <= exp(l^2 s^2 / 2).
    ///
    /// Per family (single term): uniform and Rademacher use the bounded-range
    /// value half_width^2 (Hoeffding), Gaussian is exact at sigma^2, and the
    /// truncated Gaussian gets min(sigma^2, half_width^2) since both
    /// dominate it. Per-agent level doubles the value because the difference
    /// of two independent sub-Gaussians adds their parameters.
    pub fn subgaussian_parameter(&self) -> f64 {
        let single = match self.family {
            NoiseFamily::UniformBounded { half_width } => half_width * half_width,
            NoiseFamily::TruncatedGaussian { sigma, half_width } => {
                (sigma * sigma).min(half_width * half_width)
            }
            NoiseFamily::Gaussian { sigma } => sigma * sigma,
            NoiseFamily::Rademacher { magnitude } => magnitude * magnitude,
        };
        match self.level {
            NoiseLevel::PerAgent => 2.0 * single,
            NoiseLevel::DifferenceDirect => single,
        }
    }

    /// Half-width of the difference-noise support, None when unbounded.
    pub fn support_half_width(&self) -> Option<f64> {
        let single = match self.family {
            NoiseFamily::UniformBounded { half_width } => Some(half_width),
            NoiseFamily::TruncatedGaussian { half_width, .. } => Some(half_width),
            NoiseFamily::Gaussian { .. } => None,
            NoiseFamily::Rademacher { magnitude } => Some(magnitude),
        }?;
        Some(match self.level {
            NoiseLevel::PerAgent => 2.0 * single,
            NoiseLevel::DifferenceDirect => single,
        })
    }

    /// Exact variance of the difference noise.
    pub fn variance(&self) -> f64 {
        let single = match self.family {
            NoiseFamily::UniformBounded { half_width } => half_width * half_width / 3.0,
            NoiseFamily::TruncatedGaussian { sigma, half_width } => {
                // Var of N(0, sigma^2) conditioned on |x| <= a:
                // sigma^2 * (1 - 2 a phi(a/sigma) / (sigma (2 Phi(a/sigma) - 1)))
                let a = half_width / sigma;
                let phi = (-0.5 * a * a).exp() / (2.0 * std::f64::consts::PI).sqrt();
                let mass = crate::stats::standard_normal_cdf(a)
                    - crate::stats::standard_normal_cdf(-a);
                sigma * sigma * (1.0 - 2.0 * a * phi / mass)
            }
            NoiseFamily::Gaussian { sigma } => sigma * sigma,
            NoiseFamily::Rademacher { magnitude } => magnitude * magnitude,
        };
        match self.level {
            NoiseLevel::PerAgent => 2.0 * single,
            NoiseLevel::DifferenceDirect => single,
        }
    }
}

/// Influence probability G(x) of the opinion gap x >= 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum InfluenceSpec {
    /// G(x) = min(1, b / (1 + x^p)). b in (0, 1], p >= 0.
    PowerLaw { b: f64, p: f64 },
    /// G(x) = 1 for x <= d, else 0 (bounded-confidence indicator).
    HardThreshold { d: f64 },
    /// G(x) = g for all x (linear-dynamics special case).
    Constant { g: f64 },
}

impl InfluenceSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            InfluenceSpec::PowerLaw { b, p } => {
                if !(b.is_finite() && b > 0.0 && b <= 1.0) {
                    return Err(Error::config(format!(
                        "power_law b must lie in (0, 1], got {b}"
                    )));
                }
                if !(p.is_finite() && p >= 0.0) {
                    return Err(Error::config(format!("power_law p must be >= 0, got {p}")));
                }
            }
            InfluenceSpec::HardThreshold { d } => {
                if !(d.is_finite() && d >= 0.0) {
                    return Err(Error::config(format!(
                        "hard_threshold d must be >= 0, got {d}"
                    )));
                }
            }
            InfluenceSpec::Constant { g } => {
                if !(g.is_finite() && (0.0..=1.0).contains(&g)) {
                    return Err(Error::config(format!(
                        "constant g must lie in [0, 1], got {g}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Influence probability at gap `x`. Errors on negative `x`; the gap is
    /// a distance and callers must pass |y|.
    pub fn eval(&self, x: f64) -> Result<f64> {
        if !(x >= 0.0) {
            return Err(Error::domain(format!(
                "influence is defined for nonnegative gaps, got x={x}"
            )));
        }
        Ok(self.eval_gap(x))
    }

    /// Hot-path evaluation; `x` must already be a nonnegative gap.
    #[inline]
    pub(crate) fn eval_gap(&self, x: f64) -> f64 {
        debug_assert!(x >= 0.0);
        match *self {
            // x.powf(p) evaluates 0^0 to 1, which matches the x -> 0 limit
            // of x^0 and keeps G continuous at the origin for p = 0
            InfluenceSpec::PowerLaw { b, p } => (b / (1.0 + x.powf(p))).min(1.0),
            InfluenceSpec::HardThreshold { d } => {
                if x <= d {
                    1.0
                } else {
                    0.0
                }
            }
            InfluenceSpec::Constant { g } => g,
        }
    }
}

/// Two-agent difference process: the scalar gap Y(t) steps to fresh noise
/// with probability G(|Y(t)|) and to Y(t) + noise otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoAgentConfig {
    pub influence: InfluenceSpec,
    pub noise: NoiseSpec,
    /// Initial gap Y(0).
    #[serde(default)]
    pub y0: f64,
    /// Number of steps to simulate.
    pub horizon: u64,
}

impl TwoAgentConfig {
    pub fn validate(&self) -> Result<()> {
        self.influence.validate()?;
        self.noise.validate()?;
        if !self.y0.is_finite() {
            return Err(Error::config(format!("y0 must be finite, got {}", self.y0)));
        }
        Ok(())
    }
}

/// How interacting pairs are chosen each step of the multi-agent dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairingPolicy {
    /// One edge uniformly at random per step.
    SingleRandomEdge,
    /// A uniformly shuffled greedy maximal matching; several disjoint pairs
    /// may interact in the same step.
    RandomMaximalMatching,
}

/// Multi-agent dynamics on an undirected simple graph. The same influence
/// function applies on every edge; noise is per-agent by construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MultiAgentConfig {
    pub influence: InfluenceSpec,
    pub noise: NoiseSpec,
    pub n_agents: usize,
    /// Undirected edge list; endpoints must be distinct and in range.
    pub edges: Vec<(u32, u32)>,
    pub initial_opinions: Vec<f64>,
    pub pairing: PairingPolicy,
    pub horizon: u64,
}

impl MultiAgentConfig {
    pub fn validate(&self) -> Result<()> {
        self.influence.validate()?;
        self.noise.validate()?;
        if self.noise.level != NoiseLevel::PerAgent {
            return Err(Error::config(
                "multi-agent dynamics needs per_agent noise; difference_direct has no \
                 per-agent interpretation",
            ));
        }
        if self.n_agents == 0 {
            return Err(Error::config("n_agents must be positive"));
        }
        if self.initial_opinions.len() != self.n_agents {
            return Err(Error::config(format!(
                "initial_opinions has length {}, expected n_agents = {}",
                self.initial_opinions.len(),
                self.n_agents
            )));
        }
        if let Some(bad) = self.initial_opinions.iter().find(|x| !x.is_finite()) {
            return Err(Error::config(format!(
                "initial opinions must be finite, got {bad}"
            )));
        }
        let mut seen = std::collections::HashSet::new();
        for &(u, v) in &self.edges {
            if u == v {
                return Err(Error::config(format!("self-loop at vertex {u}")));
            }
            if u as usize >= self.n_agents || v as usize >= self.n_agents {
                return Err(Error::config(format!(
                    "edge ({u}, {v}) out of range for {} agents",
                    self.n_agents
                )));
            }
            let key = (u.min(v), u.max(v));
            if !seen.insert(key) {
                return Err(Error::config(format!("duplicate edge ({u}, {v})")));
            }
        }
        Ok(())
    }
}
