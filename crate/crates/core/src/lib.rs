//! Simulation and verification toolkit for stochastic bounded-confidence
//! opinion dynamics.
//!
//! Two interacting agents whose opinions drift apart are pulled back to their
//! midpoint with a probability that decays in the opinion gap; every agent
//! also picks up fresh symmetric noise each step. The crate provides
//!
//! * the two-agent opinion-difference process and general multi-agent graph
//!   dynamics ([`dynamics`]),
//! * closed-form Chernoff tail bounds for the difference process in the
//!   bounded-noise and sub-Gaussian regimes, evaluated in log space so they
//!   stay meaningful far beyond floating-point range ([`bounds`]),
//! * Monte Carlo estimators and statistical checks that confront those bounds
//!   and their proof ingredients with simulated data ([`verify`]).
//!
//! All randomness flows through [`SeedPolicy`], which derives independent,
//! platform-stable substreams per (replicate, purpose) pair, so every result
//! in the crate is reproducible bit for bit regardless of thread count.

pub mod bounds;
pub mod dynamics;
pub mod error;
pub mod math;
pub mod model;
pub mod rng;
pub mod stats;
pub mod verify;

pub use error::Error;
pub use model::{
    InfluenceSpec, MultiAgentConfig, NoiseFamily, NoiseLevel, NoiseSpec, PairingPolicy,
    TwoAgentConfig,
};
pub use rng::{RngStream, SeedPolicy};

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
