//! `sbc`: simulate stochastic bounded confidence dynamics, evaluate the
//! analytic tail bounds, and run the statistical verification suite.
//!
//! Exit codes are part of the interface: 0 success, 2 schema/usage problem,
//! 3 regime violation (the message names the violated inequality), 4 budget
//! exceeded, 5 inconclusive verification, 1 anything else (I/O, failed
//! check).

mod commands;
mod config;
mod preset;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Per-t simulation budget guard for `compare`: t * n_replicates must stay
/// at or below this unless overridden.
pub(crate) const DEFAULT_BUDGET: u64 = 2_000_000_000;

#[derive(Parser)]
#[command(
    name = "sbc",
    version,
    about = "Stochastic bounded confidence dynamics: simulate, bound, compare, verify"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate two-agent or multi-agent trajectories from a JSON config
    Simulate {
        /// Experiment config (JSON)
        #[arg(long)]
        config: PathBuf,
        /// Override run.n_replicates
        #[arg(long)]
        reps: Option<u64>,
        /// Output directory (overrides output.directory)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate an analytic tail bound over a time grid (log-space safe)
    Bound(BoundArgs),
    /// Join empirical tail estimates, the analytic bound, and the walk
    /// baseline on a shared time grid
    Compare {
        #[arg(long)]
        config: PathBuf,
        /// Time grid START:STOP:logF (or one value); default: the query's t
        #[arg(long = "t-grid")]
        t_grid: Option<String>,
        /// Per-t budget guard: t * n_replicates must not exceed this
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
        #[arg(long, value_enum, default_value_t = VariantArg::Taylor)]
        variant: VariantArg,
        /// Output directory; default prints CSV to stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run statistical verification checks with fixed seeds
    Verify {
        #[arg(long, value_enum)]
        check: CheckArg,
        /// Optional experiment config supplying model/run parameters
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory for the JSON report and CSVs; default stdout only
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a named preset bundle with pinned seeds
    Preset {
        /// One of: theorem1-regime, theorem2-regime, unstable-demo,
        /// linear-special-case, bounded-confidence-special-case
        name: String,
        /// Root output directory (bundle lands in a subdirectory)
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
pub(crate) struct BoundArgs {
    #[arg(long, value_enum)]
    pub regime: RegimeArg,
    #[arg(long = "B")]
    pub b: f64,
    /// Noise support half-width (bounded regime) / envelope scale (sub-Gaussian)
    #[arg(long = "D")]
    pub d: f64,
    /// Sub-Gaussian standard deviation; required for --regime subgauss
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub delta: f64,
    #[arg(long)]
    pub beta: f64,
    #[arg(long = "beta-prime")]
    pub beta_prime: Option<f64>,
    #[arg(long)]
    pub zeta: Option<f64>,
    #[arg(long)]
    pub c: f64,
    /// START:STOP:logF (multiplicative grid), a single value, or "" for none
    #[arg(long = "t-grid")]
    pub t_grid: String,
    #[arg(long, value_enum, default_value_t = VariantArg::Taylor)]
    pub variant: VariantArg,
    /// Output CSV path; default stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub(crate) enum RegimeArg {
    Bounded,
    Subgauss,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub(crate) enum VariantArg {
    /// Second-order Taylor prefactor, as printed
    Taylor,
    /// Certified finite-t prefactor with the effective alpha
    Rigorous,
}

impl From<VariantArg> for sbc_core::bounds::BoundVariant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Taylor => sbc_core::bounds::BoundVariant::Taylor,
            VariantArg::Rigorous => sbc_core::bounds::BoundVariant::Rigorous,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub(crate) enum CheckArg {
    Ordering,
    Mgf,
    CondMgf,
    All,
}

/// A failed run, tagged with the exit-code class it belongs to.
#[derive(Debug)]
pub(crate) enum Failure {
    /// Malformed config/flags: exit 2.
    Schema(String),
    /// Regime-window violation: exit 3.
    Regime(String),
    /// Simulation budget exceeded: exit 4.
    Budget(String),
    /// Verification could not reach a verdict: exit 5.
    Inconclusive(String),
    /// A verification check was violated: exit 1.
    Check(String),
    /// I/O trouble: exit 1.
    Io(String),
}

impl Failure {
    fn exit_code(&self) -> i32 {
        match self {
            Failure::Schema(_) => 2,
            Failure::Regime(_) => 3,
            Failure::Budget(_) => 4,
            Failure::Inconclusive(_) => 5,
            Failure::Check(_) | Failure::Io(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Schema(m)
            | Failure::Regime(m)
            | Failure::Budget(m)
            | Failure::Inconclusive(m)
            | Failure::Check(m)
            | Failure::Io(m) => m,
        }
    }
}

impl From<sbc_core::Error> for Failure {
    fn from(e: sbc_core::Error) -> Self {
        match e {
            sbc_core::Error::Regime { .. } => Failure::Regime(e.to_string()),
            sbc_core::Error::InsufficientSamples { .. } => Failure::Inconclusive(e.to_string()),
            sbc_core::Error::Config(_) | sbc_core::Error::Domain(_) => {
                Failure::Schema(e.to_string())
            }
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate { config, reps, out } => commands::simulate(&config, reps, out),
        Command::Bound(args) => commands::bound(&args),
        Command::Compare {
            config,
            t_grid,
            budget,
            variant,
            out,
        } => commands::compare(&config, t_grid.as_deref(), budget, variant.into(), out),
        Command::Verify { check, config, out } => {
            commands::verify(check, config.as_deref(), out)
        }
        Command::Preset { name, out } => preset::run(&name, out),
    };
    if let Err(f) = result {
        eprintln!("error: {}", f.message());
        std::process::exit(f.exit_code());
    }
}
