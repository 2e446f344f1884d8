//! Command-line front end: configuration validation, protocol execution with
//! deterministic seeding, and re-analysis of stored time-tag streams.
//!
//! Exit codes: 0 success, 1 validation error (bad config, bad flags, refusal
//! to overwrite), 2 runtime error.

mod config;
mod run;

use clap::{Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "trionsim", version, about = "Cavity-enhanced hole-spin time-bin entanglement simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ProtocolName {
    Spinprep,
    Rabi,
    Ramsey,
    Timebin,
    Ghz,
    Photnum,
    Storage,
}

impl ProtocolName {
    fn as_str(&self) -> &'static str {
        match self {
            ProtocolName::Spinprep => "spinprep",
            ProtocolName::Rabi => "rabi",
            ProtocolName::Ramsey => "ramsey",
            ProtocolName::Timebin => "timebin",
            ProtocolName::Ghz => "ghz",
            ProtocolName::Photnum => "photnum",
            ProtocolName::Storage => "storage",
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum VariantArg {
    A,
    B,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Ghz,
    Cluster,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AreaArg {
    Half,
    Full,
}

#[derive(Subcommand)]
enum Command {
    /// Check a configuration file against the physical invariants.
    Validate {
        /// Configuration file path.
        config: PathBuf,
    },
    /// Run a protocol and write traces, summary, stream, and manifest.
    Run {
        protocol: ProtocolName,
        /// Configuration file (built-in 6 T defaults when omitted).
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory.
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Master seed for every stochastic stage.
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Trajectory repetitions (protocol-specific default).
        #[arg(long)]
        reps: Option<usize>,
        /// Time-bin readout variant (timebin only).
        #[arg(long)]
        variant: Option<VariantArg>,
        /// Multi-photon state flavor (ghz only).
        #[arg(long)]
        mode: Option<ModeArg>,
        /// Photon count (ghz only).
        #[arg(long)]
        photons: Option<usize>,
        /// Ramsey delays start:stop:step in ps (ramsey only).
        #[arg(long)]
        delays: Option<String>,
        /// Rotation powers start:stop:step (rabi only).
        #[arg(long)]
        powers: Option<String>,
        /// Storage waits start:stop:step in ns (storage only).
        #[arg(long)]
        waits: Option<String>,
        /// Drive/pulse duration in ns (spinprep, photnum).
        #[arg(long)]
        duration_ns: Option<f64>,
        /// Drive Rabi frequency in rad/ns (photnum only).
        #[arg(long)]
        rabi_per_ns: Option<f64>,
        /// Ramsey rotation area (ramsey only).
        #[arg(long)]
        area: Option<AreaArg>,
        /// Worker threads (results are independent of this).
        #[arg(long)]
        threads: Option<usize>,
        /// Overwrite existing outputs.
        #[arg(long)]
        force: bool,
    },
    /// Recompute correlation estimators from a stored time-tag stream.
    Analyze {
        /// Stream file path.
        stream: PathBuf,
        /// Generation window name (default: gen1 and gen2).
        #[arg(long)]
        gen: Option<String>,
        /// Readout window name.
        #[arg(long, default_value = "readout")]
        read: String,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Validate { config } => run::cmd_validate(&config),
        Command::Run {
            protocol,
            config,
            out,
            seed,
            reps,
            variant,
            mode,
            photons,
            delays,
            powers,
            waits,
            duration_ns,
            rabi_per_ns,
            area,
            threads,
            force,
        } => {
            let opts = run::RunOptions {
                protocol,
                config,
                out,
                seed,
                reps,
                variant,
                mode,
                photons,
                delays,
                powers,
                waits,
                duration_ns,
                rabi_per_ns,
                area,
                threads,
                force,
            };
            run::cmd_run(opts)
        }
        Command::Analyze { stream, gen, read } => run::cmd_analyze(&stream, gen.as_deref(), &read),
    }
}
