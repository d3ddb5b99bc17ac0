//! `spikemap` command-line entry point.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use spikemap_cli::commands::{self, OracleArgs};
use spikemap_cli::exit_codes;
use spikemap_cli::manifest::{
    parse_network_flag, DerivationSection, FailureSection, Manifest, ScheduleSection,
};
use spikemap_core::derive::DerivationParams;
use spikemap_core::network::NeuronId;
use spikemap_core::rational::parse_rational;

#[derive(Debug, Parser)]
#[command(
    name = "spikemap",
    version,
    about = "Build spiking networks, derive replicated failure-prone versions, and check the mapping guarantees between their executions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build one of the example network families (or rewrite a file)
    Build {
        #[command(subcommand)]
        family: BuildFamily,
    },
    /// Derive the lowered-threshold network A2 and the replicated
    /// detailed network D from an abstract network
    Derive {
        /// Network file or builder expression (e.g. line:lmax=5)
        #[arg(long)]
        net: String,
        /// Replication factor
        #[arg(long)]
        m: u32,
        /// Neuron survival fraction s_V, p/q syntax
        #[arg(long)]
        sv: String,
        /// Edge survival fraction s_E, p/q syntax
        #[arg(long)]
        se: String,
        /// Output directory for a2.toml, d.toml, copies.toml
        #[arg(long)]
        out: PathBuf,
    },
    /// Execute a network and emit the firing trace as CSV
    Run {
        #[command(flatten)]
        common: CommonArgs,
        /// Print a #/. text raster of the trace to stdout
        #[arg(long)]
        raster: bool,
    },
    /// Build corresponding runs of A1/A2/D and check the mapping
    /// guarantees
    Check {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Repeated randomized-failure trials with derived seeds
    Fuzz {
        #[command(flatten)]
        common: CommonArgs,
        /// Number of trials
        #[arg(long)]
        trials: u64,
    },
    /// Exhaustively verify every (schedule, failure pattern) pair of a
    /// tiny instance
    Oracle {
        /// Network file or builder expression
        #[arg(long)]
        net: String,
        #[arg(long)]
        m: u32,
        #[arg(long)]
        sv: String,
        #[arg(long)]
        se: String,
        /// Horizon for the enumerated schedules
        #[arg(long)]
        horizon: usize,
        /// Also check the actuator guarantee against this neuron
        #[arg(long)]
        actuator: Option<String>,
        #[arg(long)]
        max_schedules: Option<u64>,
        #[arg(long)]
        max_patterns: Option<u64>,
        /// Report file path
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
enum BuildFamily {
    /// Line of lmax+1 neurons with a single input at the left end
    Line {
        #[arg(long)]
        lmax: u32,
        /// Add the persistence self-loop on neuron 1
        #[arg(long = "self-loop-on-1")]
        self_loop_on_1: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Input feeding a one-directional ring of lmax neurons
    Ring {
        #[arg(long)]
        lmax: u32,
        #[arg(long)]
        out: PathBuf,
    },
    /// Complete k-ary tree with upward edges and threshold r*k
    Hierarchy {
        #[arg(long)]
        lmax: u32,
        #[arg(long)]
        k: u32,
        /// Fraction r in p/q syntax
        #[arg(long)]
        r: String,
        /// Add weight r*k self-loops on the level-1 neurons
        #[arg(long)]
        persistent: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Validate and canonically rewrite a network file
    File {
        #[arg(long)]
        net: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Flags shared by run / check / fuzz. Either `--manifest` or a flag
/// set starting with `--net` and `--schedule`.
#[derive(Debug, Args)]
struct CommonArgs {
    /// Run manifest file (mutually exclusive with the other selectors)
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Network file or builder expression (e.g. hierarchy:lmax=3,k=3,r=2/3)
    #[arg(long)]
    net: Option<String>,
    /// Replication factor m
    #[arg(long)]
    m: Option<u32>,
    /// Neuron survival fraction s_V (p/q)
    #[arg(long)]
    sv: Option<String>,
    /// Edge survival fraction s_E (p/q)
    #[arg(long)]
    se: Option<String>,
    /// none | paper | random | maximal | a pattern file path
    #[arg(long)]
    failures: Option<String>,
    /// Neuron failure probability for --failures random (p/q in [0,1))
    #[arg(long)]
    p_neuron: Option<String>,
    /// Edge failure probability for --failures random (p/q in [0,1))
    #[arg(long)]
    p_edge: Option<String>,
    /// Seed for the random failure generator
    #[arg(long)]
    seed: Option<u64>,
    /// Rejection-sampling attempt bound for --failures random
    #[arg(long)]
    max_attempts: Option<u32>,
    /// pulse0 | every:K | a schedule file path
    #[arg(long)]
    schedule: Option<String>,
    /// Horizon for pulse0/every schedules
    #[arg(long)]
    horizon: Option<usize>,
    /// Attach the reliable actuator to this neuron
    #[arg(long)]
    actuator: Option<String>,
    /// Explicit detailed network file (skips deriving D; needs --copies)
    #[arg(long)]
    d_net: Option<PathBuf>,
    /// Copies map file accompanying --d-net
    #[arg(long)]
    copies: Option<PathBuf>,
    /// Output path (trace CSV for run, report for check, directory for
    /// fuzz)
    #[arg(long)]
    out: Option<PathBuf>,
}

impl CommonArgs {
    fn into_manifest(self) -> Result<(Manifest, PathBuf, Option<PathBuf>)> {
        if let Some(manifest_path) = &self.manifest {
            let others_set = self.net.is_some()
                || self.m.is_some()
                || self.sv.is_some()
                || self.se.is_some()
                || self.failures.is_some()
                || self.p_neuron.is_some()
                || self.p_edge.is_some()
                || self.seed.is_some()
                || self.max_attempts.is_some()
                || self.schedule.is_some()
                || self.horizon.is_some()
                || self.actuator.is_some()
                || self.d_net.is_some()
                || self.copies.is_some();
            if others_set {
                bail!("--manifest cannot be combined with other run selectors (only --out)");
            }
            let manifest = Manifest::load(manifest_path)?;
            let base_dir = manifest_path
                .parent()
                .map(|p| p.to_path_buf())
                .unwrap_or_else(|| PathBuf::from("."));
            return Ok((manifest, base_dir, self.out));
        }

        let net = self
            .net
            .as_ref()
            .ok_or_else(|| anyhow::anyhow!("--net is required (or use --manifest)"))?;
        let network = parse_network_flag(net)?;

        let derivation = match (self.m, &self.sv, &self.se) {
            (None, None, None) => None,
            (Some(m), Some(sv), Some(se)) => Some(DerivationSection {
                m,
                s_v: sv.clone(),
                s_e: se.clone(),
            }),
            _ => bail!("derivation parameters are all-or-nothing: pass --m, --sv and --se together"),
        };

        let mut failures = self
            .failures
            .as_deref()
            .map(FailureSection::from_flag)
            .unwrap_or_default();
        failures.p_neuron = self.p_neuron.clone();
        failures.p_edge = self.p_edge.clone();
        if let Some(seed) = self.seed {
            failures.seed = seed;
        }
        if let Some(max_attempts) = self.max_attempts {
            failures.max_attempts = max_attempts;
        }

        let schedule_source = self
            .schedule
            .as_ref()
            .ok_or_else(|| anyhow::anyhow!("--schedule is required (or use --manifest)"))?;
        let schedule = ScheduleSection {
            source: schedule_source.clone(),
            horizon: self.horizon,
        };

        let detailed = match (&self.d_net, &self.copies) {
            (None, None) => None,
            (Some(d), Some(copies)) => Some(spikemap_cli::manifest::DetailedSection {
                network: d.clone(),
                copies: copies.clone(),
            }),
            _ => bail!("--d-net and --copies must be given together"),
        };

        let manifest = Manifest {
            network,
            derivation,
            failures,
            schedule,
            actuator: self.actuator.clone(),
            detailed,
            output: Default::default(),
        };
        Ok((manifest, PathBuf::from("."), self.out))
    }
}

fn dispatch(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Build { family } => {
            let (source, out) = match family {
                BuildFamily::Line {
                    lmax,
                    self_loop_on_1,
                    out,
                } => {
                    let mut source = parse_network_flag(&format!("line:lmax={lmax}"))?;
                    source.self_loop_on_1 = self_loop_on_1;
                    (source, out)
                }
                BuildFamily::Ring { lmax, out } => {
                    (parse_network_flag(&format!("ring:lmax={lmax}"))?, out)
                }
                BuildFamily::Hierarchy {
                    lmax,
                    k,
                    r,
                    persistent,
                    out,
                } => {
                    let mut source = parse_network_flag(&format!("hierarchy:lmax={lmax},k={k}"))?;
                    source.r = Some(r);
                    source.persistent = persistent;
                    (source, out)
                }
                BuildFamily::File { net, out } => {
                    let source = spikemap_cli::manifest::NetworkSource {
                        file: Some(net),
                        ..Default::default()
                    };
                    (source, out)
                }
            };
            commands::cmd_build(&source, &out)
        }
        Command::Derive { net, m, sv, se, out } => {
            let source = parse_network_flag(&net)?;
            let params = DerivationParams::new(
                m,
                parse_rational(&sv).context("parsing --sv")?,
                parse_rational(&se).context("parsing --se")?,
            )?;
            commands::cmd_derive(&source, &params, &out)
        }
        Command::Run { common, raster } => {
            let (manifest, base_dir, out) = common.into_manifest()?;
            let resolved = commands::resolve_manifest(manifest, &base_dir)?;
            commands::cmd_run(&resolved, out.as_deref(), raster)
        }
        Command::Check { common } => {
            let (manifest, base_dir, out) = common.into_manifest()?;
            let resolved = commands::resolve_manifest(manifest, &base_dir)?;
            commands::cmd_check(&resolved, out.as_deref())
        }
        Command::Fuzz { common, trials } => {
            let (manifest, base_dir, out) = common.into_manifest()?;
            let resolved = commands::resolve_manifest(manifest, &base_dir)?;
            commands::cmd_fuzz(&resolved, trials, out.as_deref())
        }
        Command::Oracle {
            net,
            m,
            sv,
            se,
            horizon,
            actuator,
            max_schedules,
            max_patterns,
            out,
        } => {
            let args = OracleArgs {
                net: parse_network_flag(&net)?,
                params: DerivationParams::new(
                    m,
                    parse_rational(&sv).context("parsing --sv")?,
                    parse_rational(&se).context("parsing --se")?,
                )?,
                horizon,
                actuator: actuator.map(|a| NeuronId::from(a.as_str())),
                max_schedules,
                max_patterns,
                out,
            };
            commands::cmd_oracle(&args)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(error) => {
            eprintln!("error: {error:#}");
            ExitCode::from(exit_codes::USAGE as u8)
        }
    }
}
