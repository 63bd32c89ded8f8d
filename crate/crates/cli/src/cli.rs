use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(name = "cachecast", version, about = "Multi-antenna coded caching with linear subpacketization")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Print failures as a JSON object on stderr.
    #[arg(long, global = true)]
    pub error_json: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Circulant placement matrix
    Placement(SchemeArgs),
    /// Per-round DP matrix pairs
    Dp(SchemeArgs),
    /// Full delivery schedule
    Schedule(ScheduleArgs),
    /// Symbolic DoF / decodability / coverage checks
    Verify(VerifyArgs),
    /// Numerical zero-forcing run over random channels
    Simulate(SimulateArgs),
    /// Subpacketization against the multi-server baseline
    Compare(CompareArgs),
    /// Verify every valid (K, t, L) up to a bound
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum)]
    pub format: Option<Format>,

    /// Write the artifact here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SchemeArgs {
    #[arg(short = 'K', long)]
    pub users: usize,

    #[arg(short = 'L', long)]
    pub antennas: usize,

    #[arg(short = 't', long)]
    pub gain: usize,

    /// Library size, defaults to K.
    #[arg(short = 'N', long)]
    pub library: Option<usize>,

    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ScheduleArgs {
    #[command(flatten)]
    pub scheme: SchemeArgs,

    /// `identity` or a comma-separated file list, one per user.
    #[arg(long, default_value = "identity")]
    pub demand: String,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[arg(short = 'K', long, required_unless_present = "schedule")]
    pub users: Option<usize>,

    #[arg(short = 'L', long, required_unless_present = "schedule")]
    pub antennas: Option<usize>,

    #[arg(short = 't', long, required_unless_present = "schedule")]
    pub gain: Option<usize>,

    #[arg(short = 'N', long)]
    pub library: Option<usize>,

    #[arg(long, default_value = "identity")]
    pub demand: String,

    /// Verify a schedule JSON file instead of building one.
    #[arg(long, conflicts_with_all = ["users", "antennas", "gain", "library"])]
    pub schedule: Option<PathBuf>,

    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub scheme: SchemeArgs,

    #[arg(long, default_value = "identity")]
    pub demand: String,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Per-user noise variance; 0 runs the noiseless check.
    #[arg(long, default_value_t = 0.0)]
    pub noise_power: f64,

    #[arg(long, default_value_t = 1e-9)]
    pub tolerance: f64,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    #[arg(short = 't', long)]
    pub gain: u64,

    #[arg(short = 'L', long)]
    pub antennas: u64,

    /// `A..B` (inclusive) or a comma-separated list.
    #[arg(short = 'K', long)]
    pub users: String,

    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[arg(long, default_value_t = 15)]
    pub max_users: usize,

    #[command(flatten)]
    pub output: OutputArgs,
}

/// Normalized record of one invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub subcommand: String,
    pub users: Option<usize>,
    pub antennas: Option<usize>,
    pub gain: Option<usize>,
    pub library: Option<usize>,
    pub demand: DemandSpec,
    pub seed: u64,
    pub noise_power: f64,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DemandSpec {
    Identity,
    Explicit(Vec<usize>),
}

impl DemandSpec {
    pub fn parse(s: &str) -> Result<Self, String> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("identity") {
            return Ok(DemandSpec::Identity);
        }
        s.split(',')
            .map(|x| x.trim().parse::<usize>().map_err(|e| format!("bad demand entry {x:?}: {e}")))
            .collect::<Result<Vec<_>, _>>()
            .map(DemandSpec::Explicit)
    }
}

impl RunConfig {
    fn base(subcommand: &str) -> Self {
        RunConfig {
            subcommand: subcommand.into(),
            users: None,
            antennas: None,
            gain: None,
            library: None,
            demand: DemandSpec::Identity,
            seed: 0,
            noise_power: 0.0,
            out: None,
            format: None,
        }
    }

    fn with_scheme(mut self, s: &SchemeArgs) -> Self {
        self.users = Some(s.users);
        self.antennas = Some(s.antennas);
        self.gain = Some(s.gain);
        self.library = Some(s.library.unwrap_or(s.users));
        self.out = s.output.out.clone();
        self.format = s.output.format;
        self
    }

    pub fn from_command(cmd: &Command) -> Result<Self, String> {
        Ok(match cmd {
            Command::Placement(s) => Self::base("placement").with_scheme(s),
            Command::Dp(s) => Self::base("dp").with_scheme(s),
            Command::Schedule(a) => RunConfig {
                demand: DemandSpec::parse(&a.demand)?,
                ..Self::base("schedule").with_scheme(&a.scheme)
            },
            Command::Verify(a) => RunConfig {
                users: a.users,
                antennas: a.antennas,
                gain: a.gain,
                library: a.library.or(a.users),
                demand: DemandSpec::parse(&a.demand)?,
                out: a.output.out.clone(),
                format: a.output.format,
                ..Self::base("verify")
            },
            Command::Simulate(a) => RunConfig {
                demand: DemandSpec::parse(&a.demand)?,
                seed: a.seed,
                noise_power: a.noise_power,
                ..Self::base("simulate").with_scheme(&a.scheme)
            },
            Command::Compare(a) => RunConfig {
                gain: Some(a.gain as usize),
                antennas: Some(a.antennas as usize),
                out: a.output.out.clone(),
                format: a.output.format,
                ..Self::base("compare")
            },
            Command::Sweep(a) => RunConfig {
                users: Some(a.max_users),
                out: a.output.out.clone(),
                format: a.output.format,
                ..Self::base("sweep")
            },
        })
    }
}

/// `5..10` (inclusive), `5..=10`, or `5,6,9`.
pub fn parse_user_range(s: &str) -> Result<Vec<u64>, String> {
    let s = s.trim();
    if let Some((a, b)) = s.split_once("..") {
        let b = b.strip_prefix('=').unwrap_or(b);
        let lo: u64 = a.trim().parse().map_err(|e| format!("bad range start {a:?}: {e}"))?;
        let hi: u64 = b.trim().parse().map_err(|e| format!("bad range end {b:?}: {e}"))?;
        if lo > hi {
            return Err(format!("empty range {s}"));
        }
        return Ok((lo..=hi).collect());
    }
    s.split(',')
        .map(|x| x.trim().parse::<u64>().map_err(|e| format!("bad user count {x:?}: {e}")))
        .collect()
}
