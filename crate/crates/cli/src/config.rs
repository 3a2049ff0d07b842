//! Command-line arguments, the optional JSON config file and the merged
//! run configuration. Precedence: flags, then file, then built-in defaults.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use fcs_core::{CountMode, MagneticSign};
use serde::{Deserialize, Serialize};

use crate::error::{io_err, CliError, Result};
use crate::grid::{parse_grid, sites, GridSpec};

#[derive(Debug, Parser)]
#[command(
    name = "fcs",
    version,
    about = "Exact photo-counting statistics of the XY spin chain"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Counting distributions p(m) for every grid point.
    Dist(CommonArgs),
    /// Moments, Fano factor and field derivatives over a g grid.
    Sweep(CommonArgs),
    /// Compare the recursion against the exact oracles.
    OracleCheck(OracleArgs),
    /// Even/odd splitting of nearly perfect detection.
    Splitting(CommonArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Anisotropy grid: value, start:stop:count, or a comma list of those.
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: Option<String>,
    /// Reduced field grid h/J.
    #[arg(long, allow_hyphen_values = true)]
    pub g: Option<String>,
    /// Detection efficiency grid, each in [0, 1].
    #[arg(long)]
    pub kappa: Option<String>,
    /// Chain lengths, even.
    #[arg(long)]
    pub sites: Option<String>,
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    #[arg(long, value_enum)]
    pub magnetic: Option<Magnetic>,
    /// Central finite-difference step in g.
    #[arg(long)]
    pub fd_step: Option<f64>,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// JSON config file; flags given on the command line win.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Worker threads. Affects wall time only.
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Seed for the random pair-basis grid.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of random pair-basis points.
    #[arg(long)]
    pub points: Option<usize>,
    /// Fault injection: add this to every v^2 on the analytic side.
    #[arg(long, hide = true, allow_hyphen_values = true)]
    pub corrupt_v_sq: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Total,
    EverySecond,
}

impl From<Mode> for CountMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Total => CountMode::Total,
            Mode::EverySecond => CountMode::EverySecond,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Magnetic {
    Afm,
    Fm,
}

impl From<Magnetic> for MagneticSign {
    fn from(m: Magnetic) -> Self {
        match m {
            Magnetic::Afm => MagneticSign::Antiferromagnetic,
            Magnetic::Fm => MagneticSign::Ferromagnetic,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Contents of a `--config` file. Every key is optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub gamma: Option<GridSpec>,
    pub g: Option<GridSpec>,
    pub kappa: Option<GridSpec>,
    pub sites: Option<GridSpec>,
    pub mode: Option<Mode>,
    pub magnetic: Option<Magnetic>,
    pub fd_step: Option<f64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub threads: Option<usize>,
    pub seed: Option<u64>,
    pub points: Option<usize>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(io_err(format!("reading config {}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Invalid(format!("config {}: {e}", path.display())))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    Dist,
    Sweep,
    OracleCheck,
    Splitting,
}

/// Fully resolved configuration. Serializes to the provenance block written
/// into every output; the output path and thread count are left out since
/// neither may change the results.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: CommandKind,
    pub gamma: Vec<f64>,
    pub g: Vec<f64>,
    pub kappa: Vec<f64>,
    pub sites: Vec<usize>,
    pub mode: Mode,
    pub magnetic: Magnetic,
    pub fd_step: f64,
    pub format: Format,
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[serde(skip)]
    pub threads: Option<usize>,
    /// Oracle check only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub corrupt_v_sq: Option<f64>,
}

impl RunConfig {
    /// Built-in defaults for each subcommand.
    pub fn defaults(command: CommandKind) -> Self {
        let (gamma, g, kappa, sites) = match command {
            CommandKind::Dist => (vec![1.0], vec![0.01, 10.0], vec![0.9], vec![300]),
            CommandKind::Sweep => (vec![1.0], linspace(0.0, 3.0, 61), vec![1.0], vec![300]),
            CommandKind::OracleCheck => (vec![1.0], vec![2.0], vec![0.8], vec![4, 6, 8]),
            CommandKind::Splitting => (vec![1.0], vec![0.0], vec![0.999], vec![1000, 4000]),
        };
        let oracle = command == CommandKind::OracleCheck;
        Self {
            command,
            gamma,
            g,
            kappa,
            sites,
            mode: Mode::Total,
            magnetic: Magnetic::Afm,
            fd_step: fcs_core::moments::DEFAULT_FD_STEP,
            format: Format::Csv,
            out: None,
            threads: None,
            seed: oracle.then_some(0),
            points: oracle.then_some(64),
            corrupt_v_sq: None,
        }
    }

    fn apply_file(&mut self, file: FileConfig) -> Result<()> {
        if let Some(v) = file.gamma {
            self.gamma = v.resolve()?;
        }
        if let Some(v) = file.g {
            self.g = v.resolve()?;
        }
        if let Some(v) = file.kappa {
            self.kappa = v.resolve()?;
        }
        if let Some(v) = file.sites {
            self.sites = sites(&v.resolve()?)?;
        }
        self.mode = file.mode.unwrap_or(self.mode);
        self.magnetic = file.magnetic.unwrap_or(self.magnetic);
        self.fd_step = file.fd_step.unwrap_or(self.fd_step);
        self.format = file.format.unwrap_or(self.format);
        self.out = file.out.or(self.out.take());
        self.threads = file.threads.or(self.threads);
        if self.command == CommandKind::OracleCheck {
            self.seed = file.seed.or(self.seed);
            self.points = file.points.or(self.points);
        }
        Ok(())
    }

    fn apply_args(&mut self, args: &CommonArgs) -> Result<()> {
        if let Some(s) = &args.gamma {
            self.gamma = parse_grid(s)?;
        }
        if let Some(s) = &args.g {
            self.g = parse_grid(s)?;
        }
        if let Some(s) = &args.kappa {
            self.kappa = parse_grid(s)?;
        }
        if let Some(s) = &args.sites {
            self.sites = sites(&parse_grid(s)?)?;
        }
        self.mode = args.mode.unwrap_or(self.mode);
        self.magnetic = args.magnetic.unwrap_or(self.magnetic);
        self.fd_step = args.fd_step.unwrap_or(self.fd_step);
        self.format = args.format.unwrap_or(self.format);
        self.out = args.out.clone().or(self.out.take());
        self.threads = args.threads.or(self.threads);
        Ok(())
    }

    /// Merge defaults, the config file named in `args` (if any) and `args`.
    pub fn resolve(command: CommandKind, args: &CommonArgs) -> Result<Self> {
        let mut cfg = Self::defaults(command);
        if let Some(path) = &args.config {
            cfg.apply_file(FileConfig::load(path)?)?;
        }
        cfg.apply_args(args)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_cli(command: &Command) -> Result<Self> {
        match command {
            Command::Dist(a) => Self::resolve(CommandKind::Dist, a),
            Command::Sweep(a) => Self::resolve(CommandKind::Sweep, a),
            Command::Splitting(a) => Self::resolve(CommandKind::Splitting, a),
            Command::OracleCheck(o) => {
                let mut cfg = Self::resolve(CommandKind::OracleCheck, &o.common)?;
                cfg.seed = o.seed.or(cfg.seed);
                cfg.points = o.points.or(cfg.points);
                cfg.corrupt_v_sq = o.corrupt_v_sq;
                cfg.validate()?;
                Ok(cfg)
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, grid) in [
            ("gamma", &self.gamma),
            ("g", &self.g),
            ("kappa", &self.kappa),
        ] {
            if grid.is_empty() {
                return Err(CliError::Invalid(format!("{name} grid is empty")));
            }
            if let Some(v) = grid.iter().find(|v| !v.is_finite()) {
                return Err(CliError::Invalid(format!(
                    "{name} grid has non-finite value {v}"
                )));
            }
        }
        if let Some(k) = self.kappa.iter().find(|k| !(0.0..=1.0).contains(*k)) {
            return Err(CliError::Invalid(format!("kappa {k} not in [0, 1]")));
        }
        if self.sites.is_empty() {
            return Err(CliError::Invalid("sites grid is empty".into()));
        }
        if !(self.fd_step > 0.0 && self.fd_step.is_finite()) {
            return Err(CliError::Invalid(format!(
                "fd-step {} must be positive",
                self.fd_step
            )));
        }
        if self.threads == Some(0) {
            return Err(CliError::Invalid("threads must be at least 1".into()));
        }
        if let Some(d) = self.corrupt_v_sq {
            if !d.is_finite() {
                return Err(CliError::Invalid("corrupt-v-sq must be finite".into()));
            }
        }
        if self.mode == Mode::EverySecond {
            if let Some(n) = self.sites.iter().find(|&&n| n % 4 != 0) {
                return Err(CliError::Invalid(format!(
                    "every-second counting needs N divisible by 4, got {n}"
                )));
            }
        }
        Ok(())
    }

    /// Provenance block as a single-line JSON object.
    pub fn echo(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }
}

fn linspace(start: f64, stop: f64, count: usize) -> Vec<f64> {
    crate::grid::linspace(start, stop, count).expect("nonzero count")
}
