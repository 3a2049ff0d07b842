//! Command-line front end for the exact counting statistics in `fcs-core`.

pub mod commands;
pub mod config;
pub mod error;
pub mod grid;
pub mod output;

pub use commands::{cmd_dist, cmd_oracle_check, cmd_splitting, cmd_sweep};
pub use config::{Cli, Command, CommandKind, RunConfig};
pub use error::{CliError, Result};

/// Run one resolved configuration on a pool of `cfg.threads` workers.
pub fn execute(cfg: &RunConfig) -> Result<()> {
    with_threads(cfg.threads, || match cfg.command {
        CommandKind::Dist => cmd_dist(cfg),
        CommandKind::Sweep => cmd_sweep(cfg),
        CommandKind::OracleCheck => cmd_oracle_check(cfg),
        CommandKind::Splitting => cmd_splitting(cfg),
    })
}

pub fn run(cli: &Cli) -> Result<()> {
    execute(&RunConfig::from_cli(&cli.command)?)
}

#[cfg(feature = "parallel")]
fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    match threads {
        None => f(),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(f),
            Err(_) => f(),
        },
    }
}

#[cfg(not(feature = "parallel"))]
fn with_threads<T>(_threads: Option<usize>, f: impl FnOnce() -> T) -> T {
    f()
}
