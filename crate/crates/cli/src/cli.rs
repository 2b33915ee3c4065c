use std::io::Write;
use std::path::PathBuf;

use clap::Parser;
use equinuc_core::build_group;

use crate::config::{parse_config, ConfigError, RunConfig, Task};
use crate::runner::{run, RunOptions};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Clone, Parser)]
#[command(
    name = "equinuc",
    version,
    about = "Numerical checks of equivariant nuclearity for finite crossed products"
)]
pub struct Cli {
    /// JSON run configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Where to write the JSON report.
    #[arg(long, default_value = "report.json")]
    pub report: PathBuf,
    /// Where to write the defect sweep as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Overrides the identity tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Overrides the configured seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Runs only the named tasks, in the given order (repeatable).
    #[arg(long = "task")]
    pub tasks: Vec<String>,
    /// Runs independent tasks concurrently.
    #[arg(long)]
    pub parallel: bool,
}

/// Loads the configuration named by `cli` and applies the flag overrides.
pub fn load(cli: &Cli) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(&cli.config)
        .map_err(|e| ConfigError::at("", format!("cannot read {}: {e}", cli.config.display())))?;
    let mut config = parse_config(&text)?;
    if let Some(tol) = cli.tol {
        config.tolerances.identity_tol = Some(tol);
    }
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if !cli.tasks.is_empty() {
        config.tasks = cli.tasks.iter().map(|t| t.parse::<Task>()).collect::<Result<_, _>>()?;
    }
    config.validate()?;
    Ok(config)
}

/// Runs the command line; returns the process exit code.
pub fn execute(cli: &Cli, stdout: &mut impl Write, stderr: &mut impl Write) -> i32 {
    let config = match load(cli) {
        Ok(config) => config,
        Err(e) => {
            let _ = writeln!(stderr, "{e}");
            return EXIT_CONFIG;
        }
    };
    let report = match run(&config, RunOptions { parallel: cli.parallel }) {
        Ok(report) => report,
        Err(e) => {
            let _ = writeln!(stderr, "{e}");
            return EXIT_CONFIG;
        }
    };
    if let Err(e) = std::fs::write(&cli.report, report.to_json()) {
        let _ = writeln!(stderr, "cannot write {}: {e}", cli.report.display());
        return EXIT_FAIL;
    }
    if let Some(path) = &cli.csv {
        let labels = build_group(&config.group)
            .map(|g| g.labels().to_vec())
            .unwrap_or_default();
        match report.sweep_csv(&labels) {
            Some(csv) => {
                if let Err(e) = std::fs::write(path, csv) {
                    let _ = writeln!(stderr, "cannot write {}: {e}", path.display());
                    return EXIT_FAIL;
                }
            }
            None => {
                let _ = writeln!(stderr, "--csv given but defect-sweep did not run; no CSV written");
            }
        }
    }
    let _ = write!(stdout, "{}", report.table());
    if report.all_passed() {
        EXIT_PASS
    } else {
        EXIT_FAIL
    }
}
