//! Command-line driver: transfer demo, noise sweeps, texture export,
//! tomography runs and the acceptance gate, all steered by one flat config
//! file plus a handful of override flags.

pub mod acceptance;
pub mod commands;
pub mod config;

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use skyrmion_core::tensor::PauliAxis;
use skyrmion_core::Result;

use crate::config::RunConfig;

#[derive(Parser, Debug)]
#[command(
    name = "skyrmion",
    version,
    about = "Entanglement-assisted loading and transfer of optical skyrmion textures"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Flat `key = value` config file layered over built-in defaults.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Master RNG seed (overrides the config).
    #[arg(long, global = true, value_name = "U64")]
    pub seed: Option<u64>,
    /// Output directory for CSV artifacts (overrides the config).
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Transverse grid resolution per side (overrides the config).
    #[arg(long, global = true, value_name = "N")]
    pub grid: Option<usize>,
    /// Half-width of the render window in waist units (overrides the config).
    #[arg(long, global = true, value_name = "W")]
    pub extent: Option<f64>,
    /// Topological charge of the loaded texture (overrides the config).
    #[arg(long, global = true, value_name = "INT", allow_hyphen_values = true)]
    pub l: Option<i32>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run the Bell-measurement transfer and report all four outcomes.
    Transfer,
    /// Sweep isotropic white noise over [0, 1] and write sweep_isotropic.csv.
    SweepIsotropic,
    /// Sweep a polarization flip channel over [0, 1] and write sweep_flip_<axis>.csv.
    SweepFlip {
        /// Flip axis on the remote polarization.
        #[arg(long, value_enum)]
        axis: FlipAxis,
    },
    /// Render the polarization texture: stokes.csv plus a charge summary.
    Texture,
    /// Simulate photon counting and reconstruct the state (counts + density CSVs).
    Tomo,
    /// Run the acceptance gate and print one pass/fail line per criterion.
    Acceptance,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum FlipAxis {
    Y,
    Z,
}

impl From<FlipAxis> for PauliAxis {
    fn from(axis: FlipAxis) -> PauliAxis {
        match axis {
            FlipAxis::Y => PauliAxis::Y,
            FlipAxis::Z => PauliAxis::Z,
        }
    }
}

/// Defaults, then the config file, then the flags; validated once.
pub fn effective_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &cli.config {
        cfg.load_file(path)?;
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.out = out.clone();
    }
    if let Some(grid) = cli.grid {
        cfg.grid = grid;
    }
    if let Some(extent) = cli.extent {
        cfg.extent = extent;
    }
    if let Some(l) = cli.l {
        cfg.l = l;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Dispatch a parsed command line; returns the process exit code
/// (0 success, 1 validation or runtime error, 2 acceptance failure).
pub fn run(cli: &Cli) -> i32 {
    let cfg = match effective_config(cli) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    let report = match &cli.command {
        Command::Transfer => commands::cmd_transfer(&cfg),
        Command::SweepIsotropic => commands::cmd_sweep_isotropic(&cfg),
        Command::SweepFlip { axis } => commands::cmd_sweep_flip(&cfg, (*axis).into()),
        Command::Texture => commands::cmd_texture_report(&cfg),
        Command::Tomo => commands::cmd_tomo(&cfg),
        Command::Acceptance => return run_acceptance(&cfg),
    };
    match report {
        Ok(text) => {
            println!("{text}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn run_acceptance(cfg: &RunConfig) -> i32 {
    if let Err(e) = std::fs::create_dir_all(&cfg.out) {
        eprintln!("error: cannot create output directory: {e}");
        return 1;
    }
    let results = acceptance::run_all(cfg);
    for result in &results {
        println!("{}", result.line());
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    if failed == 0 {
        println!("acceptance: all {} criteria passed", results.len());
        0
    } else {
        eprintln!("acceptance: {failed} of {} criteria FAILED", results.len());
        2
    }
}
