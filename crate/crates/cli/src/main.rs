//! `npch`: command-line front end for the npch toolkit.
//!
//! Exit codes: 0 all checks passed, 1 a check failed, 2 usage or input
//! error, 3 numerical or runtime failure.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use npch_core::Error;

#[derive(Debug, Parser)]
#[command(name = "npch", version, about = "Harmonic maps into non-positively curved spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Comparison-inequality checks on a target space.
    Space {
        #[command(subcommand)]
        cmd: SpaceCmd,
    },
    /// Classification, translation length and decay of an isometry.
    Isometry {
        #[command(subcommand)]
        cmd: IsometryCmd,
    },
    /// Equivariant harmonic sections on the punctured disk.
    Solve {
        #[command(subcommand)]
        cmd: SolveCmd,
    },
    /// Solves from three different seeds and compares the solutions.
    Uniqueness(CylinderArgs),
    /// Finite-difference Bochner identity residuals.
    Bochner {
        #[command(subcommand)]
        cmd: BochnerCmd,
    },
    /// Dyadic-quadrature check of the weighted calculus inequality.
    Calculus {
        #[command(subcommand)]
        cmd: CalculusCmd,
    },
    /// Runs one acceptance criterion (1-12) or all of them.
    Accept(AcceptArgs),
}

#[derive(Debug, Subcommand)]
enum SpaceCmd {
    Check(SpaceArgs),
}

#[derive(Debug, Subcommand)]
enum IsometryCmd {
    Analyze(IsometryArgs),
}

#[derive(Debug, Subcommand)]
enum SolveCmd {
    Cylinder(CylinderArgs),
}

#[derive(Debug, Subcommand)]
enum BochnerCmd {
    Verify(BochnerArgs),
}

#[derive(Debug, Subcommand)]
enum CalculusCmd {
    Check(CalculusArgs),
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct SpaceArgs {
    /// `euclidean:<dim>`, `h2`, `spd:<n>` or `tree:<file.json>`.
    #[arg(long)]
    pub space: Option<String>,
    /// Random triples per inequality [default: 1000].
    #[arg(long)]
    pub samples: Option<usize>,
    /// Also check the CAT(-kappa) inequality.
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Allowed negative residual [default: 1e-9].
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON file with any of the above keys.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct IsometryArgs {
    #[arg(long)]
    pub space: Option<String>,
    /// Isometry as JSON: a matrix for `spd` and `h2`,
    /// `{"rotation", "translation"}` for Euclidean space, `{"vertex_map"}`
    /// for trees.
    #[arg(long)]
    pub matrix: Option<String>,
    #[arg(long)]
    pub matrix_file: Option<PathBuf>,
    /// Ray length for the decay series [default: 40].
    #[arg(long)]
    pub tmax: Option<f64>,
    /// Samples along the ray [default: 400].
    #[arg(long)]
    pub steps: Option<usize>,
    /// Report file.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct CylinderArgs {
    /// Target space [default: h2].
    #[arg(long)]
    pub target: Option<String>,
    /// Twist as JSON (see `isometry analyze --matrix`) [default for h2:
    /// translation of length 1].
    #[arg(long)]
    pub twist: Option<String>,
    #[arg(long)]
    pub twist_file: Option<PathBuf>,
    /// `fermi` (h2 with a hyperbolic twist only), `bump`, `helix` or `auto`
    /// [default: auto].
    #[arg(long)]
    pub boundary: Option<String>,
    /// Boundary perturbation size [default: 0.1].
    #[arg(long)]
    pub amplitude: Option<f64>,
    /// Length of the first cylinder [default: 10].
    #[arg(long = "T0")]
    #[serde(rename = "T0")]
    pub t0: Option<f64>,
    /// Number of length doublings [default: 2].
    #[arg(long)]
    pub doublings: Option<u32>,
    /// Angular resolution [default: 64].
    #[arg(long)]
    pub ntheta: Option<usize>,
    /// Cell aspect h_t / h_theta [default: 1].
    #[arg(long)]
    pub aspect: Option<f64>,
    /// Relaxation stopping tolerance on node movement [default: 1e-10].
    #[arg(long)]
    pub tol: Option<f64>,
    /// [default: 200000]
    #[arg(long)]
    pub max_sweeps: Option<usize>,
    /// Over-relaxation factor [default: automatic].
    #[arg(long)]
    pub omega: Option<f64>,
    /// Required agreement between the last two levels [default: 1e-6].
    #[arg(long)]
    pub cauchy_tol: Option<f64>,
    /// Initial guess: `prototype`, `perturbed` or `bridge`.
    #[arg(long)]
    pub init: Option<String>,
    /// Perturbation fraction for `--init perturbed` [default: 0.5].
    #[arg(long)]
    pub init_amplitude: Option<f64>,
    /// Uniqueness threshold on the sup distance [default: 1e-5].
    #[arg(long)]
    pub sup_tol: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct BochnerArgs {
    /// Generator file: `{"terms": [{"powers": [a, b, c, d], "coeff": [[re, im], ...]}]}`.
    #[arg(long)]
    pub generator: Option<PathBuf>,
    /// Built-in generator name, or `all` [default when no file: all].
    #[arg(long)]
    pub standard: Option<String>,
    /// Coarse mesh, a multiple of 8 [default: 32].
    #[arg(long)]
    pub mesh: Option<usize>,
    /// Report file.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct CalculusArgs {
    /// Lower bound of the weight [default: 1].
    #[arg(long)]
    pub c: Option<f64>,
    /// `constant`, `linear`, `oscillating` or `all` [default: all].
    #[arg(long)]
    pub psi: Option<String>,
    /// Quadrature tolerance [default: 1e-6].
    #[arg(long)]
    pub tol: Option<f64>,
    /// Report file.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct AcceptArgs {
    /// Criterion number or `all`.
    pub which: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Usage(_)
        | Error::Json(_)
        | Error::UnsupportedSpace(_)
        | Error::InvalidPoint(_)
        | Error::Domain(_) => 2,
        Error::Fit { .. } | Error::Convergence { .. } | Error::Io { .. } => 3,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Space {
            cmd: SpaceCmd::Check(a),
        } => commands::space_check(a),
        Command::Isometry {
            cmd: IsometryCmd::Analyze(a),
        } => commands::isometry_analyze(a),
        Command::Solve {
            cmd: SolveCmd::Cylinder(a),
        } => commands::solve_cylinder(a),
        Command::Uniqueness(a) => commands::uniqueness(a),
        Command::Bochner {
            cmd: BochnerCmd::Verify(a),
        } => commands::bochner_verify(a),
        Command::Calculus {
            cmd: CalculusCmd::Check(a),
        } => commands::calculus_check(a),
        Command::Accept(a) => commands::accept(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("npch: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
