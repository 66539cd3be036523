//! `grasscurve`: verify, sample, construct, move and search for constantly
//! curved holomorphic curves in G(2, n+2).
//!
//! Exit codes: 0 success, 1 domain failure (curve fails verification, search
//! found nothing, a move leaves the polynomial chart), 2 bad input.

mod commands;
mod output;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::output::Failure;

#[derive(Parser, Debug)]
#[command(name = "grasscurve", version, about = "Constantly curved holomorphic curves in G(2, n+2)")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Tolerance for the constant-curvature test and the solver's feasibility.
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub tol: f64,
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    /// Restart budget for search and scan.
    #[arg(long, global = true, default_value_t = grasscurve::solver::DEFAULT_RESTARTS)]
    pub restarts: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<std::path::PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Text,
    Csv,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum FamilyKind {
    /// `V₀⁽ⁿ⁾ ⊕ v₀`, degree n.
    Dn,
    /// `V₀⁽ⁿ⁺¹⁾ ⊕ V₁⁽ⁿ⁺¹⁾`, degree 2n.
    D2n,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check the constraint system, fullness and degree bound of a curve.
    Verify {
        /// Curve JSON file, or `-` for stdin.
        path: String,
    },
    /// Gauss curvature, |det A₁|² and Gauss slack on a square grid.
    Sample {
        path: String,
        /// Points per side.
        #[arg(long, default_value_t = 5)]
        grid: usize,
        /// Half-width of the grid around the origin.
        #[arg(long, default_value_t = 1.0)]
        extent: f64,
    },
    /// Emit a member of a degenerate family.
    Family {
        #[arg(long, value_enum)]
        kind: FamilyKind,
        #[arg(long)]
        n: usize,
    },
    /// Randomised search for a curve of degree d in G(2, n+2).
    Search {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = grasscurve::solver::DEFAULT_MAX_ITERS)]
        max_iters: usize,
        /// Save the best curve as Curve JSON.
        #[arg(long)]
        save_curve: Option<std::path::PathBuf>,
    },
    /// One search per degree in d-min..=d-max.
    Scan {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d_min: usize,
        #[arg(long)]
        d_max: usize,
        #[arg(long, default_value_t = grasscurve::solver::DEFAULT_MAX_ITERS)]
        max_iters: usize,
    },
    /// Reparametrise by z = (aw + b)/(cw + d).
    Mobius {
        path: String,
        #[arg(long, default_value = "1", allow_hyphen_values = true)]
        a: String,
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        b: String,
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        c: String,
        #[arg(long, default_value = "1", allow_hyphen_values = true)]
        d: String,
        /// Use a random rotation of the sphere drawn from --seed instead.
        #[arg(long, conflicts_with_all = ["a", "b", "c", "d"])]
        random: bool,
    },
    /// SVD normal form of A₁.
    Canon { path: String },
    /// λ-chain probe of the top coefficients.
    Probe { path: String },
    /// Randomised check that the Lemma Q combination vanishes.
    LemmaQ {
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        /// Largest acceptable |Q| relative to |λ|·|a|².
        #[arg(long, default_value_t = 1e-11)]
        bound: f64,
    },
}

fn init_threads() -> Result<(), Failure> {
    let Ok(v) = std::env::var("GRASSCURVE_THREADS") else {
        return Ok(());
    };
    let threads: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| Failure::input(format!("GRASSCURVE_THREADS must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Failure::input(format!("thread pool: {e}")))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = init_threads().and_then(|_| commands::run(&cli));
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
