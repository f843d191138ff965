mod io;
mod report;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mixkit::error::Budget;
use mixkit::numeric::Tolerance;

/// Exit codes: 0 mixable/solved, 1 not mixable, 2 unknown, 3 usage error,
/// 4 budget exceeded, 5 I/O or schema error.
#[derive(Parser, Debug)]
#[command(name = "mix", version, about = "Mixability checks, arrangement solving, and VaR bounds")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug)]
pub struct GlobalOpts {
    /// Tolerance for floating-point comparisons (exact checks ignore it).
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tolerance: f64,

    /// Candidate-grid budget for the exact discrete path.
    #[arg(long, global = true)]
    pub budget: Option<u64>,

    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 7)]
    pub seed: u64,

    /// Require exact-rational inputs; error on normal/elliptical specs.
    #[arg(long, global = true, conflicts_with = "float")]
    pub rational: bool,

    /// Force float-mode reporting (rational inputs still compute exactly).
    #[arg(long, global = true)]
    pub float: bool,

    /// Re-validate every emitted certificate through its verifier.
    #[arg(long, global = true)]
    pub verify: bool,

    /// Include wall-clock timing in the report (off by default so reports
    /// are byte-identical across runs).
    #[arg(long, global = true)]
    pub timing: bool,
}

impl GlobalOpts {
    pub fn tolerance(&self) -> Tolerance {
        Tolerance(self.tolerance)
    }

    pub fn budget(&self) -> Budget {
        let mut b = Budget::default();
        if let Ok(env) = std::env::var("MIX_BUDGET") {
            if let Ok(v) = env.parse::<u64>() {
                b.brute_leaves = v;
            }
        }
        if let Some(cells) = self.budget {
            b.grid_cells = cells;
        }
        b
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Decide mixability of the marginals in a spec file.
    Check {
        /// JSON file with one spec object per marginal.
        specs: String,
        /// Ask about n-fold complete mixability of a single spec.
        #[arg(long)]
        n: Option<usize>,
        /// Comma-separated norm orders for the necessary screens, e.g. "1,2,inf".
        #[arg(long)]
        p_grid: Option<String>,
        /// Comma-separated thresholds for the homogeneous norm check.
        #[arg(long)]
        t_grid: Option<String>,
    },
    /// Solve the min-max arrangement problem for a CSV matrix heuristically.
    Solve {
        matrix: String,
        #[arg(long, value_enum, default_value = "minimax")]
        objective: io::CliObjective,
        #[arg(long, default_value_t = 50)]
        restarts: usize,
        /// Solve over exact rationals parsed from the CSV text.
        #[arg(long)]
        exact: bool,
    },
    /// Brute-force the arrangement problem (exact, budget-gated).
    Oracle {
        matrix: String,
        #[arg(long, value_enum, default_value = "minimax")]
        objective: io::CliObjective,
    },
    /// Exact LP mixability decision with primal/dual certificates.
    DecideLp {
        specs: String,
        /// Joint center; defaults to the sum of means.
        #[arg(long, visible_alias = "K", value_name = "VALUE", allow_hyphen_values = true)]
        k: Option<String>,
    },
    /// Decompose a discrete law into equal-mean uniform blocks.
    Decompose {
        specs: String,
        #[arg(long)]
        n: usize,
    },
    /// Build a Gaussian joint-mix correlation certificate.
    GaussianMix {
        /// Comma-separated scales, e.g. "1,2,3".
        #[arg(long)]
        sigmas: String,
        /// Comma-separated locations; defaults to zeros.
        #[arg(long)]
        mus: Option<String>,
    },
    /// Sample i.i.d. rows from a certificate.
    Sample {
        cert: String,
        #[arg(long, default_value_t = 1000)]
        count: usize,
        /// Write samples to this CSV file instead of embedding them.
        #[arg(long)]
        out: Option<String>,
    },
    /// Phi bound and RA-based worst/best VaR estimates.
    VarBounds {
        specs: String,
        #[arg(long)]
        p: String,
        /// Tail grid size.
        #[arg(long, visible_alias = "N", default_value_t = 1000)]
        n_points: usize,
        #[arg(long, default_value_t = 50)]
        restarts: usize,
        #[arg(long, value_enum, default_value = "both")]
        side: io::CliSide,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap's help/version go to stdout with success
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprint!("{e}");
            return ExitCode::from(3);
        }
    };
    match report::run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
