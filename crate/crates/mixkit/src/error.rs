use thiserror::Error;

/// Library error type. CLI exit codes map from the variants: budget
/// overruns are distinguished from schema/usage problems.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("input lengths differ: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("non-finite number {0}")]
    NonFinite(f64),

    #[error("cannot parse number: {0}")]
    BadNumber(String),

    #[error("weight must be positive, got {0}")]
    NonPositiveWeight(String),

    #[error("probability level must lie in (0,1], got {0}")]
    BadProbability(String),

    #[error("{spec} has no computable quantile{detail}")]
    NoQuantile { spec: &'static str, detail: String },

    #[error("{spec} does not determine a finite mean")]
    NoMean { spec: &'static str },

    #[error("support is unbounded; use the norm checks instead")]
    UnboundedSupport,

    #[error("invalid interval: require a < b, got a={a}, b={b}")]
    BadInterval { a: String, b: String },

    #[error("invalid parameter: {0}")]
    BadParameter(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("budget exceeded: {what} needs {needed} but budget is {budget}")]
    BudgetExceeded {
        what: &'static str,
        needed: u128,
        budget: u128,
    },

    #[error("monotone densities have mixed directions; the joint criterion does not apply")]
    MixedDirections,

    #[error("elliptical generators differ: {0} vs {1}")]
    GeneratorMismatch(String, String),

    #[error("split must sum to the joint center {expected}, got {got}")]
    SplitSum { expected: String, got: String },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("invalid certificate: {0}")]
    InvalidCertificate(String),
}

impl Error {
    pub fn is_budget(&self) -> bool {
        matches!(self, Error::BudgetExceeded { .. })
    }
}

/// Enumeration and expansion budgets gating the exact decision paths.
#[derive(Debug, Clone, Copy)]
pub struct Budget {
    /// Leaf evaluations allowed in brute-force arrangement enumeration.
    pub brute_leaves: u64,
    /// Candidate grid points allowed on the constant-sum hyperplane.
    pub grid_cells: u64,
    /// Rows allowed when expanding rational weights to a common denominator.
    pub expansion_rows: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            brute_leaves: 10_000_000,
            grid_cells: 1_000_000,
            expansion_rows: 10_000,
        }
    }
}

impl Budget {
    pub fn with_grid_cells(mut self, cells: u64) -> Self {
        self.grid_cells = cells;
        self
    }

    pub fn with_brute_leaves(mut self, leaves: u64) -> Self {
        self.brute_leaves = leaves;
        self
    }
}
