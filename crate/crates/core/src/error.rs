use thiserror::Error;

/// Errors produced across the toolkit.
#[derive(Error, Debug)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("cannot bisect a zero-width box")]
    ZeroWidthBox,

    #[error("training data contains a single class")]
    SingleClass,

    #[error("duplicate points with conflicting labels")]
    InconsistentLabels,

    #[error("SMO solver did not converge: KKT violation {kkt_violation} after {iterations} iterations")]
    SolverNonConvergence { kkt_violation: f64, iterations: usize },

    #[error("gamma calibration failed: best training error {best_error} at gamma {best_gamma}")]
    CalibrationFailed { best_error: f64, best_gamma: f64 },

    #[error("degenerate gradient (norm {norm}) at projection iterate")]
    DegenerateGradient { norm: f64 },

    #[error("model `{model}` has no inclusion function")]
    UnsupportedModel { model: String },

    #[error("integration diverged at t = {time}")]
    IntegrationBlowup { time: f64 },

    #[error("box budget of {budget} exceeded (depth reached: {depth})")]
    BoxBudgetExceeded { budget: usize, depth: usize },

    #[error("grid of {requested} points exceeds the budget of {budget}")]
    GridBudgetExceeded { requested: u128, budget: u128 },

    #[error("only one class found after {draws} initial draws; the target set may be empty or negligible in the state space")]
    InitialSamplingFailed { draws: usize },

    #[error("point lies outside the subpaving's search box")]
    OutsidePaving,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
