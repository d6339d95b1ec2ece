use thiserror::Error;

/// Errors raised by the information-theoretic layer and the rate design.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum TheoryError {
    #[error("{name} = {value} is outside [{lo}, {hi}]")]
    OutOfRange {
        name: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("time allocation ({0}, {1}, {2}) is not a valid split of the block")]
    InvalidAllocation(f64, f64, f64),
    #[error("channel assumption violated: {0}")]
    Assumption(String),
    #[error("inconsistent rates: {0}")]
    InconsistentRates(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DesignError {
    #[error(transparent)]
    Theory(#[from] TheoryError),
    #[error("source-relay and source-destination capacities coincide for both sources; no relay bits are needed")]
    NoRelayNeeded,
    #[error("infeasible design: syndrome code rate {which} = {value} is not in (0, 1)")]
    InfeasibleDesign { which: &'static str, value: f64 },
    #[error("degenerate design: source {source_index} has zero source-coding rate (fully correlated sources)")]
    Degenerate { source_index: usize },
    #[error("no integer degree fit within r_max = {r_max}: {reason}")]
    InfeasibleFit {
        r_max: u32,
        reason: String,
        best: Option<Box<crate::rate_design::DegreeFit>>,
    },
    #[error("invalid fit parameters: {0}")]
    BadParameters(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnsembleError {
    #[error("invalid ensemble parameters: {0}")]
    Parameters(String),
    #[error("M*l/r = {m}*{l}/{r} is not an integer; try M = {suggested_m}")]
    Divisibility {
        m: usize,
        l: u32,
        r: u32,
        suggested_m: usize,
    },
    #[error("alignment M1*ls1/rs1 = M2*ls2/rs2 violated: {0} != {1}")]
    Alignment(f64, f64),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DeError {
    #[error(transparent)]
    Ensemble(#[from] EnsembleError),
    #[error("invalid density evolution parameter: {0}")]
    Parameters(String),
    #[error("density evolution did not stabilize within {iterations} iterations")]
    NonConvergence {
        iterations: usize,
        last: Box<crate::density_evolution::DeState>,
    },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MatrixError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("column index {index} out of range for {cols} columns")]
    IndexOutOfRange { index: usize, cols: usize },
    #[error("malformed matrix dump at line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Ensemble(#[from] EnsembleError),
    #[error("check {row} has no erased participant but its parity is violated")]
    Inconsistent { row: usize },
    #[error("invalid simulation parameter: {0}")]
    Parameters(String),
}
