use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A model parameter violates its admissible range.
    #[error("{name} must {requirement} (got {value})")]
    InvalidParameter {
        name: &'static str,
        requirement: &'static str,
        value: f64,
    },

    #[error("surplus must be nonnegative (got {0})")]
    NegativeSurplus(f64),

    /// `b_hat` only exists when injection costs are low.
    #[error("the critical payout barrier is undefined in the high-cost regime (k = {k} > k_critical = {k_critical})")]
    HighCostRegime { k: f64, k_critical: f64 },

    #[error("no sign change found before the bracket reached {limit:e}")]
    BracketExhausted { limit: f64 },

    #[error("invalid simulation config: {0}")]
    Config(String),

    #[error("grid must not be empty")]
    EmptyGrid,

    #[error("grid is not sorted ascending and nonnegative")]
    UnsortedGrid,

    #[error("grid point {x} lies outside the admissible domain [{lo}, {hi})")]
    GridDomain { x: f64, lo: f64, hi: f64 },

    #[error("operation requires {expected} mode")]
    Mode { expected: &'static str },
}
