use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid sequence: {0}")]
    InvalidSequence(String),

    /// A requested value does not fit the active integer width or a
    /// configured size budget. `index` names the first offending level
    /// when the failure is per-level.
    #[error("capacity exceeded{}: {what}", index.map(|k| format!(" at level {k}")).unwrap_or_default())]
    Capacity { what: String, index: Option<usize> },

    #[error("index {n} is below the first level {first}")]
    BelowRange { n: u64, first: u64 },

    /// A stencil evaluation needed sites outside the sampled interval.
    /// Evaluations never zero-fill silently.
    #[error("window [{lo}, {hi}] not covered by field interval [{interval_lo}, {interval_hi}]")]
    Coverage {
        lo: i64,
        hi: i64,
        interval_lo: i64,
        interval_hi: i64,
    },

    #[error("budget rule not evaluable: {0}")]
    Budget(String),

    #[error("range error: {0}")]
    Range(String),

    /// Exact enumeration would need 3^coords configurations, above the
    /// configured budget.
    #[error("enumeration over {coords} ternary coordinates exceeds the budget of {budget} configurations")]
    EnumerationBudget { coords: usize, budget: u64 },

    #[error("{got} trials requested; at least {min} are needed for a meaningful estimate")]
    TooFewTrials { got: u64, min: u64 },
}

pub type Result<T> = std::result::Result<T, Error>;
