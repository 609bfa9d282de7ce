use alloc::string::String;

/// Errors raised by the risk engine.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RiskError {
    /// An argument lies outside the domain of the function (e.g. `p` not in (0,1)).
    #[error("domain error: {0}")]
    Domain(String),
    /// Distribution or measure parameters violate their invariants.
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    /// Input data cannot support the requested estimate.
    #[error("data error: {0}")]
    Data(String),
    /// An iterative routine failed to converge or produced a non-finite value.
    #[error("numeric error: {0}")]
    Numeric(String),
    /// Inconsistent configuration, typically a dimension mismatch.
    #[error("config error: {0}")]
    Config(String),
    /// An operation was called without an input it requires in the chosen mode.
    #[error("usage error: {0}")]
    Usage(String),
    /// A bracketing search found no sign change.
    #[error("bracket error: {0}")]
    Bracket(String),
    /// A finite process exceeds the exhaustive-check limits.
    #[error("size error: {0}")]
    Size(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl RiskError {
    /// The same error with `prefix` prepended to its message.
    pub fn context(self, prefix: &str) -> Self {
        use RiskError::*;
        let wrap = |m: String| alloc::format!("{prefix}: {m}");
        match self {
            Domain(m) => Domain(wrap(m)),
            InvalidParams(m) => InvalidParams(wrap(m)),
            Data(m) => Data(wrap(m)),
            Numeric(m) => Numeric(wrap(m)),
            Config(m) => Config(wrap(m)),
            Usage(m) => Usage(wrap(m)),
            Bracket(m) => Bracket(wrap(m)),
            Size(m) => Size(wrap(m)),
            Internal(m) => Internal(wrap(m)),
        }
    }
}

pub type Result<T> = core::result::Result<T, RiskError>;

macro_rules! bail {
    ($variant:ident, $($arg:tt)*) => {
        return Err($crate::error::RiskError::$variant(alloc::format!($($arg)*)))
    };
}
pub(crate) use bail;

/// Checks that `p` is a probability in the open unit interval.
pub fn check_level(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        bail!(Domain, "level p = {p} must lie in (0, 1)")
    }
}
