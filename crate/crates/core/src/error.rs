use alloc::string::String;

/// Failure classes shared by every module. The CLI maps them onto exit codes.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Malformed or inconsistent input (bad model, unknown symbol, wrong regime).
    #[error("input error: {0}")]
    Input(String),
    /// A numerical procedure failed to converge or produced an unusable value.
    #[error("numeric error: {0}")]
    Numeric(String),
    /// A configured size limit would be exceeded.
    #[error("capacity error: {0}")]
    Capacity(String),
    /// Evaluation at a pole of Γ, ψ or ψ′.
    #[error("pole at {0}")]
    Pole(f64),
}

pub type Result<T> = core::result::Result<T, Error>;

macro_rules! bail {
    ($kind:ident, $($arg:tt)*) => {
        return Err($crate::error::Error::$kind(alloc::format!($($arg)*)))
    };
}
pub(crate) use bail;
