use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("unsupported channel width {0} MHz (expected 20, 40, 80 or 160)")]
    UnsupportedWidth(u32),

    #[error("MCS {index}{} is not defined for {amendment}", if *.dcm { " with DCM" } else { "" })]
    InvalidMcs {
        index: u8,
        dcm: bool,
        amendment: &'static str,
    },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("config error for `{key}`: {msg}")]
    Config { key: String, msg: String },

    #[error("unknown config key `{key}`; valid keys: {valid}")]
    UnknownKey { key: String, valid: String },

    #[error("unknown sweep parameter `{name}`; valid parameters: {valid}")]
    UnknownParameter { name: String, valid: String },

    #[error("sounding starves data airtime: T_csi = {t_csi_us} us does not fit in the {period_us} us sounding period")]
    SoundingStarvesData { t_csi_us: f64, period_us: f64 },

    #[error("fixed point did not converge after {iterations} iterations (residual {residual:e}, tau_ap {tau_ap}, tau_sta {tau_sta})")]
    NoConvergence {
        iterations: usize,
        residual: f64,
        tau_ap: f64,
        tau_sta: f64,
    },

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn config(key: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            msg: msg.into(),
        }
    }

    /// Errors caused by bad input, as opposed to engine failures.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::UnsupportedWidth(_)
                | Error::InvalidMcs { .. }
                | Error::Config { .. }
                | Error::UnknownKey { .. }
                | Error::UnknownParameter { .. }
                | Error::SoundingStarvesData { .. }
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
