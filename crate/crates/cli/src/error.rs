use spilab_core::capacity::CapacityError;
use spilab_core::expr::ExprError;
use spilab_core::gauss_lsi::GaussLsiError;
use spilab_core::hermite::HermiteError;
use spilab_core::measure::MeasureError;
use spilab_core::numerics::NumericsError;
use spilab_core::orlicz::OrliczError;
use spilab_core::spectrum::SpectrumError;
use spilab_core::transfer::TransferError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("expression: {0}")]
    Expression(#[from] ExprError),
    #[error("measure: {0}")]
    Measure(#[from] MeasureError),
    #[error("numerics: {0}")]
    Numerics(#[from] NumericsError),
    #[error("orlicz: {0}")]
    Orlicz(#[from] OrliczError),
    #[error("capacity: {0}")]
    Capacity(#[from] CapacityError),
    #[error("transfer: {0}")]
    Transfer(#[from] TransferError),
    #[error("spectrum: {0}")]
    Spectrum(#[from] SpectrumError),
    #[error("hermite: {0}")]
    Hermite(#[from] HermiteError),
    #[error("gauss-lsi: {0}")]
    GaussLsi(#[from] GaussLsiError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Expression(_) => "expression",
            CliError::Measure(_) => "measure",
            CliError::Numerics(_) => "numerics",
            CliError::Orlicz(_) => "orlicz",
            CliError::Capacity(_) => "capacity",
            CliError::Transfer(_) => "transfer",
            CliError::Spectrum(_) => "spectrum",
            CliError::Hermite(_) => "hermite",
            CliError::GaussLsi(_) => "gauss-lsi",
            CliError::Io(_) => "io",
        }
    }

    /// Process exit status; 2 is left to argument-parsing failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 3,
            CliError::Expression(_) => 4,
            CliError::Measure(_) => 5,
            CliError::Numerics(_) => 6,
            CliError::Orlicz(_) => 7,
            CliError::Capacity(_) => 8,
            CliError::Transfer(_) => 9,
            CliError::Spectrum(_) => 10,
            CliError::Hermite(_) => 11,
            CliError::GaussLsi(_) => 12,
            CliError::Io(_) => 13,
        }
    }

    /// One-line JSON for stderr.
    pub fn to_json(&self) -> String {
        let mut obj = serde_json::json!({
            "error": self.kind(),
            "exit_code": self.exit_code(),
            "message": self.to_string(),
        });
        if let CliError::Expression(e) = self {
            obj["offset"] = serde_json::json!(e.offset());
        }
        obj.to_string()
    }
}

pub fn config_err<T>(msg: impl Into<String>) -> Result<T, CliError> {
    Err(CliError::Config(msg.into()))
}
