use std::path::PathBuf;

use thiserror::Error;
use tunnelsense_core::dsp::DspError;
use tunnelsense_core::harvest::HarvestError;
use tunnelsense_core::oscillator::OscillatorError;
use tunnelsense_core::scene::SceneError;
use tunnelsense_core::DiodeError;

use crate::csvio::CsvError;
use crate::iqfile::IqFileError;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{0}")]
    Usage(String),
    #[error("config: {0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Iq(#[from] IqFileError),
    #[error(transparent)]
    Csv(#[from] CsvError),
    #[error(transparent)]
    Diode(#[from] DiodeError),
    #[error(transparent)]
    Oscillator(#[from] OscillatorError),
    #[error(transparent)]
    Scene(#[from] SceneError),
    #[error(transparent)]
    Harvest(#[from] HarvestError),
    #[error(transparent)]
    Dsp(#[from] DspError),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// Short machine-readable label for the failure.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Usage(_) => "usage",
            Error::Config(_) => "config",
            Error::Io { .. } => "io",
            Error::Iq(e) => e.kind(),
            Error::Csv(e) => e.kind(),
            Error::Diode(_) => "diode_model",
            Error::Oscillator(_) => "oscillator_model",
            Error::Scene(SceneError::Nyquist { .. }) => "nyquist",
            Error::Scene(_) => "scene_model",
            Error::Harvest(_) => "harvest_model",
            Error::Dsp(DspError::InsufficientOverlap { .. }) => "insufficient_overlap",
            Error::Dsp(DspError::InsufficientCycles { .. }) => "insufficient_cycles",
            Error::Dsp(DspError::TooShort { .. }) => "too_short",
            Error::Dsp(_) => "dsp",
        }
    }

    /// Process exit status, one per failure class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) => 2,
            Error::Config(_) => 3,
            Error::Io { .. } => 4,
            Error::Iq(_) | Error::Csv(_) => 5,
            Error::Diode(_) | Error::Oscillator(_) | Error::Scene(_) | Error::Harvest(_) => 6,
            Error::Dsp(_) => 7,
        }
    }

    /// Single-line JSON report for stderr.
    pub fn to_json_line(&self) -> String {
        serde_json::json!({ "error": self.kind(), "message": self.to_string() }).to_string()
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
