use eulerbench_core::CoreError;
use eulerbench_geometry::GeometryError;

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const FAILURE: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const HYPERBOLICITY_LOST: i32 = 3;
    pub const BLOWUP: i32 = 4;
    pub const STENCIL_OUT_OF_RANGE: i32 = 5;
    pub const FOLD_DETECTED: i32 = 6;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{0}")]
    Format(String),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Spectral(#[from] eulerbench_spectral::SpectralError),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => exit::CONFIG,
            Self::Core(e) | Self::Geometry(GeometryError::Core(e)) => match e {
                CoreError::HyperbolicityLost { .. } | CoreError::VacuumState { .. } => exit::HYPERBOLICITY_LOST,
                CoreError::BlowupDetected { .. } | CoreError::CflViolation { .. } => exit::BLOWUP,
                CoreError::StencilOutOfRange { .. } => exit::STENCIL_OUT_OF_RANGE,
                CoreError::UnknownInequality(_) | CoreError::InvalidParameter(_) | CoreError::HypothesisViolation(_) => {
                    exit::CONFIG
                }
                _ => exit::FAILURE,
            },
            Self::Geometry(GeometryError::FoldDetected { .. }) => exit::FOLD_DETECTED,
            Self::Geometry(GeometryError::InvalidParameter(_)) => exit::CONFIG,
            _ => exit::FAILURE,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_the_error_kind() {
        let core = |e| CliError::Core(e).exit_code();
        assert_eq!(core(CoreError::HyperbolicityLost { time: 0.1, min_sound_speed: 0.2, floor: 0.5 }), 3);
        assert_eq!(core(CoreError::VacuumState { min_density: -40.0 }), 3);
        assert_eq!(core(CoreError::BlowupDetected { time: 1.0, norm: 1e9 }), 4);
        assert_eq!(core(CoreError::StencilOutOfRange { index: 0, half_width: 2, len: 3 }), 5);
        assert_eq!(core(CoreError::UnknownInequality("xx".into())), 2);
        assert_eq!(CliError::Geometry(GeometryError::FoldDetected { time: 0.3 }).exit_code(), 6);
        assert_eq!(
            CliError::Geometry(GeometryError::Core(CoreError::StencilOutOfRange { index: 0, half_width: 4, len: 5 }))
                .exit_code(),
            5
        );
        assert_eq!(CliError::Config("x".into()).exit_code(), 2);
        assert_eq!(CliError::Format("x".into()).exit_code(), 1);
    }
}
