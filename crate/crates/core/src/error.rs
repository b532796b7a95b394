use eulerbench_spectral::SpectralError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CoreError {
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error("density {min_density:e} below the vacuum floor")]
    VacuumState { min_density: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("CFL number {cfl:.4} exceeds limit {limit}")]
    CflViolation { cfl: f64, limit: f64 },
    #[error("blowup at t = {time}: sup norm {norm:e}")]
    BlowupDetected { time: f64, norm: f64 },
    #[error("hyperbolicity lost at t = {time}: min c_s = {min_sound_speed} < {floor}")]
    HyperbolicityLost {
        time: f64,
        min_sound_speed: f64,
        floor: f64,
    },
    #[error("time index {index} needs {half_width} neighbours each side; stack has {len} snapshots")]
    StencilOutOfRange {
        index: usize,
        half_width: usize,
        len: usize,
    },
    #[error("snapshot spacing is not uniform at index {index}")]
    NonUniformSpacing { index: usize },
    #[error("parameters outside the lemma hypotheses: {0}")]
    HypothesisViolation(String),
    #[error("unknown inequality id {0:?}")]
    UnknownInequality(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;
