use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("dimension {dim} exceeds the configured cap {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("invalid layout: {0}")]
    InvalidLayout(String),

    #[error("operator is not Hermitian (max asymmetry {asymmetry:e})")]
    NotHermitian { asymmetry: f64 },

    #[error("operator is not unitary (max deviation {deviation:e}){}", label.as_ref().map(|l| format!(" in gate `{l}`")).unwrap_or_default())]
    NotUnitary { deviation: f64, label: Option<String> },

    #[error("columns are not orthonormal (max deviation {deviation:e})")]
    NotOrthonormal { deviation: f64 },

    #[error("threshold {threshold} lands inside an eigenvalue cluster (gap {gap:e} below tolerance {tol:e})")]
    ThresholdInCluster { threshold: f64, gap: f64, tol: f64 },

    #[error("no spectral gap is defined: {0}")]
    NoGap(String),

    #[error("subspaces too far apart for a direct rotation (distance {distance})")]
    RotationUndefined { distance: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("readout collision: eigenvalues {first} and {second} both read out as {digits}")]
    ReadoutCollision { first: f64, second: f64, digits: String },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn at_stage(self, stage: &'static str) -> Self {
        Error::Stage { stage, source: Box::new(self) }
    }
}

pub(crate) trait StageExt<T> {
    fn stage(self, stage: &'static str) -> Result<T>;
}

impl<T> StageExt<T> for Result<T> {
    fn stage(self, stage: &'static str) -> Result<T> {
        self.map_err(|e| e.at_stage(stage))
    }
}
