use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("rejected input: {0}")]
    InvalidInput(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("state outside nonlinearity domain: {0}")]
    OutsideDomain(String),
    #[error("nonconvergent composition: tail bound {bound:e} above tolerance at degree {degree}")]
    NonconvergentComposition { bound: f64, degree: usize },
    #[error("jet depth exhausted: {0}")]
    DepthExhausted(String),
    #[error("series radius exceeded: R1_hat = {r1_hat} <= |x| = {x}")]
    RadiusExceeded { r1_hat: f64, x: f64 },
    #[error("divergent constant: mu - q = {0} must exceed 2")]
    DivergentConstant(f64),
    #[error("no contraction index found up to n = {0}")]
    NoContraction(usize),
    #[error("gap condition violated: H_hat = {h_hat} <= e^(1/e) H = {bound}")]
    GapCondition { h_hat: f64, bound: f64 },
    #[error("certificate failure: {0}")]
    Certificate(String),
    #[error("synthesis diverged at t = {t}: R1 estimate {r1}")]
    Divergence { t: f64, r1: f64 },
    #[error("blow-up/domain exit at t = {t}: {detail}")]
    BlowUp { t: f64, detail: String },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("schema error at {path}: {msg}")]
    Schema { path: String, msg: String },
    #[error("stage {stage} failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn at_stage(self, stage: &'static str) -> Error {
        match self {
            e @ Error::Stage { .. } => e,
            e => Error::Stage { stage, source: Box::new(e) },
        }
    }
}
