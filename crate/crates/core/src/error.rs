use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("tangent vectors lose rank at {point:?} (gram determinant {gram_det:e})")]
    DegenerateFrame { point: Vec<f64>, gram_det: f64 },

    #[error("induced metric is not positive definite at {point:?}")]
    NotSpacelike { point: Vec<f64> },

    #[error("stencil leaves the parameter domain at {point:?}")]
    StencilOutOfDomain { point: Vec<f64> },

    #[error("operation `{op}` requires a product ambient")]
    WrongAmbient { op: &'static str },

    #[error("ambient carries no Killing data")]
    MissingKillingData,

    #[error("integration over a non-compact domain")]
    NonCompactDomain,

    #[error("ambient is not Einstein")]
    NotEinstein,

    #[error("conformal field is not Killing (nonzero conformal factor)")]
    NotKilling,

    #[error("unsupported space form: dim={dim}, c={curvature}, {signature}")]
    UnsupportedSpaceForm { dim: usize, curvature: f64, signature: &'static str },

    #[error("radial equation is singular at x0={x0}")]
    SingularPoint { x0: f64 },

    #[error("radial equation: coefficient of f'' vanishes at x0={x0}, f'={f_prime}")]
    DivisionByZero { x0: f64, f_prime: f64 },

    #[error("parameters out of range: {0}")]
    ParameterOutOfRange(String),

    #[error("ODE step failure at x0={x0}: {reason}")]
    StepFailure { x0: f64, reason: String },

    #[error("constant graph input")]
    ConstantInput,

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error("override `{key}` out of range: {reason}")]
    OverrideOutOfRange { key: String, reason: String },

    #[error("unknown ambient key `{0}`")]
    UnknownAmbient(String),

    #[error("scenario construction: {0}")]
    Scenario(String),

    #[error("configuration: {0}")]
    Config(String),

    #[error("io: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
