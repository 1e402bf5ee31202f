use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("register needs at least one site")]
    EmptyRegister,
    #[error("radix {0} is below 2")]
    BadRadix(usize),
    #[error("site {0} is out of range")]
    SiteOutOfRange(usize),
    #[error("site {0} appears twice in an operator support")]
    DuplicateSite(usize),
    #[error("radix mismatch at site {site}: register has {register}, operator expects {op}")]
    RadixMismatch { site: usize, register: usize, op: usize },
    #[error("register shapes differ")]
    ShapeMismatch,
    #[error("state was annihilated (norm^2 = {0:e})")]
    Annihilated(f64),
    #[error("forced outcome {outcome} has probability {prob:e}")]
    ForcedBranch { outcome: i8, prob: f64 },
    #[error("site {site} is entangled with the rest of the register (purity {purity})")]
    Entangled { site: usize, purity: f64 },
    #[error("register size {0} exceeds the simulation limit")]
    TooLarge(u128),
    #[error("register dimension overflows a 128-bit index")]
    Overflow,
    #[error("digit {digit} at site {site} has nonzero amplitude but no image")]
    Unmapped { site: usize, digit: usize },
    #[error("malformed operator: {0}")]
    BadOperator(String),
    #[error("invalid patch {width}x{height}")]
    InvalidPatch { width: usize, height: usize },
    #[error("invalid site: {0}")]
    InvalidSite(String),
    #[error("invalid path: {0}")]
    InvalidPath(String),
    #[error("unknown anyon `{0}`")]
    UnknownAnyon(String),
    #[error("unknown theory `{0}`")]
    UnknownTheory(String),
    #[error("unknown interface `{0}`")]
    UnknownInterface(String),
    #[error("anyon `{0}` is not condensable on the chosen boundaries")]
    NotCondensable(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("stage check failed: {0}")]
    CheckFailed(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
