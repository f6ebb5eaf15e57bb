use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("energy {energy} is not above the lowest internal level {threshold}; no channel is open")]
    NoOpenChannel { energy: f64, threshold: f64 },

    #[error("integration limits [{lower}, {upper}] lie outside the well [0, {width}]")]
    LimitsOutsideWell { lower: f64, upper: f64, width: f64 },

    #[error("step size underflow at x = {x} (h = {h:e})")]
    StepSizeUnderflow { x: f64, h: f64 },

    #[error("right-hand side evaluation budget of {max_evals} exhausted at x = {x}")]
    MaxEvalsExceeded { x: f64, max_evals: usize },

    #[error("non-finite state encountered at x = {x}")]
    NonFinite { x: f64 },

    #[error("singular matching matrix at x = {x}")]
    Singular { x: f64 },

    #[error("Larmor formula out of range: {0}")]
    LarmorDomain(String),
}

pub type Result<T> = std::result::Result<T, Error>;
