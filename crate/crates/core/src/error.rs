use thiserror::Error;

use crate::complex::ComplexValue;
use crate::tracts::TractAddress;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("point {0} lies outside the model domain")]
    Domain(ComplexValue),
    #[error("exponent overflow guard hit (real part {0})")]
    Overflow(f64),
    #[error("argument out of range: {0}")]
    Range(String),
    #[error("non-finite value: {0}")]
    NonFinite(String),
    #[error("invalid model descriptor: {0}")]
    Descriptor(String),
    #[error("normalization search failed: {0}")]
    SearchFailed(String),
    #[error("Newton iteration did not converge for target {0}")]
    NewtonDiverged(ComplexValue),
    #[error("path continuation failed at sample {index}: {reason}")]
    Continuation { index: usize, reason: String },
    #[error("external address undefined: orbit leaves the domain at step {0}")]
    AddressUndefined(usize),
    #[error("itineraries diverge at step {0}")]
    AddressMismatch(usize),
    #[error("pullback left the half-plane at step {0}")]
    PullbackLeftDomain(usize),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("orbit leaves J_Q at step {step}")]
    OrbitLeftJQ { step: usize },
    #[error("required depth {needed} exceeds the maximum depth {max}")]
    DepthExceeded { needed: usize, max: usize },
    #[error("tract correspondence has no image for {0:?}")]
    CorrespondenceGap(TractAddress),
    #[error("invalid hyperbolic setup: {0}")]
    SetupInvalid(String),
    #[error("orbit of {z} falls inside the escape radius at step {step}")]
    Horizon { z: ComplexValue, step: usize },
    #[error("no expansion constant C > 1 is available")]
    CertificateMissing,
    #[error("expansion certificate failed: C = {c_hat} at sample {z}")]
    CertificateFailed { c_hat: f64, z: ComplexValue },
}

pub type Result<T> = std::result::Result<T, Error>;
