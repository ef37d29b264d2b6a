//! Logarithmic-coordinate dynamics for exponential-type entire maps.
//!
//! The crate provides a small catalog of model maps together with their
//! logarithmic lifts, tract bookkeeping and inverse branches, exact
//! half-plane hyperbolic geometry, orbit and itinerary tools, the pullback
//! construction of conjugacies near infinity, and the curve-lifting
//! semiconjugacy for hyperbolic maps. Rendering helpers classify pixel grids
//! by finite-horizon escape behaviour.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod catalog;
pub mod complex;
pub mod conjugacy;
pub mod error;
pub mod hypmetric;
pub mod orbits;
pub mod render;
pub mod samples;
pub mod semiconj;
pub mod tracts;

pub use catalog::{
    normalize, EntireMapSpec, KappaFamilyMember, LogLift, LogLiftModel, ModelDescriptor, ModelKind, NewtonSettings,
    NormalizationCertificate, Normalized,
};
pub use complex::{parse_complex, ComplexValue, TWO_PI};
pub use conjugacy::{
    CertifiedOrbit, ConjugacySample, DisplacementReport, GeneralPullback, KappaDerivative, OrbitSeed,
    TractCorrespondence,
};
pub use error::{Error, Result};
pub use hypmetric::{DensityBound, DensityMethod, PunctureSequence, PuncturedBound};
pub use orbits::{ClassGrid, EscapeFlag, ExternalAddress, OrbitRecord, PeriodicPoint, PixelClass, Window};
pub use semiconj::{CertificateMethod, ExpansionCertificate, HyperbolicSetup, SemiconjSample};
pub use tracts::{LiftedPath, PathLift, TractAddress};
