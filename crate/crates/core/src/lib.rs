//! Local hidden-variable simulation of two-channel EPR-Bell polarization
//! experiments in which the polarizing beamsplitters reject photons unfairly.
//!
//! The crate is organised around four pieces:
//!
//! - [`model`]: the hidden-variable physics. Pair sources, the PBS detection
//!   pattern with its shaky (rejecting) regions, the output collapse of a
//!   control PBS and an optional setting-independent loss.
//! - [`experiment`]: Monte Carlo coincidence counting, correlation curves,
//!   CHSH evaluation and the passive/active rate sweeps used to test fair
//!   sampling.
//! - [`oracle`]: deterministic quadrature of the same model. Every Monte
//!   Carlo statistic has an exact counterpart here.
//! - [`compare`]: cell-by-cell agreement checks between the two.
//!
//! All randomness flows through explicit, seeded [`rng::SimRng`] streams, so
//! any run is a pure function of its configuration.

pub mod analysis;
pub mod angle;
pub mod compare;
pub mod error;
pub mod experiment;
pub mod model;
pub mod oracle;
pub mod rng;

pub use angle::Angle;
pub use error::{Error, Result};
