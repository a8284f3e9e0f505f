//! Entropy-maximizing block graphons for simple graphs constrained by
//! edge density `e` and triangle density `t`.
//!
//! - [`graphon`]: step graphons, the functionals `e`, `t`, `I` and their derivatives.
//! - [`sampler`]: Monte Carlo global search over rescaled random block graphons.
//! - [`sqp`]: sequential quadratic programming with BFGS and grid multistart.
//! - [`phase`]: boundary curves, the bipodal ansatz and phase classification.

pub mod error;
pub mod graphon;
pub mod phase;
pub mod poly;
pub mod qp;
pub mod sampler;
pub mod sqp;

pub use error::{Error, Result};
pub use graphon::{BlockGraphon, DensityPair, Gradient, RateValue};
pub use phase::{AnsatzParams, PhaseLabel, StabilityCoeffs};
pub use sampler::{RescaleVariant, SampleBest, SamplerConfig};
pub use sqp::{MultistartConfig, MultistartOutcome, SolveReport, SolverOptions};
