//! Numerical laboratory for the mean-field Potts spin glass.
//!
//! The crate is organised bottom-up:
//!
//! * [`glass`] holds the model: parameters, Gaussian disorder, spin
//!   configurations, colour sectors and energy evaluation.
//! * [`exact`] enumerates all `kappa^N` configurations and is the trusted
//!   oracle for small systems.
//! * [`mc`] contains the heat-bath sampler, parallel tempering with
//!   thermodynamic integration, and annealing ground-state searches.
//! * [`bounds`] evaluates the analytic free-energy bounds, the colour
//!   symmetry-breaking region and the minimal number of colours for which it
//!   is non-empty.
//! * [`acceptance`] bundles the end-to-end verification criteria so they can
//!   be run from the test suite and from the command line.

// Parameter checks are written as `!(x >= 0.0)` so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod bounds;
pub mod error;
pub mod exact;
pub mod glass;
pub mod mc;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
pub use glass::{ColorProfile, DisorderSample, ModelParams, SpinConfiguration};
