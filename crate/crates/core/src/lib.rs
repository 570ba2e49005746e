//! Ruin probabilities for renewal risk models whose claim sizes and
//! inter-arrival times are widely dependent.
//!
//! - [`tails`]: claim-size families, Matuszewska indices and numerical class
//!   diagnostics.
//! - [`dependence`]: FGM coupling patterns, their dominating coefficients and
//!   Monte Carlo checks of the orthant inequalities.
//! - [`renewal`]: the counting process `N(t)` and its moments.
//! - [`ruin`]: finite-time and random-time ruin probabilities against the
//!   approximant `E N(τ)·Ḡ(x)`.
//! - [`deviations`]: large deviations of claim sums and the `s`-function
//!   machinery of the WUOD tail inequality.
//! - [`experiment`]: JSON-configured runs with CSV reports, driven by the
//!   `ruin-sim` binary.
//!
//! Every Monte Carlo routine takes an explicit seed; path `i` always draws
//! from the same stream, so results do not depend on the worker count.

// Negated float comparisons reject NaN deliberately.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod error;
pub mod estimate;
pub mod experiment;
pub mod dependence;
pub mod deviations;
pub mod ext;
pub mod quad;
pub mod renewal;
pub mod ruin;
pub mod stream;
pub mod tails;

pub use error::{Error, HypothesisViolation, Result};
pub use ext::ExtReal;
pub use tails::TailModel;
