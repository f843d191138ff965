//! Joint and complete mixability: analytic criteria, exact LP certificates,
//! rearrangement solvers for the min-max arrangement problem, constructive
//! decompositions, and Value-at-Risk aggregation bounds.
//!
//! A tuple of distributions is jointly mixable when its coordinates can be
//! coupled so their sum is constant. The library decides this where theory
//! allows (with certificates that re-validate independently), solves the
//! discrete arrangement problem exactly or heuristically, and turns tail
//! mixability into sharpness statements for worst-case VaR bounds.

pub mod construct;
pub mod criteria;
pub mod distributions;
pub mod error;
pub mod lpcert;
pub mod numeric;
pub mod rearrange;
pub mod riskbounds;
pub mod verdict;

pub use error::{Budget, Error};
pub use numeric::{Rational, Tolerance};
pub use verdict::{Certificate, Status, Verdict};
