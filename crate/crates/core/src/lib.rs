//! Record values between two bracketing records: hazard-based models,
//! exact divided-difference calculus, conditional moments by quadrature and
//! Monte Carlo, and a registry of regression identities that characterize the
//! exponential and Weibull-½ laws.
//!
//! Every distribution is described by its cumulative hazard `H`. The record
//! sequence then has the arrival representation `H(R_n) = E_1 + … + E_n` with
//! unit exponentials `E_i`, and the law of a record between two others is a
//! Beta bridge in hazard space.

pub mod acceptance;
pub mod characterize;
pub mod condmom;
mod error;
pub mod hazard;
pub mod mfunc;
pub mod report;
pub mod simrec;

pub use error::{Error, Result};
pub use hazard::{Family, HazardModel};
