//! Optimal stopping of Lévy processes with power rewards `(x^+)^n`.
//!
//! The crate solves `V(x) = sup_tau E_x[exp(-r tau) (X_tau^+)^n]` for
//! finite-activity Lévy models through the Appell polynomials of the
//! Wiener–Hopf factors of the process killed at an independent `Exp(r)` time,
//! and provides independent routes (quadrature, resolvent integrals, Monte
//! Carlo) to check every result.
//!
//! Modules:
//! - [`polynomial`], [`appell`]: monomial-basis polynomials, cumulant and
//!   moment sequences, Appell families.
//! - [`levy`]: models, Laplace exponent, `Phi(r)`, Wiener–Hopf factors.
//! - [`solver`]: thresholds, value functions, representation checks.
//! - [`measure`]: the representing measure of the value function.
//! - [`mc`]: reproducible Monte Carlo verification.

pub mod appell;
pub mod checks;
pub mod error;
pub mod levy;
pub mod mc;
pub mod measure;
pub mod polynomial;
pub mod quad;
pub mod solver;

pub use appell::{
    appell_convolve, appell_from_cumulants, cumulants_to_moments, moments_to_cumulants,
    CumulantSequence, MomentSequence, MAX_ORDER,
};
pub use error::{Error, Result};
pub use levy::{
    appell_of_factor, FactorDistribution, JumpComponent, JumpLaw, KilledSpec, LevyModel,
    WienerHopfFactors,
};
pub use mc::{McEstimate, SimConfig};
pub use polynomial::Polynomial;
pub use solver::{solve, StoppingSolution};
