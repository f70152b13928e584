//! Pseudorandom `±1` sequences from generalized polynomials.
//!
//! The crate builds `e_n = chi(f(n))` for generalized polynomials `f` (real
//! polynomials closed under `+`, `*` and `floor`), measures the sequences
//! exactly (well-distribution measure, extreme discrepancy) and provides the
//! analytic and Diophantine tooling used to check the bounds that govern
//! them: exponential sums, the Erdős–Turán inequality, smoothed sawtooth
//! kernels, Weyl differencing, continued fractions and finite-type probes.
//!
//! Every real number that feeds a floor or a `chi` decision is handled as a
//! certified [`exactreal::DyadicBall`], so sequences do not depend on the
//! working precision once a decision resolves.

pub mod analytic;
pub mod bounds;
pub mod dioph;
pub mod error;
pub mod exactreal;
pub mod genpoly;
pub mod measures;
pub mod sequence;
pub mod verify;

pub use error::{Error, Result};
