//! Numerical toolkit for the arithmetic of the k-divisor function and the
//! moments of the Riemann zeta function.
//!
//! The crate is organised around one computational chain:
//!
//! 1. [`sieve`] — tables of d_k(n) (number of ways to write n as an ordered
//!    product of k factors), built by iterated divisor-sum convolution.
//! 2. [`ramanujan`] — Ramanujan sums c_q(a), the Fejér weight
//!    S(a) = max(0, h − |a|), and the exact closed forms tying them together.
//! 3. [`laurent`] / [`main_term`] — Laurent data of ζ(s)^k at s = 1, the
//!    residue polynomial behind Σ_{n≤x} d_k(n), and the singular-series main
//!    terms for shifted correlations.
//! 4. [`correlation`] / [`selberg`] — shifted correlations
//!    Σ_{n≤x} d_k(n) d_k(n+a), the short-interval variance integral
//!    J_k(x,h), its dispersion decomposition, and the double-average
//!    statistic that feeds the moment bound.
//! 5. [`zeta`] / [`moments`] — ζ(1/2+it) evaluation (Euler–Maclaurin and
//!    Riemann–Siegel), moment quadrature I_k(T), the smoothed moment with a
//!    C^∞ bump weight, and the exponent bookkeeping report.
//!
//! Everything is deterministic: no global state, fixed-order parallel
//! reductions, and explicit seeds in the randomized verification suites.

pub mod correlation;
pub mod error;
pub mod laurent;
pub mod main_term;
pub mod moments;
pub mod quad;
pub mod ramanujan;
pub mod selberg;
pub mod sieve;
pub mod verify;
pub mod zeta;

pub use error::{Error, Result};
pub use laurent::EULER_GAMMA;
pub use sieve::DivisorTable;
