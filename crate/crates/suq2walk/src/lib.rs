//! Numerical toolkit for random walks on the discrete dual of SU_q(2).
//!
//! The dual of SU_q(2) is the direct sum of matrix blocks B(H_s) indexed by
//! half-integer spins. This crate builds the irreducible representations of
//! U_q(su2), decomposes tensor products into intertwiner bases, applies the
//! dual comultiplication and the Markov operator P_mu on finitely supported
//! block operators, runs the classical shadow chain on the fusion ring, and
//! computes Green/Martin kernels together with the path-space deviation norms
//! that certify exponential convergence to the Podles-sphere boundary.
//!
//! Module layout:
//! * [`qarith`] — exact half-integer spins and q-number arithmetic
//! * [`repsuq2`] — irrep blocks, states, fusion rules, intertwiner bases
//! * [`chain`] — the classical shadow walk on a generic fusion ring
//! * [`coproduct`] — symbolic algebra elements, the dual comultiplication,
//!   and the Markov operator on block operators
//! * [`martin`] — quantum Green and Martin kernels, boundary generators
//! * [`converge`] — deviation norms and exponential-rate reports

pub mod chain;
pub mod converge;
pub mod coproduct;
pub mod mat;
pub mod martin;
pub mod qarith;
pub mod repsuq2;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid deformation parameter q = {0}; require 0 < q < 1 strictly")]
    InvalidQ(f64),
    #[error("invalid tolerance {0}; must be nonnegative and finite")]
    InvalidTolerance(f64),
    #[error("matrix shape {got:?} does not match block of spin {twice_s}/2 (expected {expected}x{expected})")]
    ShapeMismatch {
        twice_s: u32,
        expected: usize,
        got: (usize, usize),
    },
    #[error("magnetic index {twice_j}/2 out of range for spin {twice_s}/2")]
    IndexOutOfRange { twice_s: u32, twice_j: i64 },
    #[error("invalid coupling target {twice_target}/2 for spin {twice_s}/2")]
    InvalidCouplingTarget { twice_s: u32, twice_target: u32 },
    #[error("degenerate weight kernel for pair ({twice_t}/2, {twice_s}/2), component {twice_v}/2: found {found} null directions instead of 1")]
    DegenerateKernel {
        twice_t: u32,
        twice_s: u32,
        twice_v: u32,
        found: usize,
    },
    #[error("algebra element carries a central factor; the Hopf word route only covers words in k, k^-1, e, f")]
    UnsupportedElement,
    #[error("measure weights must be positive and sum to 1 (got sum {0})")]
    BadMeasure(f64),
    #[error("window with max label {window} too small: convolution support reached label {reached}")]
    WindowTooSmall { window: u32, reached: u32 },
    #[error("no transience certificate: lambda = {0} >= 1")]
    NotTransient(f64),
    #[error("measure is not generating on the requested window")]
    NotGenerating,
    #[error("Green scalar at block {twice_s}/2 is {value:.3e}, below 10x its tail bound {tail:.3e}; division refused")]
    IllConditionedBlock {
        twice_s: u32,
        value: f64,
        tail: f64,
    },
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
