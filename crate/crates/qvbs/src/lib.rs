//! Transfer-matrix spectrum and spin-spin correlators of the q-deformed
//! higher-spin AKLT (q-VBS) chain.
//!
//! The model is a periodic integer-spin-S chain whose Hamiltonian is a
//! positive combination of U_q(su(2)) projectors onto total spin J > S on
//! neighboring sites. Its ground state is the q-VBS state, which has an exact
//! matrix product representation. Every quantity of interest reduces to the
//! (S+1)^2-dimensional transfer matrix G: squared norms are Tr G^L, correlators
//! are traces with operator insertions, and the full spectrum of G is known in
//! closed form, which gives closed-form correlation lengths and amplitudes.
//!
//! Modules, bottom up:
//! - [`qarith`]: q-integers, q-factorials, q-binomials, q-Clebsch-Gordan.
//! - [`matrix`]: small dense matrices and a cyclic Jacobi eigensolver.
//! - [`transfer`]: the transfer matrix G, operator insertions G_A, blocks G^(j).
//! - [`spectral`]: closed-form eigenvalues, eigenvectors, intertwiners, and a
//!   numeric verifier for the whole spectral package.
//! - [`correlator`]: norms and one-/two-point functions, finite-L and
//!   thermodynamic, plus large-distance asymptotics.
//! - [`oracle`]: brute-force cross-validation against the ground state
//!   materialized from its explicit polynomial form.
//!
//! The crate is `no_std` (with `alloc`); file formats and the CLI live in the
//! companion `qvbs-cli` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod correlator;
mod dd;
pub mod matrix;
pub mod oracle;
pub mod qarith;
pub mod spectral;
pub mod transfer;

pub use qarith::Deformation;

use core::fmt;

/// Precondition violations surfaced by constructors and entry points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Error {
    /// The deformation parameter must be finite and strictly positive;
    /// q <= 0 would make square roots of q-factorial products imaginary.
    InvalidDeformation { q: f64 },
    /// A spin, level, block, or site index lies outside its valid range.
    /// The payload names the offending argument.
    OutOfRange(&'static str),
    /// A spin triple violates the triangle rule |s1 - s2| <= j <= s1 + s2
    /// (including the integrality of s1 + s2 + j), or a magnetic label has
    /// the wrong parity or |m| > j.
    InvalidCoupling,
    /// A dense state or matrix would exceed the supported size.
    OverBudget { needed: usize, budget: usize },
    /// Hamiltonian coupling constants must be strictly positive.
    NonPositiveCoupling { value: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidDeformation { q } => {
                write!(f, "deformation parameter must be finite and > 0, got {q}")
            }
            Error::OutOfRange(what) => write!(f, "{what} out of range"),
            Error::InvalidCoupling => write!(f, "invalid spin coupling (triangle rule or label)"),
            Error::OverBudget { needed, budget } => {
                write!(f, "size {needed} exceeds supported budget {budget}")
            }
            Error::NonPositiveCoupling { value } => {
                write!(f, "coupling constants must be > 0, got {value}")
            }
        }
    }
}
