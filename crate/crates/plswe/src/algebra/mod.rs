//! Exact arithmetic substrate: prime field elements, dense univariate
//! polynomials, polynomial vectors/matrices and scalar linear algebra.
//!
//! Everything here is an immutable value with pure operations, so all types
//! can be shared freely across concurrent trials.

mod field;
mod matrix;
mod poly;

pub use field::{is_prime_u64, Fe, Field};
pub use matrix::ScalarMatrix;
pub use poly::{content_gcd, Degree, PolyMatrix, PolyVector, Polynomial};

use std::fmt;

/// Errors from the arithmetic substrate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlgebraError {
    /// The requested modulus is not prime.
    NotPrime(u64),
    /// The modulus is below the supported minimum of 3.
    ModulusTooSmall(u64),
    /// Zero has no multiplicative inverse.
    ZeroInverse,
    /// gcd of two zero polynomials is undefined.
    BothZero,
    /// Polynomial division by zero.
    DivisionByZero,
    /// Exact division left a nonzero remainder.
    InexactDivision,
    /// Content gcd of an identically zero pair.
    AllZero,
}

impl fmt::Display for AlgebraError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlgebraError::NotPrime(q) => write!(f, "{q} is not prime"),
            AlgebraError::ModulusTooSmall(q) => write!(f, "modulus {q} is below 3"),
            AlgebraError::ZeroInverse => write!(f, "zero has no inverse"),
            AlgebraError::BothZero => write!(f, "gcd(0, 0) is undefined"),
            AlgebraError::DivisionByZero => write!(f, "polynomial division by zero"),
            AlgebraError::InexactDivision => write!(f, "inexact polynomial division"),
            AlgebraError::AllZero => write!(f, "content gcd of an identically zero pair"),
        }
    }
}

impl std::error::Error for AlgebraError {}
