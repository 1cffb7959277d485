use core::fmt;

use alloc::string::String;

/// Errors raised by the core algorithms.
#[derive(Clone, Debug, PartialEq)]
pub enum Error {
    /// A position lies outside the periodic box.
    Domain(String),
    /// An argument violates an operation's precondition.
    Argument(String),
    /// A size cap (subset lattice, quadrature product rule) was exceeded.
    Size(String),
    /// An internal consistency invariant was violated.
    Invariant(String),
    /// A numerical method failed to converge.
    Numerical(String),
    /// No ergodicity guarantee: the contraction constant is not below one.
    Regime(String),
    /// The kinetic integrator lost positivity or its step size underflowed.
    Integration(String),
}

pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (kind, msg) = match self {
            Error::Domain(m) => ("domain error", m),
            Error::Argument(m) => ("argument error", m),
            Error::Size(m) => ("size error", m),
            Error::Invariant(m) => ("invariant error", m),
            Error::Numerical(m) => ("numerical error", m),
            Error::Regime(m) => ("regime error", m),
            Error::Integration(m) => ("integration error", m),
        };
        write!(f, "{kind}: {msg}")
    }
}

impl core::error::Error for Error {}
