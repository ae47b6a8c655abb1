//! Error type shared across the crate.
//!
//! Two broad families matter for the CLI exit code: usage errors (bad
//! parameters, malformed config, I/O trouble) exit with 2, while numerical
//! failures of an otherwise well-posed run (non-convergence, divergence,
//! unusable fits) exit with 1.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Parameters outside the admissible domain (negative exponent where a
    /// nonnegative one is required, coupling too strong, etc.).
    #[error("parameter domain violation: {0}")]
    ParameterDomain(String),

    /// A function argument is invalid independent of the model parameters.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// Two fields that must share a grid do not.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// A finite-difference stencil would reach outside the stored grid.
    #[error("stencil unavailable at node ({0}, {1})")]
    StencilUnavailable(usize, usize),

    /// Iteration budget exhausted before the residual target.
    #[error("no convergence after {iterations} iterations: residual {residual:.3e}, target {tol:.3e}")]
    NoConvergence {
        iterations: usize,
        residual: f64,
        tol: f64,
    },

    /// The iteration is blowing up rather than stalling.
    #[error("iteration diverged: {0}")]
    Diverged(String),

    /// A requested fit cannot be formed (empty window, degenerate data).
    #[error("fit unavailable: {0}")]
    FitUnavailable(String),

    /// The grid or sample set is too coarse for the requested diagnostic.
    #[error("insufficient resolution: {0}")]
    Resolution(String),

    /// Malformed configuration file or unknown key.
    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code for the CLI: 2 for usage errors, 1 for numerical
    /// failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::ParameterDomain(_)
            | Error::Argument(_)
            | Error::GridMismatch(_)
            | Error::StencilUnavailable(_, _)
            | Error::Config(_)
            | Error::Io(_) => 2,
            Error::NoConvergence { .. }
            | Error::Diverged(_)
            | Error::FitUnavailable(_)
            | Error::Resolution(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_split_usage_from_numerical() {
        assert_eq!(Error::ParameterDomain("p".into()).exit_code(), 2);
        assert_eq!(Error::Argument("a".into()).exit_code(), 2);
        assert_eq!(Error::Config("c".into()).exit_code(), 2);
        assert_eq!(Error::GridMismatch("g".into()).exit_code(), 2);
        assert_eq!(Error::StencilUnavailable(0, 0).exit_code(), 2);
        assert_eq!(
            Error::NoConvergence {
                iterations: 10,
                residual: 1.0,
                tol: 1e-8
            }
            .exit_code(),
            1
        );
        assert_eq!(Error::Diverged("d".into()).exit_code(), 1);
        assert_eq!(Error::FitUnavailable("f".into()).exit_code(), 1);
        assert_eq!(Error::Resolution("r".into()).exit_code(), 1);
    }

    #[test]
    fn messages_carry_context() {
        let e = Error::NoConvergence {
            iterations: 500,
            residual: 3.2e-5,
            tol: 1e-10,
        };
        let msg = e.to_string();
        assert!(msg.contains("500"));
        assert!(msg.contains("3.200e-5"));
    }
}
