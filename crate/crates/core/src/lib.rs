//! Dead cores and free boundaries for degenerate fully nonlinear elliptic
//! problems.
//!
//! The crate covers a coupled pair of equations whose gradient degeneracy and
//! reaction coupling produce compactly supported solutions, and a single
//! Henon-type equation with radial weights. The layout follows the data:
//!
//! * [`params`] holds the admissible parameter domains and the exponent
//!   algebra they induce.
//! * [`exact`] evaluates closed-form radial profiles, sharp constants, and
//!   their residuals, used as oracles everywhere else.
//! * [`field`] is the dense 2-d grid container with disk masks and binary and
//!   CSV serialization.
//! * [`operators`] applies fully nonlinear second-order operators and the
//!   gradient degeneracy factor on grids.
//! * [`radial`] solves the radial reductions by damped block iteration.
//! * [`grid`] solves the full 2-d problems by nonlinear relaxation sweeps.
//! * [`analysis`] extracts free boundaries, growth rates, density and
//!   porosity diagnostics, and rescaling limits from solved fields.
//! * [`cli`] wires everything into the `deadcore` binary.

pub mod analysis;
pub mod cli;
pub mod config;
pub mod error;
pub mod exact;
pub mod field;
pub mod grid;
pub mod operators;
pub mod params;
pub mod radial;
pub mod report;
pub mod suite;

pub use error::{Error, Result};
pub use params::{
    henon_exponents, magnitude_exponents, multi_term_regularity, system_exponents, ExponentBundle,
    HenonParams, SystemParams,
};

/// Positive part raised to a nonnegative power, with the convention
/// `pow_plus(t, 0) = 1` for `t > 0` and `0` for `t <= 0`. Reactions switch
/// off entirely outside the positivity set even when the exponent vanishes;
/// this is what lets zero-exponent problems keep a free boundary.
pub fn pow_plus(t: f64, e: f64) -> f64 {
    if t > 0.0 {
        t.powf(e)
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pow_plus_positive_branch() {
        assert_eq!(pow_plus(2.0, 2.0), 4.0);
        assert_eq!(pow_plus(9.0, 0.5), 3.0);
        assert_eq!(pow_plus(0.5, 1.0), 0.5);
    }

    #[test]
    fn pow_plus_zero_exponent_still_switches_off() {
        assert_eq!(pow_plus(3.0, 0.0), 1.0);
        assert_eq!(pow_plus(0.0, 0.0), 0.0);
        assert_eq!(pow_plus(-1.0, 0.0), 0.0);
    }

    #[test]
    fn pow_plus_negative_argument_is_zero() {
        assert_eq!(pow_plus(-2.0, 2.0), 0.0);
        assert_eq!(pow_plus(0.0, 0.5), 0.0);
    }
}
