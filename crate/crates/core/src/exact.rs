//! Closed-form radial profiles, their sharp constants, and residual oracles.
//!
//! Power profiles `c (r - rho)_+^gamma` with `gamma > 1` are the exact
//! skeleton of the whole crate: the coupled system and the weighted single
//! equation both admit such solutions with explicitly computable `c`, and
//! every numerical solver and diagnostic is cross-checked against them. The
//! Hessian of a radial power with `gamma > 1` has eigenvalues
//! `c gamma (gamma - 1) r^{gamma-2}` and `c gamma r^{gamma-2}` (multiplicity
//! `n - 1`), all nonnegative, so both extremal operators collapse to scaled
//! Laplacians and residuals can be evaluated in closed form with no
//! discretization error.

use crate::error::{Error, Result};
use crate::params::{magnitude_exponents, system_exponents, HenonParams, SystemParams};
use crate::pow_plus;

/// A radial power profile `r -> coeff * (|x - center| - offset)_+^exponent`.
///
/// `exponent > 1` keeps the profile C1 across the sphere `|x - center| =
/// offset`; the closed ball of radius `offset` is the dead core.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialSolution {
    pub coeff: f64,
    pub exponent: f64,
    pub center: Vec<f64>,
    pub offset: f64,
}

impl RadialSolution {
    pub fn new(coeff: f64, exponent: f64, center: Vec<f64>, offset: f64) -> Result<Self> {
        if !(coeff.is_finite() && coeff > 0.0) {
            return Err(Error::Argument(format!(
                "profile coefficient must be positive, got {coeff}"
            )));
        }
        if !(exponent.is_finite() && exponent > 1.0) {
            return Err(Error::Argument(format!(
                "profile exponent must exceed 1, got {exponent}"
            )));
        }
        if !(offset.is_finite() && offset >= 0.0) {
            return Err(Error::Argument(format!(
                "dead-core radius must be nonnegative, got {offset}"
            )));
        }
        if center.iter().any(|c| !c.is_finite()) {
            return Err(Error::Argument("profile center must be finite".into()));
        }
        Ok(RadialSolution {
            coeff,
            exponent,
            center,
            offset,
        })
    }

    /// Centered profile in dimension `n`.
    pub fn centered(coeff: f64, exponent: f64, n: usize, offset: f64) -> Result<Self> {
        Self::new(coeff, exponent, vec![0.0; n], offset)
    }

    pub fn value_at_radius(&self, r: f64) -> f64 {
        let s = r - self.offset;
        if s <= 0.0 {
            0.0
        } else {
            self.coeff * s.powf(self.exponent)
        }
    }

    /// Radial derivative; zero on the dead core (the profile is C1).
    pub fn deriv(&self, r: f64) -> f64 {
        let s = r - self.offset;
        if s <= 0.0 {
            0.0
        } else {
            self.coeff * self.exponent * s.powf(self.exponent - 1.0)
        }
    }

    /// Radial second derivative, taken from inside (zero) on the closed core.
    /// For `exponent < 2` the outside limit at the core boundary is infinite;
    /// residuals stay finite because the degeneracy factor vanishes faster.
    pub fn second_deriv(&self, r: f64) -> f64 {
        let s = r - self.offset;
        if s <= 0.0 {
            0.0
        } else {
            self.coeff * self.exponent * (self.exponent - 1.0) * s.powf(self.exponent - 2.0)
        }
    }

    pub fn value_at(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.center.len() {
            return Err(Error::Argument(format!(
                "point dimension {} does not match profile dimension {}",
                x.len(),
                self.center.len()
            )));
        }
        let r = x
            .iter()
            .zip(&self.center)
            .map(|(a, c)| (a - c) * (a - c))
            .sum::<f64>()
            .sqrt();
        Ok(self.value_at_radius(r))
    }
}

/// Which ellipticity constant builds the comparison pair: `Super` uses the
/// upper constant and yields supersolutions under the maximal operator,
/// `Sub` uses the lower constant and yields subsolutions under the minimal
/// one. Sub constants dominate: smaller ellipticity means a larger amplitude
/// is needed to balance the same reaction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstantKind {
    Super,
    Sub,
}

/// Amplitudes `(A, B)` of the entire-solution pair `(A r^alpha, B r^beta)`.
///
/// They solve the coupled amplitude relations
///
/// ```text
/// L (n + alpha - 2) (A alpha)^{1+p} = B^{lambda1}
/// L (n + beta  - 2) (B beta )^{1+q} = A^{lambda2}
/// ```
///
/// (`L` the ellipticity constant chosen by `kind`), a linear system in
/// `(log A, log B)` whose determinant is the coupling gap. With
/// `k_a = L (n + alpha - 2) alpha^{1+p}`, `k_b = L (n + beta - 2) beta^{1+q}`
/// and `e = lambda1 lambda2 - (1+p)(1+q) < 0`:
///
/// ```text
/// A = k_b^{lambda1 / e} * k_a^{(1+q) / e}
/// B = k_a^{lambda2 / e} * k_b^{(1+p) / e}
/// ```
pub fn system_constants(params: &SystemParams, kind: ConstantKind) -> Result<(f64, f64)> {
    let ell = match kind {
        ConstantKind::Super => params.big_lambda,
        ConstantKind::Sub => params.lambda,
    };
    let exps = system_exponents(params);
    let (alpha, beta) = (exps.alpha, exps.beta);
    let n = params.n as f64;
    let geo_a = n + alpha - 2.0;
    let geo_b = n + beta - 2.0;
    if geo_a <= 0.0 || geo_b <= 0.0 {
        // Unreachable for n >= 1 since alpha, beta > 1, but the formula only
        // makes sense with positive geometric factors.
        return Err(Error::ParameterDomain(format!(
            "amplitude relations need n + alpha - 2 > 0 and n + beta - 2 > 0, got ({geo_a}, {geo_b})"
        )));
    }
    let k_a = ell * geo_a * alpha.powf(1.0 + params.p);
    let k_b = ell * geo_b * beta.powf(1.0 + params.q);
    let e = -params.coupling_gap();
    let a = k_b.powf(params.lambda1 / e) * k_a.powf((1.0 + params.q) / e);
    let b = k_a.powf(params.lambda2 / e) * k_b.powf((1.0 + params.p) / e);
    Ok((a, b))
}

/// Amplitude of the weighted-equation solution `C1 r^{beta_h}` solving
/// `|Du|^p (L Laplacian u) = |x|^alpha u_+^mu`:
///
/// ```text
/// C1 = [ (1+p-mu)^{2+p} / ( L (2+p+alpha)^{1+p} [n(1+p-mu) + 2mu+alpha-p] ) ]^{1/(1+p-mu)}
/// ```
///
/// equivalently `C1^{1+p-mu} beta_h^{1+p} (n + beta_h - 2) L = 1`.
pub fn henon_constant(params: &HenonParams) -> Result<f64> {
    let gap = 1.0 + params.p - params.mu;
    if gap <= 0.0 {
        return Err(Error::ParameterDomain(format!(
            "amplitude needs mu < 1 + p, got mu = {}, p = {}",
            params.mu, params.p
        )));
    }
    let n = params.n as f64;
    let geo = n * gap + 2.0 * params.mu + params.alpha - params.p;
    if geo <= 0.0 {
        // geo = (n-1)(1+p-mu) + 1 + mu + alpha > 0 for n >= 1, but guard the
        // formula anyway.
        return Err(Error::ParameterDomain(format!(
            "amplitude needs n(1+p-mu) + 2mu + alpha - p > 0, got {geo}"
        )));
    }
    let num = gap.powf(2.0 + params.p);
    let den = params.big_lambda * (2.0 + params.p + params.alpha).powf(1.0 + params.p) * geo;
    Ok((num / den).powf(1.0 / gap))
}

/// A profile in a single coordinate: `x -> profile(|x_axis|)` with 1-based
/// `axis`. Its Laplacian in any dimension is the plain second derivative in
/// that coordinate, so the amplitude is dimension-independent.
#[derive(Debug, Clone, PartialEq)]
pub struct CoordinateSolution {
    pub profile: RadialSolution,
    pub axis: usize,
}

impl CoordinateSolution {
    pub fn value_at(&self, x: &[f64]) -> Result<f64> {
        if self.axis > x.len() {
            return Err(Error::Argument(format!(
                "axis {} exceeds point dimension {}",
                self.axis,
                x.len()
            )));
        }
        Ok(self.profile.value_at_radius(x[self.axis - 1].abs()))
    }
}

/// One-coordinate solution `c |x_axis|^{(2+p+alpha)/(1+p-mu)}` of
/// `|Du|^p Laplacian(u) = |x_axis|^alpha u_+^mu`, with
///
/// ```text
/// c = [ (1+p-mu)^{2+p} / ( (1+alpha+mu) (2+p+alpha)^{1+p} ) ]^{1/(1+p-mu)}
/// ```
///
/// Since the profile depends on one coordinate only, its Laplacian is the 1-d
/// second derivative and `c` does not depend on `n`; the residual oracle
/// [`residual_coordinate`] is the arbiter for the amplitude (see
/// [`coordinate_coefficient_variants`] for the rejected alternative). The
/// ellipticity constants play no role: the profile is convex in its single
/// variable, and the equation here fixes the identity-coefficient trace
/// operator.
pub fn coordinate_solution(params: &HenonParams, axis: usize) -> Result<CoordinateSolution> {
    if axis < 1 || axis > params.n {
        return Err(Error::Argument(format!(
            "axis must lie in 1..={}, got {axis}",
            params.n
        )));
    }
    let (c, _) = coordinate_coefficient_variants(params)?;
    let gap = 1.0 + params.p - params.mu;
    let exponent = (2.0 + params.p + params.alpha) / gap;
    Ok(CoordinateSolution {
        profile: RadialSolution::new(c, exponent, vec![0.0], 0.0)?,
        axis,
    })
}

/// The correct one-coordinate amplitude and the plausible-but-wrong variant
/// that omits the outer `1/(1+p-mu)` root. The two agree when `mu = p`
/// (outer exponent 1... they agree whenever `1 + p - mu = 1`); the residual
/// check tells them apart everywhere else.
pub fn coordinate_coefficient_variants(params: &HenonParams) -> Result<(f64, f64)> {
    let gap = 1.0 + params.p - params.mu;
    if gap <= 0.0 {
        return Err(Error::ParameterDomain(format!(
            "one-coordinate amplitude needs mu < 1 + p, got mu = {}, p = {}",
            params.mu, params.p
        )));
    }
    let factor = 1.0 + params.alpha + params.mu;
    let base = gap.powf(2.0 + params.p)
        / (factor * (2.0 + params.p + params.alpha).powf(1.0 + params.p));
    Ok((base.powf(1.0 / gap), base))
}

/// Residual of a one-coordinate profile in the equation
/// `|Du|^p Laplacian(u) = |t|^alpha u_+^mu` at coordinate value `t`.
pub fn residual_coordinate(sol: &CoordinateSolution, params: &HenonParams, t: f64) -> f64 {
    let r = t.abs();
    let w = &sol.profile;
    if r <= w.offset {
        return 0.0;
    }
    let grad = w.deriv(r);
    let lhs = grad.abs().powf(params.p) * w.second_deriv(r);
    lhs - r.powf(params.alpha) * pow_plus(w.value_at_radius(r), params.mu)
}

/// Which radial reduction of the second-order operator to apply to a convex
/// radial power: the identity-coefficient trace (plain Laplacian), or the
/// maximal/minimal extremal operator, which scale the Laplacian by the upper
/// and lower ellipticity constants respectively because every Hessian
/// eigenvalue of the profile is nonnegative.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RadialOperator {
    TraceIdentity,
    PucciPlus,
    PucciMinus,
}

impl RadialOperator {
    fn coefficient(self, params_lambda: f64, params_big_lambda: f64) -> f64 {
        match self {
            RadialOperator::TraceIdentity => 1.0,
            RadialOperator::PucciPlus => params_big_lambda,
            RadialOperator::PucciMinus => params_lambda,
        }
    }
}

/// Residuals of a profile pair in the coupled system at radius `r`:
///
/// ```text
/// res1 = |u'|^p * L (u'' + (n-1) u'/r) - v_+^{lambda1}
/// res2 = |v'|^q * L (v'' + (n-1) v'/r) - u_+^{lambda2}
/// ```
///
/// with `L` fixed by `kind`. Inside either closed dead core the fields and
/// their derivatives vanish and both sides are zero, so the residual there is
/// exactly `(0, 0)`.
pub fn residual_radial(
    sol_u: &RadialSolution,
    sol_v: &RadialSolution,
    params: &SystemParams,
    kind: RadialOperator,
    r: f64,
) -> Result<(f64, f64)> {
    if !(r.is_finite() && r >= 0.0) {
        return Err(Error::Argument(format!(
            "radius must be finite and nonnegative, got {r}"
        )));
    }
    let ell = kind.coefficient(params.lambda, params.big_lambda);
    let n = params.n as f64;
    let one_sided = |w: &RadialSolution, p: f64, rhs: f64| -> f64 {
        if r <= w.offset {
            // Dead core: derivatives vanish and delta^0-type conventions do
            // not apply; the equation reads 0 = rhs with rhs also 0 when the
            // other field shares the core. Report the literal difference.
            return 0.0 - rhs;
        }
        let grad = w.deriv(r);
        let lap = w.second_deriv(r) + (n - 1.0) * grad / r;
        grad.abs().powf(p) * ell * lap - rhs
    };
    let rhs1 = pow_plus(sol_v.value_at_radius(r), params.lambda1);
    let rhs2 = pow_plus(sol_u.value_at_radius(r), params.lambda2);
    Ok((
        one_sided(sol_u, params.p, rhs1),
        one_sided(sol_v, params.q, rhs2),
    ))
}

/// Residual of a single profile in the weighted equation
/// `|Du|^p * L (u'' + (n-1)u'/r) = r^alpha u_+^mu` at radius `r`.
pub fn residual_radial_henon(
    sol: &RadialSolution,
    params: &HenonParams,
    kind: RadialOperator,
    r: f64,
) -> Result<f64> {
    if !(r.is_finite() && r >= 0.0) {
        return Err(Error::Argument(format!(
            "radius must be finite and nonnegative, got {r}"
        )));
    }
    let rhs = r.powf(params.alpha) * pow_plus(sol.value_at_radius(r), params.mu);
    if r <= sol.offset {
        return Ok(0.0 - rhs);
    }
    let ell = kind.coefficient(params.lambda, params.big_lambda);
    let n = params.n as f64;
    let grad = sol.deriv(r);
    let lap = sol.second_deriv(r) + (n - 1.0) * grad / r;
    Ok(grad.abs().powf(params.p) * ell * lap - rhs)
}

/// Sharp smallness threshold for vanishing of entire solution pairs:
///
/// ```text
/// m = min( A^{2/num_alpha}, B^{2/num_beta} )
/// ```
///
/// where `(A, B)` are the maximal-operator amplitudes and `num_alpha`,
/// `num_beta` are the numerators of the growth exponents over the coupling
/// gap. An entire pair whose scaled magnitudes stay below `m` at infinity
/// must vanish identically; the exact pair `(A r^alpha, B r^beta)` attains
/// `m`, so the constant cannot be improved. Restricted to `p, q >= 0`.
pub fn liouville_threshold(params: &SystemParams) -> Result<f64> {
    if params.p < 0.0 || params.q < 0.0 {
        return Err(Error::ParameterDomain(format!(
            "vanishing threshold is established for p, q >= 0 only, got ({}, {})",
            params.p, params.q
        )));
    }
    let (a, b) = system_constants(params, ConstantKind::Super)?;
    let (ea, eb) = magnitude_exponents(params);
    Ok(a.powf(ea).min(b.powf(eb)))
}
