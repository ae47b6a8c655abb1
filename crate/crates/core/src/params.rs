//! Model parameters and the exponent algebra they induce.
//!
//! Two problem families share the machinery here. The coupled system takes a
//! pair of gradient-degeneracy exponents `(p, q)` and reaction exponents
//! `(lambda1, lambda2)` in the sublinear regime `lambda1 * lambda2 <
//! (1 + p)(1 + q)`; that inequality is what makes the homogeneity bookkeeping
//! below well posed, and every derived exponent is a rational expression in
//! the four inputs. The single Henon-type equation takes `(p, mu)` with a
//! radial weight exponent `alpha >= 0` and subcritical reaction `mu < 1 + p`.
//!
//! Ellipticity constants `(lambda, big_lambda)` bound the operator between
//! the two extremal Pucci operators; only their ratio and magnitude enter the
//! closed-form constants, so they live here next to the exponents.

use crate::error::{Error, Result};

/// Parameters of the coupled two-field problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    pub p: f64,
    pub q: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    /// Spatial dimension of the domain.
    pub n: usize,
    /// Lower ellipticity constant.
    pub lambda: f64,
    /// Upper ellipticity constant.
    pub big_lambda: f64,
}

impl SystemParams {
    /// Validated constructor. Requires `p, q > -1`, `lambda1, lambda2 >= 0`,
    /// strict sublinearity `lambda1 * lambda2 < (1 + p)(1 + q)`, `n >= 1`,
    /// and `0 < lambda <= big_lambda`.
    pub fn new(
        p: f64,
        q: f64,
        lambda1: f64,
        lambda2: f64,
        n: usize,
        lambda: f64,
        big_lambda: f64,
    ) -> Result<Self> {
        for (name, v) in [
            ("p", p),
            ("q", q),
            ("lambda1", lambda1),
            ("lambda2", lambda2),
            ("lambda", lambda),
            ("big_lambda", big_lambda),
        ] {
            if !v.is_finite() {
                return Err(Error::ParameterDomain(format!("{name} must be finite")));
            }
        }
        if p <= -1.0 || q <= -1.0 {
            return Err(Error::ParameterDomain(format!(
                "gradient exponents must exceed -1, got p = {p}, q = {q}"
            )));
        }
        if lambda1 < 0.0 || lambda2 < 0.0 {
            return Err(Error::ParameterDomain(format!(
                "reaction exponents must be nonnegative, got lambda1 = {lambda1}, lambda2 = {lambda2}"
            )));
        }
        if lambda1 * lambda2 >= (1.0 + p) * (1.0 + q) {
            return Err(Error::ParameterDomain(format!(
                "need lambda1 * lambda2 < (1 + p)(1 + q): {} >= {}",
                lambda1 * lambda2,
                (1.0 + p) * (1.0 + q)
            )));
        }
        if n == 0 {
            return Err(Error::ParameterDomain("dimension must be at least 1".into()));
        }
        if lambda <= 0.0 || big_lambda < lambda {
            return Err(Error::ParameterDomain(format!(
                "ellipticity requires 0 < lambda <= big_lambda, got ({lambda}, {big_lambda})"
            )));
        }
        Ok(SystemParams {
            p,
            q,
            lambda1,
            lambda2,
            n,
            lambda,
            big_lambda,
        })
    }

    /// Uniformly elliptic isotropic defaults: `lambda = big_lambda = 1`.
    pub fn laplacian(p: f64, q: f64, lambda1: f64, lambda2: f64, n: usize) -> Result<Self> {
        Self::new(p, q, lambda1, lambda2, n, 1.0, 1.0)
    }

    /// `(1 + p)(1 + q) - lambda1 * lambda2`, the positive denominator of the
    /// exponent algebra.
    pub fn coupling_gap(&self) -> f64 {
        (1.0 + self.p) * (1.0 + self.q) - self.lambda1 * self.lambda2
    }

    /// Non-obvious but admissible corners of the parameter domain, as
    /// human-readable notes. Empty for generic parameters.
    pub fn warnings(&self) -> Vec<String> {
        let mut notes = Vec::new();
        if self.lambda1 == 0.0 && self.lambda2 == 0.0 {
            notes.push("both reactions are state-independent (pure source terms)".into());
        }
        if self.p == 0.0 && self.q == 0.0 {
            notes.push("no gradient degeneracy; the operators are uniformly elliptic".into());
        }
        if self.coupling_gap() < 0.05 * (1.0 + self.p) * (1.0 + self.q) {
            notes.push(format!(
                "coupling gap {:.3e} is small; derived exponents are large and solves stiffen",
                self.coupling_gap()
            ));
        }
        notes
    }
}

/// Parameters of the single Henon-type equation with one weight term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HenonParams {
    pub p: f64,
    /// Reaction exponent, `0 <= mu <= 1 + p`. The critical case `mu = 1 + p`
    /// is admitted for grid runs but has no algebraic growth profile.
    pub mu: f64,
    /// Radial weight exponent in `|x|^alpha`, `alpha >= 0`.
    pub alpha: f64,
    pub n: usize,
    pub lambda: f64,
    pub big_lambda: f64,
}

impl HenonParams {
    pub fn new(p: f64, mu: f64, alpha: f64, n: usize, lambda: f64, big_lambda: f64) -> Result<Self> {
        for (name, v) in [
            ("p", p),
            ("mu", mu),
            ("alpha", alpha),
            ("lambda", lambda),
            ("big_lambda", big_lambda),
        ] {
            if !v.is_finite() {
                return Err(Error::ParameterDomain(format!("{name} must be finite")));
            }
        }
        if p <= -1.0 {
            return Err(Error::ParameterDomain(format!(
                "gradient exponent must exceed -1, got p = {p}"
            )));
        }
        if mu < 0.0 || mu > 1.0 + p {
            return Err(Error::ParameterDomain(format!(
                "need 0 <= mu <= 1 + p, got mu = {mu} with p = {p}"
            )));
        }
        if alpha < 0.0 {
            return Err(Error::ParameterDomain(format!(
                "weight exponent must be nonnegative, got alpha = {alpha}"
            )));
        }
        if n == 0 {
            return Err(Error::ParameterDomain("dimension must be at least 1".into()));
        }
        if lambda <= 0.0 || big_lambda < lambda {
            return Err(Error::ParameterDomain(format!(
                "ellipticity requires 0 < lambda <= big_lambda, got ({lambda}, {big_lambda})"
            )));
        }
        Ok(HenonParams {
            p,
            mu,
            alpha,
            n,
            lambda,
            big_lambda,
        })
    }

    pub fn laplacian(p: f64, mu: f64, alpha: f64, n: usize) -> Result<Self> {
        Self::new(p, mu, alpha, n, 1.0, 1.0)
    }

    pub fn warnings(&self) -> Vec<String> {
        let mut notes = Vec::new();
        if self.alpha == 0.0 {
            notes.push("weight exponent is zero; the weight is identically 1".into());
        }
        if self.mu == 1.0 + self.p {
            notes.push(
                "critical reaction mu = 1 + p: growth exponents are undefined and \
                 compactly supported profiles degenerate"
                    .into(),
            );
        }
        notes
    }
}

/// The homogeneity exponents of the coupled system, all rational in the
/// inputs with common denominator `coupling_gap`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentBundle {
    /// Growth exponent of the first field near a free boundary point.
    pub alpha: f64,
    /// Growth exponent of the second field.
    pub beta: f64,
    /// Scaling exponent of the pair magnitude, `2 / coupling_gap`.
    pub kappa: f64,
    /// Growth exponent of the first field's gradient, `alpha - 1`.
    pub grad_u: f64,
    /// Growth exponent of the second field's gradient, `beta - 1`.
    pub grad_v: f64,
}

/// Derived growth exponents of the coupled system.
///
/// With `d = (1 + p)(1 + q) - lambda1 * lambda2 > 0`:
///
/// ```text
/// alpha = [(1 + q)(2 + p) + lambda1 (2 + q)] / d
/// beta  = [(1 + p)(2 + q) + lambda2 (2 + p)] / d
/// kappa = 2 / d
/// ```
///
/// Both `alpha` and `beta` exceed 1 (so the gradient exponents are positive)
/// but need not exceed 2. The pair satisfies the closure identities
/// `alpha (1 + p) - (2 + p) = lambda1 * beta` and
/// `beta (1 + q) - (2 + q) = lambda2 * alpha`, which the solver and residual
/// checks rely on.
pub fn system_exponents(params: &SystemParams) -> ExponentBundle {
    let d = params.coupling_gap();
    let alpha = ((1.0 + params.q) * (2.0 + params.p) + params.lambda1 * (2.0 + params.q)) / d;
    let beta = ((1.0 + params.p) * (2.0 + params.q) + params.lambda2 * (2.0 + params.p)) / d;
    ExponentBundle {
        alpha,
        beta,
        kappa: 2.0 / d,
        grad_u: alpha - 1.0,
        grad_v: beta - 1.0,
    }
}

/// Growth exponents `(beta_h, grad_h)` of the Henon-type equation:
/// `beta_h = (2 + p + alpha) / (1 + p - mu)` and `grad_h = beta_h - 1`.
///
/// Errors in the critical case `mu >= 1 + p`, where no algebraic rate exists.
pub fn henon_exponents(params: &HenonParams) -> Result<(f64, f64)> {
    let gap = 1.0 + params.p - params.mu;
    if gap <= 0.0 {
        return Err(Error::ParameterDomain(format!(
            "growth exponents need mu < 1 + p, got mu = {}, p = {}",
            params.mu, params.p
        )));
    }
    let beta_h = (2.0 + params.p + params.alpha) / gap;
    Ok((beta_h, beta_h - 1.0))
}

/// Exponents `(2/num_alpha, 2/num_beta)` turning each field into a quantity
/// that scales like `r^kappa` along the exact growth profiles, where
/// `num_alpha = (1 + q)(2 + p) + lambda1 (2 + q)` and
/// `num_beta = (1 + p)(2 + q) + lambda2 (2 + p)` are the numerators of
/// `alpha` and `beta` over the coupling gap (so `2/num_alpha = kappa/alpha`).
pub fn magnitude_exponents(params: &SystemParams) -> (f64, f64) {
    let num_a = (1.0 + params.q) * (2.0 + params.p) + params.lambda1 * (2.0 + params.q);
    let num_b = (1.0 + params.p) * (2.0 + params.q) + params.lambda2 * (2.0 + params.p);
    (2.0 / num_a, 2.0 / num_b)
}

/// Sharpness indicator for a multi-term right-hand side
/// `sum_i c_i |x|^{alpha_i} u_+^{mu_i} + sum_j d_j |x|^{l_j} |grad u|^{p}`:
/// the smallest per-term growth exponent
///
/// ```text
/// min( min_i (2 + p + alpha_i) / (1 + p - mu_i),  min_j (2 + l_j) )
/// ```
///
/// where gradient-weight terms contribute `2 + l_j` directly. Terms with
/// `mu_i >= 1 + p` contribute `+inf` (they never limit the growth rate).
/// Errors only when both lists are empty.
pub fn multi_term_regularity(terms: &[(f64, f64)], g_terms: &[f64], p: f64) -> Result<f64> {
    if terms.is_empty() && g_terms.is_empty() {
        return Err(Error::Argument(
            "regularity exponent needs at least one right-hand-side term".into(),
        ));
    }
    if p <= -1.0 {
        return Err(Error::ParameterDomain(format!(
            "gradient exponent must exceed -1, got p = {p}"
        )));
    }
    let mut best = f64::INFINITY;
    for &(alpha_i, mu_i) in terms {
        if alpha_i < 0.0 || mu_i < 0.0 {
            return Err(Error::ParameterDomain(format!(
                "term exponents must be nonnegative, got ({alpha_i}, {mu_i})"
            )));
        }
        let gap = 1.0 + p - mu_i;
        if gap > 0.0 {
            best = best.min((2.0 + p + alpha_i) / gap);
        }
    }
    for &l_j in g_terms {
        if l_j < 0.0 {
            return Err(Error::ParameterDomain(format!(
                "gradient-term weight exponent must be nonnegative, got {l_j}"
            )));
        }
        best = best.min(2.0 + l_j);
    }
    if best.is_infinite() {
        return Err(Error::ParameterDomain(
            "every term is critical or supercritical; no finite growth exponent".into(),
        ));
    }
    Ok(best)
}
