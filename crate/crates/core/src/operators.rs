//! Discrete second-order operators on grid fields.
//!
//! Central differences give the Hessian and gradient at nodes with a full
//! 3x3 neighborhood. An operator spec selects one of the extremal operators
//! (acting on the ordered Hessian eigenvalues with ellipticity bounds
//! `[ell_lo, ell_hi]`) or a trace operator, optionally with a spatially
//! varying symmetric coefficient matrix.
//!
//! `degenerate_residual` evaluates the full degenerate equation
//! `|grad u|_delta^p * F(D^2 u, x) - rhs` node by node. The grid solver's
//! final convergence re-check calls this exact code path, so a reported
//! residual always means the same thing as an independent evaluation.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::Field;

/// Symmetric 2x2 coefficient matrix sampled at a physical point.
pub type CoefficientFn = dyn Fn(f64, f64) -> [[f64; 2]; 2] + Send + Sync;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    PucciPlus,
    PucciMinus,
    Trace,
}

/// Uniformly elliptic second-order operator description.
#[derive(Clone)]
pub struct OperatorSpec {
    pub kind: OperatorKind,
    pub ell_lo: f64,
    pub ell_hi: f64,
    coefficient: Option<Arc<CoefficientFn>>,
}

impl std::fmt::Debug for OperatorSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OperatorSpec")
            .field("kind", &self.kind)
            .field("ell_lo", &self.ell_lo)
            .field("ell_hi", &self.ell_hi)
            .field("coefficient", &self.coefficient.is_some())
            .finish()
    }
}

impl OperatorSpec {
    pub fn pucci_plus(ell_lo: f64, ell_hi: f64) -> Result<Self> {
        Self::new(OperatorKind::PucciPlus, ell_lo, ell_hi, None)
    }

    pub fn pucci_minus(ell_lo: f64, ell_hi: f64) -> Result<Self> {
        Self::new(OperatorKind::PucciMinus, ell_lo, ell_hi, None)
    }

    /// Plain trace operator `s * tr(D^2 u)`; unambiguous only when the
    /// ellipticity bounds coincide at `s`.
    pub fn trace(scale: f64) -> Result<Self> {
        Self::new(OperatorKind::Trace, scale, scale, None)
    }

    /// Trace operator with a coefficient matrix, `tr(A(x) D^2 u)`. Sampled
    /// matrices must stay symmetric with eigenvalues in `[ell_lo, ell_hi]`;
    /// solvers spot-check that with [`OperatorSpec::check_coefficient_at`].
    pub fn trace_with_coefficient(
        ell_lo: f64,
        ell_hi: f64,
        coefficient: Arc<CoefficientFn>,
    ) -> Result<Self> {
        Self::new(OperatorKind::Trace, ell_lo, ell_hi, Some(coefficient))
    }

    fn new(
        kind: OperatorKind,
        ell_lo: f64,
        ell_hi: f64,
        coefficient: Option<Arc<CoefficientFn>>,
    ) -> Result<Self> {
        if !(ell_lo.is_finite() && ell_hi.is_finite() && 0.0 < ell_lo && ell_lo <= ell_hi) {
            return Err(Error::Argument(format!(
                "ellipticity bounds must satisfy 0 < ell_lo <= ell_hi, got [{ell_lo}, {ell_hi}]"
            )));
        }
        if coefficient.is_some() && kind != OperatorKind::Trace {
            return Err(Error::Argument(
                "coefficient fields only apply to the trace kind".into(),
            ));
        }
        if kind == OperatorKind::Trace && coefficient.is_none() && ell_lo != ell_hi {
            return Err(Error::Argument(
                "trace kind with distinct ellipticity bounds needs a coefficient field".into(),
            ));
        }
        Ok(OperatorSpec {
            kind,
            ell_lo,
            ell_hi,
            coefficient,
        })
    }

    pub fn has_coefficient(&self) -> bool {
        self.coefficient.is_some()
    }

    /// Verify the coefficient sample at a point: symmetric, eigenvalues
    /// within the declared ellipticity bounds.
    pub fn check_coefficient_at(&self, x: f64, y: f64) -> Result<()> {
        let Some(coef) = &self.coefficient else {
            return Ok(());
        };
        let a = coef(x, y);
        if (a[0][1] - a[1][0]).abs() > 1e-10 * (1.0 + a[0][1].abs()) {
            return Err(Error::Argument(format!(
                "coefficient matrix not symmetric at ({x}, {y})"
            )));
        }
        let (lo, hi) = sym_eigenvalues(a[0][0], 0.5 * (a[0][1] + a[1][0]), a[1][1]);
        let slack = 1e-10 * self.ell_hi;
        if lo < self.ell_lo - slack || hi > self.ell_hi + slack {
            return Err(Error::Argument(format!(
                "coefficient eigenvalues [{lo}, {hi}] at ({x}, {y}) leave [{}, {}]",
                self.ell_lo, self.ell_hi
            )));
        }
        Ok(())
    }

    /// Apply the operator to a Hessian sampled at physical point `(x, y)`.
    pub fn apply(&self, hess: [[f64; 2]; 2], x: f64, y: f64) -> f64 {
        let b = 0.5 * (hess[0][1] + hess[1][0]);
        match self.kind {
            OperatorKind::Trace => {
                if let Some(coef) = &self.coefficient {
                    let a = coef(x, y);
                    a[0][0] * hess[0][0] + (a[0][1] + a[1][0]) * b + a[1][1] * hess[1][1]
                } else {
                    self.ell_hi * (hess[0][0] + hess[1][1])
                }
            }
            OperatorKind::PucciPlus => {
                let (e0, e1) = sym_eigenvalues(hess[0][0], b, hess[1][1]);
                pucci_term(e0, self.ell_hi, self.ell_lo) + pucci_term(e1, self.ell_hi, self.ell_lo)
            }
            OperatorKind::PucciMinus => {
                let (e0, e1) = sym_eigenvalues(hess[0][0], b, hess[1][1]);
                pucci_term(e0, self.ell_lo, self.ell_hi) + pucci_term(e1, self.ell_lo, self.ell_hi)
            }
        }
    }
}

/// Eigenvalues of the symmetric matrix [[a, b], [b, c]], ascending.
#[inline]
fn sym_eigenvalues(a: f64, b: f64, c: f64) -> (f64, f64) {
    let mean = 0.5 * (a + c);
    let disc = (0.25 * (a - c) * (a - c) + b * b).sqrt();
    (mean - disc, mean + disc)
}

#[inline]
fn pucci_term(e: f64, pos_coef: f64, neg_coef: f64) -> f64 {
    if e >= 0.0 {
        pos_coef * e
    } else {
        neg_coef * e
    }
}

fn require_stencil(field: &Field, i: usize, j: usize) -> Result<()> {
    if i == 0 || j == 0 || i + 1 >= field.n() || j + 1 >= field.n() {
        return Err(Error::StencilUnavailable(i, j));
    }
    Ok(())
}

/// Central-difference Hessian at node `(i, j)`; needs the full 3x3
/// neighborhood in-grid.
pub fn hessian(field: &Field, i: usize, j: usize) -> Result<[[f64; 2]; 2]> {
    require_stencil(field, i, j)?;
    let h2 = field.h() * field.h();
    let c = field.value(i, j);
    let uxx = (field.value(i + 1, j) - 2.0 * c + field.value(i - 1, j)) / h2;
    let uyy = (field.value(i, j + 1) - 2.0 * c + field.value(i, j - 1)) / h2;
    let uxy = (field.value(i + 1, j + 1) + field.value(i - 1, j - 1)
        - field.value(i + 1, j - 1)
        - field.value(i - 1, j + 1))
        / (4.0 * h2);
    Ok([[uxx, uxy], [uxy, uyy]])
}

/// Central-difference gradient at node `(i, j)`.
pub fn gradient(field: &Field, i: usize, j: usize) -> Result<(f64, f64)> {
    require_stencil(field, i, j)?;
    let two_h = 2.0 * field.h();
    Ok((
        (field.value(i + 1, j) - field.value(i - 1, j)) / two_h,
        (field.value(i, j + 1) - field.value(i, j - 1)) / two_h,
    ))
}

/// Regularized gradient-magnitude factor `(|g|^2 + delta^2)^(p/2)`.
#[inline]
pub fn degeneracy_factor(gx: f64, gy: f64, p: f64, delta: f64) -> f64 {
    (gx * gx + gy * gy + delta * delta).powf(0.5 * p)
}

/// Residual of the degenerate equation at one interior node:
/// `|grad u|_delta^p * F(D^2 u, x) - rhs`.
pub fn degenerate_residual_at(
    field: &Field,
    spec: &OperatorSpec,
    p: f64,
    delta: f64,
    rhs_value: f64,
    i: usize,
    j: usize,
) -> Result<f64> {
    let hess = hessian(field, i, j)?;
    let (gx, gy) = gradient(field, i, j)?;
    let (x, y) = field.point(i, j);
    let w = degeneracy_factor(gx, gy, p, delta);
    Ok(w * spec.apply(hess, x, y) - rhs_value)
}

/// Residual field of the degenerate equation: computed at strict-interior
/// nodes, zero on the boundary layer.
pub fn degenerate_residual(
    field: &Field,
    spec: &OperatorSpec,
    p: f64,
    delta: f64,
    rhs: &Field,
) -> Result<Field> {
    field.check_same_grid(rhs)?;
    if !delta.is_finite() || delta < 0.0 {
        return Err(Error::Argument(format!(
            "gradient regularization must be nonnegative, got {delta}"
        )));
    }
    if p < 0.0 && delta == 0.0 {
        return Err(Error::Argument(
            "gradient regularization must be positive for singular exponents p < 0".into(),
        ));
    }
    let mut out = Field::disk(field.radius(), field.h())?;
    for (i, j) in field.interior_indices() {
        let r = degenerate_residual_at(field, spec, p, delta, rhs.value(i, j), i, j)?;
        out.set_value(i, j, r);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn random_sym(rng: &mut ChaCha8Rng) -> [[f64; 2]; 2] {
        let a = rng.random_range(-3.0..3.0);
        let b = rng.random_range(-3.0..3.0);
        let c = rng.random_range(-3.0..3.0);
        [[a, b], [b, c]]
    }

    #[test]
    fn identity_hessian_worked_values() {
        // u = (x^2 + y^2)/2 has Hessian I everywhere; quadratics are exact
        // under central differences.
        let f = Field::from_fn(1.0, 0.25, |x, y| 0.5 * (x * x + y * y)).unwrap();
        let h = hessian(&f, 4, 4).unwrap();
        assert_relative_eq!(h[0][0], 1.0, epsilon = 1e-12);
        assert_relative_eq!(h[1][1], 1.0, epsilon = 1e-12);
        assert_relative_eq!(h[0][1], 0.0, epsilon = 1e-12);

        let plus = OperatorSpec::pucci_plus(1.0, 2.0).unwrap();
        let minus = OperatorSpec::pucci_minus(1.0, 2.0).unwrap();
        let tr = OperatorSpec::trace(1.0).unwrap();
        assert_relative_eq!(plus.apply(h, 0.0, 0.0), 4.0, epsilon = 1e-12);
        assert_relative_eq!(minus.apply(h, 0.0, 0.0), 2.0, epsilon = 1e-12);
        assert_relative_eq!(tr.apply(h, 0.0, 0.0), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn saddle_splits_the_extremal_operators() {
        let h = [[2.0, 0.0], [0.0, -2.0]];
        let plus = OperatorSpec::pucci_plus(1.0, 2.0).unwrap();
        let minus = OperatorSpec::pucci_minus(1.0, 2.0).unwrap();
        assert_relative_eq!(plus.apply(h, 0.0, 0.0), 2.0 * 2.0 + 1.0 * (-2.0));
        assert_relative_eq!(minus.apply(h, 0.0, 0.0), 1.0 * 2.0 + 2.0 * (-2.0));
    }

    #[test]
    fn quartic_second_derivative_error_is_two_h_squared() {
        let h = 0.125;
        let f = Field::from_fn(1.0, h, |x, _| x.powi(4)).unwrap();
        // Node at x = 0.5, y = 0: exact u_xx = 12 x^2 = 3.
        let i = 8 + 4;
        let hess = hessian(&f, i, 8).unwrap();
        let err = (hess[0][0] - 3.0).abs();
        assert!(err <= 2.0 * h * h + 1e-10, "error {err}");
        assert_relative_eq!(err, 2.0 * h * h, epsilon = 1e-9);
    }

    #[test]
    fn gradient_is_exact_on_linear_fields() {
        let f = Field::from_fn(1.0, 0.25, |x, y| 3.0 * x - 0.5 * y).unwrap();
        let (gx, gy) = gradient(&f, 3, 5).unwrap();
        assert_relative_eq!(gx, 3.0, epsilon = 1e-12);
        assert_relative_eq!(gy, -0.5, epsilon = 1e-12);
    }

    #[test]
    fn stencil_unavailable_at_grid_edges() {
        let f = Field::disk(1.0, 0.25).unwrap();
        assert!(matches!(
            hessian(&f, 0, 4),
            Err(Error::StencilUnavailable(0, 4))
        ));
        assert!(hessian(&f, 4, 8).is_err());
        assert!(gradient(&f, 8, 8).is_err());
        assert!(hessian(&f, 1, 1).is_ok());
    }

    #[test]
    fn positive_homogeneity_degree_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let specs = [
            OperatorSpec::pucci_plus(0.5, 2.5).unwrap(),
            OperatorSpec::pucci_minus(0.5, 2.5).unwrap(),
            OperatorSpec::trace(1.3).unwrap(),
        ];
        for _ in 0..200 {
            let m = random_sym(&mut rng);
            let t: f64 = rng.random_range(0.0..5.0);
            let tm = [[t * m[0][0], t * m[0][1]], [t * m[1][0], t * m[1][1]]];
            for spec in &specs {
                assert_relative_eq!(
                    spec.apply(tm, 0.1, 0.2),
                    t * spec.apply(m, 0.1, 0.2),
                    epsilon = 1e-12,
                    max_relative = 1e-12
                );
            }
        }
    }

    #[test]
    fn monotone_in_the_matrix_ordering() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let specs = [
            OperatorSpec::pucci_plus(0.5, 2.5).unwrap(),
            OperatorSpec::pucci_minus(0.5, 2.5).unwrap(),
            OperatorSpec::trace(0.7).unwrap(),
        ];
        for _ in 0..200 {
            let m = random_sym(&mut rng);
            // PSD increment g g^T + s I.
            let g0 = rng.random_range(-2.0..2.0);
            let g1 = rng.random_range(-2.0..2.0);
            let s = rng.random_range(0.0..1.0);
            let n = [
                [m[0][0] + g0 * g0 + s, m[0][1] + g0 * g1],
                [m[1][0] + g0 * g1, m[1][1] + g1 * g1 + s],
            ];
            for spec in &specs {
                assert!(spec.apply(n, 0.0, 0.0) >= spec.apply(m, 0.0, 0.0) - 1e-10);
            }
        }
    }

    #[test]
    fn extremal_operators_bracket_and_collapse() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..200 {
            let m = random_sym(&mut rng);
            let plus = OperatorSpec::pucci_plus(0.5, 2.5).unwrap();
            let minus = OperatorSpec::pucci_minus(0.5, 2.5).unwrap();
            assert!(minus.apply(m, 0.0, 0.0) <= plus.apply(m, 0.0, 0.0) + 1e-12);
            // Equal bounds collapse both to the scaled trace.
            let plus1 = OperatorSpec::pucci_plus(1.5, 1.5).unwrap();
            let minus1 = OperatorSpec::pucci_minus(1.5, 1.5).unwrap();
            assert_relative_eq!(
                plus1.apply(m, 0.0, 0.0),
                1.5 * (m[0][0] + m[1][1]),
                epsilon = 1e-12,
                max_relative = 1e-12
            );
            assert_relative_eq!(
                plus1.apply(m, 0.0, 0.0),
                minus1.apply(m, 0.0, 0.0),
                epsilon = 1e-12,
                max_relative = 1e-12
            );
        }
        // Strict split on a definite matrix when the bounds differ.
        let plus = OperatorSpec::pucci_plus(1.0, 2.0).unwrap();
        let minus = OperatorSpec::pucci_minus(1.0, 2.0).unwrap();
        let id = [[1.0, 0.0], [0.0, 1.0]];
        assert!(plus.apply(id, 0.0, 0.0) > minus.apply(id, 0.0, 0.0) + 0.5);
    }

    #[test]
    fn coefficient_trace_matches_hand_computation() {
        let coef = Arc::new(|_x: f64, _y: f64| [[2.0, 0.5], [0.5, 1.0]]);
        let spec = OperatorSpec::trace_with_coefficient(0.5, 2.5, coef).unwrap();
        let hess = [[1.0, 2.0], [2.0, -1.0]];
        // tr(A H) = 2*1 + 2*0.5*2 + 1*(-1) = 3.
        assert_relative_eq!(spec.apply(hess, 0.0, 0.0), 3.0, epsilon = 1e-12);
        assert!(spec.check_coefficient_at(0.3, 0.4).is_ok());
    }

    #[test]
    fn coefficient_validation_catches_bad_matrices() {
        let lopsided = Arc::new(|_: f64, _: f64| [[1.0, 0.4], [0.1, 1.0]]);
        let spec = OperatorSpec::trace_with_coefficient(0.5, 2.0, lopsided).unwrap();
        assert!(spec.check_coefficient_at(0.0, 0.0).is_err());

        let out_of_bounds = Arc::new(|_: f64, _: f64| [[3.0, 0.0], [0.0, 1.0]]);
        let spec = OperatorSpec::trace_with_coefficient(0.5, 2.0, out_of_bounds).unwrap();
        assert!(spec.check_coefficient_at(0.0, 0.0).is_err());
    }

    #[test]
    fn spec_construction_rejects_bad_input() {
        assert!(OperatorSpec::pucci_plus(0.0, 1.0).is_err());
        assert!(OperatorSpec::pucci_plus(2.0, 1.0).is_err());
        assert!(OperatorSpec::pucci_plus(1.0, f64::INFINITY).is_err());
        // Trace with distinct bounds needs a coefficient to be well defined.
        assert!(OperatorSpec::new(OperatorKind::Trace, 1.0, 2.0, None).is_err());
        let coef: Arc<CoefficientFn> = Arc::new(|_, _| [[1.0, 0.0], [0.0, 1.0]]);
        assert!(OperatorSpec::new(OperatorKind::PucciPlus, 1.0, 2.0, Some(coef)).is_err());
    }

    #[test]
    fn residual_vanishes_on_an_exact_balance_up_to_truncation() {
        // u = r^4/256 solves tr(D^2 u) = sqrt(u) in the plane, so the residual
        // is pure truncation error: h^2/12 * (u_xxxx + u_yyyy) = h^2/64.
        let spec = OperatorSpec::trace(1.0).unwrap();
        let mut sups = Vec::new();
        for k in [64usize, 128, 256] {
            let h = 1.0 / k as f64;
            let u = Field::from_fn(1.0, h, |x, y| (x * x + y * y).powi(2) / 256.0).unwrap();
            let rhs = Field::from_fn(1.0, h, |x, y| (x * x + y * y) / 16.0).unwrap();
            let res = degenerate_residual(&u, &spec, 0.0, 0.0, &rhs).unwrap();
            let sup = res.interior_sup_abs();
            assert_relative_eq!(sup, h * h / 64.0, max_relative = 1e-4);
            sups.push(sup);
        }
        assert!(sups[0] / sups[1] >= 3.0);
        assert!(sups[1] / sups[2] >= 3.0);
    }

    #[test]
    fn residual_respects_the_degeneracy_weight() {
        // Linear field: Hessian 0, so residual = -rhs independent of p.
        let u = Field::from_fn(1.0, 0.25, |x, _| 2.0 * x).unwrap();
        let rhs = Field::constant(1.0, 0.25, 3.0).unwrap();
        let spec = OperatorSpec::trace(1.0).unwrap();
        let res = degenerate_residual(&u, &spec, 1.0, 0.01, &rhs).unwrap();
        for (i, j) in res.interior_indices() {
            assert_relative_eq!(res.value(i, j), -3.0, epsilon = 1e-12);
        }
        // Quadratic with p = 1: weight |grad u| scales the operator value.
        let u = Field::from_fn(1.0, 0.25, |x, y| 0.5 * (x * x + y * y)).unwrap();
        let zero = Field::constant(1.0, 0.25, 0.0).unwrap();
        let res = degenerate_residual(&u, &spec, 1.0, 0.0, &zero).unwrap();
        let (x, y) = res.point(6, 4);
        let grad_mag = (x * x + y * y).sqrt();
        assert_relative_eq!(res.value(6, 4), grad_mag * 2.0, epsilon = 1e-10);
    }

    #[test]
    fn residual_boundary_layer_is_zero() {
        let u = Field::from_fn(1.0, 0.25, |x, y| x * y).unwrap();
        let rhs = Field::constant(1.0, 0.25, 1.0).unwrap();
        let spec = OperatorSpec::trace(1.0).unwrap();
        let res = degenerate_residual(&u, &spec, 0.0, 0.0, &rhs).unwrap();
        for i in 0..res.n() {
            for j in 0..res.n() {
                if !res.is_inside(i, j) {
                    assert_eq!(res.value(i, j), 0.0);
                }
            }
        }
    }

    #[test]
    fn residual_argument_validation() {
        let u = Field::disk(1.0, 0.25).unwrap();
        let rhs_wrong = Field::disk(1.0, 0.125).unwrap();
        let spec = OperatorSpec::trace(1.0).unwrap();
        assert!(matches!(
            degenerate_residual(&u, &spec, 0.0, 0.0, &rhs_wrong),
            Err(Error::GridMismatch(_))
        ));
        let rhs = Field::disk(1.0, 0.25).unwrap();
        // Singular exponent requires positive regularization.
        assert!(degenerate_residual(&u, &spec, -0.5, 0.0, &rhs).is_err());
        assert!(degenerate_residual(&u, &spec, -0.5, 0.01, &rhs).is_ok());
        assert!(degenerate_residual(&u, &spec, 0.5, -1.0, &rhs).is_err());
    }
}
