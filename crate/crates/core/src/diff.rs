//! Differentiation engine.
//!
//! Central finite differences with a relative step h = ε·max(1, |xᵢ|) back
//! every calculus operation.  Fields that carry closed-form derivatives are
//! differentiated analytically instead, unless the engine is put in
//! finite-difference mode; the two paths cross-validate each other in the
//! test suites.
//!
//! Stencils refuse to straddle a chart boundary: if the validity margin at
//! the evaluation point is below ten steps, the step is shrunk once and the
//! operation fails with `DomainViolation` if still too close.

use nalgebra::{DMatrix, DVector};

use crate::chart::Point;
use crate::error::{Error, Result};
use crate::fields::{OneForm, ScalarField, Tensor11, TwoForm, VectorField};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Second-order central difference, two stencil nodes.
    Central2,
    /// Fourth-order central difference, four stencil nodes.
    Central4,
}

#[derive(Debug, Clone, Copy)]
pub struct DiffConfig {
    pub scheme: Scheme,
    /// Relative step: h = eps * max(1, |x_i|).
    pub eps: f64,
}

impl DiffConfig {
    pub fn central2() -> Self {
        DiffConfig {
            scheme: Scheme::Central2,
            eps: 1e-6,
        }
    }

    pub fn central4() -> Self {
        DiffConfig {
            scheme: Scheme::Central4,
            eps: 1e-4,
        }
    }
}

impl Default for DiffConfig {
    fn default() -> Self {
        DiffConfig::central2()
    }
}

/// Derivative dispatcher: analytic closures when present and preferred,
/// finite differences otherwise.
#[derive(Debug, Clone, Copy)]
pub struct DiffEngine {
    pub cfg: DiffConfig,
    pub prefer_analytic: bool,
}

impl Default for DiffEngine {
    fn default() -> Self {
        DiffEngine {
            cfg: DiffConfig::default(),
            prefer_analytic: true,
        }
    }
}

impl DiffEngine {
    /// Engine that ignores analytic derivatives (pure finite differences);
    /// the independent oracle mode.
    pub fn finite_difference() -> Self {
        DiffEngine {
            cfg: DiffConfig::default(),
            prefer_analytic: false,
        }
    }

    pub fn with_config(cfg: DiffConfig) -> Self {
        DiffEngine {
            cfg,
            prefer_analytic: true,
        }
    }

    /// ∂f/∂xⁱ of a raw component closure by central differences.
    pub fn fd_partial(&self, g: &dyn Fn(&Point) -> f64, x: &Point, i: usize) -> Result<f64> {
        let scale = x.coord(i).abs().max(1.0);
        let h = self.cfg.eps * scale;
        let margin = x.chart().margin(x.coords());
        let h = if margin <= 10.0 * h {
            // shrink once, then give up
            let h2 = margin / 20.0;
            if h2 <= 1e-12 * scale {
                return Err(Error::DomainViolation(format!(
                    "stencil at {x} too close to the {} boundary (margin {margin:.3e})",
                    x.chart()
                )));
            }
            h2
        } else {
            h
        };

        let eval = |delta: f64| -> Result<f64> {
            let xs = x.shifted(i, delta).map_err(|_| {
                Error::DomainViolation(format!(
                    "stencil node left the {} validity region near {x}",
                    x.chart()
                ))
            })?;
            let v = g(&xs);
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::NonFinite(format!(
                    "field evaluated to {v} at stencil node of {x}"
                )))
            }
        };

        match self.cfg.scheme {
            Scheme::Central2 => Ok((eval(h)? - eval(-h)?) / (2.0 * h)),
            Scheme::Central4 => {
                let f1 = eval(h)?;
                let f2 = eval(2.0 * h)?;
                let fm1 = eval(-h)?;
                let fm2 = eval(-2.0 * h)?;
                Ok((-f2 + 8.0 * f1 - 8.0 * fm1 + fm2) / (12.0 * h))
            }
        }
    }

    pub fn partial_scalar(&self, f: &ScalarField, x: &Point, i: usize) -> Result<f64> {
        x.expect_chart(f.chart())?;
        if self.prefer_analytic {
            if let Some(g) = f.grad_analytic(x) {
                return Ok(g?[i]);
            }
        }
        self.fd_partial(&|y: &Point| f.eval_raw(y), x, i)
    }

    pub fn grad(&self, f: &ScalarField, x: &Point) -> Result<DVector<f64>> {
        x.expect_chart(f.chart())?;
        if self.prefer_analytic {
            if let Some(g) = f.grad_analytic(x) {
                return g;
            }
        }
        let dim = x.dim();
        let mut out = DVector::zeros(dim);
        for i in 0..dim {
            out[i] = self.fd_partial(&|y: &Point| f.eval_raw(y), x, i)?;
        }
        Ok(out)
    }

    /// Jacobian J[(a, b)] = ∂X^a/∂x^b of a vector field.
    pub fn jacobian_vector(&self, xf: &VectorField, x: &Point) -> Result<DMatrix<f64>> {
        x.expect_chart(xf.chart())?;
        if self.prefer_analytic {
            if let Some(j) = xf.jacobian_analytic(x) {
                return j;
            }
        }
        let dim = x.dim();
        let mut out = DMatrix::zeros(dim, dim);
        for b in 0..dim {
            for a in 0..dim {
                out[(a, b)] = self.fd_partial(&|y: &Point| xf.components_raw(y)[a], x, b)?;
            }
        }
        Ok(out)
    }

    /// Jacobian J[(a, b)] = ∂θ_a/∂x^b of a one-form.
    pub fn jacobian_one_form(&self, theta: &OneForm, x: &Point) -> Result<DMatrix<f64>> {
        x.expect_chart(theta.chart())?;
        if self.prefer_analytic {
            if let Some(j) = theta.jacobian_analytic(x) {
                return j;
            }
        }
        let dim = x.dim();
        let mut out = DMatrix::zeros(dim, dim);
        for b in 0..dim {
            for a in 0..dim {
                out[(a, b)] = self.fd_partial(&|y: &Point| theta.components_raw(y)[a], x, b)?;
            }
        }
        Ok(out)
    }

    /// Coordinate partials of a two-form: entry c holds ∂_c ω_{ab}.
    pub fn partials_two_form(&self, w: &TwoForm, x: &Point) -> Result<Vec<DMatrix<f64>>> {
        x.expect_chart(w.chart())?;
        if self.prefer_analytic {
            if let Some(p) = w.partials_analytic(x) {
                return p;
            }
        }
        let dim = x.dim();
        let mut out = Vec::with_capacity(dim);
        for c in 0..dim {
            let mut m = DMatrix::zeros(dim, dim);
            for a in 0..dim {
                for b in 0..dim {
                    m[(a, b)] = self.fd_partial(&|y: &Point| w.components_raw(y)[(a, b)], x, c)?;
                }
            }
            out.push(m);
        }
        Ok(out)
    }

    /// Coordinate partials of a (1,1)-tensor: entry c holds ∂_c T^a_b.
    pub fn partials_tensor(&self, t: &Tensor11, x: &Point) -> Result<Vec<DMatrix<f64>>> {
        x.expect_chart(t.chart())?;
        if self.prefer_analytic {
            if let Some(p) = t.partials_analytic(x) {
                return p;
            }
        }
        let dim = x.dim();
        let mut out = Vec::with_capacity(dim);
        for c in 0..dim {
            let mut m = DMatrix::zeros(dim, dim);
            for a in 0..dim {
                for b in 0..dim {
                    m[(a, b)] = self.fd_partial(&|y: &Point| t.components_raw(y)[(a, b)], x, c)?;
                }
            }
            out.push(m);
        }
        Ok(out)
    }
}

/// Central finite-difference approximation of ∂f/∂xⁱ; the standalone
/// derivative operation (never uses analytic closures).
pub fn partial_derivative(f: &ScalarField, x: &Point, i: usize, cfg: DiffConfig) -> Result<f64> {
    if i >= x.dim() {
        return Err(Error::IndexOutOfRange(i));
    }
    let eng = DiffEngine {
        cfg,
        prefer_analytic: false,
    };
    eng.fd_partial(&|y: &Point| f.eval_raw(y), x, i)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::Chart;

    fn reduced_pt(coords: [f64; 4]) -> Point {
        Point::new(Chart::Reduced, coords.to_vec()).unwrap()
    }

    #[test]
    fn quadratic_derivative_is_sharp() {
        // f = x0^2 at x0 = 3 -> exactly 6 under central differences
        let f = ScalarField::new(Chart::Reduced, |x| x.coord(0) * x.coord(0));
        let x = reduced_pt([3.0, 0.0, 0.0, 0.0]);
        let d = partial_derivative(&f, &x, 0, DiffConfig::central2()).unwrap();
        assert!((d - 6.0).abs() < 1e-8, "d = {d}");
    }

    #[test]
    fn constant_derivative_vanishes() {
        let f = ScalarField::constant(Chart::Reduced, 4.2);
        let x = reduced_pt([1.0, 0.2, 0.3, 0.9]);
        let d = partial_derivative(&f, &x, 2, DiffConfig::central2()).unwrap();
        assert!(d.abs() < 1e-10);
    }

    #[test]
    fn reduced_hamiltonian_radial_derivative() {
        // H = p_r^2/2m + p_phi^2/(2 m r^2) - k/r at (1, 0, 0, 0.9), m = k = 1:
        // dH/dr = -p_phi^2/(m r^3) + k/r^2 = -0.81 + 1 = 0.19
        let f = ScalarField::new(Chart::Reduced, |x| {
            let (r, p_r, p_phi) = (x.coord(0), x.coord(2), x.coord(3));
            p_r * p_r / 2.0 + p_phi * p_phi / (2.0 * r * r) - 1.0 / r
        });
        let x = reduced_pt([1.0, 0.0, 0.0, 0.9]);
        let d = partial_derivative(&f, &x, 0, DiffConfig::central2()).unwrap();
        assert!((d - 0.19).abs() < 1e-8, "d = {d}");
        let d4 = partial_derivative(&f, &x, 0, DiffConfig::central4()).unwrap();
        assert!((d - d4).abs() < 1e-5);
    }

    #[test]
    fn boundary_guard_shrinks_then_fails() {
        let f = ScalarField::new(Chart::Reduced, |x| 1.0 / x.coord(0));
        // margin ~ 5e-6 < 10 h for eps = 1e-6: the step shrinks once and succeeds
        let x = reduced_pt([5e-6, 0.0, 0.0, 0.0]);
        let d = partial_derivative(&f, &x, 0, DiffConfig::central2()).unwrap();
        // shrunken step h = margin/20 leaves a relative error ~ (h/r)^2 = 2.5e-3
        let expect = -1.0 / (5e-6_f64 * 5e-6);
        assert!((d - expect).abs() / expect.abs() < 5e-3, "d = {d}");
        // margin below the shrink floor: refuses
        let x = reduced_pt([5e-13, 0.0, 0.0, 0.0]);
        assert!(matches!(
            partial_derivative(&f, &x, 0, DiffConfig::central2()),
            Err(Error::DomainViolation(_))
        ));
    }

    #[test]
    fn non_finite_field_is_reported() {
        let f = ScalarField::new(Chart::Reduced, |_| f64::NAN);
        let x = reduced_pt([1.0, 0.0, 0.0, 0.0]);
        assert!(matches!(
            partial_derivative(&f, &x, 0, DiffConfig::central2()),
            Err(Error::NonFinite(_))
        ));
    }

    #[test]
    fn engine_prefers_analytic_gradient() {
        // analytic gradient deliberately wrong: the engine must return it
        let f = ScalarField::with_grad(
            Chart::Reduced,
            |x| x.coord(0),
            |_| nalgebra::DVector::from_vec(vec![42.0, 0.0, 0.0, 0.0]),
        );
        let x = reduced_pt([1.0, 0.0, 0.0, 0.0]);
        let eng = DiffEngine::default();
        assert_eq!(eng.partial_scalar(&f, &x, 0).unwrap(), 42.0);
        let fd = DiffEngine::finite_difference();
        assert!((fd.partial_scalar(&f, &x, 0).unwrap() - 1.0).abs() < 1e-9);
    }
}
