//! Sparse multivariate polynomials with exact arithmetic on coefficients.
//!
//! Used as probe fields for the bracket-axiom checks: polynomials are closed
//! under products and partial derivatives, so nested brackets can be formed
//! without stacking finite-difference noise.

use nalgebra::DVector;
use rand::Rng;

use crate::chart::{Chart, Point};
use crate::fields::ScalarField;

pub const MAX_VARS: usize = 6;

/// Terms are (coefficient, exponent tuple).
#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    nvars: usize,
    terms: Vec<(f64, [u8; MAX_VARS])>,
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        assert!(nvars <= MAX_VARS);
        Poly {
            nvars,
            terms: Vec::new(),
        }
    }

    pub fn constant(nvars: usize, c: f64) -> Self {
        let mut p = Poly::zero(nvars);
        if c != 0.0 {
            p.terms.push((c, [0; MAX_VARS]));
        }
        p
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        assert!(i < nvars);
        let mut e = [0u8; MAX_VARS];
        e[i] = 1;
        Poly {
            nvars,
            terms: vec![(1.0, e)],
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    fn push_term(&mut self, c: f64, e: [u8; MAX_VARS]) {
        if c == 0.0 {
            return;
        }
        if let Some(t) = self.terms.iter_mut().find(|t| t.1 == e) {
            t.0 += c;
        } else {
            self.terms.push((c, e));
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        assert_eq!(self.nvars, other.nvars);
        let mut out = self.clone();
        for &(c, e) in &other.terms {
            out.push_term(c, e);
        }
        out
    }

    pub fn scale(&self, s: f64) -> Poly {
        Poly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|&(c, e)| (c * s, e)).collect(),
        }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        assert_eq!(self.nvars, other.nvars);
        let mut out = Poly::zero(self.nvars);
        for &(ca, ea) in &self.terms {
            for &(cb, eb) in &other.terms {
                let mut e = [0u8; MAX_VARS];
                for i in 0..self.nvars {
                    e[i] = ea[i] + eb[i];
                }
                out.push_term(ca * cb, e);
            }
        }
        out
    }

    pub fn partial(&self, i: usize) -> Poly {
        assert!(i < self.nvars);
        let mut out = Poly::zero(self.nvars);
        for &(c, e) in &self.terms {
            if e[i] > 0 {
                let mut e2 = e;
                e2[i] -= 1;
                out.push_term(c * f64::from(e[i]), e2);
            }
        }
        out
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for &(c, e) in &self.terms {
            let mut t = c;
            for i in 0..self.nvars {
                for _ in 0..e[i] {
                    t *= x[i];
                }
            }
            acc += t;
        }
        acc
    }

    /// Random polynomial of total degree at most `max_degree`, with a handful
    /// of terms and coefficients in (-1, 1).
    pub fn random<R: Rng>(rng: &mut R, nvars: usize, max_degree: u8, n_terms: usize) -> Poly {
        let mut p = Poly::zero(nvars);
        for _ in 0..n_terms {
            let c: f64 = rng.gen_range(-1.0..1.0);
            let mut e = [0u8; MAX_VARS];
            let mut budget = max_degree;
            for slot in e.iter_mut().take(nvars) {
                if budget == 0 {
                    break;
                }
                let d = rng.gen_range(0..=budget);
                *slot = d;
                budget -= d;
            }
            p.push_term(c, e);
        }
        p
    }

    /// Wrap as a scalar field with the exact gradient.
    pub fn into_field(self, chart: Chart) -> ScalarField {
        assert_eq!(self.nvars, chart.dim());
        let grads: Vec<Poly> = (0..self.nvars).map(|i| self.partial(i)).collect();
        let body = self.clone();
        ScalarField::with_grad(
            chart,
            move |x: &Point| body.eval(x.coords()),
            move |x: &Point| {
                DVector::from_iterator(grads.len(), grads.iter().map(|g| g.eval(x.coords())))
            },
        )
    }
}
