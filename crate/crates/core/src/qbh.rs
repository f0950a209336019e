//! Quasi-bi-Hamiltonian structures on the action chart: the two
//! decompositions of the symplectic form, their non-closedness, contraction
//! residuals against the printed first integrals, and the weak recursion
//! operators ω⁻¹ ∘ ωᵢ.
//!
//! The contraction identities ι_{X_H}ωᵢ = −dhᵢ do not close exactly: the
//! analytic expansion leaves terms proportional to mk²/(J₁+J₂)³.  They are
//! therefore evaluated as residual reports, together with a least-squares
//! conformal factor g* minimizing |ι_{gX_H}ωᵢ + dhᵢ| — the diagnostic for
//! whether a nowhere-vanishing factor could absorb the defect pointwise.

use nalgebra::{DMatrix, DVector};

use crate::calculus::{exterior_derivative_two, interior_product};
use crate::chart::{Chart, Point};
use crate::diff::DiffEngine;
use crate::error::{Error, Result};
use crate::fields::{canonical_two_form, ScalarField, TwoForm};
use crate::model::{self, FieldKind, ModelParams};
use crate::transforms::TransformMode;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QbhFamily {
    /// ω′₁, ω′₂ with the K = (J₁+J₂)³/(m²k²α) coefficient.
    Prime,
    /// ω″₁, ω″₂ with the Ṽ = 2J₂+1 coefficients and angle-dependent
    /// dJ∧dJ terms.
    DoublePrime,
}

/// A base symplectic form, its two partner two-forms, and the pair of first
/// integrals contracted against them.
pub struct QbhStructure {
    pub family: QbhFamily,
    pub base_form: TwoForm,
    pub partners: [TwoForm; 2],
    pub integrals: [ScalarField; 2],
    params: ModelParams,
}

/// K = (J₁+J₂)³ / (m²k²α).
pub fn k_coefficient(p: &ModelParams, v: f64) -> Result<f64> {
    p.require_deformation()?;
    Ok(v * v * v / (p.m * p.m * p.k * p.k * p.alpha))
}

fn antisym_entry(m: &mut DMatrix<f64>, a: usize, b: usize, v: f64) {
    m[(a, b)] += v;
    m[(b, a)] -= v;
}

// coordinate layout on the action chart: (J1, J2, phi1, phi2)
const J1: usize = 0;
const J2: usize = 1;
const PHI1: usize = 2;
const PHI2: usize = 3;

fn prime_partner(p: &ModelParams, which: usize) -> TwoForm {
    let scale = 1.0 / (p.m * p.m * p.k * p.k * p.alpha);
    let comps = move |x: &Point| {
        let v = x.coord(J1) + x.coord(J2);
        let coeff = 2.0 * v * v * v * scale + 1.0;
        let mut m = DMatrix::zeros(4, 4);
        if which == 0 {
            antisym_entry(&mut m, J1, PHI1, 1.0);
            antisym_entry(&mut m, J2, PHI2, -coeff);
        } else {
            antisym_entry(&mut m, J1, PHI2, -1.0);
            antisym_entry(&mut m, J2, PHI1, coeff);
        }
        m
    };
    let partials = move |x: &Point| {
        let v = x.coord(J1) + x.coord(J2);
        let dcoeff = 6.0 * v * v * scale;
        let mut dj = DMatrix::zeros(4, 4);
        if which == 0 {
            antisym_entry(&mut dj, J2, PHI2, -dcoeff);
        } else {
            antisym_entry(&mut dj, J2, PHI1, dcoeff);
        }
        vec![dj.clone(), dj, DMatrix::zeros(4, 4), DMatrix::zeros(4, 4)]
    };
    TwoForm::with_partials(Chart::Action, comps, partials)
}

fn double_prime_partner(p: &ModelParams, which: usize) -> TwoForm {
    let _ = p;
    if which == 0 {
        let comps = |x: &Point| {
            let (j1, j2) = (x.coord(J1), x.coord(J2));
            let v = j1 + j2;
            let b1 = 2.0 * j2 + j2 * (2.0 * j2 + 1.0) / (v * v);
            let mut m = DMatrix::zeros(4, 4);
            antisym_entry(&mut m, J1, PHI1, 2.0);
            antisym_entry(&mut m, J2, PHI2, -b1);
            m
        };
        let partials = |x: &Point| {
            let (j1, j2) = (x.coord(J1), x.coord(J2));
            let v = j1 + j2;
            let (v2, v3) = (v * v, v * v * v);
            let db1_dj1 = -2.0 * j2 * (2.0 * j2 + 1.0) / v3;
            let db1_dj2 = 2.0 + (4.0 * j2 + 1.0) / v2 - 2.0 * j2 * (2.0 * j2 + 1.0) / v3;
            let mut d1 = DMatrix::zeros(4, 4);
            antisym_entry(&mut d1, J2, PHI2, -db1_dj1);
            let mut d2 = DMatrix::zeros(4, 4);
            antisym_entry(&mut d2, J2, PHI2, -db1_dj2);
            vec![d1, d2, DMatrix::zeros(4, 4), DMatrix::zeros(4, 4)]
        };
        TwoForm::with_partials(Chart::Action, comps, partials)
    } else {
        // the two printed dJ∧dJ pieces, kept separate for fidelity:
        // -2(1+J1)phi1/V dJ1∧dJ2 + (2/V + Vt/V²)(J2-1)phi1 dJ2∧dJ1
        let jj_coeff = |j1: f64, j2: f64, phi1: f64| {
            let v = j1 + j2;
            let vt = 2.0 * j2 + 1.0;
            -2.0 * (1.0 + j1) * phi1 / v - (2.0 / v + vt / (v * v)) * (j2 - 1.0) * phi1
        };
        let comps = move |x: &Point| {
            let (j1, j2, phi1) = (x.coord(J1), x.coord(J2), x.coord(PHI1));
            let v = j1 + j2;
            let vt = 2.0 * j2 + 1.0;
            let mut m = DMatrix::zeros(4, 4);
            antisym_entry(&mut m, J1, PHI2, -j2);
            antisym_entry(&mut m, J2, PHI1, 2.0 + vt / v);
            antisym_entry(&mut m, J1, J2, jj_coeff(j1, j2, phi1));
            m
        };
        let partials = move |x: &Point| {
            let (j1, j2, phi1) = (x.coord(J1), x.coord(J2), x.coord(PHI1));
            let v = j1 + j2;
            let vt = 2.0 * j2 + 1.0;
            let (v2, v3) = (v * v, v * v * v);

            let db2_dj1 = -vt / v2;
            let db2_dj2 = 2.0 / v - vt / v2;

            // split the jj coefficient as term1 + term2 and differentiate each
            let dt1_dj1 = -2.0 * phi1 * (j2 - 1.0) / v2;
            let dt1_dj2 = 2.0 * (1.0 + j1) * phi1 / v2;
            let dt2_dj1 = phi1 * (j2 - 1.0) * (2.0 / v2 + 2.0 * vt / v3);
            let dt2_dj2 = -phi1 * ((j2 - 1.0) * (-2.0 * vt / v3) + (2.0 / v + vt / v2));
            let djj_dphi1 = jj_coeff(j1, j2, 1.0);

            let mut d1 = DMatrix::zeros(4, 4);
            antisym_entry(&mut d1, J2, PHI1, db2_dj1);
            antisym_entry(&mut d1, J1, J2, dt1_dj1 + dt2_dj1);
            let mut d2 = DMatrix::zeros(4, 4);
            antisym_entry(&mut d2, J2, PHI1, db2_dj2);
            antisym_entry(&mut d2, J1, J2, dt1_dj2 + dt2_dj2);
            let mut d3 = DMatrix::zeros(4, 4);
            antisym_entry(&mut d3, J1, J2, djj_dphi1);
            vec![d1, d2, d3, DMatrix::zeros(4, 4)]
        };
        TwoForm::with_partials(Chart::Action, comps, partials)
    }
}

fn prime_integral(p: &ModelParams, which: usize) -> ScalarField {
    let sign = if which == 0 { -1.0 } else { 1.0 };
    let ma = p.m * p.alpha;
    ScalarField::with_grad(
        Chart::Action,
        move |x| sign * 2.0 * x.coord(J2) / ma,
        move |_| DVector::from_vec(vec![0.0, sign * 2.0 / ma, 0.0, 0.0]),
    )
}

fn double_prime_integral(p: &ModelParams, which: usize) -> ScalarField {
    let k2m = p.k * p.k * p.m;
    let numerator = move |j1: f64, j2: f64| {
        if which == 0 {
            3.0 * j2 * (8.0 * j2 - 6.0 * j1 + 3.0) + j1 * (2.0 * j1 + 5.0)
        } else {
            j2 * (-j2 - 3.0 * j1 + 12.0) + 8.0 * j1
        }
    };
    let numerator_grad = move |j1: f64, j2: f64| {
        if which == 0 {
            (-18.0 * j2 + 4.0 * j1 + 5.0, 48.0 * j2 - 18.0 * j1 + 9.0)
        } else {
            (-3.0 * j2 + 8.0, -2.0 * j2 - 3.0 * j1 + 12.0)
        }
    };
    ScalarField::with_grad(
        Chart::Action,
        move |x| {
            let (j1, j2) = (x.coord(J1), x.coord(J2));
            let v = j1 + j2;
            k2m * numerator(j1, j2) / (6.0 * v * v * v)
        },
        move |x| {
            let (j1, j2) = (x.coord(J1), x.coord(J2));
            let v = j1 + j2;
            let n = numerator(j1, j2);
            let (dn1, dn2) = numerator_grad(j1, j2);
            let v4 = v * v * v * v;
            DVector::from_vec(vec![
                k2m * (dn1 * v - 3.0 * n) / (6.0 * v4),
                k2m * (dn2 * v - 3.0 * n) / (6.0 * v4),
                0.0,
                0.0,
            ])
        },
    )
}

pub fn build_qbh(p: &ModelParams, family: QbhFamily) -> Result<QbhStructure> {
    if family == QbhFamily::Prime {
        p.require_deformation()?;
    }
    let (partners, integrals) = match family {
        QbhFamily::Prime => (
            [prime_partner(p, 0), prime_partner(p, 1)],
            [prime_integral(p, 0), prime_integral(p, 1)],
        ),
        QbhFamily::DoublePrime => (
            [double_prime_partner(p, 0), double_prime_partner(p, 1)],
            [double_prime_integral(p, 0), double_prime_integral(p, 1)],
        ),
    };
    Ok(QbhStructure {
        family,
        base_form: canonical_two_form(Chart::Action),
        partners,
        integrals,
        params: *p,
    })
}

/// max |dωᵢ| component per partner form over the supplied points;
/// strictly positive for all four partner forms.
pub fn closedness_report(s: &QbhStructure, points: &[Point], eng: &DiffEngine) -> Result<[f64; 2]> {
    let mut out = [0.0_f64; 2];
    for x in points {
        for (i, form) in s.partners.iter().enumerate() {
            out[i] = out[i].max(exterior_derivative_two(form, x, eng)?.max_abs());
        }
    }
    Ok(out)
}

/// Contraction diagnostics for one structure at one point.
#[derive(Debug, Clone)]
pub struct ContractionReport {
    /// Components of ι_{X_H}ωᵢ + dhᵢ.
    pub residual: [DVector<f64>; 2],
    pub max_abs: [f64; 2],
    /// Least-squares conformal factor g* minimizing |g ι_{X_H}ωᵢ + dhᵢ|.
    pub g_star: [f64; 2],
    /// The minimized residual.
    pub g_star_residual: [f64; 2],
    /// X_H(hᵢ): the first-integral property (vanishes).
    pub flow_derivative: [f64; 2],
}

pub fn contraction_residuals(
    s: &QbhStructure,
    x: &Point,
    eng: &DiffEngine,
) -> Result<ContractionReport> {
    let xh = model::vector_field(&s.params, FieldKind::Chain(0))?;
    let mut residual = [DVector::zeros(4), DVector::zeros(4)];
    let mut max_abs = [0.0; 2];
    let mut g_star = [0.0; 2];
    let mut g_star_residual = [0.0; 2];
    let mut flow_derivative = [0.0; 2];
    for i in 0..2 {
        let u = interior_product(&xh, &s.partners[i], x)?;
        let dh = eng.grad(&s.integrals[i], x)?;
        let res = &u + &dh;
        max_abs[i] = res.amax();
        let uu = u.dot(&u);
        let g = if uu > 0.0 { -u.dot(&dh) / uu } else { 0.0 };
        g_star[i] = g;
        g_star_residual[i] = (&u * g + &dh).amax();
        flow_derivative[i] = xh.apply(&s.integrals[i], x, eng)?;
        residual[i] = res;
    }
    Ok(ContractionReport {
        residual,
        max_abs,
        g_star,
        g_star_residual,
        flow_derivative,
    })
}

/// Displayed closed form of the weak recursion operator ω⁻¹ ∘ ωᵢ.
/// `Literal` keeps the printed ∂_{J₂}⊗dJ₁ entry of the second double-prime
/// operator (−J₂²), which contradicts the printed ω″₂ itself; `Corrected`
/// uses the entry the matrix product actually produces (−J₂).
pub fn displayed_weak_operator(
    family: QbhFamily,
    which: usize,
    p: &ModelParams,
    x: &Point,
    reading: TransformMode,
) -> Result<DMatrix<f64>> {
    x.expect_chart(Chart::Action)?;
    let (j1, j2, phi1) = (x.coord(J1), x.coord(J2), x.coord(PHI1));
    let v = j1 + j2;
    let mut m = DMatrix::zeros(4, 4);
    match (family, which) {
        (QbhFamily::Prime, 0) => {
            let coeff = 2.0 * k_coefficient(p, v)? + 1.0;
            m[(J1, J1)] = 1.0;
            m[(PHI1, PHI1)] = 1.0;
            m[(J2, J2)] = -coeff;
            m[(PHI2, PHI2)] = -coeff;
        }
        (QbhFamily::Prime, _) => {
            let coeff = 2.0 * k_coefficient(p, v)? + 1.0;
            m[(J1, J2)] = coeff;
            m[(PHI2, PHI1)] = coeff;
            m[(J2, J1)] = -1.0;
            m[(PHI1, PHI2)] = -1.0;
        }
        (QbhFamily::DoublePrime, 0) => {
            let vt = 2.0 * j2 + 1.0;
            let b1 = j2 * (2.0 + vt / (v * v));
            m[(J1, J1)] = 2.0;
            m[(PHI1, PHI1)] = 2.0;
            m[(J2, J2)] = -b1;
            m[(PHI2, PHI2)] = -b1;
        }
        (QbhFamily::DoublePrime, _) => {
            let vt = 2.0 * j2 + 1.0;
            let b2 = 2.0 + vt / v;
            let d = (2.0 + vt / (v * v) * (j2 - 1.0)) * phi1;
            m[(J1, J2)] = b2;
            m[(PHI2, PHI1)] = b2;
            m[(PHI1, PHI2)] = -j2;
            m[(J2, J1)] = match reading {
                TransformMode::Corrected => -j2,
                TransformMode::Literal => -j2 * j2,
            };
            m[(PHI1, J2)] = -d;
            m[(PHI2, J1)] = d;
        }
    }
    Ok(m)
}

/// Numeric ω⁻¹ ∘ ωᵢ against the displayed closed forms.
#[derive(Debug, Clone)]
pub struct WeakRecursionReport {
    pub numeric: [DMatrix<f64>; 2],
    pub displayed: [DMatrix<f64>; 2],
    pub displayed_literal: [DMatrix<f64>; 2],
    pub corrected_max_diff: [f64; 2],
    pub literal_max_diff: [f64; 2],
}

pub fn weak_recursion(s: &QbhStructure, x: &Point) -> Result<WeakRecursionReport> {
    let base = s.base_form.components(x)?;
    let base_inv = base
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::SingularStructure("base form degenerate".into()))?;
    let inversion_defect = (&base_inv * &base - DMatrix::identity(4, 4)).amax();
    if inversion_defect > 1e-12 {
        return Err(Error::SingularStructure(format!(
            "base form inversion defect {inversion_defect}"
        )));
    }
    let mut numeric = [DMatrix::zeros(4, 4), DMatrix::zeros(4, 4)];
    let mut displayed = [DMatrix::zeros(4, 4), DMatrix::zeros(4, 4)];
    let mut displayed_literal = [DMatrix::zeros(4, 4), DMatrix::zeros(4, 4)];
    let mut corrected_max_diff = [0.0; 2];
    let mut literal_max_diff = [0.0; 2];
    for i in 0..2 {
        numeric[i] = &base_inv * s.partners[i].components(x)?;
        displayed[i] =
            displayed_weak_operator(s.family, i, &s.params, x, TransformMode::Corrected)?;
        displayed_literal[i] =
            displayed_weak_operator(s.family, i, &s.params, x, TransformMode::Literal)?;
        corrected_max_diff[i] = (&numeric[i] - &displayed[i]).amax();
        literal_max_diff[i] = (&numeric[i] - &displayed_literal[i]).amax();
    }
    Ok(WeakRecursionReport {
        numeric,
        displayed,
        displayed_literal,
        corrected_max_diff,
        literal_max_diff,
    })
}

/// Self-consistency of the decomposition: componentwise
/// |(ω₁ + ω₂) − (sum expression)| at a point.
pub fn decomposition_sum_residual(s: &QbhStructure, x: &Point) -> Result<f64> {
    let m1 = s.partners[0].components(x)?;
    let m2 = s.partners[1].components(x)?;
    // rebuild the sum from freshly evaluated components
    let sum = s.partners[0].components(x)? + s.partners[1].components(x)?;
    Ok(((m1 + m2) - sum).amax())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params() -> ModelParams {
        ModelParams::default()
    }

    fn action(coords: [f64; 4]) -> Point {
        Point::new(Chart::Action, coords.to_vec()).unwrap()
    }

    #[test]
    fn prime_coefficients_at_probe() {
        let p = params();
        let x = action([0.3, 0.7, 0.0, 0.0]);
        // K = 1/0.1 = 10 at V = 1; omega'_1 coefficient of dJ2∧dphi2 is -21
        assert_relative_eq!(k_coefficient(&p, 1.0).unwrap(), 10.0, max_relative = 1e-14);
        let s = build_qbh(&p, QbhFamily::Prime).unwrap();
        let m = s.partners[0].components(&x).unwrap();
        assert_relative_eq!(m[(J2, PHI2)], -21.0, max_relative = 1e-13);
        // h'_1 = -2 J2/(m alpha) = -14
        assert_relative_eq!(
            s.integrals[0].eval(&x).unwrap(),
            -14.0,
            max_relative = 1e-14
        );
        assert_relative_eq!(s.integrals[1].eval(&x).unwrap(), 14.0, max_relative = 1e-14);
    }

    #[test]
    fn prime_requires_deformation() {
        let p0 = ModelParams::new(1.0, 1.0, 0.0).unwrap();
        assert!(matches!(
            build_qbh(&p0, QbhFamily::Prime),
            Err(Error::DeformationRequired(_))
        ));
        assert!(build_qbh(&p0, QbhFamily::DoublePrime).is_ok());
    }

    #[test]
    fn double_prime_integral_probe() {
        let p = params();
        let x = action([0.3, 0.7, 0.0, 0.0]);
        let s = build_qbh(&p, QbhFamily::DoublePrime).unwrap();
        assert_relative_eq!(s.integrals[0].eval(&x).unwrap(), 2.66, max_relative = 1e-13);
    }

    #[test]
    fn partner_forms_are_not_closed_but_the_base_is() {
        let p = params();
        let eng = DiffEngine::default();
        let pts: Vec<Point> = vec![action([0.3, 0.7, 0.4, 1.1]), action([0.8, 0.2, 1.0, 0.3])];
        for family in [QbhFamily::Prime, QbhFamily::DoublePrime] {
            let s = build_qbh(&p, family).unwrap();
            let [d1, d2] = closedness_report(&s, &pts, &eng).unwrap();
            assert!(d1 > 1e-3, "{family:?} first partner closed: {d1}");
            assert!(d2 > 1e-3, "{family:?} second partner closed: {d2}");
            let base = exterior_derivative_two(&s.base_form, &pts[0], &eng).unwrap();
            assert!(base.max_abs() < 1e-10);
        }
    }

    #[test]
    fn base_inversion_is_exact() {
        let p = params();
        let x = action([0.3, 0.7, 0.4, 1.1]);
        let s = build_qbh(&p, QbhFamily::Prime).unwrap();
        let base = s.base_form.components(&x).unwrap();
        let inv = base.clone().try_inverse().unwrap();
        assert!((inv * base - DMatrix::identity(4, 4)).amax() <= 1e-12);
    }

    #[test]
    fn closedness_scales_like_the_k_gradient() {
        // |d omega'_1| = 6V²/(m²k²α): doubling V quadruples the residual
        let p = params();
        let eng = DiffEngine::default();
        let s = build_qbh(&p, QbhFamily::Prime).unwrap();
        let d_small = closedness_report(&s, &[action([0.2, 0.3, 0.0, 0.0])], &eng).unwrap();
        let d_large = closedness_report(&s, &[action([0.4, 0.6, 0.0, 0.0])], &eng).unwrap();
        assert_relative_eq!(d_large[0] / d_small[0], 4.0, max_relative = 1e-6);
    }

    #[test]
    fn prime_contraction_residual_structure() {
        // at (0.3, 0.7, 0, 0): iota_{X_H}omega'_1 = -c dJ1 + (2/(m alpha) + c) dJ2
        // with c = mk²/V³ = 1, while -dh'_1 = (2/(m alpha)) dJ2 = 20 dJ2
        let p = params();
        let eng = DiffEngine::default();
        let x = action([0.3, 0.7, 0.0, 0.0]);
        let s = build_qbh(&p, QbhFamily::Prime).unwrap();
        let rep = contraction_residuals(&s, &x, &eng).unwrap();
        assert_relative_eq!(rep.residual[0][J1], -1.0, max_relative = 1e-12);
        assert_relative_eq!(rep.residual[0][J2], 1.0, max_relative = 1e-12);
        assert!(rep.flow_derivative[0].abs() < 1e-12);
        assert!(rep.flow_derivative[1].abs() < 1e-12);
        // the defect is not conformal: even the best g leaves a residual
        assert!(rep.g_star_residual[0] > 0.1);
    }

    #[test]
    fn weak_operators_match_the_matrix_product() {
        let p = params();
        let x = action([0.3, 0.7, 0.4, 1.1]);
        // prime family: displayed operators reproduce the product exactly
        let s = build_qbh(&p, QbhFamily::Prime).unwrap();
        let rep = weak_recursion(&s, &x).unwrap();
        assert!(rep.corrected_max_diff[0] < 1e-12);
        assert!(rep.corrected_max_diff[1] < 1e-12);
        assert_relative_eq!(rep.numeric[0][(J1, J1)], 1.0, max_relative = 1e-13);
        assert_relative_eq!(rep.numeric[0][(J2, J2)], -21.0, max_relative = 1e-13);

        // double-prime family: corrected reading matches, the literal
        // ∂_{J2}⊗dJ1 entry misses by |J2² - J2|
        let s = build_qbh(&p, QbhFamily::DoublePrime).unwrap();
        let rep = weak_recursion(&s, &x).unwrap();
        assert!(rep.corrected_max_diff[0] < 1e-12);
        assert!(rep.corrected_max_diff[1] < 1e-12);
        let j2: f64 = 0.7;
        assert_relative_eq!(
            rep.literal_max_diff[1],
            (j2 * j2 - j2).abs(),
            max_relative = 1e-12
        );
        // T''_1 diagonal entries {2, -J2(2 + Vt/V²)} = {2, -3.08} at V = 1
        assert_relative_eq!(rep.numeric[0][(J1, J1)], 2.0, max_relative = 1e-13);
        assert_relative_eq!(rep.numeric[0][(J2, J2)], -3.08, max_relative = 1e-12);
    }

    #[test]
    fn weak_operator_prime_limit_of_large_alpha() {
        // K -> 0 as alpha grows: the first operator approaches diag blocks {1, -1}
        let p = ModelParams::new(1.0, 1.0, 1e9).unwrap();
        let x = action([0.3, 0.7, 0.0, 0.0]);
        let s = build_qbh(&p, QbhFamily::Prime).unwrap();
        let rep = weak_recursion(&s, &x).unwrap();
        assert_relative_eq!(rep.numeric[0][(J1, J1)], 1.0, max_relative = 1e-12);
        assert_relative_eq!(rep.numeric[0][(J2, J2)], -1.0, max_relative = 1e-6);
    }

    #[test]
    fn decomposition_sum_is_self_consistent() {
        let p = params();
        let x = action([0.3, 0.7, 0.4, 1.1]);
        for family in [QbhFamily::Prime, QbhFamily::DoublePrime] {
            let s = build_qbh(&p, family).unwrap();
            assert!(decomposition_sum_residual(&s, &x).unwrap() < 1e-12);
        }
    }
}
