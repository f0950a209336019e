//! Model-specific fields: parameters, Hamiltonians in every chart, the
//! Hamiltonian chain, the named vector fields and the structural matrices.
//!
//! Defaults are nondimensional (m = k = 1); the deformation strength α is the
//! only scenario knob most callers touch.  Every field built here carries its
//! closed-form first derivatives, so the calculus operations are exact unless
//! explicitly run in finite-difference mode.

use nalgebra::{DMatrix, DVector};

use crate::chart::{Chart, Point};
use crate::error::{Error, Result};
use crate::fields::{ScalarField, VectorField};

/// Mass, coupling and deformation strength of the scenario.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ModelParams {
    pub m: f64,
    pub k: f64,
    pub alpha: f64,
}

impl ModelParams {
    pub fn new(m: f64, k: f64, alpha: f64) -> Result<Self> {
        if !(m.is_finite() && k.is_finite() && alpha.is_finite()) {
            return Err(Error::InvalidConfig("non-finite model parameter".into()));
        }
        if m <= 0.0 || k <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "m and k must be positive, got m = {m}, k = {k}"
            )));
        }
        if alpha < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "alpha must be non-negative, got {alpha}"
            )));
        }
        Ok(ModelParams { m, k, alpha })
    }

    pub fn require_deformation(&self) -> Result<()> {
        if self.alpha > 0.0 {
            Ok(())
        } else {
            Err(Error::DeformationRequired(self.alpha))
        }
    }

    /// Angular velocity Ω(r) = kα/r³ induced by the deformation.
    pub fn angular_velocity(&self, r: f64) -> Result<f64> {
        if r <= 0.0 {
            return Err(Error::DomainViolation(format!(
                "r must be positive, got {r}"
            )));
        }
        Ok(self.k * self.alpha / (r * r * r))
    }

    /// ϖ(r) = m r² Ω(r) = m k α / r.
    pub fn varpi(&self, r: f64) -> Result<f64> {
        if r <= 0.0 {
            return Err(Error::DomainViolation(format!(
                "r must be positive, got {r}"
            )));
        }
        Ok(self.m * self.k * self.alpha / r)
    }

    /// Rotation phase β = Ω(r) t.
    pub fn beta(&self, r: f64, t: f64) -> Result<f64> {
        Ok(self.angular_velocity(r)? * t)
    }
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            m: 1.0,
            k: 1.0,
            alpha: 0.1,
        }
    }
}

/// H = pᵢpⁱ/2m − k/r on the Cartesian chart.
pub fn hamiltonian_cartesian(p: &ModelParams) -> ScalarField {
    let (m, k) = (p.m, p.k);
    ScalarField::with_grad(
        Chart::Cartesian,
        move |x| {
            let c = x.coords();
            let p2 = c[3] * c[3] + c[4] * c[4] + c[5] * c[5];
            let r = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt();
            p2 / (2.0 * m) - k / r
        },
        move |x| {
            let c = x.coords();
            let r = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt();
            let r3 = r * r * r;
            DVector::from_vec(vec![
                k * c[0] / r3,
                k * c[1] / r3,
                k * c[2] / r3,
                c[3] / m,
                c[4] / m,
                c[5] / m,
            ])
        },
    )
}

/// H = p_r²/2m + p_φα²/(2mr²) − k/r on the reduced (equatorial) chart.
pub fn hamiltonian_reduced(p: &ModelParams) -> ScalarField {
    let (m, k) = (p.m, p.k);
    ScalarField::with_grad(
        Chart::Reduced,
        move |x| {
            let (r, p_r, p_phi) = (x.coord(0), x.coord(2), x.coord(3));
            p_r * p_r / (2.0 * m) + p_phi * p_phi / (2.0 * m * r * r) - k / r
        },
        move |x| {
            let (r, p_r, p_phi) = (x.coord(0), x.coord(2), x.coord(3));
            DVector::from_vec(vec![
                -p_phi * p_phi / (m * r * r * r) + k / (r * r),
                0.0,
                p_r / m,
                p_phi / (m * r * r),
            ])
        },
    )
}

/// H = −mk²/(2(J₁+J₂)²) on the action chart.
pub fn hamiltonian_action(p: &ModelParams) -> ScalarField {
    hamiltonian_chain(p, 0).expect("index 0 is valid")
}

/// The Hamiltonian chain H₀..H₃ on the action chart:
/// H₀ = −mk²/2V², H₁ = −mk²/V, H₂ = mk² ln V, H₃ = mk²V, with V = J₁+J₂.
pub fn hamiltonian_chain(p: &ModelParams, i: usize) -> Result<ScalarField> {
    if i > 3 {
        return Err(Error::IndexOutOfRange(i));
    }
    let mk2 = p.m * p.k * p.k;
    let value = move |v: f64| match i {
        0 => -mk2 / (2.0 * v * v),
        1 => -mk2 / v,
        2 => mk2 * v.ln(),
        _ => mk2 * v,
    };
    let slope = move |v: f64| match i {
        0 => mk2 / (v * v * v),
        1 => mk2 / (v * v),
        2 => mk2 / v,
        _ => mk2,
    };
    Ok(ScalarField::with_grad(
        Chart::Action,
        move |x| value(x.coord(0) + x.coord(1)),
        move |x| {
            let s = slope(x.coord(0) + x.coord(1));
            DVector::from_vec(vec![s, s, 0.0, 0.0])
        },
    ))
}

/// H′ = (ξ₁ − ξ₂)/(mα) on the ξ chart.
pub fn hamiltonian_xi(p: &ModelParams) -> Result<ScalarField> {
    p.require_deformation()?;
    let ma = p.m * p.alpha;
    Ok(ScalarField::with_grad(
        Chart::Xi,
        move |x| (x.coord(0) - x.coord(1)) / ma,
        move |_| DVector::from_vec(vec![1.0 / ma, -1.0 / ma, 0.0, 0.0]),
    ))
}

/// H″ = mk²/(2(π₂² − π₁)) on the π chart.
pub fn hamiltonian_pi(p: &ModelParams) -> ScalarField {
    let mk2 = p.m * p.k * p.k;
    ScalarField::with_grad(
        Chart::Pi,
        move |x| {
            let u = x.coord(1) * x.coord(1) - x.coord(0);
            mk2 / (2.0 * u)
        },
        move |x| {
            let pi2 = x.coord(1);
            let u = pi2 * pi2 - x.coord(0);
            DVector::from_vec(vec![mk2 / (2.0 * u * u), -mk2 * pi2 / (u * u), 0.0, 0.0])
        },
    )
}

/// The named vector fields of the system.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldKind {
    /// X_i = mk²/(J₁+J₂)^{3−i} (∂_φ¹ + ∂_φ²) on the action chart, i = 0..3.
    Chain(usize),
    /// Δ = λ₁∂_{J₁} + λ₂∂_{J₂} with λ₁ = (J₁²+J₂²)/2, λ₂ = J₁J₂.
    Delta,
    /// Υ = J₁X₁ + J₂X₂.
    Upsilon,
    /// Hamilton equations of the reduced Hamiltonian.
    ReducedCanonical,
    /// Same field with the angle rate carrying an extra 1/m
    /// (the literal transcription; see the verification ledger).
    ReducedLiteral,
    /// X′ = (1/(mα)) (∂_φ¹ − ∂_φ²) on the ξ chart.
    XiFlow,
    /// X″ = mk²/(2(π₂²−π₁)²) (∂_χ¹ − 2π₂ ∂_χ²) on the π chart.
    PiFlow,
}

pub fn vector_field(p: &ModelParams, kind: FieldKind) -> Result<VectorField> {
    let (m, k) = (p.m, p.k);
    let mk2 = m * k * k;
    match kind {
        FieldKind::Chain(i) => {
            if i > 3 {
                return Err(Error::IndexOutOfRange(i));
            }
            let expo = i as i32 - 3;
            Ok(VectorField::with_jacobian(
                Chart::Action,
                move |x| {
                    let c = mk2 * (x.coord(0) + x.coord(1)).powi(expo);
                    DVector::from_vec(vec![0.0, 0.0, c, c])
                },
                move |x| {
                    let dc = mk2 * f64::from(expo) * (x.coord(0) + x.coord(1)).powi(expo - 1);
                    let mut j = DMatrix::zeros(4, 4);
                    j[(2, 0)] = dc;
                    j[(2, 1)] = dc;
                    j[(3, 0)] = dc;
                    j[(3, 1)] = dc;
                    j
                },
            ))
        }
        FieldKind::Delta => Ok(VectorField::with_jacobian(
            Chart::Action,
            |x| {
                let (j1, j2) = (x.coord(0), x.coord(1));
                DVector::from_vec(vec![(j1 * j1 + j2 * j2) / 2.0, j1 * j2, 0.0, 0.0])
            },
            |x| {
                let (j1, j2) = (x.coord(0), x.coord(1));
                let mut j = DMatrix::zeros(4, 4);
                j[(0, 0)] = j1;
                j[(0, 1)] = j2;
                j[(1, 0)] = j2;
                j[(1, 1)] = j1;
                j
            },
        )),
        FieldKind::Upsilon => Ok(VectorField::with_jacobian(
            Chart::Action,
            move |x| {
                let (j1, j2) = (x.coord(0), x.coord(1));
                let v = j1 + j2;
                let g = mk2 * (j1 / (v * v) + j2 / v);
                DVector::from_vec(vec![0.0, 0.0, g, g])
            },
            move |x| {
                let (j1, j2) = (x.coord(0), x.coord(1));
                let v = j1 + j2;
                let (v2, v3) = (v * v, v * v * v);
                let dg1 = mk2 * (1.0 / v2 - 2.0 * j1 / v3 - j2 / v2);
                let dg2 = mk2 * (-2.0 * j1 / v3 + 1.0 / v - j2 / v2);
                let mut j = DMatrix::zeros(4, 4);
                j[(2, 0)] = dg1;
                j[(2, 1)] = dg2;
                j[(3, 0)] = dg1;
                j[(3, 1)] = dg2;
                j
            },
        )),
        FieldKind::ReducedCanonical | FieldKind::ReducedLiteral => {
            let angle_scale = if kind == FieldKind::ReducedLiteral {
                1.0 / m
            } else {
                1.0
            };
            Ok(VectorField::with_jacobian(
                Chart::Reduced,
                move |x| {
                    let (r, p_r, p_phi) = (x.coord(0), x.coord(2), x.coord(3));
                    DVector::from_vec(vec![
                        p_r / m,
                        angle_scale * p_phi / (m * r * r),
                        p_phi * p_phi / (m * r * r * r) - k / (r * r),
                        0.0,
                    ])
                },
                move |x| {
                    let (r, p_phi) = (x.coord(0), x.coord(3));
                    let mut j = DMatrix::zeros(4, 4);
                    j[(0, 2)] = 1.0 / m;
                    j[(1, 0)] = -2.0 * angle_scale * p_phi / (m * r * r * r);
                    j[(1, 3)] = angle_scale / (m * r * r);
                    j[(2, 0)] = -3.0 * p_phi * p_phi / (m * r * r * r * r) + 2.0 * k / (r * r * r);
                    j[(2, 3)] = 2.0 * p_phi / (m * r * r * r);
                    j
                },
            ))
        }
        FieldKind::XiFlow => {
            p.require_deformation()?;
            let rate = 1.0 / (m * p.alpha);
            Ok(VectorField::with_jacobian(
                Chart::Xi,
                move |_| DVector::from_vec(vec![0.0, 0.0, rate, -rate]),
                |_| DMatrix::zeros(4, 4),
            ))
        }
        FieldKind::PiFlow => Ok(VectorField::with_jacobian(
            Chart::Pi,
            move |x| {
                let pi2 = x.coord(1);
                let u = pi2 * pi2 - x.coord(0);
                let w = mk2 / (2.0 * u * u);
                DVector::from_vec(vec![0.0, 0.0, w, -2.0 * pi2 * w])
            },
            move |x| {
                let pi2 = x.coord(1);
                let u = pi2 * pi2 - x.coord(0);
                let u3 = u * u * u;
                let w = mk2 / (2.0 * u * u);
                let dw_d1 = mk2 / u3;
                let dw_d2 = -2.0 * mk2 * pi2 / u3;
                let mut j = DMatrix::zeros(4, 4);
                j[(2, 0)] = dw_d1;
                j[(2, 1)] = dw_d2;
                j[(3, 0)] = -2.0 * pi2 * dw_d1;
                j[(3, 1)] = -2.0 * w - 2.0 * pi2 * dw_d2;
                j
            },
        )),
    }
}

pub fn s_matrix(j1: f64, j2: f64) -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[j1, j2, j2, j1])
}

pub fn s_matrix_inverse(j1: f64, j2: f64) -> Result<DMatrix<f64>> {
    let diff = j1 - j2;
    let sum = j1 + j2;
    if diff.abs() < 1e-12 || sum.abs() < 1e-12 {
        return Err(Error::SingularStructure(format!(
            "S is singular at J1 = {j1}, J2 = {j2}"
        )));
    }
    let det = diff * sum;
    Ok(DMatrix::from_row_slice(
        2,
        2,
        &[j1 / det, -j2 / det, -j2 / det, j1 / det],
    ))
}

/// Constant matrix L = diag(−1/2, 1) of the linear frequency functions.
pub fn l_matrix() -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[-0.5, 0.0, 0.0, 1.0])
}

/// Chart-appropriate structural matrix and its inverse:
/// S on the action chart, R = diag(ξ₁, ξ₂) on ξ, F = diag(π₁, π₂) on π.
/// The product M·M⁻¹ is verified to 1e-12.
pub fn structure_matrices(x: &Point) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let (mat, inv) = match x.chart() {
        Chart::Action => {
            let (j1, j2) = (x.coord(0), x.coord(1));
            (s_matrix(j1, j2), s_matrix_inverse(j1, j2)?)
        }
        Chart::Xi | Chart::Pi => {
            let (a, b) = (x.coord(0), x.coord(1));
            if a.abs() < 1e-12 || b.abs() < 1e-12 {
                return Err(Error::SingularStructure(format!(
                    "diagonal structure matrix singular at ({a}, {b})"
                )));
            }
            (
                DMatrix::from_row_slice(2, 2, &[a, 0.0, 0.0, b]),
                DMatrix::from_row_slice(2, 2, &[1.0 / a, 0.0, 0.0, 1.0 / b]),
            )
        }
        other => {
            return Err(Error::InvalidConfig(format!(
                "no structural matrix on the {other} chart"
            )))
        }
    };
    let residual = (&mat * &inv - DMatrix::identity(2, 2)).amax();
    if residual > 1e-12 {
        return Err(Error::SingularStructure(format!(
            "structure matrix inversion defect {residual}"
        )));
    }
    Ok((mat, inv))
}

/// Acceleration of the corrected second law,
/// q̈ = −kq/(mr³) + q̇×Ω + q×Ω̇, with Ω = (0,0,kα/r³) and
/// Ω̇ = (0,0,−3kα ṙ/r⁴), ṙ = q·q̇/r.
pub fn newton_acceleration(q: &[f64; 3], qdot: &[f64; 3], p: &ModelParams) -> Result<[f64; 3]> {
    let r2 = q[0] * q[0] + q[1] * q[1] + q[2] * q[2];
    let r = r2.sqrt();
    if r <= 0.0 || !r.is_finite() {
        return Err(Error::DomainViolation(format!("invalid radius {r}")));
    }
    let r3 = r2 * r;
    let omega = p.k * p.alpha / r3;
    let rdot = (q[0] * qdot[0] + q[1] * qdot[1] + q[2] * qdot[2]) / r;
    let omega_dot = -3.0 * p.k * p.alpha * rdot / (r2 * r2);
    // cross products with a vector along the third axis:
    // (v × Ω)_i = ε^{ijk} v_j Ω_k with Ω = Ω ê₃
    let coriolis = [qdot[1] * omega, -qdot[0] * omega, 0.0];
    let euler = [q[1] * omega_dot, -q[0] * omega_dot, 0.0];
    Ok([
        -p.k * q[0] / (p.m * r3) + coriolis[0] + euler[0],
        -p.k * q[1] / (p.m * r3) + coriolis[1] + euler[1],
        -p.k * q[2] / (p.m * r3) + coriolis[2] + euler[2],
    ])
}
