//! Recursion operators and the bi-Hamiltonian chain: the action-chart
//! operator with S-blocks, the diagonal ξ- and π-chart operators, the
//! μ-scaled symmetry hierarchy, the chain bracket identities, and the
//! alternative description with the split operator 𝒯 = 𝒯₁ + 𝒯₂.

use nalgebra::{DMatrix, DVector};

use crate::calculus::{lie_bracket, poisson_canonical, poisson_s1};
use crate::chart::{Chart, Point};
use crate::diff::DiffEngine;
use crate::error::{Error, Result};
use crate::fields::{ScalarField, Tensor11};
use crate::model::{self, FieldKind, ModelParams};

/// The recursion operator on the action chart: the block S with rows
/// (J₁, J₂) and (J₂, J₁), acting identically on the action and angle slots.
pub fn action_recursion_tensor() -> Tensor11 {
    Tensor11::with_partials(
        Chart::Action,
        |x| {
            let (j1, j2) = (x.coord(0), x.coord(1));
            let mut m = DMatrix::zeros(4, 4);
            for (r, c, v) in [
                (0, 0, j1),
                (0, 1, j2),
                (1, 0, j2),
                (1, 1, j1),
                (2, 2, j1),
                (2, 3, j2),
                (3, 2, j2),
                (3, 3, j1),
            ] {
                m[(r, c)] = v;
            }
            m
        },
        |_| {
            let mut d1 = DMatrix::zeros(4, 4);
            for i in 0..4 {
                d1[(i, i)] = 1.0;
            }
            let mut d2 = DMatrix::zeros(4, 4);
            for (r, c) in [(0, 1), (1, 0), (2, 3), (3, 2)] {
                d2[(r, c)] = 1.0;
            }
            vec![d1, d2, DMatrix::zeros(4, 4), DMatrix::zeros(4, 4)]
        },
    )
}

/// Diagonal operator diag(c₁, c₂, c₁, c₂) whose eigenvalues are the first two
/// chart coordinates; the ξ- and π-chart recursion operators share this shape.
fn diagonal_recursion_tensor(chart: Chart) -> Tensor11 {
    Tensor11::with_partials(
        chart,
        |x| {
            let (c1, c2) = (x.coord(0), x.coord(1));
            DMatrix::from_diagonal(&DVector::from_vec(vec![c1, c2, c1, c2]))
        },
        |_| {
            let d1 = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 0.0, 1.0, 0.0]));
            let d2 = DMatrix::from_diagonal(&DVector::from_vec(vec![0.0, 1.0, 0.0, 1.0]));
            vec![d1, d2, DMatrix::zeros(4, 4), DMatrix::zeros(4, 4)]
        },
    )
}

pub fn xi_recursion_tensor() -> Tensor11 {
    diagonal_recursion_tensor(Chart::Xi)
}

pub fn pi_recursion_tensor() -> Tensor11 {
    diagonal_recursion_tensor(Chart::Pi)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    /// S-block operator on the action chart.
    ActionChart,
    /// diag(ξ₁, ξ₂) operator on the ξ chart.
    XiChart,
    /// diag(π₁, π₂) operator on the π chart.
    PiChart,
    /// 2ν_a block of the split operator (formal (ν, Φ) basis).
    NuFirst,
    /// 2ν_e block of the split operator.
    NuSecond,
    /// 𝒯 = 𝒯₁ + 𝒯₂.
    NuTotal,
}

/// A recursion operator: either a genuine chart tensor, or one of the
/// split operators evaluated in the formal (ν_a, ν_e, Φᵃ, Φᵉ) basis from an
/// action-chart point.
pub struct RecursionOperator {
    pub kind: OperatorKind,
    rep: Rep,
}

enum Rep {
    Chart(Tensor11),
    Nu(ModelParams),
}

pub fn build_recursion(kind: OperatorKind, p: &ModelParams) -> RecursionOperator {
    let rep = match kind {
        OperatorKind::ActionChart => Rep::Chart(action_recursion_tensor()),
        OperatorKind::XiChart => Rep::Chart(xi_recursion_tensor()),
        OperatorKind::PiChart => Rep::Chart(pi_recursion_tensor()),
        _ => Rep::Nu(*p),
    };
    RecursionOperator { kind, rep }
}

impl RecursionOperator {
    /// The underlying chart tensor, when the operator lives on a chart.
    pub fn chart_tensor(&self) -> Option<&Tensor11> {
        match &self.rep {
            Rep::Chart(t) => Some(t),
            Rep::Nu(_) => None,
        }
    }

    /// Component matrix at a point (action-chart point for the split
    /// operators, which are produced in the formal (ν, Φ) basis).
    pub fn matrix_at(&self, x: &Point) -> Result<DMatrix<f64>> {
        match &self.rep {
            Rep::Chart(t) => t.components(x),
            Rep::Nu(p) => {
                let alt = alternative_description(p, x)?;
                Ok(match self.kind {
                    OperatorKind::NuFirst => alt.t_first,
                    OperatorKind::NuSecond => alt.t_second,
                    _ => alt.t_sum,
                })
            }
        }
    }

    /// Closed-form eigenvalues of the action block: (J₁+J₂, J₁−J₂) for the
    /// action-chart operator, the first two coordinates for the diagonal
    /// ones, (2ν_a, 2ν_e) for the split total.
    pub fn eigenvalues(&self, x: &Point) -> Result<[f64; 2]> {
        match self.kind {
            OperatorKind::ActionChart => {
                x.expect_chart(Chart::Action)?;
                Ok([x.coord(0) + x.coord(1), x.coord(0) - x.coord(1)])
            }
            OperatorKind::XiChart => {
                x.expect_chart(Chart::Xi)?;
                Ok([x.coord(0), x.coord(1)])
            }
            OperatorKind::PiChart => {
                x.expect_chart(Chart::Pi)?;
                Ok([x.coord(0), x.coord(1)])
            }
            kind => {
                let p = match &self.rep {
                    Rep::Nu(p) => p,
                    Rep::Chart(_) => unreachable!("split kinds always carry params"),
                };
                let alt = alternative_description(p, x)?;
                Ok(match kind {
                    OperatorKind::NuFirst => [2.0 * alt.nu_a, 0.0],
                    OperatorKind::NuSecond => [0.0, 2.0 * alt.nu_e],
                    _ => [2.0 * alt.nu_a, 2.0 * alt.nu_e],
                })
            }
        }
    }
}

/// One μ-scaled bracket step: X_{i+1} = (2/μ)[X_i, Δ] with μ = 3 − i.
/// The chain terminates at i = 3 (μ = 0).
pub fn mu_bracket_step(
    p: &ModelParams,
    x: &Point,
    i: usize,
    eng: &DiffEngine,
) -> Result<DVector<f64>> {
    if i >= 3 {
        return Err(Error::SingularStructure(format!(
            "mu = 3 - i vanishes at i = 3; the chain ends (requested i = {i})"
        )));
    }
    let xi = model::vector_field(p, FieldKind::Chain(i))?;
    let delta = model::vector_field(p, FieldKind::Delta)?;
    let mu = (3 - i) as f64;
    Ok(lie_bracket(&xi, &delta, x, eng)? * (2.0 / mu))
}

#[derive(Debug, Clone, Copy)]
pub struct MuHierarchy {
    /// |(2/μ)[X_i, Δ] − X_{i+1}|∞ for i = 0, 1, 2.
    pub level_residuals: [f64; 3],
    /// max |[X_h, X_k]|∞ over all pairs h < k ≤ 3.
    pub involution_max: f64,
}

pub fn mu_bracket_hierarchy(p: &ModelParams, x: &Point, eng: &DiffEngine) -> Result<MuHierarchy> {
    x.expect_chart(Chart::Action)?;
    let mut level_residuals = [0.0; 3];
    for (i, slot) in level_residuals.iter_mut().enumerate() {
        let generated = mu_bracket_step(p, x, i, eng)?;
        let next = model::vector_field(p, FieldKind::Chain(i + 1))?.components(x)?;
        *slot = (generated - next).amax();
    }
    let fields: Vec<_> = (0..4)
        .map(|i| model::vector_field(p, FieldKind::Chain(i)).expect("valid index"))
        .collect();
    let mut involution_max = 0.0_f64;
    for h in 0..4 {
        for k in (h + 1)..4 {
            involution_max =
                involution_max.max(lie_bracket(&fields[h], &fields[k], x, eng)?.amax());
        }
    }
    Ok(MuHierarchy {
        level_residuals,
        involution_max,
    })
}

/// Residuals of the two bracket representations of X_i:
/// max_a |{H_i, x^a} − X_i^a|  and  max_a |{H_{i+1}, x^a}₁ − X_i^a|.
pub fn chain_identity(
    p: &ModelParams,
    x: &Point,
    i: usize,
    eng: &DiffEngine,
) -> Result<(f64, f64)> {
    if i > 2 {
        return Err(Error::IndexOutOfRange(i));
    }
    x.expect_chart(Chart::Action)?;
    let xi = model::vector_field(p, FieldKind::Chain(i))?.components(x)?;
    let h_i = model::hamiltonian_chain(p, i)?;
    let h_next = model::hamiltonian_chain(p, i + 1)?;
    let mut canonical_residual = 0.0_f64;
    let mut s1_residual = 0.0_f64;
    for a in 0..4 {
        let coord = ScalarField::coordinate(Chart::Action, a);
        let lhs = poisson_canonical(&h_i, &coord, x, eng)?;
        canonical_residual = canonical_residual.max((lhs - xi[a]).abs());
        let lhs1 = poisson_s1(&h_next, &coord, x, eng)?;
        s1_residual = s1_residual.max((lhs1 - xi[a]).abs());
    }
    Ok((canonical_residual, s1_residual))
}

/// The alternative description around Υ = J₁X₁ + J₂X₂, evaluated in the
/// formal basis (ν_a, ν_e, Φᵃ, Φᵉ).  The Φ labels are formal conjugates:
/// ∂_Φᵃ = −∂_Φᵉ = ∂_φ¹ + ∂_φ² are linearly dependent on the action chart, so
/// the wedge X^a ∧ X^e is identically zero and is reported as such.
#[derive(Debug, Clone)]
pub struct AlternativeDescription {
    pub nu_a: f64,
    pub nu_e: f64,
    pub h_a: f64,
    pub h_e: f64,
    /// f^a = −ν_a/2, f^e = ν_e.
    pub f_a: f64,
    pub f_e: f64,
    /// H̃ = −ν_a²/4 + ν_e²/2.
    pub h_tilde: f64,
    /// |Υ − (ν_a X^a + ν_e X^e)|∞ on the action chart.
    pub upsilon_residual: f64,
    /// d(ν_a, ν_e)/d(J₁, J₂); the description degenerates where it vanishes.
    pub nu_jacobian_det: f64,
    /// ω̃, ω̃₁, ω̃₂ in the formal basis.
    pub omega_tilde: DMatrix<f64>,
    pub omega_tilde_1: DMatrix<f64>,
    pub omega_tilde_2: DMatrix<f64>,
    /// 𝒯₁, 𝒯₂, their sum, and the product ω̃₂ ∘ ω̃₁⁻¹.
    pub t_first: DMatrix<f64>,
    pub t_second: DMatrix<f64>,
    pub t_sum: DMatrix<f64>,
    pub t_product: DMatrix<f64>,
    /// Components of ι_Υ ω̃ + dH̃ (dH̃ by central differences in ν).
    pub contraction_residual: DVector<f64>,
    /// max |Σ dνᵢ ∧ dfⁱ| for the linear fⁱ (exactly zero).
    pub closure_condition: f64,
    /// max |X^a ∧ X^e| (identically zero; see above).
    pub wedge_xa_xe: f64,
}

pub fn alternative_description(p: &ModelParams, x: &Point) -> Result<AlternativeDescription> {
    x.expect_chart(Chart::Action)?;
    let (j1, j2) = (x.coord(0), x.coord(1));
    let v = j1 + j2;
    let mk2 = p.m * p.k * p.k;

    let h0 = model::hamiltonian_chain(p, 0)?.eval(x)?;
    let h1 = model::hamiltonian_chain(p, 1)?.eval(x)?;
    let h_a = j1 * h0;
    let h_e = j2 * h1;
    let nu_a = -2.0 * h_a;
    let nu_e = h_e;
    let f_a = -0.5 * nu_a;
    let f_e = nu_e;
    let h_tilde = -0.25 * nu_a * nu_a + 0.5 * nu_e * nu_e;

    // Jacobian of (nu_a, nu_e) with respect to (J1, J2); closed form m²k⁴J₁/V⁴
    let d_nu_a = [
        mk2 * (v - 2.0 * j1) / (v * v * v),
        -2.0 * j1 * mk2 / (v * v * v),
    ];
    let d_nu_e = [-j2 * mk2 / (v * v), -j1 * mk2 / (v * v)];
    // nu_e = -J2 mk²/V, so its gradient carries the overall minus sign
    let nu_jacobian_det = d_nu_a[0] * d_nu_e[1] - d_nu_a[1] * d_nu_e[0];
    if nu_jacobian_det.abs() < 1e-12 {
        return Err(Error::Degenerate(format!(
            "df^a ∧ df^e vanishes at J = ({j1}, {j2}) (jacobian {nu_jacobian_det:.3e})"
        )));
    }

    // Upsilon decomposition on the action chart: both X^a and -X^e are
    // the unit angle direction (0, 0, 1, 1)
    let upsilon = model::vector_field(p, FieldKind::Upsilon)?.components(x)?;
    let combined = nu_a - nu_e;
    let mut upsilon_residual = 0.0_f64;
    for (idx, expect) in [(0, 0.0), (1, 0.0), (2, combined), (3, combined)] {
        upsilon_residual = upsilon_residual.max((upsilon[idx] - expect).abs());
    }

    // formal basis order: (nu_a, nu_e, Phi^a, Phi^e)
    let pair = |w_a: f64, w_e: f64| {
        let mut m = DMatrix::zeros(4, 4);
        m[(0, 2)] = w_a;
        m[(2, 0)] = -w_a;
        m[(1, 3)] = w_e;
        m[(3, 1)] = -w_e;
        m
    };
    let omega_tilde = pair(-0.5, 1.0);
    let omega_tilde_1 = pair(1.0, 1.0);
    let omega_tilde_2 = pair(2.0 * nu_a, 2.0 * nu_e);

    let t_first =
        DMatrix::from_diagonal(&DVector::from_vec(vec![2.0 * nu_a, 0.0, 2.0 * nu_a, 0.0]));
    let t_second =
        DMatrix::from_diagonal(&DVector::from_vec(vec![0.0, 2.0 * nu_e, 0.0, 2.0 * nu_e]));
    let t_sum = &t_first + &t_second;
    let omega_1_inv = omega_tilde_1
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::SingularStructure("omega-tilde-1 not invertible".into()))?;
    let t_product = &omega_tilde_2 * omega_1_inv;

    // iota_Upsilon omega-tilde + dH-tilde, with dH-tilde by central
    // differences in the nu coordinates
    let ups_formal = DVector::from_vec(vec![0.0, 0.0, nu_a, nu_e]);
    let contraction = omega_tilde.transpose() * &ups_formal;
    let h_tilde_fn = |na: f64, ne: f64| -0.25 * na * na + 0.5 * ne * ne;
    let h_na = {
        let h = 1e-6 * nu_a.abs().max(1.0);
        (h_tilde_fn(nu_a + h, nu_e) - h_tilde_fn(nu_a - h, nu_e)) / (2.0 * h)
    };
    let h_ne = {
        let h = 1e-6 * nu_e.abs().max(1.0);
        (h_tilde_fn(nu_a, nu_e + h) - h_tilde_fn(nu_a, nu_e - h)) / (2.0 * h)
    };
    let d_h_tilde = DVector::from_vec(vec![h_na, h_ne, 0.0, 0.0]);
    let contraction_residual = contraction + d_h_tilde;

    // sum_i d(nu_i) ∧ df^i for f = L nu with L = diag(-1/2, 1)
    let l = model::l_matrix();
    let mut closure = DMatrix::zeros(2, 2);
    for i in 0..2 {
        for j in 0..2 {
            closure[(i, j)] += l[(i, j)];
            closure[(j, i)] -= l[(i, j)];
        }
    }
    let closure_condition = closure.amax();

    // X^a ∧ X^e on the action chart (X^e = -X^a, so this vanishes)
    let xa: DVector<f64> = DVector::from_vec(vec![0.0, 0.0, 1.0, 1.0]);
    let xe = -&xa;
    let mut wedge_xa_xe = 0.0_f64;
    for a in 0..4 {
        for b in 0..4 {
            wedge_xa_xe = wedge_xa_xe.max((xa[a] * xe[b] - xa[b] * xe[a]).abs());
        }
    }

    Ok(AlternativeDescription {
        nu_a,
        nu_e,
        h_a,
        h_e,
        f_a,
        f_e,
        h_tilde,
        upsilon_residual,
        nu_jacobian_det,
        omega_tilde,
        omega_tilde_1,
        omega_tilde_2,
        t_first,
        t_second,
        t_sum,
        t_product,
        contraction_residual,
        closure_condition,
        wedge_xa_xe,
    })
}
