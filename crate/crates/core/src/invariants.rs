//! Conserved quantities and their bracket algebra: the deformed constant M,
//! L_α, angular momentum, the Laplace-Runge-Lenz vector A, the scaled
//! Runge-Lenz-Pauli vector Γ, involution tables and the su(2) check.
//!
//! The rotation phase β = Ω(r) t enters A₁, A₂ explicitly through time.
//! Brackets are phase-space derivations at frozen time, so β is held constant
//! during differentiation; residuals against the printed closed forms (which
//! implicitly differentiate β through r) are computed and reported, never
//! asserted.

use nalgebra::DVector;

use crate::calculus::{poisson_canonical, poisson_gamma};
use crate::chart::{Chart, Point};
use crate::diff::DiffEngine;
use crate::error::{Error, Result};
use crate::fields::ScalarField;
use crate::model::{self, ModelParams};

/// All scalar invariants of a reduced-chart state at time t.
///
/// The chart is equatorial, so L₁ = L₂ = 0 and A₃ = 0 identically.
/// `gamma_sq` is built from the closed form −mk²/(2H) + L₃²; the alternative
/// route |A|²/(−2mH) differs in the sign of L₃² and is kept available as
/// [`InvariantSet::gamma_vector_norm_sq`] for the discrepancy report.
#[derive(Debug, Clone, Copy)]
pub struct InvariantSet {
    pub h: f64,
    /// M = p_φα + ϖ(r), the deformed angular constant.
    pub m: f64,
    /// L_α = M + mαH.
    pub l_alpha: f64,
    /// L₃ = p_φα.
    pub l3: f64,
    pub a: [f64; 3],
    pub gamma: [f64; 3],
    pub gamma_sq: f64,
    pub c_aux: f64,
    pub d_aux: f64,
    pub beta: f64,
}

impl InvariantSet {
    /// |Γ|² computed through the vector components (γ₁² + γ₂² + γ₃²).
    pub fn gamma_vector_norm_sq(&self) -> f64 {
        self.gamma[0] * self.gamma[0]
            + self.gamma[1] * self.gamma[1]
            + self.gamma[2] * self.gamma[2]
    }
}

fn aux_cd(x: &Point, p: &ModelParams) -> (f64, f64) {
    let (r, phi, p_r, p_phi) = (x.coord(0), x.coord(1), x.coord(2), x.coord(3));
    let (s, c) = phi.sin_cos();
    let radial = p_phi * p_phi / r - p.m * p.k;
    let c_aux = -p_r * p_phi * c + radial * s;
    let d_aux = p_r * p_phi * s + radial * c;
    (c_aux, d_aux)
}

fn invariants_inner(x: &Point, p: &ModelParams, t: f64) -> Result<InvariantSet> {
    x.expect_chart(Chart::Reduced)?;
    let r = x.coord(0);
    let p_phi = x.coord(3);
    let h = model::hamiltonian_reduced(p).eval(x)?;
    let varpi = p.varpi(r)?;
    let m_const = p_phi + varpi;
    let l_alpha = m_const + p.m * p.alpha * h;
    let beta = p.beta(r, t)?;
    let (c_aux, d_aux) = aux_cd(x, p);
    let (sb, cb) = beta.sin_cos();
    let a = [c_aux * sb + d_aux * cb, c_aux * cb - d_aux * sb, 0.0];
    let (gamma, gamma_sq) = if h < 0.0 {
        let scale = 1.0 / (-2.0 * p.m * h).sqrt();
        (
            [a[0] * scale, a[1] * scale, 0.0],
            -p.m * p.k * p.k / (2.0 * h) + p_phi * p_phi,
        )
    } else {
        ([f64::NAN; 3], f64::NAN)
    };
    Ok(InvariantSet {
        h,
        m: m_const,
        l_alpha,
        l3: p_phi,
        a,
        gamma,
        gamma_sq,
        c_aux,
        d_aux,
        beta,
    })
}

/// Invariants of a reduced state; the Γ entries require a bound state.
pub fn eval_invariants(x: &Point, p: &ModelParams, t: f64) -> Result<InvariantSet> {
    let set = invariants_inner(x, p, t)?;
    if set.h >= 0.0 {
        return Err(Error::UnboundState(set.h));
    }
    Ok(set)
}

/// Same as [`eval_invariants`] but tolerates unbound states
/// (Γ entries come back NaN); used by trajectory monitors.
pub fn eval_invariants_lenient(x: &Point, p: &ModelParams, t: f64) -> Result<InvariantSet> {
    invariants_inner(x, p, t)
}

pub const MONITOR_NAMES: [&str; 7] = ["H", "M", "L_alpha", "L3", "A1", "A2", "Gamma_sq"];

/// Monitor row (H, M, L_α, L₃, A₁, A₂, |Γ|²) for a reduced-chart state.
pub fn monitor_row_reduced(x: &Point, p: &ModelParams, t: f64) -> Result<[f64; 7]> {
    let s = eval_invariants_lenient(x, p, t)?;
    Ok([s.h, s.m, s.l_alpha, s.l3, s.a[0], s.a[1], s.gamma_sq])
}

/// Monitor row for a Cartesian state, using the planar identifications
/// L₃ = q¹p₂ − q²p₁, M = L₃ + mkα/r and the Cartesian A = p×L − mk q/r.
pub fn monitor_row_cartesian(x: &Point, p: &ModelParams) -> Result<[f64; 7]> {
    x.expect_chart(Chart::Cartesian)?;
    let c = x.coords();
    let (q, mom) = (&c[..3], &c[3..]);
    let r = (q[0] * q[0] + q[1] * q[1] + q[2] * q[2]).sqrt();
    let h = model::hamiltonian_cartesian(p).eval(x)?;
    let l = [
        q[1] * mom[2] - q[2] * mom[1],
        q[2] * mom[0] - q[0] * mom[2],
        q[0] * mom[1] - q[1] * mom[0],
    ];
    let m_const = l[2] + p.m * p.k * p.alpha / r;
    let l_alpha = m_const + p.m * p.alpha * h;
    let mk_r = p.m * p.k / r;
    let a = [
        mom[1] * l[2] - mom[2] * l[1] - mk_r * q[0],
        mom[2] * l[0] - mom[0] * l[2] - mk_r * q[1],
        mom[0] * l[1] - mom[1] * l[0] - mk_r * q[2],
    ];
    let gamma_sq = if h < 0.0 {
        -p.m * p.k * p.k / (2.0 * h) + l[2] * l[2]
    } else {
        f64::NAN
    };
    Ok([h, m_const, l_alpha, l[2], a[0], a[1], gamma_sq])
}

/// A₁ and A₂ as scalar fields on the reduced chart, with β frozen at the
/// given value and exact gradients.
pub fn lrl_fields(p: &ModelParams, beta: f64) -> (ScalarField, ScalarField) {
    let (mm, kk) = (p.m, p.k);
    let (sb, cb) = beta.sin_cos();
    let make = move |ws: f64, wc: f64| {
        // field = ws * C + wc * D
        ScalarField::with_grad(
            Chart::Reduced,
            move |x: &Point| {
                let (r, phi, p_r, p_phi) = (x.coord(0), x.coord(1), x.coord(2), x.coord(3));
                let (s, c) = phi.sin_cos();
                let radial = p_phi * p_phi / r - mm * kk;
                let c_aux = -p_r * p_phi * c + radial * s;
                let d_aux = p_r * p_phi * s + radial * c;
                ws * c_aux + wc * d_aux
            },
            move |x: &Point| {
                let (r, phi, p_r, p_phi) = (x.coord(0), x.coord(1), x.coord(2), x.coord(3));
                let (s, c) = phi.sin_cos();
                let radial = p_phi * p_phi / r - mm * kk;
                let c_aux = -p_r * p_phi * c + radial * s;
                let d_aux = p_r * p_phi * s + radial * c;
                let dc = [
                    -p_phi * p_phi * s / (r * r),
                    d_aux,
                    -p_phi * c,
                    -p_r * c + 2.0 * p_phi * s / r,
                ];
                let dd = [
                    -p_phi * p_phi * c / (r * r),
                    -c_aux,
                    p_phi * s,
                    p_r * s + 2.0 * p_phi * c / r,
                ];
                DVector::from_iterator(4, (0..4).map(|i| ws * dc[i] + wc * dd[i]))
            },
        )
    };
    (make(sb, cb), make(cb, -sb))
}

/// Pairwise bracket residuals among the constants of motion:
/// the deformed brackets of {H, M, L_α} on the Cartesian chart and the
/// canonical brackets of {H, |Γ|², L₃} on the (equatorially projected)
/// reduced chart.  All six vanish for planar states.
#[derive(Debug, Clone, Copy)]
pub struct InvolutionTable {
    pub h_m: f64,
    pub h_l_alpha: f64,
    pub m_l_alpha: f64,
    pub gamma_l3: f64,
    pub gamma_h: f64,
    pub l3_h: f64,
}

impl InvolutionTable {
    pub fn max_abs(&self) -> f64 {
        [
            self.h_m,
            self.h_l_alpha,
            self.m_l_alpha,
            self.gamma_l3,
            self.gamma_h,
            self.l3_h,
        ]
        .iter()
        .fold(0.0, |m, v| m.max(v.abs()))
    }
}

fn cartesian_m_field(p: &ModelParams) -> ScalarField {
    let (mm, kk, al) = (p.m, p.k, p.alpha);
    ScalarField::with_grad(
        Chart::Cartesian,
        move |x: &Point| {
            let c = x.coords();
            let r = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt();
            c[0] * c[4] - c[1] * c[3] + mm * kk * al / r
        },
        move |x: &Point| {
            let c = x.coords();
            let r = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt();
            let w = -mm * kk * al / (r * r * r);
            DVector::from_vec(vec![
                c[4] + w * c[0],
                -c[3] + w * c[1],
                w * c[2],
                -c[1],
                c[0],
                0.0,
            ])
        },
    )
}

fn scalar_sum(a: &ScalarField, b: &ScalarField, wa: f64, wb: f64) -> ScalarField {
    let chart = a.chart();
    let (a1, b1) = (a.clone(), b.clone());
    let (a2, b2) = (a.clone(), b.clone());
    ScalarField::with_grad(
        chart,
        move |x: &Point| wa * a1.eval_raw(x) + wb * b1.eval_raw(x),
        move |x: &Point| {
            let ga = a2
                .grad_analytic(x)
                .expect("gradient")
                .expect("finite gradient");
            let gb = b2
                .grad_analytic(x)
                .expect("gradient")
                .expect("finite gradient");
            ga * wa + gb * wb
        },
    )
}

pub fn involution_table(x: &Point, p: &ModelParams, eng: &DiffEngine) -> Result<InvolutionTable> {
    x.expect_chart(Chart::Cartesian)?;
    let h = model::hamiltonian_cartesian(p);
    let m_field = cartesian_m_field(p);
    let l_alpha = scalar_sum(&m_field, &h, 1.0, p.m * p.alpha);

    let h_m = poisson_gamma(&h, &m_field, x, p, eng)?;
    let h_l_alpha = poisson_gamma(&h, &l_alpha, x, p, eng)?;
    let m_l_alpha = poisson_gamma(&m_field, &l_alpha, x, p, eng)?;

    // equatorial projection for the reduced-chart block
    let c = x.coords();
    let r = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt();
    let phi = c[1].atan2(c[0]);
    let p_r = (c[0] * c[3] + c[1] * c[4] + c[2] * c[5]) / r;
    let l3 = c[0] * c[4] - c[1] * c[3];
    let y = Point::new(Chart::Reduced, vec![r, phi, p_r, l3])?;

    let h_red = model::hamiltonian_reduced(p);
    let (mm, kk) = (p.m, p.k);
    let gamma_sq = ScalarField::with_grad(
        Chart::Reduced,
        move |z: &Point| {
            let (rr, pr, pp) = (z.coord(0), z.coord(2), z.coord(3));
            let h = pr * pr / (2.0 * mm) + pp * pp / (2.0 * mm * rr * rr) - kk / rr;
            -mm * kk * kk / (2.0 * h) + pp * pp
        },
        move |z: &Point| {
            let (rr, pr, pp) = (z.coord(0), z.coord(2), z.coord(3));
            let h = pr * pr / (2.0 * mm) + pp * pp / (2.0 * mm * rr * rr) - kk / rr;
            let dh = [
                -pp * pp / (mm * rr * rr * rr) + kk / (rr * rr),
                0.0,
                pr / mm,
                pp / (mm * rr * rr),
            ];
            let w = mm * kk * kk / (2.0 * h * h);
            DVector::from_vec(vec![w * dh[0], w * dh[1], w * dh[2], w * dh[3] + 2.0 * pp])
        },
    );
    let l3_field = ScalarField::coordinate(Chart::Reduced, 3);

    let gamma_l3 = poisson_canonical(&gamma_sq, &l3_field, &y, eng)?;
    let gamma_h = poisson_canonical(&gamma_sq, &h_red, &y, eng)?;
    let l3_h = poisson_canonical(&l3_field, &h_red, &y, eng)?;

    Ok(InvolutionTable {
        h_m,
        h_l_alpha,
        m_l_alpha,
        gamma_l3,
        gamma_h,
        l3_h,
    })
}

/// Numerically computed canonical brackets of the LRL components on the
/// reduced chart (β frozen), together with residuals against the printed
/// closed forms.  The undefined symbol B in the printed {A₁, H} is read as C.
#[derive(Debug, Clone, Copy)]
pub struct LrlBrackets {
    pub a1_h: f64,
    pub a2_h: f64,
    pub a1_a2: f64,
    pub a1_l3: f64,
    pub a2_l3: f64,
    /// |{A₁,H} − (3kαp_r/mr⁴)(D sinβ − C cosβ)|
    pub a1_h_display_residual: f64,
    /// |{A₂,H} − (3kαp_r/mr⁴)(C sinβ − D cosβ)|
    pub a2_h_display_residual: f64,
    /// |{A₁,A₂} − (−2mH + 3kαp_r/r⁴) p_φα|
    pub a1_a2_display_residual: f64,
    /// |{A₁,L₃} − A₂| (as printed; fails by a sign)
    pub a1_l3_display_residual: f64,
    /// |{A₁,L₃} + A₂| (the sign-consistent reading)
    pub a1_l3_sign_fixed_residual: f64,
    /// |{A₂,L₃} − A₁|
    pub a2_l3_display_residual: f64,
}

pub fn lrl_brackets(x: &Point, p: &ModelParams, t: f64, eng: &DiffEngine) -> Result<LrlBrackets> {
    x.expect_chart(Chart::Reduced)?;
    let set = eval_invariants_lenient(x, p, t)?;
    let (a1, a2) = lrl_fields(p, set.beta);
    let h = model::hamiltonian_reduced(p);
    let l3 = ScalarField::coordinate(Chart::Reduced, 3);

    let a1_h = poisson_canonical(&a1, &h, x, eng)?;
    let a2_h = poisson_canonical(&a2, &h, x, eng)?;
    let a1_a2 = poisson_canonical(&a1, &a2, x, eng)?;
    let a1_l3 = poisson_canonical(&a1, &l3, x, eng)?;
    let a2_l3 = poisson_canonical(&a2, &l3, x, eng)?;

    let (r, p_r, p_phi) = (x.coord(0), x.coord(2), x.coord(3));
    let (sb, cb) = set.beta.sin_cos();
    let prefactor = 3.0 * p.k * p.alpha * p_r / (p.m * r.powi(4));
    let a1_h_display = prefactor * (set.d_aux * sb - set.c_aux * cb);
    let a2_h_display = prefactor * (set.c_aux * sb - set.d_aux * cb);
    let a1_a2_display = (-2.0 * p.m * set.h + 3.0 * p.k * p.alpha * p_r / r.powi(4)) * p_phi;

    Ok(LrlBrackets {
        a1_h,
        a2_h,
        a1_a2,
        a1_l3,
        a2_l3,
        a1_h_display_residual: (a1_h - a1_h_display).abs(),
        a2_h_display_residual: (a2_h - a2_h_display).abs(),
        a1_a2_display_residual: (a1_a2 - a1_a2_display).abs(),
        a1_l3_display_residual: (a1_l3 - set.a[1]).abs(),
        a1_l3_sign_fixed_residual: (a1_l3 + set.a[1]).abs(),
        a2_l3_display_residual: (a2_l3 - set.a[0]).abs(),
    })
}

/// su(2) residuals on the constraint surface
/// p_φα² = r[2mk − r + p_r(3Ω − r p_r)], with A₃ = L₃.
#[derive(Debug, Clone, Copy)]
pub struct Su2Report {
    /// Momentum selected by the constraint (positive root).
    pub p_phi: f64,
    /// |{A₁,A₂} − A₃|, |{A₂,A₃} − A₁|, |{A₃,A₁} − A₂| at β = 0.
    pub residuals: [f64; 3],
}

impl Su2Report {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().fold(0.0, |m, v| m.max(*v))
    }
}

pub fn su2_check(x: &Point, p: &ModelParams, eng: &DiffEngine) -> Result<Su2Report> {
    x.expect_chart(Chart::Reduced)?;
    let (r, phi, p_r) = (x.coord(0), x.coord(1), x.coord(2));
    let omega = p.angular_velocity(r)?;
    let radicand = r * (2.0 * p.m * p.k - r + p_r * (3.0 * omega - r * p_r));
    if radicand < 0.0 {
        return Err(Error::ConstraintInfeasible(format!(
            "no real p_phi on the constraint surface at r = {r}, p_r = {p_r}"
        )));
    }
    let p_phi = radicand.sqrt();
    let y = Point::new(Chart::Reduced, vec![r, phi, p_r, p_phi])?;

    let (a1, a2) = lrl_fields(p, 0.0);
    let a3 = ScalarField::coordinate(Chart::Reduced, 3);
    let set = eval_invariants_lenient(&y, p, 0.0)?;

    let r12 = (poisson_canonical(&a1, &a2, &y, eng)? - p_phi).abs();
    let r23 = (poisson_canonical(&a2, &a3, &y, eng)? - set.a[0]).abs();
    let r31 = (poisson_canonical(&a3, &a1, &y, eng)? - set.a[1]).abs();

    Ok(Su2Report {
        p_phi,
        residuals: [r12, r23, r31],
    })
}

/// The two commutation conditions on (β, state) and the resulting
/// LRL-Hamiltonian brackets.
#[derive(Debug, Clone, Copy)]
pub struct CommutationConditions {
    pub beta: f64,
    pub beta_is_quarter_pi: bool,
    /// Left side p_r p_φα / (p_φα²/r − mk); NaN at the pole.
    pub ratio: f64,
    /// Right side −cot(β + φ_α).
    pub cot_rhs: f64,
    /// Pole flag: p_φα²/r − mk (or sin(β+φ_α)) vanishes.
    pub degenerate: bool,
    pub conditions_hold: bool,
    pub a1_h: f64,
    pub a2_h: f64,
}

pub fn commutation_conditions(
    x: &Point,
    p: &ModelParams,
    t: f64,
    eng: &DiffEngine,
) -> Result<CommutationConditions> {
    x.expect_chart(Chart::Reduced)?;
    let (r, phi, p_r, p_phi) = (x.coord(0), x.coord(1), x.coord(2), x.coord(3));
    let beta = p.beta(r, t)?;
    let beta_is_quarter_pi = (beta - std::f64::consts::FRAC_PI_4).abs() < 1e-9;

    let denom = p_phi * p_phi / r - p.m * p.k;
    let sin_arg = (beta + phi).sin();
    let degenerate = denom.abs() < 1e-12 || sin_arg.abs() < 1e-12;
    let (ratio, cot_rhs) = if degenerate {
        (f64::NAN, f64::NAN)
    } else {
        (p_r * p_phi / denom, -(beta + phi).cos() / sin_arg)
    };
    let conditions_hold = beta_is_quarter_pi && !degenerate && (ratio - cot_rhs).abs() < 1e-9;

    let brackets = lrl_brackets(x, p, t, eng)?;
    Ok(CommutationConditions {
        beta,
        beta_is_quarter_pi,
        ratio,
        cot_rhs,
        degenerate,
        conditions_hold,
        a1_h: brackets.a1_h,
        a2_h: brackets.a2_h,
    })
}

/// Build a state satisfying both commutation conditions: β = π/4 fixes
/// t = π/(4Ω(r)), and the angle solves the cotangent relation with
/// (β + φ_α) ∈ (0, π).
pub fn commuting_state(p: &ModelParams, r: f64, p_r: f64, p_phi: f64) -> Result<(Point, f64)> {
    p.require_deformation()?;
    let omega = p.angular_velocity(r)?;
    let t = std::f64::consts::FRAC_PI_4 / omega;
    let denom = p_phi * p_phi / r - p.m * p.k;
    if denom.abs() < 1e-12 {
        return Err(Error::SingularStructure(
            "commutation ratio has a pole at p_phi^2/r = mk".into(),
        ));
    }
    let ratio = p_r * p_phi / denom;
    // cot(theta) = -ratio with theta in (0, pi)
    let theta = 1.0_f64.atan2(-ratio);
    let phi = theta - std::f64::consts::FRAC_PI_4;
    let x = Point::new(Chart::Reduced, vec![r, phi, p_r, p_phi])?;
    Ok((x, t))
}
