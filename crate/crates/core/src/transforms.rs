//! Coordinate maps between the reduced, action, ξ and π charts, and the
//! linear-in-time flows of the integrable systems.
//!
//! Angle extraction for a general reduced state uses the flow-time
//! parametrization: angles = frequency × time since perihelion, with the
//! perihelion located by p_r = 0, ṗ_r > 0 (equivalently, the mean anomaly).

use crate::chart::{Chart, Point};
use crate::diff::DiffEngine;
use crate::error::{Error, Result};
use crate::model::{self, ModelParams};

/// Which reading of the π-chart action relation to invert.
///
/// `Literal` transcribes the J₁(π) relation exactly as printed; `Corrected`
/// uses the variant that round-trips (J₁ = −π₂ + √(π₁ − π₂²)).  `Corrected`
/// is the default everywhere; the literal residual is reported, not hidden.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TransformMode {
    #[default]
    Corrected,
    Literal,
}

impl std::str::FromStr for TransformMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "corrected" | "canonical" => Ok(TransformMode::Corrected),
            "literal" | "paper-literal" => Ok(TransformMode::Literal),
            other => Err(Error::InvalidConfig(format!("unknown mode '{other}'"))),
        }
    }
}

/// Orbit constants shared by the transform routines.
struct BoundOrbit {
    energy: f64,
    /// J₁ + J₂ = mk/√(−2mE).
    v_sum: f64,
    /// Mean motion n = mk²/V³.
    mean_motion: f64,
}

fn bound_orbit(p: &ModelParams, energy: f64) -> Result<BoundOrbit> {
    if energy >= 0.0 {
        return Err(Error::UnboundState(energy));
    }
    let v_sum = p.m * p.k / (-2.0 * p.m * energy).sqrt();
    Ok(BoundOrbit {
        energy,
        v_sum,
        mean_motion: p.m * p.k * p.k / (v_sum * v_sum * v_sum),
    })
}

/// Mean anomaly of a reduced-chart state (zero at perihelion).
fn mean_anomaly(x: &Point, p: &ModelParams, orbit: &BoundOrbit) -> f64 {
    let (r, p_r, p_phi) = (x.coord(0), x.coord(2), x.coord(3));
    let a = -p.k / (2.0 * orbit.energy);
    let e2 = 1.0 + 2.0 * orbit.energy * p_phi * p_phi / (p.m * p.k * p.k);
    let e = e2.max(0.0).sqrt();
    if e < 1e-12 {
        return 0.0;
    }
    let cos_ecc = ((1.0 - r / a) / e).clamp(-1.0, 1.0);
    let sin_ecc = r * p_r / (p.m * orbit.mean_motion * a * a * e);
    let ecc = sin_ecc.atan2(cos_ecc);
    ecc - e * ecc.sin()
}

/// Reduced state → action-angle state.
///
/// J₁ = −p_φα + mk/√(−2mE), J₂ = p_φα; both angles equal the mean anomaly
/// (the two frequencies coincide).  Requires a bound state.
pub fn reduced_to_action(x: &Point, p: &ModelParams) -> Result<Point> {
    x.expect_chart(Chart::Reduced)?;
    let energy = model::hamiltonian_reduced(p).eval(x)?;
    let orbit = bound_orbit(p, energy)?;
    let p_phi = x.coord(3);
    let j1 = orbit.v_sum - p_phi;
    let j2 = p_phi;
    let angle = mean_anomaly(x, p, &orbit);
    Point::new(Chart::Action, vec![j1, j2, angle, angle])
}

/// Coefficient of the ξ-chart angle map,
/// c = (2√(2α)/(mαk)) (ξ₂ − ξ₁)^{3/2}; the action angles are c times the
/// ξ angles (with the second angle flipped).
pub fn xi_angle_coefficient(p: &ModelParams, xi1: f64, xi2: f64) -> Result<f64> {
    p.require_deformation()?;
    if xi2 <= xi1 {
        return Err(Error::DomainViolation(format!(
            "xi chart needs xi2 > xi1, got ({xi1}, {xi2})"
        )));
    }
    Ok(2.0 * (2.0 * p.alpha).sqrt() / (p.m * p.alpha * p.k) * (xi2 - xi1).powf(1.5))
}

/// Action-angle state → ξ state, with ϖ = mkα/r supplied by an explicit
/// radius (the relation is an on-shell identity at the state's current r).
///
/// ξ₂ = J₂ + ϖ and ξ₁ = ξ₂ + mαH, i.e. ξ₁ = L_α and ξ₂ = M.
pub fn action_to_xi(x: &Point, p: &ModelParams, r_context: f64) -> Result<Point> {
    x.expect_chart(Chart::Action)?;
    p.require_deformation()?;
    let varpi = p.varpi(r_context)?;
    let energy = model::hamiltonian_action(p).eval(x)?;
    let xi2 = x.coord(1) + varpi;
    let xi1 = xi2 + p.m * p.alpha * energy;
    let c = xi_angle_coefficient(p, xi1, xi2)?;
    Point::new(Chart::Xi, vec![xi1, xi2, x.coord(2) / c, -x.coord(3) / c])
}

/// Action-angle state → π state: π₁ = |Γ|² = −mk²/(2H) + J₂², π₂ = J₂,
/// χ¹ = φ¹/(J₁+J₂), χ² = −J₂ φ²/(J₁+J₂).
pub fn action_to_pi(x: &Point, p: &ModelParams) -> Result<Point> {
    x.expect_chart(Chart::Action)?;
    let (j1, j2) = (x.coord(0), x.coord(1));
    let v = j1 + j2;
    let energy = model::hamiltonian_action(p).eval(x)?;
    let pi1 = -p.m * p.k * p.k / (2.0 * energy) + j2 * j2;
    let chi1 = x.coord(2) / v;
    let chi2 = -j2 * x.coord(3) / v;
    Point::new(Chart::Pi, vec![pi1, j2, chi1, chi2])
}

/// π state → action-angle state.  `Corrected` uses J₁ = −π₂ + √(π₁ − π₂²)
/// (the inverse of [`action_to_pi`]); `Literal` uses J₁ = −π₁ + √(π₁ − π₂²)
/// as printed, which does not round-trip.
pub fn pi_to_action(x: &Point, p: &ModelParams, mode: TransformMode) -> Result<Point> {
    let _ = p;
    x.expect_chart(Chart::Pi)?;
    let (pi1, pi2) = (x.coord(0), x.coord(1));
    let root = (pi1 - pi2 * pi2).sqrt();
    let j1 = match mode {
        TransformMode::Corrected => -pi2 + root,
        TransformMode::Literal => -pi1 + root,
    };
    let j2 = pi2;
    let v = j1 + j2;
    if v.abs() < 1e-12 {
        return Err(Error::SingularStructure(
            "J1 + J2 vanishes under the requested inversion".into(),
        ));
    }
    if j2.abs() < 1e-12 {
        return Err(Error::SingularStructure(
            "second angle map is singular at J2 = 0".into(),
        ));
    }
    let phi1 = x.coord(2) * v;
    let phi2 = -x.coord(3) * v / j2;
    Point::new(Chart::Action, vec![j1, j2, phi1, phi2])
}

/// Frozen-action linear flow: actions stay put, angles advance with the
/// chart's frequencies for a time t.
pub fn flow_linear(x: &Point, p: &ModelParams, t: f64) -> Result<Point> {
    let mut coords = x.coords().to_vec();
    match x.chart() {
        Chart::Action => {
            let v = coords[0] + coords[1];
            let n = p.m * p.k * p.k / (v * v * v);
            coords[2] += n * t;
            coords[3] += n * t;
        }
        Chart::Xi => {
            p.require_deformation()?;
            let rate = 1.0 / (p.m * p.alpha);
            coords[2] += rate * t;
            coords[3] -= rate * t;
        }
        Chart::Pi => {
            let u = coords[1] * coords[1] - coords[0];
            let w = p.m * p.k * p.k / (2.0 * u * u);
            coords[2] += w * t;
            coords[3] += -2.0 * coords[1] * w * t;
        }
        other => {
            return Err(Error::InvalidConfig(format!(
                "linear flow is defined on the integrable charts, not {other}"
            )))
        }
    }
    Point::new(x.chart(), coords)
}

/// Ratio of the ξ-chart frequency obtained through the angle map
/// (n/c) to the flow frequency 1/(mα); equals 1 when the two displays
/// are consistent.
pub fn xi_frequency_ratio(x: &Point, p: &ModelParams, r_context: f64) -> Result<f64> {
    x.expect_chart(Chart::Action)?;
    let xi = action_to_xi(x, p, r_context)?;
    let c = xi_angle_coefficient(p, xi.coord(0), xi.coord(1))?;
    let v = x.coord(0) + x.coord(1);
    let n = p.m * p.k * p.k / (v * v * v);
    Ok((n / c) * (p.m * p.alpha))
}

/// Ratio of the first π-chart angle frequency computed from H″ to the one
/// implied by the angle map (n/V).  The two disagree by a factor 2; the
/// ratio 0.5 is reported in the verification ledger.
pub fn chi1_frequency_ratio(x: &Point, p: &ModelParams, eng: &DiffEngine) -> Result<f64> {
    x.expect_chart(Chart::Action)?;
    let pi_pt = action_to_pi(x, p)?;
    let h_pp = model::hamiltonian_pi(p);
    let from_h = eng.partial_scalar(&h_pp, &pi_pt, 0)?;
    let v = x.coord(0) + x.coord(1);
    let n = p.m * p.k * p.k / (v * v * v);
    Ok(from_h / (n / v))
}

/// Same ratio for the second angle; this one is consistent (equals 1).
pub fn chi2_frequency_ratio(x: &Point, p: &ModelParams, eng: &DiffEngine) -> Result<f64> {
    x.expect_chart(Chart::Action)?;
    let pi_pt = action_to_pi(x, p)?;
    let h_pp = model::hamiltonian_pi(p);
    let from_h = eng.partial_scalar(&h_pp, &pi_pt, 1)?;
    let v = x.coord(0) + x.coord(1);
    let n = p.m * p.k * p.k / (v * v * v);
    let from_map = -x.coord(1) * n / v;
    Ok(from_h / from_map)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params() -> ModelParams {
        ModelParams::default()
    }

    fn probe_reduced() -> Point {
        Point::new(Chart::Reduced, vec![1.0, 0.0, 0.0, 0.9]).unwrap()
    }

    #[test]
    fn probe_state_actions() {
        let act = reduced_to_action(&probe_reduced(), &params()).unwrap();
        assert_relative_eq!(act.coord(0), 0.016703, max_relative = 1e-3);
        assert_relative_eq!(act.coord(1), 0.9, max_relative = 1e-15);
        assert_relative_eq!(act.coord(0) + act.coord(1), 0.916698, max_relative = 1e-5);
    }

    #[test]
    fn circular_orbit_has_zero_radial_action() {
        let p = params();
        // p_phi^2 = m k r  ->  circular
        let p_phi = 0.8_f64;
        let r = p_phi * p_phi;
        let x = Point::new(Chart::Reduced, vec![r, 0.3, 0.0, p_phi]).unwrap();
        let act = reduced_to_action(&x, &p).unwrap();
        assert!(act.coord(0).abs() < 1e-13, "J1 = {}", act.coord(0));
        assert_relative_eq!(act.coord(1), p_phi, max_relative = 1e-15);
    }

    #[test]
    fn unbound_state_is_rejected() {
        let x = Point::new(Chart::Reduced, vec![1.0, 0.0, 2.0, 0.9]).unwrap();
        assert!(matches!(
            reduced_to_action(&x, &params()),
            Err(Error::UnboundState(_))
        ));
    }

    #[test]
    fn energy_survives_the_round_trip() {
        let p = params();
        let x = probe_reduced();
        let e = model::hamiltonian_reduced(&p).eval(&x).unwrap();
        let act = reduced_to_action(&x, &p).unwrap();
        let e_act = model::hamiltonian_action(&p).eval(&act).unwrap();
        assert!((e - e_act).abs() < 1e-14);
    }

    #[test]
    fn xi_probe_values_and_energy() {
        let p = params();
        let act = reduced_to_action(&probe_reduced(), &p).unwrap();
        let xi = action_to_xi(&act, &p, 1.0).unwrap();
        assert_relative_eq!(xi.coord(1), 1.0, max_relative = 1e-12); // M = 0.9 + 0.1
        assert_relative_eq!(xi.coord(0), 0.9405, max_relative = 1e-12); // L_alpha
        let h_prime = model::hamiltonian_xi(&p).unwrap().eval(&xi).unwrap();
        assert_relative_eq!(h_prime, -0.595, max_relative = 1e-12);
    }

    #[test]
    fn xi_requires_deformation() {
        let p0 = ModelParams::new(1.0, 1.0, 0.0).unwrap();
        let act = Point::new(Chart::Action, vec![0.1, 0.9, 0.0, 0.0]).unwrap();
        assert!(matches!(
            action_to_xi(&act, &p0, 1.0),
            Err(Error::DeformationRequired(_))
        ));
    }

    #[test]
    fn pi_probe_values_and_round_trip() {
        let p = params();
        let act = reduced_to_action(&probe_reduced(), &p).unwrap();
        let pi = action_to_pi(&act, &p).unwrap();
        assert_relative_eq!(pi.coord(0), 1.650336, max_relative = 1e-5);
        assert_relative_eq!(pi.coord(1), 0.9, max_relative = 1e-15);

        let back = pi_to_action(&pi, &p, TransformMode::Corrected).unwrap();
        for i in 0..4 {
            assert!(
                (back.coord(i) - act.coord(i)).abs() < 1e-12,
                "coordinate {i} did not round-trip"
            );
        }

        let literal = pi_to_action(&pi, &p, TransformMode::Literal).unwrap();
        let residual = (literal.coord(0) - act.coord(0)).abs();
        assert_relative_eq!(residual, 0.750339, max_relative = 1e-4);
    }

    #[test]
    fn linear_flow_probe_rates() {
        let p = params();
        // V = 1 -> both action angles advance by t
        let act = Point::new(Chart::Action, vec![0.3, 0.7, 0.0, 0.0]).unwrap();
        let moved = flow_linear(&act, &p, 1.0).unwrap();
        assert_relative_eq!(moved.coord(2), 1.0, max_relative = 1e-14);
        assert_relative_eq!(moved.coord(3), 1.0, max_relative = 1e-14);
        // t = 0 is the identity
        let frozen = flow_linear(&act, &p, 0.0).unwrap();
        assert_eq!(frozen.coords(), act.coords());
        // xi angles advance by ±t/(m alpha)
        let xi = Point::new(Chart::Xi, vec![0.9405, 1.0, 0.0, 0.0]).unwrap();
        let moved = flow_linear(&xi, &p, p.m * p.alpha).unwrap();
        assert_relative_eq!(moved.coord(2), 1.0, max_relative = 1e-14);
        assert_relative_eq!(moved.coord(3), -1.0, max_relative = 1e-14);
    }

    #[test]
    fn angle_extraction_matches_the_flow() {
        // integrate nothing: advance the reduced state along the exact orbit by
        // checking that action angles grow linearly between two radial phases.
        let p = params();
        let x = probe_reduced(); // apoapsis, mean anomaly = pi
        let act = reduced_to_action(&x, &p).unwrap();
        assert_relative_eq!(act.coord(2), std::f64::consts::PI, max_relative = 1e-12);
    }

    #[test]
    fn frequency_ratios() {
        let p = params();
        let eng = DiffEngine::default();
        let act = reduced_to_action(&probe_reduced(), &p).unwrap();
        assert_relative_eq!(
            xi_frequency_ratio(&act, &p, 1.0).unwrap(),
            1.0,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            chi1_frequency_ratio(&act, &p, &eng).unwrap(),
            0.5,
            max_relative = 1e-9
        );
        assert_relative_eq!(
            chi2_frequency_ratio(&act, &p, &eng).unwrap(),
            1.0,
            max_relative = 1e-9
        );
    }
}
