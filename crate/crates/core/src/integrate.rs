//! Time integration of the deformed dynamics with conserved-quantity
//! monitoring.
//!
//! Two steppers: an embedded Dormand-Prince 5(4) pair with PI-free step
//! control, and a fixed-step implicit midpoint rule (fixed-point iteration,
//! tolerance 1e-13, at most 50 sweeps) for the non-separable reduced
//! Hamiltonian.  Integrations stop with `DomainViolation` before the
//! potential's singularity: the radial guard is r ≥ 1e-6.

use std::collections::BTreeMap;

use crate::chart::{Chart, Point};
use crate::error::{Error, Result};
use crate::invariants::{self, MONITOR_NAMES};
use crate::model::{self, ModelParams};

/// Radial event guard: integration stops before r reaches the origin.
pub const R_MIN_GUARD: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Rk45Adaptive,
    ImplicitMidpointFixed,
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rk45" | "rk45-adaptive" => Ok(Method::Rk45Adaptive),
            "midpoint" | "implicit-midpoint" => Ok(Method::ImplicitMidpointFixed),
            other => Err(Error::InvalidConfig(format!(
                "unknown integrator '{other}'"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct IntegratorConfig {
    pub method: Method,
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Fixed step for the midpoint rule.
    pub dt: f64,
    pub t_end: f64,
    pub max_steps: usize,
}

impl IntegratorConfig {
    pub fn new(t_end: f64) -> Self {
        IntegratorConfig {
            method: Method::Rk45Adaptive,
            rel_tol: 1e-9,
            abs_tol: 1e-12,
            dt: 1e-3,
            t_end,
            max_steps: 1_000_000,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0 && self.dt > 0.0) {
            return Err(Error::InvalidConfig(
                "tolerances and dt must be positive".into(),
            ));
        }
        if !self.t_end.is_finite() || self.t_end <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "t_end must be positive, got {}",
                self.t_end
            )));
        }
        if self.max_steps == 0 {
            return Err(Error::InvalidConfig("max_steps must be positive".into()));
        }
        Ok(())
    }
}

/// Reduced-chart equations of motion: canonical Hamilton equations, or the
/// literal transcription whose angle rate carries an extra 1/m.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReducedMode {
    #[default]
    Canonical,
    Literal,
}

impl std::str::FromStr for ReducedMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "canonical" | "corrected" => Ok(ReducedMode::Canonical),
            "literal" | "paper-literal" => Ok(ReducedMode::Literal),
            other => Err(Error::InvalidConfig(format!("unknown mode '{other}'"))),
        }
    }
}

/// Time-stamped states with per-sample conserved-quantity monitors.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub chart: Chart,
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub monitors: Vec<[f64; 7]>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn monitor_names(&self) -> &'static [&'static str; 7] {
        &MONITOR_NAMES
    }

    pub fn last_state(&self) -> &[f64] {
        self.states.last().expect("non-empty trajectory")
    }

    /// Maximum |Q(t) − Q(0)| per monitored quantity.
    pub fn drift_report(&self) -> BTreeMap<String, f64> {
        let mut out = BTreeMap::new();
        if self.monitors.is_empty() {
            return out;
        }
        let first = self.monitors[0];
        for (idx, name) in MONITOR_NAMES.iter().enumerate() {
            let drift = self
                .monitors
                .iter()
                .map(|row| (row[idx] - first[idx]).abs())
                .fold(0.0, f64::max);
            out.insert((*name).to_string(), drift);
        }
        out
    }

    /// Running max-abs deviation per monitor, one row per sample.
    pub fn running_drift(&self) -> Vec<[f64; 7]> {
        let mut out = Vec::with_capacity(self.monitors.len());
        if self.monitors.is_empty() {
            return out;
        }
        let first = self.monitors[0];
        let mut acc = [0.0_f64; 7];
        for row in &self.monitors {
            for i in 0..7 {
                acc[i] = acc[i].max((row[i] - first[i]).abs());
            }
            out.push(acc);
        }
        out
    }
}

type Rhs<'a> = dyn Fn(f64, &[f64]) -> Result<Vec<f64>> + 'a;
type Monitor<'a> = dyn Fn(f64, &[f64]) -> Result<[f64; 7]> + 'a;

// Dormand-Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
// Difference between the 5th- and embedded 4th-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

struct RawTrajectory {
    times: Vec<f64>,
    states: Vec<Vec<f64>>,
}

fn rk45(rhs: &Rhs, y0: &[f64], cfg: &IntegratorConfig) -> Result<RawTrajectory> {
    let n = y0.len();
    let mut t = 0.0;
    let mut y = y0.to_vec();
    let mut times = vec![0.0];
    let mut states = vec![y.clone()];

    let mut k: Vec<Vec<f64>> = vec![vec![0.0; n]; 7];
    k[0] = rhs(t, &y).map_err(|e| at_time(e, t))?;
    let mut h = (1e-4 * cfg.t_end).clamp(1e-10, 0.1);
    let mut steps = 0usize;

    while t < cfg.t_end {
        if steps >= cfg.max_steps {
            return Err(Error::StepFailure(format!(
                "step budget {} exhausted at t = {t:.6e} (t_end = {})",
                cfg.max_steps, cfg.t_end
            )));
        }
        if h < 1e-14 * t.abs().max(1.0) {
            return Err(Error::StepFailure(format!(
                "step size underflow at t = {t:.6e}"
            )));
        }
        steps += 1;
        let h_step = h.min(cfg.t_end - t);

        let mut failed_stage = None;
        for i in 1..7 {
            let mut yi = y.clone();
            for (j, kj) in k.iter().enumerate().take(i) {
                let a = A[i][j];
                if a != 0.0 {
                    for (yv, kv) in yi.iter_mut().zip(kj.iter()) {
                        *yv += h_step * a * kv;
                    }
                }
            }
            match rhs(t + C[i] * h_step, &yi) {
                Ok(ki) => k[i] = ki,
                Err(e) => {
                    failed_stage = Some(e);
                    break;
                }
            }
        }
        if let Some(e) = failed_stage {
            // a stage left the domain: retry with a smaller step unless the
            // step is already tiny, then report the violation
            if h_step < 1e-12 * t.abs().max(1.0) {
                return Err(at_time(e, t));
            }
            h = h_step * 0.25;
            continue;
        }

        // 5th-order solution is stage 7's argument (FSAL): y7 = y + h Σ a7j kj
        let mut y5 = y.clone();
        for (j, kj) in k.iter().enumerate().take(6) {
            let a = A[6][j];
            if a != 0.0 {
                for (yv, kv) in y5.iter_mut().zip(kj.iter()) {
                    *yv += h_step * a * kv;
                }
            }
        }
        let k7 = match rhs(t + h_step, &y5) {
            Ok(v) => v,
            Err(e) => {
                if h_step < 1e-12 * t.abs().max(1.0) {
                    return Err(at_time(e, t));
                }
                h = h_step * 0.25;
                continue;
            }
        };
        k[6] = k7;

        // weighted max norm keeps every component under its tolerance
        let mut err = 0.0_f64;
        for i in 0..n {
            let mut e = 0.0;
            for (j, kj) in k.iter().enumerate() {
                e += E[j] * kj[i];
            }
            e *= h_step;
            let sc = cfg.abs_tol + cfg.rel_tol * y[i].abs().max(y5[i].abs());
            err = err.max((e / sc).abs());
        }

        if err <= 1.0 {
            t += h_step;
            y = y5;
            k[0] = k[6].clone();
            times.push(t);
            states.push(y.clone());
            let fac = if err == 0.0 {
                4.0
            } else {
                (0.8 * err.powf(-0.2)).clamp(0.2, 4.0)
            };
            h = h_step * fac;
        } else {
            h = h_step * (0.8 * err.powf(-0.2)).max(0.2);
        }
    }
    Ok(RawTrajectory { times, states })
}

fn implicit_midpoint(rhs: &Rhs, y0: &[f64], cfg: &IntegratorConfig) -> Result<RawTrajectory> {
    let mut t = 0.0;
    let mut y = y0.to_vec();
    let mut times = vec![0.0];
    let mut states = vec![y.clone()];
    let total = (cfg.t_end / cfg.dt).ceil() as usize;
    if total > cfg.max_steps {
        return Err(Error::StepFailure(format!(
            "{total} fixed steps needed but max_steps = {}",
            cfg.max_steps
        )));
    }
    for _ in 0..total {
        let h = cfg.dt.min(cfg.t_end - t);
        if h <= 0.0 {
            break;
        }
        let f0 = rhs(t, &y).map_err(|e| at_time(e, t))?;
        let mut z: Vec<f64> = y.iter().zip(&f0).map(|(yi, fi)| yi + h * fi).collect();
        let mut converged = false;
        for _ in 0..50 {
            let mid: Vec<f64> = y.iter().zip(&z).map(|(a, b)| 0.5 * (a + b)).collect();
            let fm = rhs(t + 0.5 * h, &mid).map_err(|e| at_time(e, t))?;
            let znew: Vec<f64> = y.iter().zip(&fm).map(|(yi, fi)| yi + h * fi).collect();
            let delta = z
                .iter()
                .zip(&znew)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            let scale = znew.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
            z = znew;
            if delta < 1e-13 * scale {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::StepFailure(format!(
                "midpoint fixed-point iteration stalled at t = {t:.6e}"
            )));
        }
        t += h;
        y = z;
        times.push(t);
        states.push(y.clone());
    }
    Ok(RawTrajectory { times, states })
}

fn at_time(e: Error, t: f64) -> Error {
    match e {
        Error::DomainViolation(msg) => {
            Error::DomainViolation(format!("{msg}; last good time t = {t:.9e}"))
        }
        other => other,
    }
}

fn run(
    chart: Chart,
    rhs: &Rhs,
    monitor: &Monitor,
    y0: &[f64],
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    cfg.validate()?;
    let raw = match cfg.method {
        Method::Rk45Adaptive => rk45(rhs, y0, cfg)?,
        Method::ImplicitMidpointFixed => implicit_midpoint(rhs, y0, cfg)?,
    };
    let mut monitors = Vec::with_capacity(raw.times.len());
    for (t, state) in raw.times.iter().zip(&raw.states) {
        monitors.push(monitor(*t, state)?);
    }
    Ok(Trajectory {
        chart,
        times: raw.times,
        states: raw.states,
        monitors,
    })
}

fn radius_guard(r: f64) -> Result<f64> {
    if r < R_MIN_GUARD {
        Err(Error::DomainViolation(format!(
            "radius {r:.3e} fell below the guard {R_MIN_GUARD:.1e}"
        )))
    } else {
        Ok(r)
    }
}

/// Integrate the first-order deformed system on the Cartesian chart:
/// q̇ⁱ = pⁱ/m + Θ^{ij} ∂V/∂qʲ, ṗᵢ = −∂V/∂qⁱ.
pub fn integrate_cartesian(
    x0: &Point,
    p: &ModelParams,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    x0.expect_chart(Chart::Cartesian)?;
    let (m, k, alpha) = (p.m, p.k, p.alpha);
    let rhs = move |_t: f64, y: &[f64]| -> Result<Vec<f64>> {
        let r = radius_guard((y[0] * y[0] + y[1] * y[1] + y[2] * y[2]).sqrt())?;
        let r3 = r * r * r;
        let (dv0, dv1, dv2) = (k * y[0] / r3, k * y[1] / r3, k * y[2] / r3);
        Ok(vec![
            y[3] / m + alpha * dv1,
            y[4] / m - alpha * dv0,
            y[5] / m,
            -dv0,
            -dv1,
            -dv2,
        ])
    };
    let monitor = move |_t: f64, y: &[f64]| -> Result<[f64; 7]> {
        let pt = Point::new(Chart::Cartesian, y.to_vec())?;
        invariants::monitor_row_cartesian(&pt, p)
    };
    run(Chart::Cartesian, &rhs, &monitor, x0.coords(), cfg)
}

/// Integrate the reduced dynamics in (r, φ_α, p_r, p_φα).
pub fn integrate_reduced(
    x0: &Point,
    p: &ModelParams,
    cfg: &IntegratorConfig,
    mode: ReducedMode,
) -> Result<Trajectory> {
    x0.expect_chart(Chart::Reduced)?;
    let (m, k) = (p.m, p.k);
    let angle_scale = match mode {
        ReducedMode::Canonical => 1.0,
        ReducedMode::Literal => 1.0 / m,
    };
    let rhs = move |_t: f64, y: &[f64]| -> Result<Vec<f64>> {
        let r = radius_guard(y[0])?;
        let p_phi = y[3];
        Ok(vec![
            y[2] / m,
            angle_scale * p_phi / (m * r * r),
            p_phi * p_phi / (m * r * r * r) - k / (r * r),
            0.0,
        ])
    };
    let monitor = move |t: f64, y: &[f64]| -> Result<[f64; 7]> {
        let pt = Point::new(Chart::Reduced, y.to_vec())?;
        invariants::monitor_row_reduced(&pt, p, t)
    };
    run(Chart::Reduced, &rhs, &monitor, x0.coords(), cfg)
}

/// Second-order (position, velocity) trajectory of the corrected second law;
/// the cross-check companion of [`integrate_cartesian`].
#[derive(Debug, Clone)]
pub struct NewtonTrajectory {
    pub times: Vec<f64>,
    /// Rows (q1, q2, q3, v1, v2, v3).
    pub states: Vec<Vec<f64>>,
}

pub fn integrate_newton(
    q0: &[f64; 3],
    v0: &[f64; 3],
    p: &ModelParams,
    cfg: &IntegratorConfig,
) -> Result<NewtonTrajectory> {
    cfg.validate()?;
    let rhs = move |_t: f64, y: &[f64]| -> Result<Vec<f64>> {
        let q = [y[0], y[1], y[2]];
        let v = [y[3], y[4], y[5]];
        radius_guard((q[0] * q[0] + q[1] * q[1] + q[2] * q[2]).sqrt())?;
        let a = model::newton_acceleration(&q, &v, p)?;
        Ok(vec![v[0], v[1], v[2], a[0], a[1], a[2]])
    };
    let y0 = [q0[0], q0[1], q0[2], v0[0], v0[1], v0[2]];
    let raw = match cfg.method {
        Method::Rk45Adaptive => rk45(&rhs, &y0, cfg)?,
        Method::ImplicitMidpointFixed => implicit_midpoint(&rhs, &y0, cfg)?,
    };
    Ok(NewtonTrajectory {
        times: raw.times,
        states: raw.states,
    })
}

/// Initial velocity matching the first-order deformed system:
/// v = p/m + Θ ∇V(q).
pub fn velocity_from_momentum(q: &[f64; 3], mom: &[f64; 3], p: &ModelParams) -> [f64; 3] {
    let r = (q[0] * q[0] + q[1] * q[1] + q[2] * q[2]).sqrt();
    let r3 = r * r * r;
    [
        mom[0] / p.m + p.alpha * p.k * q[1] / r3,
        mom[1] / p.m - p.alpha * p.k * q[0] / r3,
        mom[2] / p.m,
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    fn params(alpha: f64) -> ModelParams {
        ModelParams::new(1.0, 1.0, alpha).unwrap()
    }

    fn circular_seed() -> Point {
        Point::new(Chart::Cartesian, vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.0]).unwrap()
    }

    #[test]
    fn undeformed_circular_orbit_closes() {
        let p = params(0.0);
        let cfg = IntegratorConfig::new(TAU);
        let traj = integrate_cartesian(&circular_seed(), &p, &cfg).unwrap();
        let last = traj.last_state();
        for (a, b) in last.iter().zip(circular_seed().coords()) {
            assert!((a - b).abs() < 1e-6, "state did not return: {last:?}");
        }
        assert!(traj.drift_report()["H"] < 1e-9);
        assert!(traj.drift_report()["L3"] < 1e-9);
    }

    #[test]
    fn deformed_flow_conserves_h_m_l_alpha() {
        let p = params(0.1);
        let cfg = IntegratorConfig::new(50.0);
        // circular seed: tight conservation over a long run
        let traj = integrate_cartesian(&circular_seed(), &p, &cfg).unwrap();
        let drift = traj.drift_report();
        assert!(drift["H"] < 1e-8, "H drift {}", drift["H"]);
        assert!(drift["M"] < 1e-8, "M drift {}", drift["M"]);
        assert!(drift["L_alpha"] < 1e-8);
        // eccentric seed: still well conserved, but L3 alone is not
        let x0 = Point::new(Chart::Cartesian, vec![1.0, 0.0, 0.0, 0.0, 0.9, 0.0]).unwrap();
        let traj = integrate_cartesian(&x0, &p, &cfg).unwrap();
        let drift = traj.drift_report();
        assert!(drift["H"] < 1e-7, "H drift {}", drift["H"]);
        assert!(drift["M"] < 1e-7, "M drift {}", drift["M"]);
        assert!(drift["L_alpha"] < 1e-7);
        assert!(drift["L3"] > 1e-4);
    }

    #[test]
    fn step_budget_failure() {
        let p = params(0.0);
        let mut cfg = IntegratorConfig::new(100.0);
        cfg.max_steps = 1;
        assert!(matches!(
            integrate_cartesian(&circular_seed(), &p, &cfg),
            Err(Error::StepFailure(_))
        ));
    }

    #[test]
    fn reduced_orbit_stays_between_turning_points() {
        let p = params(0.1);
        let x0 = Point::new(Chart::Reduced, vec![1.0, 0.0, 0.0, 0.9]).unwrap();
        let cfg = IntegratorConfig::new(10.0);
        let traj = integrate_reduced(&x0, &p, &cfg, ReducedMode::Canonical).unwrap();
        // turning points of the effective potential at E = -0.595, p_phi = 0.9:
        // E r^2 + k r - p_phi^2/2m = 0 -> r- = 0.680672..., r+ = 1.
        // samples never cross them and come within sampling distance of both
        let r_lo = 0.680672268907563_f64;
        let (mut rmin, mut rmax) = (f64::INFINITY, 0.0_f64);
        for s in &traj.states {
            rmin = rmin.min(s[0]);
            rmax = rmax.max(s[0]);
        }
        assert!(rmax <= 1.0 + 1e-9 && 1.0 - rmax < 1e-5, "rmax {rmax}");
        assert!(rmin >= r_lo - 1e-9 && rmin - r_lo < 1e-5, "rmin {rmin}");
        assert!(traj.drift_report()["H"] < 1e-9);
    }

    #[test]
    fn radial_plunge_hits_the_guard() {
        let p = params(0.0);
        let x0 = Point::new(Chart::Reduced, vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        let cfg = IntegratorConfig::new(10.0);
        let err = integrate_reduced(&x0, &p, &cfg, ReducedMode::Canonical);
        match err {
            Err(Error::DomainViolation(msg)) => {
                assert!(msg.contains("last good time"), "message: {msg}")
            }
            other => panic!("expected DomainViolation, got {other:?}"),
        }
    }

    #[test]
    fn literal_mode_matches_canonical_at_unit_mass() {
        let p = params(0.1);
        let x0 = Point::new(Chart::Reduced, vec![1.0, 0.0, 0.0, 0.9]).unwrap();
        let cfg = IntegratorConfig::new(5.0);
        let a = integrate_reduced(&x0, &p, &cfg, ReducedMode::Canonical).unwrap();
        let b = integrate_reduced(&x0, &p, &cfg, ReducedMode::Literal).unwrap();
        assert_eq!(a.times.len(), b.times.len());
        for (sa, sb) in a.states.iter().zip(&b.states) {
            for (va, vb) in sa.iter().zip(sb) {
                assert!((va - vb).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn literal_mode_angle_rate_scales_with_inverse_mass() {
        let p = ModelParams::new(2.0, 1.0, 0.1).unwrap();
        let x0 = Point::new(Chart::Reduced, vec![1.0, 0.0, 0.0, 0.9]).unwrap();
        let lit = model::vector_field(&p, model::FieldKind::ReducedLiteral).unwrap();
        let can = model::vector_field(&p, model::FieldKind::ReducedCanonical).unwrap();
        let vl = lit.components(&x0).unwrap();
        let vc = can.components(&x0).unwrap();
        assert!((vl[1] / vc[1] - 1.0 / p.m).abs() < 1e-14);
        assert_eq!(vl[0], vc[0]);
        assert_eq!(vl[2], vc[2]);
    }

    #[test]
    fn second_order_and_first_order_pictures_agree() {
        let p = params(0.1);
        let q0 = [1.0, 0.0, 0.0];
        let mom0 = [0.0, 0.9, 0.0];
        let v0 = velocity_from_momentum(&q0, &mom0, &p);
        let cfg = IntegratorConfig::new(10.0);
        let x0 = Point::new(
            Chart::Cartesian,
            vec![q0[0], q0[1], q0[2], mom0[0], mom0[1], mom0[2]],
        )
        .unwrap();
        let first = integrate_cartesian(&x0, &p, &cfg).unwrap();
        let second = integrate_newton(&q0, &v0, &p, &cfg).unwrap();
        let qa = first.last_state();
        let qb = second.states.last().unwrap();
        for i in 0..3 {
            assert!(
                (qa[i] - qb[i]).abs() < 1e-6,
                "component {i}: {} vs {}",
                qa[i],
                qb[i]
            );
        }
    }

    #[test]
    fn tightening_tolerances_reduces_energy_drift() {
        let p = params(0.1);
        let x0 = Point::new(Chart::Cartesian, vec![1.0, 0.0, 0.0, 0.0, 0.9, 0.0]).unwrap();
        let mut drifts = Vec::new();
        for rel in [1e-5, 1e-6, 1e-7] {
            let mut cfg = IntegratorConfig::new(20.0);
            cfg.rel_tol = rel;
            cfg.abs_tol = rel * 1e-3;
            let traj = integrate_cartesian(&x0, &p, &cfg).unwrap();
            drifts.push(traj.drift_report()["H"]);
        }
        for w in drifts.windows(2) {
            assert!(w[1] < 4.0 * w[0], "drift sequence {drifts:?}");
        }
        assert!(drifts[2] < drifts[0], "no overall reduction: {drifts:?}");
    }

    #[test]
    fn midpoint_rule_bounds_energy_drift() {
        let p = params(0.1);
        let x0 = Point::new(Chart::Reduced, vec![1.0, 0.0, 0.0, 0.9]).unwrap();
        let mut cfg = IntegratorConfig::new(3.0);
        cfg.method = Method::ImplicitMidpointFixed;
        let traj = integrate_reduced(&x0, &p, &cfg, ReducedMode::Canonical).unwrap();
        assert!(traj.drift_report()["H"] < 1e-5);
        // p_phi is exactly flat under the reduced flow
        assert!(traj.drift_report()["L3"] < 1e-13);
    }

    #[test]
    fn single_sample_trajectory_has_zero_drift() {
        let traj = Trajectory {
            chart: Chart::Reduced,
            times: vec![0.0],
            states: vec![vec![1.0, 0.0, 0.0, 0.9]],
            monitors: vec![[1.0; 7]],
        };
        assert!(traj.drift_report().values().all(|v| *v == 0.0));
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let mut cfg = IntegratorConfig::new(0.0);
        assert!(cfg.validate().is_err());
        cfg.t_end = 1.0;
        cfg.rel_tol = -1.0;
        assert!(cfg.validate().is_err());
    }
}
