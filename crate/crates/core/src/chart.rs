//! Phase-space charts and validated points.
//!
//! Five charts cover the system:
//!
//! * `Cartesian` — (q¹, q², q³, p₁, p₂, p₃) on T*(ℝ³∖{0});
//! * `Reduced`   — (r, φ_α, p_r, p_φα), the equatorial reduction;
//! * `Action`    — (J₁, J₂, φ¹, φ²), action-angle variables of the bound problem;
//! * `Xi`        — (ξ₁, ξ₂, φ¹, φ²) built from the constants of motion L_α, M;
//! * `Pi`        — (π₁, π₂, χ¹, χ²) built from |Γ|² and p_φα.
//!
//! Sign conventions, fixed once and inherited everywhere: each chart carries
//! ordered canonical pairs `(first, second)` with `{first, second} = +1`.
//! On the cotangent-type charts (`Cartesian`, `Reduced`) the pair is
//! (coordinate, momentum) and the Hamiltonian flow is q̇ = +∂H/∂p,
//! ṗ = −∂H/∂q.  On the action-type charts (`Action`, `Xi`, `Pi`) the pair is
//! (action, angle) and the flow is angle-rate = +∂H/∂action, so that
//! ι_{X_H}ω = −dH holds for ω = Σ d(action) ∧ d(angle).

use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Chart {
    Cartesian,
    Reduced,
    Action,
    Xi,
    Pi,
}

impl Chart {
    pub fn dim(self) -> usize {
        match self {
            Chart::Cartesian => 6,
            _ => 4,
        }
    }

    pub fn coordinate_names(self) -> &'static [&'static str] {
        match self {
            Chart::Cartesian => &["q1", "q2", "q3", "p1", "p2", "p3"],
            Chart::Reduced => &["r", "phi_alpha", "p_r", "p_phi"],
            Chart::Action => &["J1", "J2", "phi1", "phi2"],
            Chart::Xi => &["xi1", "xi2", "phi1", "phi2"],
            Chart::Pi => &["pi1", "pi2", "chi1", "chi2"],
        }
    }

    /// Ordered canonical pairs `(first, second)` with `{first, second} = +1`.
    pub fn canonical_pairs(self) -> &'static [(usize, usize)] {
        match self {
            Chart::Cartesian => &[(0, 3), (1, 4), (2, 5)],
            _ => &[(0, 2), (1, 3)],
        }
    }

    /// Signed distance to the validity boundary (+inf when unconstrained).
    ///
    /// Positive inside the chart.  Derivative stencils refuse points closer
    /// than ten steps to the boundary instead of silently one-siding.
    pub fn margin(self, coords: &[f64]) -> f64 {
        match self {
            Chart::Cartesian => {
                (coords[0] * coords[0] + coords[1] * coords[1] + coords[2] * coords[2]).sqrt()
            }
            Chart::Reduced => coords[0],
            Chart::Action => coords[0] + coords[1],
            Chart::Xi => (coords[0]).min(coords[1] - coords[0]),
            Chart::Pi => coords[0] - coords[1] * coords[1],
        }
    }

    pub fn validate(self, coords: &[f64]) -> Result<()> {
        if coords.len() != self.dim() {
            return Err(Error::InvalidConfig(format!(
                "{self} expects {} coordinates, got {}",
                self.dim(),
                coords.len()
            )));
        }
        for (i, c) in coords.iter().enumerate() {
            if !c.is_finite() {
                return Err(Error::NonFinite(format!(
                    "coordinate {} of {self} is {c}",
                    self.coordinate_names()[i]
                )));
            }
        }
        if self.margin(coords) <= 0.0 {
            return Err(Error::DomainViolation(format!(
                "point {:?} outside the validity region of {self} ({})",
                coords,
                self.region_description()
            )));
        }
        Ok(())
    }

    fn region_description(self) -> &'static str {
        match self {
            Chart::Cartesian => "(q1,q2,q3) != 0",
            Chart::Reduced => "r > 0",
            Chart::Action => "J1 + J2 > 0",
            Chart::Xi => "xi2 > xi1 > 0",
            Chart::Pi => "pi1 > pi2^2",
        }
    }
}

impl fmt::Display for Chart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Chart::Cartesian => "cartesian",
            Chart::Reduced => "reduced",
            Chart::Action => "action",
            Chart::Xi => "xi",
            Chart::Pi => "pi",
        };
        write!(f, "{name}")
    }
}

impl std::str::FromStr for Chart {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cartesian" => Ok(Chart::Cartesian),
            "reduced" => Ok(Chart::Reduced),
            "action" => Ok(Chart::Action),
            "xi" => Ok(Chart::Xi),
            "pi" => Ok(Chart::Pi),
            other => Err(Error::InvalidConfig(format!("unknown chart '{other}'"))),
        }
    }
}

/// A validated point of phase space, tagged by its chart.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    chart: Chart,
    coords: Vec<f64>,
}

impl Point {
    pub fn new(chart: Chart, coords: Vec<f64>) -> Result<Self> {
        chart.validate(&coords)?;
        Ok(Point { chart, coords })
    }

    pub fn chart(&self) -> Chart {
        self.chart
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn coord(&self, i: usize) -> f64 {
        self.coords[i]
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// Copy of this point with coordinate `i` shifted by `delta`,
    /// re-validated against the chart region.
    pub fn shifted(&self, i: usize, delta: f64) -> Result<Point> {
        let mut coords = self.coords.clone();
        coords[i] += delta;
        Point::new(self.chart, coords)
    }

    pub(crate) fn expect_chart(&self, chart: Chart) -> Result<()> {
        if self.chart == chart {
            Ok(())
        } else {
            Err(Error::ChartMismatch {
                expected: chart,
                got: self.chart,
            })
        }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.chart)?;
        for (i, (name, v)) in self
            .chart
            .coordinate_names()
            .iter()
            .zip(self.coords.iter())
            .enumerate()
        {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{name}={v}")?;
        }
        write!(f, ")")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dims_and_names_agree() {
        for chart in [
            Chart::Cartesian,
            Chart::Reduced,
            Chart::Action,
            Chart::Xi,
            Chart::Pi,
        ] {
            assert_eq!(chart.dim(), chart.coordinate_names().len());
        }
    }

    #[test]
    fn rejects_origin_in_cartesian() {
        let err = Point::new(Chart::Cartesian, vec![0.0, 0.0, 0.0, 0.1, 0.2, 0.3]);
        assert!(matches!(err, Err(Error::DomainViolation(_))));
    }

    #[test]
    fn rejects_unordered_xi() {
        // needs xi2 > xi1 > 0
        assert!(Point::new(Chart::Xi, vec![1.0, 0.9, 0.0, 0.0]).is_err());
        assert!(Point::new(Chart::Xi, vec![0.9405, 1.0, 0.0, 0.0]).is_ok());
    }

    #[test]
    fn rejects_pi_below_parabola() {
        assert!(Point::new(Chart::Pi, vec![0.8, 0.9, 0.0, 0.0]).is_err());
        assert!(Point::new(Chart::Pi, vec![1.65, 0.9, 0.0, 0.0]).is_ok());
    }

    #[test]
    fn rejects_non_finite() {
        let err = Point::new(Chart::Reduced, vec![1.0, f64::NAN, 0.0, 0.9]);
        assert!(matches!(err, Err(Error::NonFinite(_))));
    }

    #[test]
    fn shifted_revalidates() {
        let x = Point::new(Chart::Reduced, vec![1e-7, 0.0, 0.0, 0.9]).unwrap();
        assert!(x.shifted(0, -2e-7).is_err());
    }
}
