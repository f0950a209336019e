//! Grid specifications and the data-parallel point map.
//!
//! Scans evaluate one closure per grid point.  With the `parallel` feature
//! (default) the map fans out over a rayon pool; results are collected in
//! input order either way, so output is deterministic.

use crate::chart::Chart;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct GridAxis {
    pub name: String,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl GridAxis {
    pub fn value(&self, i: usize) -> f64 {
        if self.count <= 1 {
            self.min
        } else {
            self.min + (self.max - self.min) * (i as f64) / ((self.count - 1) as f64)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub axes: Vec<GridAxis>,
}

impl GridSpec {
    /// Parse "name=min:max:count,name=min:max:count,...".
    pub fn parse(s: &str) -> Result<Self> {
        let mut axes = Vec::new();
        for part in s.split(',').filter(|p| !p.trim().is_empty()) {
            let (name, range) = part.split_once('=').ok_or_else(|| {
                Error::InvalidConfig(format!("grid axis '{part}' is not name=min:max:count"))
            })?;
            let fields: Vec<&str> = range.split(':').collect();
            if fields.len() != 3 {
                return Err(Error::InvalidConfig(format!(
                    "grid axis '{part}' is not name=min:max:count"
                )));
            }
            let parse_f = |t: &str| -> Result<f64> {
                t.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidConfig(format!("bad number '{t}' in grid spec")))
            };
            let count: usize = fields[2]
                .trim()
                .parse()
                .map_err(|_| Error::InvalidConfig(format!("bad count '{}'", fields[2])))?;
            if count == 0 {
                return Err(Error::InvalidConfig("grid axis count must be > 0".into()));
            }
            axes.push(GridAxis {
                name: name.trim().to_string(),
                min: parse_f(fields[0])?,
                max: parse_f(fields[1])?,
                count,
            });
        }
        if axes.is_empty() {
            return Err(Error::InvalidConfig("empty grid".into()));
        }
        Ok(GridSpec { axes })
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.count).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Row-major enumeration of the grid (last axis fastest).
    pub fn points(&self) -> Vec<Vec<f64>> {
        let total = self.len();
        let mut out = Vec::with_capacity(total);
        for mut idx in 0..total {
            let mut coords = vec![0.0; self.axes.len()];
            for (k, axis) in self.axes.iter().enumerate().rev() {
                coords[k] = axis.value(idx % axis.count);
                idx /= axis.count;
            }
            out.push(coords);
        }
        out
    }

    /// Embed grid coordinates into full chart coordinates, filling axes the
    /// grid does not name with the supplied defaults.
    pub fn embed(&self, chart: Chart, defaults: &[f64]) -> Result<Vec<Vec<f64>>> {
        let names = chart.coordinate_names();
        if defaults.len() != names.len() {
            return Err(Error::InvalidConfig("defaults arity mismatch".into()));
        }
        let mut slots = Vec::with_capacity(self.axes.len());
        for axis in &self.axes {
            let idx = names.iter().position(|n| *n == axis.name).ok_or_else(|| {
                Error::InvalidConfig(format!(
                    "grid axis '{}' is not a {chart} coordinate",
                    axis.name
                ))
            })?;
            slots.push(idx);
        }
        Ok(self
            .points()
            .into_iter()
            .map(|pt| {
                let mut full = defaults.to_vec();
                for (slot, v) in slots.iter().zip(pt) {
                    full[*slot] = v;
                }
                full
            })
            .collect())
    }
}

/// Sequential map, always available.
pub fn map_slice_seq<I: Sync, T: Send>(items: &[I], f: impl Fn(&I) -> T + Sync) -> Vec<T> {
    items.iter().map(f).collect()
}

/// Rayon-backed map; order of results matches input order.
#[cfg(feature = "parallel")]
pub fn map_slice_par<I: Sync, T: Send>(items: &[I], f: impl Fn(&I) -> T + Send + Sync) -> Vec<T> {
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

/// Feature-dispatched map used by scans and suite grids.
#[cfg(feature = "parallel")]
pub fn map_slice<I: Sync, T: Send>(items: &[I], f: impl Fn(&I) -> T + Send + Sync) -> Vec<T> {
    map_slice_par(items, f)
}

#[cfg(not(feature = "parallel"))]
pub fn map_slice<I: Sync, T: Send>(items: &[I], f: impl Fn(&I) -> T + Send + Sync) -> Vec<T> {
    map_slice_seq(items, f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_enumerate() {
        let g = GridSpec::parse("J1=0.1:1:3,J2=0:1:2").unwrap();
        assert_eq!(g.len(), 6);
        let pts = g.points();
        assert_eq!(pts[0], vec![0.1, 0.0]);
        assert_eq!(pts[1], vec![0.1, 1.0]);
        assert_eq!(pts[2], vec![0.55, 0.0]);
        assert_eq!(pts[5], vec![1.0, 1.0]);
    }

    #[test]
    fn rejects_malformed_specs() {
        assert!(GridSpec::parse("").is_err());
        assert!(GridSpec::parse("J1=0.1:1").is_err());
        assert!(GridSpec::parse("J1=a:1:3").is_err());
        assert!(GridSpec::parse("J1=0:1:0").is_err());
    }

    #[test]
    fn embeds_into_chart_coordinates() {
        let g = GridSpec::parse("J1=0.1:0.2:2").unwrap();
        let full = g.embed(Chart::Action, &[0.0, 0.7, 0.25, 0.75]).unwrap();
        assert_eq!(full[0], vec![0.1, 0.7, 0.25, 0.75]);
        assert_eq!(full[1], vec![0.2, 0.7, 0.25, 0.75]);
        assert!(g.embed(Chart::Reduced, &[1.0, 0.0, 0.0, 0.9]).is_err());
    }

    #[test]
    fn parallel_and_sequential_agree() {
        let items: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let seq = map_slice_seq(&items, |x| x * x);
        let dispatched = map_slice(&items, |x| x * x);
        assert_eq!(seq, dispatched);
    }
}
