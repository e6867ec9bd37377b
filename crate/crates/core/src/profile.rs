//! Radial grids and sampled radial functions.

use serde::Serialize;

use crate::error::{Error, Result};

/// Grid spacing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Spacing {
    Geometric,
    Uniform,
}

/// `n` increasing radii between `lo` and `hi` inclusive.
pub fn radial_grid(lo: f64, hi: f64, n: usize, spacing: Spacing) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::TooFewSamples { needed: 2, got: n });
    }
    if !(hi > lo) {
        return Err(Error::DomainError(format!("empty grid range [{lo}, {hi}]")));
    }
    let last = (n - 1) as f64;
    Ok(match spacing {
        Spacing::Uniform => (0..n).map(|i| lo + (hi - lo) * i as f64 / last).collect(),
        Spacing::Geometric => {
            if !(lo > 0.0) {
                return Err(Error::DomainError(format!(
                    "geometric grid needs a positive lower end, got {lo}"
                )));
            }
            let (a, b) = (lo.ln(), hi.ln());
            let mut g: Vec<f64> = (0..n).map(|i| (a + (b - a) * i as f64 / last).exp()).collect();
            g[0] = lo;
            g[n - 1] = hi;
            g
        }
    })
}

/// A scalar function sampled on an increasing radial grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialProfile {
    pub name: String,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
}

impl RadialProfile {
    pub fn new(name: impl Into<String>, grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(Error::DomainError(format!(
                "grid has {} points but {} values",
                grid.len(),
                values.len()
            )));
        }
        Ok(Self {
            name: name.into(),
            grid,
            values,
        })
    }

    /// Samples `f` on `grid`.
    pub fn sample<F: Fn(f64) -> f64>(name: impl Into<String>, grid: &[f64], f: F) -> Self {
        Self {
            name: name.into(),
            grid: grid.to_vec(),
            values: grid.iter().map(|&r| f(r)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Writes `columns` as CSV with `header`. Values use the shortest
/// round-trip representation so output is byte-stable.
pub fn write_csv(header: &[&str], columns: &[&[f64]]) -> String {
    let rows = columns.first().map_or(0, |c| c.len());
    let mut out = header.join(",");
    out.push('\n');
    for i in 0..rows {
        let line: Vec<String> = columns.iter().map(|c| format!("{:e}", c[i])).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids_hit_endpoints() {
        let g = radial_grid(1e-3, 30.0, 400, Spacing::Geometric).unwrap();
        assert_eq!(g.len(), 400);
        assert_eq!(g[0], 1e-3);
        assert_eq!(g[399], 30.0);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
        let u = radial_grid(0.0, 1.0, 5, Spacing::Uniform).unwrap();
        assert_eq!(u, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert!(radial_grid(0.0, 1.0, 5, Spacing::Geometric).is_err());
        assert!(radial_grid(1.0, 1.0, 5, Spacing::Uniform).is_err());
    }

    #[test]
    fn csv_layout() {
        let s = write_csv(&["r", "v"], &[&[1.0, 2.5], &[0.1, -3.0]]);
        assert_eq!(s, "r,v\n1e0,1e-1\n2.5e0,-3e0\n");
    }
}
