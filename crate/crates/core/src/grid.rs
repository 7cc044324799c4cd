use serde::{Deserialize, Serialize};

use crate::density::RadialDensity;
use crate::error::{Error, Result};

/// Uniform tensor grid on the periodic box `[-L, L)^d`.
///
/// Axis nodes are `x_i = -L + iδ` for `i = 0..N`, with `δ = 2L/N` and `N`
/// even, so `x_{N/2} = 0`. Grid functions are stored row-major.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    dim: usize,
    half_width: f64,
    points_per_axis: usize,
}

impl Grid {
    pub fn new(dim: usize, half_width: f64, points_per_axis: usize) -> Result<Self> {
        if !(dim == 1 || dim == 2) {
            return Err(Error::InvalidConfig(format!("grid dim must be 1 or 2, got {dim}")));
        }
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::InvalidConfig(format!("half-width must be positive, got {half_width}")));
        }
        if points_per_axis < 4 || points_per_axis % 2 != 0 {
            return Err(Error::InvalidConfig(format!(
                "points per axis must be even and >= 4, got {points_per_axis}"
            )));
        }
        Ok(Self {
            dim,
            half_width,
            points_per_axis,
        })
    }

    /// Smallest even `N` whose spacing does not exceed `target_spacing`.
    pub fn with_spacing(dim: usize, half_width: f64, target_spacing: f64) -> Result<Self> {
        if !(target_spacing > 0.0) {
            return Err(Error::InvalidConfig("spacing must be positive".into()));
        }
        let half = (half_width / target_spacing - 1e-9).ceil().max(2.0) as usize;
        Self::new(dim, half_width, 2 * half)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn points_per_axis(&self) -> usize {
        self.points_per_axis
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.points_per_axis as f64
    }

    /// Total number of nodes, `N^d`.
    pub fn len(&self) -> usize {
        self.points_per_axis.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Quadrature weight `δ^d` of one node.
    pub fn cell_weight(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    pub fn axis(&self, i: usize) -> f64 {
        (i as f64 - (self.points_per_axis / 2) as f64) * self.spacing()
    }

    /// Per-axis indices of a flat node index.
    pub fn multi_index(&self, idx: usize) -> [usize; 2] {
        match self.dim {
            1 => [idx, 0],
            _ => [idx / self.points_per_axis, idx % self.points_per_axis],
        }
    }

    pub fn point(&self, idx: usize) -> Vec<f64> {
        let [i, j] = self.multi_index(idx);
        match self.dim {
            1 => vec![self.axis(i)],
            _ => vec![self.axis(i), self.axis(j)],
        }
    }

    pub fn points(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|i| self.point(i)).collect()
    }

    pub fn node_norm(&self, idx: usize) -> f64 {
        (self.radial_key(idx) as f64).sqrt() * self.spacing()
    }

    /// `|x_idx|² / δ²` as an exact integer; equal keys share a radius.
    pub fn radial_key(&self, idx: usize) -> u64 {
        let c = (self.points_per_axis / 2) as i64;
        let [i, j] = self.multi_index(idx);
        let a = i as i64 - c;
        match self.dim {
            1 => (a * a) as u64,
            _ => {
                let b = j as i64 - c;
                (a * a + b * b) as u64
            }
        }
    }

    /// Flat index of the node nearest to `x` (clamped into the box).
    pub fn nearest(&self, x: &[f64]) -> usize {
        let n = self.points_per_axis;
        let snap = |v: f64| -> usize {
            let i = ((v + self.half_width) / self.spacing()).round();
            i.clamp(0.0, (n - 1) as f64) as usize
        };
        match self.dim {
            1 => snap(x[0]),
            _ => snap(x[0]) * n + snap(x[1]),
        }
    }

    /// Distance from node `idx` to the box boundary.
    pub fn edge_distance(&self, idx: usize) -> f64 {
        let p = self.point(idx);
        p.iter()
            .map(|&v| (self.half_width - v.abs()).max(0.0))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        self.cell_weight() * u.iter().zip(v).map(|(a, b)| a * b).sum::<f64>()
    }

    pub fn norm(&self, u: &[f64]) -> f64 {
        self.inner(u, u).sqrt()
    }

    /// `ρ(L)/ρ(0)` must be below `1e-12` for the box to capture the density.
    pub fn check_truncation<D: RadialDensity + ?Sized>(&self, density: &D) -> Result<f64> {
        let ratio = (density.ln_profile(self.half_width) - density.ln_profile(0.0)).exp();
        if ratio < 1e-12 {
            Ok(ratio)
        } else {
            Err(Error::InvalidConfig(format!(
                "box half-width {} too small: rho(L)/rho(0) = {ratio:e}",
                self.half_width
            )))
        }
    }

    /// Samples a radial function at every node, evaluating once per distinct radius.
    pub fn sample_radial<F>(&self, f: F) -> Result<Vec<f64>>
    where
        F: Fn(f64) -> Result<f64> + Sync,
    {
        use rayon::prelude::*;
        let mut keys: Vec<u64> = (0..self.len()).map(|i| self.radial_key(i)).collect();
        keys.sort_unstable();
        keys.dedup();
        let delta = self.spacing();
        let values: Vec<f64> = keys
            .par_iter()
            .map(|&k| f((k as f64).sqrt() * delta))
            .collect::<Result<_>>()?;
        Ok((0..self.len())
            .map(|i| {
                let k = self.radial_key(i);
                values[keys.binary_search(&k).expect("key present")]
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout() {
        let g = Grid::new(1, 2.0, 8).unwrap();
        assert_eq!(g.spacing(), 0.5);
        assert_eq!(g.axis(0), -2.0);
        assert_eq!(g.axis(4), 0.0);
        assert_eq!(g.nearest(&[0.26]), 5);
        let g2 = Grid::new(2, 1.0, 4).unwrap();
        assert_eq!(g2.len(), 16);
        assert_eq!(g2.point(6), vec![-0.5, 0.0]);
        assert_eq!(g2.radial_key(0), 8);
    }

    #[test]
    fn rejects_odd_points() {
        assert!(Grid::new(1, 1.0, 7).is_err());
        let g = Grid::with_spacing(1, 12.0, 0.18 / 40.0).unwrap();
        assert_eq!(g.points_per_axis() % 2, 0);
        assert!(g.spacing() <= 0.18 / 40.0);
    }
}
