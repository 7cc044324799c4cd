//! Second-order finite differences for `L_ρ = Δ + V` with Dirichlet walls.

use serde::Serialize;

use crate::density::RadialDensity;
use crate::grid::Grid;

use super::LinearOperator;

/// `L = Δ + V` on the interior nodes `x_i`, `i = 1..N`, of a grid, with the
/// wave function pinned to zero on the box faces `±L`.
///
/// `Δ` is the positive Laplacian. In `d = 1` the matrix is tridiagonal; in
/// `d = 2` it is the five-point stencil.
#[derive(Debug, Clone, Serialize)]
pub struct SchrodingerOperator {
    pub grid: Grid,
    /// Interior points per axis, `N - 1`.
    pub interior: usize,
    /// Diagonal entries `2d/δ² + V(x_i)`.
    pub diagonal: Vec<f64>,
    /// Off-diagonal coupling `-1/δ²`.
    pub coupling: f64,
}

impl SchrodingerOperator {
    /// Builds the operator for an arbitrary potential sampled at interior nodes.
    pub fn with_potential<F: Fn(&[f64]) -> f64>(grid: &Grid, potential: F) -> Self {
        let n = grid.points_per_axis();
        let m = n - 1;
        let delta = grid.spacing();
        let kinetic = 2.0 * grid.dim() as f64 / (delta * delta);
        let diagonal = match grid.dim() {
            1 => (1..n).map(|i| kinetic + potential(&[grid.axis(i)])).collect(),
            _ => {
                let mut d = Vec::with_capacity(m * m);
                for i in 1..n {
                    for j in 1..n {
                        d.push(kinetic + potential(&[grid.axis(i), grid.axis(j)]));
                    }
                }
                d
            }
        };
        Self {
            grid: *grid,
            interior: m,
            diagonal,
            coupling: -1.0 / (delta * delta),
        }
    }

    /// Interior node coordinates in storage order.
    pub fn points(&self) -> Vec<Vec<f64>> {
        let g = &self.grid;
        let n = g.points_per_axis();
        match g.dim() {
            1 => (1..n).map(|i| vec![g.axis(i)]).collect(),
            _ => (1..n)
                .flat_map(|i| (1..n).map(move |j| vec![g.axis(i), g.axis(j)]))
                .collect(),
        }
    }

    /// Tridiagonal `(diagonal, off-diagonal)`; only meaningful in `d = 1`.
    pub fn tridiagonal(&self) -> (Vec<f64>, Vec<f64>) {
        assert_eq!(self.grid.dim(), 1, "tridiagonal form exists only in d = 1");
        (
            self.diagonal.clone(),
            vec![self.coupling; self.diagonal.len().saturating_sub(1)],
        )
    }

    /// Gershgorin upper bound of the spectrum.
    pub fn upper_bound(&self) -> f64 {
        let neighbours = 2.0 * self.grid.dim() as f64;
        self.diagonal.iter().copied().fold(f64::NEG_INFINITY, f64::max) + neighbours * self.coupling.abs()
    }

    pub fn lower_bound(&self) -> f64 {
        let neighbours = 2.0 * self.grid.dim() as f64;
        self.diagonal.iter().copied().fold(f64::INFINITY, f64::min) - neighbours * self.coupling.abs()
    }
}

/// `L_ρ` for a density, `V = -Δρ/ρ`.
pub fn build_schrodinger<D: RadialDensity + ?Sized>(grid: &Grid, density: &D) -> SchrodingerOperator {
    SchrodingerOperator::with_potential(grid, |x| density.potential(x))
}

impl LinearOperator for SchrodingerOperator {
    fn dim(&self) -> usize {
        self.diagonal.len()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let m = self.interior;
        let c = self.coupling;
        match self.grid.dim() {
            1 => {
                for i in 0..m {
                    let mut s = self.diagonal[i] * x[i];
                    if i > 0 {
                        s += c * x[i - 1];
                    }
                    if i + 1 < m {
                        s += c * x[i + 1];
                    }
                    y[i] = s;
                }
            }
            _ => {
                for i in 0..m {
                    for j in 0..m {
                        let k = i * m + j;
                        let mut s = self.diagonal[k] * x[k];
                        if i > 0 {
                            s += c * x[k - m];
                        }
                        if i + 1 < m {
                            s += c * x[k + m];
                        }
                        if j > 0 {
                            s += c * x[k - 1];
                        }
                        if j + 1 < m {
                            s += c * x[k + 1];
                        }
                        y[k] = s;
                    }
                }
            }
        }
    }
}
