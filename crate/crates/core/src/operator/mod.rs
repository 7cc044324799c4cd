//! Discrete forms of the ball-walk operators on a truncated grid.
//!
//! Every ball-walk form is `y = left ⊙ K(right ⊙ x)` for a symmetric kernel `K`:
//!
//! | form          | left         | right        |
//! |---------------|--------------|--------------|
//! | `BallAverage` | 1            | 1            |
//! | `Conjugated`  | `a_h`        | `a_h`        |
//! | `Markov`      | `1/(Kρ)`     | `ρ`          |

mod banded;
mod fourier;
mod schrodinger;
mod stencil;

pub use banded::{BandHeader, BandedMatrix};
pub use fourier::FourierKernel;
pub use schrodinger::{build_schrodinger, SchrodingerOperator};
pub use stencil::Stencil;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::density::RadialDensity;
use crate::error::{Error, Result};
use crate::grid::Grid;

/// A linear map on grid functions.
pub trait LinearOperator: Sync {
    fn dim(&self) -> usize;

    fn apply(&self, x: &[f64], y: &mut [f64]);

    fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim()];
        self.apply(x, &mut y);
        y
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    BandedQuadrature,
    FourierMultiplier,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::BandedQuadrature => "banded_quadrature",
            Scheme::FourierMultiplier => "fourier_multiplier",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Form {
    BallAverage,
    Conjugated,
    Markov,
}

impl Form {
    pub fn name(self) -> &'static str {
        match self {
            Form::BallAverage => "ball_average",
            Form::Conjugated => "conjugated",
            Form::Markov => "markov",
        }
    }
}

/// How the conjugation weight `a_h` is sampled at the nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightRule {
    /// `Discrete` on banded grids, `Quadrature` for the multiplier scheme.
    #[default]
    Auto,
    /// Adaptive quadrature of the continuous ball mass.
    Quadrature,
    /// The grid ball mass `α_d h^d (Kρ)_i`; makes `T̃_h` exactly similar to the
    /// discrete Markov form. Banded scheme only.
    Discrete,
}

impl WeightRule {
    pub fn resolve(self, scheme: Scheme) -> Self {
        match (self, scheme) {
            (WeightRule::Auto, Scheme::BandedQuadrature) => WeightRule::Discrete,
            (WeightRule::Auto, Scheme::FourierMultiplier) => WeightRule::Quadrature,
            (rule, _) => rule,
        }
    }
}

#[derive(Debug, Clone)]
pub enum Kernel {
    Stencil(Stencil),
    Fourier(FourierKernel),
}

/// `left ⊙ K(right ⊙ x)` on a grid.
#[derive(Debug, Clone)]
pub struct DiscreteOperator {
    grid: Grid,
    h: f64,
    scheme: Scheme,
    form: Form,
    kernel: Kernel,
    left: Vec<f64>,
    right: Vec<f64>,
}

fn check_resolution(grid: &Grid, h: f64) -> Result<()> {
    let min = 3.0 * grid.spacing();
    // Grids built from `δ = h/3` land on the limit up to rounding.
    if !(h >= min * (1.0 - 1e-12)) {
        return Err(Error::KernelUnderResolved { h, min });
    }
    Ok(())
}

fn make_kernel(grid: &Grid, h: f64, scheme: Scheme) -> Result<Kernel> {
    check_resolution(grid, h)?;
    Ok(match scheme {
        Scheme::BandedQuadrature => {
            let s = Stencil::ball_average(grid.dim(), h, grid.spacing())?;
            if s.reach() >= grid.points_per_axis() / 2 {
                return Err(Error::InvalidConfig(format!(
                    "ball radius {h} exceeds half the box"
                )));
            }
            Kernel::Stencil(s)
        }
        Scheme::FourierMultiplier => Kernel::Fourier(FourierKernel::new(grid, h)),
    })
}

/// Density samples scaled by `ρ(0)`, so the Markov weights stay representable far out.
fn scaled_density<D: RadialDensity + ?Sized>(grid: &Grid, density: &D) -> Result<Vec<f64>> {
    let u0 = density.ln_profile(0.0);
    grid.sample_radial(|r| Ok((density.ln_profile(r) - u0).exp()))
}

/// `T̄_h` on the grid.
pub fn build_ball_average(grid: &Grid, h: f64, scheme: Scheme) -> Result<DiscreteOperator> {
    let kernel = make_kernel(grid, h, scheme)?;
    let n = grid.len();
    Ok(DiscreteOperator {
        grid: *grid,
        h,
        scheme,
        form: Form::BallAverage,
        kernel,
        left: vec![1.0; n],
        right: vec![1.0; n],
    })
}

/// `T̃_h = a_h T̄_h a_h` on the grid.
pub fn build_conjugated<D: RadialDensity + ?Sized>(
    grid: &Grid,
    density: &D,
    h: f64,
    scheme: Scheme,
    rule: WeightRule,
) -> Result<DiscreteOperator> {
    let kernel = make_kernel(grid, h, scheme)?;
    let weights = match rule.resolve(scheme) {
        WeightRule::Auto => unreachable!("resolved above"),
        WeightRule::Quadrature => {
            let x_axis = |r: f64| {
                let mut x = vec![0.0; grid.dim()];
                x[0] = r;
                x
            };
            grid.sample_radial(|r| density.weight_a_h(&x_axis(r), h))?
        }
        WeightRule::Discrete => {
            let Kernel::Stencil(s) = &kernel else {
                return Err(Error::InvalidConfig(
                    "discrete weight rule needs the banded scheme".into(),
                ));
            };
            let rho = scaled_density(grid, density)?;
            let mut k_rho = vec![0.0; rho.len()];
            s.apply(grid.points_per_axis(), &rho, &mut k_rho);
            rho.iter().zip(&k_rho).map(|(r, k)| (r / k).sqrt()).collect()
        }
    };
    Ok(DiscreteOperator {
        grid: *grid,
        h,
        scheme,
        form: Form::Conjugated,
        kernel,
        right: weights.clone(),
        left: weights,
    })
}

/// The ball-walk transition operator `T_h`, row-normalized on the grid.
pub fn build_markov<D: RadialDensity + ?Sized>(grid: &Grid, density: &D, h: f64) -> Result<DiscreteOperator> {
    let kernel = make_kernel(grid, h, Scheme::BandedQuadrature)?;
    let rho = scaled_density(grid, density)?;
    let Kernel::Stencil(s) = &kernel else {
        unreachable!("banded scheme yields a stencil")
    };
    let mut k_rho = vec![0.0; rho.len()];
    s.apply(grid.points_per_axis(), &rho, &mut k_rho);
    Ok(DiscreteOperator {
        grid: *grid,
        h,
        scheme: Scheme::BandedQuadrature,
        form: Form::Markov,
        kernel,
        left: k_rho.iter().map(|k| k.recip()).collect(),
        right: rho,
    })
}

impl DiscreteOperator {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn form(&self) -> Form {
        self.form
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn left(&self) -> &[f64] {
        &self.left
    }

    pub fn right(&self) -> &[f64] {
        &self.right
    }

    /// Whether the matrix is symmetric by construction.
    pub fn is_symmetric(&self) -> bool {
        self.form != Form::Markov
    }

    fn apply_kernel(&self, x: &[f64], y: &mut [f64]) {
        match &self.kernel {
            Kernel::Stencil(s) => s.apply(self.grid.points_per_axis(), x, y),
            Kernel::Fourier(f) => f.apply(x, y),
        }
    }

    /// `y = Aᵀ x`; for the Markov form this evolves a row measure one step.
    pub fn apply_transpose(&self, x: &[f64], y: &mut [f64]) {
        let tmp: Vec<f64> = x.iter().zip(&self.left).map(|(a, b)| a * b).collect();
        self.apply_kernel(&tmp, y);
        for (v, r) in y.iter_mut().zip(&self.right) {
            *v *= r;
        }
    }

    /// Stationary cell masses of the Markov form, `ν̂ ∝ ρ ⊙ Kρ`, summing to one.
    pub fn stationary_masses(&self) -> Option<Vec<f64>> {
        if self.form != Form::Markov {
            return None;
        }
        let raw: Vec<f64> = self.right.iter().zip(&self.left).map(|(r, l)| r / l).collect();
        let z: f64 = raw.iter().sum();
        Some(raw.into_iter().map(|v| v / z).collect())
    }

    /// Matrix entry `(i, j)` of a stencil operator, with zero extension.
    fn stencil_entries(&self, s: &Stencil) -> (Vec<isize>, Vec<f64>) {
        let n = self.grid.points_per_axis();
        let ni = n as isize;
        let flat = |o: &[isize; 2]| match self.grid.dim() {
            1 => o[0],
            _ => o[0] * ni + o[1],
        };
        let mut order: Vec<usize> = (0..s.offsets.len()).collect();
        order.sort_by_key(|&b| flat(&s.offsets[b]));
        let offsets: Vec<isize> = order.iter().map(|&b| flat(&s.offsets[b])).collect();
        let size = self.grid.len();
        let mut values = vec![0.0; size * offsets.len()];
        for i in 0..size {
            let [ri, ci] = self.grid.multi_index(i);
            for (slot, &b) in order.iter().enumerate() {
                let o = s.offsets[b];
                let (rj, cj) = (ri as isize + o[0], ci as isize + o[1]);
                let inside = match self.grid.dim() {
                    1 => rj >= 0 && rj < ni,
                    _ => rj >= 0 && rj < ni && cj >= 0 && cj < ni,
                };
                if inside {
                    let j = (i as isize + offsets[slot]) as usize;
                    values[i * offsets.len() + slot] = self.left[i] * s.weights[b] * self.right[j];
                }
            }
        }
        (offsets, values)
    }

    fn header(&self) -> BandHeader {
        BandHeader {
            dim: self.grid.dim(),
            points_per_axis: self.grid.points_per_axis(),
            half_width: self.grid.half_width(),
            h: self.h,
            scheme: self.scheme.name().to_string(),
            form: self.form.name().to_string(),
        }
    }

    /// Banded matrix form; multiplier operators are densified (at most 2000 nodes).
    pub fn to_banded(&self) -> Result<BandedMatrix> {
        let n = self.grid.len();
        match &self.kernel {
            Kernel::Stencil(s) => {
                let (offsets, values) = self.stencil_entries(s);
                Ok(BandedMatrix::new(self.header(), n, offsets, values))
            }
            Kernel::Fourier(_) => {
                let dense = self.to_dense()?;
                let offsets: Vec<isize> = (-(n as isize - 1)..n as isize).collect();
                let mut values = vec![0.0; n * offsets.len()];
                for i in 0..n {
                    for j in 0..n {
                        let slot = j + n - 1 - i;
                        values[i * offsets.len() + slot] = dense[(i, j)];
                    }
                }
                Ok(BandedMatrix::new(self.header(), n, offsets, values))
            }
        }
    }

    /// Dense matrix, built column by column from the action (at most 2000 nodes).
    pub fn to_dense(&self) -> Result<DMatrix<f64>> {
        let n = self.grid.len();
        if n > 2000 {
            return Err(Error::InvalidConfig(format!(
                "refusing to densify an operator with {n} nodes (limit 2000)"
            )));
        }
        if let Kernel::Stencil(s) = &self.kernel {
            let (offsets, values) = self.stencil_entries(s);
            return Ok(BandedMatrix::new(self.header(), n, offsets, values).to_dense());
        }
        let mut m = DMatrix::zeros(n, n);
        let mut e = vec![0.0; n];
        let mut col = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            self.apply(&e, &mut col);
            e[j] = 0.0;
            for i in 0..n {
                m[(i, j)] = col[i];
            }
        }
        if self.is_symmetric() {
            // FFT round-off leaves O(ε) asymmetry.
            let t = m.transpose();
            m = (m + t) * 0.5;
        }
        Ok(m)
    }

    /// Largest `|⟨Au, v⟩ - ⟨u, Av⟩| / (‖u‖‖v‖)` over random probe pairs.
    pub fn symmetry_defect(&self, probes: usize, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = self.grid.len();
        let mut worst: f64 = 0.0;
        for _ in 0..probes {
            let u: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let au = self.matvec(&u);
            let av = self.matvec(&v);
            let g = &self.grid;
            let defect = (g.inner(&au, &v) - g.inner(&u, &av)).abs() / (g.norm(&u) * g.norm(&v));
            worst = worst.max(defect);
        }
        worst
    }
}

impl LinearOperator for DiscreteOperator {
    fn dim(&self) -> usize {
        self.grid.len()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let tmp: Vec<f64> = x.iter().zip(&self.right).map(|(a, b)| a * b).collect();
        self.apply_kernel(&tmp, y);
        for (v, l) in y.iter_mut().zip(&self.left) {
            *v *= l;
        }
    }
}
