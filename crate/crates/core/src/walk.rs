//! Ball-walk sampling and total-variation convergence.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Gamma, Normal, UnitDisc};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::density::{Density, DensityKind, RadialDensity};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::operator::{DiscreteOperator, Form};
use crate::quadrature;

/// Proposal budget of the rejection samplers.
pub const REJECTION_BUDGET: usize = 1_000_000;

/// Identity of the random generator, echoed in outputs.
pub const RNG_ALGORITHM: &str = "ChaCha8Rng(seed_from_u64(seed), stream = path index)";

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Uniform point of the unit ball in `d ∈ {1, 2}`.
fn unit_ball_point<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<f64> {
    match d {
        1 => vec![rng.random_range(-1.0..1.0)],
        _ => {
            let p: [f64; 2] = UnitDisc.sample(rng);
            p.to_vec()
        }
    }
}

/// One exact draw from `t_h(x, ·)`: uniform proposals in `B_h(x)` accepted with
/// probability `ρ(y) / sup_{B_h(x)} ρ`.
pub fn step_sample<D: RadialDensity + ?Sized, R: Rng + ?Sized>(
    density: &D,
    h: f64,
    x: &[f64],
    rng: &mut R,
) -> Result<Vec<f64>> {
    let d = density.dim();
    let u_sup = density.ln_profile((norm(x) - h).max(0.0));
    for _ in 0..REJECTION_BUDGET {
        let z = unit_ball_point(d, rng);
        let y: Vec<f64> = x.iter().zip(&z).map(|(a, b)| a + h * b).collect();
        let log_acc = density.ln_profile(norm(&y)) - u_sup;
        if log_acc >= 0.0 || rng.random::<f64>() < log_acc.exp() {
            return Ok(y);
        }
    }
    Err(Error::RejectionBudgetExceeded(REJECTION_BUDGET))
}

/// Proposal drawn from an envelope of `μ` together with the log of `ρ/(c·q)` at the draw.
fn propose_from_mu<R: Rng + ?Sized>(density: &Density, rng: &mut R) -> (Vec<f64>, f64) {
    let d = density.dim();
    let a = density.alpha();
    match density.kind() {
        DensityKind::Gaussian => {
            let normal = Normal::new(0.0, (2.0 * a).sqrt().recip()).expect("positive sd");
            ((0..d).map(|_| normal.sample(rng)).collect(), 0.0)
        }
        DensityKind::TemperedExpType => {
            // Pure exponential envelope: since s(r) >= r, accept with e^{-α(s(r) - r)}.
            let x = match d {
                1 => {
                    let r: f64 = Gamma::new(1.0, 1.0 / a).expect("valid gamma").sample(rng);
                    vec![if rng.random::<bool>() { r } else { -r }]
                }
                _ => {
                    let r: f64 = Gamma::new(2.0, 1.0 / a).expect("valid gamma").sample(rng);
                    let t = rng.random_range(0.0..2.0 * PI);
                    vec![r * t.cos(), r * t.sin()]
                }
            };
            let r = norm(&x);
            let s = density.core().map_or(r, |c| c.value(r));
            (x, -a * (s - r))
        }
    }
}

/// One exact draw from `ν_h ∝ m_h ρ`: draws from `μ` accepted with
/// probability `m_h(x) / m_h(0)`, the ball mass of a radially decreasing
/// density being largest at the origin.
pub fn sample_stationary<R: Rng + ?Sized>(density: &Density, h: f64, rng: &mut R) -> Result<Vec<f64>> {
    let d = density.dim();
    let origin = vec![0.0; d];
    let ln_peak = density.ball_mass_ratio(&origin, h)?.ln() + density.ln_profile(0.0);
    for _ in 0..REJECTION_BUDGET {
        let (x, log_env) = propose_from_mu(density, rng);
        if log_env < 0.0 && rng.random::<f64>() >= log_env.exp() {
            continue;
        }
        let ratio = density.ball_mass_ratio(&x, h)?;
        let acc = (ratio.ln() + density.ln_profile(norm(&x)) - ln_peak).exp();
        if rng.random::<f64>() < acc {
            return Ok(x);
        }
    }
    Err(Error::RejectionBudgetExceeded(REJECTION_BUDGET))
}

/// `½ Σ |p - q|`.
pub fn tv_distance(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// Exact law of the grid chain started at one node.
#[derive(Debug, Clone, Serialize)]
pub struct TvCurve {
    pub start_index: usize,
    pub start: Vec<f64>,
    /// TV to the chain's own stationary law `ν̂ ∝ ρ ⊙ Kρ`, for `n = 0..=n_max`.
    pub tv: Vec<f64>,
    /// TV to the cell projection of the continuous `ν_h`.
    pub tv_projected: Vec<f64>,
    /// `‖ν̂ - ν_h‖_TV`, the floor of `tv_projected`.
    pub floor: f64,
}

/// Cell masses of the continuous `ν_h` by the midpoint rule on the grid nodes.
pub fn nu_h_cell_masses(grid: &Grid, density: &Density, h: f64) -> Result<Vec<f64>> {
    let u0 = density.ln_profile(0.0);
    let x_axis = |r: f64| {
        let mut x = vec![0.0; grid.dim()];
        x[0] = r;
        x
    };
    let raw = grid.sample_radial(|r| {
        Ok(density.ball_mass_ratio(&x_axis(r), h)? * (2.0 * (density.ln_profile(r) - u0)).exp())
    })?;
    let z: f64 = raw.iter().sum();
    Ok(raw.into_iter().map(|v| v / z).collect())
}

fn require_markov(op: &DiscreteOperator) -> Result<Vec<f64>> {
    if op.form() != Form::Markov {
        return Err(Error::InvalidConfig("TV evolution needs the Markov form".into()));
    }
    Ok(op.stationary_masses().expect("markov form has a stationary law"))
}

/// Evolves `δ_{x0} T_h^n` on the grid and records its TV distance to the stationary law.
pub fn tv_exact_grid(
    op: &DiscreteOperator,
    nu_projected: Option<&[f64]>,
    x0: &[f64],
    n_max: usize,
) -> Result<TvCurve> {
    let nu = require_markov(op)?;
    let grid = op.grid();
    if grid.spacing() > op.h() / 20.0 * (1.0 + 1e-9) {
        return Err(Error::KernelUnderResolved {
            h: op.h(),
            min: 20.0 * grid.spacing(),
        });
    }
    let start_index = grid.nearest(x0);
    let mut mu = vec![0.0; grid.len()];
    mu[start_index] = 1.0;
    let mut next = vec![0.0; grid.len()];
    let mut tv = Vec::with_capacity(n_max + 1);
    let mut tv_projected = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        if n > 0 {
            op.apply_transpose(&mu, &mut next);
            std::mem::swap(&mut mu, &mut next);
        }
        tv.push(tv_distance(&mu, &nu));
        if let Some(p) = nu_projected {
            tv_projected.push(tv_distance(&mu, p));
        }
    }
    Ok(TvCurve {
        start_index,
        start: grid.point(start_index),
        tv,
        tv_projected,
        floor: nu_projected.map_or(f64::NAN, |p| tv_distance(&nu, p)),
    })
}

fn integrate_fallible<F: Fn(f64) -> Result<f64>>(
    f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    tol: &quadrature::QuadratureTolerance,
) -> Result<f64> {
    let mut failure = None;
    let v = quadrature::integrate(
        |r| match f(r) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        },
        a,
        b,
        breaks,
        tol,
    )?;
    match failure {
        Some(e) => Err(e),
        None => Ok(v),
    }
}

/// Masses of `t_h(x0, ·)` on `bins` equal subintervals of `[x0 - h, x0 + h]` (`d = 1`).
pub fn step_law_1d<D: RadialDensity + ?Sized>(density: &D, h: f64, x0: f64, bins: usize) -> Result<Vec<f64>> {
    if density.dim() != 1 || bins == 0 {
        return Err(Error::InvalidConfig("step_law_1d needs d = 1 and at least one bin".into()));
    }
    let tol = density.quadrature();
    let u0 = density.ln_profile(x0.abs());
    let f = |y: f64| (density.ln_profile(y.abs()) - u0).exp();
    let mut breaks: Vec<f64> = density.breakpoints().iter().flat_map(|&b| [b, -b]).collect();
    breaks.push(0.0);
    let w = 2.0 * h / bins as f64;
    let masses = (0..bins)
        .map(|k| {
            let a = x0 - h + k as f64 * w;
            quadrature::integrate(f, a, a + w, &breaks, &tol)
        })
        .collect::<Result<Vec<_>>>()?;
    let z: f64 = masses.iter().sum();
    Ok(masses.into_iter().map(|m| m / z).collect())
}

/// Histogram of `samples` draws of `step_sample` from `x0` on the bins of [`step_law_1d`].
pub fn step_histogram_1d<D: RadialDensity + ?Sized>(
    density: &D,
    h: f64,
    x0: f64,
    bins: usize,
    samples: usize,
    seed: u64,
) -> Result<Vec<u64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0u64; bins];
    for _ in 0..samples {
        let y = step_sample(density, h, &[x0], &mut rng)?;
        let k = ((y[0] - x0 + h) / (2.0 * h) * bins as f64).floor();
        counts[(k.max(0.0) as usize).min(bins - 1)] += 1;
    }
    Ok(counts)
}

/// Radius beyond which `ρ(r)² / ρ(0)²` is below `e^{-80}`.
fn negligible_radius(density: &Density) -> f64 {
    let u0 = density.ln_profile(0.0);
    let mut r = 1.0;
    while 2.0 * (density.ln_profile(r) - u0) > -80.0 {
        r *= 1.25;
    }
    r
}

/// `ν_h(|y| ≥ τ)` by nested radial quadrature.
pub fn stationary_tail_mass(density: &Density, h: f64, tau: f64) -> Result<f64> {
    let d = density.dim();
    let u0 = density.ln_profile(0.0);
    let tol = density.quadrature();
    let f = |r: f64| -> Result<f64> {
        let mut x = vec![0.0; d];
        x[0] = r;
        let jac = if d == 1 { 1.0 } else { r };
        Ok(jac * density.ball_mass_ratio(&x, h)? * (2.0 * (density.ln_profile(r) - u0)).exp())
    };
    let r_max = negligible_radius(density).max(tau + 1.0);
    let mut breaks: Vec<f64> = density
        .breakpoints()
        .iter()
        .flat_map(|&b| [b, b + h, (b - h).max(0.0)])
        .collect();
    breaks.push(h);
    let inner = integrate_fallible(&f, 0.0, tau, &breaks, &tol)?;
    let outer = integrate_fallible(&f, tau, r_max, &breaks, &tol)?;
    Ok(outer / (inner + outer))
}

#[derive(Debug, Clone, Serialize)]
pub struct WitnessReport {
    pub x: Vec<f64>,
    pub tau: f64,
    pub n: usize,
    /// `½ |T_h^n f_τ(x) - Π f_τ| = 1 - ν_h(|y| ≥ τ)`.
    pub value: f64,
    pub tail_mass: f64,
    /// `e^{-2ατ(τ-h)}` (Gaussian) or `∫_{|y|≥τ} ρ²` (tempered).
    pub p_tau: f64,
    /// The `C` for which `1 - C p(τ)` equals the witness value.
    pub c_implied: f64,
}

/// Lower bound on `‖T_h^n(x, ·) - ν_h‖_TV` from the test function `f_τ = 2·1_{|y|≥τ} - 1`.
///
/// When `|x| ≥ τ + (n+1)h` the walk cannot leave `{|y| > τ}` in `n` steps, so
/// `T_h^n f_τ(x) = 1` exactly.
pub fn tv_lower_bound_witness(density: &Density, h: f64, x: &[f64], tau: f64, n: usize) -> Result<WitnessReport> {
    let required = tau + (n as f64 + 1.0) * h;
    let r = norm(x);
    if r < required {
        return Err(Error::WitnessHypothesisViolated { norm: r, required });
    }
    let tail = stationary_tail_mass(density, h, tau)?;
    let p_tau = match density.kind() {
        DensityKind::Gaussian => (-2.0 * density.alpha() * tau * (tau - h)).exp(),
        DensityKind::TemperedExpType => {
            let d = density.dim();
            let shell = if d == 1 { 2.0 } else { 2.0 * PI };
            let jac = |r: f64| if d == 1 { 1.0 } else { r };
            let r_max = negligible_radius(density).max(tau + 1.0);
            shell
                * quadrature::integrate(
                    |r| jac(r) * (2.0 * density.ln_profile(r)).exp(),
                    tau,
                    r_max,
                    &density.breakpoints(),
                    &density.quadrature(),
                )?
        }
    };
    Ok(WitnessReport {
        x: x.to_vec(),
        tau,
        n,
        value: 1.0 - tail,
        tail_mass: tail,
        p_tau,
        c_implied: tail / p_tau,
    })
}

/// `q(τ, h)`: `e^{ατ(τ+3h)}` (Gaussian) or `h^{-d/2} sup_{|x|<τ} 1/ρ` (tempered).
pub fn q_factor(density: &Density, tau: f64, h: f64) -> f64 {
    match density.kind() {
        DensityKind::Gaussian => (density.alpha() * tau * (tau + 3.0 * h)).exp(),
        DensityKind::TemperedExpType => h.powf(-(density.dim() as f64) / 2.0) / density.profile(tau),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct UpperBoundCurve {
    pub tau: f64,
    pub gap: f64,
    pub q: f64,
    /// `max_{|x0|<τ} TV(n)` over grid start nodes.
    pub tv_max: Vec<f64>,
    /// `C_fit q e^{-n g}`.
    pub bound: Vec<f64>,
    /// Smallest constant with `tv_max(n) ≤ C q e^{-n g}` for every `n`.
    pub c_fit: f64,
    pub starts: usize,
}

/// Pairs the exact TV curves from every node with `|x0| < τ` against
/// `q(τ, h) e^{-n g(h)}`.
pub fn tv_upper_bound_curve(
    density: &Density,
    op: &DiscreteOperator,
    tau: f64,
    gap: f64,
    n_max: usize,
) -> Result<UpperBoundCurve> {
    let grid = op.grid();
    let starts: Vec<usize> = (0..grid.len()).filter(|&i| grid.node_norm(i) < tau).collect();
    if starts.is_empty() {
        return Err(Error::InvalidConfig(format!("no grid node inside |x| < {tau}")));
    }
    let curves = starts
        .par_iter()
        .map(|&i| tv_exact_grid(op, None, &grid.point(i), n_max).map(|c| c.tv))
        .collect::<Result<Vec<_>>>()?;
    let tv_max: Vec<f64> = (0..=n_max)
        .map(|n| curves.iter().map(|c| c[n]).fold(0.0, f64::max))
        .collect();
    let q = q_factor(density, tau, op.h());
    let envelope: Vec<f64> = (0..=n_max).map(|n| q * (-(n as f64) * gap).exp()).collect();
    let c_fit = tv_max.iter().zip(&envelope).map(|(t, e)| t / e).fold(0.0, f64::max);
    Ok(UpperBoundCurve {
        tau,
        gap,
        q,
        bound: envelope.iter().map(|e| c_fit * e).collect(),
        tv_max,
        c_fit,
        starts: starts.len(),
    })
}

/// Least-squares slope of `ln tv(n)` over `n ∈ [from, to]`.
pub fn log_slope(tv: &[f64], from: usize, to: usize) -> f64 {
    let xs: Vec<f64> = (from..=to).map(|n| n as f64).collect();
    let ys: Vec<f64> = (from..=to).map(|n| tv[n].ln()).collect();
    crate::analysis::linear_fit(&xs, &ys).0
}

/// Histogram bins made of `m × m` grid cells, plus one overflow bin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Binning {
    pub dim: usize,
    pub lower: f64,
    pub width: f64,
    pub per_axis: usize,
    pub cells_per_bin: usize,
}

impl Binning {
    /// Bin edges at `-L - δ/2 + k m δ`, so every grid cell lies in exactly one bin.
    pub fn aligned(grid: &Grid, cells_per_bin: usize) -> Result<Self> {
        let n = grid.points_per_axis();
        if cells_per_bin == 0 || n % cells_per_bin != 0 {
            return Err(Error::InvalidConfig(format!(
                "cells_per_bin = {cells_per_bin} must divide {n}"
            )));
        }
        let delta = grid.spacing();
        Ok(Self {
            dim: grid.dim(),
            lower: -grid.half_width() - 0.5 * delta,
            width: cells_per_bin as f64 * delta,
            per_axis: n / cells_per_bin,
            cells_per_bin,
        })
    }

    /// Number of bins including overflow.
    pub fn len(&self) -> usize {
        self.per_axis.pow(self.dim as u32) + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn overflow(&self) -> usize {
        self.len() - 1
    }

    pub fn index(&self, x: &[f64]) -> usize {
        let mut idx = 0;
        for &v in x {
            let k = ((v - self.lower) / self.width).floor();
            if !(k >= 0.0 && k < self.per_axis as f64) {
                return self.overflow();
            }
            idx = idx * self.per_axis + k as usize;
        }
        idx
    }

    /// Sums grid-cell masses into bins.
    pub fn project(&self, grid: &Grid, masses: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        for (i, m) in masses.iter().enumerate() {
            let [a, b] = grid.multi_index(i);
            let idx = match self.dim {
                1 => a / self.cells_per_bin,
                _ => (a / self.cells_per_bin) * self.per_axis + b / self.cells_per_bin,
            };
            out[idx] += m;
        }
        out
    }
}

/// Continuous `ν_h` bin masses; adaptive quadrature per bin in `d = 1`,
/// grid midpoint masses otherwise.
pub fn nu_h_bin_masses(density: &Density, h: f64, grid: &Grid, bins: &Binning) -> Result<Vec<f64>> {
    if density.dim() != 1 {
        return Ok(bins.project(grid, &nu_h_cell_masses(grid, density, h)?));
    }
    let u0 = density.ln_profile(0.0);
    let tol = density.quadrature();
    let f = |y: f64| -> Result<f64> {
        Ok(density.ball_mass_ratio(&[y], h)? * (2.0 * (density.ln_profile(y.abs()) - u0)).exp())
    };
    let mut breaks: Vec<f64> = density.breakpoints().iter().flat_map(|&b| [b, -b, b + h, -b - h]).collect();
    breaks.extend([0.0, h, -h]);
    let mut masses = (0..bins.per_axis)
        .into_par_iter()
        .map(|k| {
            let a = bins.lower + k as f64 * bins.width;
            integrate_fallible(&f, a, a + bins.width, &breaks, &tol)
        })
        .collect::<Result<Vec<_>>>()?;
    masses.push(0.0);
    let z: f64 = masses.iter().sum();
    Ok(masses.into_iter().map(|m| m / z).collect())
}

/// Where the paths start.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Start {
    Point(Vec<f64>),
    Stationary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WalkConfig {
    pub h: f64,
    pub start: Start,
    pub paths: usize,
    pub horizon: usize,
    pub seed: u64,
}

/// Bin occupation counts of an ensemble of independent paths at every step.
#[derive(Debug, Clone)]
pub struct PathEnsemble {
    pub config: WalkConfig,
    pub bins: Binning,
    /// `counts[n][b]`: paths in bin `b` after `n` steps.
    pub counts: Vec<Vec<u64>>,
}

fn path_rng(seed: u64, path: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path as u64);
    rng
}

/// Simulates `P` independent paths; each path has its own RNG stream, so the
/// result does not depend on the thread count.
pub fn simulate_paths(density: &Density, config: &WalkConfig, bins: &Binning) -> Result<PathEnsemble> {
    if config.paths == 0 {
        return Err(Error::InvalidConfig("at least one path is required".into()));
    }
    let steps = config.horizon + 1;
    let width = bins.len();
    let zero = || vec![0u64; steps * width];
    let flat = (0..config.paths)
        .into_par_iter()
        .try_fold(zero, |mut acc, p| -> Result<Vec<u64>> {
            let mut rng = path_rng(config.seed, p);
            let mut x = match &config.start {
                Start::Point(x0) => x0.clone(),
                Start::Stationary => sample_stationary(density, config.h, &mut rng)?,
            };
            acc[bins.index(&x)] += 1;
            for n in 1..steps {
                x = step_sample(density, config.h, &x, &mut rng)?;
                acc[n * width + bins.index(&x)] += 1;
            }
            Ok(acc)
        })
        .try_reduce(zero, |mut a, b| {
            a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
            Ok(a)
        })?;
    Ok(PathEnsemble {
        config: config.clone(),
        bins: *bins,
        counts: flat.chunks(width).map(|c| c.to_vec()).collect(),
    })
}

impl PathEnsemble {
    /// Plug-in TV between the empirical bin law after `n` steps and `target`.
    pub fn empirical_tv(&self, n: usize, target: &[f64]) -> f64 {
        let p = self.config.paths as f64;
        let emp: Vec<f64> = self.counts[n].iter().map(|&c| c as f64 / p).collect();
        tv_distance(&emp, target)
    }
}

/// Mean and standard deviation of the plug-in TV estimator.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PlugInReference {
    pub mean: f64,
    pub sd: f64,
    pub replicates: usize,
}

/// Distribution of `TV(empirical(law, P), target)` by multinomial resampling.
///
/// Its mean carries the upward bias of the plug-in estimator; its spread is
/// the Monte-Carlo standard error.
pub fn plug_in_reference(law: &[f64], target: &[f64], samples: u64, replicates: usize, seed: u64) -> PlugInReference {
    let values: Vec<f64> = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let mut rng = path_rng(seed, r);
            let mut left = samples;
            let mut rest = 1.0;
            let mut emp = vec![0.0; law.len()];
            for (i, &p) in law.iter().enumerate() {
                if left == 0 {
                    break;
                }
                let c = if i + 1 == law.len() || rest <= p {
                    left
                } else {
                    let prob = (p / rest).clamp(0.0, 1.0);
                    Binomial::new(left, prob).expect("valid binomial").sample(&mut rng)
                };
                emp[i] = c as f64 / samples as f64;
                left -= c;
                rest -= p;
            }
            tv_distance(&emp, target)
        })
        .collect();
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let sd = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0)).sqrt();
    PlugInReference {
        mean,
        sd,
        replicates,
    }
}

/// Pearson χ² goodness of fit; returns `(statistic, degrees of freedom, p-value)`.
pub fn chi_square_gof(counts: &[u64], probs: &[f64]) -> (f64, usize, f64) {
    use statrs::distribution::{ChiSquared, ContinuousCDF};
    let total: u64 = counts.iter().sum();
    let stat: f64 = counts
        .iter()
        .zip(probs)
        .filter(|(_, &p)| p > 0.0)
        .map(|(&c, &p)| {
            let e = p * total as f64;
            (c as f64 - e).powi(2) / e
        })
        .sum();
    let dof = probs.iter().filter(|&&p| p > 0.0).count() - 1;
    let p = 1.0 - ChiSquared::new(dof as f64).expect("positive dof").cdf(stat);
    (stat, dof, p)
}
