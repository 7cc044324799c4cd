//! Sweeps over `h` that compare the discrete spectra with the semiclassical predictions.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::density::{gamma_d, tail_constants, Density, DensityKind, RadialDensity};
use crate::eigen::{bottom_k, count_in_interval, dense_spectrum, top_k, LanczosOptions};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::multiplier::find_min_m;
use crate::operator::{build_conjugated, build_schrodinger, DiscreteOperator, Scheme, WeightRule};

/// How the grid is chosen for a given `h`: box half-width and `δ = h / spacing_per_h`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridPolicy {
    pub half_width: f64,
    pub spacing_per_h: f64,
    pub scheme: Scheme,
    #[serde(default)]
    pub weight_rule: WeightRule,
}

impl GridPolicy {
    pub fn new(half_width: f64, spacing_per_h: f64, scheme: Scheme) -> Self {
        Self {
            half_width,
            spacing_per_h,
            scheme,
            weight_rule: WeightRule::Auto,
        }
    }

    pub fn grid(&self, dim: usize, h: f64) -> Result<Grid> {
        Grid::with_spacing(dim, self.half_width, h / self.spacing_per_h)
    }

    /// `T̃_h` on this policy's grid.
    pub fn conjugated(&self, density: &Density, h: f64) -> Result<DiscreteOperator> {
        let grid = self.grid(density.dim(), h)?;
        grid.check_truncation(density)?;
        build_conjugated(&grid, density, h, self.scheme, self.weight_rule)
    }
}

/// Least-squares slope and intercept of `y` against `x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Slope of `log r` against `log h`.
pub fn fit_order(h: &[f64], r: &[f64]) -> f64 {
    let lx: Vec<f64> = h.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = r.iter().map(|v| v.ln()).collect();
    linear_fit(&lx, &ly).0
}

/// Low eigenvalues of `L_ρ` for a Gaussian, `4α·n` with multiplicity `C(n+d-1, d-1)`.
pub fn gaussian_levels(dim: usize, alpha: f64, count: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(count);
    let mut n = 0usize;
    while out.len() < count {
        let mult = if dim == 1 { 1 } else { n + 1 };
        for _ in 0..mult {
            if out.len() < count {
                out.push(4.0 * alpha * n as f64);
            }
        }
        n += 1;
    }
    out
}

/// Richardson-extrapolated low eigenvalues of `L_ρ` from two grid spacings.
#[derive(Debug, Clone, Serialize)]
pub struct SchrodingerLevels {
    pub spacings: [f64; 2],
    pub coarse: Vec<f64>,
    pub fine: Vec<f64>,
    pub extrapolated: Vec<f64>,
    pub max_residual: f64,
}

pub fn schrodinger_levels(
    density: &Density,
    count: usize,
    half_width: f64,
    spacings: [f64; 2],
    opts: &LanczosOptions,
) -> Result<SchrodingerLevels> {
    let runs: Vec<Result<(f64, Vec<f64>, f64)>> = spacings
        .par_iter()
        .map(|&s| {
            let grid = Grid::with_spacing(density.dim(), half_width, s)?;
            let op = build_schrodinger(&grid, density);
            let r = bottom_k(&op, count, opts)?;
            let worst = r.residuals.iter().copied().fold(0.0, f64::max);
            Ok((grid.spacing(), r.eigenvalues, worst))
        })
        .collect();
    let mut runs = runs.into_iter().collect::<Result<Vec<_>>>()?;
    runs.sort_by(|a, b| b.0.total_cmp(&a.0));
    let (d1, coarse, r1) = runs.remove(0);
    let (d2, fine, r2) = runs.remove(0);
    let (s1, s2) = (d1 * d1, d2 * d2);
    let extrapolated = coarse
        .iter()
        .zip(&fine)
        .map(|(c, f)| (s1 * f - s2 * c) / (s1 - s2))
        .collect();
    Ok(SchrodingerLevels {
        spacings: [d1, d2],
        coarse,
        fine,
        extrapolated,
        max_residual: r1.max(r2),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct OrderFit {
    pub k: usize,
    pub mu: f64,
    pub order: f64,
    /// Order refitted without the largest `h`.
    pub order_without_largest: f64,
    /// Geometric mean of `r_k(h) / h⁴`.
    pub c_fit: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct AsymptoticsRow {
    pub h: f64,
    pub spacing: f64,
    pub nodes: usize,
    /// `λ_0(h), …, λ_kmax(h)`.
    pub lambda: Vec<f64>,
    pub predicted: Vec<f64>,
    pub residual: Vec<f64>,
    pub gap: f64,
    pub max_eig_residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AsymptoticsReport {
    pub dim: usize,
    pub k_max: usize,
    pub mu: Vec<f64>,
    pub rows: Vec<AsymptoticsRow>,
    pub fits: Vec<OrderFit>,
    /// Largest `|λ_0(h) - 1|` over the sweep.
    pub lambda0_defect: f64,
    pub pass: bool,
}

/// Checks `|1 - γ_d μ_k h² - λ_k(h)| = O(h⁴)` for `k = 1..=k_max`.
///
/// `mu` holds `μ_0..=μ_kmax`. A level passes when its fitted order is at least
/// 3.5 and its residual at the smallest `h` is below `2 C_fit h⁴`.
pub fn verify_asymptotics(
    density: &Density,
    k_max: usize,
    h_list: &[f64],
    mu: &[f64],
    policy: &GridPolicy,
    opts: &LanczosOptions,
) -> Result<AsymptoticsReport> {
    if h_list.len() < 3 {
        return Err(Error::InsufficientHPoints(h_list.len()));
    }
    if mu.len() < k_max + 1 {
        return Err(Error::InvalidConfig(format!(
            "need {} reference levels, got {}",
            k_max + 1,
            mu.len()
        )));
    }
    let d = density.dim();
    let gamma = gamma_d(d);
    let rows = h_list
        .par_iter()
        .map(|&h| {
            let op = policy.conjugated(density, h)?;
            let r = top_k(&op, k_max + 1, opts)?;
            let predicted: Vec<f64> = (0..=k_max).map(|k| 1.0 - gamma * mu[k] * h * h).collect();
            let residual = predicted.iter().zip(&r.eigenvalues).map(|(p, l)| (p - l).abs()).collect();
            let gap = if k_max >= 1 { 1.0 - r.eigenvalues[1] } else { f64::NAN };
            Ok(AsymptoticsRow {
                h,
                spacing: op.grid().spacing(),
                nodes: op.grid().len(),
                lambda: r.eigenvalues.clone(),
                predicted,
                residual,
                gap,
                max_eig_residual: r.residuals.iter().copied().fold(0.0, f64::max),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut rows = rows;
    rows.sort_by(|a, b| b.h.total_cmp(&a.h));
    let lambda0_defect = rows.iter().map(|r| (r.lambda[0] - 1.0).abs()).fold(0.0, f64::max);
    let hs: Vec<f64> = rows.iter().map(|r| r.h).collect();
    let h_min = hs[hs.len() - 1];
    let mut fits = Vec::new();
    for k in 1..=k_max {
        let res: Vec<f64> = rows.iter().map(|r| r.residual[k]).collect();
        let order = fit_order(&hs, &res);
        let order_without_largest = if hs.len() >= 3 {
            fit_order(&hs[1..], &res[1..])
        } else {
            f64::NAN
        };
        let c_fit = (res.iter().zip(&hs).map(|(r, h)| (r / h.powi(4)).ln()).sum::<f64>() / hs.len() as f64).exp();
        let last = res[res.len() - 1];
        let pass = order >= 3.5 && last <= 2.0 * c_fit * h_min.powi(4);
        fits.push(OrderFit {
            k,
            mu: mu[k],
            order,
            order_without_largest,
            c_fit,
            pass,
        });
    }
    let pass = lambda0_defect <= 1e-8 && fits.iter().all(|f| f.pass);
    Ok(AsymptoticsReport {
        dim: d,
        k_max,
        mu: mu[..=k_max].to_vec(),
        rows,
        fits,
        lambda0_defect,
        pass,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct GapReport {
    pub h: f64,
    pub lambda1: f64,
    /// `g(h) = 1 - λ_1(h)`.
    pub gap: f64,
    /// `γ_d μ_1 h²`.
    pub predicted: f64,
    /// `γ_d h² min(μ_1, (1 - α_cfg) κ)`.
    pub comparison: f64,
    pub ratio: f64,
}

/// `g(h) = 1 - λ_1(h)` together with its semiclassical counterparts.
pub fn spectral_gap(
    density: &Density,
    h: f64,
    mu1: f64,
    alpha_cfg: f64,
    policy: &GridPolicy,
    opts: &LanczosOptions,
) -> Result<GapReport> {
    let op = policy.conjugated(density, h)?;
    let r = top_k(&op, 2, opts)?;
    let gamma = gamma_d(density.dim());
    let gap = 1.0 - r.eigenvalues[1];
    let predicted = gamma * mu1 * h * h;
    let comparison = gamma * h * h * mu1.min((1.0 - alpha_cfg) * density.kappa());
    Ok(GapReport {
        h,
        lambda1: r.eigenvalues[1],
        gap,
        predicted,
        comparison,
        ratio: gap / predicted,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct BandReport {
    pub h: f64,
    /// `true` for Gaussians: no essential spectrum.
    pub compact: bool,
    pub a_h: Option<f64>,
    pub m: f64,
    /// `[M A_h, A_h]`.
    pub band: Option<[f64; 2]>,
    pub kappa: f64,
    /// `|A_h - 1 + γ_d κ h²|`.
    pub edge_residual: Option<f64>,
}

/// Default probe shell beyond the core, where `a_h²` is already at its limit.
pub fn default_probes(density: &Density, h: f64) -> Vec<f64> {
    let base = density.core_radius() + h;
    [1.0, 4.0, 10.0].iter().map(|o| base + o).collect()
}

/// Essential-spectrum band of `T_h` for a tempered density; empty for Gaussians.
pub fn essential_band(density: &Density, h: f64, probes: &[f64]) -> Result<BandReport> {
    let m = find_min_m(density.dim()).m;
    if density.kind() == DensityKind::Gaussian {
        return Ok(BandReport {
            h,
            compact: true,
            a_h: None,
            m,
            band: None,
            kappa: density.kappa(),
            edge_residual: None,
        });
    }
    let t = tail_constants(density, h, probes)?;
    Ok(BandReport {
        h,
        compact: false,
        a_h: Some(t.a_h_est),
        m,
        band: Some([m * t.a_h_est, t.a_h_est]),
        kappa: density.kappa(),
        edge_residual: Some(t.residual),
    })
}

/// Where the full spectrum of a truncated `T̃_h` sits relative to the band.
#[derive(Debug, Clone, Serialize)]
pub struct ContainmentReport {
    pub h: f64,
    pub nodes: usize,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
    pub lower_edge: f64,
    /// `min λ - M A_h`; negative when eigenvalues sit below the band.
    pub lower_margin: f64,
}

pub fn band_containment(density: &Density, h: f64, policy: &GridPolicy, band: &BandReport) -> Result<ContainmentReport> {
    let [lower, _] = band
        .band
        .ok_or(Error::WrongDensityKind {
            expected: "tempered_exp_type",
            found: "gaussian",
        })?;
    let op = policy.conjugated(density, h)?;
    if op.grid().len() > 2000 {
        return Err(Error::InvalidConfig(format!(
            "band containment runs on at most 2000 nodes, policy gives {}",
            op.grid().len()
        )));
    }
    let (values, _) = dense_spectrum(&op.to_dense()?);
    let min = values[0];
    let max = values[values.len() - 1];
    Ok(ContainmentReport {
        h,
        nodes: op.grid().len(),
        min_eigenvalue: min,
        max_eigenvalue: max,
        lower_edge: lower,
        lower_margin: min - lower,
    })
}

/// `|A_h - 1 + γ_d κ h²| ≤ C h⁴` over a sweep.
#[derive(Debug, Clone, Serialize)]
pub struct BandSweep {
    pub reports: Vec<BandReport>,
    /// `max r(h)/h⁴`.
    pub c_fit: f64,
    pub order: f64,
    pub pass: bool,
}

pub fn band_sweep(density: &Density, h_list: &[f64]) -> Result<BandSweep> {
    if density.kind() != DensityKind::TemperedExpType {
        return Err(Error::WrongDensityKind {
            expected: "tempered_exp_type",
            found: density.kind().name(),
        });
    }
    let reports = h_list
        .par_iter()
        .map(|&h| essential_band(density, h, &default_probes(density, h)))
        .collect::<Result<Vec<_>>>()?;
    let res: Vec<f64> = reports.iter().map(|r| r.edge_residual.unwrap_or(f64::NAN)).collect();
    let c_fit = res.iter().zip(h_list).map(|(r, h)| r / h.powi(4)).fold(0.0, f64::max);
    let order = fit_order(h_list, &res);
    let pass = c_fit.is_finite() && order >= 3.5;
    Ok(BandSweep {
        reports,
        c_fit,
        order,
        pass,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct WeylPoint {
    pub h: f64,
    pub lambda: f64,
    /// Eigenvalues of `T_h` in `[1 - λ, 1]`.
    pub count: usize,
    /// `1 + λ h⁻²`.
    pub scaled: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct WeylReport {
    pub points: Vec<WeylPoint>,
    pub exponent: f64,
    /// Smallest `C` with `N ≤ C (1 + λ h⁻²)^d` at every point.
    pub c: f64,
    pub pass: bool,
}

/// Eigenvalue counts `N(λ, h)` against the bound `C (1 + λ h⁻²)^d`.
pub fn weyl_curve(density: &Density, h_list: &[f64], lambdas: &[f64], policy: &GridPolicy) -> Result<WeylReport> {
    if density.kind() != DensityKind::Gaussian {
        return Err(Error::WrongDensityKind {
            expected: "gaussian",
            found: density.kind().name(),
        });
    }
    let d = density.dim() as i32;
    let per_h = h_list
        .par_iter()
        .map(|&h| {
            let banded = policy.conjugated(density, h)?.to_banded()?;
            lambdas
                .iter()
                .map(|&lambda| {
                    let c = count_in_interval(&banded, 1.0 - lambda, 1.0 + 1e-8)?;
                    Ok(WeylPoint {
                        h,
                        lambda,
                        count: c.count,
                        scaled: 1.0 + lambda / (h * h),
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let points: Vec<WeylPoint> = per_h.into_iter().flatten().collect();
    let lx: Vec<f64> = points.iter().map(|p| p.scaled.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| (p.count.max(1) as f64).ln()).collect();
    let (exponent, _) = linear_fit(&lx, &ly);
    let c = points
        .iter()
        .map(|p| p.count as f64 / p.scaled.powi(d))
        .fold(0.0, f64::max);
    let pass = exponent <= d as f64 + 0.3;
    Ok(WeylReport {
        points,
        exponent,
        c,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_level_multiplicities() {
        assert_eq!(gaussian_levels(1, 0.5, 4), vec![0.0, 2.0, 4.0, 6.0]);
        assert_eq!(gaussian_levels(2, 0.5, 6), vec![0.0, 2.0, 2.0, 4.0, 4.0, 4.0]);
    }

    #[test]
    fn fits_recover_power_laws() {
        let h = [0.5, 0.3, 0.2, 0.1];
        let r: Vec<f64> = h.iter().map(|v: &f64| 3.0 * v.powi(4)).collect();
        assert!((fit_order(&h, &r) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn too_few_h_points() {
        let g = Density::gaussian(1, 0.5).unwrap();
        let p = GridPolicy::new(12.0, 40.0, Scheme::FourierMultiplier);
        let err = verify_asymptotics(&g, 1, &[0.5, 0.25], &[0.0, 2.0], &p, &LanczosOptions::default()).unwrap_err();
        assert!(matches!(err, Error::InsufficientHPoints(2)));
    }
}
