//! Density families, the Schrödinger potential they induce, ball masses and
//! the conjugation weight `a_h`.
//!
//! Every density here is radial, so evaluation goes through a log-profile
//! `u(r) = ln ρ(r)`. Ratios such as `ρ(y)/ρ(x)` are formed as `exp(u(|y|) - u(|x|))`
//! which keeps the weight `a_h` accurate far in the tails where `ρ` itself
//! underflows.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{self, QuadratureTolerance};

/// Volume of the unit ball in `R^d`.
pub fn unit_ball_volume(d: usize) -> f64 {
    match d {
        0 => 1.0,
        1 => 2.0,
        _ => unit_ball_volume(d - 2) * 2.0 * PI / d as f64,
    }
}

/// Second-moment constant `1/(2(d+2))` of the normalized unit ball.
pub fn gamma_d(d: usize) -> f64 {
    1.0 / (2.0 * (d as f64 + 2.0))
}

pub(crate) fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// A radial probability density on `R^d`, described by its log-profile.
pub trait RadialDensity: Sync {
    fn dim(&self) -> usize;

    /// `ln ρ` as a function of the radius.
    fn ln_profile(&self, r: f64) -> f64;

    /// First radial derivative of `ln ρ`.
    fn ln_profile_d1(&self, r: f64) -> f64;

    /// Second radial derivative of `ln ρ`.
    fn ln_profile_d2(&self, r: f64) -> f64;

    /// Radii where the profile is not smooth.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }

    fn quadrature(&self) -> QuadratureTolerance {
        QuadratureTolerance::default()
    }

    fn profile(&self, r: f64) -> f64 {
        self.ln_profile(r).exp()
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.profile(norm(x))
    }

    /// Euclidean norm of the gradient divided by `ρ`.
    fn log_gradient_norm(&self, x: &[f64]) -> f64 {
        self.ln_profile_d1(norm(x)).abs()
    }

    /// `V = -Δρ/ρ` with `Δ` the positive Laplacian, i.e. `Σ ∂²ρ / ρ`.
    fn potential(&self, x: &[f64]) -> f64 {
        let r = norm(x);
        let u1 = self.ln_profile_d1(r);
        let u2 = self.ln_profile_d2(r);
        let angular = if r > 0.0 {
            (self.dim() as f64 - 1.0) * u1 / r
        } else {
            // u1(r)/r -> u2(0) for smooth even profiles.
            (self.dim() as f64 - 1.0) * u2
        };
        u2 + u1 * u1 + angular
    }

    /// Supremum of `ρ` over the open ball `B_h(x)`; profiles are non-increasing.
    fn sup_on_ball(&self, x: &[f64], h: f64) -> f64 {
        self.profile((norm(x) - h).max(0.0))
    }

    /// `m_h(x) / (α_d h^d ρ(x))`, the normalized ball mass.
    fn ball_mass_ratio(&self, x: &[f64], h: f64) -> Result<f64> {
        assert_eq!(x.len(), self.dim(), "point dimension mismatch");
        let r0 = norm(x);
        let u0 = self.ln_profile(r0);
        let tol = self.quadrature();
        let breaks = self.breakpoints();
        match self.dim() {
            1 => {
                let x0 = x[0];
                let mut cuts: Vec<f64> = breaks.iter().flat_map(|&b| [b, -b]).collect();
                cuts.push(0.0);
                let v = quadrature::integrate(
                    |y| (self.ln_profile(y.abs()) - u0).exp(),
                    x0 - h,
                    x0 + h,
                    &cuts,
                    &tol,
                )?;
                Ok(v / (2.0 * h))
            }
            2 => {
                // Polar coordinates about x, with x rotated onto the first axis.
                let inner_tol = QuadratureTolerance {
                    rel_tol: tol.rel_tol * 0.1,
                    ..tol
                };
                let shell = |r: f64| -> Result<f64> {
                    if r == 0.0 {
                        return Ok(0.0);
                    }
                    let mut angles = Vec::new();
                    for &b in &breaks {
                        if r0 > 0.0 {
                            let c = (b * b - r0 * r0 - r * r) / (2.0 * r0 * r);
                            if c.abs() < 1.0 {
                                angles.push(c.acos());
                            }
                        }
                    }
                    let v = quadrature::integrate(
                        |t| {
                            let rad2 = r0 * r0 + r * r + 2.0 * r0 * r * t.cos();
                            (self.ln_profile(rad2.max(0.0).sqrt()) - u0).exp()
                        },
                        0.0,
                        PI,
                        &angles,
                        &inner_tol,
                    )?;
                    Ok(2.0 * r * v)
                };
                let mut radial_cuts = Vec::new();
                for &b in &breaks {
                    radial_cuts.push((b - r0).abs());
                    radial_cuts.push(b + r0);
                }
                let mut failure = None;
                let v = quadrature::integrate(
                    |r| match shell(r) {
                        Ok(v) => v,
                        Err(e) => {
                            failure.get_or_insert(e);
                            0.0
                        }
                    },
                    0.0,
                    h,
                    &radial_cuts,
                    &tol,
                )?;
                if let Some(e) = failure {
                    return Err(e);
                }
                Ok(v / (PI * h * h))
            }
            d => Err(Error::InvalidConfig(format!(
                "ball mass quadrature supports d in {{1, 2}}, got {d}"
            ))),
        }
    }

    /// `m_h(x) = μ(B_h(x))`.
    fn ball_mass(&self, x: &[f64], h: f64) -> Result<f64> {
        let d = self.dim();
        Ok(self.ball_mass_ratio(x, h)? * unit_ball_volume(d) * h.powi(d as i32) * self.value(x))
    }

    /// `a_h(x) = (α_d h^d ρ(x) / m_h(x))^{1/2}`.
    fn weight_a_h(&self, x: &[f64], h: f64) -> Result<f64> {
        Ok(self.ball_mass_ratio(x, h)?.recip().sqrt())
    }
}

/// Family tag of a shipped density.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityKind {
    Gaussian,
    TemperedExpType,
}

impl DensityKind {
    pub fn name(self) -> &'static str {
        match self {
            DensityKind::Gaussian => "gaussian",
            DensityKind::TemperedExpType => "tempered_exp_type",
        }
    }
}

/// On-disk description of a density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensityConfig {
    pub kind: DensityKind,
    pub dim: usize,
    pub alpha: f64,
    /// Transition radius of the tempered family; absent for Gaussians.
    #[serde(rename = "R", default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default)]
    pub quadrature: QuadratureTolerance,
}

impl DensityConfig {
    pub fn gaussian(dim: usize, alpha: f64) -> Self {
        Self {
            kind: DensityKind::Gaussian,
            dim,
            alpha,
            radius: None,
            quadrature: QuadratureTolerance::default(),
        }
    }

    pub fn tempered(dim: usize, alpha: f64, radius: f64) -> Self {
        Self {
            kind: DensityKind::TemperedExpType,
            dim,
            alpha,
            radius: Some(radius),
            quadrature: QuadratureTolerance::default(),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("density config is always serializable")
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))
    }
}

/// Smooth even core `s(r)` with `s(r) = r` beyond the transition radius.
///
/// Inside the core `s` is the even quartic matching value, slope and
/// curvature of `|x|` at `±R`; it is convex with `s(r) >= r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothedNorm {
    pub radius: f64,
}

impl SmoothedNorm {
    pub fn value(&self, r: f64) -> f64 {
        let big = self.radius;
        if r >= big {
            r
        } else {
            3.0 * big / 8.0 + 3.0 * r * r / (4.0 * big) - r.powi(4) / (8.0 * big.powi(3))
        }
    }

    pub fn d1(&self, r: f64) -> f64 {
        let big = self.radius;
        if r >= big {
            1.0
        } else {
            3.0 * r / (2.0 * big) - r.powi(3) / (2.0 * big.powi(3))
        }
    }

    pub fn d2(&self, r: f64) -> f64 {
        let big = self.radius;
        if r >= big {
            0.0
        } else {
            3.0 / (2.0 * big) - 3.0 * r * r / (2.0 * big.powi(3))
        }
    }
}

/// A shipped density: Gaussian `β e^{-α|x|²}` or tempered `β e^{-α s(|x|)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Density {
    config: DensityConfig,
    core: Option<SmoothedNorm>,
    ln_beta: f64,
}

impl Density {
    pub fn new(config: DensityConfig) -> Result<Self> {
        if !(config.dim == 1 || config.dim == 2) {
            return Err(Error::InvalidConfig(format!(
                "dim must be 1 or 2, got {}",
                config.dim
            )));
        }
        if !(config.alpha > 0.0 && config.alpha.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "alpha must be positive, got {}",
                config.alpha
            )));
        }
        if !(config.quadrature.rel_tol > 0.0 && config.quadrature.rel_tol < 1e-2) {
            return Err(Error::InvalidConfig("quadrature.rel_tol out of range".into()));
        }
        let d = config.dim as f64;
        let a = config.alpha;
        let (core, ln_beta) = match (config.kind, config.radius) {
            (DensityKind::Gaussian, None) => (None, 0.5 * d * (a / PI).ln()),
            (DensityKind::Gaussian, Some(_)) => {
                return Err(Error::InvalidConfig("Gaussian density takes no R".into()))
            }
            (DensityKind::TemperedExpType, Some(big)) if big > 0.0 && big.is_finite() => {
                let core = SmoothedNorm { radius: big };
                let tol = config.quadrature;
                let z = match config.dim {
                    1 => {
                        let inner =
                            quadrature::integrate(|r| (-a * core.value(r)).exp(), 0.0, big, &[], &tol)?;
                        2.0 * (inner + (-a * big).exp() / a)
                    }
                    _ => {
                        let inner = quadrature::integrate(
                            |r| r * (-a * core.value(r)).exp(),
                            0.0,
                            big,
                            &[],
                            &tol,
                        )?;
                        2.0 * PI * (inner + (-a * big).exp() * (big / a + 1.0 / (a * a)))
                    }
                };
                (Some(core), -z.ln())
            }
            (DensityKind::TemperedExpType, _) => {
                return Err(Error::InvalidConfig(
                    "tempered density needs a positive transition radius R".into(),
                ))
            }
        };
        Ok(Self {
            config,
            core,
            ln_beta,
        })
    }

    pub fn gaussian(dim: usize, alpha: f64) -> Result<Self> {
        Self::new(DensityConfig::gaussian(dim, alpha))
    }

    pub fn tempered(dim: usize, alpha: f64, radius: f64) -> Result<Self> {
        Self::new(DensityConfig::tempered(dim, alpha, radius))
    }

    pub fn config(&self) -> &DensityConfig {
        &self.config
    }

    pub fn kind(&self) -> DensityKind {
        self.config.kind
    }

    pub fn alpha(&self) -> f64 {
        self.config.alpha
    }

    pub fn beta(&self) -> f64 {
        self.ln_beta.exp()
    }

    /// Transition radius of the tempered core, zero for Gaussians.
    pub fn core_radius(&self) -> f64 {
        self.core.map_or(0.0, |c| c.radius)
    }

    pub fn core(&self) -> Option<SmoothedNorm> {
        self.core
    }

    /// Configured bottom of the essential spectrum of `L_ρ`: `α²` for the
    /// tempered family, unbounded for Gaussians.
    pub fn kappa(&self) -> f64 {
        match self.kind() {
            DensityKind::Gaussian => f64::INFINITY,
            DensityKind::TemperedExpType => self.alpha() * self.alpha(),
        }
    }

    /// Largest `|∇ρ|/ρ` over a sample of radii up to `r_max`.
    pub fn tempered_bound_constant(&self, r_max: f64, samples: usize) -> f64 {
        (0..=samples)
            .map(|i| self.ln_profile_d1(r_max * i as f64 / samples as f64).abs())
            .fold(0.0, f64::max)
    }

    /// Checks the configured `κ` against the potential far out; mismatch above
    /// `1e-3` is an error.
    pub fn check_kappa(&self) -> Result<f64> {
        if self.kind() == DensityKind::Gaussian {
            return Ok(self.kappa());
        }
        // The angular term α(d-1)/r decays slowly in d = 2; probe far out.
        let probe = (self.core_radius() + 1.0).max(1e4 * self.alpha());
        let mut x = vec![0.0; self.config.dim];
        x[0] = probe;
        let est = self.potential(&x);
        if (est - self.kappa()).abs() > 1e-3 {
            return Err(Error::InvalidConfig(format!(
                "kappa mismatch: configured {} vs probe {}",
                self.kappa(),
                est
            )));
        }
        Ok(est)
    }
}

impl RadialDensity for Density {
    fn dim(&self) -> usize {
        self.config.dim
    }

    fn ln_profile(&self, r: f64) -> f64 {
        let a = self.config.alpha;
        match self.core {
            None => self.ln_beta - a * r * r,
            Some(c) => self.ln_beta - a * c.value(r),
        }
    }

    fn ln_profile_d1(&self, r: f64) -> f64 {
        let a = self.config.alpha;
        match self.core {
            None => -2.0 * a * r,
            Some(c) => -a * c.d1(r),
        }
    }

    fn ln_profile_d2(&self, r: f64) -> f64 {
        let a = self.config.alpha;
        match self.core {
            None => -2.0 * a,
            Some(c) => -a * c.d2(r),
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.core.map(|c| vec![c.radius]).unwrap_or_default()
    }

    fn quadrature(&self) -> QuadratureTolerance {
        self.config.quadrature
    }
}

/// Probe-shell estimates of `κ` and `A_h`.
#[derive(Debug, Clone, Serialize)]
pub struct TailConstants {
    pub h: f64,
    /// Infimum of `V` over the probe shell.
    pub kappa_est: f64,
    /// Supremum of `a_h²` over the probe shell.
    pub a_h_est: f64,
    /// `|A_h - 1 + κ h²/(2(d+2))|` using the configured `κ`; `NaN` for Gaussians.
    pub residual: f64,
}

/// Estimates `κ` and `A_h` on the probe radii (taken along the first axis).
pub fn tail_constants(density: &Density, h: f64, probe_radii: &[f64]) -> Result<TailConstants> {
    if probe_radii.is_empty() {
        return Err(Error::InvalidConfig("no probe radii".into()));
    }
    for &r in probe_radii {
        if r <= density.core_radius() {
            return Err(Error::ProbeInsideCore {
                radius: r,
                core: density.core_radius(),
            });
        }
    }
    let d = density.dim();
    let mut kappa_est = f64::INFINITY;
    let mut a_h_est = f64::NEG_INFINITY;
    for &r in probe_radii {
        let mut x = vec![0.0; d];
        x[0] = r;
        kappa_est = kappa_est.min(density.potential(&x));
        a_h_est = a_h_est.max(density.ball_mass_ratio(&x, h)?.recip());
    }
    let residual = match density.kind() {
        DensityKind::Gaussian => f64::NAN,
        DensityKind::TemperedExpType => {
            (a_h_est - 1.0 + density.kappa() * gamma_d(d) * h * h).abs()
        }
    };
    Ok(TailConstants {
        h,
        kappa_est,
        a_h_est,
        residual,
    })
}

/// `min m_h(x) / (h^d ρ(x))` over the sample points: a witness constant for
/// the lower bound `μ(B_h(x)) >= C h^d ρ(x)`.
pub fn ball_mass_lower_constant<D: RadialDensity + ?Sized>(
    density: &D,
    h: f64,
    points: &[Vec<f64>],
) -> Result<f64> {
    let alpha_d = unit_ball_volume(density.dim());
    let mut c = f64::INFINITY;
    for p in points {
        c = c.min(alpha_d * density.ball_mass_ratio(p, h)?);
    }
    Ok(c)
}
