//! The Fourier multiplier `G_d` of the normalized ball average.
//!
//! `G_d(ξ) = α_d^{-1} ∫_{|z|≤1} e^{iz·ξ} dz` is radial. In `d = 1` it is
//! `sin r / r`; otherwise it is evaluated from its power series for small
//! `r` and from the one-dimensional slice integral
//! `G_d(r) = (α_{d-1}/α_d) ∫_{-1}^{1} (1-t²)^{(d-1)/2} cos(rt) dt`
//! (with `t = sin θ`) beyond [`R_SWITCH`].

use serde::Serialize;

use crate::density::{gamma_d, unit_ball_volume};
use crate::quadrature;

/// Radius where evaluation switches from the series to quadrature.
pub const R_SWITCH: f64 = 2.0;

/// Radial profile `G_d(r)`, `r >= 0`.
pub fn eval_gd(d: usize, r: f64) -> f64 {
    debug_assert!(r >= 0.0);
    if d == 1 {
        return if r == 0.0 { 1.0 } else { r.sin() / r };
    }
    if r <= R_SWITCH {
        series(d, r)
    } else {
        slice_integral(d, r)
    }
}

/// `G_d'(r) = -r G_{d+2}(r) / (d+2)`.
pub fn eval_gd_derivative(d: usize, r: f64) -> f64 {
    -r * eval_gd(d + 2, r) / (d as f64 + 2.0)
}

/// Power series `Σ_k (-1)^k (r²/4)^k Γ(d/2+1) / (k! Γ(k+d/2+1))`.
pub fn series(d: usize, r: f64) -> f64 {
    let q = 0.25 * r * r;
    let nu = 0.5 * d as f64;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 0..200 {
        let kf = k as f64;
        term *= -q / ((kf + 1.0) * (kf + 1.0 + nu));
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

/// Slice-integral representation, spectrally accurate for any `r`.
pub fn slice_integral(d: usize, r: f64) -> f64 {
    let c = unit_ball_volume(d - 1) / unit_ball_volume(d);
    let panels = 2 + (r / 3.0).ceil() as usize;
    let half_pi = 0.5 * std::f64::consts::PI;
    let v = quadrature::fine_rule().composite(0.0, half_pi, panels, |t| {
        t.cos().powi(d as i32) * (r * t.sin()).cos()
    });
    2.0 * c * v
}

/// Location and value of the global minimum of `G_d`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MultiplierMinimum {
    pub r_star: f64,
    pub m: f64,
    /// Whether the minimum sits in the first negative lobe.
    pub first_lobe: bool,
}

const SCAN_LIMIT: f64 = 50.0;
const SCAN_STEP: f64 = 0.01;

/// Finds `M = min G_d` by a scan to `r = 50` followed by bisection on `G_d'`.
pub fn find_min_m(d: usize) -> MultiplierMinimum {
    let steps = (SCAN_LIMIT / SCAN_STEP) as usize;
    let mut best = (0usize, f64::INFINITY);
    let mut first_lobe_end = None;
    let mut prev = eval_gd(d, 0.0);
    for i in 1..=steps {
        let g = eval_gd(d, i as f64 * SCAN_STEP);
        if g < best.1 {
            best = (i, g);
        }
        if first_lobe_end.is_none() && prev < 0.0 && g >= 0.0 {
            first_lobe_end = Some(i);
        }
        prev = g;
    }
    let i = best.0;
    let mut lo = (i - 1) as f64 * SCAN_STEP;
    let mut hi = (i + 1) as f64 * SCAN_STEP;
    // G' < 0 before the minimum and > 0 after.
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if eval_gd_derivative(d, mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let r_star = 0.5 * (lo + hi);
    MultiplierMinimum {
        r_star,
        m: eval_gd(d, r_star),
        first_lobe: first_lobe_end.is_some_and(|end| i < end),
    }
}

/// Result of checking `1 - G_d(r) = γ_d r² + O(r⁴)` on a sample.
#[derive(Debug, Clone, Serialize)]
pub struct TaylorReport {
    pub dim: usize,
    pub gamma_d: f64,
    /// `max |1 - G_d(r) - γ_d r²| / r⁴` over the sample.
    pub c_fit: f64,
    /// Smallest `F(r²) = (1 - G_d(r)) / r²` on the sample.
    pub min_f: f64,
    pub f_positive: bool,
}

/// Checks the small-`r` structure of `G_d` on samples in `(0, 1]`.
pub fn taylor_check(d: usize, r_samples: &[f64]) -> TaylorReport {
    let gd = gamma_d(d);
    let mut c_fit: f64 = 0.0;
    let mut min_f = f64::INFINITY;
    for &r in r_samples {
        assert!(r > 0.0 && r <= 1.0, "Taylor samples must lie in (0, 1]");
        let defect = 1.0 - eval_gd(d, r);
        c_fit = c_fit.max((defect - gd * r * r).abs() / r.powi(4));
        min_f = min_f.min(defect / (r * r));
    }
    TaylorReport {
        dim: d,
        gamma_d: gd,
        c_fit,
        min_f,
        f_positive: min_f > 0.0,
    }
}

/// `G_d` with its minimum precomputed.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MultiplierTable {
    pub dim: usize,
    pub m: f64,
    pub r_star: f64,
    pub gamma_d: f64,
}

impl MultiplierTable {
    pub fn new(dim: usize) -> Self {
        let min = find_min_m(dim);
        Self {
            dim,
            m: min.m,
            r_star: min.r_star,
            gamma_d: gamma_d(dim),
        }
    }

    pub fn eval(&self, r: f64) -> f64 {
        eval_gd(self.dim, r)
    }

    /// `(r, G_d(r))` rows on `[0, r_max]`.
    pub fn table(&self, r_max: f64, step: f64) -> Vec<(f64, f64)> {
        let n = (r_max / step).round() as usize;
        (0..=n)
            .map(|i| {
                let r = i as f64 * step;
                (r, self.eval(r))
            })
            .collect()
    }
}
