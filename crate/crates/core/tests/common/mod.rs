//! Reference computations that share no code with the library.
#![allow(dead_code)]

use libm::{erf, erfc};
use std::f64::consts::PI;

/// Composite Simpson rule with `panels` (even) subintervals.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let n = panels + panels % 2;
    let w = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let c = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += c * f(a + i as f64 * w);
    }
    s * w / 3.0
}

/// `erf(b) - erf(a)` without cancellation in the tails.
fn erf_diff(a: f64, b: f64) -> f64 {
    if a >= 0.0 {
        erfc(a) - erfc(b)
    } else if b <= 0.0 {
        erfc(-b) - erfc(-a)
    } else {
        erf(b) - erf(a)
    }
}

/// `m_h(x) / (2h ρ(x))` for `ρ ∝ e^{-αx²}` on the line, by completing the square.
pub fn gaussian_ratio_1d(alpha: f64, h: f64, x: f64) -> f64 {
    let s = alpha.sqrt();
    let x = x.abs();
    // e^{αx²}(erfc(s(x-h)) - erfc(s(x+h))) with the exponent folded in to avoid overflow.
    if s * (x - h) > 3.0 {
        let scaled = |z: f64| erfc(z) * (z * z).exp();
        let a = s * (x - h);
        let b = s * (x + h);
        let v = scaled(a) * (alpha * x * x - a * a).exp() - scaled(b) * (alpha * x * x - b * b).exp();
        return PI.sqrt() / (4.0 * h * s) * v;
    }
    (alpha * x * x).exp() * PI.sqrt() / (4.0 * h * s) * erf_diff(s * (x - h), s * (x + h))
}

/// Unnormalized density of `ν_h` for the same Gaussian: `g ρ²` up to constants.
pub fn gaussian_nu_1d(alpha: f64, h: f64, y: f64) -> f64 {
    let s = alpha.sqrt();
    (-alpha * y * y).exp() * erf_diff(s * (y - h), s * (y + h))
}

/// `(1/π) ∫_{|z|<1} e^{i r z_1} dz` in polar coordinates: periodic trapezoid in
/// the angle, Simpson in the radius.
pub fn g2_polar(r: f64) -> f64 {
    let angles = 256;
    let radial = |rho: f64| {
        let mut s = 0.0;
        for j in 0..angles {
            let t = 2.0 * PI * j as f64 / angles as f64;
            s += (r * rho * t.cos()).cos();
        }
        rho * s * 2.0 * PI / angles as f64
    };
    simpson(radial, 0.0, 1.0, 4000) / PI
}

/// Minimum of `sin r / r` by a scan with step `1e-6` over `[3, 6]`.
pub fn sinc_minimum() -> f64 {
    let steps = 3_000_000;
    (0..=steps)
        .map(|i| {
            let r = 3.0 + 3.0 * i as f64 / steps as f64;
            r.sin() / r
        })
        .fold(f64::INFINITY, f64::min)
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}
