//! Gauss–Legendre rules and a globally adaptive integrator built on them.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Points per panel of the adaptive rule.
const PANEL_ORDER: usize = 15;

/// Tolerances shared by every adaptive integration in a density model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureTolerance {
    /// Target relative accuracy.
    pub rel_tol: f64,
    /// Maximum number of interval bisections before giving up.
    pub max_subdivisions: usize,
}

impl Default for QuadratureTolerance {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            max_subdivisions: 4000,
        }
    }
}

/// Nodes and weights of an `n`-point Gauss–Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Builds the rule by Newton iteration on the Legendre polynomial P_n.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Tricomi's initial guess.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    /// Applies the rule on [a, b].
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let c = 0.5 * (a + b);
        let r = 0.5 * (b - a);
        let mut s = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            s += w * f(c + r * x);
        }
        s * r
    }

    /// Composite rule with `panels` equal panels on [a, b].
    pub fn composite<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, panels: usize, mut f: F) -> f64 {
        let w = (b - a) / panels as f64;
        (0..panels)
            .map(|p| {
                let lo = a + p as f64 * w;
                self.integrate(lo, lo + w, &mut f)
            })
            .sum()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Shared 15-point rule used by the adaptive integrator.
pub fn panel_rule() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(PANEL_ORDER))
}

/// Shared 20-point rule for fixed composite integration.
pub fn fine_rule() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(20))
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn segment<F: FnMut(f64) -> f64>(a: f64, b: f64, f: &mut F) -> Segment {
    let rule = panel_rule();
    let m = 0.5 * (a + b);
    let coarse = rule.integrate(a, b, &mut *f);
    let fine = rule.integrate(a, m, &mut *f) + rule.integrate(m, b, &mut *f);
    Segment {
        a,
        b,
        value: fine,
        error: (fine - coarse).abs(),
    }
}

/// Globally adaptive Gauss–Legendre integration of `f` over [a, b].
///
/// `breakpoints` are interior points where `f` is not smooth; the initial
/// partition is split there. The segment with the largest error estimate is
/// bisected until the summed error is below `rel_tol * |integral|`.
pub fn integrate<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    tol: &QuadratureTolerance,
) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    if b < a {
        return integrate(f, b, a, breakpoints, tol).map(|v| -v);
    }
    let mut cuts = vec![a];
    let mut inner: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|&p| p > a && p < b)
        .collect();
    inner.sort_by(f64::total_cmp);
    cuts.extend(inner);
    cuts.push(b);

    let mut segs: Vec<Segment> = cuts
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| segment(w[0], w[1], &mut f))
        .collect();

    for _ in 0..tol.max_subdivisions {
        let total: f64 = segs.iter().map(|s| s.value).sum();
        let err: f64 = segs.iter().map(|s| s.error).sum();
        if err <= tol.rel_tol * total.abs() || err < f64::MIN_POSITIVE {
            return Ok(total);
        }
        let (worst, _) = segs
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .expect("at least one segment");
        let s = segs.swap_remove(worst);
        let m = 0.5 * (s.a + s.b);
        if m <= s.a || m >= s.b {
            // Interval exhausted at machine resolution; keep what we have.
            segs.push(Segment { error: 0.0, ..s });
            continue;
        }
        segs.push(segment(s.a, m, &mut f));
        segs.push(segment(m, s.b, &mut f));
    }
    let total: f64 = segs.iter().map(|s| s.value).sum();
    let err: f64 = segs.iter().map(|s| s.error).sum();
    if err <= tol.rel_tol * total.abs() {
        Ok(total)
    } else {
        Err(Error::QuadratureNotConverged {
            a,
            b,
            tol: tol.rel_tol,
            estimate: total,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_integrates_polynomials_exactly() {
        let rule = GaussLegendre::new(8);
        // Degree 15 is the exactness limit of an 8-point rule.
        let exact = 2.0 / 15.0;
        let got = rule.integrate(-1.0, 1.0, |x| x.powi(14) + x.powi(15));
        assert!((got - exact).abs() < 1e-14, "{got}");
        assert!((rule.weights.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn adaptive_handles_kinks() {
        let tol = QuadratureTolerance::default();
        let v = integrate(|x: f64| (x - 0.3).abs(), -1.0, 1.0, &[0.3], &tol).unwrap();
        let exact = 0.5 * 1.3f64.powi(2) + 0.5 * 0.7f64.powi(2);
        assert!((v - exact).abs() < 1e-12);
        let g = integrate(|x: f64| (-x * x).exp(), -8.0, 8.0, &[], &tol).unwrap();
        assert!((g - std::f64::consts::PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn reports_nonconvergence() {
        let tol = QuadratureTolerance {
            rel_tol: 1e-14,
            max_subdivisions: 3,
        };
        let r = integrate(|x: f64| (1.0 / x).sin(), 1e-4, 1.0, &[], &tol);
        assert!(matches!(r, Err(Error::QuadratureNotConverged { .. })));
    }
}
