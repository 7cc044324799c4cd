//! Periodic Fourier-multiplier form of the ball average, `T̄_h = G_d(hD)`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::grid::Grid;
use crate::multiplier::eval_gd;

/// Symbol samples `G_d(h|ξ_k|)` on the discrete frequencies of a periodic grid.
#[derive(Clone)]
pub struct FourierKernel {
    dim: usize,
    n: usize,
    symbol: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for FourierKernel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FourierKernel")
            .field("dim", &self.dim)
            .field("n", &self.n)
            .finish_non_exhaustive()
    }
}

/// Signed integer frequency of FFT bin `k`.
fn signed_bin(k: usize, n: usize) -> i64 {
    if k <= n / 2 {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

impl FourierKernel {
    pub fn new(grid: &Grid, h: f64) -> Self {
        let n = grid.points_per_axis();
        let dim = grid.dim();
        let dxi = 2.0 * PI / (n as f64 * grid.spacing());
        let mut cache: HashMap<i64, f64> = HashMap::new();
        let mut sym = |key: i64| -> f64 {
            *cache
                .entry(key)
                .or_insert_with(|| eval_gd(dim, h * dxi * (key as f64).sqrt()))
        };
        let symbol = match dim {
            1 => (0..n)
                .map(|k| {
                    let s = signed_bin(k, n);
                    sym(s * s)
                })
                .collect(),
            _ => {
                let mut out = Vec::with_capacity(n * n);
                for k1 in 0..n {
                    for k2 in 0..n {
                        let (a, b) = (signed_bin(k1, n), signed_bin(k2, n));
                        out.push(sym(a * a + b * b));
                    }
                }
                out
            }
        };
        let mut planner = FftPlanner::new();
        Self {
            dim,
            n,
            symbol,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    pub fn symbol(&self) -> &[f64] {
        &self.symbol
    }

    fn transpose(&self, buf: &mut [Complex64]) {
        let n = self.n;
        for i in 0..n {
            for j in (i + 1)..n {
                buf.swap(i * n + j, j * n + i);
            }
        }
    }

    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let scale = 1.0 / (self.n.pow(self.dim as u32) as f64);
        match self.dim {
            1 => {
                self.forward.process(&mut buf);
                for (c, s) in buf.iter_mut().zip(&self.symbol) {
                    *c *= s * scale;
                }
                self.inverse.process(&mut buf);
            }
            _ => {
                // Row transforms, transpose, row transforms. The symbol is
                // symmetric under (k1, k2) -> (k2, k1), so the transposed
                // layout can be multiplied directly.
                self.forward.process(&mut buf);
                self.transpose(&mut buf);
                self.forward.process(&mut buf);
                for (c, s) in buf.iter_mut().zip(&self.symbol) {
                    *c *= s * scale;
                }
                self.inverse.process(&mut buf);
                self.transpose(&mut buf);
                self.inverse.process(&mut buf);
            }
        }
        for (o, c) in y.iter_mut().zip(&buf) {
            *o = c.re;
        }
    }
}
