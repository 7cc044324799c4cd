//! Thick-restart Lanczos with full reorthogonalization and locking.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::LinearOperator;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LanczosOptions {
    /// Krylov basis size per cycle; `0` picks `max(3k + 40, 100)`.
    pub krylov_dim: usize,
    pub max_restarts: usize,
    /// Converged when `‖Av - θv‖ ≤ tol · ‖A‖`.
    pub tol: f64,
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self {
            krylov_dim: 0,
            max_restarts: 300,
            tol: 1e-10,
            seed: 0x0bad_5eed,
        }
    }
}

/// Converged extremal pairs, largest first.
#[derive(Debug, Clone)]
pub struct LanczosOutput {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
    pub norm_estimate: f64,
    pub matvecs: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    y.iter_mut().zip(x).for_each(|(v, a)| *v += alpha * a);
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Two passes of classical Gram-Schmidt against every basis vector.
fn orthogonalize(w: &mut [f64], bases: &[&[Vec<f64>]]) {
    for _ in 0..2 {
        for basis in bases {
            for q in basis.iter() {
                let c = dot(q, w);
                axpy(-c, q, w);
            }
        }
    }
}

fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

/// Orthonormal basis `V`, the images `AV`, and the unit vector that continues the Krylov sequence.
struct Subspace {
    basis: Vec<Vec<f64>>,
    images: Vec<Vec<f64>>,
    next: Option<Vec<f64>>,
}

/// Extends `space` by Lanczos steps from `space.next` until it holds `m` vectors.
fn extend<O: LinearOperator + ?Sized>(
    op: &O,
    space: &mut Subspace,
    locked: &[Vec<f64>],
    m: usize,
    norm_est: &mut f64,
    matvecs: &mut usize,
) {
    let n = op.dim();
    while space.basis.len() < m {
        let Some(q) = space.next.take() else { break };
        let mut w = vec![0.0; n];
        op.apply(&q, &mut w);
        *matvecs += 1;
        *norm_est = norm_est.max(norm(&w));
        let aq = w.clone();
        space.basis.push(q);
        space.images.push(aq);
        orthogonalize(&mut w, &[locked, &space.basis]);
        let b = norm(&w);
        if b > 1e-13 * norm_est.max(f64::MIN_POSITIVE) {
            w.iter_mut().for_each(|v| *v /= b);
            space.next = Some(w);
        }
    }
}

/// Rayleigh–Ritz on `span(V)`: Ritz values descending with coefficient vectors.
fn ritz(space: &Subspace) -> (Vec<f64>, Vec<Vec<f64>>) {
    let m = space.basis.len();
    let h = DMatrix::from_fn(m, m, |i, j| {
        0.5 * (dot(&space.basis[i], &space.images[j]) + dot(&space.basis[j], &space.images[i]))
    });
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let coefs = order.iter().map(|&i| eig.eigenvectors.column(i).iter().copied().collect()).collect();
    (values, coefs)
}

fn combine(vectors: &[Vec<f64>], coef: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; vectors[0].len()];
    for (v, c) in vectors.iter().zip(coef) {
        axpy(*c, v, &mut y);
    }
    y
}

fn fresh_start(rng: &mut ChaCha8Rng, n: usize, locked: &[Vec<f64>]) -> Option<Vec<f64>> {
    for _ in 0..4 {
        let mut v = random_vector(rng, n);
        orthogonalize(&mut v, &[locked]);
        let nv = norm(&v);
        if nv > 1e-8 {
            v.iter_mut().for_each(|x| *x /= nv);
            return Some(v);
        }
    }
    None
}

/// The `k` largest eigenpairs of a symmetric operator.
///
/// Thick-restarted Lanczos: each cycle keeps the leading unconverged Ritz
/// vectors and continues the Krylov sequence from the residual direction.
/// Converged Ritz pairs are locked and deflated, which lets repeated
/// eigenvalues surface one copy at a time. Once `k` pairs are locked, cycles
/// from fresh random vectors confirm that nothing above the `k`-th value was
/// missed.
pub fn lanczos_largest<O: LinearOperator + ?Sized>(op: &O, k: usize, opts: &LanczosOptions) -> Result<LanczosOutput> {
    let n = op.dim();
    if k > n {
        return Err(Error::InvalidConfig(format!("asked for {k} eigenpairs of a {n}-dimensional operator")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let m_target = if opts.krylov_dim == 0 {
        (3 * k + 40).max(100)
    } else {
        opts.krylov_dim
    };
    let mut locked_vecs: Vec<Vec<f64>> = Vec::new();
    let mut locked_vals: Vec<f64> = Vec::new();
    let mut locked_res: Vec<f64> = Vec::new();
    let mut norm_est: f64 = 0.0;
    let mut matvecs = 0;
    let mut space = Subspace {
        basis: Vec::new(),
        images: Vec::new(),
        next: fresh_start(&mut rng, n, &[]),
    };
    let mut random_start = true;
    let mut confirmed = k == 0;
    let mut worst = f64::INFINITY;
    for _restart in 0..opts.max_restarts {
        if confirmed {
            break;
        }
        let room = n - locked_vecs.len();
        if room == 0 {
            confirmed = true;
            break;
        }
        if space.basis.is_empty() && space.next.is_none() {
            match fresh_start(&mut rng, n, &locked_vecs) {
                Some(v) => space.next = Some(v),
                None => {
                    confirmed = true;
                    break;
                }
            }
            random_start = true;
        }
        extend(op, &mut space, &locked_vecs, m_target.min(room), &mut norm_est, &mut matvecs);
        let (theta, coefs) = ritz(&space);
        let full = locked_vals.len() >= k;
        let wanted = if full {
            let threshold = locked_vals[k - 1] + 1e-8 * norm_est;
            theta.iter().take_while(|&&t| t > threshold).count()
        } else {
            k - locked_vals.len()
        };
        if wanted == 0 {
            if random_start {
                confirmed = true;
                continue;
            }
            space = Subspace {
                basis: Vec::new(),
                images: Vec::new(),
                next: None,
            };
            continue;
        }
        let tol = opts.tol * norm_est;
        let keep = (2 * wanted + 10).min(space.basis.len() / 2).max(wanted.min(space.basis.len()));
        let mut kept = Vec::new();
        let mut kept_images = Vec::new();
        let mut prefix = true;
        worst = 0.0;
        for (i, s) in coefs.iter().enumerate().take(keep) {
            let y = combine(&space.basis, s);
            let ay = combine(&space.images, s);
            let r: f64 = ay.iter().zip(&y).map(|(a, b)| (a - theta[i] * b).powi(2)).sum::<f64>().sqrt();
            if prefix && i < wanted && r <= tol {
                let ny = norm(&y);
                locked_vals.push(dot(&y, &ay) / (ny * ny));
                locked_vecs.push(y.iter().map(|v| v / ny).collect());
                locked_res.push(r);
                continue;
            }
            if i < wanted {
                worst = worst.max(r);
            }
            prefix = false;
            kept.push(y);
            kept_images.push(ay);
        }
        if locked_vals.len() > k {
            let mut order: Vec<usize> = (0..locked_vals.len()).collect();
            order.sort_by(|&a, &b| locked_vals[b].total_cmp(&locked_vals[a]));
            order.truncate(k);
            locked_vals = order.iter().map(|&i| locked_vals[i]).collect();
            locked_res = order.iter().map(|&i| locked_res[i]).collect();
            locked_vecs = order.iter().map(|&i| locked_vecs[i].clone()).collect();
        }
        let mut next = space.next.take();
        if let Some(v) = next.as_mut() {
            orthogonalize(v, &[&locked_vecs, &kept]);
            let nv = norm(v);
            if nv > 1e-8 {
                v.iter_mut().for_each(|x| *x /= nv);
            } else {
                next = None;
            }
        }
        if next.is_none() {
            next = fresh_start(&mut rng, n, &locked_vecs).map(|mut v| {
                orthogonalize(&mut v, &[&kept]);
                let nv = norm(&v);
                v.iter_mut().for_each(|x| *x /= nv);
                v
            });
        }
        random_start = false;
        space = Subspace {
            basis: kept,
            images: kept_images,
            next,
        };
    }
    if locked_vals.len() < k || !confirmed {
        return Err(Error::NoConvergence {
            iterations: matvecs,
            residual: worst,
        });
    }
    let mut order: Vec<usize> = (0..locked_vals.len()).collect();
    order.sort_by(|&a, &b| locked_vals[b].total_cmp(&locked_vals[a]));
    Ok(LanczosOutput {
        values: order.iter().map(|&i| locked_vals[i]).collect(),
        vectors: order.iter().map(|&i| locked_vecs[i].clone()).collect(),
        residuals: order.iter().map(|&i| locked_res[i]).collect(),
        norm_estimate: norm_est,
        matvecs,
    })
}
