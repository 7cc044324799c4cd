//! Extremal eigenpairs and eigenvalue counts of the discrete operators.

mod inertia;
mod lanczos;
pub mod tridiagonal;

pub use inertia::{count_below, count_below_robust};
pub use lanczos::{lanczos_largest, LanczosOptions, LanczosOutput};

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{BandedMatrix, LinearOperator, SchrodingerOperator};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    DenseReference,
    LanczosFull,
    SturmBisection,
}

/// Eigenvalues within `1e-8` relative of each other, reported once.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    pub value: f64,
    pub size: usize,
}

/// Eigenpairs with unit Euclidean eigenvectors.
///
/// Multiplying a vector by `δ^{-d/2}` gives unit norm in the grid's `L²(dx)` inner product.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EigenResult {
    /// Descending for [`top_k`], ascending for [`bottom_k`].
    pub eigenvalues: Vec<f64>,
    #[serde(skip)]
    pub eigenvectors: Vec<Vec<f64>>,
    /// `‖Av - λv‖` per pair.
    pub residuals: Vec<f64>,
    pub method: Method,
    pub norm_estimate: f64,
    pub clusters: Vec<Cluster>,
    pub size: usize,
}

pub fn clusters(values: &[f64]) -> Vec<Cluster> {
    let mut out: Vec<Cluster> = Vec::new();
    for &v in values {
        match out.last_mut() {
            Some(c) if (v - c.value).abs() <= 1e-8 * c.value.abs().max(1.0) => c.size += 1,
            _ => out.push(Cluster { value: v, size: 1 }),
        }
    }
    out
}

impl EigenResult {
    fn assemble(
        eigenvalues: Vec<f64>,
        eigenvectors: Vec<Vec<f64>>,
        residuals: Vec<f64>,
        method: Method,
        norm_estimate: f64,
        size: usize,
    ) -> Self {
        Self {
            clusters: clusters(&eigenvalues),
            eigenvalues,
            eigenvectors,
            residuals,
            method,
            norm_estimate,
            size,
        }
    }

    /// Largest `|⟨v_i, v_j⟩ - δ_ij|`.
    pub fn orthonormality_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, a) in self.eigenvectors.iter().enumerate() {
            for (j, b) in self.eigenvectors.iter().enumerate().skip(i) {
                let d: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((d - target).abs());
            }
        }
        worst
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("eigen results serialize")
    }
}

fn explicit_residual<O: LinearOperator + ?Sized>(op: &O, v: &[f64], lambda: f64) -> f64 {
    let av = op.matvec(v);
    av.iter().zip(v).map(|(a, b)| (a - lambda * b).powi(2)).sum::<f64>().sqrt()
}

/// The `k` largest eigenpairs, descending, by restarted Lanczos.
pub fn top_k<O: LinearOperator + ?Sized>(op: &O, k: usize, opts: &LanczosOptions) -> Result<EigenResult> {
    if k > 50 {
        return Err(Error::InvalidConfig(format!("top_k supports k <= 50, got {k}")));
    }
    let out = lanczos_largest(op, k, opts)?;
    Ok(EigenResult::assemble(
        out.values,
        out.vectors,
        out.residuals,
        Method::LanczosFull,
        out.norm_estimate,
        op.dim(),
    ))
}

/// `cI - A` as an operator.
struct Reflected<'a, O: ?Sized> {
    op: &'a O,
    c: f64,
}

impl<O: LinearOperator + ?Sized> LinearOperator for Reflected<'_, O> {
    fn dim(&self) -> usize {
        self.op.dim()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.op.apply(x, y);
        for (o, v) in y.iter_mut().zip(x) {
            *o = self.c * v - *o;
        }
    }
}

/// The `k` smallest eigenpairs of `L_ρ`, ascending.
///
/// `d = 1` uses Sturm bisection on the tridiagonal matrix with inverse
/// iteration for the vectors; `d = 2` runs Lanczos on `cI - L_ρ` with `c` a
/// Gershgorin bound above the spectrum.
pub fn bottom_k(op: &SchrodingerOperator, k: usize, opts: &LanczosOptions) -> Result<EigenResult> {
    let n = op.dim();
    if k > n {
        return Err(Error::InvalidConfig(format!("asked for {k} eigenpairs of a {n}-dimensional operator")));
    }
    let norm = op.upper_bound().abs().max(op.lower_bound().abs());
    if op.grid.dim() == 1 {
        let (diag, off) = op.tridiagonal();
        let values: Vec<f64> = (0..k).map(|j| tridiagonal::kth_smallest(&diag, &off, j)).collect();
        let vectors = tridiagonal::eigenvectors(&diag, &off, &values);
        let residuals = values
            .iter()
            .zip(&vectors)
            .map(|(l, v)| explicit_residual(op, v, *l))
            .collect();
        return Ok(EigenResult::assemble(values, vectors, residuals, Method::SturmBisection, norm, n));
    }
    let c = op.upper_bound();
    let reflected = Reflected { op, c };
    let out = lanczos_largest(&reflected, k, opts)?;
    let values: Vec<f64> = out.values.iter().map(|t| c - t).collect();
    let residuals = values
        .iter()
        .zip(&out.vectors)
        .map(|(l, v)| explicit_residual(op, v, *l))
        .collect();
    Ok(EigenResult::assemble(values, out.vectors, residuals, Method::LanczosFull, norm, n))
}

/// Full eigen-decomposition of a symmetric matrix, ascending.
pub fn dense_spectrum(m: &DMatrix<f64>) -> (Vec<f64>, Vec<Vec<f64>>) {
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = order
        .iter()
        .map(|&i| eig.eigenvectors.column(i).iter().copied().collect())
        .collect();
    (values, vectors)
}

/// Dense matrix of an operator, assembled from its action on unit vectors and symmetrized.
pub fn densify<O: LinearOperator + ?Sized>(op: &O) -> DMatrix<f64> {
    let n = op.dim();
    let mut m = DMatrix::zeros(n, n);
    let mut e = vec![0.0; n];
    let mut col = vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        op.apply(&e, &mut col);
        e[j] = 0.0;
        for i in 0..n {
            m[(i, j)] = col[i];
        }
    }
    let t = m.transpose();
    (m + t) * 0.5
}

/// The `k` largest (or smallest) eigenpairs by dense decomposition; the reference
/// for checking the iterative solvers.
pub fn dense_reference<O: LinearOperator + ?Sized>(op: &O, k: usize, largest: bool) -> Result<EigenResult> {
    let n = op.dim();
    if n > 4000 {
        return Err(Error::InvalidConfig(format!("dense reference limited to 4000 nodes, got {n}")));
    }
    let m = densify(op);
    let norm = m.iter().map(|v| v.abs()).fold(0.0, f64::max) * n as f64;
    let (mut values, mut vectors) = dense_spectrum(&m);
    if largest {
        values.reverse();
        vectors.reverse();
    }
    values.truncate(k);
    vectors.truncate(k);
    let residuals = values
        .iter()
        .zip(&vectors)
        .map(|(l, v)| explicit_residual(op, v, *l))
        .collect();
    Ok(EigenResult::assemble(values, vectors, residuals, Method::DenseReference, norm, n))
}

/// Eigenvalue count of a symmetric banded matrix in `[a, b)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CountResult {
    pub a: f64,
    pub b: f64,
    pub count: usize,
    /// Shifts actually factored, after any nudges off an eigenvalue.
    pub shifts: [f64; 2],
    pub method: String,
}

/// Number of eigenvalues in `[a, b)` from the inertia of `A - aI` and `A - bI`.
pub fn count_in_interval(op: &BandedMatrix, a: f64, b: f64) -> Result<CountResult> {
    if !(a < b) {
        return Err(Error::InvalidConfig(format!("empty interval [{a}, {b})")));
    }
    if op.half_bandwidth() >= 2000 {
        return Err(Error::InvalidConfig("banded count needs bandwidth below 2000".into()));
    }
    let scale = (0..op.size())
        .map(|i| op.offsets.iter().enumerate().map(|(b, _)| op.values[i * op.offsets.len() + b].abs()).sum::<f64>())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let (lo, sa) = count_below_robust(op, a, scale)?;
    let (hi, sb) = count_below_robust(op, b, scale)?;
    Ok(CountResult {
        a,
        b,
        count: hi - lo,
        shifts: [sa, sb],
        method: "sylvester_inertia".into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::operator::BandHeader;

    struct Diagonal(Vec<f64>);

    impl LinearOperator for Diagonal {
        fn dim(&self) -> usize {
            self.0.len()
        }
        fn apply(&self, x: &[f64], y: &mut [f64]) {
            for i in 0..x.len() {
                y[i] = self.0[i] * x[i];
            }
        }
    }

    #[test]
    fn identity_gives_all_ones() {
        let op = Diagonal(vec![1.0; 40]);
        let r = top_k(&op, 5, &LanczosOptions::default()).unwrap();
        assert_eq!(r.eigenvalues.len(), 5);
        assert!(r.eigenvalues.iter().all(|v| (v - 1.0).abs() < 1e-12));
        assert_eq!(r.clusters.len(), 1);
        assert_eq!(r.clusters[0].size, 5);
        assert!(r.orthonormality_defect() < 1e-10);
    }

    #[test]
    fn repeated_eigenvalues_are_all_found() {
        let mut d: Vec<f64> = (0..300).map(|i| (i as f64 * 0.731).sin() * 0.5).collect();
        d[17] = 2.0;
        d[130] = 2.0;
        d[201] = 2.0;
        d[5] = 1.5;
        let r = top_k(&Diagonal(d), 4, &LanczosOptions::default()).unwrap();
        assert!(r.eigenvalues[..3].iter().all(|v| (v - 2.0).abs() < 1e-12));
        assert!((r.eigenvalues[3] - 1.5).abs() < 1e-12);
    }

    #[test]
    fn free_schrodinger_matches_box_modes() {
        let g = Grid::new(1, 2.0, 400).unwrap();
        let op = SchrodingerOperator::with_potential(&g, |_| 0.0);
        let r = bottom_k(&op, 4, &LanczosOptions::default()).unwrap();
        let delta = g.spacing();
        for (k, v) in r.eigenvalues.iter().enumerate() {
            let theta = (k + 1) as f64 * std::f64::consts::PI / 4.0;
            let exact_discrete = 4.0 / (delta * delta) * (0.5 * theta * delta).sin().powi(2);
            assert!((v - exact_discrete).abs() < 1e-9);
            assert!((v - theta * theta).abs() < theta.powi(4) * delta * delta / 12.0 * 1.01);
        }
    }

    #[test]
    fn two_dimensional_schrodinger_uses_lanczos() {
        let g = Grid::new(2, 1.0, 16).unwrap();
        let op = SchrodingerOperator::with_potential(&g, |_| 0.0);
        let r = bottom_k(&op, 3, &LanczosOptions::default()).unwrap();
        let dense = dense_reference(&op, 3, false).unwrap();
        for (a, b) in r.eigenvalues.iter().zip(&dense.eigenvalues) {
            assert!((a - b).abs() < 1e-9);
        }
        assert_eq!(r.clusters[1].size, 2);
    }

    #[test]
    fn inertia_count_matches_dense() {
        let n = 60;
        let offsets = vec![-2, -1, 0, 1, 2];
        let mut values = vec![0.0; n * 5];
        for i in 0..n {
            values[i * 5 + 2] = (i as f64 * 0.3).cos() * 2.0;
            for (b, o) in [(1usize, -1isize), (3, 1)] {
                let j = i as isize + o;
                if j >= 0 && j < n as isize {
                    values[i * 5 + b] = -0.4;
                }
            }
            for (b, o) in [(0usize, -2isize), (4, 2)] {
                let j = i as isize + o;
                if j >= 0 && j < n as isize {
                    values[i * 5 + b] = 0.15;
                }
            }
        }
        let header = BandHeader {
            dim: 1,
            points_per_axis: n,
            half_width: 1.0,
            h: 0.1,
            scheme: "test".into(),
            form: "test".into(),
        };
        let m = BandedMatrix::new(header, n, offsets, values);
        let (spec, _) = dense_spectrum(&m.to_dense());
        for (a, b) in [(-1.0, 0.5), (-3.0, 3.0), (0.2, 1.7)] {
            let c = count_in_interval(&m, a, b).unwrap();
            let expected = spec.iter().filter(|&&v| v >= a && v < b).count();
            assert_eq!(c.count, expected);
        }
    }
}
