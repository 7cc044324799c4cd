//! Banded matrix storage and its plain-text on-disk format.
//!
//! ```text
//! # ballwalk banded-matrix v1
//! d 1
//! N 400
//! L 1.2e1
//! h 2.5e-1
//! scheme banded_quadrature
//! form conjugated
//! size 400
//! offsets -3 -2 -1 0 1 2 3
//! <row 0: one value per offset>
//! ...
//! ```
//!
//! Values are written in shortest round-trip form, so a write/read cycle is
//! bit-exact.

use std::io::{BufRead, Write};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::LinearOperator;

const MAGIC: &str = "# ballwalk banded-matrix v1";

/// Provenance carried in the file header.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandHeader {
    pub dim: usize,
    pub points_per_axis: usize,
    pub half_width: f64,
    pub h: f64,
    pub scheme: String,
    pub form: String,
}

/// Square matrix stored as one row of values per node, one column per diagonal offset.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedMatrix {
    pub header: BandHeader,
    pub offsets: Vec<isize>,
    /// Row-major `n × offsets.len()`; entry `(i, b)` is `A[i][i + offsets[b]]`.
    pub values: Vec<f64>,
    n: usize,
}

impl BandedMatrix {
    pub fn new(header: BandHeader, n: usize, offsets: Vec<isize>, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), n * offsets.len());
        assert!(offsets.windows(2).all(|w| w[0] < w[1]), "offsets must be increasing");
        Self {
            header,
            offsets,
            values,
            n,
        }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    /// Largest `|offset|`.
    pub fn half_bandwidth(&self) -> usize {
        self.offsets.iter().map(|o| o.unsigned_abs()).max().unwrap_or(0)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let off = j as isize - i as isize;
        match self.offsets.binary_search(&off) {
            Ok(b) => self.values[i * self.offsets.len() + b],
            Err(_) => 0.0,
        }
    }

    /// Largest `|A_ij - A_ji|`.
    pub fn asymmetry(&self) -> f64 {
        let nb = self.offsets.len();
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for (b, &o) in self.offsets.iter().enumerate() {
                let j = i as isize + o;
                if j < 0 || j >= self.n as isize {
                    continue;
                }
                let a = self.values[i * nb + b];
                worst = worst.max((a - self.get(j as usize, i)).abs());
            }
        }
        worst
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }

    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        let h = &self.header;
        writeln!(w, "{MAGIC}")?;
        writeln!(w, "d {}", h.dim)?;
        writeln!(w, "N {}", h.points_per_axis)?;
        writeln!(w, "L {:e}", h.half_width)?;
        writeln!(w, "h {:e}", h.h)?;
        writeln!(w, "scheme {}", h.scheme)?;
        writeln!(w, "form {}", h.form)?;
        writeln!(w, "size {}", self.n)?;
        let offs: Vec<String> = self.offsets.iter().map(|o| o.to_string()).collect();
        writeln!(w, "offsets {}", offs.join(" "))?;
        for row in self.values.chunks(self.offsets.len()) {
            let vals: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
            writeln!(w, "{}", vals.join(" "))?;
        }
        Ok(())
    }

    pub fn read<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let mut next = || -> Result<String> {
            lines
                .next()
                .ok_or_else(|| Error::Format("unexpected end of file".into()))?
                .map_err(Error::from)
        };
        if next()?.trim() != MAGIC {
            return Err(Error::Format("missing header line".into()));
        }
        let mut field = |key: &str| -> Result<String> {
            let line = next()?;
            let rest = line
                .strip_prefix(key)
                .and_then(|s| s.strip_prefix(' '))
                .ok_or_else(|| Error::Format(format!("expected `{key}`, got `{line}`")))?;
            Ok(rest.trim().to_string())
        };
        let num = |s: String| -> Result<f64> {
            s.parse::<f64>().map_err(|e| Error::Format(format!("{s}: {e}")))
        };
        let int = |s: String| -> Result<usize> {
            s.parse::<usize>().map_err(|e| Error::Format(format!("{s}: {e}")))
        };
        let header = BandHeader {
            dim: int(field("d")?)?,
            points_per_axis: int(field("N")?)?,
            half_width: num(field("L")?)?,
            h: num(field("h")?)?,
            scheme: field("scheme")?,
            form: field("form")?,
        };
        let n = int(field("size")?)?;
        let offsets = field("offsets")?
            .split_whitespace()
            .map(|s| s.parse::<isize>().map_err(|e| Error::Format(format!("{s}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        if offsets.is_empty() || !offsets.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Format("offsets must be non-empty and increasing".into()));
        }
        let mut values = Vec::with_capacity(n * offsets.len());
        for i in 0..n {
            let line = next()?;
            let row: Vec<f64> = line
                .split_whitespace()
                .map(|s| s.parse::<f64>().map_err(|e| Error::Format(format!("{s}: {e}"))))
                .collect::<Result<_>>()?;
            if row.len() != offsets.len() {
                return Err(Error::Format(format!("row {i} has {} values", row.len())));
            }
            values.extend(row);
        }
        Ok(Self::new(header, n, offsets, values))
    }
}

impl LinearOperator for BandedMatrix {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let nb = self.offsets.len();
        let n = self.n as isize;
        for i in 0..self.n {
            let row = &self.values[i * nb..(i + 1) * nb];
            let mut s = 0.0;
            for (v, &o) in row.iter().zip(&self.offsets) {
                let j = i as isize + o;
                if j >= 0 && j < n {
                    s += v * x[j as usize];
                }
            }
            y[i] = s;
        }
    }
}
