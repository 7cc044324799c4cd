//! Sylvester inertia of shifted banded matrices.

use crate::error::{Error, Result};
use crate::operator::BandedMatrix;

/// Number of eigenvalues of `A` strictly below `shift`, from the signs of the
/// pivots of `A - shift·I = L D Lᵀ`.
///
/// The factorization is unpivoted and works on the full envelope of the band.
/// A pivot smaller than `1e-13 ‖A‖` means the shift sits on (or next to) an
/// eigenvalue and is reported as [`Error::ShiftHitsEigenvalue`].
pub fn count_below(a: &BandedMatrix, shift: f64, scale: f64) -> Result<usize> {
    let n = a.size();
    let p = a.half_bandwidth();
    let w = p + 1;
    // Row i holds L[i][i-p..=i] with the diagonal slot storing D[i].
    let mut band = vec![0.0; n * w];
    for i in 0..n {
        for (b, &o) in a.offsets.iter().enumerate() {
            if o <= 0 {
                let j = i as isize + o;
                if j >= 0 {
                    band[i * w + (p as isize + o) as usize] = a.values[i * a.offsets.len() + b];
                }
            }
        }
        band[i * w + p] -= shift;
    }
    let guard = 1e-13 * scale;
    let mut negatives = 0;
    let mut ld = vec![0.0; w];
    for i in 0..n {
        let lo = i.saturating_sub(p);
        // Turn row i into L[i][j] D[j] products, then into L[i][j].
        for j in lo..i {
            let jlo = lo.max(j.saturating_sub(p));
            let mut s = band[i * w + (j + p - i)];
            for k in jlo..j {
                s -= band[i * w + (k + p - i)] * band[j * w + (k + p - j)] * band[k * w + p];
            }
            ld[j - lo] = s;
            band[i * w + (j + p - i)] = s / band[j * w + p];
        }
        let mut d = band[i * w + p];
        for j in lo..i {
            d -= ld[j - lo] * band[i * w + (j + p - i)];
        }
        if d.abs() < guard || !d.is_finite() {
            return Err(Error::ShiftHitsEigenvalue { shift, attempts: 1 });
        }
        band[i * w + p] = d;
        if d < 0.0 {
            negatives += 1;
        }
    }
    Ok(negatives)
}

/// [`count_below`], nudging the shift by `1e-12` up to three times when it
/// lands on an eigenvalue.
pub fn count_below_robust(a: &BandedMatrix, shift: f64, scale: f64) -> Result<(usize, f64)> {
    let mut s = shift;
    for attempt in 0..=3 {
        match count_below(a, s, scale) {
            Ok(c) => return Ok((c, s)),
            Err(Error::ShiftHitsEigenvalue { .. }) if attempt < 3 => {
                s += 1e-12 * scale.max(1.0);
            }
            Err(Error::ShiftHitsEigenvalue { shift, .. }) => {
                return Err(Error::ShiftHitsEigenvalue {
                    shift,
                    attempts: attempt + 1,
                })
            }
            Err(e) => return Err(e),
        }
    }
    unreachable!("loop returns on the last attempt")
}
