//! Dense complex matrices and the two spectral quantities the verification
//! needs: the largest singular value and the smallest eigenvalue of a
//! Hermitian matrix.
//!
//! Both are computed by Jacobi-type iterations, chosen over faster
//! factorizations because they are simple to audit, unconditionally stable,
//! and deliver singular/eigen-values to near machine precision — the final
//! inequality checks compare against thresholds with slim margins, so the
//! linear algebra must not be the weak link.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.data[i * cols + j] = f(i, j);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn adjoint(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Entry-wise maximum modulus of the difference.
    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Submatrix at the given row and column indices (used to restrict a
    /// transfer matrix to a smaller mode set without recomputing it).
    pub fn gather(&self, row_idx: &[usize], col_idx: &[usize]) -> ComplexMatrix {
        ComplexMatrix::from_fn(row_idx.len(), col_idx.len(), |i, j| {
            self.get(row_idx[i], col_idx[j])
        })
    }
}

/// Hermitian part `(M + M^H) / 2` of a square matrix.
pub fn hermitian_symmetrize(m: &ComplexMatrix) -> ComplexMatrix {
    assert_eq!(m.rows, m.cols);
    ComplexMatrix::from_fn(m.rows, m.cols, |i, j| {
        0.5 * (m.get(i, j) + m.get(j, i).conj())
    })
}

const MAX_SWEEPS: usize = 30;

/// Largest singular value via one-sided Jacobi.
///
/// Columns are rotated in pairs until all are numerically orthogonal; the
/// singular values are then the column norms. The rotation that orthogonalizes
/// a pair diagonalizes its 2x2 Gram matrix, so the iteration acts on columns
/// only and never forms the full cross-product (which would square the
/// condition number).
pub fn largest_singular_value(m: &ComplexMatrix) -> Result<f64> {
    if m.rows == 0 || m.cols == 0 {
        return Ok(0.0);
    }
    // Work on columns; fewer columns than rows is the cheap orientation, and
    // singular values are orientation-invariant.
    let work = if m.cols > m.rows { m.adjoint() } else { m.clone() };
    let (nr, nc) = (work.rows, work.cols);
    let mut col: Vec<Vec<Complex64>> = (0..nc)
        .map(|j| (0..nr).map(|i| work.get(i, j)).collect())
        .collect();

    let frob2: f64 = col.iter().flatten().map(|z| z.norm_sqr()).sum();
    if frob2 == 0.0 {
        return Ok(0.0);
    }
    // Off-diagonal Gram entries below this are treated as orthogonal already.
    let stop = 1e-13 * frob2;

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..nc.saturating_sub(1) {
            for q in (p + 1)..nc {
                // p < q, so the split borrows both columns mutably
                let (lo, hi) = col.split_at_mut(q);
                let (cp, cq) = (&mut lo[p], &mut hi[0]);
                let mut app = 0.0;
                let mut aqq = 0.0;
                let mut apq = Complex64::new(0.0, 0.0);
                for (vp, vq) in cp.iter().zip(cq.iter()) {
                    app += vp.norm_sqr();
                    aqq += vq.norm_sqr();
                    apq += vp.conj() * vq;
                }
                let r = apq.norm();
                if r <= stop {
                    continue;
                }
                rotated = true;
                let phase = apq / r;
                let zeta = (aqq - app) / (2.0 * r);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let sp = s * phase;
                let spc = s * phase.conj();
                for (vp, vq) in cp.iter_mut().zip(cq.iter_mut()) {
                    let (a, b) = (*vp, *vq);
                    *vp = c * a - spc * b;
                    *vq = sp * a + c * b;
                }
            }
        }
        if !rotated {
            let sigma_max = col
                .iter()
                .map(|cj| cj.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
                .fold(0.0, f64::max);
            return Ok(sigma_max);
        }
    }
    Err(Error::Numeric(format!(
        "one-sided Jacobi did not orthogonalize {nc} columns in {MAX_SWEEPS} sweeps"
    )))
}

/// Smallest eigenvalue of a Hermitian matrix via cyclic two-sided Jacobi.
///
/// Rejects inputs whose anti-Hermitian part exceeds `1e-10 * ||H||_F`:
/// silently symmetrizing here would mask an upstream bug, and the sector
/// criterion depends on the symmetrized matrix being formed deliberately.
pub fn smallest_hermitian_eigenvalue(m: &ComplexMatrix) -> Result<f64> {
    if m.rows != m.cols {
        return Err(Error::Contract(format!(
            "eigensolver needs a square matrix, got {}x{}",
            m.rows, m.cols
        )));
    }
    let n = m.rows;
    if n == 0 {
        return Err(Error::Contract("eigensolver needs a nonempty matrix".into()));
    }
    let frob = m.frobenius_norm();
    let skew = m.max_herm_defect();
    if skew > 1e-10 * frob.max(1e-300) {
        return Err(Error::Contract(format!(
            "matrix is not Hermitian: ||H - H^H||_F = {skew:.3e} vs ||H||_F = {frob:.3e}"
        )));
    }
    if frob == 0.0 {
        return Ok(0.0);
    }
    let mut h = m.clone();
    let stop = 1e-13 * frob;

    for _ in 0..MAX_SWEEPS {
        let mut max_off = 0.0f64;
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                let hpq = h.get(p, q);
                let r = hpq.norm();
                max_off = max_off.max(r);
                if r <= stop {
                    continue;
                }
                let phase = hpq / r;
                let zeta = (h.get(q, q).re - h.get(p, p).re) / (2.0 * r);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let sp = s * phase;
                let spc = s * phase.conj();
                // Columns: [h_p, h_q] <- [h_p, h_q] * U
                for i in 0..n {
                    let vp = h.get(i, p);
                    let vq = h.get(i, q);
                    h.set(i, p, c * vp - spc * vq);
                    h.set(i, q, sp * vp + c * vq);
                }
                // Rows: apply U^H from the left (conjugated coefficients).
                for j in 0..n {
                    let vp = h.get(p, j);
                    let vq = h.get(q, j);
                    h.set(p, j, c * vp - sp * vq);
                    h.set(q, j, spc * vp + c * vq);
                }
            }
        }
        if max_off <= stop {
            let min = (0..n).map(|i| h.get(i, i).re).fold(f64::INFINITY, f64::min);
            return Ok(min);
        }
    }
    Err(Error::Numeric(format!(
        "Hermitian Jacobi did not converge in {MAX_SWEEPS} sweeps (n = {n})"
    )))
}

impl ComplexMatrix {
    fn max_herm_defect(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.rows {
            for j in 0..self.cols {
                s += (self.get(i, j) - self.get(j, i).conj()).norm_sqr();
            }
        }
        s.sqrt()
    }
}
