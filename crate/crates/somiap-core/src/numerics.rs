//! Dense-matrix kernels: 2-D DCT-II for pHash and symmetric / generalized
//! symmetric eigendecomposition for the subspace recognizers.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{contract, Error, Result};

/// Row-major dense matrix of f64.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(contract("matrix data length must be rows*cols"));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(contract("matrix entries must be finite"));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = Matrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.set(c, r, self.get(r, c));
            }
        }
        out
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "inner dimensions must agree");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a == 0.0 {
                    continue;
                }
                for c in 0..other.cols {
                    out.data[r * other.cols + c] += a * other.get(k, c);
                }
            }
        }
        out
    }

    /// Matrix-vector product.
    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len());
        let mut out = vec![0.0; self.rows];
        for r in 0..self.rows {
            let mut acc = 0.0;
            for c in 0..self.cols {
                acc += self.get(r, c) * v[c];
            }
            out[r] = acc;
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        libm::sqrt(self.data.iter().map(|v| v * v).sum())
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    fn max_asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for r in 0..self.rows {
            for c in (r + 1)..self.cols {
                let d = (self.get(r, c) - self.get(c, r)).abs();
                if d > worst {
                    worst = d;
                }
            }
        }
        worst
    }
}

/// Eigenpairs sorted by descending eigenvalue; column `i` of `vectors` pairs
/// with `values[i]`.
///
/// For [`jacobi_eigh`] the columns are orthonormal. For
/// [`generalized_symmetric_eig`] they are W-orthonormal and satisfy
/// `B v = lambda W v` instead.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

/// 1-D orthonormal DCT-II basis: `C[k][x] = a(k) cos(pi (2x+1) k / (2N))`
/// with `a(0) = sqrt(1/N)` and `a(k) = sqrt(2/N)` otherwise.
fn dct_basis(n: usize) -> Matrix {
    let mut c = Matrix::zeros(n, n);
    let a0 = libm::sqrt(1.0 / n as f64);
    let ak = libm::sqrt(2.0 / n as f64);
    for k in 0..n {
        let scale = if k == 0 { a0 } else { ak };
        for x in 0..n {
            c.set(
                k,
                x,
                scale * libm::cos(PI * (2.0 * x as f64 + 1.0) * k as f64 / (2.0 * n as f64)),
            );
        }
    }
    c
}

/// Orthonormal 2-D DCT-II of a square block: `Y = C X C^T`.
pub fn dct2(block: &Matrix) -> Result<Matrix> {
    if block.rows != block.cols {
        return Err(contract("dct2 requires a square block"));
    }
    if block.rows < 2 {
        return Err(contract("dct2 requires side >= 2"));
    }
    let c = dct_basis(block.rows);
    Ok(c.mul(block).mul(&c.transpose()))
}

/// Inverse of [`dct2`] (orthonormal DCT-III): `X = C^T Y C`.
pub fn idct2(block: &Matrix) -> Result<Matrix> {
    if block.rows != block.cols {
        return Err(contract("idct2 requires a square block"));
    }
    if block.rows < 2 {
        return Err(contract("idct2 requires side >= 2"));
    }
    let c = dct_basis(block.rows);
    Ok(c.transpose().mul(block).mul(&c))
}

const SYMMETRY_TOL: f64 = 1e-9;
const MAX_SWEEPS: usize = 100;

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
///
/// Rotates until the largest off-diagonal magnitude drops below
/// `1e-12 * ||a||_F` or 100 sweeps have run. Eigenvalues are returned in
/// descending order; each eigenvector is sign-normalized so its
/// largest-magnitude component is positive.
pub fn jacobi_eigh(a: &Matrix) -> Result<EigenDecomposition> {
    if a.rows != a.cols {
        return Err(contract("jacobi_eigh requires a square matrix"));
    }
    if a.max_asymmetry() > SYMMETRY_TOL {
        return Err(contract("jacobi_eigh requires a symmetric matrix"));
    }
    let n = a.rows;
    let mut m = a.clone();
    let mut v = Matrix::identity(n);
    let tol = 1e-12 * a.frobenius_norm();

    for _ in 0..MAX_SWEEPS {
        let mut max_off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m.get(p, q).abs();
                if apq > max_off {
                    max_off = apq;
                }
            }
        }
        if max_off <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m.get(p, q);
                if apq == 0.0 {
                    continue;
                }
                let app = m.get(p, p);
                let aqq = m.get(q, q);
                let theta = (aqq - app) / (2.0 * apq);
                // stable tangent of the rotation angle
                let t = if theta >= 0.0 {
                    1.0 / (theta + libm::sqrt(1.0 + theta * theta))
                } else {
                    -1.0 / (-theta + libm::sqrt(1.0 + theta * theta))
                };
                let c = 1.0 / libm::sqrt(1.0 + t * t);
                let s = t * c;

                for k in 0..n {
                    let akp = m.get(k, p);
                    let akq = m.get(k, q);
                    m.set(k, p, c * akp - s * akq);
                    m.set(k, q, s * akp + c * akq);
                }
                for k in 0..n {
                    let apk = m.get(p, k);
                    let aqk = m.get(q, k);
                    m.set(p, k, c * apk - s * aqk);
                    m.set(q, k, s * apk + c * aqk);
                }
                for k in 0..n {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, c * vkp - s * vkq);
                    v.set(k, q, s * vkp + c * vkq);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| m.get(i, i)).collect();
    order.sort_by(|&i, &j| diag[j].total_cmp(&diag[i]));

    let mut values = Vec::with_capacity(n);
    let mut vectors = Matrix::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        values.push(diag[src]);
        // make the largest-magnitude component positive for determinism
        let mut pivot = 0;
        let mut best = 0.0f64;
        for r in 0..n {
            let mag = v.get(r, src).abs();
            if mag > best {
                best = mag;
                pivot = r;
            }
        }
        let sign = if v.get(pivot, src) < 0.0 { -1.0 } else { 1.0 };
        for r in 0..n {
            vectors.set(r, col, sign * v.get(r, src));
        }
    }
    Ok(EigenDecomposition { values, vectors })
}

/// Solves the generalized symmetric problem `B v = lambda W v` by whitening.
///
/// `W = U L U^T` gives `W^(-1/2)`; the standard eigenproblem is solved on
/// `W^(-1/2) B W^(-1/2)` and vectors are mapped back. When `w` is singular
/// or nearly so (inevitable for within-class scatter with fewer samples than
/// dimensions) it is first regularized with `eps = 1e-6 * trace(w)/n` on the
/// diagonal. Returned vectors satisfy the generalized relation (they are
/// W-orthonormal, not orthonormal).
pub fn generalized_symmetric_eig(b: &Matrix, w: &Matrix) -> Result<EigenDecomposition> {
    if b.rows != b.cols || w.rows != w.cols || b.rows != w.rows {
        return Err(contract(
            "generalized eigenproblem requires square matrices of equal size",
        ));
    }
    if b.max_asymmetry() > SYMMETRY_TOL || w.max_asymmetry() > SYMMETRY_TOL {
        return Err(contract("generalized eigenproblem requires symmetric inputs"));
    }
    let n = w.rows;

    let mut wd = jacobi_eigh(w)?;
    let needs_regularization = wd
        .values
        .iter()
        .any(|&l| l <= 0.0 || l < 1e-10 * wd.values[0].max(0.0));
    if needs_regularization {
        let trace: f64 = (0..n).map(|i| w.get(i, i)).sum();
        let eps = 1e-6 * trace / n as f64;
        let mut wr = w.clone();
        for i in 0..n {
            wr.set(i, i, wr.get(i, i) + eps);
        }
        wd = jacobi_eigh(&wr)?;
        let lambda_max = wd.values.first().copied().unwrap_or(0.0);
        if wd
            .values
            .iter()
            .any(|&l| l <= 0.0 || l < 1e-14 * lambda_max)
        {
            return Err(Error::Singular(String::from(
                "weight matrix is not positive definite after regularization",
            )));
        }
    }

    // W^(-1/2) = U diag(l^-1/2) U^T
    let mut scaled = wd.vectors.clone();
    for c in 0..n {
        let inv_sqrt = 1.0 / libm::sqrt(wd.values[c]);
        for r in 0..n {
            scaled.set(r, c, scaled.get(r, c) * inv_sqrt);
        }
    }
    let w_inv_half = scaled.mul(&wd.vectors.transpose());

    let mut c = w_inv_half.mul(b).mul(&w_inv_half);
    // symmetrize to wash out multiplication round-off before Jacobi
    for r in 0..n {
        for q in (r + 1)..n {
            let avg = 0.5 * (c.get(r, q) + c.get(q, r));
            c.set(r, q, avg);
            c.set(q, r, avg);
        }
    }
    let inner = jacobi_eigh(&c)?;
    let vectors = w_inv_half.mul(&inner.vectors);
    Ok(EigenDecomposition {
        values: inner.values,
        vectors,
    })
}
