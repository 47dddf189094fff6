//! Small dense linear algebra helpers shared across the crate.
//!
//! Everything is built on `nalgebra`'s dynamically sized types; matrices in
//! this crate are tiny (dimension ≤ 15), so no attention is paid to
//! allocation costs.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub type Matrix = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Numerical rank of `m` via singular values, with the relative threshold
/// `σ_i > tol · σ_max`. Returns `(rank, singular_values)`.
pub fn rank_with_svs(m: &Matrix, tol: f64) -> (usize, Vec<f64>) {
    if m.nrows() == 0 || m.ncols() == 0 {
        return (0, Vec::new());
    }
    let svd = m.clone().svd(false, false);
    let svs: Vec<f64> = svd.singular_values.iter().copied().collect();
    let smax = svs.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return (0, svs);
    }
    let rank = svs.iter().filter(|&&s| s > tol * smax).count();
    (rank, svs)
}

/// Orthonormal basis of the kernel of `m` with the requested dimension,
/// taken from the right singular vectors of the smallest singular values.
pub fn kernel_basis(m: &Matrix, dim: usize) -> Result<Matrix> {
    let n = m.ncols();
    if dim > n {
        return Err(Error::Argument(format!(
            "kernel dimension {dim} exceeds column count {n}"
        )));
    }
    // Pad with zero rows if needed: nalgebra's thin SVD of a wide matrix
    // truncates V^T to the row space, losing the kernel directions.
    let padded = if m.nrows() < n {
        let mut p = Matrix::zeros(n, n);
        p.view_mut((0, 0), (m.nrows(), n)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let vt = svd
        .v_t
        .ok_or_else(|| Error::Numerical("SVD did not produce right singular vectors".into()))?;
    // Rows of V^T are ordered by decreasing singular value; the kernel basis
    // is spanned by the last `dim` rows.
    let mut basis = Matrix::zeros(n, dim);
    for j in 0..dim {
        let row = vt.row(vt.nrows() - dim + j);
        for i in 0..n {
            basis[(i, j)] = row[i];
        }
    }
    Ok(basis)
}

/// Orthonormalize the columns of `m` (thin QR, keeping `m.ncols()` columns).
pub fn orthonormalize(m: &Matrix) -> Matrix {
    if m.ncols() == 0 {
        return m.clone();
    }
    let qr = m.clone().qr();
    qr.q()
}

/// Distance of `v` from the span of the orthonormal columns `q`:
/// `‖v − q qᵀ v‖`.
pub fn span_residual(q: &Matrix, v: &Vector) -> f64 {
    if q.ncols() == 0 {
        return v.norm();
    }
    let proj = q * (q.transpose() * v);
    (v - proj).norm()
}

/// Largest distance of any column of `b` from the span of `q`.
pub fn span_residual_cols(q: &Matrix, b: &Matrix) -> f64 {
    (0..b.ncols())
        .map(|j| span_residual(q, &b.column(j).into_owned()))
        .fold(0.0, f64::max)
}

/// Spectral-norm distance between the subspaces spanned by the orthonormal
/// column blocks `a` and `b`, measured as `‖P_a − P_b‖_2`.
pub fn subspace_distance(a: &Matrix, b: &Matrix) -> f64 {
    let n = a.nrows();
    let pa = if a.ncols() == 0 {
        Matrix::zeros(n, n)
    } else {
        a * a.transpose()
    };
    let pb = if b.ncols() == 0 {
        Matrix::zeros(n, n)
    } else {
        b * b.transpose()
    };
    (pa - pb).norm() // Frobenius bound suffices at these sizes
}

/// Matrix inverse through LU, with an explicit singularity guard.
pub fn invert(m: &Matrix, det_tol: f64) -> Result<Matrix> {
    let lu = m.clone().lu();
    let det = lu.determinant();
    if !det.is_finite() || det.abs() < det_tol {
        return Err(Error::Numerical(format!(
            "matrix is numerically singular (|det| = {:.3e})",
            det.abs()
        )));
    }
    lu.try_inverse()
        .ok_or_else(|| Error::Numerical("matrix inversion failed".into()))
}

/// Solve `m x = rhs` through LU.
pub fn solve(m: &Matrix, rhs: &Vector, det_tol: f64) -> Result<Vector> {
    let lu = m.clone().lu();
    let det = lu.determinant();
    if !det.is_finite() || det.abs() < det_tol {
        return Err(Error::Numerical(format!(
            "linear system is numerically singular (|det| = {:.3e})",
            det.abs()
        )));
    }
    lu.solve(rhs)
        .ok_or_else(|| Error::Numerical("linear solve failed".into()))
}

/// True if every entry of the slice is finite.
pub fn all_finite(xs: &[f64]) -> bool {
    xs.iter().all(|x| x.is_finite())
}
