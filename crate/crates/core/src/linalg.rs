//! Small dense helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

pub type Vector = DVector<f64>;
pub type Matrix = DMatrix<f64>;

/// Largest absolute asymmetry `|a_ij - a_ji|`.
pub fn asymmetry(m: &Matrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

pub fn symmetrize(m: &Matrix) -> Matrix {
    (m + m.transpose()) * 0.5
}

pub fn check_square(m: &Matrix, d: usize) -> Result<()> {
    if m.nrows() != d || m.ncols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: if m.nrows() != d { m.nrows() } else { m.ncols() },
        });
    }
    Ok(())
}

pub fn check_len(v: &Vector, d: usize) -> Result<()> {
    if v.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: v.len(),
        });
    }
    Ok(())
}

/// Inverse of a symmetric positive definite matrix via Cholesky.
pub fn spd_inverse(m: &Matrix) -> Result<Matrix> {
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularCovariance);
    }
    let chol = m.clone().cholesky().ok_or(Error::SingularCovariance)?;
    Ok(symmetrize(&chol.inverse()))
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(m: &Matrix) -> f64 {
    SymmetricEigen::new(m.clone()).eigenvalues.min()
}

pub fn is_spd(m: &Matrix) -> bool {
    m.clone().cholesky().is_some()
}

/// `x^T m x`
pub fn quad_form(m: &Matrix, x: &Vector) -> f64 {
    let d = x.len();
    let mut acc = 0.0;
    for j in 0..d {
        let xj = x[j];
        if xj == 0.0 {
            continue;
        }
        let mut col = 0.0;
        for i in 0..d {
            col += m[(i, j)] * x[i];
        }
        acc += col * xj;
    }
    acc
}
