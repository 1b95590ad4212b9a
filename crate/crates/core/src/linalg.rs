//! Small dense helpers on top of `faer`.

use faer::{Mat, Side};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// `<x, y> = y^* x`, conjugate-linear in the second argument.
pub fn inner(x: &[C64], y: &[C64]) -> C64 {
    x.iter().zip(y).map(|(a, b)| a * b.conj()).sum()
}

pub fn norm2(x: &[C64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

pub fn add(x: &[C64], y: &[C64]) -> Vec<C64> {
    x.iter().zip(y).map(|(a, b)| a + b).collect()
}

pub fn sub(x: &[C64], y: &[C64]) -> Vec<C64> {
    x.iter().zip(y).map(|(a, b)| a - b).collect()
}

/// Relative l2 error `|est - truth| / |truth|`, falling back to the absolute
/// error when `truth` is zero.
pub fn relative_error(est: &[C64], truth: &[C64]) -> f64 {
    let num = norm2(&sub(est, truth));
    let den = norm2(truth);
    if den > 0.0 {
        num / den
    } else {
        num
    }
}

pub fn frobenius(m: &Mat<C64>) -> f64 {
    let mut s = 0.0;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            s += m[(i, j)].norm_sqr();
        }
    }
    s.sqrt()
}

/// Replaces `m` by `(m + m^*) / 2`.
pub fn symmetrize(m: &mut Mat<C64>) {
    let n = m.nrows();
    for j in 0..n {
        m[(j, j)] = C64::new(m[(j, j)].re, 0.0);
        for i in (j + 1)..n {
            let v = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            m[(i, j)] = v;
            m[(j, i)] = v.conj();
        }
    }
}

/// Eigendecomposition of a Hermitian matrix; eigenvalues ascending.
pub fn hermitian_eigen(m: &Mat<C64>) -> Result<(Vec<f64>, Mat<C64>)> {
    let evd = m
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| Error::Eigendecomposition)?;
    let s = evd.S();
    let vals = (0..m.nrows()).map(|i| s[i].re).collect();
    Ok((vals, evd.U().to_owned()))
}

pub fn hermitian_eigenvalues(m: &Mat<C64>) -> Result<Vec<f64>> {
    m.self_adjoint_eigenvalues(Side::Lower)
        .map_err(|_| Error::Eigendecomposition)
}

pub fn min_eigenvalue(m: &Mat<C64>) -> Result<f64> {
    Ok(hermitian_eigenvalues(m)?
        .first()
        .copied()
        .unwrap_or(0.0))
}

/// Dense least squares `min |a x - b|_2` via QR.
pub fn lstsq(a: &Mat<C64>, b: &Mat<C64>) -> Mat<C64> {
    use faer::linalg::solvers::SolveLstsq;
    a.qr().solve_lstsq(b)
}

/// Ratio of extreme singular values; infinite for rank-deficient input.
pub fn condition_number(a: &Mat<C64>) -> f64 {
    let Ok(sv) = a.singular_values() else {
        return f64::INFINITY;
    };
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if sv.is_empty() {
        1.0
    } else if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

pub fn col_to_vec(m: &Mat<C64>, j: usize) -> Vec<C64> {
    (0..m.nrows()).map(|i| m[(i, j)]).collect()
}

pub fn vec_to_col(v: &[C64]) -> Mat<C64> {
    Mat::from_fn(v.len(), 1, |i, _| v[i])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inner_is_conjugate_linear_in_second_argument() {
        let x = [C64::new(1.0, 2.0)];
        let y = [C64::new(0.0, 1.0)];
        let c = C64::new(0.5, -1.5);
        let lhs = inner(&x, &[y[0] * c]);
        assert!((lhs - c.conj() * inner(&x, &y)).norm() < 1e-15);
    }

    #[test]
    fn eigen_of_diagonal() {
        let m = Mat::from_fn(2, 2, |i, j| {
            if i == j {
                C64::new(if i == 0 { 1.0 } else { -1.0 }, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        let (vals, _) = hermitian_eigen(&m).unwrap();
        assert!((vals[0] + 1.0).abs() < 1e-14 && (vals[1] - 1.0).abs() < 1e-14);
    }
}
