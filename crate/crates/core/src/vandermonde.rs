//! Vandermonde (Carathéodory) decomposition of low-rank PSD Toeplitz
//! matrices, `Toep(u) = sum_k d_k a(f_k) a(f_k)^*`.

use faer::Mat;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg;
use crate::signal::{atom, circular_distance, SparseSpectrum, SpectralLine};
use crate::toeplitz::ToeplitzGenerator;

/// Eigenvalues below `RANK_TOL * lambda_max` count as zero.
pub const RANK_TOL: f64 = 1e-6;
/// Frequencies closer than this are merged.
pub const MERGE_TOL: f64 = 1e-6;
/// Atom bases with a larger condition number are rejected.
pub const MAX_CONDITION: f64 = 1e10;

#[derive(Debug, Clone, PartialEq)]
pub struct VandermondeDecomposition {
    /// Frequencies in `[0, 1)`, ascending.
    pub frequencies: Vec<f64>,
    /// Strictly positive weights matching `frequencies`.
    pub weights: Vec<f64>,
    /// Numerical rank of the Toeplitz matrix.
    pub rank: usize,
    /// `|Toep(u) - sum d_k a a^*|_F / |Toep(u)|_F`.
    pub residual: f64,
}

impl VandermondeDecomposition {
    fn empty() -> Self {
        Self { frequencies: Vec::new(), weights: Vec::new(), rank: 0, residual: 0.0 }
    }

    /// Generator of `sum_k d_k a(f_k) a(f_k)^*`.
    pub fn generator(&self, n: usize) -> Vec<C64> {
        let mut u = vec![C64::new(0.0, 0.0); n];
        for (&f, &w) in self.frequencies.iter().zip(&self.weights) {
            for (o, a) in u.iter_mut().zip(atom(f, n)) {
                *o += a * w;
            }
        }
        u
    }
}

/// Frobenius norm of `Toep(u)` computed from its generator.
fn toeplitz_norm(u: &[C64]) -> f64 {
    let n = u.len();
    let mut s = n as f64 * u[0].norm_sqr();
    for (d, v) in u.iter().enumerate().skip(1) {
        s += 2.0 * (n - d) as f64 * v.norm_sqr();
    }
    s.sqrt()
}

/// Frequencies from the shift invariance `U[1..] = U[..n-1] Psi` of the
/// dominant eigenspace; the eigenvalues of `Psi` are `exp(i 2 pi f_k)`.
fn pencil_frequencies(basis: &Mat<C64>) -> Result<Vec<f64>> {
    let n = basis.nrows();
    let r = basis.ncols();
    let upper = Mat::from_fn(n - 1, r, |i, k| basis[(i, k)]);
    let lower = Mat::from_fn(n - 1, r, |i, k| basis[(i + 1, k)]);
    let psi = linalg::lstsq(&upper, &lower);
    let eig = psi.eigenvalues().map_err(|_| Error::Eigendecomposition)?;
    Ok(eig
        .iter()
        .map(|z| (z.arg() / std::f64::consts::TAU).rem_euclid(1.0))
        .collect())
}

/// Sorts and merges frequencies closer than [`MERGE_TOL`] (wrap-around).
fn merge_frequencies(mut freqs: Vec<f64>) -> Vec<f64> {
    freqs.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::with_capacity(freqs.len());
    for f in freqs {
        match out.last() {
            Some(&last) if circular_distance(last, f) < MERGE_TOL => {}
            _ => out.push(f),
        }
    }
    if out.len() > 1 && circular_distance(out[0], *out.last().unwrap()) < MERGE_TOL {
        out.pop();
    }
    out
}

/// Lawson-Hanson nonnegative least squares `min |a x - b|, x >= 0`.
pub fn nnls(a: &Mat<f64>, b: &[f64]) -> Vec<f64> {
    let (m, k) = (a.nrows(), a.ncols());
    let mut x = vec![0.0; k];
    let mut passive = vec![false; k];
    let gradient = |x: &[f64]| -> Vec<f64> {
        let resid: Vec<f64> = (0..m)
            .map(|i| b[i] - (0..k).map(|j| a[(i, j)] * x[j]).sum::<f64>())
            .collect();
        (0..k).map(|j| (0..m).map(|i| a[(i, j)] * resid[i]).sum()).collect()
    };
    let tol = 1e-14 * (0..m).map(|i| b[i].abs()).fold(1.0, f64::max);
    let restricted_lstsq = |passive: &[bool]| -> Vec<f64> {
        let cols: Vec<usize> = (0..k).filter(|&j| passive[j]).collect();
        let sub = Mat::from_fn(m, cols.len(), |i, c| a[(i, cols[c])]);
        let rhs = Mat::from_fn(m, 1, |i, _| b[i]);
        let sol = {
            use faer::linalg::solvers::SolveLstsq;
            sub.qr().solve_lstsq(&rhs)
        };
        let mut s = vec![0.0; k];
        for (c, &j) in cols.iter().enumerate() {
            s[j] = sol[(c, 0)];
        }
        s
    };
    for _ in 0..3 * k + 3 {
        let w = gradient(&x);
        let Some(j) = (0..k)
            .filter(|&j| !passive[j] && w[j] > tol)
            .max_by(|&p, &q| w[p].total_cmp(&w[q]))
        else {
            break;
        };
        passive[j] = true;
        loop {
            let s = restricted_lstsq(&passive);
            if (0..k).filter(|&i| passive[i]).all(|i| s[i] > 0.0) {
                x = s;
                break;
            }
            let alpha = (0..k)
                .filter(|&i| passive[i] && s[i] <= 0.0)
                .map(|i| x[i] / (x[i] - s[i]))
                .fold(f64::INFINITY, f64::min);
            for i in 0..k {
                x[i] += alpha * (s[i] - x[i]);
                if passive[i] && x[i] <= 1e-15 {
                    passive[i] = false;
                    x[i] = 0.0;
                }
            }
        }
    }
    x
}

/// Weights `d >= 0` minimizing `|Toep(u) - sum_k d_k a(f_k) a(f_k)^*|_F`.
fn fit_weights(u: &[C64], freqs: &[f64]) -> Vec<f64> {
    let n = u.len();
    let scale: Vec<f64> = (0..n)
        .map(|d| if d == 0 { (n as f64).sqrt() } else { (2.0 * (n - d) as f64).sqrt() })
        .collect();
    let atoms: Vec<Vec<C64>> = freqs.iter().map(|&f| atom(f, n)).collect();
    let a = Mat::from_fn(2 * n, freqs.len(), |i, k| {
        let d = i / 2;
        let v = atoms[k][d] * scale[d];
        if i % 2 == 0 {
            v.re
        } else {
            v.im
        }
    });
    let b: Vec<f64> = (0..2 * n)
        .map(|i| {
            let v = u[i / 2] * scale[i / 2];
            if i % 2 == 0 {
                v.re
            } else {
                v.im
            }
        })
        .collect();
    nnls(&a, &b)
}

/// Decomposes `Toep(g)` into positively weighted atom outer products.
pub fn decompose(g: &ToeplitzGenerator, rank_tol: f64) -> Result<VandermondeDecomposition> {
    let u = g.as_slice();
    let n = u.len();
    let norm = toeplitz_norm(u);
    if norm == 0.0 {
        return Ok(VandermondeDecomposition::empty());
    }
    let (vals, vecs) = linalg::hermitian_eigen(&g.to_matrix())?;
    let lambda_max = vals[n - 1];
    if lambda_max <= 0.0 || vals[0] < -rank_tol * lambda_max {
        return Err(Error::NegativeEigenvalue { value: vals[0] });
    }
    let rank = vals.iter().filter(|&&v| v > rank_tol * lambda_max).count();
    if rank >= n {
        return Err(Error::FullRank(n));
    }
    let basis = Mat::from_fn(n, rank, |i, k| vecs[(i, n - 1 - k)]);
    let candidates = merge_frequencies(pencil_frequencies(&basis)?);
    let weights = fit_weights(u, &candidates);
    let (frequencies, weights): (Vec<f64>, Vec<f64>) = candidates
        .into_iter()
        .zip(weights)
        .filter(|&(_, w)| w > 0.0)
        .unzip();
    let mut dec = VandermondeDecomposition { frequencies, weights, rank, residual: 0.0 };
    let fitted = dec.generator(n);
    dec.residual = toeplitz_norm(&linalg::sub(u, &fitted)) / norm;
    Ok(dec)
}

/// Spectrum estimate with its fit diagnostics.
#[derive(Debug, Clone)]
pub struct RecoveredSpectrum {
    pub spectrum: SparseSpectrum,
    pub decomposition: VandermondeDecomposition,
    /// `|z - sum_k c_k a(f_k)|_2 / |z|_2`.
    pub residual: f64,
    /// Condition number of the atom basis.
    pub condition: f64,
}

/// Frequencies from the Vandermonde decomposition of `Toep(g)`, complex
/// coefficients by least squares of `z` on the recovered atoms.
pub fn recover_spectrum(g: &ToeplitzGenerator, z: &[C64], rank_tol: f64) -> Result<RecoveredSpectrum> {
    let n = g.dim();
    if z.len() != n {
        return Err(Error::DimensionMismatch(format!("component has length {}, expected {n}", z.len())));
    }
    let decomposition = decompose(g, rank_tol)?;
    let freqs = &decomposition.frequencies;
    let basis = Mat::from_fn(n, freqs.len(), |t, k| C64::from_polar(1.0, std::f64::consts::TAU * freqs[k] * t as f64));
    let condition = if freqs.is_empty() { 1.0 } else { linalg::condition_number(&basis) };
    if condition > MAX_CONDITION {
        return Err(Error::IllConditionedAtoms(condition));
    }
    let coefs = if freqs.is_empty() {
        Vec::new()
    } else {
        linalg::col_to_vec(&linalg::lstsq(&basis, &linalg::vec_to_col(z)), 0)
    };
    let lines: Vec<SpectralLine> = freqs
        .iter()
        .zip(&coefs)
        .map(|(&freq, &coef)| SpectralLine { freq, coef })
        .collect();
    let spectrum = SparseSpectrum::new(n, lines)?;
    let fitted = spectrum.synthesize();
    let residual = linalg::relative_error(&fitted, z);
    Ok(RecoveredSpectrum { spectrum, decomposition, residual, condition })
}
