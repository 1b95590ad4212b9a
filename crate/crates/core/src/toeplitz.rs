//! Hermitian Toeplitz matrices generated by their first column.

use faer::Mat;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// First column `u` of the Hermitian Toeplitz matrix `T[r][s] = u[r - s]`
/// (`r >= s`), with `u[0]` real.
#[derive(Debug, Clone, PartialEq)]
pub struct ToeplitzGenerator(Vec<C64>);

impl ToeplitzGenerator {
    pub fn new(u: Vec<C64>) -> Result<Self> {
        if u.is_empty() {
            return Err(Error::InvalidArgument("empty toeplitz generator".into()));
        }
        if u[0].im.abs() > 1e-12 * u[0].norm().max(1.0) {
            return Err(Error::InvalidArgument(format!(
                "generator lag 0 must be real, got {}",
                u[0]
            )));
        }
        Ok(Self(u))
    }

    /// Builds a generator, discarding any imaginary part of lag 0.
    pub fn from_hermitian_part(mut u: Vec<C64>) -> Self {
        assert!(!u.is_empty(), "empty toeplitz generator");
        u[0].im = 0.0;
        Self(u)
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![C64::new(0.0, 0.0); n])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<C64> {
        self.0
    }

    pub fn to_matrix(&self) -> Mat<C64> {
        let u = &self.0;
        Mat::from_fn(u.len(), u.len(), |r, s| {
            if r >= s {
                u[r - s]
            } else {
                u[s - r].conj()
            }
        })
    }

    /// `trace(Toep(u)) / n`, i.e. `Re u[0]`.
    pub fn normalized_trace(&self) -> f64 {
        self.0[0].re
    }

    /// Real pairing under which [`toeplitz_adjoint`] is the adjoint of
    /// [`ToeplitzGenerator::to_matrix`]. Lags `d >= 1` occur in both
    /// triangles and carry weight 2.
    pub fn pairing(&self, other: &[C64]) -> f64 {
        let mut s = (self.0[0].conj() * other[0]).re;
        for (u, g) in self.0.iter().zip(other).skip(1) {
            s += 2.0 * (u.conj() * g).re;
        }
        s
    }
}

/// Block-diagonal stack `diag(Toep(u_c), Toep(u_1), ..., Toep(u_J))`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockDiagToeplitz {
    generators: Vec<ToeplitzGenerator>,
}

impl BlockDiagToeplitz {
    pub fn new(generators: Vec<ToeplitzGenerator>) -> Result<Self> {
        let Some(first) = generators.first() else {
            return Err(Error::InvalidArgument("no toeplitz blocks".into()));
        };
        let n = first.dim();
        if generators.iter().any(|g| g.dim() != n) {
            return Err(Error::DimensionMismatch("toeplitz blocks differ in size".into()));
        }
        Ok(Self { generators })
    }

    pub fn zeros(n: usize, blocks: usize) -> Self {
        Self {
            generators: vec![ToeplitzGenerator::zeros(n); blocks],
        }
    }

    pub fn block_dim(&self) -> usize {
        self.generators[0].dim()
    }

    pub fn generators(&self) -> &[ToeplitzGenerator] {
        &self.generators
    }

    pub fn common(&self) -> &ToeplitzGenerator {
        &self.generators[0]
    }

    pub fn innovations(&self) -> &[ToeplitzGenerator] {
        &self.generators[1..]
    }

    pub fn trace_sum(&self) -> f64 {
        let n = self.block_dim() as f64;
        self.generators.iter().map(|g| n * g.normalized_trace()).sum()
    }
}

/// Adjoint of `u -> Toep(u)`: `g[d] = sum_{r - s = d} T[r][s]`.
pub fn toeplitz_adjoint(t: &Mat<C64>) -> ToeplitzGenerator {
    let n = t.nrows();
    let mut g = vec![C64::new(0.0, 0.0); n];
    for (d, gd) in g.iter_mut().enumerate() {
        for s in 0..n - d {
            *gd += t[(s + d, s)];
        }
    }
    ToeplitzGenerator::from_hermitian_part(g)
}

/// Frobenius-nearest Hermitian Toeplitz matrix, by diagonal averaging.
pub fn project_toeplitz(t: &Mat<C64>) -> ToeplitzGenerator {
    let n = t.nrows();
    let mut g = vec![C64::new(0.0, 0.0); n];
    for s in 0..n {
        g[0] += t[(s, s)];
    }
    g[0] = C64::new(g[0].re / n as f64, 0.0);
    for (d, gd) in g.iter_mut().enumerate().skip(1) {
        for s in 0..n - d {
            *gd += t[(s + d, s)] + t[(s, s + d)].conj();
        }
        *gd /= 2.0 * (n - d) as f64;
    }
    ToeplitzGenerator(g)
}
