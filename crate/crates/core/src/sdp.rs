//! The joint semidefinite program
//!
//! ```text
//! min  1/(2n) (tr Toep(u_c) + sum_j tr Toep(u_j)) + t/2
//! s.t. [[diagtoep(u), Z], [Z^*, t]] >= 0,   y_j = Phi_j (z_c + z_j)
//! ```
//!
//! together with its measurement operators, variables and the dual norm
//! used to certify solutions.

use faer::Mat;
use num_complex::Complex64 as C64;

use crate::admm::{self, SolverConfig};
use crate::error::{Error, Result};
use crate::signal::SparseSpectrum;
use crate::toeplitz::{BlockDiagToeplitz, ToeplitzGenerator};
use crate::trig;

/// Default grid size for dual-norm evaluation.
pub const DUAL_NORM_GRID: usize = 1 << 13;

/// Sensing operator `Phi_j`, either a row-subsampled identity or a dense matrix.
#[derive(Debug, Clone)]
pub enum SensingOperator {
    Subsample { n: usize, rows: Vec<usize> },
    Dense(Mat<C64>),
}

impl SensingOperator {
    pub fn subsample(n: usize, rows: Vec<usize>) -> Result<Self> {
        if rows.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument("row indices must be strictly increasing".into()));
        }
        if rows.last().is_some_and(|&r| r >= n) {
            return Err(Error::InvalidArgument(format!("row index outside 0..{n}")));
        }
        Ok(Self::Subsample { n, rows })
    }

    pub fn identity(n: usize) -> Self {
        Self::Subsample { n, rows: (0..n).collect() }
    }

    pub fn dense(m: Mat<C64>) -> Result<Self> {
        if m.nrows() > m.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "sensing matrix has {} rows > n = {}",
                m.nrows(),
                m.ncols()
            )));
        }
        Ok(Self::Dense(m))
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Subsample { n, .. } => *n,
            Self::Dense(m) => m.ncols(),
        }
    }

    pub fn rows(&self) -> usize {
        match self {
            Self::Subsample { rows, .. } => rows.len(),
            Self::Dense(m) => m.nrows(),
        }
    }

    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        match self {
            Self::Subsample { rows, .. } => rows.iter().map(|&r| x[r]).collect(),
            Self::Dense(m) => (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|k| m[(i, k)] * x[k]).sum())
                .collect(),
        }
    }

    pub fn adjoint(&self, y: &[C64]) -> Vec<C64> {
        match self {
            Self::Subsample { n, rows } => {
                let mut out = vec![C64::new(0.0, 0.0); *n];
                for (&r, &v) in rows.iter().zip(y) {
                    out[r] = v;
                }
                out
            }
            Self::Dense(m) => (0..m.ncols())
                .map(|k| (0..m.nrows()).map(|i| m[(i, k)].conj() * y[i]).sum())
                .collect(),
        }
    }

    pub fn to_dense(&self) -> Mat<C64> {
        match self {
            Self::Subsample { n, rows } => Mat::from_fn(rows.len(), *n, |i, k| {
                if rows[i] == k {
                    C64::new(1.0, 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            }),
            Self::Dense(m) => m.clone(),
        }
    }
}

/// Per-signal sensing operators and measurements `y_j = Phi_j x_j`.
#[derive(Debug, Clone)]
pub struct MeasurementSet {
    n: usize,
    sensing: Vec<SensingOperator>,
    measurements: Vec<Vec<C64>>,
}

impl MeasurementSet {
    pub fn new(sensing: Vec<SensingOperator>, measurements: Vec<Vec<C64>>) -> Result<Self> {
        let Some(first) = sensing.first() else {
            return Err(Error::InvalidArgument("no signals".into()));
        };
        let n = first.dim();
        if sensing.len() != measurements.len() {
            return Err(Error::DimensionMismatch("one measurement vector per operator".into()));
        }
        for (j, (op, y)) in sensing.iter().zip(&measurements).enumerate() {
            if op.dim() != n {
                return Err(Error::DimensionMismatch(format!("operator {j} acts on dimension {}", op.dim())));
            }
            if op.rows() != y.len() {
                return Err(Error::DimensionMismatch(format!(
                    "signal {j}: {} rows but {} measurements",
                    op.rows(),
                    y.len()
                )));
            }
        }
        Ok(Self { n, sensing, measurements })
    }

    /// Measures `signals` through `sensing`.
    pub fn observe(sensing: Vec<SensingOperator>, signals: &[Vec<C64>]) -> Result<Self> {
        if sensing.len() != signals.len() {
            return Err(Error::DimensionMismatch("one operator per signal".into()));
        }
        let y = sensing.iter().zip(signals).map(|(op, x)| op.apply(x)).collect();
        Self::new(sensing, y)
    }

    pub fn full_observation(signals: &[Vec<C64>]) -> Result<Self> {
        let n = signals.first().map_or(0, |x| x.len());
        Self::observe(signals.iter().map(|_| SensingOperator::identity(n)).collect(), signals)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn ensemble_size(&self) -> usize {
        self.sensing.len()
    }

    pub fn sensing(&self) -> &[SensingOperator] {
        &self.sensing
    }

    pub fn measurements(&self) -> &[Vec<C64>] {
        &self.measurements
    }

    /// The single-signal problem for signal `j`.
    pub fn single(&self, j: usize) -> Self {
        Self {
            n: self.n,
            sensing: vec![self.sensing[j].clone()],
            measurements: vec![self.measurements[j].clone()],
        }
    }

    /// `Re sum_j <q_j, y_j>`, the dual objective.
    pub fn dual_objective(&self, q: &[Vec<C64>]) -> f64 {
        q.iter()
            .zip(&self.measurements)
            .map(|(q, y)| crate::linalg::inner(q, y).re)
            .sum()
    }
}

/// Primal variables `(u_c, u_1..u_J, z_c, z_1..z_J, t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SdpVariables {
    pub gens: BlockDiagToeplitz,
    /// Components ordered `(z_c, z_1, ..., z_J)`.
    pub components: Vec<Vec<C64>>,
    pub t: f64,
}

impl SdpVariables {
    pub fn zeros(n: usize, ensemble_size: usize) -> Self {
        Self {
            gens: BlockDiagToeplitz::zeros(n, ensemble_size + 1),
            components: vec![vec![C64::new(0.0, 0.0); n]; ensemble_size + 1],
            t: 0.0,
        }
    }

    /// The feasible point built from an explicit atomic decomposition:
    /// `u = sum |c_k| a(f_k)`, `z = sum c_k a(f_k)`, `t = sum |c_k|`.
    /// Its objective equals the decomposition cost.
    pub fn from_decomposition(common: &SparseSpectrum, innovations: &[SparseSpectrum]) -> Result<Self> {
        let spectra: Vec<&SparseSpectrum> = std::iter::once(common).chain(innovations).collect();
        let gens = spectra
            .iter()
            .map(|s| ToeplitzGenerator::from_hermitian_part(s.magnitude_generator()))
            .collect();
        Ok(Self {
            gens: BlockDiagToeplitz::new(gens)?,
            components: spectra.iter().map(|s| s.synthesize()).collect(),
            t: spectra.iter().map(|s| s.cost()).sum(),
        })
    }

    pub fn dim(&self) -> usize {
        self.gens.block_dim()
    }

    pub fn ensemble_size(&self) -> usize {
        self.components.len() - 1
    }

    /// `x_j = z_c + z_j`.
    pub fn signals(&self) -> Vec<Vec<C64>> {
        let zc = &self.components[0];
        self.components[1..]
            .iter()
            .map(|z| crate::linalg::add(zc, z))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Converged,
    MaxIters,
    Infeasible,
}

impl SolveStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolveStatus::Converged => "converged",
            SolveStatus::MaxIters => "max_iters",
            SolveStatus::Infeasible => "infeasible",
        }
    }
}

impl std::str::FromStr for SolveStatus {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "converged" => Ok(Self::Converged),
            "max_iters" => Ok(Self::MaxIters),
            "infeasible" => Ok(Self::Infeasible),
            other => Err(Error::InvalidArgument(format!("unknown status {other}"))),
        }
    }
}

/// Duality diagnostics computed from the recovered multipliers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualDiagnostics {
    /// `Re <Phi^* Q, X_hat>`.
    pub dual_objective: f64,
    pub dual_norm: f64,
    /// `|objective - dual_objective|`.
    pub duality_gap: f64,
}

#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub vars: SdpVariables,
    pub multipliers: Vec<Vec<C64>>,
    pub objective: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub iterations: usize,
    pub status: SolveStatus,
    pub diagnostics: DualDiagnostics,
}

impl SdpSolution {
    pub fn signals(&self) -> Vec<Vec<C64>> {
        self.vars.signals()
    }
}

pub fn primal_objective(v: &SdpVariables) -> f64 {
    let n = v.dim() as f64;
    v.gens.trace_sum() / (2.0 * n) + v.t / 2.0
}

/// The `((J+1) n + 1)`-square block matrix `[[diagtoep(u), Z], [Z^*, t]]`.
pub fn assemble_psd_block(v: &SdpVariables) -> Mat<C64> {
    let n = v.dim();
    let blocks = v.components.len();
    let size = blocks * n + 1;
    let mut m = Mat::<C64>::zeros(size, size);
    for (b, g) in v.gens.generators().iter().enumerate() {
        let t = g.to_matrix();
        let o = b * n;
        for s in 0..n {
            for r in 0..n {
                m[(o + r, o + s)] = t[(r, s)];
            }
        }
        for (r, z) in v.components[b].iter().enumerate() {
            m[(o + r, size - 1)] = *z;
            m[(size - 1, o + r)] = z.conj();
        }
    }
    m[(size - 1, size - 1)] = C64::new(v.t, 0.0);
    m
}

/// Dual-polynomial coefficient vectors `Phi_j^* q_j`.
pub fn dual_coefficients(q: &[Vec<C64>], sensing: &[SensingOperator]) -> Vec<Vec<C64>> {
    q.iter().zip(sensing).map(|(q, op)| op.adjoint(q)).collect()
}

/// Envelope `max{|sum_j Q_j(f)|, max_j |Q_j(f)|}` at one frequency.
fn envelope(polys: &[Vec<C64>], sum: &[C64], f: f64) -> f64 {
    polys
        .iter()
        .map(|v| trig::eval(v, f).norm())
        .fold(trig::eval(sum, f).norm(), f64::max)
}

/// Dual of the concatenated atomic norm evaluated at `Phi^* Q`:
/// `sup_f max{|sum_j Q_j(f)|, max_j |Q_j(f)|}`, approximated on a uniform
/// grid and refined by golden-section search around the strongest grid
/// maxima.
pub fn dual_norm(q: &[Vec<C64>], sensing: &[SensingOperator], grid_size: usize) -> Result<f64> {
    let polys = dual_coefficients(q, sensing);
    dual_norm_of_polys(&polys, grid_size)
}

pub(crate) fn dual_norm_of_polys(polys: &[Vec<C64>], grid_size: usize) -> Result<f64> {
    let n = polys.first().map_or(0, |v| v.len());
    if grid_size < 4 * n {
        return Err(Error::InvalidArgument(format!("grid size {grid_size} below 4n = {}", 4 * n)));
    }
    let (grid_env, sum) = grid_envelope(polys, grid_size);
    let grid_max = grid_env.iter().cloned().fold(0.0, f64::max);
    if grid_max == 0.0 {
        return Ok(0.0);
    }
    let mut best = grid_max;
    for &k in trig::local_maxima(&grid_env).iter().take(16) {
        let (_, v) = trig::refine_peak(|f| envelope(polys, &sum, f), k, grid_size);
        best = best.max(v);
    }
    Ok(best)
}

/// Grid values of the envelope plus the coefficient vector of the sum.
fn grid_envelope(polys: &[Vec<C64>], grid_size: usize) -> (Vec<f64>, Vec<C64>) {
    let n = polys.first().map_or(0, |v| v.len());
    let mut sum = vec![C64::new(0.0, 0.0); n];
    for v in polys {
        for (s, c) in sum.iter_mut().zip(v) {
            *s += c;
        }
    }
    let mut env: Vec<f64> = trig::eval_grid(&sum, grid_size).iter().map(|c| c.norm()).collect();
    for v in polys {
        for (e, c) in env.iter_mut().zip(trig::eval_grid(v, grid_size)) {
            *e = e.max(c.norm());
        }
    }
    (env, sum)
}

/// Concatenated atomic norm of fully observed signals, via the joint SDP.
pub fn ca_norm(signals: &[Vec<C64>], cfg: &SolverConfig) -> Result<SdpSolution> {
    let problem = MeasurementSet::full_observation(signals)?;
    admm::solve(&problem, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::min_eigenvalue;
    use crate::signal::{atom, Atom};

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn zero_variables() {
        let v = SdpVariables::zeros(5, 2);
        assert_eq!(primal_objective(&v), 0.0);
        let m = assemble_psd_block(&v);
        assert_eq!(m.nrows(), 16);
        assert_eq!(crate::linalg::frobenius(&m), 0.0);
    }

    #[test]
    fn single_common_atom_objective() {
        let n = 6;
        let a = Atom::new(0.21, 1.1, n).unwrap().synthesize();
        let v = SdpVariables {
            gens: BlockDiagToeplitz::new(vec![
                ToeplitzGenerator::new(atom(0.21, n)).unwrap(),
                ToeplitzGenerator::zeros(n),
            ])
            .unwrap(),
            components: vec![a, vec![c(0.0); n]],
            t: 1.0,
        };
        assert!((primal_objective(&v) - 1.0).abs() < 1e-14);
        assert!(min_eigenvalue(&assemble_psd_block(&v)).unwrap() > -1e-12);
    }

    #[test]
    fn two_atom_decomposition_objective() {
        let n = 8;
        let common = SparseSpectrum::from_pairs(n, &[(0.1, C64::from_polar(1.0, 0.4))]).unwrap();
        let inn = SparseSpectrum::from_pairs(n, &[(0.6, C64::from_polar(2.0, 2.2))]).unwrap();
        let v = SdpVariables::from_decomposition(&common, &[inn]).unwrap();
        assert!((primal_objective(&v) - 3.0).abs() < 1e-12);
        assert!(min_eigenvalue(&assemble_psd_block(&v)).unwrap() >= -1e-9);
    }

    #[test]
    fn one_dimensional_block() {
        let v = SdpVariables {
            gens: BlockDiagToeplitz::new(vec![
                ToeplitzGenerator::new(vec![c(1.0)]).unwrap(),
                ToeplitzGenerator::new(vec![c(1.0)]).unwrap(),
            ])
            .unwrap(),
            components: vec![vec![c(1.0)], vec![c(0.0)]],
            t: 1.0,
        };
        let m = assemble_psd_block(&v);
        let expect = [[1.0, 0.0, 1.0], [0.0, 1.0, 0.0], [1.0, 0.0, 1.0]];
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(m[(i, j)], c(expect[i][j]));
            }
        }
        assert!(min_eigenvalue(&m).unwrap() > -1e-12);
    }

    #[test]
    fn dual_norm_examples() {
        let n = 10;
        let ops = vec![SensingOperator::identity(n)];
        assert_eq!(dual_norm(&[vec![c(0.0); n]], &ops, 64).unwrap(), 0.0);
        let q: Vec<C64> = atom(0.37, n).into_iter().map(|x| x / n as f64).collect();
        assert!((dual_norm(&[q], &ops, 64).unwrap() - 1.0).abs() < 1e-12);
        assert!(dual_norm(&[vec![c(0.0); n]], &ops, 39).is_err());
    }

    #[test]
    fn refined_dual_norm_is_bracketed() {
        let n = 12;
        let ops = vec![SensingOperator::identity(n), SensingOperator::subsample(n, vec![0, 3, 4, 9]).unwrap()];
        let q = vec![
            (0..n).map(|t| C64::new((t as f64).sin(), 0.3 * t as f64 % 1.0)).collect::<Vec<_>>(),
            vec![C64::new(0.2, 0.1), C64::new(-0.5, 0.0), c(0.3), C64::new(0.0, 0.7)],
        ];
        let grid = 4 * n;
        let polys = dual_coefficients(&q, &ops);
        let (env, _) = grid_envelope(&polys, grid);
        let grid_max = env.iter().cloned().fold(0.0, f64::max);
        let refined = dual_norm(&q, &ops, grid).unwrap();
        let lip: f64 = polys.iter().map(|v| trig::lipschitz_bound(v)).sum::<f64>()
            + trig::lipschitz_bound(&crate::linalg::add(&polys[0], &polys[1]));
        assert!(grid_max <= refined);
        assert!(refined <= grid_max + lip / grid as f64);
    }

    #[test]
    fn sensing_adjoint_matches_dense() {
        let n = 7;
        let op = SensingOperator::subsample(n, vec![1, 2, 6]).unwrap();
        let dense = SensingOperator::dense(op.to_dense()).unwrap();
        let x: Vec<C64> = (0..n).map(|t| C64::new(t as f64, 1.0 - t as f64)).collect();
        let y = vec![C64::new(1.0, 2.0), c(-1.0), C64::new(0.0, 3.0)];
        assert_eq!(op.apply(&x), dense.apply(&x));
        assert_eq!(op.adjoint(&y), dense.adjoint(&y));
        assert!(SensingOperator::subsample(n, vec![2, 2]).is_err());
        assert!(SensingOperator::subsample(n, vec![3, 7]).is_err());
    }

    #[test]
    fn measurement_set_validates_dimensions() {
        let ops = vec![SensingOperator::subsample(4, vec![0, 1]).unwrap()];
        assert!(MeasurementSet::new(ops.clone(), vec![vec![c(1.0)]]).is_err());
        assert!(MeasurementSet::new(ops, vec![vec![c(1.0), c(2.0)]]).is_ok());
    }
}
