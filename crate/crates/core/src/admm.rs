//! First-order splitting solver for the joint SDP.
//!
//! The PSD constraint on `[[diagtoep(u), Z], [Z^*, t]]` is imposed block by
//! block: with `t = sum_b t_b` it is equivalent (Schur complement on the
//! block-diagonal part) to `[[Toep(u_b), z_b], [z_b^*, t_b]] >= 0` for every
//! block `b in {c, 1..J}`. ADMM alternates
//!
//! 1. an affine step over `(u_b, z_b, t_b)` that enforces the measurement
//!    equations exactly (closed form per block, one cached KKT solve for the
//!    coupled `z` stack),
//! 2. a projection of each `(n+1)`-square slack onto the PSD cone,
//! 3. a scaled dual update,
//!
//! with over-relaxation and residual-balancing penalty updates.

use faer::linalg::solvers::{Llt, Solve};
use faer::{Mat, Side};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, frobenius};
use crate::sdp::{
    self, DualDiagnostics, MeasurementSet, SdpSolution, SdpVariables, SolveStatus, DUAL_NORM_GRID,
};
use crate::toeplitz::{BlockDiagToeplitz, ToeplitzGenerator};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub rho: f64,
    pub max_iters: usize,
    pub eps_abs: f64,
    pub eps_rel: f64,
    pub over_relaxation: f64,
    pub adaptive_rho: bool,
    pub adapt_ratio: f64,
    pub adapt_scale: f64,
    /// Iterations between penalty updates.
    pub adapt_interval: usize,
    /// Record one trace row every this many iterations (0 disables tracing).
    pub trace_every: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            rho: 1.0,
            max_iters: 50_000,
            eps_abs: 1e-8,
            eps_rel: 1e-8,
            over_relaxation: 1.6,
            adaptive_rho: true,
            adapt_ratio: 10.0,
            adapt_scale: 2.0,
            adapt_interval: 20,
            trace_every: 0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0) {
            return Err(Error::Config(format!("rho must be positive, got {}", self.rho)));
        }
        if !(1.0..=1.8).contains(&self.over_relaxation) {
            return Err(Error::Config(format!(
                "over_relaxation must lie in [1, 1.8], got {}",
                self.over_relaxation
            )));
        }
        if !(self.eps_abs > 0.0 && self.eps_rel > 0.0) {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        if self.adaptive_rho && !(self.adapt_ratio > 1.0 && self.adapt_scale > 1.0 && self.adapt_interval > 0) {
            return Err(Error::Config("adaptive rho needs ratio > 1, scale > 1, interval > 0".into()));
        }
        Ok(())
    }
}

/// One row of the optional iteration trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub iter: usize,
    pub objective: f64,
    pub primal_res: f64,
    pub dual_res: f64,
    pub rho: f64,
}

pub fn write_trace_csv<W: std::io::Write>(rows: &[TraceRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "iter,objective,primal_res,dual_res,rho")?;
    for r in rows {
        writeln!(
            out,
            "{},{:.16e},{:.16e},{:.16e},{:.16e}",
            r.iter, r.objective, r.primal_res, r.dual_res, r.rho
        )?;
    }
    Ok(())
}

/// Iterate of the splitting method. Blocks are ordered `(c, 1, ..., J)`.
#[derive(Debug, Clone)]
pub struct SolverState {
    pub gens: Vec<Vec<C64>>,
    pub components: Vec<Vec<C64>>,
    pub t_blocks: Vec<f64>,
    /// PSD slacks, one `(n+1)`-square matrix per block.
    pub slack: Vec<Mat<C64>>,
    /// Scaled duals, same shapes as `slack`.
    pub dual: Vec<Mat<C64>>,
    pub rho: f64,
    pub iteration: usize,
    pub primal_res: f64,
    pub dual_res: f64,
    pub history: Vec<TraceRow>,
}

impl SolverState {
    pub fn new(n: usize, ensemble_size: usize, rho: f64) -> Self {
        let blocks = ensemble_size + 1;
        let zero = C64::new(0.0, 0.0);
        Self {
            gens: vec![vec![zero; n]; blocks],
            components: vec![vec![zero; n]; blocks],
            t_blocks: vec![0.0; blocks],
            slack: vec![Mat::zeros(n + 1, n + 1); blocks],
            dual: vec![Mat::zeros(n + 1, n + 1); blocks],
            rho,
            iteration: 0,
            primal_res: f64::INFINITY,
            dual_res: f64::INFINITY,
            history: Vec::new(),
        }
    }

    pub fn variables(&self) -> SdpVariables {
        let gens = self
            .gens
            .iter()
            .map(|g| ToeplitzGenerator::from_hermitian_part(g.clone()))
            .collect();
        SdpVariables {
            gens: BlockDiagToeplitz::new(gens).expect("state blocks share n"),
            components: self.components.clone(),
            t: self.t_blocks.iter().sum(),
        }
    }

    /// `[[Toep(u_b), z_b], [z_b^*, t_b]]` for block `b`.
    pub fn block_matrix(&self, b: usize) -> Mat<C64> {
        let n = self.gens[b].len();
        let u = &self.gens[b];
        let z = &self.components[b];
        Mat::from_fn(n + 1, n + 1, |r, s| match (r == n, s == n) {
            (false, false) if r >= s => u[r - s],
            (false, false) => u[s - r].conj(),
            (false, true) => z[r],
            (true, false) => z[s].conj(),
            (true, true) => C64::new(self.t_blocks[b], 0.0),
        })
    }
}

/// Nearest PSD matrix in Frobenius norm: negative eigenvalues clipped to 0.
pub fn psd_project(m: &Mat<C64>) -> Result<Mat<C64>> {
    let mut h = m.clone();
    linalg::symmetrize(&mut h);
    let (vals, vecs) = linalg::hermitian_eigen(&h)?;
    let n = h.nrows();
    let keep: Vec<usize> = (0..n).filter(|&i| vals[i] > 0.0).collect();
    let b = Mat::from_fn(n, keep.len(), |r, k| vecs[(r, keep[k])] * vals[keep[k]].sqrt());
    let mut out = &b * b.adjoint();
    linalg::symmetrize(&mut out);
    Ok(out)
}

/// Cached factorization of the coupled measurement system
/// `K = blockdiag(Phi_j Phi_j^*) + [Phi_j Phi_k^*]_{jk}`.
pub struct KktSystem {
    llt: Llt<C64>,
    offsets: Vec<usize>,
}

impl KktSystem {
    pub fn new(problem: &MeasurementSet) -> Result<Self> {
        let dense: Vec<Mat<C64>> = problem.sensing().iter().map(|op| op.to_dense()).collect();
        let mut offsets = vec![0];
        for d in &dense {
            offsets.push(offsets.last().unwrap() + d.nrows());
        }
        let total = *offsets.last().unwrap();
        let mut k = Mat::<C64>::zeros(total, total);
        for (a, pa) in dense.iter().enumerate() {
            for (b, pb) in dense.iter().enumerate() {
                let mut block = pa * pb.adjoint();
                if a == b {
                    block = &block + &block;
                }
                for s in 0..pb.nrows() {
                    for r in 0..pa.nrows() {
                        k[(offsets[a] + r, offsets[b] + s)] = block[(r, s)];
                    }
                }
            }
        }
        let llt = k.llt(Side::Lower).map_err(|_| Error::IllConditionedSensing)?;
        Ok(Self { llt, offsets })
    }

    pub(crate) fn solve(&self, rhs: &[Vec<C64>]) -> Vec<Vec<C64>> {
        let flat: Vec<C64> = rhs.iter().flatten().copied().collect();
        let sol = self.llt.solve(linalg::vec_to_col(&flat));
        self.offsets
            .windows(2)
            .map(|w| (w[0]..w[1]).map(|i| sol[(i, 0)]).collect())
            .collect()
    }
}

/// Centers of the affine step: `C_b = W_b - Y_b`, split into Toeplitz,
/// column and corner parts.
struct Center {
    toeplitz: Vec<C64>,
    column: Vec<C64>,
    corner: f64,
}

fn center(w: &Mat<C64>, y: &Mat<C64>) -> Center {
    let n = w.nrows() - 1;
    let at = |r: usize, s: usize| w[(r, s)] - y[(r, s)];
    let mut toeplitz = vec![C64::new(0.0, 0.0); n];
    for s in 0..n {
        toeplitz[0] += at(s, s);
    }
    toeplitz[0] = C64::new(toeplitz[0].re / n as f64, 0.0);
    for (d, g) in toeplitz.iter_mut().enumerate().skip(1) {
        for s in 0..n - d {
            *g += at(s + d, s) + at(s, s + d).conj();
        }
        *g /= 2.0 * (n - d) as f64;
    }
    let column = (0..n).map(|r| 0.5 * (at(r, n) + at(n, r).conj())).collect();
    Center { toeplitz, column, corner: at(n, n).re }
}

/// Solves `min sum_b |z_b - c_b|^2  s.t.  Phi_j (z_c + z_j) = y_j`.
/// Returns the minimizer and `nu` with `z_j = c_j + Phi_j^* nu_j`.
fn project_components(
    problem: &MeasurementSet,
    kkt: &KktSystem,
    centers: &[Vec<C64>],
) -> (Vec<Vec<C64>>, Vec<Vec<C64>>) {
    let ops = problem.sensing();
    let rhs: Vec<Vec<C64>> = ops
        .iter()
        .zip(problem.measurements())
        .enumerate()
        .map(|(j, (op, y))| {
            let pred = op.apply(&linalg::add(&centers[0], &centers[j + 1]));
            linalg::sub(y, &pred)
        })
        .collect();
    let nu = kkt.solve(&rhs);
    let mut z = centers.to_vec();
    for (j, (op, nu_j)) in ops.iter().zip(&nu).enumerate() {
        let back = op.adjoint(nu_j);
        for (k, v) in back.iter().enumerate() {
            z[0][k] += v;
            z[j + 1][k] += v;
        }
    }
    (z, nu)
}

/// Minimizes the objective plus `(rho/2) sum_b |M_b(v) - W_b + Y_b|^2` over
/// the affine set; writes the result into `state`.
pub fn affine_step(state: &mut SolverState, problem: &MeasurementSet, kkt: &KktSystem) {
    let n = problem.dim();
    let rho = state.rho;
    let centers: Vec<Center> = state
        .slack
        .iter()
        .zip(&state.dual)
        .map(|(w, y)| center(w, y))
        .collect();
    for (b, c) in centers.iter().enumerate() {
        let mut u = c.toeplitz.clone();
        u[0].re -= 1.0 / (2.0 * rho * n as f64);
        state.gens[b] = u;
        state.t_blocks[b] = c.corner - 1.0 / (2.0 * rho);
    }
    let cols: Vec<Vec<C64>> = centers.into_iter().map(|c| c.column).collect();
    state.components = project_components(problem, kkt, &cols).0;
}

/// Measurement multipliers `q_j` implied by the current slack and dual.
pub fn extract_multipliers(state: &SolverState, problem: &MeasurementSet, kkt: &KktSystem) -> Vec<Vec<C64>> {
    let cols: Vec<Vec<C64>> = state
        .slack
        .iter()
        .zip(&state.dual)
        .map(|(w, y)| center(w, y).column)
        .collect();
    let (_, nu) = project_components(problem, kkt, &cols);
    nu.into_iter()
        .map(|v| v.into_iter().map(|x| x * (2.0 * state.rho)).collect())
        .collect()
}

/// Duality diagnostics for multipliers `q` at the primal iterate `vars`.
pub fn dual_diagnostics(problem: &MeasurementSet, vars: &SdpVariables, q: &[Vec<C64>]) -> Result<DualDiagnostics> {
    let grid = DUAL_NORM_GRID.max(4 * problem.dim());
    let objective = sdp::primal_objective(vars);
    let dual_objective = problem.dual_objective(q);
    Ok(DualDiagnostics {
        dual_objective,
        dual_norm: sdp::dual_norm(q, problem.sensing(), grid)?,
        duality_gap: (objective - dual_objective).abs(),
    })
}

fn scale_in_place(m: &mut Mat<C64>, s: f64) {
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            m[(i, j)] *= s;
        }
    }
}

/// One full iteration: affine step, relaxed PSD projection, dual update.
fn iterate(state: &mut SolverState, problem: &MeasurementSet, kkt: &KktSystem, cfg: &SolverConfig) -> Result<()> {
    affine_step(state, problem, kkt);
    let alpha = cfg.over_relaxation;
    let mut primal_sq = 0.0;
    let mut dual_sq = 0.0;
    for b in 0..state.slack.len() {
        let mv = state.block_matrix(b);
        let w_old = &state.slack[b];
        let relaxed = Mat::from_fn(mv.nrows(), mv.ncols(), |r, s| {
            alpha * mv[(r, s)] + (1.0 - alpha) * w_old[(r, s)]
        });
        let w_new = psd_project(&(&relaxed + &state.dual[b]))?;
        let y = &mut state.dual[b];
        for s in 0..mv.ncols() {
            for r in 0..mv.nrows() {
                y[(r, s)] += relaxed[(r, s)] - w_new[(r, s)];
                primal_sq += (mv[(r, s)] - w_new[(r, s)]).norm_sqr();
                dual_sq += (w_new[(r, s)] - w_old[(r, s)]).norm_sqr();
            }
        }
        state.slack[b] = w_new;
    }
    state.primal_res = primal_sq.sqrt();
    state.dual_res = state.rho * dual_sq.sqrt();
    state.iteration += 1;
    Ok(())
}

fn stopping_scales(state: &SolverState) -> (f64, f64) {
    let mut mv = 0.0f64;
    let mut w = 0.0f64;
    let mut y = 0.0f64;
    for b in 0..state.slack.len() {
        mv += frobenius(&state.block_matrix(b)).powi(2);
        w += frobenius(&state.slack[b]).powi(2);
        y += frobenius(&state.dual[b]).powi(2);
    }
    (mv.sqrt().max(w.sqrt()), state.rho * y.sqrt())
}

/// Residual balancing on residuals normalized by their stopping scales.
fn adapt_rho(state: &mut SolverState, cfg: &SolverConfig, primal_scale: f64, dual_scale: f64) {
    let primal = state.primal_res / primal_scale.max(f64::MIN_POSITIVE);
    let dual = state.dual_res / dual_scale.max(f64::MIN_POSITIVE);
    let factor = if primal > cfg.adapt_ratio * dual {
        cfg.adapt_scale
    } else if dual > cfg.adapt_ratio * primal {
        1.0 / cfg.adapt_scale
    } else {
        return;
    };
    state.rho *= factor;
    for y in &mut state.dual {
        scale_in_place(y, 1.0 / factor);
    }
}

/// Runs the splitting method from `state` until convergence or the
/// iteration cap. Returns the final status.
pub fn run(
    state: &mut SolverState,
    problem: &MeasurementSet,
    kkt: &KktSystem,
    cfg: &SolverConfig,
) -> Result<SolveStatus> {
    while state.iteration < cfg.max_iters {
        iterate(state, problem, kkt, cfg)?;
        let (primal_scale, dual_scale) = stopping_scales(state);
        if cfg.trace_every > 0 && state.iteration.is_multiple_of(cfg.trace_every) {
            state.history.push(TraceRow {
                iter: state.iteration,
                objective: sdp::primal_objective(&state.variables()),
                primal_res: state.primal_res,
                dual_res: state.dual_res,
                rho: state.rho,
            });
        }
        if state.primal_res <= cfg.eps_abs + cfg.eps_rel * primal_scale
            && state.dual_res <= cfg.eps_abs + cfg.eps_rel * dual_scale
        {
            return Ok(SolveStatus::Converged);
        }
        if cfg.adaptive_rho && state.iteration.is_multiple_of(cfg.adapt_interval) {
            adapt_rho(state, cfg, primal_scale, dual_scale);
        }
    }
    Ok(SolveStatus::MaxIters)
}

/// Result of the single-signal atomic norm SDP.
#[derive(Debug, Clone)]
pub struct AtomicNormSolution {
    pub objective: f64,
    pub generator: ToeplitzGenerator,
    pub t: f64,
    pub iterations: usize,
    pub status: SolveStatus,
}

/// `|x|_A = min (1/2n) tr Toep(u) + t/2  s.t.  [[Toep(u), x], [x^*, t]] >= 0`,
/// solved directly with `x` held fixed (no measurement coupling, no split).
pub fn atomic_norm(x: &[C64], cfg: &SolverConfig) -> Result<AtomicNormSolution> {
    cfg.validate()?;
    let n = x.len();
    if n == 0 {
        return Err(Error::InvalidArgument("empty signal".into()));
    }
    let block = |u: &[C64], t: f64| {
        Mat::from_fn(n + 1, n + 1, |r, s| match (r == n, s == n) {
            (false, false) if r >= s => u[r - s],
            (false, false) => u[s - r].conj(),
            (false, true) => x[r],
            (true, false) => x[s].conj(),
            (true, true) => C64::new(t, 0.0),
        })
    };
    let mut w = Mat::<C64>::zeros(n + 1, n + 1);
    let mut y = Mat::<C64>::zeros(n + 1, n + 1);
    let mut rho = cfg.rho;
    let mut u = vec![C64::new(0.0, 0.0); n];
    let mut t = 0.0;
    let alpha = cfg.over_relaxation;
    let mut status = SolveStatus::MaxIters;
    let mut iter = 0;
    while iter < cfg.max_iters {
        iter += 1;
        let c = center(&w, &y);
        u = c.toeplitz;
        u[0].re -= 1.0 / (2.0 * rho * n as f64);
        t = c.corner - 1.0 / (2.0 * rho);
        let mv = block(&u, t);
        let relaxed = Mat::from_fn(n + 1, n + 1, |r, s| alpha * mv[(r, s)] + (1.0 - alpha) * w[(r, s)]);
        let w_new = psd_project(&(&relaxed + &y))?;
        y = &y + &relaxed - &w_new;
        let primal = frobenius(&(&mv - &w_new));
        let dual = rho * frobenius(&(&w_new - &w));
        w = w_new;
        let primal_scale = frobenius(&mv).max(frobenius(&w));
        let dual_scale = rho * frobenius(&y);
        if primal <= cfg.eps_abs + cfg.eps_rel * primal_scale && dual <= cfg.eps_abs + cfg.eps_rel * dual_scale {
            status = SolveStatus::Converged;
            break;
        }
        if cfg.adaptive_rho && iter % cfg.adapt_interval == 0 {
            let (p, d) = (primal / primal_scale.max(f64::MIN_POSITIVE), dual / dual_scale.max(f64::MIN_POSITIVE));
            let factor = if p > cfg.adapt_ratio * d {
                cfg.adapt_scale
            } else if d > cfg.adapt_ratio * p {
                1.0 / cfg.adapt_scale
            } else {
                1.0
            };
            rho *= factor;
            scale_in_place(&mut y, 1.0 / factor);
        }
    }
    let generator = ToeplitzGenerator::from_hermitian_part(u);
    Ok(AtomicNormSolution { objective: 0.5 * generator.normalized_trace() + 0.5 * t, generator, t, iterations: iter, status })
}

/// Solves the joint SDP for `problem`.
pub fn solve(problem: &MeasurementSet, cfg: &SolverConfig) -> Result<SdpSolution> {
    cfg.validate()?;
    faer::set_global_parallelism(faer::Par::Seq);
    let kkt = KktSystem::new(problem)?;
    let mut state = SolverState::new(problem.dim(), problem.ensemble_size(), cfg.rho);
    let status = run(&mut state, problem, &kkt, cfg)?;
    finish(state, problem, &kkt, status)
}

fn finish(state: SolverState, problem: &MeasurementSet, kkt: &KktSystem, status: SolveStatus) -> Result<SdpSolution> {
    let vars = state.variables();
    let multipliers = extract_multipliers(&state, problem, kkt);
    let diagnostics = dual_diagnostics(problem, &vars, &multipliers)?;
    Ok(SdpSolution {
        objective: sdp::primal_objective(&vars),
        vars,
        multipliers,
        primal_residual: state.primal_res,
        dual_residual: state.dual_res,
        iterations: state.iteration,
        status,
        diagnostics,
    })
}

/// Solves the joint SDP and also returns the final solver state (including
/// the trace, when enabled).
pub fn solve_with_state(problem: &MeasurementSet, cfg: &SolverConfig) -> Result<(SdpSolution, SolverState)> {
    cfg.validate()?;
    faer::set_global_parallelism(faer::Par::Seq);
    let kkt = KktSystem::new(problem)?;
    let mut state = SolverState::new(problem.dim(), problem.ensemble_size(), cfg.rho);
    let status = run(&mut state, problem, &kkt, cfg)?;
    let sol = finish(state.clone(), problem, &kkt, status)?;
    Ok((sol, state))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sdp::SensingOperator;
    use crate::signal::Atom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(n: usize, rng: &mut ChaCha8Rng) -> Mat<C64> {
        let a = Mat::from_fn(n, n, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let mut h = &a + a.adjoint();
        linalg::symmetrize(&mut h);
        h
    }

    #[test]
    fn projection_clips_negative_eigenvalues() {
        let m = Mat::from_fn(2, 2, |r, s| match (r, s) {
            (0, 0) => C64::new(1.0, 0.0),
            (1, 1) => C64::new(-1.0, 0.0),
            _ => C64::new(0.0, 0.0),
        });
        let p = psd_project(&m).unwrap();
        assert!((p[(0, 0)] - C64::new(1.0, 0.0)).norm() < 1e-14);
        assert!(p[(1, 1)].norm() < 1e-14 && p[(0, 1)].norm() < 1e-14);
    }

    #[test]
    fn projection_is_idempotent_and_psd() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let h = random_hermitian(6, &mut rng);
            let p = psd_project(&h).unwrap();
            assert!(linalg::min_eigenvalue(&p).unwrap() >= -1e-12);
            let pp = psd_project(&p).unwrap();
            assert!(frobenius(&(&pp - &p)) < 1e-12);
        }
    }

    #[test]
    fn projection_beats_random_psd_candidates() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let h = random_hermitian(5, &mut rng);
        let best = frobenius(&(&h - &psd_project(&h).unwrap()));
        for _ in 0..100 {
            let b = random_hermitian(5, &mut rng);
            let cand = &b * b.adjoint();
            assert!(best <= frobenius(&(&h - &cand)) + 1e-12);
        }
    }

    #[test]
    fn affine_step_satisfies_measurements() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 7;
        let ops = vec![
            SensingOperator::subsample(n, vec![0, 2, 5]).unwrap(),
            SensingOperator::subsample(n, vec![1, 2, 3, 6]).unwrap(),
        ];
        let ys: Vec<Vec<C64>> = ops
            .iter()
            .map(|op| (0..op.rows()).map(|_| C64::new(rng.random(), rng.random())).collect())
            .collect();
        let p = MeasurementSet::new(ops, ys).unwrap();
        let kkt = KktSystem::new(&p).unwrap();
        let mut st = SolverState::new(n, 2, 0.7);
        for b in 0..3 {
            st.slack[b] = random_hermitian(n + 1, &mut rng);
            st.dual[b] = random_hermitian(n + 1, &mut rng);
        }
        affine_step(&mut st, &p, &kkt);
        for (j, op) in p.sensing().iter().enumerate() {
            let pred = op.apply(&linalg::add(&st.components[0], &st.components[j + 1]));
            assert!(linalg::norm2(&linalg::sub(&pred, &p.measurements()[j])) < 1e-12);
        }
    }

    #[test]
    fn zero_problem_stays_at_zero() {
        let n = 5;
        let p = MeasurementSet::full_observation(&[vec![C64::new(0.0, 0.0); n]]).unwrap();
        let sol = solve(&p, &SolverConfig::default()).unwrap();
        assert!(sol.objective.abs() < 1e-8);
        assert!(sol.signals()[0].iter().all(|c| c.norm() < 1e-8));
    }

    #[test]
    fn single_atom_multiplier_is_normalized_atom() {
        let n = 12;
        let x = Atom::new(0.27, 0.4, n).unwrap().synthesize();
        let p = MeasurementSet::full_observation(std::slice::from_ref(&x)).unwrap();
        let sol = solve(&p, &SolverConfig::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Converged);
        assert!((sol.objective - 1.0).abs() < 1e-6);
        let expect: Vec<C64> = x.iter().map(|c| c / n as f64).collect();
        assert!(linalg::norm2(&linalg::sub(&sol.multipliers[0], &expect)) < 1e-5);
    }

    #[test]
    fn atomic_norm_of_two_atoms() {
        let n = 16;
        let x = linalg::add(
            &Atom::new(0.1, 0.0, n).unwrap().synthesize(),
            &Atom::new(0.5, 1.0, n).unwrap().synthesize().iter().map(|c| c * 2.0).collect::<Vec<_>>(),
        );
        let sol = atomic_norm(&x, &SolverConfig::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Converged);
        assert!((sol.objective - 3.0).abs() < 1e-6, "{}", sol.objective);
    }

    #[test]
    fn deterministic() {
        let n = 10;
        let x = Atom::new(0.33, 2.0, n).unwrap().synthesize();
        let p = MeasurementSet::observe(vec![SensingOperator::subsample(n, vec![0, 3, 4, 8, 9]).unwrap()], &[x]).unwrap();
        let a = solve(&p, &SolverConfig::default()).unwrap();
        let b = solve(&p, &SolverConfig::default()).unwrap();
        assert_eq!(a.iterations, b.iterations);
        assert_eq!(a.objective.to_bits(), b.objective.to_bits());
    }

    #[test]
    fn config_validation() {
        assert!(SolverConfig { rho: 0.0, ..Default::default() }.validate().is_err());
        assert!(SolverConfig { over_relaxation: 2.0, ..Default::default() }.validate().is_err());
        assert!(SolverConfig::default().validate().is_ok());
    }
}
