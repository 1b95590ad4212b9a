//! Monte Carlo success-rate experiments: joint versus separate recovery over
//! a grid of ensemble sizes and per-signal measurement counts.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::admm::{self, SolverConfig};
use crate::certificate::{self, DualPolynomialEnsemble, LocalizeOptions};
use crate::error::{Error, Result};
use crate::grid_oracle::{self, GridOracleConfig};
use crate::io::fmt_real;
use crate::linalg::relative_error;
use crate::sdp::{MeasurementSet, SdpSolution, SensingOperator, SolveStatus};
use crate::signal::{random_instance, InstanceConfig, MagnitudeLaw, SignalEnsemble};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Joint,
    Separate,
    #[default]
    Both,
}

impl Mode {
    pub fn methods(self) -> Vec<Method> {
        match self {
            Mode::Joint => vec![Method::Joint],
            Mode::Separate => vec![Method::Separate],
            Mode::Both => vec![Method::Joint, Method::Separate],
        }
    }
}

/// A single recovery method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    Joint,
    /// One single-signal problem per signal.
    Separate,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Joint => "joint",
            Method::Separate => "separate",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n: usize,
    pub s_c: usize,
    pub s_j: usize,
    #[serde(rename = "J")]
    pub ensemble_sizes: Vec<usize>,
    /// Measurements per signal.
    pub m: Vec<usize>,
    pub trials: usize,
    pub base_seed: u64,
    pub mode: Mode,
    /// Success iff the largest per-signal relative error is at most this.
    pub threshold: f64,
    pub min_sep: Option<f64>,
    pub magnitude_law: MagnitudeLaw,
    /// Localize frequencies from the dual polynomials of joint solves.
    pub certificate: bool,
    pub solver: SolverConfig,
    /// Thresholds checked by `sweep --assert`.
    #[serde(rename = "assert")]
    pub assertions: Vec<RateAssertion>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n: 40,
            s_c: 4,
            s_j: 2,
            ensemble_sizes: vec![1, 4],
            m: (5..=35).step_by(5).collect(),
            trials: 20,
            base_seed: 0,
            mode: Mode::Both,
            threshold: 1e-6,
            min_sep: None,
            magnitude_law: MagnitudeLaw::default(),
            certificate: false,
            solver: SolverConfig::default(),
            assertions: Vec::new(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.ensemble_sizes.is_empty() || self.ensemble_sizes.contains(&0) {
            return Err(Error::Config("J values must be positive and non-empty".into()));
        }
        if self.m.is_empty() || self.m.iter().any(|&m| m == 0 || m > self.n) {
            return Err(Error::Config(format!("measurement counts must lie in 1..={}", self.n)));
        }
        if !(self.threshold > 0.0) {
            return Err(Error::Config("threshold must be positive".into()));
        }
        self.solver.validate()?;
        self.instance_config(1, 0).validate()
    }

    pub fn instance_config(&self, ensemble_size: usize, seed: u64) -> InstanceConfig {
        InstanceConfig {
            n: self.n,
            ensemble_size,
            s_c: self.s_c,
            s_j: self.s_j,
            min_sep: self.min_sep,
            magnitude_law: self.magnitude_law,
            seed,
        }
    }

    /// Three real parameters per sinusoid across the ensemble.
    pub fn intrinsic_sparsity(&self, ensemble_size: usize) -> usize {
        3 * (self.s_c + self.s_j * ensemble_size)
    }

    /// All `(method, J, m)` cells in output order.
    pub fn cells(&self) -> Vec<Cell> {
        let mut out = Vec::new();
        for method in self.mode.methods() {
            for &ensemble_size in &self.ensemble_sizes {
                for &m in &self.m {
                    out.push(Cell { method, ensemble_size, m });
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cell {
    pub method: Method,
    pub ensemble_size: usize,
    pub m: usize,
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Seed of one trial. The method is deliberately not hashed so joint and
/// separate recovery see the same instance and sensing rows.
pub fn trial_seed(base: u64, ensemble_size: usize, m: usize, trial: usize) -> u64 {
    [ensemble_size as u64, m as u64, trial as u64]
        .into_iter()
        .fold(splitmix(base), |h, v| splitmix(h ^ v))
}

/// Uniformly random distinct rows, sorted.
pub fn sample_rows<R: rand::Rng>(rng: &mut R, n: usize, m: usize) -> Vec<usize> {
    let mut rows = sample(rng, n, m).into_vec();
    rows.sort_unstable();
    rows
}

/// Instance and sub-identity measurements for a trial seed. Each signal
/// gets an independent row subset.
pub fn generate_trial(
    cfg: &ExperimentConfig,
    ensemble_size: usize,
    m: usize,
    seed: u64,
) -> Result<(SignalEnsemble, MeasurementSet)> {
    let truth = random_instance(&cfg.instance_config(ensemble_size, seed))?;
    let problem = observe_subsampled(&truth, m, seed)?;
    Ok((truth, problem))
}

/// Sub-identity measurements of `truth`: `m` rows per signal drawn from a
/// stream derived from `seed` (independent of the instance stream).
pub fn observe_subsampled(truth: &SignalEnsemble, m: usize, seed: u64) -> Result<MeasurementSet> {
    let n = truth.dim();
    if m == 0 || m > n {
        return Err(Error::Config(format!("measurement count {m} must lie in 1..={n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix(seed ^ 0x5e45_1e55));
    let ops = (0..truth.ensemble_size())
        .map(|_| SensingOperator::subsample(n, sample_rows(&mut rng, n, m)))
        .collect::<Result<Vec<_>>>()?;
    MeasurementSet::observe(ops, &truth.synthesize())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertificateSummary {
    /// Every localized frequency set matches the truth within `1e-3`.
    pub localized: bool,
    pub max_offsupport: f64,
    pub max_sign_residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub method: Method,
    pub ensemble_size: usize,
    pub m: usize,
    pub trial: usize,
    pub seed: u64,
    pub errors: Vec<f64>,
    pub success: bool,
    /// Worst status over the solves of this trial.
    pub status: SolveStatus,
    /// Total iterations over the solves of this trial.
    pub iterations: usize,
    pub objective: f64,
    /// Largest `|objective - dual objective| / max(1, objective)` over solves.
    pub relative_gap: f64,
    pub dual_norm: f64,
    pub certificate: Option<CertificateSummary>,
    pub seconds: f64,
}

impl TrialRecord {
    pub fn max_error(&self) -> f64 {
        self.errors.iter().cloned().fold(0.0, f64::max)
    }
}

/// Everything produced by one trial.
#[derive(Debug, Clone)]
pub struct TrialOutcome {
    pub record: TrialRecord,
    pub truth: SignalEnsemble,
    pub problem: MeasurementSet,
    /// Joint solution, or one single-signal solution per signal.
    pub solutions: Vec<SdpSolution>,
}

pub const LOCALIZE_TOL: f64 = 1e-3;

fn worst_status(a: SolveStatus, b: SolveStatus) -> SolveStatus {
    use SolveStatus::*;
    match (a, b) {
        (Infeasible, _) | (_, Infeasible) => Infeasible,
        (MaxIters, _) | (_, MaxIters) => MaxIters,
        _ => Converged,
    }
}

pub fn summarize_certificate(sol: &SdpSolution, problem: &MeasurementSet, truth: &SignalEnsemble) -> Result<CertificateSummary> {
    let ens = DualPolynomialEnsemble::from_multipliers(&sol.multipliers, problem.sensing())?;
    let rep = certificate::localize(&ens, Some(truth), &LocalizeOptions::default())?;
    let mut localized = certificate::frequencies_match(&rep.common_frequencies(), &truth.common().frequencies(), LOCALIZE_TOL);
    for (j, inn) in truth.innovations().iter().enumerate() {
        localized &= certificate::frequencies_match(&rep.innovation_frequencies(j), &inn.frequencies(), LOCALIZE_TOL);
    }
    let max_sign_residual = rep.conditions.as_ref().map_or(0.0, |c| c.signs.max_residual());
    Ok(CertificateSummary { localized, max_offsupport: rep.max_offsupport.max(), max_sign_residual })
}

pub fn run_trial(cfg: &ExperimentConfig, cell: Cell, trial: usize) -> Result<TrialOutcome> {
    let seed = trial_seed(cfg.base_seed, cell.ensemble_size, cell.m, trial);
    let (truth, problem) = generate_trial(cfg, cell.ensemble_size, cell.m, seed)?;
    let signals = truth.synthesize();
    let start = Instant::now();
    let solutions = match cell.method {
        Method::Joint => vec![admm::solve(&problem, &cfg.solver)?],
        Method::Separate => (0..cell.ensemble_size)
            .map(|j| admm::solve(&problem.single(j), &cfg.solver))
            .collect::<Result<Vec<_>>>()?,
    };
    let seconds = start.elapsed().as_secs_f64();
    let estimates: Vec<Vec<_>> = solutions.iter().flat_map(|s| s.signals()).collect();
    let errors: Vec<f64> = estimates.iter().zip(&signals).map(|(e, x)| relative_error(e, x)).collect();
    let certificate = match (cell.method, cfg.certificate) {
        (Method::Joint, true) => Some(summarize_certificate(&solutions[0], &problem, &truth)?),
        _ => None,
    };
    let record = TrialRecord {
        method: cell.method,
        ensemble_size: cell.ensemble_size,
        m: cell.m,
        trial,
        seed,
        success: errors.iter().all(|&e| e <= cfg.threshold),
        errors,
        status: solutions.iter().fold(SolveStatus::Converged, |a, s| worst_status(a, s.status)),
        iterations: solutions.iter().map(|s| s.iterations).sum(),
        objective: solutions.iter().map(|s| s.objective).sum(),
        relative_gap: solutions
            .iter()
            .map(|s| s.diagnostics.duality_gap / s.objective.max(1.0))
            .fold(0.0, f64::max),
        dual_norm: solutions.iter().map(|s| s.diagnostics.dual_norm).fold(0.0, f64::max),
        certificate,
        seconds,
    };
    Ok(TrialOutcome { record, truth, problem, solutions })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub cell: Cell,
    pub trials: usize,
    pub successes: usize,
    pub mean_error: f64,
    pub mean_iters: f64,
    pub mean_seconds: f64,
}

impl CellSummary {
    pub fn rate(&self) -> f64 {
        self.successes as f64 / self.trials as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub trials: Vec<TrialRecord>,
    pub cells: Vec<CellSummary>,
}

impl SweepResult {
    pub fn cell(&self, method: Method, ensemble_size: usize, m: usize) -> Option<&CellSummary> {
        self.cells.iter().find(|c| c.cell == Cell { method, ensemble_size, m })
    }

    pub fn rate(&self, method: Method, ensemble_size: usize, m: usize) -> Option<f64> {
        self.cell(method, ensemble_size, m).map(CellSummary::rate)
    }
}

#[derive(Debug, Clone, Default)]
pub struct SweepOptions {
    /// Zero all timing columns so output is byte-for-byte reproducible.
    pub reproducible: bool,
    /// Write `dualpoly_J<J>_m<m>_<trial>.csv` for joint trials here.
    pub dualpoly_dir: Option<PathBuf>,
    /// Grid size for dual polynomial CSVs.
    pub dualpoly_grid: usize,
}

fn write_dualpoly(dir: &Path, out: &TrialOutcome, grid: usize) -> Result<()> {
    let r = &out.record;
    let ens = DualPolynomialEnsemble::from_multipliers(&out.solutions[0].multipliers, out.problem.sensing())?;
    let path = dir.join(format!("dualpoly_J{}_m{}_{}.csv", r.ensemble_size, r.m, r.trial));
    let file = std::io::BufWriter::new(std::fs::File::create(path)?);
    certificate::write_dual_poly_csv(&ens, Some(&out.truth), grid, file)
}

/// Runs every trial of every cell. Trials run in parallel; records come back
/// in cell-then-trial order regardless of scheduling.
pub fn run_sweep(cfg: &ExperimentConfig, opts: &SweepOptions) -> Result<SweepResult> {
    cfg.validate()?;
    let jobs: Vec<(Cell, usize)> = cfg
        .cells()
        .into_iter()
        .flat_map(|c| (0..cfg.trials).map(move |t| (c, t)))
        .collect();
    let mut trials = jobs
        .par_iter()
        .map(|&(cell, t)| {
            let out = run_trial(cfg, cell, t)?;
            if let (Some(dir), Method::Joint) = (&opts.dualpoly_dir, cell.method) {
                write_dualpoly(dir, &out, opts.dualpoly_grid.max(4 * cfg.n))?;
            }
            Ok(out.record)
        })
        .collect::<Result<Vec<_>>>()?;
    if opts.reproducible {
        for r in &mut trials {
            r.seconds = 0.0;
        }
    }
    let cells = cfg
        .cells()
        .into_iter()
        .map(|cell| {
            let rows: Vec<&TrialRecord> = trials
                .iter()
                .filter(|r| r.method == cell.method && r.ensemble_size == cell.ensemble_size && r.m == cell.m)
                .collect();
            let k = rows.len() as f64;
            CellSummary {
                cell,
                trials: rows.len(),
                successes: rows.iter().filter(|r| r.success).count(),
                mean_error: rows.iter().map(|r| r.max_error()).sum::<f64>() / k,
                mean_iters: rows.iter().map(|r| r.iterations as f64).sum::<f64>() / k,
                mean_seconds: rows.iter().map(|r| r.seconds).sum::<f64>() / k,
            }
        })
        .collect();
    Ok(SweepResult { trials, cells })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AssertKind {
    /// Joint success rate.
    Joint,
    /// Separate success rate.
    Separate,
    /// Joint rate minus separate rate.
    Gap,
}

/// A bound on a success rate (or the joint-separate gap) of one cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateAssertion {
    pub kind: AssertKind,
    #[serde(rename = "J")]
    pub ensemble_size: usize,
    pub m: usize,
    pub min: Option<f64>,
    pub max: Option<f64>,
}

impl RateAssertion {
    /// Evaluates against a sweep; returns pass/fail and a one-line summary.
    pub fn check(&self, result: &SweepResult) -> (bool, String) {
        let (j, m) = (self.ensemble_size, self.m);
        let value = match self.kind {
            AssertKind::Joint => result.rate(Method::Joint, j, m),
            AssertKind::Separate => result.rate(Method::Separate, j, m),
            AssertKind::Gap => result
                .rate(Method::Joint, j, m)
                .zip(result.rate(Method::Separate, j, m))
                .map(|(a, b)| a - b),
        };
        let label = format!("{} J={j} m={m}", format!("{:?}", self.kind).to_lowercase());
        let Some(v) = value else {
            return (false, format!("{label}: cell missing from sweep"));
        };
        let ok = self.min.is_none_or(|lo| v >= lo) && self.max.is_none_or(|hi| v <= hi);
        let bounds = match (self.min, self.max) {
            (Some(lo), Some(hi)) => format!("in [{lo}, {hi}]"),
            (Some(lo), None) => format!(">= {lo}"),
            (None, Some(hi)) => format!("<= {hi}"),
            (None, None) => "unbounded".into(),
        };
        (ok, format!("{label}: {v:.4} (required {bounds})"))
    }
}

pub fn sweep_csv(result: &SweepResult) -> String {
    let mut out = String::from("mode,J,m_j,trials,successes,rate,mean_error,mean_iters,mean_seconds\n");
    for c in &result.cells {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            c.cell.method.as_str(),
            c.cell.ensemble_size,
            c.cell.m,
            c.trials,
            c.successes,
            fmt_real(c.rate()),
            fmt_real(c.mean_error),
            fmt_real(c.mean_iters),
            fmt_real(c.mean_seconds)
        );
    }
    out
}

pub fn trials_csv(result: &SweepResult) -> String {
    let mut out = String::from(
        "mode,J,m_j,trial,seed,success,max_error,errors,status,iterations,objective,relative_gap,dual_norm,\
         cert_localized,cert_max_offsupport,cert_max_sign_residual,seconds\n",
    );
    for r in &result.trials {
        let errors: Vec<String> = r.errors.iter().map(|&e| fmt_real(e)).collect();
        let cert = match &r.certificate {
            Some(c) => format!("{},{},{}", c.localized, fmt_real(c.max_offsupport), fmt_real(c.max_sign_residual)),
            None => ",,".into(),
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.method.as_str(),
            r.ensemble_size,
            r.m,
            r.trial,
            r.seed,
            r.success,
            fmt_real(r.max_error()),
            errors.join(";"),
            r.status.as_str(),
            r.iterations,
            fmt_real(r.objective),
            fmt_real(r.relative_gap),
            fmt_real(r.dual_norm),
            cert,
            fmt_real(r.seconds)
        );
    }
    out
}

/// Batch comparison of the SDP objective against the fine-grid oracle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleCheckConfig {
    pub n: usize,
    #[serde(rename = "J")]
    pub ensemble_size: usize,
    pub s_c: usize,
    pub s_j: usize,
    pub m: usize,
    pub instances: usize,
    pub grid: usize,
    pub base_seed: u64,
    pub solver: SolverConfig,
}

impl Default for OracleCheckConfig {
    fn default() -> Self {
        Self {
            n: 12,
            ensemble_size: 2,
            s_c: 1,
            s_j: 1,
            m: 8,
            instances: 10,
            grid: grid_oracle::MAX_GRID,
            base_seed: 0,
            solver: SolverConfig::default(),
        }
    }
}

impl OracleCheckConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if cfg.instances == 0 {
            return Err(Error::Config("instances must be at least 1".into()));
        }
        cfg.solver.validate()?;
        Ok(cfg)
    }
}

/// Largest admissible `|sdp - grid| / max(1, sdp)`.
pub const ORACLE_REL_TOL: f64 = 1e-3;
/// The grid objective may undercut the SDP objective by at most this.
pub const ORACLE_SLACK: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleComparison {
    pub instance: usize,
    pub seed: u64,
    pub sdp_objective: f64,
    pub sdp_status: SolveStatus,
    pub grid_objective: f64,
    pub grid_lower_bound: f64,
    pub grid_converged: bool,
}

impl OracleComparison {
    pub fn relative_difference(&self) -> f64 {
        (self.sdp_objective - self.grid_objective).abs() / self.sdp_objective.abs().max(1.0)
    }

    pub fn passes(&self) -> bool {
        self.relative_difference() <= ORACLE_REL_TOL && self.grid_objective >= self.sdp_objective - ORACLE_SLACK
    }
}

pub fn run_oracle_check(cfg: &OracleCheckConfig) -> Result<Vec<OracleComparison>> {
    let exp = ExperimentConfig {
        n: cfg.n,
        s_c: cfg.s_c,
        s_j: cfg.s_j,
        ..Default::default()
    };
    (0..cfg.instances)
        .into_par_iter()
        .map(|i| {
            let seed = trial_seed(cfg.base_seed, cfg.ensemble_size, cfg.m, i);
            let (_, problem) = generate_trial(&exp, cfg.ensemble_size, cfg.m, seed)?;
            let sdp = admm::solve(&problem, &cfg.solver)?;
            let grid = grid_oracle::solve_grid_l1(&problem, cfg.grid, &GridOracleConfig::default())?;
            Ok(OracleComparison {
                instance: i,
                seed,
                sdp_objective: sdp.objective,
                sdp_status: sdp.status,
                grid_objective: grid.objective,
                grid_lower_bound: grid.lower_bound,
                grid_converged: grid.converged,
            })
        })
        .collect()
}

pub fn oracle_csv(rows: &[OracleComparison]) -> String {
    let mut out = String::from("instance,seed,sdp_objective,sdp_status,grid_objective,grid_lower_bound,grid_converged,relative_difference\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.instance,
            r.seed,
            fmt_real(r.sdp_objective),
            r.sdp_status.as_str(),
            fmt_real(r.grid_objective),
            fmt_real(r.grid_lower_bound),
            r.grid_converged,
            fmt_real(r.relative_difference())
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> ExperimentConfig {
        ExperimentConfig {
            n: 12,
            s_c: 1,
            s_j: 1,
            ensemble_sizes: vec![2],
            m: vec![12],
            trials: 2,
            ..Default::default()
        }
    }

    #[test]
    fn seeds_separate_cells_and_trials() {
        let a = trial_seed(1, 4, 20, 0);
        assert_ne!(a, trial_seed(1, 4, 20, 1));
        assert_ne!(a, trial_seed(1, 4, 21, 0));
        assert_ne!(a, trial_seed(1, 8, 20, 0));
        assert_ne!(a, trial_seed(2, 4, 20, 0));
        assert_eq!(a, trial_seed(1, 4, 20, 0));
    }

    #[test]
    fn rows_are_sorted_and_distinct() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for m in [1, 7, 40] {
            let r = sample_rows(&mut rng, 40, m);
            assert_eq!(r.len(), m);
            assert!(r.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn full_observation_succeeds() {
        let res = run_sweep(&tiny(), &SweepOptions { reproducible: true, ..Default::default() }).unwrap();
        assert_eq!(res.cells.len(), 2);
        for c in &res.cells {
            assert_eq!(c.successes, c.trials, "{:?}", c.cell);
        }
        assert!(res.trials.iter().all(|r| r.seconds == 0.0));
    }

    #[test]
    fn methods_share_instances() {
        let cfg = tiny();
        let joint = run_trial(&cfg, Cell { method: Method::Joint, ensemble_size: 2, m: 8 }, 0).unwrap();
        let sep = run_trial(&cfg, Cell { method: Method::Separate, ensemble_size: 2, m: 8 }, 0).unwrap();
        assert_eq!(joint.truth, sep.truth);
        assert_eq!(joint.problem.measurements(), sep.problem.measurements());
        assert_eq!(sep.solutions.len(), 2);
    }

    #[test]
    fn config_parses_and_validates() {
        let cfg = ExperimentConfig::from_toml("J = [4]\nm = [20]\ntrials = 3\nmode = \"joint\"\n[solver]\nrho = 0.5\n").unwrap();
        assert_eq!(cfg.ensemble_sizes, vec![4]);
        assert_eq!(cfg.mode, Mode::Joint);
        assert_eq!(cfg.solver.rho, 0.5);
        assert!(ExperimentConfig::from_toml("m = [41]").is_err());
        assert!(ExperimentConfig::from_toml("trials = 0").is_err());
        assert!(ExperimentConfig::from_toml("bogus = 1").is_err());
        assert_eq!(cfg.intrinsic_sparsity(4), 36);
    }

    #[test]
    fn assertions_evaluate_rates() {
        let cfg = ExperimentConfig::from_toml(
            "n = 12\ns_c = 1\ns_j = 1\nJ = [2]\nm = [12]\ntrials = 1\n\
             [[assert]]\nkind = \"joint\"\nJ = 2\nm = 12\nmin = 0.9\n\
             [[assert]]\nkind = \"gap\"\nJ = 2\nm = 12\nmin = 0.5\n",
        )
        .unwrap();
        let res = run_sweep(&cfg, &SweepOptions::default()).unwrap();
        let outcomes: Vec<bool> = cfg.assertions.iter().map(|a| a.check(&res).0).collect();
        assert_eq!(outcomes, vec![true, false]);
        let missing = RateAssertion { kind: AssertKind::Joint, ensemble_size: 9, m: 1, min: None, max: None };
        assert!(!missing.check(&res).0);
    }
}
