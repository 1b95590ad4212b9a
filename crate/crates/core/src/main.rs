use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use canorm::admm::{self, SolverConfig};
use canorm::certificate::{self, DualPolynomialEnsemble, LocalizeOptions};
use canorm::experiment::{self, ExperimentConfig, OracleCheckConfig, SweepOptions};
use canorm::io::{self, Instance, SolutionFile};
use canorm::linalg::relative_error;
use canorm::sdp::{SolveStatus, DUAL_NORM_GRID};
use canorm::signal::{random_instance, InstanceConfig, SignalEnsemble};
use canorm::vandermonde::{recover_spectrum, RANK_TOL};
use canorm::Error;

const EXIT_FAILURE: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_NOT_CONVERGED: u8 = 3;
const EXIT_ASSERTION: u8 = 4;

/// Joint recovery of frequency-sparse signal ensembles.
#[derive(Parser)]
#[command(name = "canorm", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a random instance and its sub-identity measurements.
    Generate(GenerateArgs),
    /// Solve an instance and report recovery against the truth.
    Solve(SolveArgs),
    /// Evaluate the dual polynomials of a solution on a grid.
    Localize(LocalizeArgs),
    /// Monte Carlo success rates over (J, m).
    Sweep(SweepArgs),
    /// Compare SDP objectives against the fine-grid l1 oracle.
    OracleCheck(OracleArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// TOML with n, J, s_c, s_j, seed, m and optionally min_sep, magnitude_law.
    config: PathBuf,
    #[arg(short, long)]
    output: PathBuf,
    /// Omit the ground truth from the instance file.
    #[arg(long)]
    blind: bool,
}

#[derive(Args)]
struct SolveArgs {
    instance: PathBuf,
    #[arg(short, long)]
    output: PathBuf,
    /// Solver settings (TOML); defaults otherwise.
    #[arg(long)]
    solver: Option<PathBuf>,
    /// Also write the recovery report here.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Ignore any ground truth in the instance.
    #[arg(long)]
    blind: bool,
}

#[derive(Args)]
struct LocalizeArgs {
    solution: PathBuf,
    #[arg(short, long)]
    output: PathBuf,
    #[arg(long, default_value_t = DUAL_NORM_GRID)]
    grid: usize,
    #[arg(long, default_value_t = experiment::LOCALIZE_TOL)]
    tol_peak: f64,
    /// Ignore any ground truth in the solution file.
    #[arg(long)]
    blind: bool,
    /// Exit with status 4 unless every certificate condition holds.
    #[arg(long)]
    assert: bool,
}

#[derive(Args)]
struct SweepArgs {
    config: PathBuf,
    /// Output directory for sweep.csv and trials.csv.
    #[arg(short, long)]
    output: PathBuf,
    /// Zero timing columns so reruns are byte-identical.
    #[arg(long)]
    reproducible: bool,
    /// Write dual polynomial CSVs of joint trials into the output directory.
    #[arg(long)]
    dualpoly: bool,
    /// Check the [[assert]] entries of the config; exit with status 4 on failure.
    #[arg(long)]
    assert: bool,
}

#[derive(Args)]
struct OracleArgs {
    /// TOML settings; defaults (n = 12, J = 2, 10 instances) otherwise.
    config: Option<PathBuf>,
    /// Output directory for oracle.csv.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Exit with status 4 if any instance disagrees with the SDP.
    #[arg(long)]
    assert: bool,
}

enum Failure {
    Err(Error),
    NotConverged,
    Assertion,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Err(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Err(e.into())
    }
}

type CliResult = std::result::Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_CONFIG);
    }
    let result = match cli.command {
        Command::Generate(a) => generate(a),
        Command::Solve(a) => solve(a),
        Command::Localize(a) => localize(a),
        Command::Sweep(a) => sweep(a),
        Command::OracleCheck(a) => oracle_check(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::NotConverged) => ExitCode::from(EXIT_NOT_CONVERGED),
        Err(Failure::Assertion) => ExitCode::from(EXIT_ASSERTION),
        Err(Failure::Err(e)) => {
            eprintln!("error: {e}");
            let code = match e {
                Error::Config(_)
                | Error::Parse { .. }
                | Error::Io(_)
                | Error::InvalidArgument(_)
                | Error::DimensionMismatch(_)
                | Error::BudgetExceeded(_)
                | Error::SamplingBudgetExhausted { .. } => EXIT_CONFIG,
                _ => EXIT_FAILURE,
            };
            ExitCode::from(code)
        }
    }
}

fn configure_threads() -> canorm::Result<()> {
    let Ok(raw) = std::env::var("CANORM_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("CANORM_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Error::Config(e.to_string()))
}

fn read_text(path: &Path) -> canorm::Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn open(path: &Path) -> canorm::Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn generate(a: GenerateArgs) -> CliResult {
    let mut table: toml::Table = read_text(&a.config)?
        .parse()
        .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
    let m = match table.remove("m") {
        None => None,
        Some(v) => Some(
            v.as_integer()
                .and_then(|m| usize::try_from(m).ok())
                .ok_or_else(|| Error::Config("m must be a non-negative integer".into()))?,
        ),
    };
    let cfg: InstanceConfig = toml::Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
    let truth = random_instance(&cfg)?;
    let problem = experiment::observe_subsampled(&truth, m.unwrap_or(cfg.n), cfg.seed)?;
    let inst = Instance { problem, truth: (!a.blind).then_some(truth) };
    io::write_instance(BufWriter::new(File::create(&a.output)?), &inst)?;
    Ok(())
}

fn frequency_list(f: &[f64]) -> String {
    let items: Vec<String> = f.iter().map(|x| format!("{x:.9}")).collect();
    format!("[{}]", items.join(", "))
}

fn solve(a: SolveArgs) -> CliResult {
    let cfg = match &a.solver {
        Some(p) => {
            let cfg: SolverConfig = toml::from_str(&read_text(p)?).map_err(|e| Error::Config(e.to_string()))?;
            cfg.validate()?;
            cfg
        }
        None => SolverConfig::default(),
    };
    let mut inst = io::read_instance(open(&a.instance)?)?;
    if a.blind {
        inst.truth = None;
    }
    let solution = admm::solve(&inst.problem, &cfg)?;
    let report = solve_report(&inst, &solution);
    print!("{report}");
    if let Some(p) = &a.report {
        fs::write(p, &report)?;
    }
    let converged = solution.status == SolveStatus::Converged;
    let file = SolutionFile { instance: inst, solution };
    io::write_solution(BufWriter::new(File::create(&a.output)?), &file)?;
    if converged {
        Ok(())
    } else {
        eprintln!("solver did not converge");
        Err(Failure::NotConverged)
    }
}

fn solve_report(inst: &Instance, s: &canorm::sdp::SdpSolution) -> String {
    use std::fmt::Write as _;
    let mut out = String::new();
    let d = &s.diagnostics;
    let _ = writeln!(out, "status {}", s.status.as_str());
    let _ = writeln!(out, "iterations {}", s.iterations);
    let _ = writeln!(out, "objective {:.12e}", s.objective);
    let _ = writeln!(out, "primal_residual {:.3e}", s.primal_residual);
    let _ = writeln!(out, "dual_residual {:.3e}", s.dual_residual);
    let _ = writeln!(out, "duality_gap {:.3e}", d.duality_gap);
    let _ = writeln!(out, "dual_norm {:.9}", d.dual_norm);

    let truth = inst.truth.as_ref();
    if let Some(t) = truth {
        for (j, (x, x0)) in s.signals().iter().zip(t.synthesize()).enumerate() {
            let _ = writeln!(out, "signal {} relative_error {:.3e}", j + 1, relative_error(x, &x0));
        }
    }
    let gens = s.vars.gens.generators();
    for (b, (g, z)) in gens.iter().zip(&s.vars.components).enumerate() {
        let label = if b == 0 { "common".to_string() } else { format!("innovation {}", b) };
        let expected = truth.map(|t| block_truth(t, b));
        match recover_spectrum(g, z, RANK_TOL) {
            Ok(rec) => {
                let found = rec.spectrum.frequencies();
                let _ = write!(out, "{label} recovered {}", frequency_list(&found));
                if let Some(f0) = expected {
                    let ok = certificate::frequencies_match(&found, &f0, experiment::LOCALIZE_TOL);
                    let _ = write!(out, " truth {} match {}", frequency_list(&f0), if ok { "yes" } else { "no" });
                }
                let _ = writeln!(out);
            }
            Err(e) => {
                let _ = writeln!(out, "{label} recovery unavailable: {e}");
            }
        }
    }
    out
}

fn block_truth(t: &SignalEnsemble, b: usize) -> Vec<f64> {
    if b == 0 {
        t.common().frequencies()
    } else {
        t.innovations()[b - 1].frequencies()
    }
}

fn localize(a: LocalizeArgs) -> CliResult {
    let mut file = io::read_solution(open(&a.solution)?)?;
    if a.blind {
        file.instance.truth = None;
    }
    let truth = file.instance.truth.as_ref();
    let ens = DualPolynomialEnsemble::from_multipliers(&file.solution.multipliers, file.instance.problem.sensing())?;
    let opts = LocalizeOptions { tol_peak: a.tol_peak, grid_size: a.grid, ..Default::default() };
    let report = certificate::localize(&ens, truth, &opts)?;
    certificate::write_dual_poly_csv(&ens, truth, a.grid, BufWriter::new(File::create(&a.output)?))?;

    println!("common peaks {}", frequency_list(&report.common_frequencies()));
    for j in 0..ens.ensemble_size() {
        println!("innovation {} peaks {}", j + 1, frequency_list(&report.innovation_frequencies(j)));
    }
    let off = &report.max_offsupport;
    for (j, v) in off.per_signal.iter().enumerate() {
        println!("max_offsupport q{} {:.9}", j + 1, v);
    }
    println!("max_offsupport sum {:.9}", off.sum);

    let Some(check) = &report.conditions else {
        if a.assert {
            eprintln!("--assert needs ground truth in the solution file");
            return Err(Failure::Assertion);
        }
        return Ok(());
    };
    println!("condition,holds");
    println!("innovation_interpolation,{}", check.innovation_interpolation);
    println!("common_interpolation,{}", check.common_interpolation);
    println!("innovation_bound,{}", check.innovation_bound);
    println!("common_bound,{}", check.common_bound);
    println!("margin,{:.9}", check.margin);
    println!("component,freq,expected_re,expected_im,value_re,value_im,residual");
    for r in &check.signs.residuals {
        let comp = match r.component {
            certificate::Component::Common => "common".to_string(),
            certificate::Component::Innovation(j) => format!("innovation_{}", j + 1),
        };
        println!(
            "{comp},{:.9},{:.9},{:.9},{:.9},{:.9},{:.3e}",
            r.freq, r.expected.re, r.expected.im, r.value.re, r.value.im, r.residual
        );
    }
    if a.assert && !check.all() {
        return Err(Failure::Assertion);
    }
    Ok(())
}

fn sweep(a: SweepArgs) -> CliResult {
    let cfg = ExperimentConfig::from_toml(&read_text(&a.config)?)?;
    fs::create_dir_all(&a.output)?;
    let opts = SweepOptions {
        reproducible: a.reproducible,
        dualpoly_dir: a.dualpoly.then(|| a.output.clone()),
        ..Default::default()
    };
    let result = experiment::run_sweep(&cfg, &opts)?;
    fs::write(a.output.join("sweep.csv"), experiment::sweep_csv(&result))?;
    fs::write(a.output.join("trials.csv"), experiment::trials_csv(&result))?;
    for c in &result.cells {
        println!(
            "{:<8} J={:<3} m={:<3} rate {:.2} ({}/{})",
            c.cell.method.as_str(),
            c.cell.ensemble_size,
            c.cell.m,
            c.rate(),
            c.successes,
            c.trials
        );
    }
    if !a.assert {
        return Ok(());
    }
    let mut ok = true;
    for check in &cfg.assertions {
        let (pass, line) = check.check(&result);
        println!("{} {line}", if pass { "PASS" } else { "FAIL" });
        ok &= pass;
    }
    if ok {
        Ok(())
    } else {
        Err(Failure::Assertion)
    }
}

fn oracle_check(a: OracleArgs) -> CliResult {
    let cfg = match &a.config {
        Some(p) => OracleCheckConfig::from_toml(&read_text(p)?)?,
        None => OracleCheckConfig::default(),
    };
    let rows = experiment::run_oracle_check(&cfg)?;
    if let Some(dir) = &a.output {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("oracle.csv"), experiment::oracle_csv(&rows))?;
    }
    let mut stdout = std::io::stdout().lock();
    for r in &rows {
        writeln!(
            stdout,
            "instance {:>3} sdp {:.10} grid {:.10} rel {:.3e}{}",
            r.instance,
            r.sdp_objective,
            r.grid_objective,
            r.relative_difference(),
            if r.passes() { "" } else { "  DISAGREES" }
        )?;
    }
    let worst = rows.iter().map(|r| r.relative_difference()).fold(0.0, f64::max);
    let worst_abs = rows
        .iter()
        .map(|r| (r.sdp_objective - r.grid_objective).abs())
        .fold(0.0, f64::max);
    writeln!(stdout, "max |sdp - grid| {worst_abs:.3e} (relative {worst:.3e})")?;
    if a.assert && !rows.iter().all(|r| r.passes()) {
        return Err(Failure::Assertion);
    }
    Ok(())
}
