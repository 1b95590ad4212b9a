//! Line-oriented text formats for instances and solutions.
//!
//! All reals are written with 17 significant digits so that files round-trip
//! bit-exactly. Blank lines and lines starting with `#` are ignored.
//!
//! Instance file:
//!
//! ```text
//! canorm-instance 1
//! n 40
//! J 4
//! signal 1 subsample 20        # or: signal 1 dense 20
//! rows 0 3 7 ...               # subsample: the selected indices
//! <re> <im> ... (2n numbers)   # dense: one line per matrix row
//! y
//! <re> <im>                    # one line per measurement
//! ...
//! truth                        # optional
//! common 4
//! <freq> <re> <im>
//! innovation 1 2
//! <freq> <re> <im>
//! end
//! ```
//!
//! A solution file is an instance file with a `solution` section appended
//! before `end` (status, scalars, generators, components and multipliers).

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use faer::Mat;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::sdp::{DualDiagnostics, MeasurementSet, SdpSolution, SdpVariables, SensingOperator, SolveStatus};
use crate::signal::{SignalEnsemble, SparseSpectrum, SpectralLine};
use crate::toeplitz::{BlockDiagToeplitz, ToeplitzGenerator};

const INSTANCE_MAGIC: &str = "canorm-instance";
const SOLUTION_MAGIC: &str = "canorm-solution";
const VERSION: &str = "1";

/// Full-precision real.
pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_complex(c: C64) -> String {
    format!("{} {}", fmt_real(c.re), fmt_real(c.im))
}

/// A problem together with optional ground truth.
#[derive(Debug, Clone)]
pub struct Instance {
    pub problem: MeasurementSet,
    pub truth: Option<SignalEnsemble>,
}

/// An instance plus the solver output for it.
#[derive(Debug, Clone)]
pub struct SolutionFile {
    pub instance: Instance,
    pub solution: SdpSolution,
}

fn write_body(out: &mut String, inst: &Instance) {
    let p = &inst.problem;
    let _ = writeln!(out, "n {}", p.dim());
    let _ = writeln!(out, "J {}", p.ensemble_size());
    for (j, (op, y)) in p.sensing().iter().zip(p.measurements()).enumerate() {
        match op {
            SensingOperator::Subsample { rows, .. } => {
                let _ = writeln!(out, "signal {} subsample {}", j + 1, rows.len());
                let idx: Vec<String> = rows.iter().map(|r| r.to_string()).collect();
                let _ = writeln!(out, "rows {}", idx.join(" "));
            }
            SensingOperator::Dense(m) => {
                let _ = writeln!(out, "signal {} dense {}", j + 1, m.nrows());
                for r in 0..m.nrows() {
                    let row: Vec<String> = (0..m.ncols()).map(|c| fmt_complex(m[(r, c)])).collect();
                    let _ = writeln!(out, "{}", row.join(" "));
                }
            }
        }
        let _ = writeln!(out, "y");
        for c in y {
            let _ = writeln!(out, "{}", fmt_complex(*c));
        }
    }
    if let Some(t) = &inst.truth {
        let _ = writeln!(out, "truth");
        write_spectrum(out, "common", t.common());
        for (j, s) in t.innovations().iter().enumerate() {
            write_spectrum(out, &format!("innovation {}", j + 1), s);
        }
    }
}

fn write_spectrum(out: &mut String, label: &str, s: &SparseSpectrum) {
    let _ = writeln!(out, "{label} {}", s.len());
    for l in s.lines() {
        let _ = writeln!(out, "{} {}", fmt_real(l.freq), fmt_complex(l.coef));
    }
}

fn write_vector(out: &mut String, label: &str, v: &[C64]) {
    let _ = writeln!(out, "{label} {}", v.len());
    for c in v {
        let _ = writeln!(out, "{}", fmt_complex(*c));
    }
}

pub fn instance_to_string(inst: &Instance) -> String {
    let mut out = format!("{INSTANCE_MAGIC} {VERSION}\n");
    write_body(&mut out, inst);
    out.push_str("end\n");
    out
}

pub fn solution_to_string(file: &SolutionFile) -> String {
    let mut out = format!("{SOLUTION_MAGIC} {VERSION}\n");
    write_body(&mut out, &file.instance);
    let s = &file.solution;
    out.push_str("solution\n");
    let _ = writeln!(out, "status {}", s.status.as_str());
    let _ = writeln!(out, "iterations {}", s.iterations);
    for (k, v) in [
        ("objective", s.objective),
        ("primal_residual", s.primal_residual),
        ("dual_residual", s.dual_residual),
        ("dual_objective", s.diagnostics.dual_objective),
        ("dual_norm", s.diagnostics.dual_norm),
        ("duality_gap", s.diagnostics.duality_gap),
        ("t", s.vars.t),
    ] {
        let _ = writeln!(out, "{k} {}", fmt_real(v));
    }
    for (b, g) in s.vars.gens.generators().iter().enumerate() {
        write_vector(&mut out, &format!("generator {b}"), g.as_slice());
    }
    for (b, z) in s.vars.components.iter().enumerate() {
        write_vector(&mut out, &format!("component {b}"), z);
    }
    for (j, q) in s.multipliers.iter().enumerate() {
        write_vector(&mut out, &format!("multipliers {}", j + 1), q);
    }
    out.push_str("end\n");
    out
}

pub fn write_instance<W: Write>(mut w: W, inst: &Instance) -> Result<()> {
    w.write_all(instance_to_string(inst).as_bytes())?;
    Ok(())
}

pub fn write_solution<W: Write>(mut w: W, file: &SolutionFile) -> Result<()> {
    w.write_all(solution_to_string(file).as_bytes())?;
    Ok(())
}

struct Lines {
    lines: Vec<(usize, String)>,
    pos: usize,
}

impl Lines {
    fn new<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = Vec::new();
        for (i, l) in r.lines().enumerate() {
            let l = l?;
            let t = l.trim();
            if !t.is_empty() && !t.starts_with('#') {
                lines.push((i + 1, t.to_string()));
            }
        }
        Ok(Self { lines, pos: 0 })
    }

    fn line_no(&self) -> usize {
        self.lines
            .get(self.pos)
            .or(self.lines.last())
            .map_or(1, |(n, _)| *n)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse { line: self.line_no(), msg: msg.into() })
    }

    fn peek(&self) -> Option<Vec<&str>> {
        self.lines.get(self.pos).map(|(_, s)| s.split_whitespace().collect())
    }

    fn next(&mut self) -> Result<(usize, Vec<String>)> {
        match self.lines.get(self.pos) {
            Some((n, s)) => {
                self.pos += 1;
                Ok((*n, s.split_whitespace().map(String::from).collect()))
            }
            None => self.err("unexpected end of file"),
        }
    }

    /// Next line, required to start with `key`; returns the remaining tokens.
    fn keyed(&mut self, key: &str) -> Result<(usize, Vec<String>)> {
        let (n, toks) = self.next()?;
        if toks.first().map(String::as_str) != Some(key) {
            return Err(Error::Parse { line: n, msg: format!("expected `{key}`, found `{}`", toks.join(" ")) });
        }
        Ok((n, toks[1..].to_vec()))
    }

    fn keyed_usize(&mut self, key: &str) -> Result<usize> {
        let (n, rest) = self.keyed(key)?;
        match rest.as_slice() {
            [v] => parse(n, v),
            _ => Err(Error::Parse { line: n, msg: format!("`{key}` takes one integer") }),
        }
    }

    fn keyed_real(&mut self, key: &str) -> Result<f64> {
        let (n, rest) = self.keyed(key)?;
        match rest.as_slice() {
            [v] => parse(n, v),
            _ => Err(Error::Parse { line: n, msg: format!("`{key}` takes one number") }),
        }
    }

    fn reals(&mut self, count: usize) -> Result<Vec<f64>> {
        let (n, toks) = self.next()?;
        if toks.len() != count {
            return Err(Error::Parse { line: n, msg: format!("expected {count} numbers, found {}", toks.len()) });
        }
        toks.iter().map(|t| parse(n, t)).collect()
    }

    fn complex(&mut self) -> Result<C64> {
        let v = self.reals(2)?;
        Ok(C64::new(v[0], v[1]))
    }

    /// `label <index> <len>` followed by `len` complex lines.
    fn vector(&mut self, label: &str, index: usize) -> Result<Vec<C64>> {
        let (n, rest) = self.keyed(label)?;
        let [i, len] = rest.as_slice() else {
            return Err(Error::Parse { line: n, msg: format!("`{label}` takes an index and a length") });
        };
        if parse::<usize>(n, i)? != index {
            return Err(Error::Parse { line: n, msg: format!("expected {label} {index}") });
        }
        (0..parse::<usize>(n, len)?).map(|_| self.complex()).collect()
    }
}

fn parse<T: std::str::FromStr>(line: usize, tok: &str) -> Result<T> {
    tok.parse().map_err(|_| Error::Parse { line, msg: format!("cannot parse `{tok}`") })
}

fn parse_spectrum(lines: &mut Lines, n: usize, head: &[String], line: usize) -> Result<SparseSpectrum> {
    let count: usize = parse(line, head.last().map(String::as_str).unwrap_or(""))?;
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let v = lines.reals(3)?;
        out.push(SpectralLine { freq: v[0], coef: C64::new(v[1], v[2]) });
    }
    SparseSpectrum::new(n, out).map_err(|e| Error::Parse { line, msg: e.to_string() })
}

fn read_body(lines: &mut Lines) -> Result<Instance> {
    let n = lines.keyed_usize("n")?;
    let jn = lines.keyed_usize("J")?;
    if n == 0 || jn == 0 {
        return lines.err("n and J must be positive");
    }
    let mut sensing = Vec::with_capacity(jn);
    let mut measurements = Vec::with_capacity(jn);
    for j in 1..=jn {
        let (ln, rest) = lines.keyed("signal")?;
        let [idx, kind, m] = rest.as_slice() else {
            return Err(Error::Parse { line: ln, msg: "expected `signal <j> <subsample|dense> <m>`".into() });
        };
        if parse::<usize>(ln, idx)? != j {
            return Err(Error::Parse { line: ln, msg: format!("expected signal {j}") });
        }
        let m: usize = parse(ln, m)?;
        let op = match kind.as_str() {
            "subsample" => {
                let (rl, rows) = lines.keyed("rows")?;
                let rows: Vec<usize> = rows.iter().map(|r| parse(rl, r)).collect::<Result<_>>()?;
                if rows.len() != m {
                    return Err(Error::Parse { line: rl, msg: format!("expected {m} row indices") });
                }
                SensingOperator::subsample(n, rows).map_err(|e| Error::Parse { line: rl, msg: e.to_string() })?
            }
            "dense" => {
                let mut mat = Mat::<C64>::zeros(m, n);
                for r in 0..m {
                    let v = lines.reals(2 * n)?;
                    for c in 0..n {
                        mat[(r, c)] = C64::new(v[2 * c], v[2 * c + 1]);
                    }
                }
                SensingOperator::dense(mat).map_err(|e| Error::Parse { line: ln, msg: e.to_string() })?
            }
            other => return Err(Error::Parse { line: ln, msg: format!("unknown sensing kind `{other}`") }),
        };
        lines.keyed("y")?;
        measurements.push((0..m).map(|_| lines.complex()).collect::<Result<Vec<_>>>()?);
        sensing.push(op);
    }
    let problem = MeasurementSet::new(sensing, measurements).map_err(|e| Error::Parse { line: lines.line_no(), msg: e.to_string() })?;

    let truth = if lines.peek().is_some_and(|t| t == ["truth"]) {
        let (tl, _) = lines.next()?;
        let (cl, head) = lines.keyed("common")?;
        let common = parse_spectrum(lines, n, &head, cl)?;
        let mut innovations = Vec::with_capacity(jn);
        for j in 1..=jn {
            let (il, head) = lines.keyed("innovation")?;
            if head.len() != 2 || parse::<usize>(il, &head[0])? != j {
                return Err(Error::Parse { line: il, msg: format!("expected `innovation {j} <count>`") });
            }
            innovations.push(parse_spectrum(lines, n, &head, il)?);
        }
        Some(SignalEnsemble::new(common, innovations).map_err(|e| Error::Parse { line: tl, msg: e.to_string() })?)
    } else {
        None
    };
    Ok(Instance { problem, truth })
}

fn magic(lines: &mut Lines, expected: &str) -> Result<()> {
    let (n, toks) = lines.next()?;
    if toks != [expected, VERSION] {
        return Err(Error::Parse { line: n, msg: format!("expected header `{expected} {VERSION}`") });
    }
    Ok(())
}

fn expect_end(lines: &mut Lines) -> Result<()> {
    lines.keyed("end")?;
    if lines.pos != lines.lines.len() {
        return lines.err("trailing content after `end`");
    }
    Ok(())
}

pub fn read_instance<R: BufRead>(r: R) -> Result<Instance> {
    let mut lines = Lines::new(r)?;
    magic(&mut lines, INSTANCE_MAGIC)?;
    let inst = read_body(&mut lines)?;
    expect_end(&mut lines)?;
    Ok(inst)
}

pub fn read_solution<R: BufRead>(r: R) -> Result<SolutionFile> {
    let mut lines = Lines::new(r)?;
    magic(&mut lines, SOLUTION_MAGIC)?;
    let instance = read_body(&mut lines)?;
    lines.keyed("solution")?;
    let (sl, st) = lines.keyed("status")?;
    let status: SolveStatus = st
        .first()
        .ok_or_else(|| Error::Parse { line: sl, msg: "missing status".into() })?
        .parse()
        .map_err(|e: Error| Error::Parse { line: sl, msg: e.to_string() })?;
    let iterations = lines.keyed_usize("iterations")?;
    let objective = lines.keyed_real("objective")?;
    let primal_residual = lines.keyed_real("primal_residual")?;
    let dual_residual = lines.keyed_real("dual_residual")?;
    let dual_objective = lines.keyed_real("dual_objective")?;
    let dual_norm = lines.keyed_real("dual_norm")?;
    let duality_gap = lines.keyed_real("duality_gap")?;
    let t = lines.keyed_real("t")?;
    let (n, jn) = (instance.problem.dim(), instance.problem.ensemble_size());
    let mut gens = Vec::with_capacity(jn + 1);
    for b in 0..=jn {
        let gl = lines.line_no();
        let g = lines.vector("generator", b)?;
        if g.len() != n {
            return Err(Error::Parse { line: gl, msg: format!("generator must have {n} entries") });
        }
        gens.push(ToeplitzGenerator::new(g).map_err(|e| Error::Parse { line: gl, msg: e.to_string() })?);
    }
    let mut components = Vec::with_capacity(jn + 1);
    for b in 0..=jn {
        let cl = lines.line_no();
        let z = lines.vector("component", b)?;
        if z.len() != n {
            return Err(Error::Parse { line: cl, msg: format!("component must have {n} entries") });
        }
        components.push(z);
    }
    let mut multipliers = Vec::with_capacity(jn);
    for j in 1..=jn {
        let ml = lines.line_no();
        let q = lines.vector("multipliers", j)?;
        if q.len() != instance.problem.measurements()[j - 1].len() {
            return Err(Error::Parse { line: ml, msg: format!("multipliers {j} length does not match measurements") });
        }
        multipliers.push(q);
    }
    expect_end(&mut lines)?;
    let vars = SdpVariables { gens: BlockDiagToeplitz::new(gens)?, components, t };
    Ok(SolutionFile {
        instance,
        solution: SdpSolution {
            vars,
            multipliers,
            objective,
            primal_residual,
            dual_residual,
            iterations,
            status,
            diagnostics: DualDiagnostics { dual_objective, dual_norm, duality_gap },
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::{random_instance, InstanceConfig};

    fn sample() -> Instance {
        let truth = random_instance(&InstanceConfig::new(12, 2, 1, 1, 9)).unwrap();
        let ops = vec![
            SensingOperator::subsample(12, vec![0, 4, 5, 11]).unwrap(),
            SensingOperator::dense(Mat::from_fn(2, 12, |r, c| C64::new(r as f64 + 0.1, c as f64 / 3.0))).unwrap(),
        ];
        let problem = MeasurementSet::observe(ops, &truth.synthesize()).unwrap();
        Instance { problem, truth: Some(truth) }
    }

    #[test]
    fn instance_round_trips_exactly() {
        let inst = sample();
        let text = instance_to_string(&inst);
        let back = read_instance(text.as_bytes()).unwrap();
        assert_eq!(back.truth, inst.truth);
        assert_eq!(back.problem.measurements(), inst.problem.measurements());
        assert_eq!(instance_to_string(&back), text);
    }

    #[test]
    fn truth_is_optional() {
        let mut inst = sample();
        inst.truth = None;
        let back = read_instance(instance_to_string(&inst).as_bytes()).unwrap();
        assert!(back.truth.is_none());
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let text = instance_to_string(&sample());
        let broken = text.replacen("rows 0 4 5 11", "rows 0 4 x 11", 1);
        match read_instance(broken.as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 5),
            other => panic!("expected parse error, got {other:?}"),
        }
        assert!(matches!(read_instance("bogus\n".as_bytes()), Err(Error::Parse { line: 1, .. })));
        let truncated: String = text.lines().take(6).collect::<Vec<_>>().join("\n");
        assert!(matches!(read_instance(truncated.as_bytes()), Err(Error::Parse { .. })));
    }

    #[test]
    fn solution_round_trips() {
        let inst = sample();
        let n = inst.problem.dim();
        let mut vars = SdpVariables::zeros(n, 2);
        vars.t = 1.25;
        vars.components[1][3] = C64::new(0.5, -1.0 / 3.0);
        let sol = SdpSolution {
            vars,
            multipliers: inst.problem.measurements().iter().map(|y| y.iter().map(|c| c * 0.1).collect()).collect(),
            objective: std::f64::consts::PI,
            primal_residual: 1e-9,
            dual_residual: 2e-9,
            iterations: 77,
            status: SolveStatus::MaxIters,
            diagnostics: DualDiagnostics { dual_objective: 3.0, dual_norm: 1.0, duality_gap: 0.14 },
        };
        let file = SolutionFile { instance: inst, solution: sol };
        let text = solution_to_string(&file);
        let back = read_solution(text.as_bytes()).unwrap();
        assert_eq!(back.solution.vars, file.solution.vars);
        assert_eq!(back.solution.multipliers, file.solution.multipliers);
        assert_eq!(back.solution.objective.to_bits(), file.solution.objective.to_bits());
        assert_eq!(back.solution.status, SolveStatus::MaxIters);
        assert_eq!(solution_to_string(&back), text);
    }
}
