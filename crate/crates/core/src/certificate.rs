//! Dual polynomial ensembles: evaluation, frequency localization and
//! verification of the interpolation / strict-bound certificate conditions.

use std::io::Write;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::sdp::{dual_coefficients, SensingOperator, DUAL_NORM_GRID};
use crate::signal::{circular_distance, SignalEnsemble, SparseSpectrum};
use crate::trig;

/// `Q(f) = <v, a(f)>` for coefficient vector `v = Phi^* q`.
pub fn eval_dual_poly(v: &[C64], f: f64) -> C64 {
    trig::eval(v, f)
}

/// Coefficient vectors `v_j = Phi_j^* q_j`, one per signal.
#[derive(Debug, Clone, PartialEq)]
pub struct DualPolynomialEnsemble {
    polys: Vec<Vec<C64>>,
    sum: Vec<C64>,
}

impl DualPolynomialEnsemble {
    pub fn new(polys: Vec<Vec<C64>>) -> Result<Self> {
        let Some(n) = polys.first().map(|v| v.len()) else {
            return Err(Error::InvalidArgument("empty dual polynomial ensemble".into()));
        };
        if polys.iter().any(|v| v.len() != n) {
            return Err(Error::DimensionMismatch("dual polynomials differ in length".into()));
        }
        let mut sum = vec![C64::new(0.0, 0.0); n];
        for v in &polys {
            for (s, c) in sum.iter_mut().zip(v) {
                *s += c;
            }
        }
        Ok(Self { polys, sum })
    }

    pub fn from_multipliers(q: &[Vec<C64>], sensing: &[SensingOperator]) -> Result<Self> {
        if q.len() != sensing.len() {
            return Err(Error::DimensionMismatch("one multiplier vector per signal".into()));
        }
        Self::new(dual_coefficients(q, sensing))
    }

    pub fn ensemble_size(&self) -> usize {
        self.polys.len()
    }

    pub fn dim(&self) -> usize {
        self.sum.len()
    }

    pub fn coefficients(&self) -> &[Vec<C64>] {
        &self.polys
    }

    pub fn eval(&self, j: usize, f: f64) -> C64 {
        trig::eval(&self.polys[j], f)
    }

    pub fn eval_sum(&self, f: f64) -> C64 {
        trig::eval(&self.sum, f)
    }

    /// Moduli `|Q_1|..|Q_J|` and `|sum_j Q_j|` on the uniform grid.
    pub fn grid_moduli(&self, grid: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
        let each = self
            .polys
            .iter()
            .map(|v| trig::eval_grid(v, grid).iter().map(|c| c.norm()).collect())
            .collect();
        let sum = trig::eval_grid(&self.sum, grid).iter().map(|c| c.norm()).collect();
        (each, sum)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub freq: f64,
    pub value: C64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Component {
    Common,
    /// Zero-based signal index.
    Innovation(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignResidual {
    pub component: Component,
    pub freq: f64,
    /// `c / |c|`.
    pub expected: C64,
    pub value: C64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignConditionReport {
    pub satisfied: bool,
    pub residuals: Vec<SignResidual>,
}

impl SignConditionReport {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().map(|r| r.residual).fold(0.0, f64::max)
    }
}

/// Largest moduli away from the support (outside the exclusion radius).
#[derive(Debug, Clone, PartialEq)]
pub struct OffSupport {
    pub per_signal: Vec<f64>,
    pub sum: f64,
}

impl OffSupport {
    pub fn max(&self) -> f64 {
        self.per_signal.iter().cloned().fold(self.sum, f64::max)
    }
}

/// Which certificate conditions hold against the ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionCheck {
    /// `Q_j(f_jk) = sign(c_jk)` within `tol_peak`.
    pub innovation_interpolation: bool,
    /// `sum_j Q_j(f_ck) = sign(c_ck)` within `tol_peak`.
    pub common_interpolation: bool,
    /// `|Q_j(f)| < 1` off `Omega_j`.
    pub innovation_bound: bool,
    /// `|sum_j Q_j(f)| < 1` off `Omega_c`.
    pub common_bound: bool,
    /// `1 - max off-support modulus`.
    pub margin: f64,
    pub signs: SignConditionReport,
}

impl ConditionCheck {
    pub fn all(&self) -> bool {
        self.innovation_interpolation && self.common_interpolation && self.innovation_bound && self.common_bound
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertificateReport {
    pub innovation_peaks: Vec<Vec<Peak>>,
    pub common_peaks: Vec<Peak>,
    pub max_offsupport: OffSupport,
    pub conditions: Option<ConditionCheck>,
}

impl CertificateReport {
    pub fn common_frequencies(&self) -> Vec<f64> {
        self.common_peaks.iter().map(|p| p.freq).collect()
    }

    pub fn innovation_frequencies(&self, j: usize) -> Vec<f64> {
        self.innovation_peaks[j].iter().map(|p| p.freq).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalizeOptions {
    pub tol_peak: f64,
    pub grid_size: usize,
    pub exclusion_radius: f64,
}

impl Default for LocalizeOptions {
    fn default() -> Self {
        Self { tol_peak: 1e-3, grid_size: DUAL_NORM_GRID, exclusion_radius: 1e-2 }
    }
}

/// Same count, and every true frequency has a found one within `tol`
/// (wrap-around distance).
pub fn frequencies_match(found: &[f64], truth: &[f64], tol: f64) -> bool {
    found.len() == truth.len() && truth.iter().all(|&t| found.iter().any(|&f| circular_distance(f, t) <= tol))
}

/// Frequencies where `|q(f)|` reaches `1 - tol_peak`, refined around grid maxima.
fn find_peaks<F: Fn(f64) -> C64>(q: F, grid_vals: &[f64], tol_peak: f64) -> Vec<Peak> {
    let grid = grid_vals.len();
    let mut peaks: Vec<Peak> = trig::local_maxima(grid_vals)
        .into_iter()
        .take_while(|&k| grid_vals[k] >= 1.0 - tol_peak - 1e-2)
        .filter_map(|k| {
            let (freq, modulus) = trig::refine_peak(|f| q(f).norm(), k, grid);
            (modulus >= 1.0 - tol_peak).then(|| Peak { freq, value: q(freq) })
        })
        .collect();
    peaks.sort_by(|a, b| a.freq.total_cmp(&b.freq));
    peaks.dedup_by(|a, b| circular_distance(a.freq, b.freq) < 1.0 / grid as f64);
    peaks
}

fn far_from(f: f64, support: &[f64], radius: f64) -> bool {
    support.iter().all(|&s| circular_distance(f, s) > radius)
}

fn max_outside(values: &[f64], support: &[f64], radius: f64) -> f64 {
    let grid = values.len();
    values
        .iter()
        .enumerate()
        .filter(|(k, _)| far_from(*k as f64 / grid as f64, support, radius))
        .map(|(_, &v)| v)
        .fold(0.0, f64::max)
}

/// Localizes common and innovation frequencies from the dual polynomials.
/// Off-support maxima are measured against the truth when given, otherwise
/// against the localized peaks.
pub fn localize(
    ens: &DualPolynomialEnsemble,
    truth: Option<&SignalEnsemble>,
    opts: &LocalizeOptions,
) -> Result<CertificateReport> {
    let n = ens.dim();
    if opts.grid_size < 4 * n {
        return Err(Error::InvalidArgument(format!("grid size {} below 4n = {}", opts.grid_size, 4 * n)));
    }
    if let Some(t) = truth {
        if t.ensemble_size() != ens.ensemble_size() || t.dim() != n {
            return Err(Error::DimensionMismatch("truth does not match dual ensemble".into()));
        }
    }
    let (each, sum) = ens.grid_moduli(opts.grid_size);
    let innovation_peaks: Vec<Vec<Peak>> = (0..ens.ensemble_size())
        .map(|j| find_peaks(|f| ens.eval(j, f), &each[j], opts.tol_peak))
        .collect();
    let common_peaks = find_peaks(|f| ens.eval_sum(f), &sum, opts.tol_peak);

    let common_support = match truth {
        Some(t) => t.common().frequencies(),
        None => common_peaks.iter().map(|p| p.freq).collect(),
    };
    let innovation_support = |j: usize| -> Vec<f64> {
        match truth {
            Some(t) => t.innovations()[j].frequencies(),
            None => innovation_peaks[j].iter().map(|p| p.freq).collect(),
        }
    };
    let max_offsupport = OffSupport {
        per_signal: (0..ens.ensemble_size())
            .map(|j| max_outside(&each[j], &innovation_support(j), opts.exclusion_radius))
            .collect(),
        sum: max_outside(&sum, &common_support, opts.exclusion_radius),
    };
    let conditions = truth.map(|t| {
        let signs = verify_sign_conditions(ens, t, opts.tol_peak);
        let ok = |c: fn(&Component) -> bool| {
            signs
                .residuals
                .iter()
                .filter(|r| c(&r.component))
                .all(|r| r.residual <= opts.tol_peak)
        };
        ConditionCheck {
            innovation_interpolation: ok(|c| matches!(c, Component::Innovation(_))),
            common_interpolation: ok(|c| matches!(c, Component::Common)),
            innovation_bound: max_offsupport.per_signal.iter().all(|&m| m < 1.0),
            common_bound: max_offsupport.sum < 1.0,
            margin: 1.0 - max_offsupport.max(),
            signs,
        }
    });
    Ok(CertificateReport { innovation_peaks, common_peaks, max_offsupport, conditions })
}

fn sign_residuals(spectrum: &SparseSpectrum, component: Component, q: impl Fn(f64) -> C64) -> Vec<SignResidual> {
    spectrum
        .lines()
        .iter()
        .filter(|l| l.coef.norm() > 0.0)
        .map(|l| {
            let expected = l.coef / l.coef.norm();
            let value = q(l.freq);
            SignResidual { component, freq: l.freq, expected, value, residual: (value - expected).norm() }
        })
        .collect()
}

/// Checks `Q_j(f_jk) = sign(c_jk)` and `sum_j Q_j(f_ck) = sign(c_ck)` at the
/// true frequencies. Lines with zero coefficient are skipped.
pub fn verify_sign_conditions(ens: &DualPolynomialEnsemble, truth: &SignalEnsemble, tol: f64) -> SignConditionReport {
    let mut residuals = sign_residuals(truth.common(), Component::Common, |f| ens.eval_sum(f));
    for (j, inn) in truth.innovations().iter().enumerate() {
        residuals.extend(sign_residuals(inn, Component::Innovation(j), |f| ens.eval(j, f)));
    }
    SignConditionReport { satisfied: residuals.iter().all(|r| r.residual <= tol), residuals }
}

/// Plot-ready CSV: `f, q1..qJ, sum, common_marker, innov_marker_1..J`.
/// Markers flag the grid point nearest to each true frequency.
pub fn write_dual_poly_csv<W: Write>(
    ens: &DualPolynomialEnsemble,
    truth: Option<&SignalEnsemble>,
    grid: usize,
    mut out: W,
) -> Result<()> {
    let jn = ens.ensemble_size();
    let (each, sum) = ens.grid_moduli(grid);
    let nearest = |f: f64| ((f * grid as f64).round() as usize) % grid;
    let mut common_mark = vec![0u8; grid];
    let mut innov_mark = vec![vec![0u8; grid]; jn];
    if let Some(t) = truth {
        for f in t.common().frequencies() {
            common_mark[nearest(f)] = 1;
        }
        for (j, inn) in t.innovations().iter().enumerate() {
            for f in inn.frequencies() {
                innov_mark[j][nearest(f)] = 1;
            }
        }
    }
    let mut header = String::from("f");
    for j in 1..=jn {
        header += &format!(",q{j}");
    }
    header += ",sum,common_marker";
    for j in 1..=jn {
        header += &format!(",innov_marker_{j}");
    }
    writeln!(out, "{header}")?;
    for k in 0..grid {
        let mut line = format!("{:.16e}", k as f64 / grid as f64);
        for e in &each {
            line += &format!(",{:.16e}", e[k]);
        }
        line += &format!(",{:.16e},{}", sum[k], common_mark[k]);
        for m in &innov_mark {
            line += &format!(",{}", m[k]);
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::{atom, Atom};

    #[test]
    fn normalized_atom_evaluates_to_one() {
        let n = 20;
        let v: Vec<C64> = atom(0.42, n).into_iter().map(|x| x / n as f64).collect();
        assert!((eval_dual_poly(&v, 0.42) - C64::new(1.0, 0.0)).norm() < 1e-13);
        let zero = vec![C64::new(0.0, 0.0); n];
        assert_eq!(eval_dual_poly(&zero, 0.7), C64::new(0.0, 0.0));
    }

    #[test]
    fn zero_polynomials_have_no_peaks() {
        let ens = DualPolynomialEnsemble::new(vec![vec![C64::new(0.0, 0.0); 8]; 3]).unwrap();
        let rep = localize(&ens, None, &LocalizeOptions { grid_size: 256, ..Default::default() }).unwrap();
        assert!(rep.common_peaks.is_empty());
        assert!(rep.innovation_peaks.iter().all(|p| p.is_empty()));
        assert_eq!(rep.max_offsupport.max(), 0.0);
    }

    #[test]
    fn analytic_single_atom_witness() {
        let n = 16;
        let (f, phase) = (0.3141, 2.0);
        let x = Atom::new(f, phase, n).unwrap().synthesize();
        let q: Vec<C64> = x.iter().map(|v| v / n as f64).collect();
        let ens = DualPolynomialEnsemble::from_multipliers(&[q], &[SensingOperator::identity(n)]).unwrap();
        let truth = SignalEnsemble::new(
            SparseSpectrum::from_pairs(n, &[(f, C64::from_polar(1.7, phase))]).unwrap(),
            vec![SparseSpectrum::empty(n)],
        )
        .unwrap();
        let rep = verify_sign_conditions(&ens, &truth, 1e-8);
        assert!(rep.satisfied);
        assert!(rep.max_residual() <= 1e-8);

        let loc = localize(&ens, Some(&truth), &LocalizeOptions::default()).unwrap();
        assert_eq!(loc.common_peaks.len(), 1);
        assert!((loc.common_peaks[0].freq - f).abs() < 1e-8);
        assert!(loc.max_offsupport.sum < 1.0);
    }

    #[test]
    fn zero_coefficient_is_excluded() {
        let n = 8;
        let ens = DualPolynomialEnsemble::new(vec![vec![C64::new(0.0, 0.0); n]]).unwrap();
        let truth = SignalEnsemble::new(
            SparseSpectrum::from_pairs(n, &[(0.2, C64::new(0.0, 0.0))]).unwrap(),
            vec![SparseSpectrum::empty(n)],
        )
        .unwrap();
        let rep = verify_sign_conditions(&ens, &truth, 1e-8);
        assert!(rep.residuals.is_empty() && rep.satisfied);
    }

    #[test]
    fn csv_has_one_row_per_grid_point() {
        let ens = DualPolynomialEnsemble::new(vec![vec![C64::new(0.1, 0.0); 4]; 2]).unwrap();
        let mut buf = Vec::new();
        write_dual_poly_csv(&ens, None, 32, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 33);
        assert_eq!(lines[0], "f,q1,q2,sum,common_marker,innov_marker_1,innov_marker_2");
    }
}
