//! Atoms, sparse spectra and the common/innovation ensemble model.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Maximum number of resamples spent on one instance before giving up.
pub const SAMPLING_BUDGET: usize = 10_000;

/// A complex sinusoid `[a(f, phi)]_t = exp(i (2 pi f t + phi))`, `t = 0..n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    freq: f64,
    phase: f64,
    n: usize,
}

impl Atom {
    pub fn new(freq: f64, phase: f64, n: usize) -> Result<Self> {
        if !(0.0..=1.0).contains(&freq) {
            return Err(Error::InvalidArgument(format!("frequency {freq} outside [0, 1]")));
        }
        if !(0.0..TAU).contains(&phase) {
            return Err(Error::InvalidArgument(format!("phase {phase} outside [0, 2pi)")));
        }
        if n == 0 {
            return Err(Error::InvalidArgument("atom dimension must be positive".into()));
        }
        Ok(Self { freq, phase, n })
    }

    pub fn freq(&self) -> f64 {
        self.freq
    }

    pub fn phase(&self) -> f64 {
        self.phase
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn synthesize(&self) -> Vec<C64> {
        (0..self.n)
            .map(|t| C64::from_polar(1.0, TAU * self.freq * t as f64 + self.phase))
            .collect()
    }
}

/// Zero-phase atom `a(f)` of length `n`.
pub fn atom(freq: f64, n: usize) -> Vec<C64> {
    (0..n)
        .map(|t| C64::from_polar(1.0, TAU * freq * t as f64))
        .collect()
}

/// Wrap-around distance between two frequencies on the unit torus.
pub fn circular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(1.0);
    d.min(1.0 - d)
}

/// Smallest pairwise wrap-around distance; infinite for fewer than two points.
pub fn min_separation(freqs: &[f64]) -> f64 {
    let mut best = f64::INFINITY;
    for (i, &a) in freqs.iter().enumerate() {
        for &b in &freqs[i + 1..] {
            best = best.min(circular_distance(a, b));
        }
    }
    best
}

/// One `(frequency, complex coefficient)` pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralLine {
    pub freq: f64,
    pub coef: C64,
}

/// A frequency-sparse component: `sum_k c_k a(f_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSpectrum {
    n: usize,
    lines: Vec<SpectralLine>,
}

impl SparseSpectrum {
    pub fn new(n: usize, lines: Vec<SpectralLine>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("spectrum dimension must be positive".into()));
        }
        for l in &lines {
            if !(0.0..=1.0).contains(&l.freq) || !l.coef.re.is_finite() || !l.coef.im.is_finite() {
                return Err(Error::InvalidArgument(format!("bad spectral line {l:?}")));
            }
        }
        for (i, a) in lines.iter().enumerate() {
            if lines[i + 1..].iter().any(|b| b.freq == a.freq) {
                return Err(Error::InvalidArgument(format!("duplicate frequency {}", a.freq)));
            }
        }
        Ok(Self { n, lines })
    }

    pub fn empty(n: usize) -> Self {
        Self { n, lines: Vec::new() }
    }

    pub fn from_pairs(n: usize, pairs: &[(f64, C64)]) -> Result<Self> {
        Self::new(
            n,
            pairs
                .iter()
                .map(|&(freq, coef)| SpectralLine { freq, coef })
                .collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn lines(&self) -> &[SpectralLine] {
        &self.lines
    }

    pub fn len(&self) -> usize {
        self.lines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }

    pub fn frequencies(&self) -> Vec<f64> {
        self.lines.iter().map(|l| l.freq).collect()
    }

    /// Total coefficient magnitude, the cost of this atomic decomposition.
    pub fn cost(&self) -> f64 {
        self.lines.iter().map(|l| l.coef.norm()).sum()
    }

    pub fn synthesize(&self) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.n];
        for l in &self.lines {
            for (t, o) in out.iter_mut().enumerate() {
                *o += l.coef * C64::from_polar(1.0, TAU * l.freq * t as f64);
            }
        }
        out
    }

    /// Toeplitz generator `sum_k |c_k| a(f_k)` of this decomposition.
    pub fn magnitude_generator(&self) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.n];
        for l in &self.lines {
            let w = l.coef.norm();
            for (t, o) in out.iter_mut().enumerate() {
                *o += w * C64::from_polar(1.0, TAU * l.freq * t as f64);
            }
        }
        out
    }
}

/// Ensemble `x_j = z_c + z_j`, `j = 1..J`.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalEnsemble {
    common: SparseSpectrum,
    innovations: Vec<SparseSpectrum>,
}

impl SignalEnsemble {
    pub fn new(common: SparseSpectrum, innovations: Vec<SparseSpectrum>) -> Result<Self> {
        if innovations.is_empty() {
            return Err(Error::InvalidArgument("ensemble needs at least one signal".into()));
        }
        if innovations.iter().any(|s| s.dim() != common.dim()) {
            return Err(Error::DimensionMismatch("all spectra must share n".into()));
        }
        Ok(Self { common, innovations })
    }

    pub fn dim(&self) -> usize {
        self.common.dim()
    }

    pub fn ensemble_size(&self) -> usize {
        self.innovations.len()
    }

    pub fn common(&self) -> &SparseSpectrum {
        &self.common
    }

    pub fn innovations(&self) -> &[SparseSpectrum] {
        &self.innovations
    }

    pub fn synthesize(&self) -> Vec<Vec<C64>> {
        let zc = self.common.synthesize();
        self.innovations
            .iter()
            .map(|s| {
                s.synthesize()
                    .iter()
                    .zip(&zc)
                    .map(|(a, b)| a + b)
                    .collect()
            })
            .collect()
    }

    /// Cost of the ground-truth decomposition, `sum |c_c| + sum_j sum |c_j|`.
    pub fn decomposition_cost(&self) -> f64 {
        self.common.cost() + self.innovations.iter().map(|s| s.cost()).sum::<f64>()
    }

    /// Number of atoms in the ground truth (an upper bound on the l0-type norm).
    pub fn atom_count(&self) -> usize {
        self.common.len() + self.innovations.iter().map(|s| s.len()).sum::<usize>()
    }
}

/// Distribution of coefficient magnitudes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case", tag = "law")]
pub enum MagnitudeLaw {
    /// `offset + w^2`, `w` standard normal.
    #[default]
    ShiftedChiSquare,
    /// All magnitudes equal to one.
    Unit,
}

impl MagnitudeLaw {
    fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match self {
            MagnitudeLaw::ShiftedChiSquare => {
                let w: f64 = rng.sample(StandardNormal);
                0.5 + w * w
            }
            MagnitudeLaw::Unit => 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceConfig {
    pub n: usize,
    #[serde(rename = "J")]
    pub ensemble_size: usize,
    pub s_c: usize,
    pub s_j: usize,
    /// Minimum wrap-around separation; `1/n` when absent.
    #[serde(default)]
    pub min_sep: Option<f64>,
    #[serde(default)]
    pub magnitude_law: MagnitudeLaw,
    #[serde(default)]
    pub seed: u64,
}

impl InstanceConfig {
    pub fn new(n: usize, ensemble_size: usize, s_c: usize, s_j: usize, seed: u64) -> Self {
        Self {
            n,
            ensemble_size,
            s_c,
            s_j,
            min_sep: None,
            magnitude_law: MagnitudeLaw::default(),
            seed,
        }
    }

    pub fn separation(&self) -> f64 {
        self.min_sep.unwrap_or(1.0 / self.n as f64)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.ensemble_size == 0 {
            return Err(Error::Config("n and J must be positive".into()));
        }
        let sep = self.separation();
        if !(sep >= 0.0) {
            return Err(Error::Config(format!("min_sep {sep} must be nonnegative")));
        }
        if sep * (self.s_c + self.s_j + 1) as f64 >= 1.0 {
            return Err(Error::SamplingBudgetExhausted { attempts: 0, min_sep: sep });
        }
        Ok(())
    }
}

/// Draws frequencies for one component, each at least `sep` away from
/// `existing` and from each other. Returns `None` when the draw is rejected.
fn draw_frequencies<R: Rng>(rng: &mut R, count: usize, sep: f64, existing: &[f64]) -> Option<Vec<f64>> {
    let freqs: Vec<f64> = (0..count).map(|_| rng.random::<f64>()).collect();
    for (i, &f) in freqs.iter().enumerate() {
        if existing.iter().chain(&freqs[..i]).any(|&g| circular_distance(f, g) < sep) {
            return None;
        }
    }
    Some(freqs)
}

fn draw_coefficients<R: Rng>(rng: &mut R, freqs: &[f64], law: MagnitudeLaw, n: usize) -> Result<SparseSpectrum> {
    let lines = freqs
        .iter()
        .map(|&freq| {
            let mag = law.sample(rng);
            let phase = rng.random::<f64>() * 2.0 * PI;
            SpectralLine { freq, coef: C64::from_polar(mag, phase) }
        })
        .collect();
    SparseSpectrum::new(n, lines)
}

/// Random ensemble: uniform frequencies under the wrap-around separation
/// constraint on every `Omega_c ∪ Omega_j`, uniform phases, magnitudes from
/// `cfg.magnitude_law`. The common set is drawn first, then each innovation
/// set conditioned on it; every rejected draw counts against
/// [`SAMPLING_BUDGET`].
pub fn random_instance(cfg: &InstanceConfig) -> Result<SignalEnsemble> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let sep = cfg.separation();
    let mut attempts = 0usize;
    let mut draw = |rng: &mut ChaCha8Rng, count: usize, existing: &[f64]| -> Result<Vec<f64>> {
        loop {
            if let Some(f) = draw_frequencies(rng, count, sep, existing) {
                return Ok(f);
            }
            attempts += 1;
            if attempts >= SAMPLING_BUDGET {
                return Err(Error::SamplingBudgetExhausted { attempts, min_sep: sep });
            }
        }
    };
    let common_freqs = draw(&mut rng, cfg.s_c, &[])?;
    let mut innovation_freqs = Vec::with_capacity(cfg.ensemble_size);
    for _ in 0..cfg.ensemble_size {
        innovation_freqs.push(draw(&mut rng, cfg.s_j, &common_freqs)?);
    }
    let common = draw_coefficients(&mut rng, &common_freqs, cfg.magnitude_law, cfg.n)?;
    let innovations = innovation_freqs
        .iter()
        .map(|f| draw_coefficients(&mut rng, f, cfg.magnitude_law, cfg.n))
        .collect::<Result<Vec<_>>>()?;
    SignalEnsemble::new(common, innovations)
}
