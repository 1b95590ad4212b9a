//! Trigonometric polynomials `Q(f) = <v, a(f)> = sum_t v[t] exp(-i 2 pi f t)`.

use std::f64::consts::TAU;

use num_complex::Complex64 as C64;
use rustfft::FftPlanner;

/// Golden-section stopping width in frequency.
pub const REFINE_TOL: f64 = 1e-10;

pub fn eval(v: &[C64], f: f64) -> C64 {
    // Horner in z = exp(-i 2 pi f)
    let z = C64::from_polar(1.0, -TAU * f);
    v.iter().rev().fold(C64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

/// Values at `f = k / grid` for `k = 0..grid` by a zero-padded FFT.
/// Requires `grid >= v.len()`.
pub fn eval_grid(v: &[C64], grid: usize) -> Vec<C64> {
    assert!(grid >= v.len(), "grid {} shorter than polynomial {}", grid, v.len());
    let mut buf = vec![C64::new(0.0, 0.0); grid];
    buf[..v.len()].copy_from_slice(v);
    FftPlanner::new().plan_fft_forward(grid).process(&mut buf);
    buf
}

/// Upper bound on `|d/df Q(f)|`.
pub fn lipschitz_bound(v: &[C64]) -> f64 {
    TAU * v.iter().enumerate().map(|(t, c)| t as f64 * c.norm()).sum::<f64>()
}

/// Maximizes `h` on `[lo, hi]` by golden-section search; returns `(f, h(f))`.
pub fn golden_max<F: Fn(f64) -> f64>(h: F, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - inv_phi * (hi - lo);
    let mut b = lo + inv_phi * (hi - lo);
    let mut ha = h(a);
    let mut hb = h(b);
    while hi - lo > tol {
        if ha >= hb {
            hi = b;
            b = a;
            hb = ha;
            a = hi - inv_phi * (hi - lo);
            ha = h(a);
        } else {
            lo = a;
            a = b;
            ha = hb;
            b = lo + inv_phi * (hi - lo);
            hb = h(b);
        }
    }
    let mid = 0.5 * (lo + hi);
    let hm = h(mid);
    [(a, ha), (b, hb), (mid, hm)]
        .into_iter()
        .fold((mid, hm), |best, cand| if cand.1 > best.1 { cand } else { best })
}

/// Indices of local maxima of a periodic sequence, strongest first.
pub fn local_maxima(values: &[f64]) -> Vec<usize> {
    let g = values.len();
    let mut idx: Vec<usize> = (0..g)
        .filter(|&k| {
            let prev = values[(k + g - 1) % g];
            let next = values[(k + 1) % g];
            values[k] >= prev && values[k] > next
        })
        .collect();
    idx.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    idx
}

/// Refines grid maximum `k` of `h` within one grid cell on either side and
/// maps the maximizer back to `[0, 1)`.
pub fn refine_peak<F: Fn(f64) -> f64>(h: F, k: usize, grid: usize) -> (f64, f64) {
    let step = 1.0 / grid as f64;
    let center = k as f64 * step;
    let (f, v) = golden_max(&h, center - step, center + step, REFINE_TOL);
    (f.rem_euclid(1.0), v)
}
