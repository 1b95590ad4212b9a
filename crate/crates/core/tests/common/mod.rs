//! Property checks shared by the `properties` and `acceptance` targets.
#![allow(dead_code)]

use std::f64::consts::TAU;

use faer::Mat;
use proptest::collection::vec;
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use canorm::admm::psd_project;
use canorm::linalg::{frobenius, min_eigenvalue};
use canorm::signal::{atom, circular_distance, min_separation, random_instance, Atom, InstanceConfig};
use canorm::toeplitz::{toeplitz_adjoint, ToeplitzGenerator};
use canorm::C64;

pub const CASES: u32 = 1000;

pub fn complex(scale: f64) -> impl Strategy<Value = C64> {
    (-scale..scale, -scale..scale).prop_map(|(re, im)| C64::new(re, im))
}

fn hermitian(n: usize, entries: &[C64]) -> Mat<C64> {
    Mat::from_fn(n, n, |i, j| (entries[i * n + j] + entries[j * n + i].conj()) * 0.5)
}

/// `(u, X)` with `u` a generator and `X` Hermitian, same order.
pub fn toeplitz_case() -> impl Strategy<Value = (Vec<C64>, Mat<C64>)> {
    (1usize..=12).prop_flat_map(|n| {
        (vec(complex(10.0), n), vec(complex(10.0), n * n)).prop_map(move |(u, x)| (u, hermitian(n, &x)))
    })
}

/// `Re <Toep(u), X>_F` computed entrywise equals the generator pairing
/// with the adjoint image of `X`.
pub fn check_toeplitz_adjoint((u, x): (Vec<C64>, Mat<C64>)) -> Result<(), TestCaseError> {
    let g = ToeplitzGenerator::from_hermitian_part(u);
    let t = g.to_matrix();
    let n = t.nrows();
    let mut lhs = 0.0;
    for i in 0..n {
        for j in 0..n {
            lhs += (t[(i, j)].conj() * x[(i, j)]).re;
        }
    }
    let rhs = g.pairing(toeplitz_adjoint(&x).as_slice());
    prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + lhs.abs()), "lhs {lhs} rhs {rhs}");
    Ok(())
}

/// A Hermitian matrix and a seed for the comparison candidates.
pub fn projection_case() -> impl Strategy<Value = (Mat<C64>, u64)> {
    (1usize..=6, 0.1f64..10.0).prop_flat_map(|(n, scale)| {
        (vec(complex(scale), n * n), any::<u64>()).prop_map(move |(x, seed)| (hermitian(n, &x), seed))
    })
}

fn random_psd(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Mat<C64> {
    let rank = rng.random_range(0..=n);
    let g = Mat::from_fn(n, rank, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * scale);
    &g * g.adjoint()
}

/// The projection is PSD and no closer PSD matrix exists among 100
/// candidates: half drawn at the input's scale, half perturbing the
/// projection itself.
pub fn check_psd_projection((m, seed): (Mat<C64>, u64)) -> Result<(), TestCaseError> {
    let n = m.nrows();
    let p = psd_project(&m).map_err(|e| TestCaseError::fail(e.to_string()))?;
    let scale = frobenius(&m).max(1e-12);
    let min_eig = min_eigenvalue(&p).map_err(|e| TestCaseError::fail(e.to_string()))?;
    prop_assert!(min_eig >= -1e-10 * scale, "projection has eigenvalue {min_eig}");
    let best = frobenius(&(&m - &p));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for k in 0..100 {
        let b = if k % 2 == 0 {
            random_psd(&mut rng, n, scale.sqrt())
        } else {
            let eps = 10f64.powf(rng.random_range(-6.0..0.0));
            &p + random_psd(&mut rng, n, (eps * scale).sqrt())
        };
        let d = frobenius(&(&m - &b));
        prop_assert!(best <= d + 1e-10 * scale, "candidate {k} closer: {d} < {best}");
    }
    Ok(())
}

pub fn atom_case() -> impl Strategy<Value = (f64, f64, usize)> {
    (0.0f64..1.0, 0.0f64..TAU, 1usize..=256)
}

pub fn check_atom_modulus((f, phi, n): (f64, f64, usize)) -> Result<(), TestCaseError> {
    let a = Atom::new(f, phi, n).map_err(|e| TestCaseError::fail(e.to_string()))?;
    for (t, v) in a.synthesize().iter().chain(&atom(f, n)).enumerate() {
        prop_assert!((v.norm() - 1.0).abs() <= 1e-12, "entry {t} has modulus {}", v.norm());
    }
    Ok(())
}

pub fn instance_case() -> impl Strategy<Value = InstanceConfig> {
    (16usize..=64, 1usize..=4, 0usize..=4, 0usize..=2, any::<u64>())
        .prop_map(|(n, j, s_c, s_j, seed)| InstanceConfig::new(n, j, s_c, s_j, seed))
}

/// Every `Omega_c ∪ Omega_j` is separated by at least `1/n`, supports have
/// the configured sizes and every magnitude is at least 0.5.
pub fn check_instance(cfg: InstanceConfig) -> Result<(), TestCaseError> {
    let inst = random_instance(&cfg).map_err(|e| TestCaseError::fail(e.to_string()))?;
    let sep = 1.0 / cfg.n as f64;
    prop_assert_eq!(inst.common().len(), cfg.s_c);
    prop_assert_eq!(inst.innovations().len(), cfg.ensemble_size);
    for inn in inst.innovations() {
        prop_assert_eq!(inn.len(), cfg.s_j);
        let mut all = inst.common().frequencies();
        all.extend(inn.frequencies());
        prop_assert!(min_separation(&all) >= sep - 1e-12, "separation {} < {sep}", min_separation(&all));
        for l in inst.common().lines().iter().chain(inn.lines()) {
            prop_assert!((0.0..1.0).contains(&l.freq));
            prop_assert!(l.coef.norm() >= 0.5 - 1e-12, "magnitude {}", l.coef.norm());
        }
    }
    Ok(())
}

/// A random line spectrum with separation at least `1/n` and `r <= n/2`
/// lines, drawn one frequency at a time.
pub fn separated_spectrum(rng: &mut ChaCha8Rng, n: usize) -> (Vec<f64>, Vec<f64>) {
    let sep = 1.0 / n as f64;
    let r = rng.random_range(1..=n / 2);
    loop {
        let mut freqs: Vec<f64> = Vec::with_capacity(r);
        for _ in 0..50 * r {
            if freqs.len() == r {
                break;
            }
            let f: f64 = rng.random();
            if freqs.iter().all(|&g| circular_distance(f, g) >= sep) {
                freqs.push(f);
            }
        }
        if freqs.len() == r {
            freqs.sort_by(f64::total_cmp);
            let weights = (0..r).map(|_| rng.random_range(0.5..2.0)).collect();
            return (freqs, weights);
        }
    }
}
