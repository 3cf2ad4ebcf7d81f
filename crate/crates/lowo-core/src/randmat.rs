//! Random {−1, 0, 1} matrices: counter-based sampling, exact singularity
//! testing, extreme singular values, and Monte-Carlo estimators.
//!
//! Entries are lazy signed: `P(0) = 1−μ`, `P(±1) = μ/2`. Sampling is
//! counter-based — the word for entry `e` of trial `t` is a pure function
//! of `(seed, t, e)` — so results are reproducible bit-for-bit regardless
//! of thread count or evaluation order, and trials parallelize trivially.

use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact_linalg::{self, Matrix};
use crate::{Int, Rat};

/// Iteration cap for the singular-value iterations.
const SV_MAX_ITERS: usize = 200;
/// Relative tolerance for singular-value convergence.
const SV_TOL: f64 = 1e-12;
/// Largest `n` for which Bareiss elimination over `i128` cannot overflow
/// on {−1, 0, 1} entries: its intermediate products are pairs of
/// `(n−1)`-minors, bounded via Hadamard by `(n−1)^(n−1) < 2^127` up to 27.
const I128_DET_MAX: usize = 27;
/// Two-sided 95% normal quantile used by the Wilson interval.
pub const WILSON_Z: f64 = 1.959963984540054;

/// One step of the splitmix64 stream seeded at `x` (Steele–Lea–Flood
/// constants). Used as the mixing primitive for all counter-based
/// randomness in this crate.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Odd stride separating trials in the counter space.
const TRIAL_STRIDE: u64 = 0x9E37_79B9_7F4A_7C15;
/// Odd stride separating entries within a trial.
const ENTRY_STRIDE: u64 = 0xBF58_476D_1CE4_E5B9;

/// The random word for entry `index` of trial `trial`: two dependent
/// splitmix64 steps over a strided counter.
pub fn entry_word(seed: u64, trial: u64, index: u64) -> u64 {
    splitmix64(
        splitmix64(seed.wrapping_add(TRIAL_STRIDE.wrapping_mul(trial)))
            .wrapping_add(ENTRY_STRIDE.wrapping_mul(index)),
    )
}

/// Threshold sampler for lazy signed entries. For `μ = p/q` the word range
/// `[0, 2⁶⁴)` is split at `T0 = ⌊(q−p)·2⁶⁴/q⌋` and `T1 = T0 + ⌊p·2⁶³/q⌋`:
/// words below `T0` map to 0, below `T1` to +1, the rest to −1. The floor
/// divisions bias each probability by less than `2⁻⁶³`.
#[derive(Debug, Clone, Copy)]
pub struct EntrySampler {
    t0: u128,
    t1: u128,
}

impl EntrySampler {
    pub fn from_mu(mu: &Rat) -> Result<EntrySampler> {
        if !mu.is_positive() || mu > &Rat::one() {
            return Err(Error::domain("mu must satisfy 0 < mu <= 1"));
        }
        let p = mu
            .numer()
            .to_u64()
            .ok_or_else(|| Error::domain("mu numerator exceeds u64"))? as u128;
        let q = mu
            .denom()
            .to_u64()
            .ok_or_else(|| Error::domain("mu denominator exceeds u64"))? as u128;
        let t0 = ((q - p) << 64) / q;
        let t1 = t0 + ((p << 63) / q);
        Ok(EntrySampler { t0, t1 })
    }

    pub fn sample(&self, word: u64) -> i8 {
        let w = word as u128;
        if w < self.t0 {
            0
        } else if w < self.t1 {
            1
        } else {
            -1
        }
    }
}

/// Check a conditioning pattern: at most `n` rows, each of length `n` with
/// entries in {−1, 0, 1}.
fn validate_fixed(n: usize, fixed: &[Vec<i8>]) -> Result<()> {
    if fixed.len() > n {
        return Err(Error::domain("more fixed rows than matrix rows"));
    }
    for row in fixed {
        if row.len() != n {
            return Err(Error::domain("fixed row length must equal n"));
        }
        if row.iter().any(|&e| !(-1..=1).contains(&e)) {
            return Err(Error::domain("fixed row entries must lie in {-1,0,1}"));
        }
    }
    Ok(())
}

/// Sample the matrix of one trial: the first `n − fixed.len()` rows are
/// random, the fixed conditioning rows are appended last.
pub fn sample_matrix(
    n: usize,
    sampler: &EntrySampler,
    seed: u64,
    trial: u64,
    fixed: &[Vec<i8>],
) -> Vec<Vec<i8>> {
    let random_rows = n - fixed.len();
    let mut rows: Vec<Vec<i8>> = Vec::with_capacity(n);
    for i in 0..random_rows {
        rows.push(
            (0..n)
                .map(|j| sampler.sample(entry_word(seed, trial, (i * n + j) as u64)))
                .collect(),
        );
    }
    rows.extend(fixed.iter().cloned());
    rows
}

/// Exact singularity test: Bareiss over `i128` while overflow-safe,
/// arbitrary precision beyond. Requires a square matrix.
pub fn is_singular_exact(entries: &[Vec<i8>]) -> bool {
    let n = entries.len();
    if n == 0 {
        return false; // empty determinant is 1
    }
    if n <= I128_DET_MAX {
        let rows: Vec<Vec<i128>> = entries
            .iter()
            .map(|r| r.iter().map(|&e| e as i128).collect())
            .collect();
        let m = Matrix::from_nested(&rows).expect("square matrix");
        exact_linalg::det_exact(&m).expect("square matrix") == 0
    } else {
        let rows: Vec<Vec<Int>> = entries
            .iter()
            .map(|r| r.iter().map(|&e| Int::from(e)).collect())
            .collect();
        let m = Matrix::from_nested(&rows).expect("square matrix");
        exact_linalg::det_exact(&m).expect("square matrix").is_zero()
    }
}

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn matvec(entries: &[Vec<i8>], x: &[f64]) -> Vec<f64> {
    entries
        .iter()
        .map(|row| row.iter().zip(x).map(|(&e, xi)| e as f64 * xi).sum())
        .collect()
}

fn matvec_t(entries: &[Vec<i8>], x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut y = vec![0.0; entries.first().map_or(0, |r| r.len())];
    for i in 0..n {
        for (j, yj) in y.iter_mut().enumerate() {
            *yj += entries[i][j] as f64 * x[i];
        }
    }
    y
}

/// Packed LU factorization with partial pivoting; `piv[i]` is the original
/// row stored at factored row `i`.
struct Lu {
    n: usize,
    f: Vec<f64>,
    piv: Vec<usize>,
}

fn lu_factor(entries: &[Vec<i8>]) -> Option<Lu> {
    let n = entries.len();
    let mut f: Vec<f64> = entries
        .iter()
        .flat_map(|r| r.iter().map(|&e| e as f64))
        .collect();
    let mut piv: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let mut best = k;
        let mut best_abs = f[k * n + k].abs();
        for i in k + 1..n {
            let a = f[i * n + k].abs();
            if a > best_abs {
                best = i;
                best_abs = a;
            }
        }
        if best_abs < 1e-300 {
            return None; // numerically singular
        }
        if best != k {
            for j in 0..n {
                f.swap(k * n + j, best * n + j);
            }
            piv.swap(k, best);
        }
        let pivot = f[k * n + k];
        for i in k + 1..n {
            let l = f[i * n + k] / pivot;
            f[i * n + k] = l;
            for j in k + 1..n {
                f[i * n + j] -= l * f[k * n + j];
            }
        }
    }
    Some(Lu { n, f, piv })
}

impl Lu {
    /// Solve `A x = b`.
    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let f = &self.f;
        let mut y: Vec<f64> = (0..n).map(|i| b[self.piv[i]]).collect();
        for i in 0..n {
            for j in 0..i {
                y[i] -= f[i * n + j] * y[j];
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                y[i] -= f[i * n + j] * y[j];
            }
            y[i] /= f[i * n + i];
        }
        y
    }

    /// Solve `Aᵀ x = b` with the same factorization (transposed triangular
    /// sweeps, permutation applied on the way out).
    fn solve_transpose(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let f = &self.f;
        let mut u = b.to_vec();
        for i in 0..n {
            for j in 0..i {
                u[i] -= f[j * n + i] * u[j];
            }
            u[i] /= f[i * n + i];
        }
        let mut w = u;
        for i in (0..n).rev() {
            for j in i + 1..n {
                w[i] -= f[j * n + i] * w[j];
            }
        }
        let mut x = vec![0.0; n];
        for i in 0..n {
            x[self.piv[i]] = w[i];
        }
        x
    }
}

fn start_vector(n: usize) -> Vec<f64> {
    let mut x: Vec<f64> = (0..n).map(|i| 1.0 + i as f64 / (n as f64 + 1.0)).collect();
    let norm = l2(&x);
    for v in &mut x {
        *v /= norm;
    }
    x
}

/// Smallest singular value. Exactly singular matrices short-circuit to 0;
/// otherwise inverse iteration on `AᵀA` (one LU of `A`, then an `Aᵀ` solve
/// and an `A` solve per step) converges to the bottom singular direction
/// and the returned value is the Rayleigh estimate `‖A x‖` on it, an upper
/// bound on σ_min that tightens as the iteration converges.
pub fn smallest_singular_value(entries: &[Vec<i8>]) -> f64 {
    let n = entries.len();
    if n == 0 {
        return 0.0;
    }
    if is_singular_exact(entries) {
        return 0.0;
    }
    let Some(lu) = lu_factor(entries) else {
        return 0.0;
    };
    let mut x = start_vector(n);
    let mut sigma = f64::INFINITY;
    for _ in 0..SV_MAX_ITERS {
        let z = lu.solve_transpose(&x);
        let y = lu.solve(&z);
        let norm = l2(&y);
        if !norm.is_finite() || norm == 0.0 {
            return 0.0;
        }
        let estimate = 1.0 / norm.sqrt();
        for (xi, yi) in x.iter_mut().zip(&y) {
            *xi = yi / norm;
        }
        if (estimate - sigma).abs() <= SV_TOL * estimate {
            break;
        }
        sigma = estimate;
    }
    l2(&matvec(entries, &x))
}

/// Largest singular value via power iteration on `AᵀA`.
pub fn largest_singular_value(entries: &[Vec<i8>]) -> f64 {
    let n = entries.len();
    if n == 0 {
        return 0.0;
    }
    let mut x = start_vector(n);
    if l2(&matvec_t(entries, &matvec(entries, &x))) == 0.0 {
        // The start vector lies in the kernel; restart from a basis vector
        // outside it, if any.
        let mut found = false;
        for j in 0..n {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            if l2(&matvec(entries, &e)) > 0.0 {
                x = e;
                found = true;
                break;
            }
        }
        if !found {
            return 0.0; // zero matrix
        }
    }
    let mut sigma = 0.0f64;
    for _ in 0..SV_MAX_ITERS {
        let y = matvec_t(entries, &matvec(entries, &x));
        let norm = l2(&y);
        if norm == 0.0 {
            break;
        }
        let estimate = norm.sqrt();
        for (xi, yi) in x.iter_mut().zip(&y) {
            *xi = yi / norm;
        }
        if (estimate - sigma).abs() <= SV_TOL * estimate.max(f64::MIN_POSITIVE) {
            break;
        }
        sigma = estimate;
    }
    l2(&matvec(entries, &x))
}

/// Spectral condition number; infinite for exactly singular matrices.
pub fn condition_number(entries: &[Vec<i8>]) -> f64 {
    if entries.is_empty() {
        return 1.0;
    }
    if is_singular_exact(entries) {
        return f64::INFINITY;
    }
    let smallest = smallest_singular_value(entries);
    if smallest == 0.0 {
        return f64::INFINITY;
    }
    largest_singular_value(entries) / smallest
}

/// Monte-Carlo estimate with a 95% Wilson score interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub trials: u64,
    pub successes: u64,
    pub p_hat: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
}

/// 95% Wilson score interval for `successes` out of `trials`.
pub fn wilson_interval(successes: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let z = WILSON_Z;
    let n = trials as f64;
    let ph = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (ph + z2 / (2.0 * n)) / denom;
    let half = z * (ph * (1.0 - ph) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

fn estimate_from(successes: u64, trials: u64) -> McEstimate {
    let (wilson_low, wilson_high) = wilson_interval(successes, trials);
    McEstimate {
        trials,
        successes,
        p_hat: if trials == 0 {
            0.0
        } else {
            successes as f64 / trials as f64
        },
        wilson_low,
        wilson_high,
    }
}

/// Estimate the singularity probability of `n×n` lazy signed matrices
/// (optionally conditioned on fixed rows, appended last in every trial).
pub fn mc_singularity(
    n: usize,
    mu: &Rat,
    trials: u64,
    seed: u64,
    fixed: &[Vec<i8>],
) -> Result<McEstimate> {
    if n == 0 {
        return Err(Error::domain("matrix dimension must be >= 1"));
    }
    if trials == 0 {
        return Err(Error::domain("at least one trial is required"));
    }
    validate_fixed(n, fixed)?;
    let sampler = EntrySampler::from_mu(mu)?;
    let successes = (0..trials)
        .into_par_iter()
        .filter(|&t| is_singular_exact(&sample_matrix(n, &sampler, seed, t, fixed)))
        .count() as u64;
    Ok(estimate_from(successes, trials))
}

/// Estimate `P(σ_min ≤ bound)` for `n×n` lazy signed matrices. Exactly
/// singular samples always count as successes (σ_min = 0).
pub fn mc_sigma_tail(
    n: usize,
    mu: &Rat,
    trials: u64,
    seed: u64,
    bound: f64,
    fixed: &[Vec<i8>],
) -> Result<McEstimate> {
    if n == 0 {
        return Err(Error::domain("matrix dimension must be >= 1"));
    }
    if trials == 0 {
        return Err(Error::domain("at least one trial is required"));
    }
    if !(bound >= 0.0) {
        return Err(Error::domain("tail bound must be non-negative"));
    }
    validate_fixed(n, fixed)?;
    let sampler = EntrySampler::from_mu(mu)?;
    let successes = (0..trials)
        .into_par_iter()
        .filter(|&t| smallest_singular_value(&sample_matrix(n, &sampler, seed, t, fixed)) <= bound)
        .count() as u64;
    Ok(estimate_from(successes, trials))
}

/// Exact singularity probability by weighted enumeration of all `3^(n²)`
/// matrices; supports `n ≤ 3`.
pub fn brute_force_singularity(n: usize, mu: &Rat) -> Result<Rat> {
    if !(1..=3).contains(&n) {
        return Err(Error::domain("exact enumeration supports 1 <= n <= 3"));
    }
    if !mu.is_positive() || mu > &Rat::one() {
        return Err(Error::domain("mu must satisfy 0 < mu <= 1"));
    }
    let zero_weight = Rat::one() - mu;
    let sign_weight = mu / Rat::from(Int::from(2));
    let cells = n * n;
    let mut digits = vec![0u8; cells];
    let mut total = Rat::zero();
    loop {
        let rows: Vec<Vec<i8>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| match digits[i * n + j] {
                        0 => 0i8,
                        1 => 1,
                        _ => -1,
                    })
                    .collect()
            })
            .collect();
        if is_singular_exact(&rows) {
            let mut weight = Rat::one();
            for &d in &digits {
                weight *= if d == 0 { &zero_weight } else { &sign_weight };
            }
            total += weight;
        }
        let mut k = 0;
        loop {
            if k == cells {
                return Ok(total);
            }
            digits[k] += 1;
            if digits[k] < 3 {
                break;
            }
            digits[k] = 0;
            k += 1;
        }
    }
}
