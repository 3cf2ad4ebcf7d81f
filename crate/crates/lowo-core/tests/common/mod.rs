//! Shared helpers for the integration tests: a deterministic RNG and a
//! brute-force reference model of the lazy signed walk.
#![allow(dead_code)]

use lowo_core::randmat::splitmix64;
use lowo_core::walk::{Multiset, WalkParams};
use lowo_core::{Int, Rat};
use std::collections::BTreeMap;

/// Deterministic test RNG built on the same splitmix64 core the crate
/// documents for matrix sampling. Good enough for corpus generation.
pub struct TestRng {
    state: u64,
}

impl TestRng {
    pub fn new(seed: u64) -> Self {
        TestRng { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        splitmix64(self.state)
    }

    /// Uniform-ish draw in `[0, n)`; modulo bias is irrelevant at test sizes.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0);
        self.next_u64() % n
    }

    pub fn range_i64(&mut self, lo: i64, hi: i64) -> i64 {
        assert!(lo <= hi);
        lo + self.below((hi - lo + 1) as u64) as i64
    }

    /// Random multiset of `len` values drawn from `[lo, hi]`.
    pub fn multiset(&mut self, len: usize, lo: i64, hi: i64) -> Multiset {
        let values: Vec<i64> = (0..len).map(|_| self.range_i64(lo, hi)).collect();
        Multiset::from_i64s(&values)
    }

    /// Random multiset of `len` nonzero values drawn from `[lo, hi] \ {0}`.
    pub fn nonzero_multiset(&mut self, len: usize, lo: i64, hi: i64) -> Multiset {
        let values: Vec<i64> = (0..len)
            .map(|_| loop {
                let v = self.range_i64(lo, hi);
                if v != 0 {
                    break v;
                }
            })
            .collect();
        Multiset::from_i64s(&values)
    }
}

/// μ = p/q as a `WalkParams`, panicking on bad test constants.
pub fn mu(p: i64, q: i64) -> WalkParams {
    WalkParams::from_ratio(p, q).expect("valid test mu")
}

/// Reference model: enumerate all 3^n sign patterns of the walk over
/// `values` with μ = p/q and return the atom numerators over the common
/// denominator `(2q)^n`. The per-step weights are `2(q−p)` for the zero
/// step and `p` for each sign. Only usable when `(2q)^n` fits in `u64`
/// (n ≤ 10 with q ≤ 4 in the corpus).
pub fn oracle_numerators(values: &[i64], p: u64, q: u64) -> BTreeMap<i64, u64> {
    assert!(p >= 1 && p <= q);
    let n = values.len() as u32;
    let zero_w = 2 * (q - p);
    let mut out = BTreeMap::new();
    let total = 3u64.pow(n);
    for code in 0..total {
        let mut c = code;
        let mut sum = 0i64;
        let mut w = 1u64;
        for &v in values {
            match c % 3 {
                0 => w *= zero_w,
                1 => {
                    sum += v;
                    w *= p;
                }
                _ => {
                    sum -= v;
                    w *= p;
                }
            }
            if w == 0 {
                break;
            }
            c /= 3;
        }
        if w != 0 {
            *out.entry(sum).or_insert(0) += w;
        }
    }
    out
}

/// The oracle as exact rational atoms.
pub fn oracle_distribution(values: &[i64], p: u64, q: u64) -> BTreeMap<Int, Rat> {
    let denom = Int::from(2 * q).pow(values.len() as u32);
    oracle_numerators(values, p, q)
        .into_iter()
        .map(|(a, num)| (Int::from(a), Rat::new(Int::from(num), denom.clone())))
        .collect()
}

/// Exact binomial coefficient.
pub fn binom(n: u64, k: u64) -> Int {
    if k > n {
        return Int::from(0);
    }
    let mut acc = Rat::from(Int::from(1));
    for i in 0..k {
        acc *= Rat::new(Int::from(n - i), Int::from(i + 1));
    }
    assert!(acc.is_integer());
    acc.to_integer()
}
