//! Lazy signed random walks over integer multisets, computed exactly.
//!
//! A walk is determined by a multiset `v = {v_1, …, v_n}` of integers and a
//! laziness parameter `0 < μ ≤ 1`: the walk value is `Y = Σ η_i v_i` with
//! independent steps `P(η_i = 0) = 1 − μ`, `P(η_i = ±1) = μ/2`. The
//! concentration probability is `P_μ(v) = max_a P(Y = a)`.
//!
//! Exact machinery: with `μ = p/q` in lowest terms, every step weight is an
//! integer over the common denominator `2q` (`0 ↦ 2(q−p)`, `±1 ↦ p`), so the
//! full distribution after `n` non-zero steps is a sparse integer-numerator
//! table over `(2q)^n`. Repeated values are folded in one stroke through the
//! equal-steps closed form
//!
//! `c_a = Σ_j C(m,j) (1−μ)^j (μ/2)^{m−j} C(m−j, (a+m−j)/2)`
//!
//! (binomials vanish when the lower index is non-integral or out of range),
//! then convolved into the running table.
//!
//! Approximate machinery (floats, always with provenance): the Fourier
//! identity `P(Y = a) = ∫₀¹ e^{-2πiaξ} Π (1−μ+μcos(2πv_jξ)) dξ` gives, for
//! `μ ≤ 1/2`, a non-negative integrand maximized at `a = 0`, so
//! [`fourier_estimate`] integrates it by the composite midpoint rule with a
//! certified error bound; [`halasz_factor`] evaluates the integrand itself.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::exact_linalg::{rat_from_str, rat_to_string};
use crate::{Int, Rat};

/// Default cap on the number of atoms [`exact_distribution`] will produce.
pub const SUPPORT_CAP: u64 = 10_000_000;

/// Canonical multiset of integers: value-sorted, multiplicity-merged.
///
/// The canonical form makes permutation invariance of all walk statistics
/// structural rather than a theorem to re-check.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Multiset {
    items: Vec<(Int, u64)>,
}

impl Multiset {
    /// Build from arbitrary values (any order, duplicates allowed).
    pub fn from_values<I: IntoIterator<Item = Int>>(values: I) -> Self {
        let mut m = BTreeMap::<Int, u64>::new();
        for v in values {
            *m.entry(v).or_insert(0) += 1;
        }
        Multiset {
            items: m.into_iter().collect(),
        }
    }

    /// Convenience constructor from machine integers (tests, corpora).
    pub fn from_i64s(values: &[i64]) -> Self {
        Self::from_values(values.iter().map(|&v| Int::from(v)))
    }

    /// Build from `(value, multiplicity)` pairs; zero multiplicities are an
    /// error.
    pub fn from_pairs<I: IntoIterator<Item = (Int, u64)>>(pairs: I) -> Result<Self> {
        let mut m = BTreeMap::<Int, u64>::new();
        for (v, c) in pairs {
            if c == 0 {
                return Err(Error::domain("multiset multiplicity must be >= 1"));
            }
            *m.entry(v).or_insert(0) += c;
        }
        Ok(Multiset {
            items: m.into_iter().collect(),
        })
    }

    /// Total number of elements (with multiplicity).
    pub fn len(&self) -> u64 {
        self.items.iter().map(|(_, c)| *c).sum()
    }

    /// True when the multiset is empty.
    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Number of distinct values.
    pub fn distinct_len(&self) -> usize {
        self.items.len()
    }

    /// Iterate `(value, multiplicity)` in ascending value order.
    pub fn iter(&self) -> impl Iterator<Item = (&Int, u64)> {
        self.items.iter().map(|(v, c)| (v, *c))
    }

    /// Multiplicity of a value (zero when absent).
    pub fn count_of(&self, v: &Int) -> u64 {
        self.items
            .binary_search_by(|(x, _)| x.cmp(v))
            .map(|i| self.items[i].1)
            .unwrap_or(0)
    }

    /// Expand to one entry per element, ascending.
    pub fn expand(&self) -> Vec<Int> {
        let mut out = Vec::new();
        for (v, c) in &self.items {
            for _ in 0..*c {
                out.push(v.clone());
            }
        }
        out
    }

    /// Multiset union (multiplicities add) — concatenation of words.
    pub fn union(&self, other: &Multiset) -> Multiset {
        let mut m: BTreeMap<Int, u64> = self.items.iter().cloned().collect();
        for (v, c) in &other.items {
            *m.entry(v.clone()).or_insert(0) += c;
        }
        Multiset {
            items: m.into_iter().collect(),
        }
    }

    /// `v^k`: every multiplicity scaled by `k ≥ 1`.
    pub fn pow(&self, k: u64) -> Result<Multiset> {
        if k == 0 {
            return Err(Error::domain("multiset power requires k >= 1"));
        }
        Ok(Multiset {
            items: self.items.iter().map(|(v, c)| (v.clone(), c * k)).collect(),
        })
    }

    /// True when `other` is a sub-multiset of `self`.
    pub fn contains_submultiset(&self, other: &Multiset) -> bool {
        other.iter().all(|(v, c)| self.count_of(v) >= c)
    }

    /// Remove one copy of each value in `other`, multiplicity-aware.
    /// Returns `None` when `other` is not a sub-multiset.
    pub fn saturating_remove(&self, other: &Multiset) -> Option<Multiset> {
        if !self.contains_submultiset(other) {
            return None;
        }
        let items = self
            .items
            .iter()
            .filter_map(|(v, c)| {
                let rem = c - other.count_of(v);
                (rem > 0).then(|| (v.clone(), rem))
            })
            .collect();
        Some(Multiset { items })
    }

    /// Multiplicity of zero among the values.
    pub fn zero_count(&self) -> u64 {
        self.count_of(&Int::zero())
    }

    /// Copy with all zero values removed.
    pub fn without_zeros(&self) -> Multiset {
        Multiset {
            items: self
                .items
                .iter()
                .filter(|(v, _)| !v.is_zero())
                .cloned()
                .collect(),
        }
    }

    /// `Σ multiplicity · |value|` — the walk's support radius.
    pub fn sum_abs(&self) -> Int {
        let mut s = Int::zero();
        for (v, c) in &self.items {
            s += v.abs() * Int::from(*c);
        }
        s
    }

    /// Parse the one-value-per-line text format: `value` or
    /// `value x multiplicity` written as `valuexmult` (e.g. `7`, `-3x12`).
    /// Blank lines and `#` comments are skipped.
    pub fn parse_text(text: &str) -> Result<Multiset> {
        let mut pairs = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad =
                |what: &str| Error::domain(format!("line {}: {} in {:?}", lineno + 1, what, line));
            let (vs, cs) = match line.split_once('x') {
                Some((a, b)) => (a.trim(), Some(b.trim())),
                None => (line, None),
            };
            let value: Int = vs.parse().map_err(|_| bad("invalid value"))?;
            let mult: u64 = match cs {
                Some(c) => c.parse().map_err(|_| bad("invalid multiplicity"))?,
                None => 1,
            };
            if mult == 0 {
                return Err(bad("multiplicity must be >= 1"));
            }
            pairs.push((value, mult));
        }
        Multiset::from_pairs(pairs)
    }

    /// Emit the canonical text form (ascending values, `x` only when the
    /// multiplicity exceeds one).
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (v, c) in &self.items {
            if *c == 1 {
                out.push_str(&format!("{v}\n"));
            } else {
                out.push_str(&format!("{v}x{c}\n"));
            }
        }
        out
    }
}

#[derive(Serialize, Deserialize)]
struct MultisetEntry {
    #[serde(with = "crate::exact_linalg::serde_int")]
    value: Int,
    count: u64,
}

impl Serialize for Multiset {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let entries: Vec<MultisetEntry> = self
            .items
            .iter()
            .map(|(v, c)| MultisetEntry {
                value: v.clone(),
                count: *c,
            })
            .collect();
        entries.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Multiset {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let entries = Vec::<MultisetEntry>::deserialize(d)?;
        Multiset::from_pairs(entries.into_iter().map(|e| (e.value, e.count)))
            .map_err(D::Error::custom)
    }
}

/// Walk parameters: the laziness `μ` as an exact rational in `(0, 1]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WalkParams {
    mu: Rat,
}

impl WalkParams {
    /// Validate and build; `μ` must satisfy `0 < μ ≤ 1`.
    pub fn new(mu: Rat) -> Result<Self> {
        if !mu.is_positive() || mu > Rat::one() {
            return Err(Error::domain(format!(
                "walk parameter mu must satisfy 0 < mu <= 1, got {}",
                rat_to_string(&mu)
            )));
        }
        Ok(WalkParams { mu })
    }

    /// Convenience constructor from a ratio of machine integers.
    pub fn from_ratio(p: i64, q: i64) -> Result<Self> {
        if q == 0 {
            return Err(Error::domain("mu denominator must be non-zero"));
        }
        Self::new(Rat::new(Int::from(p), Int::from(q)))
    }

    /// The exact laziness parameter.
    pub fn mu(&self) -> &Rat {
        &self.mu
    }

    /// `μ` as a float (estimators only).
    pub fn mu_f64(&self) -> f64 {
        self.mu.to_f64().expect("mu in (0,1] converts to f64")
    }

    /// New parameters with `μ` scaled by the positive rational `factor`
    /// (used by the comparison laws, e.g. `μ → μ/4`).
    pub fn scaled(&self, factor: &Rat) -> Result<Self> {
        Self::new(&self.mu * factor)
    }
}

/// Exact sparse distribution of the walk value `Y`.
///
/// Invariants: every stored probability is positive, in canonical reduced
/// form, and the probabilities sum to exactly one.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    atoms: BTreeMap<Int, Rat>,
}

impl Distribution {
    /// Build from atoms, validating positivity and total mass one.
    pub fn from_atoms(atoms: BTreeMap<Int, Rat>) -> Result<Self> {
        let mut total = Rat::zero();
        for p in atoms.values() {
            if !p.is_positive() {
                return Err(Error::domain("distribution atoms must be positive"));
            }
            total += p;
        }
        if !total.is_one() {
            return Err(Error::domain(format!(
                "distribution mass must be exactly 1, got {}",
                rat_to_string(&total)
            )));
        }
        Ok(Distribution { atoms })
    }

    /// Number of atoms.
    pub fn support_size(&self) -> usize {
        self.atoms.len()
    }

    /// Probability of a point (zero when absent).
    pub fn prob(&self, a: &Int) -> Rat {
        self.atoms.get(a).cloned().unwrap_or_else(Rat::zero)
    }

    /// Iterate `(value, probability)` in ascending value order.
    pub fn iter(&self) -> impl Iterator<Item = (&Int, &Rat)> {
        self.atoms.iter()
    }

    /// The concentration atom: maximal probability, ties broken toward the
    /// smallest `|a|` and then toward `a ≥ 0`.
    pub fn max_atom(&self) -> (Int, Rat) {
        let mut best: Option<(&Int, &Rat)> = None;
        for (a, p) in &self.atoms {
            best = Some(match best {
                None => (a, p),
                Some((ba, bp)) => {
                    let better = match p.cmp(bp) {
                        std::cmp::Ordering::Greater => true,
                        std::cmp::Ordering::Less => false,
                        std::cmp::Ordering::Equal => match a.abs().cmp(&ba.abs()) {
                            std::cmp::Ordering::Less => true,
                            std::cmp::Ordering::Greater => false,
                            // Same probability and same |a|: prefer a >= 0.
                            std::cmp::Ordering::Equal => a > ba,
                        },
                    };
                    if better {
                        (a, p)
                    } else {
                        (ba, bp)
                    }
                }
            });
        }
        let (a, p) = best.expect("distribution is never empty");
        (a.clone(), p.clone())
    }
}

#[derive(Serialize, Deserialize)]
struct AtomRepr {
    value: String,
    prob: String,
}

#[derive(Serialize, Deserialize)]
struct DistributionRepr {
    atoms: Vec<AtomRepr>,
}

impl Serialize for Distribution {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        DistributionRepr {
            atoms: self
                .atoms
                .iter()
                .map(|(v, p)| AtomRepr {
                    value: v.to_string(),
                    prob: rat_to_string(p),
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Distribution {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = DistributionRepr::deserialize(d)?;
        let mut atoms = BTreeMap::new();
        for a in repr.atoms {
            let v: Int = a.value.parse().map_err(D::Error::custom)?;
            let p = rat_from_str(&a.prob).map_err(D::Error::custom)?;
            if atoms.insert(v, p).is_some() {
                return Err(D::Error::custom("duplicate atom value"));
            }
        }
        Distribution::from_atoms(atoms).map_err(D::Error::custom)
    }
}

/// Exact binomial coefficient `C(n, k)` (zero outside `0 ≤ k ≤ n`).
fn binom(n: u64, k: u64) -> Int {
    if k > n {
        return Int::zero();
    }
    let k = k.min(n - k);
    let mut acc = Int::one();
    for i in 0..k {
        acc = acc * Int::from(n - i) / Int::from(i + 1);
    }
    acc
}

/// Integer numerators of the equal-steps distribution: index `t + m` holds
/// the numerator of `P(Σ_{i≤m} η_i = t)` over the denominator `(2q)^m`.
fn equal_steps_numerators(m: u64, params: &WalkParams) -> Vec<Int> {
    let p = params.mu().numer().clone();
    let q = params.mu().denom().clone();
    let z = Int::from(2) * (&q - &p); // weight of the 0 step
    let mut out = vec![Int::zero(); (2 * m + 1) as usize];
    // Choose j lazy steps, then split the remaining m - j into pluses and
    // minuses; t = #plus - #minus.
    let mut zpow = Int::one();
    for j in 0..=m {
        let live = m - j;
        let weight = binom(m, j) * &zpow * p.pow((live) as u32);
        if !weight.is_zero() {
            for plus in 0..=live {
                let t = 2 * plus as i64 - live as i64;
                let idx = (t + m as i64) as usize;
                out[idx] += &weight * binom(live, plus);
            }
        }
        zpow *= &z;
    }
    out
}

/// Closed-form equal-steps atom: the exact probability that a walk over `m`
/// copies of the same non-zero value lands `a` signed steps from the origin,
/// i.e. `P(Σ_{i≤m} η_i = a)`.
pub fn equal_steps_atom(m: u64, params: &WalkParams, a: i64) -> Rat {
    if a.unsigned_abs() > m {
        return Rat::zero();
    }
    let nums = equal_steps_numerators(m, params);
    let denom = (Int::from(2) * params.mu().denom()).pow(m as u32);
    Rat::new(nums[(a + m as i64) as usize].clone(), denom)
}

/// Exact distribution of the walk `Y = Σ η_i v_i` by sparse dynamic
/// programming: one convolution per distinct value, repeated values folded
/// through the equal-steps closed form first. Zero values never move the
/// walk and are skipped.
///
/// Fails with a resource error when the support would exceed
/// [`SUPPORT_CAP`] atoms.
pub fn exact_distribution(v: &Multiset, params: &WalkParams) -> Result<Distribution> {
    let span = v.sum_abs();
    let atoms_needed = Int::from(2) * &span + 1;
    if atoms_needed > Int::from(SUPPORT_CAP) {
        return Err(Error::resource(format!(
            "support too large; use fourier_estimate ({} atoms exceeds cap {})",
            atoms_needed, SUPPORT_CAP
        )));
    }
    let mut table: BTreeMap<Int, Int> = BTreeMap::new();
    table.insert(Int::zero(), Int::one());
    let mut steps: u64 = 0;
    for (value, mult) in v.iter() {
        if value.is_zero() {
            continue;
        }
        let nums = equal_steps_numerators(mult, params);
        let mut next: BTreeMap<Int, Int> = BTreeMap::new();
        for (x, w) in &table {
            for (idx, c) in nums.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                let t = idx as i64 - mult as i64;
                let key = x + value * Int::from(t);
                let add = w * c;
                *next.entry(key).or_insert_with(Int::zero) += add;
            }
        }
        table = next;
        steps += mult;
    }
    let denom = (Int::from(2) * params.mu().denom()).pow(steps as u32);
    let atoms: BTreeMap<Int, Rat> = table
        .into_iter()
        .filter(|(_, n)| !n.is_zero())
        .map(|(a, n)| (a, Rat::new(n, denom.clone())))
        .collect();
    Distribution::from_atoms(atoms)
}

/// Exact concentration probability: `(a*, P_μ(v))` where `a*` attains
/// `max_a P(Y = a)` (ties toward the smallest `|a|`, then `a ≥ 0`).
pub fn concentration(v: &Multiset, params: &WalkParams) -> Result<(Int, Rat)> {
    Ok(exact_distribution(v, params)?.max_atom())
}

/// Result of the midpoint-rule Fourier estimator.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FourierEstimate {
    /// Midpoint-rule value of `∫₀¹ Π (1−μ+μcos(2πv_jξ)) dξ`.
    pub value: f64,
    /// Certified quadrature bound: the integrand has Lipschitz constant at
    /// most `2πμ Σ|v_j|`, and the composite midpoint rule on `g` panels of a
    /// Lipschitz-`L` function errs by at most `L/(4g)`.
    pub error_bound: f64,
    /// Number of quadrature panels used.
    pub grid: u32,
}

/// Estimate the concentration probability by numerically integrating the
/// Fourier product. Requires `μ ≤ 1/2`: in that regime every factor is
/// non-negative and the maximizing atom is `a = 0`, so
/// `P_μ(v) = P(Y = 0) = ∫₀¹ F(ξ) dξ`.
pub fn fourier_estimate(v: &Multiset, params: &WalkParams, grid: u32) -> Result<FourierEstimate> {
    if params.mu() > &Rat::new(Int::one(), Int::from(2)) {
        return Err(Error::domain(
            "fourier_estimate requires mu <= 1/2 (integrand positivity and argmax at 0)",
        ));
    }
    if grid == 0 {
        return Err(Error::domain("fourier_estimate requires grid >= 1"));
    }
    let mut acc = 0.0f64;
    for j in 0..grid {
        let xi = (j as f64 + 0.5) / grid as f64;
        acc += halasz_factor(v, params, xi);
    }
    let value = acc / grid as f64;
    let lipschitz = 2.0 * PI * params.mu_f64() * v.sum_abs().to_f64().unwrap_or(f64::INFINITY);
    Ok(FourierEstimate {
        value,
        error_bound: lipschitz / (4.0 * grid as f64),
        grid,
    })
}

/// The Halász factor `F_μ(ξ) = Π_j ((1−μ) + μ cos(2π v_j ξ))` over the
/// multiset (multiplicities as powers).
pub fn halasz_factor(v: &Multiset, params: &WalkParams, xi: f64) -> f64 {
    let mu = params.mu_f64();
    let mut acc = 1.0f64;
    for (value, mult) in v.iter() {
        let vf = value.to_f64().unwrap_or(0.0);
        let factor = (1.0 - mu) + mu * (2.0 * PI * vf * xi).cos();
        acc *= factor.powi(mult as i32);
    }
    acc
}
