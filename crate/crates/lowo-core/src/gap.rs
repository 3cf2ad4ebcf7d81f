//! Generalized arithmetic progressions (GAPs) over the rationals, with
//! exact membership, torsion, properness, and dissociativity tests.
//!
//! A GAP of rank `r` is the set
//!
//! `P = { c + m_1 g_1 + … + m_r g_r : M_i ≤ m_i ≤ M'_i }`
//!
//! determined by an offset `c`, generators `g_i`, and integer coefficient
//! bounds. Its *volume* is `Π (M'_i − M_i + 1)`, an upper bound on `|P|`
//! with equality exactly when the GAP is *proper* (all coefficient tuples
//! produce distinct values). `P` is *symmetric* when `c = 0` and every
//! bound pair satisfies `M_i = −M'_i`.
//!
//! Membership (`x ∈ P`) is decided exactly, by the cheapest applicable
//! route: direct comparison at rank 0, divisibility at rank 1, a solved
//! two-variable linear Diophantine system at rank 2, direct enumeration for
//! small volumes, and meet-in-the-middle over a balanced split of the
//! coordinate box otherwise. All routes clear denominators first and then
//! work in exact integers.
//!
//! The same enumeration core powers the related predicates used by the
//! inverse algorithms: least torsion `τ` with `τx ∈ P`, properness with an
//! explicit colliding coefficient pair, `k`-dissociativity of a tuple (no
//! vanishing integer combination with all `|m_i| ≤ k`), and membership in
//! the signed cube `S(w) = {Σ ε_i w_i : ε_i = ±1}`.

use std::collections::HashMap;

use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact_linalg::{serde_int, serde_int_vec, serde_rat, serde_rat_vec};
use crate::walk::Multiset;
use crate::{Int, Rat};

/// Largest coefficient-box volume membership will enumerate directly.
pub const MEMBERSHIP_ENUM_CAP: u64 = 10_000;
/// Largest sweep volume for the partial-enumeration Diophantine route
/// (all coordinates but the two widest are swept).
pub const DIOPH_ENUM_CAP: u64 = 10_000_000;
/// Largest half-box volume the meet-in-the-middle membership map may hold.
pub const MEMBERSHIP_MAP_CAP: u64 = 1_000_000;
/// Total state budget (map + stream) for meet-in-the-middle membership.
pub const MEMBERSHIP_STATE_CAP: u64 = 1_000_000_000;
/// Largest volume the properness check will enumerate.
pub const PROPER_ENUM_CAP: u64 = 1_000_000;
/// Per-half state budget for the dissociativity search.
pub const DISSOC_STATE_CAP: u64 = 100_000_000;
/// Largest tuple length for signed-cube membership (2^(r/2) states per half).
pub const CUBE_RANK_CAP: usize = 30;

/// A generalized arithmetic progression with rational offset and
/// generators and integer coefficient bounds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GapRepr", into = "GapRepr")]
pub struct Gap {
    offset: Rat,
    generators: Vec<Rat>,
    lower: Vec<Int>,
    upper: Vec<Int>,
}

/// Wire form: rationals as `"p/q"` strings, bounds as integers (decimal
/// strings beyond the i64 range).
#[derive(Serialize, Deserialize)]
struct GapRepr {
    #[serde(with = "serde_rat")]
    offset: Rat,
    #[serde(with = "serde_rat_vec")]
    generators: Vec<Rat>,
    #[serde(with = "serde_int_vec")]
    lower: Vec<Int>,
    #[serde(with = "serde_int_vec")]
    upper: Vec<Int>,
}

impl TryFrom<GapRepr> for Gap {
    type Error = Error;
    fn try_from(r: GapRepr) -> Result<Self> {
        Gap::new(r.offset, r.generators, r.lower, r.upper)
    }
}

impl From<Gap> for GapRepr {
    fn from(g: Gap) -> Self {
        GapRepr {
            offset: g.offset,
            generators: g.generators,
            lower: g.lower,
            upper: g.upper,
        }
    }
}

impl Gap {
    /// Validate and build: generator and bound lists must agree in length
    /// and every bound pair must satisfy `lower_i ≤ upper_i`.
    pub fn new(offset: Rat, generators: Vec<Rat>, lower: Vec<Int>, upper: Vec<Int>) -> Result<Gap> {
        if generators.len() != lower.len() || generators.len() != upper.len() {
            return Err(Error::domain(
                "gap generator and bound lists must have equal length",
            ));
        }
        for (l, u) in lower.iter().zip(&upper) {
            if l > u {
                return Err(Error::domain(format!(
                    "gap bounds must satisfy lower <= upper, got [{l}, {u}]"
                )));
            }
        }
        Ok(Gap {
            offset,
            generators,
            lower,
            upper,
        })
    }

    /// The rank-0 gap `{0}`.
    pub fn zero() -> Gap {
        Gap {
            offset: Rat::zero(),
            generators: Vec::new(),
            lower: Vec::new(),
            upper: Vec::new(),
        }
    }

    /// The symmetric coefficient box `Q(w, k) = {Σ m_i w_i : |m_i| ≤ k}`.
    pub fn q_box(values: &[Int], k: &Int) -> Result<Gap> {
        if k.is_negative() {
            return Err(Error::domain("coefficient box radius must be >= 0"));
        }
        Gap::new(
            Rat::zero(),
            values.iter().map(|v| Rat::from(v.clone())).collect(),
            values.iter().map(|_| -k.clone()).collect(),
            values.iter().map(|_| k.clone()).collect(),
        )
    }

    pub fn offset(&self) -> &Rat {
        &self.offset
    }

    pub fn generators(&self) -> &[Rat] {
        &self.generators
    }

    pub fn lower(&self) -> &[Int] {
        &self.lower
    }

    pub fn upper(&self) -> &[Int] {
        &self.upper
    }

    /// Number of generators.
    pub fn rank(&self) -> usize {
        self.generators.len()
    }

    /// `Π (upper_i − lower_i + 1)`: the number of coefficient tuples, an
    /// upper bound for the number of elements.
    pub fn volume(&self) -> Int {
        let mut v = Int::one();
        for (l, u) in self.lower.iter().zip(&self.upper) {
            v *= u - l + 1;
        }
        v
    }

    /// Symmetric means `offset = 0` and every bound pair is `[-b, b]`.
    pub fn is_symmetric(&self) -> bool {
        self.offset.is_zero()
            && self
                .lower
                .iter()
                .zip(&self.upper)
                .all(|(l, u)| *l == -u.clone())
    }

    /// Minkowski sum: offsets add, generator/bound lists concatenate.
    pub fn minkowski_sum(&self, other: &Gap) -> Gap {
        let mut generators = self.generators.clone();
        generators.extend(other.generators.iter().cloned());
        let mut lower = self.lower.clone();
        lower.extend(other.lower.iter().cloned());
        let mut upper = self.upper.clone();
        upper.extend(other.upper.iter().cloned());
        Gap {
            offset: &self.offset + &other.offset,
            generators,
            lower,
            upper,
        }
    }

    /// `t`-fold iterated sumset `P + … + P`: same generators, offset and
    /// bounds scaled by `t`.
    pub fn iterated_sumset(&self, t: u64) -> Result<Gap> {
        if t == 0 {
            return Err(Error::domain("iterated sumset requires t >= 1"));
        }
        let t = Int::from(t);
        Gap::new(
            &self.offset * Rat::from(t.clone()),
            self.generators.clone(),
            self.lower.iter().map(|l| l * &t).collect(),
            self.upper.iter().map(|u| u * &t).collect(),
        )
    }

    /// Pointwise scalar dilate `c · P`: offset and generators scale, bounds
    /// are unchanged.
    pub fn scalar_mul(&self, c: &Rat) -> Gap {
        Gap {
            offset: &self.offset * c,
            generators: self.generators.iter().map(|g| g * c).collect(),
            lower: self.lower.clone(),
            upper: self.upper.clone(),
        }
    }

    /// Clear denominators: returns `(scale D, integer generators D·g_i)`.
    fn integer_form(&self, extra: &[&Rat]) -> (Int, Vec<Int>) {
        let mut d = self.offset.denom().clone();
        for g in &self.generators {
            d = d.lcm(g.denom());
        }
        for r in extra {
            d = d.lcm(r.denom());
        }
        let gens = self
            .generators
            .iter()
            .map(|g| {
                let scaled = g * Rat::from(d.clone());
                debug_assert!(scaled.is_integer());
                scaled.to_integer()
            })
            .collect();
        (d, gens)
    }

    /// Membership witness: coefficients `m` with `offset + Σ m_i g_i = x`
    /// and `lower ≤ m ≤ upper`, or `None` when `x ∉ P`.
    pub fn member_witness(&self, x: &Rat) -> Result<Option<Vec<Int>>> {
        let (d, gens) = self.integer_form(&[x]);
        let target = {
            let scaled = (x - &self.offset) * Rat::from(d);
            debug_assert!(scaled.is_integer());
            scaled.to_integer()
        };
        box_witness(&gens, &self.lower, &self.upper, &target)
    }

    /// Exact membership test `x ∈ P`.
    pub fn contains(&self, x: &Rat) -> Result<bool> {
        Ok(self.member_witness(x)?.is_some())
    }

    /// Integer convenience wrapper for [`Gap::contains`].
    pub fn contains_int(&self, x: &Int) -> Result<bool> {
        self.contains(&Rat::from(x.clone()))
    }

    /// Least `τ` in `[lo, hi]` with `τ·x ∈ P` plus a coefficient witness,
    /// or `None`.
    pub fn torsion_witness(&self, x: &Rat, lo: u64, hi: u64) -> Result<Option<(u64, Vec<Int>)>> {
        if lo == 0 {
            return Err(Error::domain("torsion search requires lo >= 1"));
        }
        for tau in lo..=hi {
            if let Some(coeffs) = self.member_witness(&(x * Rat::from(Int::from(tau))))? {
                return Ok(Some((tau, coeffs)));
            }
        }
        Ok(None)
    }

    /// Least `τ` in `[lo, hi]` with `τ·x ∈ P`, or `None`.
    pub fn torsion_in(&self, x: &Rat, lo: u64, hi: u64) -> Result<Option<u64>> {
        Ok(self.torsion_witness(x, lo, hi)?.map(|(tau, _)| tau))
    }

    /// Exact properness check. Returns `None` when all coefficient tuples
    /// give distinct values, otherwise a colliding pair of tuples.
    pub fn collision(&self) -> Result<Option<(Vec<Int>, Vec<Int>)>> {
        let volume = self.volume();
        if volume > Int::from(PROPER_ENUM_CAP) {
            return Err(Error::resource(format!(
                "properness check: volume {volume} exceeds enumeration budget {PROPER_ENUM_CAP}"
            )));
        }
        let (_, gens) = self.integer_form(&[]);
        let mut seen = HashMap::<Int, Vec<Int>>::new();
        let mut hit = None;
        for_each_box_sum(&gens, &self.lower, &self.upper, |s, coeffs| {
            if let Some(prev) = seen.get(s) {
                hit = Some((prev.clone(), coeffs.to_vec()));
                true
            } else {
                seen.insert(s.clone(), coeffs.to_vec());
                false
            }
        });
        Ok(hit)
    }

    /// True when every coefficient tuple yields a distinct element.
    pub fn is_proper(&self) -> Result<bool> {
        Ok(self.collision()?.is_none())
    }
}

/// Solve `Σ m_i g_i = target` over the integer box `[lower, upper]`,
/// returning a coefficient witness when solvable.
///
/// Routing, cheapest applicable first: closed forms at rank ≤ 2; direct
/// odometer enumeration for tiny boxes; partial enumeration that sweeps all
/// but the two widest coordinates and closes each residual with the
/// two-variable Diophantine solver; meet-in-the-middle over a balanced
/// coordinate split. A resource error is returned past all budgets.
pub fn box_witness(
    gens: &[Int],
    lower: &[Int],
    upper: &[Int],
    target: &Int,
) -> Result<Option<Vec<Int>>> {
    let r = gens.len();
    match r {
        0 => return Ok(target.is_zero().then(Vec::new)),
        1 => return Ok(rank1_witness(&gens[0], &lower[0], &upper[0], target).map(|m| vec![m])),
        2 => {
            return Ok(rank2_witness(
                (&gens[0], &gens[1]),
                (&lower[0], &upper[0]),
                (&lower[1], &upper[1]),
                target,
            )
            .map(|(a, b)| vec![a, b]))
        }
        _ => {}
    }
    let volume: Int = lower.iter().zip(upper).map(|(l, u)| u - l + 1).product();
    if volume <= Int::from(MEMBERSHIP_ENUM_CAP) {
        let mut witness = None;
        for_each_box_sum(gens, lower, upper, |s, coeffs| {
            if s == target {
                witness = Some(coeffs.to_vec());
                true
            } else {
                false
            }
        });
        return Ok(witness);
    }
    // Partial enumeration: sweep all but the two widest coordinates.
    let mut idx: Vec<usize> = (0..r).collect();
    idx.sort_by(|&a, &b| (&upper[a] - &lower[a]).cmp(&(&upper[b] - &lower[b])));
    let (sweep, base) = idx.split_at(r - 2);
    let sweep_volume: Int = sweep.iter().map(|&i| &upper[i] - &lower[i] + 1).product();
    if sweep_volume <= Int::from(DIOPH_ENUM_CAP) {
        let (b0, b1) = (base[0], base[1]);
        let (sg, sl, su) = select(gens, lower, upper, sweep);
        let mut witness = None;
        for_each_box_sum(&sg, &sl, &su, |s, coeffs| {
            let residual = target - s;
            match rank2_witness(
                (&gens[b0], &gens[b1]),
                (&lower[b0], &upper[b0]),
                (&lower[b1], &upper[b1]),
                &residual,
            ) {
                Some((m0, m1)) => {
                    let mut full = vec![Int::zero(); r];
                    for (&i, c) in sweep.iter().zip(coeffs) {
                        full[i] = c.clone();
                    }
                    full[b0] = m0;
                    full[b1] = m1;
                    witness = Some(full);
                    true
                }
                None => false,
            }
        });
        return Ok(witness);
    }
    if volume > Int::from(MEMBERSHIP_STATE_CAP) {
        return Err(Error::resource(format!(
            "box membership: volume {volume} exceeds budget {MEMBERSHIP_STATE_CAP}"
        )));
    }
    // Meet-in-the-middle: hash the reachable sums of one half (with a
    // witness each), stream the other half.
    let (side_a, side_b) = balanced_split(lower, upper, MEMBERSHIP_MAP_CAP);
    let (ga, la, ua) = select(gens, lower, upper, &side_a);
    let mut map = HashMap::<Int, Vec<Int>>::new();
    for_each_box_sum(&ga, &la, &ua, |s, coeffs| {
        if !map.contains_key(s) {
            map.insert(s.clone(), coeffs.to_vec());
        }
        false
    });
    let (gb, lb, ub) = select(gens, lower, upper, &side_b);
    let mut witness = None;
    for_each_box_sum(&gb, &lb, &ub, |s, coeffs| {
        if let Some(ca) = map.get(&(target - s)) {
            let mut full = vec![Int::zero(); r];
            for (&i, c) in side_a.iter().zip(ca) {
                full[i] = c.clone();
            }
            for (&i, c) in side_b.iter().zip(coeffs) {
                full[i] = c.clone();
            }
            witness = Some(full);
            true
        } else {
            false
        }
    });
    Ok(witness)
}

/// Solve `m·g = target` with `m ∈ [lo, hi]`.
fn rank1_witness(g: &Int, lo: &Int, hi: &Int, target: &Int) -> Option<Int> {
    if g.is_zero() {
        return target.is_zero().then(|| lo.clone());
    }
    let (m, rem) = target.div_rem(g);
    (rem.is_zero() && &m >= lo && &m <= hi).then_some(m)
}

/// Solve `m_1 g_1 + m_2 g_2 = target` with box bounds, by extended gcd and
/// an integer interval intersection over the solution line.
fn rank2_witness(
    g: (&Int, &Int),
    bounds0: (&Int, &Int),
    bounds1: (&Int, &Int),
    target: &Int,
) -> Option<(Int, Int)> {
    let (g1, g2) = g;
    if g1.is_zero() {
        return rank1_witness(g2, bounds1.0, bounds1.1, target).map(|m| (bounds0.0.clone(), m));
    }
    if g2.is_zero() {
        return rank1_witness(g1, bounds0.0, bounds0.1, target).map(|m| (m, bounds1.0.clone()));
    }
    let eg = g1.extended_gcd(g2);
    if !target.mod_floor(&eg.gcd).is_zero() {
        return None;
    }
    let ratio = target.div_floor(&eg.gcd);
    // Particular solution; the general one is m1 = m1_0 + t·s1,
    // m2 = m2_0 + t·s2 with s1 = g2/gcd, s2 = -g1/gcd (both non-zero).
    let m1_0 = &eg.x * &ratio;
    let m2_0 = &eg.y * &ratio;
    let s1 = g2 / &eg.gcd;
    let s2 = -(g1 / &eg.gcd);
    let (lo1, hi1) = t_interval(&m1_0, &s1, bounds0.0, bounds0.1)?;
    let (lo2, hi2) = t_interval(&m2_0, &s2, bounds1.0, bounds1.1)?;
    let t = lo1.max(lo2);
    if t > hi1.min(hi2) {
        return None;
    }
    Some((&m1_0 + &t * &s1, &m2_0 + &t * &s2))
}

/// Integer `t` interval with `lo ≤ base + t·step ≤ hi` (`step ≠ 0`).
fn t_interval(base: &Int, step: &Int, lo: &Int, hi: &Int) -> Option<(Int, Int)> {
    debug_assert!(!step.is_zero());
    let a = lo - base;
    let b = hi - base;
    let (lo_t, hi_t) = if step.is_positive() {
        (div_ceil(&a, step), b.div_floor(step))
    } else {
        (div_ceil(&b, step), a.div_floor(step))
    };
    (lo_t <= hi_t).then_some((lo_t, hi_t))
}

fn div_ceil(a: &Int, b: &Int) -> Int {
    let (q, r) = a.div_mod_floor(b);
    if r.is_zero() {
        q
    } else {
        q + 1
    }
}

/// Walk every coefficient tuple of the box `[lower, upper]`, calling `f`
/// with the running sum `Σ m_i g_i` and the tuple. Stops early when `f`
/// returns true. The odometer updates the sum incrementally: one addition
/// per visited tuple plus one correction per carried digit.
pub(crate) fn for_each_box_sum(
    gens: &[Int],
    lower: &[Int],
    upper: &[Int],
    mut f: impl FnMut(&Int, &[Int]) -> bool,
) {
    let r = gens.len();
    let mut coeffs: Vec<Int> = lower.to_vec();
    let mut sum = Int::zero();
    for (c, g) in coeffs.iter().zip(gens) {
        sum += c * g;
    }
    loop {
        if f(&sum, &coeffs) {
            return;
        }
        let mut i = 0;
        while i < r {
            if coeffs[i] < upper[i] {
                coeffs[i] += 1;
                sum += &gens[i];
                break;
            }
            sum -= (&upper[i] - &lower[i]) * &gens[i];
            coeffs[i] = lower[i].clone();
            i += 1;
        }
        if i == r {
            return;
        }
    }
}

/// Partition coordinate indices into two halves with balanced box volumes
/// (greedy, largest range first). The first returned half is the designated
/// map side: the larger of the two products that stays within `map_cap`.
fn balanced_split(lower: &[Int], upper: &[Int], map_cap: u64) -> (Vec<usize>, Vec<usize>) {
    let mut idx: Vec<usize> = (0..lower.len()).collect();
    idx.sort_by(|&a, &b| {
        let ra = &upper[a] - &lower[a];
        let rb = &upper[b] - &lower[b];
        rb.cmp(&ra)
    });
    let (mut a, mut b) = (Vec::new(), Vec::new());
    let (mut va, mut vb) = (Int::one(), Int::one());
    for i in idx {
        let range = &upper[i] - &lower[i] + 1;
        if va <= vb {
            a.push(i);
            va *= range;
        } else {
            b.push(i);
            vb *= range;
        }
    }
    let cap = Int::from(map_cap);
    // Map side: the larger half if it fits, else the smaller one.
    let larger_is_a = va >= vb;
    let (big, big_v, small) = if larger_is_a {
        (a.clone(), va, b.clone())
    } else {
        (b.clone(), vb, a.clone())
    };
    if big_v <= cap {
        (big, small)
    } else {
        (small, big)
    }
}

/// Select the sub-slices of `gens` / `lower` / `upper` at `indices`.
fn select(
    gens: &[Int],
    lower: &[Int],
    upper: &[Int],
    indices: &[usize],
) -> (Vec<Int>, Vec<Int>, Vec<Int>) {
    (
        indices.iter().map(|&i| gens[i].clone()).collect(),
        indices.iter().map(|&i| lower[i].clone()).collect(),
        indices.iter().map(|&i| upper[i].clone()).collect(),
    )
}

/// Find a non-trivial vanishing combination `Σ m_i w_i = 0` with all
/// `|m_i| ≤ k`, or `None` when `w` is `k`-dissociated.
///
/// Meet-in-the-middle over a split of the coordinates. The map keeps at
/// most two coefficient tuples per sum value: the first one seen, plus a
/// non-zero one when the first was the all-zero tuple — enough because a
/// streamed non-zero tuple pairs with *any* stored tuple, and the streamed
/// zero tuple needs precisely a stored non-zero tuple of sum 0.
pub fn find_k_relation(values: &[Int], k: u64) -> Result<Option<Vec<Int>>> {
    if k == 0 {
        return Err(Error::domain("dissociativity requires k >= 1"));
    }
    let r = values.len();
    if r == 0 {
        return Ok(None);
    }
    let half = r / 2;
    let width = 2 * k + 1;
    let states = |len: u32| (width as f64).powi(len as i32);
    if states(half as u32) > DISSOC_STATE_CAP as f64
        || states((r - half) as u32) > DISSOC_STATE_CAP as f64
    {
        return Err(Error::resource(format!(
            "dissociativity search: ({width})^{} states exceed budget {DISSOC_STATE_CAP}",
            r - half
        )));
    }
    let (va, vb) = values.split_at(half);
    let kk = Int::from(k);
    let lo_a: Vec<Int> = va.iter().map(|_| -kk.clone()).collect();
    let hi_a: Vec<Int> = va.iter().map(|_| kk.clone()).collect();
    let mut map = HashMap::<Int, Vec<Vec<Int>>>::new();
    for_each_box_sum(va, &lo_a, &hi_a, |s, coeffs| {
        let entry = map.entry(s.clone()).or_default();
        let has_nonzero = entry.iter().any(|c| c.iter().any(|x| !x.is_zero()));
        let coeffs_nonzero = coeffs.iter().any(|x| !x.is_zero());
        if entry.is_empty() || (coeffs_nonzero && !has_nonzero) {
            entry.push(coeffs.to_vec());
        }
        false
    });
    let lo_b: Vec<Int> = vb.iter().map(|_| -kk.clone()).collect();
    let hi_b: Vec<Int> = vb.iter().map(|_| kk.clone()).collect();
    let mut relation: Option<Vec<Int>> = None;
    for_each_box_sum(vb, &lo_b, &hi_b, |s, coeffs| {
        let need = -s;
        let Some(entry) = map.get(&need) else {
            return false;
        };
        let coeffs_nonzero = coeffs.iter().any(|x| !x.is_zero());
        let partner = if coeffs_nonzero {
            entry.first()
        } else {
            entry
                .iter()
                .find(|c| c.iter().any(|x| !x.is_zero()))
        };
        if let Some(p) = partner {
            let mut full = p.clone();
            full.extend(coeffs.iter().cloned());
            relation = Some(full);
            return true;
        }
        false
    });
    Ok(relation)
}

/// True when no non-trivial combination `Σ m_i w_i = 0` with `|m_i| ≤ k`
/// exists.
pub fn is_k_dissociated(values: &[Int], k: u64) -> Result<bool> {
    Ok(find_k_relation(values, k)?.is_none())
}

/// Membership in the signed cube `S(w) = {Σ ε_i w_i : ε_i ∈ {−1, 1}}`:
/// returns a sign vector `ε` with `Σ ε_i w_i = target` when one exists,
/// meet-in-the-middle over the two halves of `w`.
pub fn signed_cube_witness(values: &[Int], target: &Int) -> Result<Option<Vec<i8>>> {
    let r = values.len();
    if r > CUBE_RANK_CAP {
        return Err(Error::resource(format!(
            "signed cube membership limited to {CUBE_RANK_CAP} elements, got {r}"
        )));
    }
    if r == 0 {
        return Ok(if target.is_zero() { Some(Vec::new()) } else { None });
    }
    let (va, vb) = values.split_at(r / 2);
    let signed_sums = |vals: &[Int]| -> HashMap<Int, Vec<i8>> {
        let mut out: HashMap<Int, Vec<i8>> = HashMap::new();
        out.insert(Int::zero(), Vec::new());
        for v in vals {
            let mut next: HashMap<Int, Vec<i8>> = HashMap::with_capacity(out.len() * 2);
            for (s, signs) in &out {
                for (sum, sign) in [(s + v, 1i8), (s - v, -1i8)] {
                    next.entry(sum).or_insert_with(|| {
                        let mut extended = signs.clone();
                        extended.push(sign);
                        extended
                    });
                }
            }
            out = next;
        }
        out
    };
    let sa = signed_sums(va);
    let sb = signed_sums(vb);
    for (s, right) in &sb {
        if let Some(left) = sa.get(&(target - s)) {
            let mut eps = left.clone();
            eps.extend_from_slice(right);
            return Ok(Some(eps));
        }
    }
    Ok(None)
}

/// Boolean convenience form of [`signed_cube_witness`].
pub fn signed_cube_contains(values: &[Int], target: &Int) -> Result<bool> {
    Ok(signed_cube_witness(values, target)?.is_some())
}

/// One line of a dilate-coverage report: a distinct value of the input
/// multiset, its multiplicity, and either the least dilation `τ` with
/// `τ·value ∈ Q(w, k)` plus the coefficient witness, or an exceptional
/// mark (`tau = None`, empty witness).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverageEntry {
    #[serde(with = "serde_int")]
    pub value: Int,
    pub count: u64,
    pub tau: Option<u64>,
    #[serde(with = "serde_int_vec")]
    pub witness: Vec<Int>,
}

/// For each distinct value of `v`, find the least `τ ∈ [1, k]` with
/// `τ·value ∈ Q(w, k)`, with witness. The second component counts
/// exceptional (uncovered) occurrences with multiplicity.
pub fn dilate_coverage(v: &Multiset, w: &[Int], k: u64) -> Result<(Vec<CoverageEntry>, u64)> {
    if k == 0 {
        return Err(Error::domain("dilate coverage requires k >= 1"));
    }
    let q = Gap::q_box(w, &Int::from(k))?;
    let mut entries = Vec::new();
    let mut exceptional = 0u64;
    for (value, count) in v.iter() {
        let x = Rat::from(value.clone());
        match q.torsion_witness(&x, 1, k)? {
            Some((tau, coeffs)) => entries.push(CoverageEntry {
                value: value.clone(),
                count,
                tau: Some(tau),
                witness: coeffs,
            }),
            None => {
                exceptional += count;
                entries.push(CoverageEntry {
                    value: value.clone(),
                    count,
                    tau: None,
                    witness: Vec::new(),
                });
            }
        }
    }
    Ok((entries, exceptional))
}

/// Fraction of the points of `P` (coefficient-tuple images) that land in
/// `Q`, by exhaustive enumeration of `P`'s box. Used by coverage-style
/// verification clauses.
pub fn coverage_fraction(p: &Gap, q: &Gap) -> Result<(u64, u64)> {
    let volume = p.volume();
    if volume > Int::from(PROPER_ENUM_CAP) {
        return Err(Error::resource(format!(
            "coverage enumeration: volume {volume} exceeds budget {PROPER_ENUM_CAP}"
        )));
    }
    let (d, gens) = p.integer_form(&[]);
    let dr = Rat::from(d);
    let mut inside = 0u64;
    let mut total = 0u64;
    let mut err: Option<Error> = None;
    for_each_box_sum(&gens, &p.lower, &p.upper, |s, _| {
        total += 1;
        let x = p.offset() + Rat::new(s.clone(), dr.numer().clone());
        match q.contains(&x) {
            Ok(true) => inside += 1,
            Ok(false) => {}
            Err(e) => {
                err = Some(e);
                return true;
            }
        }
        false
    });
    match err {
        Some(e) => Err(e),
        None => Ok((inside, total)),
    }
}
