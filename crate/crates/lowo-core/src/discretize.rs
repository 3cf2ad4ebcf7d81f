//! Discretization of a symmetric integer GAP into a *small* + *sparse*
//! decomposition at a verified scale.
//!
//! Given a symmetric GAP `P = {Σ m_i v_i : |m_i| ≤ M_i}` with integer
//! generators, a sharpness factor `S ≥ 1`, and a center scale `R₀`, the
//! goal is a scale `R > 0` and an exact per-generator split
//! `v_i = small_i + sparse_i` such that, with `P_small` generated by the
//! small parts over the pivot coordinates and `P_sparse` by the sparse
//! parts:
//!
//! * **smallness** — every element `y ∈ P_small` satisfies `|y| ≤ R/S`;
//! * **sparseness** — any two distinct elements of the `S`-fold sumset of
//!   `P_sparse` differ by at least `R·S`; equivalently, the coefficient
//!   difference box with per-coordinate widths `S·(M'_i − M_i)` has no
//!   non-zero value of magnitude below `R·S`;
//! * **covering** — `P ⊆ P_small + P_sparse`, witnessed coefficient-wise
//!   by the split itself (the coefficients of `x ∈ P` applied to the small
//!   parts give `y ∈ P_small`, to the sparse parts give `z ∈ P_sparse`,
//!   and `y + z = x` exactly).
//!
//! Construction at a fixed scale: a coefficient vector `m` is a *small
//! relation* when `2S·|Σ m_i v_i| ≤ R`. The scan enumerates coefficient
//! boxes with caps escalating as `min(b^t·M_i, 10³)`, keeps rank-increasing
//! relations only, and stops when the kernel rank is stable across two
//! consecutive escalations. With `B` the resulting relation basis of rank
//! `r` and `I` the lexicographically first `r`-subset of columns with
//! `det B_I ≠ 0`, solving `B_I u = B v` exactly yields the small drifts:
//! pivot `i` splits as `(u_slot, v_i − u_slot)`, non-pivots as `(0, v_j)`.
//! Every basis relation then vanishes identically on the sparse parts,
//! which is what pushes the sparse part onto a coarse lattice. A full-rank
//! kernel gives `u = v` exactly, so `P_small = P` and `P_sparse` collapses
//! to the rank-0 zero gap; an empty kernel gives `P_small = {0}` and
//! `P_sparse = P`.
//!
//! Scales are tried along the geometric ladder `R = R₀·(S·V)^j` for
//! ascending `j ∈ [−span, span]` (`V` the volume of `P`); the first rung
//! whose decomposition passes [`verify_discretization`] wins, making the
//! result the smallest verified rung. The verifier is a pure function of
//! the serializable [`DiscretizationResult`], so tests can tamper with any
//! field and watch the matching clause fail.

use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact_linalg::{
    self, rat_to_string, serde_int, serde_int_mat, serde_rat, Matrix, SolveOutcome,
};
use crate::gap::{self, Gap};
use crate::randmat::splitmix64;
use crate::report::VerifyReport;
use crate::{Int, Rat};

/// Largest admissible input rank.
pub const DISCRETIZE_RANK_CAP: usize = 4;
/// Per-coordinate cap on the kernel-scan box.
pub const KERNEL_COORD_CAP: u64 = 1_000;
/// Volume budget for one kernel-scan escalation.
pub const KERNEL_VOLUME_CAP: u64 = 10_000_000;
/// Largest ladder half-width.
pub const LADDER_SPAN_CAP: u32 = 16;
/// Full-enumeration budget for the covering clause.
pub const COVER_ENUM_CAP: u64 = 200_000;
/// Sample count for the covering clause past the enumeration budget.
pub const COVER_SAMPLES: u64 = 4_096;
/// Node budget for the exact sparseness search.
pub const SPARSE_NODE_CAP: u64 = 2_000_000;
/// Sample count for the sparseness fallback.
pub const SPARSE_SAMPLES: u64 = 4_096;
/// Cross-check enumeration budget for the smallness clause.
pub const SMALL_ENUM_CAP: u64 = 100_000;
/// Deterministic seed for verification sampling ("lowodisc" in ASCII).
const SAMPLE_SEED: u64 = 0x6c6f_776f_6469_7363;

/// Exact split of one input generator: `generator = small + sparse`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorSplit {
    #[serde(with = "serde_rat")]
    pub small: Rat,
    #[serde(with = "serde_rat")]
    pub sparse: Rat,
}

/// A verified-scale decomposition of a symmetric integer GAP.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscretizationResult {
    pub input: Gap,
    /// Sharpness factor `S`.
    pub s: u64,
    /// Escalation base `b` for the kernel-scan coefficient caps.
    pub b: u64,
    /// Requested center scale `R₀`.
    #[serde(with = "serde_int")]
    pub r0: Int,
    /// The verified scale `R = R₀·(S·V)^rung`.
    #[serde(with = "serde_rat")]
    pub scale: Rat,
    /// Ladder index (0 for a direct single-scale call).
    pub rung: i64,
    /// Rank of the small-relation kernel at this scale.
    pub kernel_rank: u64,
    /// The rank-increasing relation rows found by the kernel scan.
    #[serde(with = "serde_int_mat")]
    pub kernel_basis: Vec<Vec<Int>>,
    /// Pivot columns `I` (strictly increasing).
    pub pivots: Vec<u64>,
    /// Per-generator exact split; index-aligned with the input generators.
    pub decomposition: Vec<GeneratorSplit>,
    /// `P_small`: the small drifts over the pivot bounds.
    pub small: Gap,
    /// `P_sparse`: all coordinates with pivot generators replaced by their
    /// sparse parts, or the rank-0 zero gap when every sparse part is 0.
    pub sparse: Gap,
}

/// Clear denominators: returns `(G_i = D·g_i, D)` with `D` the lcm of the
/// generators' denominators.
fn cleared_integers(generators: &[Rat]) -> (Vec<Int>, Int) {
    let mut denom = Int::one();
    for g in generators {
        denom = denom.lcm(g.denom());
    }
    let gens = generators
        .iter()
        .map(|g| {
            let cleared = g * Rat::from(denom.clone());
            debug_assert!(cleared.is_integer());
            cleared.to_integer()
        })
        .collect();
    (gens, denom)
}

/// Scan for small relations `2S·|Σ m_i v_i| ≤ R` over coefficient boxes
/// with caps escalating by powers of `b`, keeping rank-increasing rows
/// only; stops at full rank, at rank stabilization across consecutive
/// escalations, or at the volume budget.
fn kernel_scan(p: &Gap, s: u64, b: u64, scale: &Rat) -> Result<Vec<Vec<Int>>> {
    let d = p.rank();
    if d == 0 {
        return Ok(Vec::new());
    }
    let (gens, denom) = cleared_integers(p.generators());
    // 2S·|Σ m_i G_i| ≤ D·R, kept exact as a rational threshold.
    let threshold = Rat::from(denom) * scale;
    let two_s = Int::from(2 * s);
    let coord_cap = Int::from(KERNEL_COORD_CAP);
    let mut basis: Vec<Vec<Int>> = Vec::new();
    let mut prev_rank: Option<usize> = None;
    let mut escalation: u32 = 0;
    loop {
        let cap_t = Int::from(b).pow(escalation);
        let upper: Vec<Int> = p
            .upper()
            .iter()
            .map(|m| (m * &cap_t).min(coord_cap.clone()))
            .collect();
        let volume: Int = upper.iter().map(|m| Int::from(2) * m + 1).product();
        if volume > Int::from(KERNEL_VOLUME_CAP) {
            break;
        }
        let lower: Vec<Int> = upper.iter().map(|m| -m.clone()).collect();
        gap::for_each_box_sum(&gens, &lower, &upper, |sum, coeffs| {
            if basis.len() == d {
                return true;
            }
            if coeffs.iter().all(|c| c.is_zero()) {
                return false;
            }
            if Rat::from(&two_s * sum.abs()) <= threshold {
                let mut rows = basis.clone();
                rows.push(coeffs.to_vec());
                let m = Matrix::from_nested(&rows).expect("rectangular relation rows");
                if exact_linalg::rank_exact(&m) == rows.len() {
                    basis.push(coeffs.to_vec());
                }
            }
            false
        });
        let rank = basis.len();
        if rank == d || prev_rank == Some(rank) {
            break;
        }
        prev_rank = Some(rank);
        escalation += 1;
    }
    Ok(basis)
}

/// Rows of `basis` restricted to the given columns.
fn subset_columns(basis: &[Vec<Int>], cols: &[usize]) -> Vec<Vec<Int>> {
    basis
        .iter()
        .map(|row| cols.iter().map(|&j| row[j].clone()).collect())
        .collect()
}

/// Lexicographically first `r`-subset of the `d` columns on which the
/// relation basis is invertible. Exists because the rows are independent.
fn first_invertible_subset(basis: &[Vec<Int>], d: usize) -> Result<Vec<usize>> {
    let r = basis.len();
    let mut combo: Vec<usize> = (0..r).collect();
    loop {
        let m = Matrix::from_nested(&subset_columns(basis, &combo))?;
        if !exact_linalg::det_exact(&m)?.is_zero() {
            return Ok(combo);
        }
        // Advance to the next combination in lexicographic order.
        let mut i = r;
        loop {
            if i == 0 {
                return Err(Error::domain(
                    "kernel basis has no invertible column subset",
                ));
            }
            i -= 1;
            if combo[i] != i + d - r {
                combo[i] += 1;
                for j in i + 1..r {
                    combo[j] = combo[j - 1] + 1;
                }
                break;
            }
        }
    }
}

fn validate_input(p: &Gap, s: u64, b: u64) -> Result<()> {
    if !p.is_symmetric() {
        return Err(Error::domain("discretization requires a symmetric gap"));
    }
    if p.rank() > DISCRETIZE_RANK_CAP {
        return Err(Error::domain(format!(
            "discretization supports rank <= {DISCRETIZE_RANK_CAP}, got {}",
            p.rank()
        )));
    }
    if p.generators().iter().any(|g| !g.is_integer()) {
        return Err(Error::domain("discretization requires integer generators"));
    }
    if s == 0 {
        return Err(Error::domain("sharpness factor must be >= 1"));
    }
    if b < 2 {
        return Err(Error::domain("escalation base must be >= 2"));
    }
    Ok(())
}

/// Build the decomposition of `p` at one fixed scale (no verification).
pub fn discretize_at(
    p: &Gap,
    s: u64,
    b: u64,
    r0: &Int,
    scale: &Rat,
    rung: i64,
) -> Result<DiscretizationResult> {
    validate_input(p, s, b)?;
    if !r0.is_positive() || !scale.is_positive() {
        return Err(Error::domain("scales must be positive"));
    }
    let d = p.rank();
    let basis = kernel_scan(p, s, b, scale)?;
    let r = basis.len();
    let pivots: Vec<usize> = if r == 0 {
        Vec::new()
    } else {
        first_invertible_subset(&basis, d)?
    };
    let v = p.generators();
    let u: Vec<Rat> = if r == 0 {
        Vec::new()
    } else {
        let b_mat = Matrix::from_nested(&subset_columns(&basis, &pivots))?;
        let rhs: Vec<Rat> = basis
            .iter()
            .map(|row| {
                row.iter()
                    .zip(v)
                    .fold(Rat::zero(), |acc, (c, g)| acc + Rat::from(c.clone()) * g)
            })
            .collect();
        match exact_linalg::solve_rational(&b_mat, &rhs)? {
            SolveOutcome::Unique(u) => u,
            _ => return Err(Error::domain("pivot submatrix unexpectedly singular")),
        }
    };
    let mut decomposition: Vec<GeneratorSplit> = v
        .iter()
        .map(|g| GeneratorSplit {
            small: Rat::zero(),
            sparse: g.clone(),
        })
        .collect();
    for (slot, &i) in pivots.iter().enumerate() {
        decomposition[i] = GeneratorSplit {
            small: u[slot].clone(),
            sparse: &v[i] - &u[slot],
        };
    }
    let small = Gap::new(
        Rat::zero(),
        u,
        pivots.iter().map(|&i| p.lower()[i].clone()).collect(),
        pivots.iter().map(|&i| p.upper()[i].clone()).collect(),
    )?;
    let sparse = if decomposition.iter().all(|split| split.sparse.is_zero()) {
        Gap::zero()
    } else {
        Gap::new(
            Rat::zero(),
            decomposition
                .iter()
                .map(|split| split.sparse.clone())
                .collect(),
            p.lower().to_vec(),
            p.upper().to_vec(),
        )?
    };
    Ok(DiscretizationResult {
        input: p.clone(),
        s,
        b,
        r0: r0.clone(),
        scale: scale.clone(),
        rung,
        kernel_rank: r as u64,
        kernel_basis: basis,
        pivots: pivots.iter().map(|&i| i as u64).collect(),
        decomposition,
        small,
        sparse,
    })
}

/// Discretize along the geometric scale ladder `R = R₀·(S·V)^j`, ascending
/// `j ∈ [−span, span]`; the first rung that verifies wins (so the result
/// uses the smallest verified rung).
pub fn discretize(
    p: &Gap,
    s: u64,
    b: u64,
    r0: &Int,
    span: u32,
) -> Result<(DiscretizationResult, VerifyReport)> {
    validate_input(p, s, b)?;
    if !r0.is_positive() {
        return Err(Error::domain("r0 must be positive"));
    }
    if span > LADDER_SPAN_CAP {
        return Err(Error::domain(format!(
            "ladder span is limited to {LADDER_SPAN_CAP}"
        )));
    }
    let step = Rat::from(Int::from(s) * p.volume());
    let span: i64 = if step.is_one() { 0 } else { span as i64 };
    let mut notes: Vec<String> = Vec::new();
    for j in -span..=span {
        let scale = Rat::from(r0.clone()) * step.pow(j as i32);
        let result = discretize_at(p, s, b, r0, &scale, j)?;
        let report = verify_discretization(&result)?;
        if report.ok {
            return Ok((result, report));
        }
        let first_fail = report
            .clauses
            .iter()
            .find(|c| !c.ok)
            .map(|c| c.name.clone())
            .unwrap_or_default();
        notes.push(format!(
            "rung {j} (R = {}) failed {first_fail}",
            rat_to_string(&scale)
        ));
    }
    Err(Error::no_convergence(format!(
        "no rung of the scale ladder verified: {}",
        notes.join("; ")
    )))
}

/// Deterministic counter-based sampling word.
fn sample_word(seed: u64, trial: u64, coord: u64) -> u64 {
    splitmix64(splitmix64(seed.wrapping_add(trial)).wrapping_add(coord))
}

/// Map a 64-bit word uniformly into `[lo, hi]` (floor of `word·width/2⁶⁴`).
fn sample_in_range(word: u64, lo: &Int, hi: &Int) -> Int {
    let width = hi - lo + 1;
    lo + ((Int::from(word) * width) >> 64u32)
}

/// Exact branch-and-bound search for the minimum non-zero `|Σ c_i G_i|`
/// over the box `|c_i| ≤ N_i`: coordinates ordered by reach `N_i·|G_i|`
/// descending, each level pivoting on the coefficient nearest to
/// `−partial/G_i` (where `|partial + c·G_i|` is minimal, and monotone
/// moving outward on each side) and expanding outward with the
/// suffix-reach prune `|value| − Σ_rest N_j·|G_j| ≥ best`.
struct SparseSearch {
    gens: Vec<Int>,
    bounds: Vec<Int>,
    /// `reach[i] = Σ_{j ≥ i} bounds[j]·|gens[j]|` (one past the end: 0).
    reach: Vec<Int>,
    best: Option<Int>,
    nodes: u64,
    exhausted: bool,
}

impl SparseSearch {
    fn run(gens_in: &[Int], bounds_in: &[Int]) -> SparseSearch {
        let mut order: Vec<usize> = (0..gens_in.len()).collect();
        order.sort_by(|&a, &b| {
            let ra = &bounds_in[a] * gens_in[a].abs();
            let rb = &bounds_in[b] * gens_in[b].abs();
            rb.cmp(&ra)
        });
        let gens: Vec<Int> = order.iter().map(|&i| gens_in[i].clone()).collect();
        let bounds: Vec<Int> = order.iter().map(|&i| bounds_in[i].clone()).collect();
        let mut reach = vec![Int::zero(); gens.len() + 1];
        for i in (0..gens.len()).rev() {
            reach[i] = &reach[i + 1] + &bounds[i] * gens[i].abs();
        }
        let mut search = SparseSearch {
            gens,
            bounds,
            reach,
            best: None,
            nodes: 0,
            exhausted: false,
        };
        search.dfs(0, Int::zero());
        search
    }

    fn prunable(&self, level: usize, value: &Int) -> bool {
        match &self.best {
            Some(best) => &(value.abs() - &self.reach[level + 1]) >= best,
            None => false,
        }
    }

    fn dfs(&mut self, level: usize, partial: Int) {
        if self.exhausted {
            return;
        }
        self.nodes += 1;
        if self.nodes > SPARSE_NODE_CAP {
            self.exhausted = true;
            return;
        }
        if level == self.gens.len() {
            if !partial.is_zero() {
                let v = partial.abs();
                if self.best.as_ref().map_or(true, |b| &v < b) {
                    self.best = Some(v);
                }
            }
            return;
        }
        let g = self.gens[level].clone();
        let n = self.bounds[level].clone();
        if g.is_zero() {
            // The coefficient cannot change the value; one branch suffices.
            self.dfs(level + 1, partial);
            return;
        }
        let center = Rat::new(-partial.clone(), g.clone())
            .round()
            .to_integer()
            .max(-n.clone())
            .min(n.clone());
        let mut c = center.clone();
        while c <= n {
            let value = &partial + &c * &g;
            if self.prunable(level, &value) {
                break;
            }
            self.dfs(level + 1, value);
            if self.exhausted {
                return;
            }
            c += 1;
        }
        let mut c = center - 1;
        while c >= -n.clone() {
            let value = &partial + &c * &g;
            if self.prunable(level, &value) {
                break;
            }
            self.dfs(level + 1, value);
            if self.exhausted {
                return;
            }
            c -= 1;
        }
    }
}

/// Verify a decomposition clause by clause:
///
/// 1. `scale` — positive scales; reports the achieved `R`, the rung, and
///    the ratio `R/R₀` (the admissible exponent is left open, so this
///    clause is informational);
/// 2. `covering` — the per-generator splits sum exactly to the input
///    generators, both parts' shapes follow the splits, and enumerated (or
///    sampled) coefficient tuples re-evaluate to `y + z = x`;
/// 3. `smallness` — every element of `P_small` has `|y| ≤ R/S`, by exact
///    closed-form box extremes plus a cross-enumeration when affordable;
/// 4. `sparseness` — distinct elements of the `S`-fold sumset of
///    `P_sparse` are separated by at least `R·S`, by exact search over the
///    difference box or a sampled fallback with reported coverage;
/// 5. `rank-volume` — both parts stay within the input's rank and volume.
pub fn verify_discretization(result: &DiscretizationResult) -> Result<VerifyReport> {
    let mut report = VerifyReport::new("discretize");
    let p = &result.input;
    let d = p.rank();
    let scale = &result.scale;
    let s_int = Int::from(result.s);
    let pivots: Vec<usize> = result.pivots.iter().map(|&i| i as usize).collect();

    // ---- scale ----
    let scale_ok = scale.is_positive() && result.r0.is_positive() && result.s >= 1;
    let ratio = scale / Rat::from(result.r0.clone());
    report.push(
        "scale",
        scale_ok,
        format!(
            "R = {} at rung {} (R/R0 = {}, ladder ratio S*V = {})",
            rat_to_string(scale),
            result.rung,
            rat_to_string(&ratio),
            Int::from(result.s) * p.volume()
        ),
    );

    // ---- covering ----
    let splits = &result.decomposition;
    let mut structural = p.is_symmetric()
        && splits.len() == d
        && pivots.windows(2).all(|w| w[0] < w[1])
        && pivots.iter().all(|&i| i < d)
        && splits
            .iter()
            .zip(p.generators())
            .all(|(split, g)| &split.small + &split.sparse == *g)
        && (0..d)
            .filter(|i| !pivots.contains(i))
            .all(|i| splits[i].small.is_zero());
    // P_small: the small parts over the pivot coordinates and bounds.
    structural &= result.small.offset().is_zero()
        && result.small.rank() == pivots.len()
        && pivots.iter().enumerate().all(|(slot, &i)| {
            result.small.generators()[slot] == splits[i].small
                && result.small.lower()[slot] == p.lower()[i]
                && result.small.upper()[slot] == p.upper()[i]
        });
    // P_sparse: either the rank-0 zero gap (all sparse parts zero) or all
    // coordinates with the sparse parts as generators and p's bounds.
    let sparse_collapsed = result.sparse.rank() == 0;
    structural &= result.sparse.offset().is_zero()
        && if sparse_collapsed {
            splits.iter().all(|split| split.sparse.is_zero())
        } else {
            result.sparse.rank() == d
                && result.sparse.lower() == p.lower()
                && result.sparse.upper() == p.upper()
                && (0..d).all(|i| result.sparse.generators()[i] == splits[i].sparse)
        };
    // Pointwise witnesses: y + z == x over enumerated or sampled tuples,
    // computed in a common denominator-cleared integer frame.
    let mut pointwise = true;
    let mut checked: u64 = 0;
    let mut fraction = 1.0f64;
    if structural && d > 0 {
        let mut all_gens: Vec<Rat> = p.generators().to_vec();
        all_gens.extend(splits.iter().map(|split| split.small.clone()));
        all_gens.extend(splits.iter().map(|split| split.sparse.clone()));
        let (cleared, _) = cleared_integers(&all_gens);
        let (pv, rest) = cleared.split_at(d);
        let (small_parts, sparse_parts) = rest.split_at(d);
        let eval = |coeffs: &[Int]| -> bool {
            let x: Int = coeffs.iter().zip(pv).map(|(m, g)| m * g).sum();
            let y: Int = coeffs.iter().zip(small_parts).map(|(m, g)| m * g).sum();
            let z: Int = coeffs.iter().zip(sparse_parts).map(|(m, g)| m * g).sum();
            y + z == x
        };
        let volume = p.volume();
        if volume <= Int::from(COVER_ENUM_CAP) {
            gap::for_each_box_sum(pv, p.lower(), p.upper(), |_, coeffs| {
                checked += 1;
                pointwise = eval(coeffs);
                !pointwise
            });
        } else {
            fraction = COVER_SAMPLES as f64 / volume.to_f64().unwrap_or(f64::INFINITY);
            for trial in 0..COVER_SAMPLES {
                let coeffs: Vec<Int> = (0..d)
                    .map(|i| {
                        sample_in_range(
                            sample_word(SAMPLE_SEED, trial, i as u64),
                            &p.lower()[i],
                            &p.upper()[i],
                        )
                    })
                    .collect();
                checked += 1;
                if !eval(&coeffs) {
                    pointwise = false;
                    break;
                }
            }
        }
    }
    report.push(
        "covering",
        structural && pointwise,
        format!(
            "split identities hold; {checked} coefficient tuples re-evaluated \
             (coverage fraction {fraction:.3e})"
        ),
    );

    // ---- smallness ----
    let threshold = scale / Rat::from(s_int.clone());
    // Exact extremes over the box (coordinates independent, so extremes
    // are attained termwise), offset included.
    let mut value_lo = result.small.offset().clone();
    let mut value_hi = result.small.offset().clone();
    for ((g, lo), hi) in result
        .small
        .generators()
        .iter()
        .zip(result.small.lower())
        .zip(result.small.upper())
    {
        let a = Rat::from(lo.clone()) * g;
        let b = Rat::from(hi.clone()) * g;
        if a <= b {
            value_lo += a;
            value_hi += b;
        } else {
            value_lo += b;
            value_hi += a;
        }
    }
    let max_abs = value_lo.abs().max(value_hi.abs());
    let mut small_ok = max_abs <= threshold;
    let mut small_detail = format!(
        "max |y| = {} vs R/S = {}",
        rat_to_string(&max_abs),
        rat_to_string(&threshold)
    );
    if result.small.rank() > 0 && result.small.volume() <= Int::from(SMALL_ENUM_CAP) {
        // Cross-check every element by enumeration.
        let (small_cleared, small_denom) = cleared_integers(result.small.generators());
        let offset = result.small.offset().clone();
        let mut all_in = true;
        gap::for_each_box_sum(
            &small_cleared,
            result.small.lower(),
            result.small.upper(),
            |sum, _| {
                let y = &offset + Rat::new(sum.clone(), small_denom.clone());
                all_in = y.abs() <= threshold;
                !all_in
            },
        );
        small_ok = small_ok && all_in;
        small_detail.push_str("; every enumerated element re-checked");
    }
    report.push("smallness", small_ok, small_detail);

    // ---- sparseness ----
    let (sparse_ok, sparse_detail) = if result.sparse.rank() == 0 {
        (true, "sparse part is the zero gap".to_string())
    } else {
        let (sparse_cleared, sparse_denom) = cleared_integers(result.sparse.generators());
        // Pairwise differences of the S-fold sumset live in the box with
        // per-coordinate widths S·(M'_i − M_i); the threshold is R·S.
        let widths: Vec<Int> = result
            .sparse
            .upper()
            .iter()
            .zip(result.sparse.lower())
            .map(|(hi, lo)| (hi - lo) * &s_int)
            .collect();
        let threshold = scale * Rat::from(s_int.clone());
        let as_value = |cleared: &Int| Rat::new(cleared.clone(), sparse_denom.clone());
        let search = SparseSearch::run(&sparse_cleared, &widths);
        if !search.exhausted {
            match &search.best {
                None => (
                    true,
                    "no non-zero value among sumset differences".to_string(),
                ),
                Some(min) => (
                    as_value(min) >= threshold,
                    format!(
                        "exact min non-zero |difference| = {} vs R*S = {}",
                        rat_to_string(&as_value(min)),
                        rat_to_string(&threshold)
                    ),
                ),
            }
        } else {
            // Budget hit: combine the partial search with samples.
            let mut min_seen = search.best.clone();
            for trial in 0..SPARSE_SAMPLES {
                let mut value = Int::zero();
                for (i, g) in sparse_cleared.iter().enumerate() {
                    let c = sample_in_range(
                        sample_word(SAMPLE_SEED ^ 0x5a5a, trial, i as u64),
                        &(-widths[i].clone()),
                        &widths[i],
                    );
                    value += c * g;
                }
                if !value.is_zero() {
                    let a = value.abs();
                    if min_seen.as_ref().map_or(true, |b| &a < b) {
                        min_seen = Some(a);
                    }
                }
            }
            let volume: Int = widths.iter().map(|w| Int::from(2) * w + 1).product();
            let frac = (SPARSE_NODE_CAP + SPARSE_SAMPLES) as f64
                / volume.to_f64().unwrap_or(f64::INFINITY);
            match min_seen {
                Some(min) => (
                    as_value(&min) >= threshold,
                    format!(
                        "sampled min non-zero |difference| = {} vs R*S = {} \
                         (coverage fraction {frac:.3e})",
                        rat_to_string(&as_value(&min)),
                        rat_to_string(&threshold)
                    ),
                ),
                None => (
                    true,
                    format!(
                        "no non-zero value among samples (coverage fraction {frac:.3e})"
                    ),
                ),
            }
        }
    };
    report.push("sparseness", sparse_ok, sparse_detail);

    // ---- rank-volume ----
    let rv_ok = result.kernel_rank as usize == pivots.len()
        && result.small.rank() <= d
        && result.sparse.rank() <= d
        && result.small.volume() <= p.volume()
        && result.sparse.volume() <= p.volume();
    report.push(
        "rank-volume",
        rv_ok,
        format!(
            "kernel rank {}, small rank {} / volume {}, sparse rank {} / volume {}, \
             input rank {d} / volume {}",
            result.kernel_rank,
            result.small.rank(),
            result.small.volume(),
            result.sparse.rank(),
            result.sparse.volume(),
            p.volume()
        ),
    );
    Ok(report)
}
