//! Inverse structure extraction: from high concentration to explicit
//! arithmetic structure, with machine-checkable certificates.
//!
//! Forward Littlewood–Offord theory bounds how concentrated a walk can be;
//! the inverse theory explains concentration: when `P_μ(v)` is large, the
//! step multiset `v` must be commensurate with a low-complexity object.
//! Three extraction algorithms, in increasing strength:
//!
//! * **Zeroth** ([`zeroth_inverse`]): a greedy scan builds a 1-dissociated
//!   sublist `w ⊆ v` with every element of `v` in the coefficient cube
//!   `Q(w, 1) = {Σ m_i w_i : m_i ∈ {−1,0,1}}`. Because `w` is 1-dissociated
//!   its `2^{|w|}` sign sums are distinct, so `P_1(w) = 2^{−|w|}` exactly,
//!   and `w ⊆ v` forces `P_1(v) ≤ 2^{−|w|}`: the certificate bound holds
//!   unconditionally, and reads as "concentration `≥ 2^{−d}` implies cube
//!   structure with at most `d` generators".
//!
//! * **First** ([`first_inverse`]): a loop over *`k`-dissociatedly
//!   extending* elements — those `x` for which `w ∪ {x}` is still
//!   `k`-dissociated — grows a skeleton `w`. When fewer than `k²`
//!   occurrences extend, the loop halts: every non-extender `x` admits a
//!   relation forcing `τx ∈ Q(w, k)` for some torsion `1 ≤ τ ≤ k`, recorded
//!   with an explicit coefficient witness; the extenders (fewer than `k²`
//!   of them, unconditionally) are reported as the exceptional multiset.
//!
//! * **Second** ([`second_inverse`]): upgrades dilate-coverage to genuine
//!   membership in a single symmetric GAP of rank `≤ d − 1`. Starting from
//!   `Q_0 = Q(w, k²)`, stages locate elements of torsion `≥ K` relative to
//!   the doubled gap `2Q_{i−1}`, absorb one of them (`W_i`, with torsion
//!   `τ_i ∈ [K, k]`) via `Q_i = Q_{i−1} + Q(W_i, τ_i²)`, delete `k²`
//!   high-torsion occurrences, and track the coefficient budget
//!   `L_i = L_{i−1}(τ_i + τ_i²)`, `L_0 = k²`. When fewer than `k²`
//!   high-torsion occurrences remain after `D` stages, the final gap is
//!
//!   `q = (1/s) · Q(w, 2·K!·L_D)`, `s = K! · Π τ_j`,
//!
//!   whose generators are `w_j / s`: division by `K!` clears every small
//!   torsion `τ < K`, and the `Π τ_j` factor clears the stage torsions.
//!   Every element of `v` is then re-tested for membership in `q`
//!   exhaustively (including stage-1 leftovers and deleted occurrences);
//!   the elements that genuinely fail are the exceptional multiset, with
//!   witnesses recorded for all members.
//!
//! Certificates carry inputs, selections, witnesses, and traces; the
//! independent checker [`verify_certificate`] re-validates every clause
//! from scratch (dissociativity included) and reports each clause
//! separately. Failure outcomes — rank overflow past `d − 1`, or stage
//! count past the `(d+1)·log_K k + 1` guard — are data, not panics.

use std::collections::HashSet;

use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact_linalg::{rat_to_string, serde_int, serde_int_vec, serde_rat};
use crate::gap::{self, Gap};
use crate::report::VerifyReport;
use crate::walk::Multiset;
use crate::{Int, Rat};

/// Witness that an element lies in the generator cube: `Σ coeffs_j w_j =
/// element` with every coefficient in `{−1, 0, 1}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CubeWitness {
    #[serde(with = "serde_int")]
    pub element: Int,
    #[serde(with = "serde_int_vec")]
    pub coeffs: Vec<Int>,
}

/// Certificate of the zeroth inverse: a 1-dissociated `selected ⊆ input`
/// whose cube `Q(selected, 1)` covers every input value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CubeCertificate {
    pub input: Multiset,
    #[serde(with = "serde_int_vec")]
    pub selected: Vec<Int>,
    /// One witness per distinct input value.
    pub witnesses: Vec<CubeWitness>,
    /// `2^{−|selected|}`, an unconditional upper bound for `P_1(input)`.
    #[serde(with = "serde_rat")]
    pub concentration_bound: Rat,
}

/// Witness that a dilate of an element lies in the gap:
/// `Σ coeffs_j g_j = tau · element` within the gap's coefficient bounds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverWitness {
    #[serde(with = "serde_int")]
    pub element: Int,
    pub tau: u64,
    #[serde(with = "serde_int_vec")]
    pub coeffs: Vec<Int>,
}

/// Certificate of the first inverse: a `k`-dissociated skeleton whose box
/// `Q(selected, k)` covers a dilate of every non-exceptional value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DilateCoverCertificate {
    pub input: Multiset,
    pub k: u64,
    /// Rank cap `d`: the skeleton keeps `|selected| ≤ d − 1`.
    pub rank_cap: u64,
    #[serde(with = "serde_int_vec")]
    pub selected: Vec<Int>,
    /// `Q(selected, k)`.
    pub gap: Gap,
    /// One entry per distinct covered value: least torsion and witness.
    pub covered: Vec<CoverWitness>,
    /// The elements that still `k`-dissociatedly extend the skeleton at
    /// halt — fewer than `k²` occurrences, unconditionally.
    pub exceptional: Multiset,
    pub exceptional_count: u64,
}

/// Witness of plain gap membership: `Σ coeffs_j g_j = element`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemberWitness {
    #[serde(with = "serde_int")]
    pub element: Int,
    #[serde(with = "serde_int_vec")]
    pub coeffs: Vec<Int>,
}

/// One absorption stage of the second inverse.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTrace {
    /// The absorbed element `W_i`.
    #[serde(with = "serde_int")]
    pub chosen: Int,
    /// Its torsion `τ_i ∈ [K, k]` relative to `2Q_{i−1}`.
    pub tau: u64,
    /// Coefficient budget after the stage: `L_i = L_{i−1}(τ_i + τ_i²)`.
    #[serde(with = "serde_int")]
    pub coeff_bound: Int,
    /// High-torsion occurrences seen at the start of the stage.
    pub high_torsion_count: u64,
    /// The `k²` high-torsion occurrences deleted this stage.
    pub deleted: Multiset,
}

/// Certificate of the second inverse: a single symmetric GAP of rank
/// `≤ d − 1` containing all but the exceptional input values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SecondCertificate {
    pub input: Multiset,
    pub k: u64,
    /// Rank cap `d`.
    pub rank_cap: u64,
    /// Torsion floor `K`.
    pub torsion_floor: u64,
    /// Slack exponent `ε` for the volume / scale / exceptional bounds.
    pub epsilon: f64,
    /// Stage-1 skeleton `w`; the final gap's generators are `w_j / scale`.
    #[serde(with = "serde_int_vec")]
    pub selected: Vec<Int>,
    /// Elements left uncovered by stage 1 (re-tested at the end anyway).
    pub stage1_exceptional: Multiset,
    pub stages: Vec<StageTrace>,
    /// `s = K! · Π τ_j`.
    #[serde(with = "serde_int")]
    pub scale: Int,
    /// The final gap `q = (1/s)·Q(w, 2·K!·L_D)`.
    pub gap: Gap,
    /// Membership witnesses, one per distinct member value.
    pub members: Vec<MemberWitness>,
    /// Values of `v` that genuinely fail membership in `q`.
    pub exceptional: Multiset,
    pub exceptional_count: u64,
}

/// Any certificate, tagged by the producing algorithm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm", rename_all = "snake_case")]
pub enum Certificate {
    Zeroth(CubeCertificate),
    First(DilateCoverCertificate),
    Second(SecondCertificate),
}

/// Structured failure: the algorithm halted without a certificate, for a
/// reason that is part of the contract rather than an error.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FailureReport {
    pub kind: FailureKind,
    pub detail: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureKind {
    /// The skeleton would need rank `d`, breaking the `≤ d − 1` contract.
    RankOverflow,
    /// The stage count exceeded `(d+1)·log_K k + 1`.
    IterationGuard,
}

/// Certificate-or-failure outcome of the structured inverses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Outcome<C> {
    Certificate { certificate: C },
    Failure { failure: FailureReport },
}

impl<C> Outcome<C> {
    pub fn certificate(&self) -> Option<&C> {
        match self {
            Outcome::Certificate { certificate } => Some(certificate),
            Outcome::Failure { .. } => None,
        }
    }

    pub fn failure(&self) -> Option<&FailureReport> {
        match self {
            Outcome::Certificate { .. } => None,
            Outcome::Failure { failure } => Some(failure),
        }
    }
}

/// Scan order of the zeroth inverse: decreasing `|value|`, ties positive
/// first.
fn zeroth_scan_order(v: &Multiset) -> Vec<Int> {
    let mut values: Vec<Int> = v.iter().map(|(x, _)| x.clone()).collect();
    values.sort_by(|a, b| b.abs().cmp(&a.abs()).then_with(|| b.cmp(a)));
    values
}

/// Membership witness in the cube `Q(w, 1)`.
fn q1_witness(w: &[Int], x: &Int) -> Result<Option<Vec<Int>>> {
    let one = Int::one();
    let lower: Vec<Int> = w.iter().map(|_| -one.clone()).collect();
    let upper: Vec<Int> = w.iter().map(|_| one.clone()).collect();
    gap::box_witness(w, &lower, &upper, x)
}

/// Zeroth inverse: greedily build a 1-dissociated `w ⊆ v` with
/// `v ⊆ Q(w, 1)` and certify `P_1(v) ≤ 2^{−|w|}`.
///
/// Invariant kept by the scan: if `x ∉ Q(w, 1)` and `w` is 1-dissociated,
/// then `w ∪ {x}` is again 1-dissociated (a vanishing `{−1,0,1}`
/// combination using `x` non-trivially would place `x` in `Q(w, 1)`).
/// Earlier witnesses survive later appends by zero-padding.
pub fn zeroth_inverse(v: &Multiset) -> Result<CubeCertificate> {
    let mut selected: Vec<Int> = Vec::new();
    let mut witnesses: Vec<(Int, Vec<Int>)> = Vec::new();
    for x in zeroth_scan_order(v) {
        let coeffs = match q1_witness(&selected, &x)? {
            Some(c) => c,
            None => {
                selected.push(x.clone());
                let mut c = vec![Int::zero(); selected.len()];
                *c.last_mut().expect("just pushed") = Int::one();
                c
            }
        };
        witnesses.push((x, coeffs));
    }
    let rank = selected.len();
    let witnesses = witnesses
        .into_iter()
        .map(|(element, mut coeffs)| {
            coeffs.resize(rank, Int::zero());
            CubeWitness { element, coeffs }
        })
        .collect();
    Ok(CubeCertificate {
        input: v.clone(),
        selected,
        witnesses,
        concentration_bound: Rat::new(Int::one(), Int::from(2).pow(rank as u32)),
    })
}

/// Preference order among candidate `(value, multiplicity)` pairs: highest
/// multiplicity, then smallest `|value|`, then the positive sign.
fn preference(a: &(Int, u64), b: &(Int, u64)) -> std::cmp::Ordering {
    let (va, ca) = a;
    let (vb, cb) = b;
    cb.cmp(ca)
        .then_with(|| va.abs().cmp(&vb.abs()))
        .then_with(|| vb.cmp(va))
}

/// First inverse: grow a `k`-dissociated skeleton until fewer than `k²`
/// occurrences of `v` still extend it, then certify dilate-coverage
/// (`τx ∈ Q(w, k)`, `1 ≤ τ ≤ k`) for every non-extender.
pub fn first_inverse(v: &Multiset, k: u64, d: u64) -> Result<Outcome<DilateCoverCertificate>> {
    if k < 2 {
        return Err(Error::domain("first inverse requires k >= 2"));
    }
    if d == 0 {
        return Err(Error::domain("first inverse requires rank cap d >= 1"));
    }
    let mut selected: Vec<Int> = Vec::new();
    loop {
        let mut extenders: Vec<(Int, u64)> = Vec::new();
        let mut extender_count: u64 = 0;
        for (x, c) in v.iter() {
            let mut candidate = selected.clone();
            candidate.push(x.clone());
            if gap::is_k_dissociated(&candidate, k)? {
                extender_count += c;
                extenders.push((x.clone(), c));
            }
        }
        if extender_count < k * k {
            let gap_box = Gap::q_box(&selected, &Int::from(k))?;
            let exceptional_values: HashSet<Int> =
                extenders.iter().map(|(x, _)| x.clone()).collect();
            let mut covered = Vec::new();
            for (x, _) in v.iter() {
                if exceptional_values.contains(x) {
                    continue;
                }
                let (tau, coeffs) = gap_box
                    .torsion_witness(&Rat::from(x.clone()), 1, k)?
                    .ok_or_else(|| {
                        Error::domain(format!(
                            "invariant violation: non-extending element {x} has no torsion <= k"
                        ))
                    })?;
                covered.push(CoverWitness {
                    element: x.clone(),
                    tau,
                    coeffs,
                });
            }
            let exceptional = Multiset::from_pairs(extenders)?;
            return Ok(Outcome::Certificate {
                certificate: DilateCoverCertificate {
                    input: v.clone(),
                    k,
                    rank_cap: d,
                    selected,
                    gap: gap_box,
                    covered,
                    exceptional,
                    exceptional_count: extender_count,
                },
            });
        }
        if selected.len() as u64 + 1 >= d {
            return Ok(Outcome::Failure {
                failure: FailureReport {
                    kind: FailureKind::RankOverflow,
                    detail: format!(
                        "{extender_count} occurrences still extend a rank-{} skeleton; \
                         appending would reach rank {d} (cap is d-1 = {})",
                        selected.len(),
                        d - 1
                    ),
                },
            });
        }
        extenders.sort_by(preference);
        selected.push(extenders[0].0.clone());
    }
}

/// `n!` as an exact integer.
fn factorial(n: u64) -> Int {
    (1..=n).fold(Int::one(), |acc, i| acc * Int::from(i))
}

/// Natural log of a positive big integer, stable far past f64 range.
fn ln_big(x: &Int) -> f64 {
    debug_assert!(x.is_positive());
    if let Some(f) = x.to_f64() {
        if f.is_finite() {
            return f.ln();
        }
    }
    let shift = x.bits().saturating_sub(64);
    let top = (x >> shift).to_f64().expect("64-bit mantissa fits");
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Second inverse: absorb high-torsion elements stage by stage, then place
/// all of `v` (minus a small exceptional multiset) inside one symmetric GAP
/// `q = (1/s)·Q(w, 2·K!·L_D)` of rank `≤ d − 1`.
pub fn second_inverse(
    v: &Multiset,
    k: u64,
    d: u64,
    torsion_floor: u64,
    epsilon: f64,
) -> Result<Outcome<SecondCertificate>> {
    if k < 2 {
        return Err(Error::domain("second inverse requires k >= 2"));
    }
    if d == 0 {
        return Err(Error::domain("second inverse requires rank cap d >= 1"));
    }
    if torsion_floor < 2 || torsion_floor > k {
        return Err(Error::domain(format!(
            "torsion floor must satisfy 2 <= K <= k, got K = {torsion_floor}, k = {k}"
        )));
    }
    if !(epsilon >= 0.0) {
        return Err(Error::domain("epsilon must be >= 0"));
    }
    // Stage 1: the dissociated skeleton, exactly the first-inverse loop.
    let stage1 = match first_inverse(v, k, d)? {
        Outcome::Certificate { certificate } => certificate,
        Outcome::Failure { failure } => return Ok(Outcome::Failure { failure }),
    };
    let w = stage1.selected.clone();
    // Stage-1 exceptional elements carry no torsion guarantee; they are set
    // aside and re-tested against the final gap below.
    let mut active = v
        .saturating_remove(&stage1.exceptional)
        .expect("exceptional is a sub-multiset of the input");
    let kk_int = Int::from(k * k);
    let mut q_cur = Gap::q_box(&w, &kk_int)?; // Q_0 = Q(w, k²)
    let mut l_cur = kk_int; // L_0 = k²
    let mut scale = factorial(torsion_floor); // running s = K!·Πτ_j
    let mut stages: Vec<StageTrace> = Vec::new();
    let guard =
        (d as f64 + 1.0) * (k as f64).ln() / (torsion_floor as f64).ln() + 1.0;
    loop {
        let doubled = q_cur.iterated_sumset(2)?;
        // Split the active occurrences by torsion against 2Q_{i-1}.
        let mut high: Vec<(Int, u64)> = Vec::new();
        let mut high_count: u64 = 0;
        for (x, c) in active.iter() {
            let xr = Rat::from(x.clone());
            if doubled.torsion_in(&xr, 1, torsion_floor - 1)?.is_none() {
                high.push((x.clone(), c));
                high_count += c;
            }
        }
        if high_count < k * k {
            break;
        }
        if stages.len() as f64 + 1.0 > guard {
            return Ok(Outcome::Failure {
                failure: FailureReport {
                    kind: FailureKind::IterationGuard,
                    detail: format!(
                        "stage {} would exceed the iteration guard (d+1)·log_K k + 1 = {guard:.3}",
                        stages.len() + 1
                    ),
                },
            });
        }
        high.sort_by(preference);
        let chosen = high[0].0.clone();
        // Every active element is stage-1 covered, so its torsion against
        // 2Q_{i-1} ⊇ Q(w, k) is at most k; being high-torsion pins it to
        // [K, k].
        let tau = doubled
            .torsion_in(&Rat::from(chosen.clone()), torsion_floor, k)?
            .ok_or_else(|| {
                Error::domain(format!(
                    "invariant violation: covered element {chosen} has torsion beyond k"
                ))
            })?;
        // Delete k² high-torsion occurrences, in preference order.
        let mut to_delete: Vec<(Int, u64)> = Vec::new();
        let mut budget = k * k;
        for (x, c) in &high {
            if budget == 0 {
                break;
            }
            let take = (*c).min(budget);
            to_delete.push((x.clone(), take));
            budget -= take;
        }
        let deleted = Multiset::from_pairs(to_delete)?;
        active = active
            .saturating_remove(&deleted)
            .expect("deleted occurrences come from the active multiset");
        q_cur = q_cur.minkowski_sum(&Gap::q_box(
            std::slice::from_ref(&chosen),
            &Int::from(tau * tau),
        )?);
        l_cur *= Int::from(tau + tau * tau);
        scale *= Int::from(tau);
        stages.push(StageTrace {
            chosen,
            tau,
            coeff_bound: l_cur.clone(),
            high_torsion_count: high_count,
            deleted,
        });
    }
    // Final gap q = (1/s)·Q(w, 2·K!·L_D).
    let bound = Int::from(2) * factorial(torsion_floor) * &l_cur;
    let generators: Vec<Rat> = w
        .iter()
        .map(|x| Rat::new(x.clone(), scale.clone()))
        .collect();
    let rank = generators.len();
    let q_final = Gap::new(
        Rat::zero(),
        generators,
        vec![-bound.clone(); rank],
        vec![bound; rank],
    )?;
    // Exhaustive membership re-test over all of v — stage-1 exceptional and
    // deleted occurrences included. Actual non-members are the exceptional
    // multiset; members get coefficient witnesses.
    let mut members = Vec::new();
    let mut exceptional_pairs: Vec<(Int, u64)> = Vec::new();
    let mut exceptional_count: u64 = 0;
    for (x, c) in v.iter() {
        match q_final.member_witness(&Rat::from(x.clone()))? {
            Some(coeffs) => members.push(MemberWitness {
                element: x.clone(),
                coeffs,
            }),
            None => {
                exceptional_pairs.push((x.clone(), c));
                exceptional_count += c;
            }
        }
    }
    Ok(Outcome::Certificate {
        certificate: SecondCertificate {
            input: v.clone(),
            k,
            rank_cap: d,
            torsion_floor,
            epsilon,
            selected: w,
            stage1_exceptional: stage1.exceptional,
            stages,
            scale,
            gap: q_final,
            members,
            exceptional: Multiset::from_pairs(exceptional_pairs)?,
            exceptional_count,
        },
    })
}

/// Re-validate a certificate from scratch. Clause failures land in the
/// report; only resource exhaustion inside a sub-check is an `Err`.
pub fn verify_certificate(cert: &Certificate) -> Result<VerifyReport> {
    match cert {
        Certificate::Zeroth(c) => verify_zeroth(c),
        Certificate::First(c) => verify_first(c),
        Certificate::Second(c) => verify_second(c),
    }
}

fn verify_zeroth(c: &CubeCertificate) -> Result<VerifyReport> {
    let mut report = VerifyReport::new("zeroth");
    let rank = c.selected.len();

    let distinct: HashSet<&Int> = c.selected.iter().collect();
    let from_input = c.selected.iter().all(|x| c.input.count_of(x) >= 1);
    report.push(
        "selected-from-input",
        distinct.len() == rank && from_input,
        format!("{rank} selected values, distinct and drawn from the input"),
    );

    let dissociated = gap::is_k_dissociated(&c.selected, 1)?;
    report.push(
        "selected-dissociated",
        dissociated,
        "no vanishing non-trivial {-1,0,1} combination of the selected values".to_string(),
    );

    let witness_values: Vec<&Int> = c.witnesses.iter().map(|w| &w.element).collect();
    let witness_set: HashSet<&Int> = witness_values.iter().copied().collect();
    let input_values: HashSet<&Int> = c.input.iter().map(|(x, _)| x).collect();
    report.push(
        "witness-coverage",
        witness_set == input_values && witness_values.len() == witness_set.len(),
        format!(
            "{} witnesses cover the {} distinct input values exactly once",
            c.witnesses.len(),
            input_values.len()
        ),
    );

    let one = Int::one();
    let mut eval_ok = true;
    for w in &c.witnesses {
        let shaped = w.coeffs.len() == rank && w.coeffs.iter().all(|m| m.abs() <= one);
        let sum: Int = w.coeffs.iter().zip(&c.selected).map(|(m, g)| m * g).sum();
        if !(shaped && sum == w.element) {
            eval_ok = false;
            break;
        }
    }
    report.push(
        "witnesses-evaluate",
        eval_ok,
        "every witness has {-1,0,1} coefficients and sums to its element".to_string(),
    );

    let expected = Rat::new(Int::one(), Int::from(2).pow(rank as u32));
    report.push(
        "bound-value",
        c.concentration_bound == expected,
        format!(
            "claimed bound {} vs 2^-{rank} = {}",
            rat_to_string(&c.concentration_bound),
            rat_to_string(&expected)
        ),
    );
    Ok(report)
}

fn verify_first(c: &DilateCoverCertificate) -> Result<VerifyReport> {
    let mut report = VerifyReport::new("first");
    let rank = c.selected.len();
    let k_int = Int::from(c.k);

    report.push(
        "rank-bound",
        (rank as u64) < c.rank_cap,
        format!("rank {rank} < cap d = {}", c.rank_cap),
    );

    let distinct: HashSet<&Int> = c.selected.iter().collect();
    let from_input = c.selected.iter().all(|x| c.input.count_of(x) >= 1);
    report.push(
        "selected-from-input",
        distinct.len() == rank && from_input,
        format!("{rank} selected values, distinct and drawn from the input"),
    );

    report.push(
        "selected-dissociated",
        gap::is_k_dissociated(&c.selected, c.k)?,
        format!("selected values are {}-dissociated", c.k),
    );

    let expected_gap = Gap::q_box(&c.selected, &k_int)?;
    report.push(
        "gap-form",
        c.gap == expected_gap,
        format!("gap equals Q(selected, {})", c.k),
    );

    let covered_values: Vec<&Int> = c.covered.iter().map(|w| &w.element).collect();
    let covered_set: HashSet<&Int> = covered_values.iter().copied().collect();
    let exceptional_set: HashSet<Int> = c.exceptional.iter().map(|(x, _)| x.clone()).collect();
    let mut partition_ok = covered_values.len() == covered_set.len();
    for (x, count) in c.input.iter() {
        let in_cov = covered_set.contains(x);
        let in_exc = exceptional_set.contains(x);
        partition_ok &= in_cov != in_exc;
        if in_exc {
            partition_ok &= c.exceptional.count_of(x) == count;
        }
    }
    partition_ok &= covered_set
        .iter()
        .all(|x| c.input.count_of(x) >= 1)
        && exceptional_set.iter().all(|x| c.input.count_of(x) >= 1);
    report.push(
        "partition",
        partition_ok,
        format!(
            "{} covered values and {} exceptional values split the input",
            covered_set.len(),
            exceptional_set.len()
        ),
    );

    let mut witnesses_ok = true;
    for w in &c.covered {
        let tau_ok = 1 <= w.tau && w.tau <= c.k;
        let shaped = w.coeffs.len() == rank && w.coeffs.iter().all(|m| m.abs() <= k_int);
        let sum: Int = w.coeffs.iter().zip(&c.selected).map(|(m, g)| m * g).sum();
        let target = Int::from(w.tau) * &w.element;
        if !(tau_ok && shaped && sum == target) {
            witnesses_ok = false;
            break;
        }
    }
    report.push(
        "cover-witnesses",
        witnesses_ok,
        format!(
            "{} coverage witnesses re-evaluate with 1 <= tau <= {}",
            c.covered.len(),
            c.k
        ),
    );

    let recount: u64 = c.exceptional.len();
    report.push(
        "exceptional-bound",
        c.exceptional_count == recount && recount < c.k * c.k,
        format!(
            "{recount} exceptional occurrences < k² = {}",
            c.k * c.k
        ),
    );
    Ok(report)
}

fn verify_second(c: &SecondCertificate) -> Result<VerifyReport> {
    let mut report = VerifyReport::new("second");
    let rank = c.gap.rank();
    let d = c.rank_cap;
    let k = c.k;
    let ln_k = (k as f64).ln();

    report.push(
        "rank-bound",
        rank == c.selected.len() && (rank as u64) < d,
        format!("rank {rank} < cap d = {d}"),
    );

    report.push(
        "gap-symmetric",
        c.gap.is_symmetric(),
        "offset 0 and bounds of the form [-B, B]".to_string(),
    );

    // Recompute the trace: L_D from the tau sequence, s = K!·Πτ, and the
    // coefficient bound 2·K!·L_D.
    let mut l_expect = Int::from(k * k);
    let mut s_expect = factorial(c.torsion_floor);
    let mut trace_ok = true;
    for stage in &c.stages {
        let tau_ok = c.torsion_floor <= stage.tau && stage.tau <= k;
        l_expect *= Int::from(stage.tau + stage.tau * stage.tau);
        s_expect *= Int::from(stage.tau);
        trace_ok &= tau_ok && stage.coeff_bound == l_expect;
    }
    let bound_expect = Int::from(2) * factorial(c.torsion_floor) * &l_expect;
    let bounds_ok = c
        .gap
        .upper()
        .iter()
        .zip(c.gap.lower())
        .all(|(u, l)| *u == bound_expect && *l == -bound_expect.clone());
    report.push(
        "coefficient-bound-trace",
        trace_ok && bounds_ok,
        format!(
            "L recursion over {} stages gives box bound 2·K!·L_D = {bound_expect}",
            c.stages.len()
        ),
    );

    report.push(
        "scale-value",
        c.scale == s_expect,
        format!("scale s = {} matches K!·Πτ = {s_expect}", c.scale),
    );

    report.push(
        "scale-bound",
        c.scale.is_positive()
            && ln_big(&c.scale) <= (d as f64 + c.epsilon) * ln_k + 1e-9,
        format!("ln s = {:.4} vs (d+ε)·ln k = {:.4}", ln_big(&c.scale), (d as f64 + c.epsilon) * ln_k),
    );

    let volume = c.gap.volume();
    let vol_exp = 2.0 * ((d * d) as f64 - 1.0) + c.epsilon;
    report.push(
        "volume-bound",
        ln_big(&volume) <= vol_exp * ln_k + 1e-9,
        format!(
            "ln vol = {:.4} vs (2(d²−1)+ε)·ln k = {:.4}",
            ln_big(&volume),
            vol_exp * ln_k
        ),
    );

    let mut gens_ok = c.gap.generators().len() == c.selected.len();
    let scale_rat = Rat::from(c.scale.clone());
    for (g, w) in c.gap.generators().iter().zip(&c.selected) {
        let back = g * &scale_rat;
        gens_ok &= back.is_integer()
            && back.to_integer() == *w
            && c.input.count_of(w) >= 1;
    }
    report.push(
        "generators-scale-to-input",
        gens_ok,
        "s·g_j recovers the selected input elements".to_string(),
    );

    report.push(
        "selected-dissociated",
        gap::is_k_dissociated(&c.selected, k)?,
        format!("skeleton is {k}-dissociated"),
    );

    let mut members_ok = true;
    for m in &c.members {
        let shaped = m.coeffs.len() == rank
            && m.coeffs
                .iter()
                .zip(c.gap.lower().iter().zip(c.gap.upper()))
                .all(|(x, (l, u))| l <= x && x <= u);
        let sum = m
            .coeffs
            .iter()
            .zip(c.gap.generators())
            .fold(Rat::zero(), |acc, (x, g)| acc + Rat::from(x.clone()) * g);
        if !(shaped && sum == Rat::from(m.element.clone())) {
            members_ok = false;
            break;
        }
    }
    report.push(
        "member-witnesses",
        members_ok,
        format!("{} membership witnesses re-evaluate inside the box", c.members.len()),
    );

    let member_values: Vec<&Int> = c.members.iter().map(|m| &m.element).collect();
    let member_set: HashSet<&Int> = member_values.iter().copied().collect();
    let exceptional_set: HashSet<Int> = c.exceptional.iter().map(|(x, _)| x.clone()).collect();
    let mut partition_ok = member_values.len() == member_set.len();
    for (x, count) in c.input.iter() {
        let in_mem = member_set.contains(x);
        let in_exc = exceptional_set.contains(x);
        partition_ok &= in_mem != in_exc;
        if in_exc {
            partition_ok &= c.exceptional.count_of(x) == count;
        }
    }
    partition_ok &= member_set.iter().all(|x| c.input.count_of(x) >= 1)
        && exceptional_set.iter().all(|x| c.input.count_of(x) >= 1);
    report.push(
        "partition",
        partition_ok,
        format!(
            "{} member values and {} exceptional values split the input",
            member_set.len(),
            exceptional_set.len()
        ),
    );

    let recount = c.exceptional.len();
    let cap = c.epsilon * (k * k) as f64 * ln_k;
    report.push(
        "exceptional-bound",
        c.exceptional_count == recount && (recount as f64) <= cap + 1e-9,
        format!("{recount} exceptional occurrences vs ε·k²·ln k = {cap:.3}"),
    );
    Ok(report)
}
