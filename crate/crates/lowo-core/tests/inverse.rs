//! Inverse-theorem tests: certificates on pinned and random corpora, the
//! structured failure paths, and one surgical fault injection per verifier
//! clause (each flips exactly its targeted clause).

mod common;

use common::{mu, TestRng};
use lowo_core::gap::Gap;
use lowo_core::inverse::{
    first_inverse, second_inverse, verify_certificate, zeroth_inverse, Certificate,
    CubeCertificate, DilateCoverCertificate, FailureKind, MemberWitness, Outcome,
    SecondCertificate, StageTrace,
};
use lowo_core::report::VerifyReport;
use lowo_core::walk::{concentration, Multiset};
use lowo_core::{Int, Rat};
use num_traits::{One, Zero};

fn ints(values: &[i64]) -> Vec<Int> {
    values.iter().map(|&v| Int::from(v)).collect()
}

fn rat(n: i64, d: i64) -> Rat {
    Rat::new(Int::from(n), Int::from(d))
}

fn factorial(n: u64) -> Int {
    (1..=n).fold(Int::one(), |acc, i| acc * Int::from(i))
}

/// Names of the clauses that failed.
fn failing(report: &VerifyReport) -> Vec<&str> {
    report
        .clauses
        .iter()
        .filter(|c| !c.ok)
        .map(|c| c.name.as_str())
        .collect()
}

fn assert_only_fails(cert: &Certificate, clause: &str) {
    let report = verify_certificate(cert).expect("verification runs");
    assert!(!report.ok, "expected a failing report for clause {clause}");
    assert_eq!(
        failing(&report),
        vec![clause],
        "expected exactly {clause} to fail"
    );
}

fn assert_all_pass(cert: &Certificate) {
    let report = verify_certificate(cert).expect("verification runs");
    assert!(
        report.ok,
        "all clauses should pass, failing: {:?}",
        failing(&report)
    );
}

// ---------------------------------------------------------------------------
// Zeroth inverse.
// ---------------------------------------------------------------------------

#[test]
fn zeroth_examples() {
    // Repeated value: rank 1, bound 1/2.
    let c = zeroth_inverse(&Multiset::from_i64s(&[5, 5, 5])).unwrap();
    assert_eq!(c.selected, ints(&[5]));
    assert_eq!(c.concentration_bound, rat(1, 2));
    assert_all_pass(&Certificate::Zeroth(c));

    // {1, 2}: 1 ∉ Q({2}, 1), so both are selected.
    let c = zeroth_inverse(&Multiset::from_i64s(&[1, 2])).unwrap();
    assert_eq!(c.selected, ints(&[2, 1]));
    assert_eq!(c.concentration_bound, rat(1, 4));
    assert_all_pass(&Certificate::Zeroth(c));

    // Zeros are witnessed by the all-zero combination, never selected.
    let c = zeroth_inverse(&Multiset::from_i64s(&[0, 0, 7])).unwrap();
    assert_eq!(c.selected, ints(&[7]));
    let zero_witness = c
        .witnesses
        .iter()
        .find(|w| w.element.is_zero())
        .expect("zero is witnessed");
    assert!(zero_witness.coeffs.iter().all(|m| m.is_zero()));
    assert_all_pass(&Certificate::Zeroth(c));

    // Empty input: empty certificate, bound 1.
    let c = zeroth_inverse(&Multiset::from_i64s(&[])).unwrap();
    assert!(c.selected.is_empty());
    assert_eq!(c.concentration_bound, rat(1, 1));
    assert_all_pass(&Certificate::Zeroth(c));
}

#[test]
fn zeroth_bound_dominates_concentration() {
    // The certified bound 2^{-|w|} really bounds P_1(v): conditioned on the
    // signs outside w, the 2^{|w|} sign patterns of a 1-dissociated w give
    // distinct sums.
    let mut rng = TestRng::new(0x0C0C);
    for case in 0..60 {
        let len = 1 + (case % 10) as usize;
        let v = rng.multiset(len, -15, 15);
        let cert = zeroth_inverse(&v).unwrap();
        let p1 = concentration(&v, &mu(1, 1)).unwrap().1;
        assert!(
            p1 <= cert.concentration_bound,
            "bound 2^-{} fails for {v:?} (P_1 = {p1})",
            cert.selected.len()
        );
        assert_all_pass(&Certificate::Zeroth(cert));
    }
}

#[test]
fn zeroth_fault_injection() {
    let base = zeroth_inverse(&Multiset::from_i64s(&[5, 5, 5])).unwrap();

    // selected-from-input: a foreign value padded into every witness with
    // coefficient 0 (and the bound re-adjusted) trips only origin checking.
    let mut c = base.clone();
    c.selected.push(Int::from(999));
    for w in &mut c.witnesses {
        w.coeffs.push(Int::zero());
    }
    c.concentration_bound = rat(1, 4);
    assert_only_fails(&Certificate::Zeroth(c), "selected-from-input");

    // selected-dissociated: {6, 3, -3} sums to zero with {0,1,1}.
    let dissoc = CubeCertificate {
        input: Multiset::from_i64s(&[3, 6, -3]),
        selected: ints(&[6, 3, -3]),
        witnesses: [(6i64, [1i64, 0, 0]), (3, [0, 1, 0]), (-3, [0, 0, 1])]
            .into_iter()
            .map(|(e, coeffs)| lowo_core::inverse::CubeWitness {
                element: Int::from(e),
                coeffs: ints(&coeffs),
            })
            .collect(),
        concentration_bound: rat(1, 8),
    };
    assert_only_fails(&Certificate::Zeroth(dissoc), "selected-dissociated");

    // witness-coverage: drop a witness.
    let mut c = base.clone();
    c.witnesses.clear();
    assert_only_fails(&Certificate::Zeroth(c), "witness-coverage");

    // witnesses-evaluate: flip a coefficient.
    let mut c = base.clone();
    c.witnesses[0].coeffs[0] = -c.witnesses[0].coeffs[0].clone();
    assert_only_fails(&Certificate::Zeroth(c), "witnesses-evaluate");

    // bound-value: wrong claimed bound.
    let mut c = base.clone();
    c.concentration_bound = rat(1, 3);
    assert_only_fails(&Certificate::Zeroth(c), "bound-value");
}

// ---------------------------------------------------------------------------
// First inverse.
// ---------------------------------------------------------------------------

#[test]
fn first_repeated_value() {
    // 100 copies of one value: rank-1 skeleton, everything covered.
    let v = Multiset::from_pairs([(Int::from(1), 100)]).unwrap();
    let out = first_inverse(&v, 10, 2).unwrap();
    let cert = out.certificate().expect("certificate").clone();
    assert_eq!(cert.selected, ints(&[1]));
    assert_eq!(cert.exceptional_count, 0);
    assert_eq!(cert.covered.len(), 1);
    assert_all_pass(&Certificate::First(cert));
}

#[test]
fn first_arithmetic_progression() {
    // {1..50} at k = 10: only 50 < k² occurrences, so the skeleton stays
    // empty and the whole progression is (admissibly) exceptional.
    let v = Multiset::from_values((1..=50).map(Int::from));
    let out = first_inverse(&v, 10, 2).unwrap();
    let cert = out.certificate().expect("certificate").clone();
    assert!(cert.selected.is_empty());
    assert_eq!(cert.exceptional_count, 50);
    assert_all_pass(&Certificate::First(cert));

    // With multiplicity 4 the mass forces two skeleton steps: {1, 11}
    // reaches every value by |c₁| ≤ 10, |c₂| ≤ 10.
    let v4 = Multiset::from_pairs((1..=50).map(|x| (Int::from(x), 4))).unwrap();
    let out = first_inverse(&v4, 10, 3).unwrap();
    let cert = out.certificate().expect("certificate").clone();
    assert_eq!(cert.selected, ints(&[1, 11]));
    assert_eq!(cert.exceptional_count, 0);
    assert_all_pass(&Certificate::First(cert));

    // Same progression (multiplicity 1) at k = 3: 50 ≥ k² occurrences grow
    // the base-4 skeleton {1, 4, 16} which covers everything.
    let out = first_inverse(&v, 3, 4).unwrap();
    let cert = out.certificate().expect("certificate").clone();
    assert_eq!(cert.selected, ints(&[1, 4, 16]));
    assert_eq!(cert.exceptional_count, 0);
    assert_all_pass(&Certificate::First(cert));
}

#[test]
fn first_generic_input_overflows_rank() {
    // Twenty spread-out 40-bit values admit no low-rank structure at k = 4:
    // the skeleton would need rank 2 = d.
    let mut rng = TestRng::new(0x40B1);
    let values: Vec<Int> = (0..20)
        .map(|_| Int::from((rng.next_u64() >> 24) as i64 + 1_000_000))
        .collect();
    let v = Multiset::from_values(values);
    let out = first_inverse(&v, 4, 2).unwrap();
    let failure = out.failure().expect("rank overflow");
    assert_eq!(failure.kind, FailureKind::RankOverflow);
}

#[test]
fn first_input_validation() {
    let v = Multiset::from_i64s(&[1, 2]);
    assert!(first_inverse(&v, 1, 2).is_err());
    assert!(first_inverse(&v, 4, 0).is_err());
}

fn first_base_cert() -> DilateCoverCertificate {
    let v = Multiset::from_values((1..=50).map(Int::from));
    first_inverse(&v, 3, 4)
        .unwrap()
        .certificate()
        .expect("certificate")
        .clone()
}

#[test]
fn first_fault_injection() {
    let base = first_base_cert();
    assert_eq!(base.exceptional_count, 0);

    // rank-bound: pretend the cap was equal to the achieved rank.
    let mut c = base.clone();
    c.rank_cap = c.selected.len() as u64;
    assert_only_fails(&Certificate::First(c), "rank-bound");

    // selected-from-input: erase 16 from the input (and its witness, to
    // keep the partition clause intact).
    let mut c = base.clone();
    c.input = c
        .input
        .saturating_remove(&Multiset::from_i64s(&[16]))
        .unwrap();
    c.covered.retain(|w| w.element != Int::from(16));
    assert_only_fails(&Certificate::First(c), "selected-from-input");

    // selected-dissociated: a hand-built certificate over {1,2,3} whose
    // skeleton carries the relation 1 + 2 − 3 = 0.
    let selected = ints(&[1, 2, 3]);
    let gap = Gap::q_box(&selected, &Int::from(3)).unwrap();
    let covered = [(1i64, [1i64, 0, 0]), (2, [0, 1, 0]), (3, [0, 0, 1])]
        .into_iter()
        .map(|(e, coeffs)| lowo_core::inverse::CoverWitness {
            element: Int::from(e),
            tau: 1,
            coeffs: ints(&coeffs),
        })
        .collect();
    let dissoc = DilateCoverCertificate {
        input: Multiset::from_i64s(&[1, 2, 3]),
        k: 3,
        rank_cap: 4,
        selected,
        gap,
        covered,
        exceptional: Multiset::from_i64s(&[]),
        exceptional_count: 0,
    };
    assert_only_fails(&Certificate::First(dissoc), "selected-dissociated");

    // gap-form: widen one box bound.
    let mut c = base.clone();
    let mut upper = c.gap.upper().to_vec();
    upper[0] += Int::from(1);
    c.gap = Gap::new(
        c.gap.offset().clone(),
        c.gap.generators().to_vec(),
        c.gap.lower().to_vec(),
        upper,
    )
    .unwrap();
    assert_only_fails(&Certificate::First(c), "gap-form");

    // partition: one value listed as covered and exceptional at once.
    let mut c = base.clone();
    c.exceptional = Multiset::from_i64s(&[7]);
    c.exceptional_count = 1;
    assert_only_fails(&Certificate::First(c), "partition");

    // cover-witnesses: an out-of-range dilation factor.
    let mut c = base.clone();
    c.covered[0].tau = 0;
    assert_only_fails(&Certificate::First(c), "cover-witnesses");

    // exceptional-bound: a count that disagrees with the multiset.
    let mut c = base.clone();
    c.exceptional_count = 5;
    assert_only_fails(&Certificate::First(c), "exceptional-bound");
}

// ---------------------------------------------------------------------------
// Second inverse.
// ---------------------------------------------------------------------------

#[test]
fn second_arithmetic_progression() {
    // {1..24}×8: enough mass for one skeleton step (192 ≥ k² = 144), after
    // which only {13..24}×8 = 96 < 144 values extend. Every value 1..24 is
    // then a member of (1/K!)·Q({1}, 2·K!·k²), including the values the
    // greedy stage flagged — the final exhaustive re-test reclaims them.
    let v = Multiset::from_pairs((1..=24).map(|x| (Int::from(x), 8))).unwrap();
    let out = second_inverse(&v, 12, 2, 8, 4.0).unwrap();
    let cert = out.certificate().expect("certificate").clone();
    assert_eq!(cert.selected, ints(&[1]));
    assert_eq!(cert.gap.rank(), 1);
    assert!(cert.stages.is_empty());
    assert_eq!(cert.scale, factorial(8));
    assert!(!cert.stage1_exceptional.is_empty());
    assert_eq!(cert.exceptional_count, 0);
    assert_all_pass(&Certificate::Second(cert));
}

#[test]
fn second_gap_samples() {
    // A heavy spike at 7 plus 200 draws from Q({7}, 20): everything is a
    // multiple of the single generator and lands inside the output gap.
    let mut rng = TestRng::new(0x7777);
    let mut values: Vec<Int> = (0..200)
        .map(|_| Int::from(7 * rng.range_i64(-20, 20)))
        .collect();
    values.extend(std::iter::repeat_n(Int::from(7), 50));
    let v = Multiset::from_values(values);
    let out = second_inverse(&v, 14, 2, 8, 4.0).unwrap();
    let cert = out.certificate().expect("certificate").clone();
    assert_eq!(cert.selected, ints(&[7]));
    assert_eq!(cert.exceptional_count, 0, "all multiples of 7 are members");
    assert_all_pass(&Certificate::Second(cert));
}

#[test]
fn second_trivial_zero_stages() {
    // One repeated value needs no absorption stages: s = K! and the gap is
    // (1/K!)·Q(w, 2·K!·k²).
    let v = Multiset::from_pairs([(Int::from(1), 200)]).unwrap();
    let out = second_inverse(&v, 12, 2, 8, 4.0).unwrap();
    let cert = out.certificate().expect("certificate").clone();
    assert!(cert.stages.is_empty());
    assert_eq!(cert.scale, factorial(8));
    assert_eq!(cert.exceptional_count, 0);
    assert_all_pass(&Certificate::Second(cert));
}

#[test]
fn second_generic_input_overflows_rank() {
    let mut rng = TestRng::new(0x40B2);
    let values: Vec<Int> = (0..20)
        .map(|_| Int::from((rng.next_u64() >> 24) as i64 + 1_000_000))
        .collect();
    let v = Multiset::from_values(values);
    let out = second_inverse(&v, 4, 2, 2, 1.0).unwrap();
    assert_eq!(out.failure().expect("failure").kind, FailureKind::RankOverflow);
}

#[test]
fn second_input_validation() {
    let v = Multiset::from_i64s(&[1, 2]);
    assert!(second_inverse(&v, 1, 2, 2, 1.0).is_err());
    assert!(second_inverse(&v, 4, 0, 2, 1.0).is_err());
    assert!(second_inverse(&v, 4, 2, 1, 1.0).is_err());
    assert!(second_inverse(&v, 4, 2, 5, 1.0).is_err());
    assert!(second_inverse(&v, 4, 2, 2, -1.0).is_err());
    assert!(second_inverse(&v, 4, 2, 2, f64::NAN).is_err());
}

fn second_base_cert() -> SecondCertificate {
    // Rank-1 certificate with a non-empty skeleton and member list (see
    // second_arithmetic_progression for why this input forces that shape).
    let v = Multiset::from_pairs((1..=24).map(|x| (Int::from(x), 8))).unwrap();
    second_inverse(&v, 12, 2, 8, 4.0)
        .unwrap()
        .certificate()
        .expect("certificate")
        .clone()
}

/// A fully consistent rank-0 certificate used as a surgical base.
fn rank0_cert(input_value: i64, epsilon: f64) -> SecondCertificate {
    let input = Multiset::from_i64s(&[input_value]);
    let zero_gap = Gap::zero();
    let (members, exceptional, exceptional_count) = if input_value == 0 {
        (
            vec![MemberWitness {
                element: Int::zero(),
                coeffs: vec![],
            }],
            Multiset::from_i64s(&[]),
            0,
        )
    } else {
        (vec![], input.clone(), 1)
    };
    SecondCertificate {
        input,
        k: 12,
        rank_cap: 2,
        torsion_floor: 8,
        epsilon,
        selected: vec![],
        stage1_exceptional: Multiset::from_i64s(&[]),
        stages: vec![],
        scale: factorial(8),
        gap: zero_gap,
        members,
        exceptional,
        exceptional_count,
    }
}

#[test]
fn second_rank0_bases_verify() {
    assert_all_pass(&Certificate::Second(rank0_cert(7, 4.0)));
    assert_all_pass(&Certificate::Second(rank0_cert(0, 4.0)));
}

#[test]
fn second_fault_injection() {
    let base = second_base_cert();

    // rank-bound: a hand-built rank-1 certificate with cap d = 1. The
    // volume/scale slacks are wide enough (ε = 8) that only the rank
    // clause trips.
    let bound = Int::from(2) * factorial(8) * Int::from(144);
    let gap = Gap::new(
        Rat::zero(),
        vec![Rat::new(Int::one(), factorial(8))],
        vec![-bound.clone()],
        vec![bound],
    )
    .unwrap();
    let rank1 = SecondCertificate {
        input: Multiset::from_i64s(&[1]),
        k: 12,
        rank_cap: 1,
        torsion_floor: 8,
        epsilon: 8.0,
        selected: ints(&[1]),
        stage1_exceptional: Multiset::from_i64s(&[]),
        stages: vec![],
        scale: factorial(8),
        gap,
        members: vec![MemberWitness {
            element: Int::one(),
            coeffs: vec![factorial(8)],
        }],
        exceptional: Multiset::from_i64s(&[]),
        exceptional_count: 0,
    };
    assert_only_fails(&Certificate::Second(rank1), "rank-bound");

    // gap-symmetric: a non-zero offset (membership witnesses ignore it).
    let mut c = base.clone();
    c.gap = Gap::new(
        rat(1, 1),
        c.gap.generators().to_vec(),
        c.gap.lower().to_vec(),
        c.gap.upper().to_vec(),
    )
    .unwrap();
    assert_only_fails(&Certificate::Second(c), "gap-symmetric");

    // coefficient-bound-trace: symmetric but off-by-one box bounds.
    let mut c = base.clone();
    let grown: Vec<Int> = c.gap.upper().iter().map(|u| u + Int::from(1)).collect();
    c.gap = Gap::new(
        Rat::zero(),
        c.gap.generators().to_vec(),
        grown.iter().map(|u| -u.clone()).collect(),
        grown,
    )
    .unwrap();
    assert_only_fails(&Certificate::Second(c), "coefficient-bound-trace");

    // scale-value: rank-0 base with a perturbed scale.
    let mut c = rank0_cert(7, 4.0);
    c.scale += Int::one();
    assert_only_fails(&Certificate::Second(c), "scale-value");

    // scale-bound: with ε = 0, ln 8! = 10.6 exceeds (d + ε)·ln k = 4.97.
    assert_only_fails(&Certificate::Second(rank0_cert(0, 0.0)), "scale-bound");

    // volume-bound: a hand-built one-stage k = K = 2 certificate whose box
    // outgrows (2(d²−1)+ε)·ln k while every other clause stays consistent.
    let gap = Gap::new(
        Rat::zero(),
        vec![rat(1, 4)],
        ints(&[-96]),
        ints(&[96]),
    )
    .unwrap();
    let volume_cert = SecondCertificate {
        input: Multiset::from_i64s(&[1]),
        k: 2,
        rank_cap: 2,
        torsion_floor: 2,
        epsilon: 0.1,
        selected: ints(&[1]),
        stage1_exceptional: Multiset::from_i64s(&[]),
        stages: vec![StageTrace {
            chosen: Int::one(),
            tau: 2,
            coeff_bound: Int::from(24),
            high_torsion_count: 0,
            deleted: Multiset::from_i64s(&[]),
        }],
        scale: Int::from(4),
        gap,
        members: vec![MemberWitness {
            element: Int::one(),
            coeffs: ints(&[4]),
        }],
        exceptional: Multiset::from_i64s(&[]),
        exceptional_count: 0,
    };
    assert_only_fails(&Certificate::Second(volume_cert), "volume-bound");

    // generators-scale-to-input: remove every copy of the skeleton value
    // from the input (and its membership witness, keeping the partition
    // clause clean).
    let mut c = base.clone();
    let w0 = c.selected[0].clone();
    let copies = c.input.count_of(&w0);
    c.input = c
        .input
        .saturating_remove(&Multiset::from_pairs([(w0.clone(), copies)]).unwrap())
        .unwrap();
    c.members.retain(|m| m.element != w0);
    assert_only_fails(&Certificate::Second(c), "generators-scale-to-input");

    // selected-dissociated: a consistent certificate over {1, 2} whose
    // skeleton carries the 2-relation 2·1 − 1·2 = 0.
    let gap = Gap::new(
        Rat::zero(),
        vec![rat(1, 2), rat(1, 1)],
        ints(&[-16, -16]),
        ints(&[16, 16]),
    )
    .unwrap();
    let relation_cert = SecondCertificate {
        input: Multiset::from_i64s(&[1, 2]),
        k: 2,
        rank_cap: 3,
        torsion_floor: 2,
        epsilon: 1.0,
        selected: ints(&[1, 2]),
        stage1_exceptional: Multiset::from_i64s(&[]),
        stages: vec![],
        scale: Int::from(2),
        gap,
        members: vec![
            MemberWitness {
                element: Int::one(),
                coeffs: ints(&[2, 0]),
            },
            MemberWitness {
                element: Int::from(2),
                coeffs: ints(&[0, 2]),
            },
        ],
        exceptional: Multiset::from_i64s(&[]),
        exceptional_count: 0,
    };
    assert_only_fails(&Certificate::Second(relation_cert), "selected-dissociated");

    // member-witnesses: corrupt one coefficient.
    let mut c = base.clone();
    c.members[0].coeffs[0] += Int::one();
    assert_only_fails(&Certificate::Second(c), "member-witnesses");

    // partition: a member value duplicated into the exceptional set.
    let mut c = base.clone();
    let dup = c.members[0].element.clone();
    c.exceptional = Multiset::from_values([dup]);
    c.exceptional_count = 1;
    assert_only_fails(&Certificate::Second(c), "partition");

    // exceptional-bound: count out of sync with the multiset.
    let mut c = base.clone();
    c.exceptional_count += 7;
    assert_only_fails(&Certificate::Second(c), "exceptional-bound");
}

// ---------------------------------------------------------------------------
// Serialization.
// ---------------------------------------------------------------------------

#[test]
fn certificate_serde_round_trip() {
    let zeroth = Certificate::Zeroth(zeroth_inverse(&Multiset::from_i64s(&[3, 6, 8])).unwrap());
    let first = Certificate::First(first_base_cert());
    let second = Certificate::Second(second_base_cert());
    for cert in [zeroth, first, second] {
        let json = serde_json::to_string(&cert).unwrap();
        let back: Certificate = serde_json::from_str(&json).unwrap();
        assert_eq!(cert, back);
        let report = verify_certificate(&back).unwrap();
        assert!(report.ok);
    }

    // Tagged layout: the algorithm discriminator is part of the JSON.
    let json = serde_json::to_string(&Certificate::Zeroth(
        zeroth_inverse(&Multiset::from_i64s(&[4])).unwrap(),
    ))
    .unwrap();
    assert!(json.contains("\"algorithm\":\"zeroth\""));

    // Failure outcomes round-trip too.
    let v = Multiset::from_values((0..20).map(|i| Int::from(1_000_003i64 * i + 77)));
    let out = first_inverse(&v, 4, 2).unwrap();
    assert!(out.failure().is_some());
    let json = serde_json::to_string(&out).unwrap();
    assert!(json.contains("\"status\":\"failure\""));
    let back: Outcome<DilateCoverCertificate> = serde_json::from_str(&json).unwrap();
    assert_eq!(out, back);
}
