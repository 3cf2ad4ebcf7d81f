//! Discretization: pinned small/sparse splits, the scale ladder, the random
//! no-silent-wrong-answers corpus, and one surgical fault per verifier
//! clause.

mod common;

use common::TestRng;
use lowo_core::discretize::{discretize, discretize_at, verify_discretization, DiscretizationResult};
use lowo_core::error::Error;
use lowo_core::gap::Gap;
use lowo_core::report::VerifyReport;
use lowo_core::{Int, Rat};
use num_traits::{One, Zero};

fn sym_gap(gens: &[i64], bounds: &[i64]) -> Gap {
    Gap::new(
        Rat::zero(),
        gens.iter().map(|&g| Rat::from(Int::from(g))).collect(),
        bounds.iter().map(|&m| Int::from(-m)).collect(),
        bounds.iter().map(|&m| Int::from(m)).collect(),
    )
    .unwrap()
}

fn failing(report: &VerifyReport) -> Vec<&str> {
    report
        .clauses
        .iter()
        .filter(|c| !c.ok)
        .map(|c| c.name.as_str())
        .collect()
}

fn assert_only_fails(result: &DiscretizationResult, clause: &str) {
    let report = verify_discretization(result).unwrap();
    assert!(!report.ok);
    assert_eq!(failing(&report), vec![clause], "expected only {clause}");
}

/// The forced two-scale split: generators 1 and 10⁹ cannot interact below
/// the coefficient caps, so the kernel is exactly the first coordinate.
fn two_scale_example() -> (DiscretizationResult, VerifyReport) {
    let p = sym_gap(&[1, 1_000_000_000], &[5, 5]);
    discretize(&p, 100, 2, &Int::from(10_000), 0).unwrap()
}

#[test]
fn two_scale_split_is_forced() {
    let (res, report) = two_scale_example();
    assert!(report.ok);
    assert_eq!(res.rung, 0);
    assert_eq!(res.scale, Rat::from(Int::from(10_000)));
    assert_eq!(res.kernel_rank, 1);
    assert_eq!(res.pivots, vec![0]);

    // Generator 1 goes entirely small, generator 10⁹ entirely sparse.
    assert_eq!(res.decomposition.len(), 2);
    assert_eq!(res.decomposition[0].small, Rat::one());
    assert!(res.decomposition[0].sparse.is_zero());
    assert!(res.decomposition[1].small.is_zero());
    assert_eq!(
        res.decomposition[1].sparse,
        Rat::from(Int::from(1_000_000_000))
    );

    // P_small = {m·1 : |m| ≤ 5}; P_sparse keeps both coordinates with the
    // sparse parts (0 and 10⁹) as generators.
    assert_eq!(res.small.generators(), &[Rat::one()]);
    assert_eq!(res.small.lower(), &[Int::from(-5)]);
    assert_eq!(res.small.upper(), &[Int::from(5)]);
    assert_eq!(res.sparse.rank(), 2);
    assert!(res.sparse.generators()[0].is_zero());
    assert_eq!(
        res.sparse.generators()[1],
        Rat::from(Int::from(1_000_000_000))
    );

    // Exactness of the split, clause names, and serde round trip.
    let p = &res.input;
    for (split, g) in res.decomposition.iter().zip(p.generators()) {
        assert_eq!(&split.small + &split.sparse, *g);
    }
    let names: Vec<&str> = report.clauses.iter().map(|c| c.name.as_str()).collect();
    assert_eq!(
        names,
        vec!["scale", "covering", "smallness", "sparseness", "rank-volume"]
    );
    let json = serde_json::to_string(&res).unwrap();
    let back: DiscretizationResult = serde_json::from_str(&json).unwrap();
    assert_eq!(res, back);
    assert!(verify_discretization(&back).unwrap().ok);
}

#[test]
fn full_kernel_branch_collapses_sparse() {
    // r0 far above max|p|·s: every coefficient vector is a small relation,
    // so P_small = P and P_sparse is the rank-0 zero gap.
    let p = sym_gap(&[7], &[3]);
    let (res, report) = discretize(&p, 2, 2, &Int::from(1_000_000), 0).unwrap();
    assert!(report.ok);
    assert_eq!(res.kernel_rank, 1);
    assert_eq!(res.small, p);
    assert_eq!(res.sparse, Gap::zero());
    assert_eq!(res.decomposition[0].small, Rat::from(Int::from(7)));
    assert!(res.decomposition[0].sparse.is_zero());
}

#[test]
fn empty_kernel_branch_collapses_small() {
    // r0 = 1, s = 2: a small relation would need |7m| ≤ 1/4, so the kernel
    // is empty, P_small = {0}, and P_sparse = P.
    let p = sym_gap(&[7], &[3]);
    let (res, report) = discretize(&p, 2, 2, &Int::one(), 0).unwrap();
    assert!(report.ok);
    assert_eq!(res.kernel_rank, 0);
    assert!(res.pivots.is_empty());
    assert_eq!(res.small.rank(), 0);
    assert_eq!(res.sparse, p);
    assert!(res.decomposition[0].small.is_zero());
    assert_eq!(res.decomposition[0].sparse, Rat::from(Int::from(7)));
}

#[test]
fn zero_rank_gap_discretizes_trivially() {
    let (res, report) = discretize(&Gap::zero(), 1, 2, &Int::from(5), 0).unwrap();
    assert!(report.ok);
    assert_eq!(res.kernel_rank, 0);
    assert_eq!(res.small.rank(), 0);
    assert_eq!(res.sparse.rank(), 0);
}

#[test]
fn ladder_descends_to_a_verified_rung() {
    // At R = 13 the sparse part (the whole gap) is separated by only 1,
    // far below R·S = 1300, and no kernel relation exists: rung 0 fails.
    let p = sym_gap(&[1, 1_000_000_000], &[5, 5]);
    let err = discretize(&p, 100, 2, &Int::from(13), 0).unwrap_err();
    assert!(matches!(err, Error::NoConvergence(_)));
    assert!(err.to_string().contains("sparseness"));

    // With span 2 the ladder starts at rung −2 where R·S is tiny, and that
    // rung verifies: R = 13/(S·V)² with S·V = 100·121.
    let (res, report) = discretize(&p, 100, 2, &Int::from(13), 2).unwrap();
    assert!(report.ok);
    assert_eq!(res.rung, -2);
    assert_eq!(
        res.scale,
        Rat::new(Int::from(13), Int::from(12_100i64 * 12_100))
    );
    assert_eq!(res.kernel_rank, 0);
    assert_eq!(res.small.rank(), 0);
}

#[test]
fn input_validation() {
    let p = sym_gap(&[3], &[2]);
    let r0 = Int::from(10);

    // Sharpness and base floors.
    assert!(discretize(&p, 0, 2, &r0, 0).is_err());
    assert!(discretize(&p, 1, 1, &r0, 0).is_err());
    // Positive r0 and ladder-span cap.
    assert!(discretize(&p, 1, 2, &Int::zero(), 0).is_err());
    assert!(discretize(&p, 1, 2, &r0, 17).is_err());
    // Asymmetric bounds.
    let asym = Gap::new(
        Rat::zero(),
        vec![Rat::from(Int::from(3))],
        vec![Int::from(-1)],
        vec![Int::from(2)],
    )
    .unwrap();
    assert!(discretize(&asym, 1, 2, &r0, 0).is_err());
    // Non-integer generators.
    let frac = Gap::new(
        Rat::zero(),
        vec![Rat::new(Int::one(), Int::from(2))],
        vec![Int::from(-1)],
        vec![Int::from(1)],
    )
    .unwrap();
    assert!(discretize(&frac, 1, 2, &r0, 0).is_err());
    // Rank above the desk-scale cap.
    let wide = sym_gap(&[1, 10, 100, 1000, 10000], &[1, 1, 1, 1, 1]);
    assert!(discretize(&wide, 1, 2, &r0, 0).is_err());
    // Non-positive direct scale.
    assert!(discretize_at(&p, 1, 2, &r0, &Rat::from(Int::from(-1)), 0).is_err());
}

#[test]
fn fault_injection_flips_exactly_one_clause() {
    let (base, _) = two_scale_example();

    // covering: break one split identity (small + sparse ≠ generator).
    let mut res = base.clone();
    res.decomposition[0].sparse += Rat::one();
    assert_only_fails(&res, "covering");

    // smallness: shrink the verified scale by 10³⁰ so R/S drops below the
    // small part's honest extreme |y| = 5.
    let mut res = base.clone();
    res.scale /= Rat::from(Int::from(10).pow(30));
    assert_only_fails(&res, "smallness");

    // sparseness: grow the scale by 10³⁰ so R·S overtakes the honest
    // minimum separation 10⁹.
    let mut res = base.clone();
    res.scale *= Rat::from(Int::from(10).pow(30));
    assert_only_fails(&res, "sparseness");

    // rank-volume: a kernel rank out of step with the pivot count.
    let mut res = base.clone();
    res.kernel_rank += 1;
    assert_only_fails(&res, "rank-volume");

    // scale: flip the sign of the recorded r0 (the other clauses never
    // read it).
    let mut res = base.clone();
    res.r0 = -res.r0;
    assert_only_fails(&res, "scale");
}

#[test]
fn random_corpus_no_silent_wrong_answers() {
    let mut rng = TestRng::new(0xD15C);
    let mut successes = 0usize;
    for case in 0..50 {
        let rank = 1 + rng.below(3) as usize;
        let gens: Vec<i64> = (0..rank)
            .map(|_| {
                let cap = 10i64.pow(rng.below(13) as u32);
                let g = rng.range_i64(1, cap.max(2));
                if rng.below(2) == 0 {
                    g
                } else {
                    -g
                }
            })
            .collect();
        let bounds: Vec<i64> = (0..rank).map(|_| 1 + rng.range_i64(0, 3)).collect();
        let p = sym_gap(&gens, &bounds);
        let r0 = Int::from(10).pow(rng.below(7) as u32);
        let s = 10u64.pow(rng.below(4) as u32);
        match discretize(&p, s, 2, &r0, 2) {
            Ok((res, report)) => {
                assert!(report.ok, "case {case}: returned result must verify");
                for (split, g) in res.decomposition.iter().zip(res.input.generators()) {
                    assert_eq!(&split.small + &split.sparse, *g, "case {case}: exact split");
                }
                assert!(res.small.rank() <= p.rank());
                assert!(res.sparse.rank() <= p.rank());
                assert!(res.small.volume() <= p.volume());
                assert!(res.sparse.volume() <= p.volume());
                successes += 1;
            }
            Err(e) => {
                // An explicit, diagnosed failure is acceptable; silence is
                // not.
                assert!(!e.to_string().is_empty(), "case {case}");
            }
        }
    }
    assert!(successes >= 40, "only {successes}/50 verified");
}
