//! Exact combinatorics of lazy signed random walks and their inverse theory.
//!
//! Given a multiset `v = {v_1, …, v_n}` of integers and a laziness parameter
//! `0 < μ ≤ 1`, the lazy signed walk is `Y = Σ η_i v_i` where each `η_i` is an
//! independent sign drawn as `P(0) = 1 − μ`, `P(±1) = μ/2`. The central
//! quantity is the concentration probability `P_μ(v) = max_a P(Y = a)`.
//!
//! This crate computes that quantity *exactly* (sparse dynamic programming
//! over arbitrary-precision rationals) and implements the structural converse:
//! when `P_μ(v)` is large, `v` must be efficiently contained in a generalized
//! arithmetic progression (GAP). Three inverse algorithms extract that
//! structure at increasing strength, each emitting a machine-checkable
//! certificate that an independent verifier re-derives from scratch.
//!
//! Modules:
//!
//! * [`exact_linalg`] — fraction-free (Bareiss) determinant/rank/solve kernels
//!   over a generic integer scalar, plus exact rational serialization.
//! * [`walk`] — multisets, exact walk distributions, concentration,
//!   equal-steps closed form, Fourier/Halász estimates.
//! * [`gap`] — generalized arithmetic progressions: membership witnesses,
//!   properness, sumsets, dilates, torsion, dissociativity, dilate coverage.
//! * [`inverse`] — the zeroth/first/second inverse algorithms, certificates,
//!   and the independent certificate verifier.
//! * [`discretize`] — splitting a symmetric GAP into a small component and an
//!   extremely sparse component at a verified scale.
//! * [`randmat`] — random `{-1,0,1}` matrices: exact singularity, smallest
//!   singular value via inverse iteration, Monte Carlo with exact
//!   reproducibility (counter-based RNG) and Wilson confidence intervals.
//!
//! Exactness policy: every probability, witness, and certificate clause is
//! computed in exact integer/rational arithmetic; floating point appears only
//! in explicitly approximate estimators (Fourier quadrature, Halász factors,
//! singular-value iteration) and always alongside an error bound or a
//! convergence report.

pub mod discretize;
pub mod error;
pub mod exact_linalg;
pub mod gap;
pub mod inverse;
pub mod randmat;
pub mod report;
pub mod walk;

/// Arbitrary-precision integer used across the crate.
pub type Int = num_bigint::BigInt;

/// Exact rational number (always kept in reduced canonical form by
/// `num_rational`: positive denominator, gcd(numerator, denominator) = 1).
pub type Rat = num_rational::BigRational;

/// Dense integer matrix with arbitrary-precision entries; the concrete
/// instantiation of [`exact_linalg::Matrix`] used by the combinatorial core.
pub type IntMatrix = exact_linalg::Matrix<Int>;

pub use error::{Error, Result};
