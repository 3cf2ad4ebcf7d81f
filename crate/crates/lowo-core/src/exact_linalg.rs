//! Exact linear algebra over a generic integer scalar.
//!
//! All elimination uses the fraction-free Bareiss scheme: intermediate
//! entries are determinants of leading minors of the input, so they stay
//! integral and every interior division is exact. Pivoting is deterministic —
//! the first non-zero entry in column order — so repeated runs produce
//! identical traces.
//!
//! The kernels are generic over [`ExactScalar`] (machine integers for speed,
//! [`num_bigint::BigInt`] for unbounded exactness); the crate-root alias
//! [`crate::IntMatrix`] fixes the arbitrary-precision instantiation used by
//! the combinatorial modules.
//!
//! Rational numbers serialize as `"p/q"`, or `"p"` when the denominator is
//! one, always in reduced canonical form (positive denominator,
//! `gcd(p, q) = 1`); [`rat_from_str`]/[`rat_to_string`] define that format
//! and the `serde_*` helper modules apply it to struct fields.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::{Int, Rat};

/// Scalar usable in fraction-free elimination.
///
/// `exact_div` is only ever called with a divisor that divides exactly
/// (a Bareiss invariant); implementations may debug-assert this.
pub trait ExactScalar:
    Clone
    + PartialEq
    + fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + Zero
    + One
{
    /// Exact integer division `self / d` with zero remainder guaranteed.
    fn exact_div(&self, d: &Self) -> Self;
}

impl ExactScalar for BigInt {
    fn exact_div(&self, d: &Self) -> Self {
        let (q, r) = self.div_rem(d);
        debug_assert!(r.is_zero(), "Bareiss division must be exact");
        q
    }
}

macro_rules! impl_exact_scalar_prim {
    ($($t:ty),*) => {$(
        impl ExactScalar for $t {
            fn exact_div(&self, d: &Self) -> Self {
                debug_assert!(self % d == 0, "Bareiss division must be exact");
                self / d
            }
        }
    )*};
}

impl_exact_scalar_prim!(i64, i128);

/// Dense row-major matrix over an exact scalar.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: ExactScalar> Matrix<T> {
    /// Build from row-major data; `data.len()` must equal `rows * cols`.
    pub fn from_rows(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::domain(format!(
                "matrix data length {} does not match {}x{}",
                data.len(),
                rows,
                cols
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    /// Build from a slice of rows (each row must have equal length).
    pub fn from_nested(rows: &[Vec<T>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map(|x| x.len()).unwrap_or(0);
        if rows.iter().any(|x| x.len() != c) {
            return Err(Error::domain("ragged rows in matrix construction"));
        }
        Ok(Matrix {
            rows: r,
            cols: c,
            data: rows.iter().flat_map(|x| x.iter().cloned()).collect(),
        })
    }

    /// Number of rows.
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Number of columns.
    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Entry accessor.
    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.cols + j]
    }

    /// Mutable entry accessor.
    pub fn get_mut(&mut self, i: usize, j: usize) -> &mut T {
        &mut self.data[i * self.cols + j]
    }

    /// Transposed copy.
    pub fn transpose(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                data.push(self.get(i, j).clone());
            }
        }
        Matrix {
            rows: self.cols,
            cols: self.rows,
            data,
        }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }
}

/// Exact determinant of a square matrix via fraction-free elimination.
///
/// Pivot selection: the first row (in row order) with a non-zero entry in the
/// current column; a column with no pivot ends the elimination with zero
/// determinant.
pub fn det_exact<T: ExactScalar>(m: &Matrix<T>) -> Result<T> {
    if m.rows != m.cols {
        return Err(Error::domain(format!(
            "determinant requires a square matrix, got {}x{}",
            m.rows, m.cols
        )));
    }
    let n = m.rows;
    if n == 0 {
        return Ok(T::one());
    }
    let mut a = m.clone();
    let mut sign_flip = false;
    let mut prev = T::one();
    for k in 0..n - 1 {
        // First non-zero pivot in column k at or below row k.
        let pivot = (k..n).find(|&r| !a.get(r, k).is_zero());
        let Some(p) = pivot else {
            return Ok(T::zero());
        };
        if p != k {
            a.swap_rows(p, k);
            sign_flip = !sign_flip;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let t = a.get(i, j).clone() * a.get(k, k).clone()
                    - a.get(i, k).clone() * a.get(k, j).clone();
                *a.get_mut(i, j) = t.exact_div(&prev);
            }
            *a.get_mut(i, k) = T::zero();
        }
        prev = a.get(k, k).clone();
    }
    let d = a.get(n - 1, n - 1).clone();
    Ok(if sign_flip { -d } else { d })
}

/// Exact rank of an arbitrary-shape matrix via fraction-free elimination.
pub fn rank_exact<T: ExactScalar>(m: &Matrix<T>) -> usize {
    let mut a = m.clone();
    let mut prev = T::one();
    let mut rank = 0usize;
    for col in 0..a.cols {
        if rank >= a.rows {
            break;
        }
        let pivot = (rank..a.rows).find(|&r| !a.get(r, col).is_zero());
        let Some(p) = pivot else { continue };
        a.swap_rows(p, rank);
        for i in rank + 1..a.rows {
            for j in col + 1..a.cols {
                let t = a.get(i, j).clone() * a.get(rank, col).clone()
                    - a.get(i, col).clone() * a.get(rank, j).clone();
                *a.get_mut(i, j) = t.exact_div(&prev);
            }
            *a.get_mut(i, col) = T::zero();
        }
        prev = a.get(rank, col).clone();
        rank += 1;
    }
    rank
}

/// Outcome of an exact linear solve.
#[derive(Debug, Clone, PartialEq)]
pub enum SolveOutcome {
    /// The system has exactly one solution.
    Unique(Vec<Rat>),
    /// The system is inconsistent (no solution).
    Inconsistent,
    /// The coefficient matrix has a non-trivial kernel; `rank` is its exact
    /// column rank.
    Underdetermined { rank: usize },
}

/// Solve `m · x = rhs` exactly over the rationals.
///
/// The right-hand side is cleared of denominators, the integral augmented
/// system is forward-eliminated fraction-free, and the unique solution (when
/// the column rank is full) is recovered by rational back-substitution.
pub fn solve_rational(m: &Matrix<Int>, rhs: &[Rat]) -> Result<SolveOutcome> {
    if rhs.len() != m.rows {
        return Err(Error::domain(format!(
            "rhs length {} does not match row count {}",
            rhs.len(),
            m.rows
        )));
    }
    // Clear denominators: L = lcm of rhs denominators.
    let mut l: Int = One::one();
    for r in rhs {
        l = l.lcm(r.denom());
    }
    let n = m.cols;
    let rows = m.rows;
    // Augmented integer matrix [A | L*rhs].
    let mut a: Matrix<Int> = Matrix {
        rows,
        cols: n + 1,
        data: {
            let mut d = Vec::with_capacity(rows * (n + 1));
            for i in 0..rows {
                for j in 0..n {
                    d.push(m.get(i, j).clone());
                }
                let scaled = rhs[i].numer() * (&l / rhs[i].denom());
                d.push(scaled);
            }
            d
        },
    };
    let mut prev: Int = One::one();
    let mut pivots: Vec<usize> = Vec::new(); // pivot column of row `rank`
    for col in 0..n {
        let rank = pivots.len();
        if rank >= rows {
            break;
        }
        let pivot = (rank..rows).find(|&r| !a.get(r, col).is_zero());
        let Some(p) = pivot else { continue };
        a.swap_rows(p, rank);
        for i in rank + 1..rows {
            for j in col + 1..=n {
                let t = a.get(i, j) * a.get(rank, col) - a.get(i, col) * a.get(rank, j);
                *a.get_mut(i, j) = t.exact_div(&prev);
            }
            *a.get_mut(i, col) = Zero::zero();
        }
        prev = a.get(rank, col).clone();
        pivots.push(col);
    }
    let rank = pivots.len();
    // Inconsistency: a row that is zero on the coefficient side but not on
    // the augmented side.
    for i in rank..rows {
        if !a.get(i, n).is_zero() {
            return Ok(SolveOutcome::Inconsistent);
        }
    }
    if rank < n {
        return Ok(SolveOutcome::Underdetermined { rank });
    }
    // Full column rank: pivots occupy consecutive columns 0..n. Rational
    // back-substitution on the triangular system.
    let mut x: Vec<Rat> = vec![Rat::zero(); n];
    for i in (0..n).rev() {
        let mut acc = Rat::from(a.get(i, n).clone());
        for j in i + 1..n {
            acc -= Rat::from(a.get(i, j).clone()) * &x[j];
        }
        x[i] = acc / Rat::from(a.get(i, i).clone());
    }
    // Undo the rhs scaling.
    let lr = Rat::from(l);
    for xi in &mut x {
        *xi /= lr.clone();
    }
    Ok(SolveOutcome::Unique(x))
}

/// Render a rational in canonical text form: `"p/q"`, or `"p"` when `q = 1`.
pub fn rat_to_string(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parse the canonical rational text form (`"p"` or `"p/q"`, optional sign).
pub fn rat_from_str(s: &str) -> Result<Rat> {
    let s = s.trim();
    let (np, dp) = match s.split_once('/') {
        Some((a, b)) => (a.trim(), Some(b.trim())),
        None => (s, None),
    };
    let numer: Int = np
        .parse()
        .map_err(|_| Error::domain(format!("invalid rational numerator: {s:?}")))?;
    let denom: Int = match dp {
        Some(d) => d
            .parse()
            .map_err(|_| Error::domain(format!("invalid rational denominator: {s:?}")))?,
        None => One::one(),
    };
    if denom.is_zero() {
        return Err(Error::domain("rational with zero denominator"));
    }
    Ok(Rat::new(numer, denom))
}

/// Render an integer for JSON: a plain number when it fits `i64`, otherwise a
/// decimal string (the deserializer accepts both).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum JsonInt {
    Small(i64),
    Big(String),
}

/// Serde adapter for a [`Rat`] field in `"p/q"` text form.
pub mod serde_rat {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Rat, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&rat_to_string(v))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rat, D::Error> {
        let s = String::deserialize(d)?;
        rat_from_str(&s).map_err(serde::de::Error::custom)
    }
}

/// Serde adapter for a `Vec<Rat>` field in `"p/q"` text form.
pub mod serde_rat_vec {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[Rat], s: S) -> std::result::Result<S::Ok, S::Error> {
        let strings: Vec<String> = v.iter().map(rat_to_string).collect();
        strings.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Vec<Rat>, D::Error> {
        let strings = Vec::<String>::deserialize(d)?;
        strings
            .iter()
            .map(|s| rat_from_str(s).map_err(serde::de::Error::custom))
            .collect()
    }
}

/// Serde adapter for an [`Int`] field: JSON number when it fits `i64`,
/// decimal string otherwise.
pub mod serde_int {
    use super::*;
    use num_traits::ToPrimitive;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Int, s: S) -> std::result::Result<S::Ok, S::Error> {
        match v.to_i64() {
            Some(x) => JsonInt::Small(x).serialize(s),
            None => JsonInt::Big(v.to_string()).serialize(s),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Int, D::Error> {
        match JsonInt::deserialize(d)? {
            JsonInt::Small(x) => Ok(Int::from(x)),
            JsonInt::Big(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Serde adapter for a `Vec<Int>` field (same convention as [`serde_int`]).
pub mod serde_int_vec {
    use super::*;
    use num_traits::ToPrimitive;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[Int], s: S) -> std::result::Result<S::Ok, S::Error> {
        let items: Vec<JsonInt> = v
            .iter()
            .map(|x| match x.to_i64() {
                Some(i) => JsonInt::Small(i),
                None => JsonInt::Big(x.to_string()),
            })
            .collect();
        items.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Vec<Int>, D::Error> {
        let items = Vec::<JsonInt>::deserialize(d)?;
        items
            .into_iter()
            .map(|it| match it {
                JsonInt::Small(x) => Ok(Int::from(x)),
                JsonInt::Big(s) => s.parse().map_err(serde::de::Error::custom),
            })
            .collect()
    }
}

/// Serde adapter for a `Vec<Vec<Int>>` field (integer matrices as nested
/// arrays, same element convention as [`serde_int`]).
pub mod serde_int_mat {
    use super::*;
    use num_traits::ToPrimitive;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[Vec<Int>], s: S) -> std::result::Result<S::Ok, S::Error> {
        let repr: Vec<Vec<JsonInt>> = v
            .iter()
            .map(|row| {
                row.iter()
                    .map(|x| match x.to_i64() {
                        Some(i) => JsonInt::Small(i),
                        None => JsonInt::Big(x.to_string()),
                    })
                    .collect()
            })
            .collect();
        repr.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Vec<Vec<Int>>, D::Error> {
        let repr = Vec::<Vec<JsonInt>>::deserialize(d)?;
        repr.into_iter()
            .map(|row| {
                row.into_iter()
                    .map(|it| match it {
                        JsonInt::Small(x) => Ok(Int::from(x)),
                        JsonInt::Big(s) => s.parse().map_err(serde::de::Error::custom),
                    })
                    .collect()
            })
            .collect()
    }
}

/// Audit helper: confirm a rational is in canonical reduced form.
///
/// `num_rational` maintains this automatically; the audit exists so tests can
/// assert the invariant at module boundaries.
pub fn is_canonical(r: &Rat) -> bool {
    r.denom().is_positive() && r.numer().gcd(r.denom()).is_one()
}
