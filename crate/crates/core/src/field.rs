//! Prime-field arithmetic and dense linear algebra over 𝔽_q.
//!
//! Elements are always stored reduced, so two elements are equal exactly
//! when their canonical byte encodings are equal.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use thiserror::Error;

/// Default modulus, 2^16 + 1.
pub const DEFAULT_MODULUS: u32 = 65_537;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("modulus {0} is not a prime")]
    NotPrime(u32),
    #[error("elements from different fields: q={left} vs q={right}")]
    ModulusMismatch { left: u32, right: u32 },
    #[error("division by zero")]
    DivisionByZero,
    #[error("matrix is singular")]
    Singular,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("value {value} is not reduced modulo {modulus}")]
    ValueOutOfRange { value: u32, modulus: u32 },
}

/// A prime modulus `q`, checked at construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldModulus(u32);

impl FieldModulus {
    pub fn new(q: u32) -> Result<Self, FieldError> {
        if is_prime(q) {
            Ok(Self(q))
        } else {
            Err(FieldError::NotPrime(q))
        }
    }

    pub fn get(self) -> u32 {
        self.0
    }

    /// Reduces an arbitrary integer into the field.
    pub fn reduce(self, value: u64) -> Fe {
        Fe { value: (value % self.0 as u64) as u32, modulus: self }
    }

    /// Wraps an already-reduced value, rejecting anything `>= q`.
    pub fn element(self, value: u32) -> Result<Fe, FieldError> {
        if value < self.0 {
            Ok(Fe { value, modulus: self })
        } else {
            Err(FieldError::ValueOutOfRange { value, modulus: self.0 })
        }
    }

    pub fn zero(self) -> Fe {
        Fe { value: 0, modulus: self }
    }

    pub fn one(self) -> Fe {
        Fe { value: 1, modulus: self }
    }
}

impl Default for FieldModulus {
    fn default() -> Self {
        Self(DEFAULT_MODULUS)
    }
}

impl fmt::Display for FieldModulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

fn mod_pow(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % m;
        }
        base = base * base % m;
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin; bases {2, 7, 61} are exact below 2^32.
pub fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u32, 3, 5, 7, 11, 13, 61] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let n64 = n as u64;
    let mut d = n64 - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 7, 61] {
        let mut x = mod_pow(a, d, n64);
        if x == 1 || x == n64 - 1 {
            continue;
        }
        for _ in 1..s {
            x = x * x % n64;
            if x == n64 - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// An element of 𝔽_q. Always canonical: `value < q`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fe {
    value: u32,
    modulus: FieldModulus,
}

impl fmt::Debug for Fe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

impl fmt::Display for Fe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

impl Fe {
    pub fn value(self) -> u32 {
        self.value
    }

    pub fn modulus(self) -> FieldModulus {
        self.modulus
    }

    pub fn is_zero(self) -> bool {
        self.value == 0
    }

    fn same_field(self, other: Fe) -> Result<u64, FieldError> {
        if self.modulus == other.modulus {
            Ok(self.modulus.0 as u64)
        } else {
            Err(FieldError::ModulusMismatch { left: self.modulus.0, right: other.modulus.0 })
        }
    }

    pub fn checked_add(self, rhs: Fe) -> Result<Fe, FieldError> {
        self.same_field(rhs)?;
        Ok(self.modulus.reduce(self.value as u64 + rhs.value as u64))
    }

    pub fn checked_sub(self, rhs: Fe) -> Result<Fe, FieldError> {
        let q = self.same_field(rhs)?;
        Ok(self.modulus.reduce(self.value as u64 + q - rhs.value as u64))
    }

    pub fn checked_mul(self, rhs: Fe) -> Result<Fe, FieldError> {
        self.same_field(rhs)?;
        Ok(self.modulus.reduce(self.value as u64 * rhs.value as u64))
    }

    /// Multiplicative inverse by the extended Euclidean algorithm.
    pub fn inv(self) -> Result<Fe, FieldError> {
        if self.value == 0 {
            return Err(FieldError::DivisionByZero);
        }
        let q = self.modulus.0 as i64;
        let (mut r0, mut r1) = (q, self.value as i64);
        let (mut t0, mut t1) = (0i64, 1i64);
        while r1 != 0 {
            let quot = r0 / r1;
            (r0, r1) = (r1, r0 - quot * r1);
            (t0, t1) = (t1, t0 - quot * t1);
        }
        debug_assert_eq!(r0, 1);
        Ok(Fe { value: t0.rem_euclid(q) as u32, modulus: self.modulus })
    }

    pub fn pow(self, exp: u64) -> Fe {
        Fe {
            value: mod_pow(self.value as u64, exp, self.modulus.0 as u64) as u32,
            modulus: self.modulus,
        }
    }
}

// Operators panic on mixed moduli; use the `checked_*` forms when the
// operands come from untrusted input.
impl Add for Fe {
    type Output = Fe;
    fn add(self, rhs: Fe) -> Fe {
        self.checked_add(rhs).expect("field operands must share a modulus")
    }
}

impl Sub for Fe {
    type Output = Fe;
    fn sub(self, rhs: Fe) -> Fe {
        self.checked_sub(rhs).expect("field operands must share a modulus")
    }
}

impl Mul for Fe {
    type Output = Fe;
    fn mul(self, rhs: Fe) -> Fe {
        self.checked_mul(rhs).expect("field operands must share a modulus")
    }
}

impl Neg for Fe {
    type Output = Fe;
    fn neg(self) -> Fe {
        self.modulus.zero() - self
    }
}

/// Dense row-major matrix over a single prime field.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Matrix {
    modulus: FieldModulus,
    rows: usize,
    cols: usize,
    entries: Vec<Fe>,
}

impl Matrix {
    pub fn from_entries(
        modulus: FieldModulus,
        rows: usize,
        cols: usize,
        entries: Vec<Fe>,
    ) -> Result<Self, FieldError> {
        if entries.len() != rows * cols {
            return Err(FieldError::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        if let Some(bad) = entries.iter().find(|e| e.modulus != modulus) {
            return Err(FieldError::ModulusMismatch { left: modulus.0, right: bad.modulus.0 });
        }
        Ok(Self { modulus, rows, cols, entries })
    }

    /// Builds a matrix from raw `u32` values, each of which must already be reduced.
    pub fn from_values(
        modulus: FieldModulus,
        rows: usize,
        cols: usize,
        values: &[u32],
    ) -> Result<Self, FieldError> {
        let entries = values.iter().map(|&v| modulus.element(v)).collect::<Result<Vec<_>, _>>()?;
        Self::from_entries(modulus, rows, cols, entries)
    }

    pub fn zeros(modulus: FieldModulus, rows: usize, cols: usize) -> Self {
        Self { modulus, rows, cols, entries: vec![modulus.zero(); rows * cols] }
    }

    pub fn identity(modulus: FieldModulus, n: usize) -> Self {
        let mut m = Self::zeros(modulus, n, n);
        for i in 0..n {
            m.set(i, i, modulus.one());
        }
        m
    }

    /// `rows x points.len()` Vandermonde matrix; entry `(i, j)` is `points[j]^i`.
    pub fn vandermonde(modulus: FieldModulus, rows: usize, points: &[Fe]) -> Self {
        let cols = points.len();
        let mut m = Self::zeros(modulus, rows, cols);
        for (j, &x) in points.iter().enumerate() {
            let mut power = modulus.one();
            for i in 0..rows {
                m.set(i, j, power);
                power = power * x;
            }
        }
        m
    }

    pub fn modulus(&self) -> FieldModulus {
        self.modulus
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[Fe] {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> Fe {
        self.entries[row * self.cols + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: Fe) {
        assert_eq!(value.modulus, self.modulus);
        self.entries[row * self.cols + col] = value;
    }

    pub fn row(&self, row: usize) -> &[Fe] {
        &self.entries[row * self.cols..(row + 1) * self.cols]
    }

    pub fn column(&self, col: usize) -> Vec<Fe> {
        (0..self.rows).map(|r| self.get(r, col)).collect()
    }

    /// New matrix whose `j`-th column is column `indices[j]` of `self`.
    pub fn select_columns(&self, indices: &[usize]) -> Matrix {
        let mut out = Matrix::zeros(self.modulus, self.rows, indices.len());
        for (j, &src) in indices.iter().enumerate() {
            for r in 0..self.rows {
                out.set(r, j, self.get(r, src));
            }
        }
        out
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = Matrix::zeros(self.modulus, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.set(c, r, self.get(r, c));
            }
        }
        out
    }

    pub fn mul_vec(&self, x: &[Fe]) -> Result<Vec<Fe>, FieldError> {
        if x.len() != self.cols {
            return Err(FieldError::DimensionMismatch(format!(
                "vector of length {} against {} columns",
                x.len(),
                self.cols
            )));
        }
        let mut out = Vec::with_capacity(self.rows);
        for r in 0..self.rows {
            let mut acc = self.modulus.zero();
            for (a, &b) in self.row(r).iter().zip(x) {
                acc = acc.checked_add(a.checked_mul(b)?)?;
            }
            out.push(acc);
        }
        Ok(out)
    }

    pub fn mul(&self, rhs: &Matrix) -> Result<Matrix, FieldError> {
        if self.cols != rhs.rows {
            return Err(FieldError::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        if self.modulus != rhs.modulus {
            return Err(FieldError::ModulusMismatch { left: self.modulus.0, right: rhs.modulus.0 });
        }
        let mut out = Matrix::zeros(self.modulus, self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a.is_zero() {
                    continue;
                }
                for c in 0..rhs.cols {
                    let cur = out.get(r, c);
                    out.set(r, c, cur + a * rhs.get(k, c));
                }
            }
        }
        Ok(out)
    }

    /// Row-reduces `self` in place (first non-zero pivot) and returns the rank.
    fn eliminate(&mut self, companion: Option<&mut Matrix>) -> usize {
        let mut companion = companion;
        let mut rank = 0;
        for col in 0..self.cols {
            if rank == self.rows {
                break;
            }
            let Some(pivot) = (rank..self.rows).find(|&r| !self.get(r, col).is_zero()) else {
                continue;
            };
            self.swap_rows(pivot, rank);
            if let Some(m) = companion.as_deref_mut() {
                m.swap_rows(pivot, rank);
            }
            let inv = self.get(rank, col).inv().expect("pivot is non-zero");
            self.scale_row(rank, inv);
            if let Some(m) = companion.as_deref_mut() {
                m.scale_row(rank, inv);
            }
            for r in 0..self.rows {
                if r == rank {
                    continue;
                }
                let factor = self.get(r, col);
                if factor.is_zero() {
                    continue;
                }
                self.sub_row_multiple(r, rank, factor);
                if let Some(m) = companion.as_deref_mut() {
                    m.sub_row_multiple(r, rank, factor);
                }
            }
            rank += 1;
        }
        rank
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.entries.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    fn scale_row(&mut self, row: usize, factor: Fe) {
        for c in 0..self.cols {
            let v = self.get(row, c);
            self.set(row, c, v * factor);
        }
    }

    /// row[target] -= factor * row[source]
    fn sub_row_multiple(&mut self, target: usize, source: usize, factor: Fe) {
        for c in 0..self.cols {
            let v = self.get(target, c) - factor * self.get(source, c);
            self.set(target, c, v);
        }
    }

    pub fn rank(&self) -> usize {
        self.clone().eliminate(None)
    }

    pub fn inverse(&self) -> Result<Matrix, FieldError> {
        if self.rows != self.cols {
            return Err(FieldError::DimensionMismatch(format!(
                "cannot invert a {}x{} matrix",
                self.rows, self.cols
            )));
        }
        let mut work = self.clone();
        let mut inv = Matrix::identity(self.modulus, self.rows);
        if work.eliminate(Some(&mut inv)) < self.rows {
            return Err(FieldError::Singular);
        }
        Ok(inv)
    }

    /// Solves `self · x = b` for square `self`.
    pub fn solve(&self, b: &[Fe]) -> Result<Vec<Fe>, FieldError> {
        if self.rows != self.cols {
            return Err(FieldError::DimensionMismatch(format!(
                "solve needs a square matrix, got {}x{}",
                self.rows, self.cols
            )));
        }
        if b.len() != self.rows {
            return Err(FieldError::DimensionMismatch(format!(
                "right-hand side of length {} for {} rows",
                b.len(),
                self.rows
            )));
        }
        if let Some(bad) = b.iter().find(|e| e.modulus != self.modulus) {
            return Err(FieldError::ModulusMismatch { left: self.modulus.0, right: bad.modulus.0 });
        }
        let mut work = self.clone();
        let mut rhs = Matrix::from_entries(self.modulus, b.len(), 1, b.to_vec())?;
        if work.eliminate(Some(&mut rhs)) < self.rows {
            return Err(FieldError::Singular);
        }
        Ok(rhs.entries)
    }
}
