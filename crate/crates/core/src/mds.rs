//! Systematic Reed-Solomon style MDS codes over a prime field, plus the
//! non-systematic Vandermonde generator used for the phase-2 combinations.

use itertools::Itertools;
use thiserror::Error;

use crate::field::{Fe, FieldError, FieldModulus, Matrix};

/// Largest number of `k`-subsets [`is_mds_generator`] will enumerate.
pub const MDS_CHECK_LIMIT: u128 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MdsError {
    #[error("code length {length} needs a field larger than q={modulus}")]
    FieldTooSmall { length: usize, modulus: u32 },
    #[error("invalid code dimensions k={k}, n={n}")]
    InvalidDimensions { k: usize, n: usize },
    #[error("expected {expected} symbols, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("need {needed} known positions, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("position {0} given more than once")]
    DuplicatePosition(usize),
    #[error("position {position} outside code of length {length}")]
    PositionOutOfRange { position: usize, length: usize },
    #[error("known symbols are not consistent with any codeword")]
    Inconsistent,
    #[error("{subsets} subsets exceed the enumeration limit of {limit}")]
    EnumerationTooLarge { subsets: u128, limit: u128 },
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// A systematic `[n, k]` MDS code with generator `[I_k | parity]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MdsCode {
    n: usize,
    k: usize,
    eval_points: Vec<Fe>,
    generator: Matrix,
}

/// Builds the systematic `[n, k]` code from the Vandermonde matrix on
/// evaluation points `0, 1, ..., n-1`.
pub fn make_mds(k: usize, n: usize, modulus: FieldModulus) -> Result<MdsCode, MdsError> {
    if k == 0 || k > n {
        return Err(MdsError::InvalidDimensions { k, n });
    }
    if n as u64 >= modulus.get() as u64 {
        return Err(MdsError::FieldTooSmall { length: n, modulus: modulus.get() });
    }
    let eval_points: Vec<Fe> = (0..n as u64).map(|x| modulus.reduce(x)).collect();
    let vandermonde = Matrix::vandermonde(modulus, k, &eval_points);
    let head: Vec<usize> = (0..k).collect();
    let generator = vandermonde.select_columns(&head).inverse()?.mul(&vandermonde)?;
    Ok(MdsCode { n, k, eval_points, generator })
}

/// Binomial coefficient, saturating at `u128::MAX`.
pub(crate) fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// True iff every `rows` columns of `generator` are linearly independent.
pub fn is_mds_generator(generator: &Matrix) -> Result<bool, MdsError> {
    let (k, n) = (generator.rows(), generator.cols());
    if k > n {
        return Ok(false);
    }
    let subsets = binomial(n as u64, k as u64);
    if subsets > MDS_CHECK_LIMIT {
        return Err(MdsError::EnumerationTooLarge { subsets, limit: MDS_CHECK_LIMIT });
    }
    Ok((0..n).combinations(k).all(|cols| generator.select_columns(&cols).rank() == k))
}

pub fn check_mds(code: &MdsCode) -> Result<bool, MdsError> {
    is_mds_generator(&code.generator)
}

impl MdsCode {
    pub fn length(&self) -> usize {
        self.n
    }

    pub fn dimension(&self) -> usize {
        self.k
    }

    pub fn modulus(&self) -> FieldModulus {
        self.generator.modulus()
    }

    pub fn eval_points(&self) -> &[Fe] {
        &self.eval_points
    }

    pub fn generator(&self) -> &Matrix {
        &self.generator
    }

    pub fn encode(&self, message: &[Fe]) -> Result<Vec<Fe>, MdsError> {
        if message.len() != self.k {
            return Err(MdsError::LengthMismatch { expected: self.k, actual: message.len() });
        }
        Ok(self.generator.transpose().mul_vec(message)?)
    }

    /// Encodes `k` equally long chunks lane by lane; output chunk `j` is
    /// codeword position `j` of every lane.
    pub fn encode_chunks(&self, chunks: &[Vec<Fe>]) -> Result<Vec<Vec<Fe>>, MdsError> {
        if chunks.len() != self.k {
            return Err(MdsError::LengthMismatch { expected: self.k, actual: chunks.len() });
        }
        let lanes = chunks.first().map_or(0, Vec::len);
        if let Some(bad) = chunks.iter().find(|c| c.len() != lanes) {
            return Err(MdsError::LengthMismatch { expected: lanes, actual: bad.len() });
        }
        let modulus = self.modulus();
        let mut out = vec![vec![modulus.zero(); lanes]; self.n];
        for (j, column) in out.iter_mut().enumerate() {
            for (i, chunk) in chunks.iter().enumerate() {
                let g = self.generator.get(i, j);
                if g.is_zero() {
                    continue;
                }
                for (acc, &sym) in column.iter_mut().zip(chunk) {
                    *acc = acc.checked_add(g.checked_mul(sym)?)?;
                }
            }
        }
        Ok(out)
    }

    /// Parity part (positions `k..n`) of [`MdsCode::encode_chunks`].
    pub fn parity_chunks(&self, chunks: &[Vec<Fe>]) -> Result<Vec<Vec<Fe>>, MdsError> {
        let mut all = self.encode_chunks(chunks)?;
        Ok(all.split_off(self.k))
    }

    pub fn recover(&self, known: &[(usize, Fe)]) -> Result<Vec<Fe>, MdsError> {
        let lanes: Vec<(usize, Vec<Fe>)> = known.iter().map(|&(p, v)| (p, vec![v])).collect();
        let chunks = self.recover_chunks(&lanes)?;
        Ok(chunks.into_iter().map(|c| c[0]).collect())
    }

    /// Recovers the `k` message chunks from at least `k` known codeword
    /// chunks. Extra positions are checked against the re-encoding.
    pub fn recover_chunks(&self, known: &[(usize, Vec<Fe>)]) -> Result<Vec<Vec<Fe>>, MdsError> {
        let mut seen = vec![false; self.n];
        for &(pos, _) in known {
            if pos >= self.n {
                return Err(MdsError::PositionOutOfRange { position: pos, length: self.n });
            }
            if std::mem::replace(&mut seen[pos], true) {
                return Err(MdsError::DuplicatePosition(pos));
            }
        }
        if known.len() < self.k {
            return Err(MdsError::InsufficientData { needed: self.k, got: known.len() });
        }
        let lanes = known[0].1.len();
        if let Some((_, bad)) = known.iter().find(|(_, v)| v.len() != lanes) {
            return Err(MdsError::LengthMismatch { expected: lanes, actual: bad.len() });
        }

        let (basis, extra) = known.split_at(self.k);
        let positions: Vec<usize> = basis.iter().map(|(p, _)| *p).collect();
        // codeword[positions] = G[:, positions]^T · m
        let system = self.generator.select_columns(&positions).transpose();
        let inverse = system.inverse().map_err(|e| match e {
            // Cannot happen for an MDS generator, but the error is the honest one.
            FieldError::Singular => MdsError::Inconsistent,
            other => other.into(),
        })?;
        let modulus = self.modulus();
        let mut message = vec![vec![modulus.zero(); lanes]; self.k];
        for lane in 0..lanes {
            let rhs: Vec<Fe> = basis.iter().map(|(_, v)| v[lane]).collect();
            for (i, value) in inverse.mul_vec(&rhs)?.into_iter().enumerate() {
                message[i][lane] = value;
            }
        }

        if !extra.is_empty() {
            let codeword = self.encode_chunks(&message)?;
            if extra.iter().any(|(pos, v)| &codeword[*pos] != v) {
                return Err(MdsError::Inconsistent);
            }
        }
        Ok(message)
    }
}

/// The `rows x cols` Vandermonde generator on points `1..=cols`, kept
/// non-systematic. Row `i` holds the `i`-th powers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InnerGenerator {
    matrix: Matrix,
}

impl InnerGenerator {
    pub fn new(rows: usize, cols: usize, modulus: FieldModulus) -> Result<Self, MdsError> {
        if rows == 0 || rows > cols {
            return Err(MdsError::InvalidDimensions { k: rows, n: cols });
        }
        if cols as u64 >= modulus.get() as u64 {
            return Err(MdsError::FieldTooSmall { length: cols, modulus: modulus.get() });
        }
        let points: Vec<Fe> = (1..=cols as u64).map(|x| modulus.reduce(x)).collect();
        Ok(Self { matrix: Matrix::vandermonde(modulus, rows, &points) })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    /// Column `j` of the result is column `perm[j]` of the canonical matrix.
    pub fn permuted(&self, perm: &[usize]) -> Matrix {
        self.matrix.select_columns(perm)
    }
}
