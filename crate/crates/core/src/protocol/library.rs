use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Params, ProtocolError};
use crate::field::{Fe, FieldModulus};

/// `K` files of `L` field symbols each, replicated at every server.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Library {
    modulus: FieldModulus,
    file_len: usize,
    files: Vec<Vec<Fe>>,
}

impl Library {
    pub fn new(modulus: FieldModulus, files: Vec<Vec<Fe>>) -> Result<Self, ProtocolError> {
        let file_len = files.first().map_or(0, Vec::len);
        if files.is_empty() || file_len == 0 {
            return Err(ProtocolError::InvalidLibrary("library has no symbols".into()));
        }
        for (i, f) in files.iter().enumerate() {
            if f.len() != file_len {
                return Err(ProtocolError::InvalidLibrary(format!(
                    "file {i} has {} symbols, expected {file_len}",
                    f.len()
                )));
            }
            if f.iter().any(|s| s.modulus() != modulus) {
                return Err(ProtocolError::InvalidLibrary(format!(
                    "file {i} has symbols outside the field"
                )));
            }
        }
        Ok(Self { modulus, file_len, files })
    }

    /// Uniformly random library, reproducible from `seed`.
    pub fn random(modulus: FieldModulus, files: usize, file_len: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let files = (0..files)
            .map(|_| {
                (0..file_len)
                    .map(|_| modulus.reduce(rng.random_range(0..modulus.get() as u64)))
                    .collect()
            })
            .collect();
        Self { modulus, file_len, files }
    }

    pub fn modulus(&self) -> FieldModulus {
        self.modulus
    }

    pub fn file_count(&self) -> usize {
        self.files.len()
    }

    pub fn file_len(&self) -> usize {
        self.file_len
    }

    pub fn file(&self, index: usize) -> &[Fe] {
        &self.files[index]
    }

    pub fn files(&self) -> &[Vec<Fe>] {
        &self.files
    }

    pub fn check_params(&self, params: &Params) -> Result<(), ProtocolError> {
        if self.modulus != params.modulus()
            || self.file_count() != params.files()
            || self.file_len != params.file_len()
        {
            return Err(ProtocolError::InvalidLibrary(format!(
                "library (q={}, K={}, L={}) does not match params (q={}, K={}, L={})",
                self.modulus,
                self.file_count(),
                self.file_len,
                params.modulus(),
                params.files(),
                params.file_len()
            )));
        }
        Ok(())
    }
}

/// Indices of the files the user wants. Indices are 0-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RequestSet(BTreeSet<usize>);

impl RequestSet {
    pub fn new(indices: impl IntoIterator<Item = usize>) -> Self {
        Self(indices.into_iter().collect())
    }

    pub fn indices(&self) -> &BTreeSet<usize> {
        &self.0
    }

    pub fn contains(&self, index: usize) -> bool {
        self.0.contains(&index)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Files the user already holds, keyed by library index.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SideInfo {
    files: BTreeMap<usize, Vec<Fe>>,
}

impl SideInfo {
    pub fn new(files: BTreeMap<usize, Vec<Fe>>) -> Self {
        Self { files }
    }

    pub fn from_library(library: &Library, indices: impl IntoIterator<Item = usize>) -> Self {
        let files = indices.into_iter().map(|i| (i, library.file(i).to_vec())).collect();
        Self { files }
    }

    pub fn indices(&self) -> BTreeSet<usize> {
        self.files.keys().copied().collect()
    }

    pub fn file(&self, index: usize) -> Option<&[Fe]> {
        self.files.get(&index).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.files.len()
    }

    pub fn is_empty(&self) -> bool {
        self.files.is_empty()
    }
}

/// Checks sizes, ranges and disjointness of a request and side-information index set.
pub fn validate_selection(
    params: &Params,
    request: &RequestSet,
    side: &BTreeSet<usize>,
) -> Result<(), ProtocolError> {
    let bad = |msg: String| Err(ProtocolError::InvalidSelection(msg));
    if request.len() != params.requests() {
        return bad(format!("request has {} files, expected P={}", request.len(), params.requests()));
    }
    if side.len() != params.side_size() {
        return bad(format!("side information has {} files, expected M={}", side.len(), params.side_size()));
    }
    if let Some(i) = request.indices().iter().chain(side).find(|&&i| i >= params.files()) {
        return bad(format!("file index {i} out of range for K={}", params.files()));
    }
    if let Some(i) = request.indices().intersection(side).next() {
        return bad(format!("file {i} is both requested and held"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_library_is_reproducible() {
        let q = FieldModulus::default();
        let a = Library::random(q, 3, 8, 42);
        assert_eq!(a, Library::random(q, 3, 8, 42));
        assert_ne!(a, Library::random(q, 3, 8, 43));
        assert_eq!(a.file_count(), 3);
        assert_eq!(a.file_len(), 8);
    }

    #[test]
    fn ragged_library_rejected() {
        let q = FieldModulus::default();
        assert!(Library::new(q, vec![vec![q.one(); 4], vec![q.one(); 3]]).is_err());
        assert!(Library::new(q, vec![]).is_err());
    }

    #[test]
    fn selection_validation() {
        let params = Params::new(2, 4, 2, 1, 1).unwrap();
        let side: BTreeSet<usize> = [3].into();
        assert!(validate_selection(&params, &RequestSet::new([0, 1]), &side).is_ok());
        assert!(validate_selection(&params, &RequestSet::new([0, 3]), &side).is_err());
        assert!(validate_selection(&params, &RequestSet::new([0]), &side).is_err());
        assert!(validate_selection(&params, &RequestSet::new([0, 4]), &side).is_err());
        assert!(validate_selection(&params, &RequestSet::new([0, 1]), &BTreeSet::new()).is_err());
    }
}
