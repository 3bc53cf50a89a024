use std::collections::BTreeMap;

use super::{Answer, Params, ProtocolError, Query, RequestSet, SideInfo};
use crate::field::Fe;
use crate::mds::make_mds;

/// Raw symbols the user has learned so far, per file.
struct Known {
    files: Vec<Vec<Option<Fe>>>,
}

impl Known {
    fn new(params: &Params) -> Self {
        Self { files: vec![vec![None; params.file_len()]; params.files()] }
    }

    fn store(&mut self, file: usize, positions: &[u32], values: &[Fe]) {
        for (&p, &v) in positions.iter().zip(values) {
            self.files[file][p as usize] = Some(v);
        }
    }

    fn lookup(&self, file: usize, positions: &[u32]) -> Option<Vec<Fe>> {
        positions.iter().map(|&p| self.files[file][p as usize]).collect()
    }
}

fn violation(msg: impl Into<String>) -> ProtocolError {
    ProtocolError::InvariantViolation(msg.into())
}

/// Recovers server `n`'s `p'` plain chunks from its answer and side information.
fn plain_chunks(
    params: &Params,
    side: &SideInfo,
    query: &Query,
    answer: &Answer,
    server: usize,
) -> Result<Vec<Vec<Fe>>, ProtocolError> {
    let c = params.chunk_len();
    if answer.chunks.len() != query.outer.answer_chunks() || answer.chunks.iter().any(|ch| ch.len() != c) {
        return Err(violation(format!("server {server} answer has the wrong shape")));
    }
    if query.outer.is_rate_one() {
        return Ok(answer.chunks.clone());
    }
    let dim = query.outer.dimension;
    let mut known: Vec<(usize, Vec<Fe>)> = Vec::with_capacity(dim);
    for file in side.indices() {
        let content = side.file(file).expect("index from side set");
        let values = query.phase1[file].0.iter().map(|&p| content[p as usize]).collect();
        known.push((file, values));
    }
    known.extend(answer.chunks.iter().cloned().enumerate().map(|(j, ch)| (dim + j, ch)));
    let code = make_mds(dim, query.outer.length, params.modulus())?;
    code.recover_chunks(&known)
        .map_err(|e| violation(format!("outer decode failed for server {server}: {e}")))
}

/// Recovers the requested files from all answers and the side information.
///
/// Phase-1 chunks come straight out of each server's plain chunks; each
/// phase-2 instance is reduced by the known non-requested chunks and the
/// remaining `P x P` system is solved lane by lane.
pub fn decode(
    params: &Params,
    request: &RequestSet,
    side: &SideInfo,
    queries: &[Query],
    answers: &[Answer],
) -> Result<BTreeMap<usize, Vec<Fe>>, ProtocolError> {
    super::validate_selection(params, request, &side.indices())?;
    let n = params.servers();
    if queries.len() != n || answers.len() != n {
        return Err(violation(format!("expected {n} queries and answers")));
    }
    let mut known = Known::new(params);
    for (file, content) in side.indices().into_iter().map(|i| (i, side.file(i).unwrap())) {
        if content.len() != params.file_len() {
            return Err(ProtocolError::InvalidSelection(format!("side file {file} has the wrong length")));
        }
        let all: Vec<u32> = (0..params.file_len() as u32).collect();
        known.store(file, &all, content);
    }

    let plains: Vec<Vec<Vec<Fe>>> = (0..n)
        .map(|s| plain_chunks(params, side, &queries[s], &answers[s], s))
        .collect::<Result<_, _>>()?;

    for (query, plain) in queries.iter().zip(&plains) {
        for (file, d) in query.phase1.iter().enumerate() {
            known.store(file, &d.0, &plain[file]);
        }
    }

    let requested: Vec<usize> = request.indices().iter().copied().collect();
    let c = params.chunk_len();
    for (server, (query, plain)) in queries.iter().zip(&plains).enumerate() {
        let mut offset = params.files();
        for inst in &query.phase2 {
            let rows = inst.coefficients.rows();
            let mut rhs: Vec<Vec<Fe>> = plain[offset..offset + rows].to_vec();
            offset += rows;
            for (file, d) in inst.chunks.iter().enumerate() {
                if request.contains(file) {
                    continue;
                }
                let values = known
                    .lookup(file, &d.0)
                    .ok_or_else(|| violation(format!("server {server}: interference chunk of file {file} unknown")))?;
                for (row, r) in rhs.iter_mut().enumerate() {
                    let coeff = inst.coefficients.get(row, file);
                    for (acc, &v) in r.iter_mut().zip(&values) {
                        *acc = *acc - coeff * v;
                    }
                }
            }
            let system = inst.coefficients.select_columns(&requested);
            let inverse = system
                .inverse()
                .map_err(|e| violation(format!("server {server}: phase-2 system not invertible: {e}")))?;
            let mut solved = vec![vec![params.modulus().zero(); c]; requested.len()];
            for lane in 0..c {
                let b: Vec<Fe> = rhs.iter().map(|r| r[lane]).collect();
                for (i, v) in inverse.mul_vec(&b)?.into_iter().enumerate() {
                    solved[i][lane] = v;
                }
            }
            for (i, &file) in requested.iter().enumerate() {
                known.store(file, &inst.chunks[file].0, &solved[i]);
            }
        }
    }

    requested
        .iter()
        .map(|&file| {
            known
                .lookup(file, &(0..params.file_len() as u32).collect::<Vec<_>>())
                .map(|content| (file, content))
                .ok_or_else(|| violation(format!("file {file} not fully covered by the answers")))
        })
        .collect()
}
