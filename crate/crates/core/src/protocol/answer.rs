use super::{Library, ProtocolError, Query};
use crate::field::Fe;
use crate::mds::make_mds;

/// A server's reply: the non-systematic part of its outer codeword, or the
/// plain chunks when the outer code is rate-1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Answer {
    pub chunks: Vec<Vec<Fe>>,
}

impl Answer {
    pub fn symbol_count(&self) -> usize {
        self.chunks.iter().map(Vec::len).sum()
    }
}

/// Checks a query against the library dimensions.
pub fn validate_query(library: &Library, query: &Query) -> Result<(), ProtocolError> {
    let bad = |msg: String| Err(ProtocolError::MalformedQuery(msg));
    let k = library.file_count();
    let l = library.file_len();
    if query.modulus != library.modulus() {
        return bad(format!("query modulus {} differs from library {}", query.modulus, library.modulus()));
    }
    if query.chunk_len == 0 || query.chunk_len > l {
        return bad(format!("chunk length {} invalid for files of {l} symbols", query.chunk_len));
    }
    if query.phase1.len() != k {
        return bad(format!("{} phase-1 chunks for {k} files", query.phase1.len()));
    }
    let descriptors = query.phase1.iter().chain(query.phase2.iter().flat_map(|i| &i.chunks));
    for d in descriptors {
        if d.0.len() != query.chunk_len {
            return bad(format!("descriptor of {} positions, chunk length {}", d.0.len(), query.chunk_len));
        }
        if let Some(&p) = d.0.iter().find(|&&p| p as usize >= l) {
            return bad(format!("position {p} beyond file length {l}"));
        }
    }
    for (idx, inst) in query.phase2.iter().enumerate() {
        let m = &inst.coefficients;
        if m.cols() != k || inst.chunks.len() != k || m.rows() == 0 {
            return bad(format!("instance {idx} is {}x{} over {} chunks", m.rows(), m.cols(), inst.chunks.len()));
        }
        if m.modulus() != library.modulus() {
            return bad(format!("instance {idx} coefficients use a different field"));
        }
    }
    let outer = query.outer;
    if outer.dimension != query.plain_chunks() {
        return bad(format!("outer dimension {} but {} plain chunks", outer.dimension, query.plain_chunks()));
    }
    if outer.length < outer.dimension || outer.length > 2 * outer.dimension {
        return bad(format!("outer code [{}, {}] out of range", outer.length, outer.dimension));
    }
    if !outer.is_rate_one() && outer.length as u64 >= library.modulus().get() as u64 {
        return bad(format!("outer length {} does not fit the field", outer.length));
    }
    Ok(())
}

/// Computes the server answer. Pure and deterministic.
pub fn answer_query(library: &Library, query: &Query) -> Result<Answer, ProtocolError> {
    validate_query(library, query)?;
    let q = library.modulus();
    let gather = |file: usize, positions: &[u32]| -> Vec<Fe> {
        positions.iter().map(|&p| library.file(file)[p as usize]).collect()
    };

    let mut plain: Vec<Vec<Fe>> = Vec::with_capacity(query.outer.dimension);
    for (file, d) in query.phase1.iter().enumerate() {
        plain.push(gather(file, &d.0));
    }
    for inst in &query.phase2 {
        let chunks: Vec<Vec<Fe>> = inst.chunks.iter().enumerate().map(|(f, d)| gather(f, &d.0)).collect();
        for row in 0..inst.coefficients.rows() {
            let mut acc = vec![q.zero(); query.chunk_len];
            for (file, chunk) in chunks.iter().enumerate() {
                let coeff = inst.coefficients.get(row, file);
                for (a, &s) in acc.iter_mut().zip(chunk) {
                    *a = *a + coeff * s;
                }
            }
            plain.push(acc);
        }
    }

    if query.outer.is_rate_one() {
        return Ok(Answer { chunks: plain });
    }
    let code = make_mds(query.outer.dimension, query.outer.length, q)?;
    Ok(Answer { chunks: code.parity_chunks(&plain)? })
}
