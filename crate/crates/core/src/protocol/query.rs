//! User-side randomness and per-server query construction.
//!
//! Every file is scrambled by a secret permutation of its `L` symbols and
//! the scrambled file is cut into `N^2` logical chunk slots of `c` symbols.
//! Server `n` gets:
//!
//! * phase 1: logical slot `n` of every file;
//! * phase 2: one instance per other server `m` (ascending), combining the
//!   next fresh slot of every requested file with slot `m` of every other
//!   file under a column-shuffled copy of the `P x K` inner generator.
//!
//! Fresh slots are drawn in a fixed order starting at `N`; chunk descriptors
//! carry raw (post-permutation) symbol positions only.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{validate_selection, Params, ProtocolError, RequestSet};
use crate::field::{FieldModulus, Matrix};
use crate::mds::InnerGenerator;

/// Raw symbol positions forming one chunk, in lane order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ChunkDescriptor(pub Vec<u32>);

impl ChunkDescriptor {
    pub fn positions(&self) -> &[u32] {
        &self.0
    }
}

/// One block of `P` phase-2 equations over one chunk of every file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    /// `P x K`; column `i` weights the chunk of file `i`.
    pub coefficients: Matrix,
    /// One descriptor per file, in file-index order.
    pub chunks: Vec<ChunkDescriptor>,
}

/// Shape of the outer systematic code. Rate-1 (`length == dimension`)
/// means the server sends its plain chunks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OuterCodeSpec {
    pub length: usize,
    pub dimension: usize,
}

impl OuterCodeSpec {
    pub fn is_rate_one(&self) -> bool {
        self.length == self.dimension
    }

    pub fn answer_chunks(&self) -> usize {
        if self.is_rate_one() {
            self.dimension
        } else {
            self.length - self.dimension
        }
    }
}

/// Everything server `n` learns from the user.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Query {
    pub modulus: FieldModulus,
    pub chunk_len: usize,
    /// One descriptor per file, in file-index order.
    pub phase1: Vec<ChunkDescriptor>,
    /// `N - 1` instances.
    pub phase2: Vec<Instance>,
    pub outer: OuterCodeSpec,
}

impl Query {
    /// Number of plain chunks the server computes before outer coding.
    pub fn plain_chunks(&self) -> usize {
        self.phase1.len() + self.phase2.iter().map(|i| i.coefficients.rows()).sum::<usize>()
    }
}

/// How fresh chunks of requested files are located. `Unpermuted` ignores the
/// file permutation for those slots and exists only as a leaky control.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FreshChunkDraw {
    #[default]
    Permuted,
    Unpermuted,
}

/// The secret user randomness of one exchange.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Randomness {
    /// `perms[i][t]` is the raw position of scrambled symbol `t` of file `i`.
    chunk_perms: Vec<Vec<u32>>,
    /// `[server][instance]` column permutation of the inner generator.
    column_perms: Vec<Vec<Vec<usize>>>,
}

impl Randomness {
    /// Draws all permutations from ChaCha8 keyed by `seed`: file
    /// permutations first, then column permutations in server/instance order.
    pub fn from_seed(params: &Params, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (k, l, n) = (params.files(), params.file_len(), params.servers());
        let chunk_perms = (0..k)
            .map(|_| {
                let mut p: Vec<u32> = (0..l as u32).collect();
                p.shuffle(&mut rng);
                p
            })
            .collect();
        let column_perms = (0..n)
            .map(|_| {
                (0..n - 1)
                    .map(|_| {
                        let mut p: Vec<usize> = (0..k).collect();
                        p.shuffle(&mut rng);
                        p
                    })
                    .collect()
            })
            .collect();
        Self { chunk_perms, column_perms }
    }

    /// All permutations are identities; used by negative controls.
    pub fn identity(params: &Params) -> Self {
        let (k, l, n) = (params.files(), params.file_len(), params.servers());
        Self {
            chunk_perms: vec![(0..l as u32).collect(); k],
            column_perms: vec![vec![(0..k).collect(); n - 1]; n],
        }
    }

    pub fn from_parts(
        params: &Params,
        chunk_perms: Vec<Vec<u32>>,
        column_perms: Vec<Vec<Vec<usize>>>,
    ) -> Result<Self, ProtocolError> {
        let (k, l, n) = (params.files(), params.file_len(), params.servers());
        let bad = |msg: &str| Err(ProtocolError::InvalidParams(msg.to_string()));
        if chunk_perms.len() != k || !chunk_perms.iter().all(|p| is_permutation(p, l)) {
            return bad("chunk permutations must be K bijections of [0, L)");
        }
        let cols_ok = column_perms.len() == n
            && column_perms.iter().all(|per| {
                per.len() == n - 1
                    && per.iter().all(|p| {
                        let p: Vec<u32> = p.iter().map(|&x| x as u32).collect();
                        is_permutation(&p, k)
                    })
            });
        if !cols_ok {
            return bad("column permutations must be N x (N-1) bijections of [0, K)");
        }
        Ok(Self { chunk_perms, column_perms })
    }

    pub fn chunk_perm(&self, file: usize) -> &[u32] {
        &self.chunk_perms[file]
    }

    pub fn column_perm(&self, server: usize, instance: usize) -> &[usize] {
        &self.column_perms[server][instance]
    }
}

fn is_permutation(p: &[u32], len: usize) -> bool {
    if p.len() != len {
        return false;
    }
    let mut seen = vec![false; len];
    p.iter().all(|&x| (x as usize) < len && !std::mem::replace(&mut seen[x as usize], true))
}

/// Logical slot server `n` downloads verbatim in phase 1.
pub fn phase1_slot(server: usize) -> usize {
    server
}

/// The server whose phase-1 chunks instance `instance` of server `server`
/// reuses for non-requested files: the others in ascending order.
pub fn partner(server: usize, instance: usize) -> usize {
    if instance < server {
        instance
    } else {
        instance + 1
    }
}

/// Fresh logical slot of each requested file used by instance
/// `instance` of server `server`.
pub fn fresh_slot(params: &Params, server: usize, instance: usize) -> usize {
    let n = params.servers();
    n + server * (n - 1) + instance
}

/// Logical slots of `file` that server `server`'s query refers to.
pub fn referenced_slots(params: &Params, request: &RequestSet, file: usize, server: usize) -> Vec<usize> {
    let mut slots = vec![phase1_slot(server)];
    for instance in 0..params.servers() - 1 {
        slots.push(if request.contains(file) {
            fresh_slot(params, server, instance)
        } else {
            phase1_slot(partner(server, instance))
        });
    }
    slots
}

fn descriptor(randomness: &Randomness, chunk_len: usize, file: usize, slot: usize, permuted: bool) -> ChunkDescriptor {
    let perm = randomness.chunk_perm(file);
    ChunkDescriptor(
        (slot * chunk_len..(slot + 1) * chunk_len)
            .map(|t| if permuted { perm[t] } else { t as u32 })
            .collect(),
    )
}

fn outer_spec(params: &Params) -> OuterCodeSpec {
    let p = params.per_server_chunks();
    let q = params.known_chunks();
    OuterCodeSpec { length: if q == 0 { p } else { 2 * p - q }, dimension: p }
}

/// Builds the query for one server from explicit randomness.
pub fn server_query(
    params: &Params,
    request: &RequestSet,
    randomness: &Randomness,
    server: usize,
    draw: FreshChunkDraw,
) -> Result<Query, ProtocolError> {
    let inner = InnerGenerator::new(params.requests(), params.files(), params.modulus())?;
    Ok(server_query_with(params, request, randomness, server, draw, &inner))
}

pub(crate) fn server_query_with(
    params: &Params,
    request: &RequestSet,
    randomness: &Randomness,
    server: usize,
    draw: FreshChunkDraw,
    inner: &InnerGenerator,
) -> Query {
    let c = params.chunk_len();
    let phase1 = (0..params.files())
        .map(|i| descriptor(randomness, c, i, phase1_slot(server), true))
        .collect();
    let phase2 = (0..params.servers() - 1)
        .map(|instance| {
            let chunks = (0..params.files())
                .map(|i| {
                    if request.contains(i) {
                        let slot = fresh_slot(params, server, instance);
                        descriptor(randomness, c, i, slot, draw == FreshChunkDraw::Permuted)
                    } else {
                        descriptor(randomness, c, i, phase1_slot(partner(server, instance)), true)
                    }
                })
                .collect();
            Instance { coefficients: inner.permuted(randomness.column_perm(server, instance)), chunks }
        })
        .collect();
    Query { modulus: params.modulus(), chunk_len: c, phase1, phase2, outer: outer_spec(params) }
}

/// Queries for all servers from explicit randomness.
pub fn build_queries(
    params: &Params,
    request: &RequestSet,
    side: &BTreeSet<usize>,
    randomness: &Randomness,
) -> Result<Vec<Query>, ProtocolError> {
    validate_selection(params, request, side)?;
    let inner = InnerGenerator::new(params.requests(), params.files(), params.modulus())?;
    Ok((0..params.servers())
        .map(|n| server_query_with(params, request, randomness, n, FreshChunkDraw::Permuted, &inner))
        .collect())
}

/// Queries for all servers; a deterministic function of the arguments.
pub fn generate_queries(
    params: &Params,
    request: &RequestSet,
    side: &BTreeSet<usize>,
    seed: u64,
) -> Result<Vec<Query>, ProtocolError> {
    build_queries(params, request, side, &Randomness::from_seed(params, seed))
}
