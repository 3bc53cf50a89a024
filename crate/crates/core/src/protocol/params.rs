use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;

use super::ProtocolError;
use crate::field::FieldModulus;

/// Which branch of the capacity result a tuple falls under.
///
/// `High` is `2P >= K - M`; the boundary `2P = K - M` belongs to both
/// branches and is reported as `High`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    High,
    Low,
}

impl Regime {
    pub fn of(files: usize, requests: usize, side: usize) -> Regime {
        if 2 * requests >= files.saturating_sub(side) {
            Regime::High
        } else {
            Regime::Low
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::High => "high",
            Regime::Low => "low",
        })
    }
}

/// System parameters `(N, K, P, M)` with chunk size `c` and field modulus.
///
/// Each file holds `L = c * N^2` symbols.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Params {
    servers: usize,
    files: usize,
    requests: usize,
    side: usize,
    chunk_len: usize,
    modulus: FieldModulus,
}

impl Params {
    pub fn new(
        servers: usize,
        files: usize,
        requests: usize,
        side: usize,
        chunk_len: usize,
    ) -> Result<Self, ProtocolError> {
        Self::with_modulus(servers, files, requests, side, chunk_len, FieldModulus::default())
    }

    pub fn with_modulus(
        servers: usize,
        files: usize,
        requests: usize,
        side: usize,
        chunk_len: usize,
        modulus: FieldModulus,
    ) -> Result<Self, ProtocolError> {
        let bad = |msg: String| Err(ProtocolError::InvalidParams(msg));
        if servers < 2 {
            return bad(format!("need at least 2 servers, got N={servers}"));
        }
        if files == 0 {
            return bad("library must hold at least one file".into());
        }
        if requests == 0 {
            return bad("must request at least one file (P >= 1)".into());
        }
        if requests + side > files {
            return bad(format!("P + M = {} exceeds K = {files}", requests + side));
        }
        if chunk_len == 0 {
            return bad("chunk size must be at least 1".into());
        }
        let file_len = (chunk_len as u128) * (servers as u128).pow(2);
        if file_len > u32::MAX as u128 {
            return bad(format!("file length {file_len} does not fit in 32 bits"));
        }
        let per_server = files + requests * (servers - 1);
        let needed = files.max(2 * per_server - side);
        if modulus.get() as usize <= needed {
            return bad(format!("modulus {modulus} must exceed {needed} to fit every code"));
        }
        Ok(Self { servers, files, requests, side, chunk_len, modulus })
    }

    pub fn servers(&self) -> usize {
        self.servers
    }

    pub fn files(&self) -> usize {
        self.files
    }

    pub fn requests(&self) -> usize {
        self.requests
    }

    pub fn side_size(&self) -> usize {
        self.side
    }

    pub fn chunk_len(&self) -> usize {
        self.chunk_len
    }

    pub fn modulus(&self) -> FieldModulus {
        self.modulus
    }

    pub fn chunks_per_file(&self) -> usize {
        self.servers * self.servers
    }

    pub fn file_len(&self) -> usize {
        self.chunk_len * self.chunks_per_file()
    }

    pub fn regime(&self) -> Regime {
        Regime::of(self.files, self.requests, self.side)
    }

    /// Plain chunks per server before the outer code: `K + P(N-1)`.
    pub fn per_server_chunks(&self) -> usize {
        self.files + self.requests * (self.servers - 1)
    }

    /// Chunks per server the user already knows from side information.
    pub fn known_chunks(&self) -> usize {
        self.side
    }

    pub fn answer_chunks(&self) -> usize {
        self.per_server_chunks() - self.known_chunks()
    }
}

/// Derived chunking and phase structure of the scheme, counted in chunks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemePlan {
    pub chunks_per_file: usize,
    pub per_server_chunks: usize,
    pub known_chunks: usize,
    pub answer_chunks: usize,
    /// Length of the outer code; equals `per_server_chunks` when it is rate-1.
    pub outer_length: usize,
    /// Downloaded symbols per decoded symbol.
    pub load: BigRational,
}

pub fn plan_scheme(params: &Params) -> SchemePlan {
    let p = params.per_server_chunks();
    let q = params.known_chunks();
    let outer_length = if q == 0 { p } else { 2 * p - q };
    let load = BigRational::new(
        BigInt::from(p - q),
        BigInt::from(params.requests() * params.servers()),
    );
    SchemePlan {
        chunks_per_file: params.chunks_per_file(),
        per_server_chunks: p,
        known_chunks: q,
        answer_chunks: p - q,
        outer_length,
        load,
    }
}
