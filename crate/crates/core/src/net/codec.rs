//! Frames and payload encodings. Every integer on the wire is a `u32` in
//! little-endian order; field elements are sent reduced.

use std::io::{self, Read, Write};

use super::NetError;
use crate::field::{Fe, FieldModulus, Matrix};
use crate::protocol::{Answer, ChunkDescriptor, Instance, OuterCodeSpec, Query, Transcript};

/// Largest accepted payload.
pub const MAX_FRAME: usize = 64 << 20;
pub const PROTOCOL_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum MessageKind {
    Hello = 1,
    Query = 2,
    Answer = 3,
    Error = 4,
}

impl MessageKind {
    pub fn from_byte(b: u8) -> Option<Self> {
        match b {
            1 => Some(Self::Hello),
            2 => Some(Self::Query),
            3 => Some(Self::Answer),
            4 => Some(Self::Error),
            _ => None,
        }
    }
}

/// One frame: `u32` payload length, `u8` kind, payload.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WireMessage {
    pub kind: MessageKind,
    pub payload: Vec<u8>,
}

impl WireMessage {
    pub fn new(kind: MessageKind, payload: Vec<u8>) -> Self {
        Self { kind, payload }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(5 + self.payload.len());
        out.extend_from_slice(&(self.payload.len() as u32).to_le_bytes());
        out.push(self.kind as u8);
        out.extend_from_slice(&self.payload);
        out
    }
}

pub fn write_message<W: Write>(w: &mut W, msg: &WireMessage) -> io::Result<()> {
    if msg.payload.len() > MAX_FRAME {
        return Err(io::Error::new(io::ErrorKind::InvalidInput, "payload exceeds frame limit"));
    }
    w.write_all(&msg.to_bytes())?;
    w.flush()
}

/// Reads one frame. Oversized lengths are rejected before any payload is
/// read; unknown kinds consume their payload.
pub fn read_message<R: Read>(r: &mut R) -> Result<WireMessage, NetError> {
    let mut header = [0u8; 5];
    r.read_exact(&mut header)?;
    let len = u32::from_le_bytes(header[..4].try_into().unwrap()) as usize;
    if len > MAX_FRAME {
        return Err(NetError::Oversized(len));
    }
    let mut payload = vec![0u8; len];
    r.read_exact(&mut payload)?;
    match MessageKind::from_byte(header[4]) {
        Some(kind) => Ok(WireMessage { kind, payload }),
        None => Err(NetError::UnsupportedKind(header[4])),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u32)]
pub enum ErrorCode {
    MalformedFrame = 1,
    MalformedQuery = 2,
    UnsupportedKind = 3,
    Internal = 4,
}

impl ErrorCode {
    pub fn from_u32(v: u32) -> Option<Self> {
        match v {
            1 => Some(Self::MalformedFrame),
            2 => Some(Self::MalformedQuery),
            3 => Some(Self::UnsupportedKind),
            4 => Some(Self::Internal),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::MalformedFrame => "malformed_frame",
            Self::MalformedQuery => "malformed_query",
            Self::UnsupportedKind => "unsupported_kind",
            Self::Internal => "internal",
        }
    }
}

struct Writer(Vec<u8>);

impl Writer {
    fn u32(&mut self, v: u32) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }

    fn usize(&mut self, v: usize) {
        self.u32(u32::try_from(v).expect("count fits in u32"));
    }

    fn u64(&mut self, v: u64) {
        self.u32(v as u32);
        self.u32((v >> 32) as u32);
    }

    fn fes(&mut self, values: &[Fe]) {
        values.iter().for_each(|v| self.u32(v.value()));
    }

    fn bytes(&mut self, b: &[u8]) {
        self.usize(b.len());
        self.0.extend_from_slice(b);
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

fn malformed(msg: impl Into<String>) -> NetError {
    NetError::Malformed(msg.into())
}

impl<'a> Reader<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, pos: 0 }
    }

    fn u32(&mut self) -> Result<u32, NetError> {
        let end = self.pos + 4;
        let chunk = self.bytes.get(self.pos..end).ok_or_else(|| malformed("payload truncated"))?;
        self.pos = end;
        Ok(u32::from_le_bytes(chunk.try_into().unwrap()))
    }

    /// A count of items that each take at least `min_bytes` more bytes.
    fn count(&mut self, min_bytes: usize) -> Result<usize, NetError> {
        let n = self.u32()? as usize;
        if n.saturating_mul(min_bytes.max(1)) > self.bytes.len() - self.pos && min_bytes > 0 {
            return Err(malformed(format!("count {n} exceeds remaining payload")));
        }
        Ok(n)
    }

    fn u32s(&mut self, n: usize) -> Result<Vec<u32>, NetError> {
        if n.saturating_mul(4) > self.bytes.len() - self.pos {
            return Err(malformed("payload truncated"));
        }
        (0..n).map(|_| self.u32()).collect()
    }

    fn fes(&mut self, modulus: FieldModulus, n: usize) -> Result<Vec<Fe>, NetError> {
        self.u32s(n)?
            .into_iter()
            .map(|v| modulus.element(v).map_err(|e| malformed(e.to_string())))
            .collect()
    }

    fn bytes(&mut self) -> Result<&'a [u8], NetError> {
        let n = self.count(1)?;
        let out = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    fn finish(&self) -> Result<(), NetError> {
        if self.pos == self.bytes.len() {
            Ok(())
        } else {
            Err(malformed(format!("{} trailing bytes", self.bytes.len() - self.pos)))
        }
    }
}

fn descriptors(r: &mut Reader<'_>, count: usize, chunk_len: usize) -> Result<Vec<ChunkDescriptor>, NetError> {
    (0..count).map(|_| r.u32s(chunk_len).map(ChunkDescriptor)).collect()
}

/// `q, K, c`, phase-1 positions, instance count, each instance as
/// `rows, cols`, coefficients row-major and positions, then the outer
/// code's length and dimension.
pub fn encode_query(query: &Query) -> Vec<u8> {
    let mut w = Writer(Vec::new());
    w.u32(query.modulus.get());
    w.usize(query.phase1.len());
    w.usize(query.chunk_len);
    for d in &query.phase1 {
        d.0.iter().for_each(|&p| w.u32(p));
    }
    w.usize(query.phase2.len());
    for inst in &query.phase2 {
        w.usize(inst.coefficients.rows());
        w.usize(inst.coefficients.cols());
        w.fes(inst.coefficients.entries());
        for d in &inst.chunks {
            d.0.iter().for_each(|&p| w.u32(p));
        }
    }
    w.usize(query.outer.length);
    w.usize(query.outer.dimension);
    w.0
}

/// Structural decoding only; range checks against a library happen in
/// `validate_query`.
pub fn decode_query(bytes: &[u8]) -> Result<Query, NetError> {
    let mut r = Reader::new(bytes);
    let modulus = FieldModulus::new(r.u32()?).map_err(|e| malformed(e.to_string()))?;
    let files = r.count(0)?;
    let chunk_len = r.count(0)?;
    if files.saturating_mul(chunk_len).saturating_mul(4) > bytes.len() {
        return Err(malformed("phase-1 block exceeds payload"));
    }
    let phase1 = descriptors(&mut r, files, chunk_len)?;
    let instances = r.count(8)?;
    let mut phase2 = Vec::with_capacity(instances);
    for _ in 0..instances {
        let rows = r.u32()? as usize;
        let cols = r.u32()? as usize;
        if cols != files {
            return Err(malformed(format!("instance has {cols} columns for {files} files")));
        }
        let coeffs = r.fes(modulus, rows.saturating_mul(cols))?;
        let coefficients = Matrix::from_entries(modulus, rows, cols, coeffs).map_err(|e| malformed(e.to_string()))?;
        if cols.saturating_mul(chunk_len).saturating_mul(4) > bytes.len() {
            return Err(malformed("instance block exceeds payload"));
        }
        let chunks = descriptors(&mut r, cols, chunk_len)?;
        phase2.push(Instance { coefficients, chunks });
    }
    let length = r.u32()? as usize;
    let dimension = r.u32()? as usize;
    r.finish()?;
    Ok(Query { modulus, chunk_len, phase1, phase2, outer: OuterCodeSpec { length, dimension } })
}

/// Chunk count, chunk length, symbols.
pub fn encode_answer(answer: &Answer) -> Vec<u8> {
    let mut w = Writer(Vec::new());
    w.usize(answer.chunks.len());
    w.usize(answer.chunks.first().map_or(0, Vec::len));
    for ch in &answer.chunks {
        w.fes(ch);
    }
    w.0
}

pub fn decode_answer(bytes: &[u8], modulus: FieldModulus) -> Result<Answer, NetError> {
    let mut r = Reader::new(bytes);
    let count = r.count(0)?;
    let chunk_len = r.count(0)?;
    if count.saturating_mul(chunk_len).saturating_mul(4) != bytes.len() - 8 {
        return Err(malformed("answer length does not match its header"));
    }
    let chunks = (0..count).map(|_| r.fes(modulus, chunk_len)).collect::<Result<_, _>>()?;
    r.finish()?;
    Ok(Answer { chunks })
}

/// Code, then a length-prefixed UTF-8 message.
pub fn encode_error(code: ErrorCode, message: &str) -> Vec<u8> {
    let mut w = Writer(Vec::new());
    w.u32(code as u32);
    w.bytes(message.as_bytes());
    w.0
}

pub fn decode_error(bytes: &[u8]) -> Result<(u32, String), NetError> {
    let mut r = Reader::new(bytes);
    let code = r.u32()?;
    let message = String::from_utf8_lossy(r.bytes()?).into_owned();
    r.finish()?;
    Ok((code, message))
}

/// What a server reports about itself in reply to HELLO.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ServerInfo {
    pub version: u32,
    pub modulus: u32,
    pub files: u32,
    pub file_len: u32,
}

pub fn encode_hello(info: &ServerInfo) -> Vec<u8> {
    let mut w = Writer(Vec::new());
    for v in [info.version, info.modulus, info.files, info.file_len] {
        w.u32(v);
    }
    w.0
}

pub fn decode_hello(bytes: &[u8]) -> Result<ServerInfo, NetError> {
    let mut r = Reader::new(bytes);
    let info = ServerInfo { version: r.u32()?, modulus: r.u32()?, files: r.u32()?, file_len: r.u32()? };
    r.finish()?;
    Ok(info)
}

/// Canonical bytes of a transcript's content; the local verification flag
/// is excluded so networked and in-memory runs compare equal.
pub fn encode_transcript(t: &Transcript) -> Vec<u8> {
    let p = &t.params;
    let mut w = Writer(Vec::new());
    for v in [p.servers(), p.files(), p.requests(), p.side_size(), p.chunk_len()] {
        w.usize(v);
    }
    w.u32(p.modulus().get());
    w.u64(t.seed);
    w.usize(t.request.len());
    t.request.indices().iter().for_each(|&i| w.usize(i));
    w.usize(t.side.len());
    t.side.iter().for_each(|&i| w.usize(i));
    for (q, a) in t.queries.iter().zip(&t.answers) {
        w.bytes(&encode_query(q));
        w.bytes(&encode_answer(a));
    }
    w.usize(t.decoded.len());
    for (&i, content) in &t.decoded {
        w.usize(i);
        w.usize(content.len());
        w.fes(content);
    }
    w.u64(t.downloaded_symbols);
    w.bytes(t.load.to_string().as_bytes());
    w.0
}
