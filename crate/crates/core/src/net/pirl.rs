//! `PIRL` library files: magic, then version, `q`, `K`, `L` as
//! little-endian `u32`, then `K * L` elements row-major.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::NetError;
use crate::field::FieldModulus;
use crate::protocol::Library;

pub const MAGIC: &[u8; 4] = b"PIRL";
pub const VERSION: u32 = 1;

pub fn write_library<W: Write>(library: &Library, mut w: W) -> Result<(), NetError> {
    w.write_all(MAGIC)?;
    for v in [VERSION, library.modulus().get(), library.file_count() as u32, library.file_len() as u32] {
        w.write_all(&v.to_le_bytes())?;
    }
    for file in library.files() {
        for s in file {
            w.write_all(&s.value().to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_library<R: Read>(mut r: R) -> Result<Library, NetError> {
    let bad = |msg: String| NetError::Library(msg);
    let mut header = [0u8; 20];
    r.read_exact(&mut header)?;
    if &header[..4] != MAGIC {
        return Err(bad("missing PIRL magic".into()));
    }
    let word = |i: usize| u32::from_le_bytes(header[4 + 4 * i..8 + 4 * i].try_into().unwrap());
    let (version, q, k, l) = (word(0), word(1), word(2), word(3));
    if version != VERSION {
        return Err(bad(format!("unsupported version {version}")));
    }
    let modulus = FieldModulus::new(q).map_err(|e| bad(e.to_string()))?;
    let mut body = Vec::new();
    r.read_to_end(&mut body)?;
    let expected = (k as u64) * (l as u64) * 4;
    if body.len() as u64 != expected {
        return Err(bad(format!("body has {} bytes, header implies {expected}", body.len())));
    }
    let mut values = body.chunks_exact(4).map(|b| u32::from_le_bytes(b.try_into().unwrap()));
    let files = (0..k)
        .map(|_| {
            (&mut values)
                .take(l as usize)
                .map(|v| modulus.element(v).map_err(|e| bad(e.to_string())))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    Library::new(modulus, files).map_err(|e| bad(e.to_string()))
}

pub fn save_library(library: &Library, path: &Path) -> Result<(), NetError> {
    write_library(library, BufWriter::new(File::create(path)?))
}

pub fn load_library(path: &Path) -> Result<Library, NetError> {
    read_library(BufReader::new(File::open(path)?))
}
