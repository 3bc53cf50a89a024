//! Running the scheme across processes: a length-prefixed binary protocol,
//! `PIRL` library files, a threaded TCP server and a concurrent client.

pub mod client;
pub mod codec;
pub mod pirl;
pub mod server;

use std::io;

use thiserror::Error;

use crate::protocol::ProtocolError;

pub use client::{fetch, hello, query_servers, TcpTransport, Transport};
pub use codec::{ErrorCode, MessageKind, ServerInfo, WireMessage, MAX_FRAME};
pub use pirl::{load_library, read_library, save_library, write_library};
pub use server::{Server, ServerHandle};

#[derive(Debug, Error)]
pub enum NetError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("frame of {0} bytes exceeds the limit")]
    Oversized(usize),
    #[error("unsupported message kind {0}")]
    UnsupportedKind(u8),
    #[error("malformed payload: {0}")]
    Malformed(String),
    #[error("bad library file: {0}")]
    Library(String),
    #[error("server {server} at {endpoint} unreachable: {source}")]
    Connect { server: usize, endpoint: String, source: io::Error },
    #[error("server {server} replied with error {code}: {message}")]
    Server { server: usize, code: u32, message: String },
    #[error("server {server} sent an unexpected {kind:?} reply")]
    UnexpectedReply { server: usize, kind: MessageKind },
    #[error("expected {expected} server endpoints, got {got}")]
    ServerCount { expected: usize, got: usize },
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
}
