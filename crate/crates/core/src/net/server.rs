use std::io::{self, BufReader, BufWriter};
use std::net::{SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread::{self, JoinHandle};
use std::time::Duration;

use super::codec::{self, ErrorCode, MessageKind, ServerInfo, WireMessage, PROTOCOL_VERSION};
use super::NetError;
use crate::protocol::{answer_query, validate_query, Library, ProtocolError};

const IO_TIMEOUT: Duration = Duration::from_secs(30);

fn error_reply(code: ErrorCode, message: impl AsRef<str>) -> WireMessage {
    WireMessage::new(MessageKind::Error, codec::encode_error(code, message.as_ref()))
}

/// The reply to one incoming frame, or `None` to drop the connection.
pub fn respond(library: &Library, incoming: Result<WireMessage, NetError>) -> Option<WireMessage> {
    let msg = match incoming {
        Ok(msg) => msg,
        Err(NetError::UnsupportedKind(k)) => {
            return Some(error_reply(ErrorCode::UnsupportedKind, format!("unknown message kind {k}")))
        }
        Err(_) => return None,
    };
    match msg.kind {
        MessageKind::Hello => {
            let info = ServerInfo {
                version: PROTOCOL_VERSION,
                modulus: library.modulus().get(),
                files: library.file_count() as u32,
                file_len: library.file_len() as u32,
            };
            Some(WireMessage::new(MessageKind::Hello, codec::encode_hello(&info)))
        }
        MessageKind::Query => {
            let query = match codec::decode_query(&msg.payload) {
                Ok(q) => q,
                Err(e) => return Some(error_reply(ErrorCode::MalformedFrame, e.to_string())),
            };
            if let Err(e) = validate_query(library, &query) {
                return Some(error_reply(ErrorCode::MalformedQuery, e.to_string()));
            }
            match answer_query(library, &query) {
                Ok(a) => Some(WireMessage::new(MessageKind::Answer, codec::encode_answer(&a))),
                Err(e @ ProtocolError::MalformedQuery(_)) => Some(error_reply(ErrorCode::MalformedQuery, e.to_string())),
                Err(e) => Some(error_reply(ErrorCode::Internal, e.to_string())),
            }
        }
        MessageKind::Answer | MessageKind::Error => {
            Some(error_reply(ErrorCode::UnsupportedKind, "servers accept HELLO and QUERY only"))
        }
    }
}

/// Serves exactly one request on `stream`. Nothing about the query outlives
/// this call.
pub fn handle_connection(stream: TcpStream, library: &Library) -> io::Result<()> {
    stream.set_read_timeout(Some(IO_TIMEOUT))?;
    stream.set_write_timeout(Some(IO_TIMEOUT))?;
    let mut reader = BufReader::new(stream.try_clone()?);
    let incoming = codec::read_message(&mut reader);
    if let Some(reply) = respond(library, incoming) {
        codec::write_message(&mut BufWriter::new(&stream), &reply)?;
    }
    Ok(())
}

pub struct Server {
    listener: TcpListener,
    library: Arc<Library>,
}

impl Server {
    pub fn bind(addr: impl ToSocketAddrs, library: Arc<Library>) -> Result<Self, NetError> {
        Ok(Self { listener: TcpListener::bind(addr)?, library })
    }

    pub fn local_addr(&self) -> Result<SocketAddr, NetError> {
        Ok(self.listener.local_addr()?)
    }

    /// Accepts connections until `stop` is set, one thread per connection.
    fn accept_loop(self, stop: &AtomicBool) {
        for stream in self.listener.incoming() {
            if stop.load(Ordering::SeqCst) {
                break;
            }
            let Ok(stream) = stream else { continue };
            let library = Arc::clone(&self.library);
            thread::spawn(move || {
                let _ = handle_connection(stream, &library);
            });
        }
    }

    /// Runs forever.
    pub fn run(self) {
        self.accept_loop(&AtomicBool::new(false));
    }

    pub fn spawn(self) -> Result<ServerHandle, NetError> {
        let addr = self.local_addr()?;
        let stop = Arc::new(AtomicBool::new(false));
        let flag = Arc::clone(&stop);
        let thread = thread::spawn(move || self.accept_loop(&flag));
        Ok(ServerHandle { addr, stop, thread: Some(thread) })
    }
}

/// A server running on a background thread; stopped on drop.
pub struct ServerHandle {
    addr: SocketAddr,
    stop: Arc<AtomicBool>,
    thread: Option<JoinHandle<()>>,
}

impl ServerHandle {
    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn shutdown(mut self) {
        self.stop_now();
    }

    fn stop_now(&mut self) {
        if let Some(thread) = self.thread.take() {
            self.stop.store(true, Ordering::SeqCst);
            // wake the blocking accept
            let _ = TcpStream::connect(self.addr);
            let _ = thread.join();
        }
    }
}

impl Drop for ServerHandle {
    fn drop(&mut self) {
        self.stop_now();
    }
}
