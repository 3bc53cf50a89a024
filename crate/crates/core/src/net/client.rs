use std::io::{BufReader, BufWriter};
use std::net::{TcpStream, ToSocketAddrs};
use std::thread;
use std::time::Duration;

use super::codec::{self, MessageKind, ServerInfo, WireMessage};
use super::NetError;
use crate::protocol::{exchange_with, Answer, Params, Query, RequestSet, SideInfo, Transcript};

/// One request/response round trip with server `server`.
pub trait Transport: Sync {
    fn round_trip(&self, server: usize, request: &WireMessage) -> Result<WireMessage, NetError>;
}

/// One TCP connection per request.
#[derive(Debug, Clone)]
pub struct TcpTransport {
    endpoints: Vec<String>,
    timeout: Duration,
}

impl TcpTransport {
    pub fn new(endpoints: Vec<String>) -> Self {
        Self { endpoints, timeout: Duration::from_secs(30) }
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self
    }

    pub fn endpoints(&self) -> &[String] {
        &self.endpoints
    }

    fn connect(&self, server: usize) -> Result<TcpStream, NetError> {
        let endpoint = self
            .endpoints
            .get(server)
            .ok_or(NetError::ServerCount { expected: server + 1, got: self.endpoints.len() })?;
        let connect_err = |source| NetError::Connect { server, endpoint: endpoint.clone(), source };
        let mut last = None;
        for addr in endpoint.to_socket_addrs().map_err(connect_err)? {
            match TcpStream::connect_timeout(&addr, self.timeout) {
                Ok(s) => return Ok(s),
                Err(e) => last = Some(e),
            }
        }
        Err(connect_err(last.unwrap_or_else(|| std::io::Error::other("no address resolved"))))
    }
}

impl Transport for TcpTransport {
    fn round_trip(&self, server: usize, request: &WireMessage) -> Result<WireMessage, NetError> {
        let stream = self.connect(server)?;
        stream.set_read_timeout(Some(self.timeout))?;
        stream.set_write_timeout(Some(self.timeout))?;
        codec::write_message(&mut BufWriter::new(&stream), request)?;
        codec::read_message(&mut BufReader::new(&stream))
    }
}

fn server_error(server: usize, reply: &WireMessage) -> NetError {
    match codec::decode_error(&reply.payload) {
        Ok((code, message)) => NetError::Server { server, code, message },
        Err(e) => e,
    }
}

pub fn hello<T: Transport>(transport: &T, server: usize) -> Result<ServerInfo, NetError> {
    let reply = transport.round_trip(server, &WireMessage::new(MessageKind::Hello, Vec::new()))?;
    match reply.kind {
        MessageKind::Hello => codec::decode_hello(&reply.payload),
        MessageKind::Error => Err(server_error(server, &reply)),
        kind => Err(NetError::UnexpectedReply { server, kind }),
    }
}

/// Sends `queries[n]` to server `n` only, all concurrently, and waits for
/// every answer.
pub fn query_servers<T: Transport>(transport: &T, queries: &[Query]) -> Result<Vec<Answer>, NetError> {
    let results: Vec<Result<Answer, NetError>> = thread::scope(|scope| {
        let handles: Vec<_> = queries
            .iter()
            .enumerate()
            .map(|(server, query)| {
                scope.spawn(move || {
                    let msg = WireMessage::new(MessageKind::Query, codec::encode_query(query));
                    let reply = transport.round_trip(server, &msg)?;
                    match reply.kind {
                        MessageKind::Answer => codec::decode_answer(&reply.payload, query.modulus),
                        MessageKind::Error => Err(server_error(server, &reply)),
                        kind => Err(NetError::UnexpectedReply { server, kind }),
                    }
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("query thread panicked")).collect()
    });
    results.into_iter().collect()
}

/// Networked counterpart of `run_exchange`; the transcript is left
/// unverified since the client does not hold the library.
pub fn fetch<T: Transport>(
    transport: &T,
    params: &Params,
    request: &RequestSet,
    side: &SideInfo,
    seed: u64,
) -> Result<Transcript, NetError> {
    exchange_with(params, request, side, seed, |queries: &[Query]| query_servers(transport, queries))
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;
    use std::sync::{Arc, Mutex};

    use super::*;
    use crate::field::FieldModulus;
    use crate::net::server::{respond, Server};
    use crate::protocol::{run_exchange, Library};

    /// Answers in-process and records what each server was sent.
    struct Recording {
        library: Library,
        sent: Mutex<BTreeMap<usize, Vec<Vec<u8>>>>,
    }

    impl Transport for Recording {
        fn round_trip(&self, server: usize, request: &WireMessage) -> Result<WireMessage, NetError> {
            self.sent.lock().unwrap().entry(server).or_default().push(request.to_bytes());
            Ok(respond(&self.library, Ok(request.clone())).unwrap())
        }
    }

    fn example() -> (Params, Library, RequestSet, SideInfo) {
        let params = Params::new(2, 4, 2, 1, 1).unwrap();
        let lib = Library::random(FieldModulus::default(), 4, 4, 21);
        let side = SideInfo::from_library(&lib, [2]);
        (params, lib, RequestSet::new([0, 1]), side)
    }

    #[test]
    fn recorded_bytes_depend_only_on_seed_and_server() {
        let (params, lib, request, side) = example();
        let run = |seed| {
            let t = Recording { library: lib.clone(), sent: Mutex::new(BTreeMap::new()) };
            let transcript = fetch(&t, &params, &request, &side, seed).unwrap();
            (transcript, t.sent.into_inner().unwrap())
        };
        let (a, sent_a) = run(4);
        let (_, sent_b) = run(4);
        let (_, sent_c) = run(5);
        assert_eq!(sent_a, sent_b);
        assert_ne!(sent_a, sent_c);
        assert_eq!(sent_a.len(), 2);
        assert!(sent_a.values().all(|v| v.len() == 1));
        let memory = run_exchange(&params, &lib, &request, &side, 4).unwrap();
        assert!(a.same_content(&memory));
    }

    #[test]
    fn tcp_fetch_matches_memory_and_byte_count() {
        let (params, lib, request, side) = example();
        let lib = Arc::new(lib);
        let servers: Vec<_> =
            (0..2).map(|_| Server::bind("127.0.0.1:0", Arc::clone(&lib)).unwrap().spawn().unwrap()).collect();
        let transport = TcpTransport::new(servers.iter().map(|s| s.addr().to_string()).collect());
        let t = fetch(&transport, &params, &request, &side, 8).unwrap();
        let memory = run_exchange(&params, &lib, &request, &side, 8).unwrap();
        assert!(t.same_content(&memory));
        assert_eq!(t.downloaded_symbols * 4, 2 * 5 * 4);
        assert_eq!(hello(&transport, 1).unwrap().files, 4);
    }

    #[test]
    fn dead_server_reported_by_index() {
        let (params, lib, request, side) = example();
        let live = Server::bind("127.0.0.1:0", Arc::new(lib)).unwrap().spawn().unwrap();
        let dead = {
            let l = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
            l.local_addr().unwrap().to_string()
        };
        let transport =
            TcpTransport::new(vec![live.addr().to_string(), dead]).with_timeout(Duration::from_secs(2));
        match fetch(&transport, &params, &request, &side, 1) {
            Err(NetError::Connect { server, .. }) => assert_eq!(server, 1),
            other => panic!("expected connect error, got {other:?}"),
        }
    }
}
