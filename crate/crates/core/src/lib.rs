//! Multi-message private information retrieval with private side information.
//!
//! A user holding `M` of the `K` library files privately retrieves `P` more
//! from `N` non-colluding replicated servers. Each server sees a query whose
//! distribution is independent of which files are requested or held; the
//! side information is exploited through an outer systematic MDS code, so a
//! server sends only the parity part of its coded answer.
//!
//! * [`field`]: prime-field arithmetic and linear algebra.
//! * [`mds`]: systematic MDS codes and the phase-2 Vandermonde generator.
//! * [`protocol`]: query generation, answering, decoding and full exchanges.
//! * [`capacity`]: closed-form loads, scheme accounting and converse bounds.
//! * [`audit`]: exact and statistical checks that queries leak nothing.
//! * [`net`]: wire format, library files, TCP server and client.
//! * [`exec`]: rayon-backed batch execution with a sequential fallback.

pub mod audit;
pub mod capacity;
pub mod exec;
pub mod field;
pub mod mds;
pub mod net;
pub mod protocol;

pub use exec::Execution;
pub use field::{Fe, FieldModulus, Matrix};
pub use protocol::{Params, Regime};
