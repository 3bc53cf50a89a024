use std::collections::{BTreeMap, BTreeSet};

use itertools::Itertools;
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{
    answer_query, decode, generate_queries, Answer, Library, Params, ProtocolError, Query, Regime,
    RequestSet, SideInfo,
};
use crate::exec::Execution;
use crate::field::Fe;

/// The full record of one retrieval.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transcript {
    pub params: Params,
    pub seed: u64,
    pub request: RequestSet,
    pub side: BTreeSet<usize>,
    pub queries: Vec<Query>,
    pub answers: Vec<Answer>,
    pub decoded: BTreeMap<usize, Vec<Fe>>,
    pub downloaded_symbols: u64,
    /// Downloaded symbols per decoded symbol, `downloaded / (P L)`.
    pub load: BigRational,
    /// Set when the load is the optimum (high-regime tuples only); outside
    /// that regime the same construction runs but is not claimed optimal.
    pub optimal: bool,
    /// Whether the decoded files match the library, when the library is known.
    pub verified: Option<bool>,
}

impl Transcript {
    /// Equality of everything except the local verification flag.
    pub fn same_content(&self, other: &Transcript) -> bool {
        self.params == other.params
            && self.seed == other.seed
            && self.request == other.request
            && self.side == other.side
            && self.queries == other.queries
            && self.answers == other.answers
            && self.decoded == other.decoded
            && self.downloaded_symbols == other.downloaded_symbols
            && self.load == other.load
    }

    pub fn verify(&mut self, library: &Library) -> bool {
        let ok = self.decoded.len() == self.request.len()
            && self.decoded.iter().all(|(&i, content)| library.file(i) == content.as_slice());
        self.verified = Some(ok);
        ok
    }
}

/// Runs one exchange with a caller-supplied way of obtaining answers.
pub fn exchange_with<E, F>(
    params: &Params,
    request: &RequestSet,
    side: &SideInfo,
    seed: u64,
    fetch_answers: F,
) -> Result<Transcript, E>
where
    E: From<ProtocolError>,
    F: FnOnce(&[Query]) -> Result<Vec<Answer>, E>,
{
    let side_indices = side.indices();
    let queries = generate_queries(params, request, &side_indices, seed)?;
    let answers = fetch_answers(&queries)?;
    let decoded = decode(params, request, side, &queries, &answers)?;
    let downloaded_symbols: u64 = answers.iter().map(|a| a.symbol_count() as u64).sum();
    let load = BigRational::new(
        BigInt::from(downloaded_symbols),
        BigInt::from((params.requests() * params.file_len()) as u64),
    );
    Ok(Transcript {
        params: *params,
        seed,
        request: request.clone(),
        side: side_indices,
        queries,
        answers,
        decoded,
        downloaded_symbols,
        load,
        optimal: params.regime() == Regime::High,
        verified: None,
    })
}

/// End-to-end in-memory exchange against a shared library.
pub fn run_exchange(
    params: &Params,
    library: &Library,
    request: &RequestSet,
    side: &SideInfo,
    seed: u64,
) -> Result<Transcript, ProtocolError> {
    library.check_params(params)?;
    let mut transcript = exchange_with(params, request, side, seed, |queries: &[Query]| {
        queries.iter().map(|q| answer_query(library, q)).collect()
    })?;
    transcript.verify(library);
    Ok(transcript)
}

/// Every `(S, P)` with `|S| = side`, `|P| = requests`, disjoint, over `files` files.
pub fn admissible_pairs(files: usize, requests: usize, side: usize) -> Vec<(BTreeSet<usize>, RequestSet)> {
    let mut out = Vec::new();
    for s in (0..files).combinations(side) {
        let rest: Vec<usize> = (0..files).filter(|i| !s.contains(i)).collect();
        for p in rest.into_iter().combinations(requests) {
            out.push((s.iter().copied().collect(), RequestSet::new(p)));
        }
    }
    out
}

/// One exchange of a sweep, reduced to what the checks need.
#[derive(Debug, Clone)]
pub struct CaseOutcome {
    pub params: Params,
    pub side: BTreeSet<usize>,
    pub request: RequestSet,
    pub seed: u64,
    pub decoded_ok: bool,
    pub downloaded_symbols: u64,
    pub load: Option<BigRational>,
    pub error: Option<String>,
}

fn run_case(params: Params, side: BTreeSet<usize>, request: RequestSet, seed: u64) -> CaseOutcome {
    let library = Library::random(params.modulus(), params.files(), params.file_len(), seed ^ 0x5eed_0f_11b);
    let info = SideInfo::from_library(&library, side.iter().copied());
    match run_exchange(&params, &library, &request, &info, seed) {
        Ok(t) => CaseOutcome {
            params,
            side,
            request,
            seed,
            decoded_ok: t.verified == Some(true),
            downloaded_symbols: t.downloaded_symbols,
            load: Some(t.load),
            error: None,
        },
        Err(e) => CaseOutcome {
            params,
            side,
            request,
            seed,
            decoded_ok: false,
            downloaded_symbols: 0,
            load: None,
            error: Some(e.to_string()),
        },
    }
}

/// Exchanges for every `N` in `servers`, `K <= max_files`, every valid
/// `(P, M)`, every admissible `(S, P)` and seeds `0..seeds`, each against a
/// fresh random library.
pub fn exhaustive_grid(
    servers: &[usize],
    max_files: usize,
    seeds: u64,
    chunk_len: usize,
    exec: Execution,
) -> Result<Vec<CaseOutcome>, ProtocolError> {
    let mut cases = Vec::new();
    for &n in servers {
        for k in 1..=max_files {
            for p in 1..=k {
                for m in 0..=k - p {
                    let params = Params::new(n, k, p, m, chunk_len)?;
                    for (side, request) in admissible_pairs(k, p, m) {
                        for seed in 0..seeds {
                            cases.push((params, side.clone(), request.clone(), seed));
                        }
                    }
                }
            }
        }
    }
    Ok(exec.map(&cases, |(params, side, request, seed)| run_case(*params, side.clone(), request.clone(), *seed)))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimulationSummary {
    pub trials: usize,
    pub successes: usize,
    /// Distinct loads observed; a single entry for a correct engine.
    pub loads: BTreeSet<BigRational>,
    pub errors: Vec<String>,
}

/// `trials` exchanges at fixed params with a random admissible `(S, P)`
/// each, all against one library derived from `seed`.
pub fn simulate(params: &Params, trials: usize, seed: u64, exec: Execution) -> SimulationSummary {
    let library = Library::random(params.modulus(), params.files(), params.file_len(), seed);
    let results = exec.map_range(0..trials, |t| {
        let trial_seed = seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(t as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(trial_seed);
        let mut order: Vec<usize> = (0..params.files()).collect();
        order.shuffle(&mut rng);
        let side = SideInfo::from_library(&library, order[..params.side_size()].iter().copied());
        let request = RequestSet::new(order[params.side_size()..params.side_size() + params.requests()].iter().copied());
        run_exchange(params, &library, &request, &side, trial_seed)
    });
    let mut summary = SimulationSummary { trials, successes: 0, loads: BTreeSet::new(), errors: Vec::new() };
    for r in results {
        match r {
            Ok(t) => {
                if t.verified == Some(true) {
                    summary.successes += 1;
                }
                summary.loads.insert(t.load);
            }
            Err(e) => summary.errors.push(e.to_string()),
        }
    }
    summary
}
