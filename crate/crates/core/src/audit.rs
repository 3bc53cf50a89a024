//! Checks that a server's query distribution is the same for every
//! admissible `(side, request)` pair.
//!
//! The exact mode enumerates all user randomness that can influence one
//! server's query: for each file, the raw positions of the logical symbols
//! the query refers to (every injection into `[0, L)` is equally likely
//! under a uniform permutation), and the column shuffles of that server's
//! instances. The statistical mode samples seeds and runs a chi-square
//! homogeneity test per query feature.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use itertools::Itertools;
use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};
use thiserror::Error;

use crate::exec::Execution;
use crate::mds::InnerGenerator;
use crate::net::codec::encode_query;
use crate::protocol::server_query_with;
use crate::protocol::{
    admissible_pairs, referenced_slots, FreshChunkDraw, Params, ProtocolError, Query, Randomness, RequestSet,
};

/// Largest enumeration the exact mode will attempt.
pub const EXACT_GUARD: u128 = 10_000_000;
pub const MIN_SAMPLES: usize = 10_000;
pub const DEFAULT_ALPHA: f64 = 0.01;
/// Smallest expected count per category before pooling.
const MIN_EXPECTED: f64 = 5.0;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AuditError {
    #[error("exact enumeration needs {cases} cases per pair (limit {EXACT_GUARD}); use the statistical audit")]
    TooLarge { cases: u128 },
    #[error("statistical audit needs at least {MIN_SAMPLES} samples per pair, got {0}")]
    TooFewSamples(usize),
    #[error("server index {server} out of range for {servers} servers")]
    NoSuchServer { server: usize, servers: usize },
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
}

/// The wire bytes of one server's query.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CanonicalQuery(pub Vec<u8>);

impl CanonicalQuery {
    pub fn of(query: &Query) -> Self {
        Self(encode_query(query))
    }
}

/// Query counts out of `total` equally likely randomness outcomes (exact
/// mode) or samples.
#[derive(Debug, Clone, Default)]
pub struct QueryDistribution {
    weights: BTreeMap<CanonicalQuery, u64>,
    total: u64,
}

impl QueryDistribution {
    pub fn add(&mut self, query: CanonicalQuery, weight: u64) {
        *self.weights.entry(query).or_default() += weight;
        self.total += weight;
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn support_size(&self) -> usize {
        self.weights.len()
    }

    pub fn probability(&self, query: &CanonicalQuery) -> BigRational {
        let w = self.weights.get(query).copied().unwrap_or(0);
        BigRational::new(BigInt::from(w), BigInt::from(self.total.max(1)))
    }

    pub fn probabilities(&self) -> BTreeMap<CanonicalQuery, BigRational> {
        self.weights.keys().map(|q| (q.clone(), self.probability(q))).collect()
    }
}

/// Equality as probability maps.
impl PartialEq for QueryDistribution {
    fn eq(&self, other: &Self) -> bool {
        self.weights.len() == other.weights.len()
            && self.weights.iter().all(|(q, &w)| {
                other
                    .weights
                    .get(q)
                    .is_some_and(|&v| w as u128 * other.total as u128 == v as u128 * self.total as u128)
            })
    }
}

fn falling(n: u128, k: u128) -> u128 {
    (0..k).map(|i| n - i).product()
}

/// Randomness outcomes enumerated per `(pair, server)`.
pub fn exact_case_count(params: &Params) -> u128 {
    let referenced = (params.servers() * params.chunk_len()) as u128;
    let injections = falling(params.file_len() as u128, referenced);
    let columns: u128 = (1..=params.files() as u128).product();
    injections.saturating_pow(params.files() as u32).saturating_mul(columns.saturating_pow(params.servers() as u32 - 1))
}

fn check_server(params: &Params, server: usize) -> Result<(), AuditError> {
    if server >= params.servers() {
        return Err(AuditError::NoSuchServer { server, servers: params.servers() });
    }
    Ok(())
}

/// Extends an injection of the referenced logical symbols to a full
/// permutation, filling the rest in ascending order. Only the referenced
/// part reaches the query, so the completion does not matter.
fn complete_permutation(len: usize, logical: &[usize], raw: &[u32]) -> Vec<u32> {
    let mut perm = vec![u32::MAX; len];
    let mut used = vec![false; len];
    for (&t, &r) in logical.iter().zip(raw) {
        perm[t] = r;
        used[r as usize] = true;
    }
    let mut free = (0..len as u32).filter(|&r| !used[r as usize]);
    for slot in perm.iter_mut().filter(|p| **p == u32::MAX) {
        *slot = free.next().expect("injection leaves enough free positions");
    }
    perm
}

/// The exact distribution of server `server`'s query for one pair.
pub fn exact_distribution(
    params: &Params,
    request: &RequestSet,
    side: &BTreeSet<usize>,
    server: usize,
    draw: FreshChunkDraw,
) -> Result<QueryDistribution, AuditError> {
    check_server(params, server)?;
    crate::protocol::validate_selection(params, request, side)?;
    let cases = exact_case_count(params);
    if cases > EXACT_GUARD {
        return Err(AuditError::TooLarge { cases });
    }
    let (n, k, l, c) = (params.servers(), params.files(), params.file_len(), params.chunk_len());
    let inner = InnerGenerator::new(params.requests(), k, params.modulus()).map_err(ProtocolError::from)?;
    let logical: Vec<Vec<usize>> = (0..k)
        .map(|file| {
            referenced_slots(params, request, file, server)
                .into_iter()
                .flat_map(|slot| slot * c..(slot + 1) * c)
                .collect()
        })
        .collect();
    let injections: Vec<Vec<u32>> = (0..l as u32).permutations(n * c).collect();
    let column_orders: Vec<Vec<usize>> = (0..k).permutations(k).collect();
    let identity_cols: Vec<usize> = (0..k).collect();

    let mut dist = QueryDistribution::default();
    let file_choices = std::iter::repeat_n(0..injections.len(), k).multi_cartesian_product();
    for choice in file_choices {
        let chunk_perms: Vec<Vec<u32>> =
            (0..k).map(|f| complete_permutation(l, &logical[f], &injections[choice[f]])).collect();
        for cols in std::iter::repeat_n(0..column_orders.len(), n - 1).multi_cartesian_product() {
            let column_perms = (0..n)
                .map(|s| {
                    (0..n - 1)
                        .map(|i| if s == server { column_orders[cols[i]].clone() } else { identity_cols.clone() })
                        .collect()
                })
                .collect();
            let randomness = Randomness::from_parts(params, chunk_perms.clone(), column_perms)?;
            let query = server_query_with(params, request, &randomness, server, draw, &inner);
            dist.add(CanonicalQuery::of(&query), 1);
        }
    }
    debug_assert_eq!(dist.total() as u128, cases);
    Ok(dist)
}

#[derive(Debug, Clone, Serialize)]
pub struct ExactServerReport {
    pub server: usize,
    pub pairs: usize,
    pub cases_per_pair: u64,
    pub support_size: usize,
    pub identical: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExactAuditReport {
    pub servers: Vec<ExactServerReport>,
    pub private: bool,
}

/// Exact distributions for every server and admissible pair; private iff
/// each server sees one common distribution.
pub fn exact_audit(params: &Params, draw: FreshChunkDraw, exec: Execution) -> Result<ExactAuditReport, AuditError> {
    let cases = exact_case_count(params);
    if cases > EXACT_GUARD {
        return Err(AuditError::TooLarge { cases });
    }
    let pairs = admissible_pairs(params.files(), params.requests(), params.side_size());
    let jobs: Vec<(usize, usize)> = (0..params.servers()).cartesian_product(0..pairs.len()).collect();
    let dists = exec.map(&jobs, |&(server, pair)| {
        let (side, request) = &pairs[pair];
        exact_distribution(params, request, side, server, draw)
    });
    let mut dists = dists.into_iter();
    let mut servers = Vec::new();
    for server in 0..params.servers() {
        let group: Vec<QueryDistribution> = dists.by_ref().take(pairs.len()).collect::<Result<_, _>>()?;
        servers.push(ExactServerReport {
            server,
            pairs: pairs.len(),
            cases_per_pair: group[0].total(),
            support_size: group[0].support_size(),
            identical: group.iter().all(|d| d == &group[0]),
        });
    }
    let private = servers.iter().all(|s| s.identical);
    Ok(ExactAuditReport { servers, private })
}

/// Deliberately broken variants used as negative controls.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Control {
    #[default]
    None,
    /// Every permutation is the identity.
    NoPermutations,
    /// Fresh chunks of requested files skip the file permutation.
    UnpermutedFresh,
}

#[derive(Debug, Clone, Copy)]
pub struct StatConfig {
    pub alpha: f64,
    pub seed: u64,
    pub control: Control,
    /// Bonferroni factor for tests run elsewhere, typically the server count.
    pub comparisons: usize,
    pub exec: Execution,
}

impl Default for StatConfig {
    fn default() -> Self {
        Self { alpha: DEFAULT_ALPHA, seed: 0, control: Control::None, comparisons: 1, exec: Execution::default() }
    }
}

/// A query projected onto categorical features: per file, its phase-1
/// positions then each instance's positions (each sorted); per instance,
/// the coefficient matrix column by column.
fn features(query: &Query) -> Vec<Vec<u32>> {
    let sorted = |p: &[u32]| {
        let mut v = p.to_vec();
        v.sort_unstable();
        v
    };
    let mut out: Vec<Vec<u32>> = (0..query.phase1.len())
        .map(|f| {
            let mut key = sorted(&query.phase1[f].0);
            for inst in &query.phase2 {
                key.push(u32::MAX);
                key.extend(sorted(&inst.chunks[f].0));
            }
            key
        })
        .collect();
    for inst in &query.phase2 {
        let m = &inst.coefficients;
        out.push((0..m.cols()).flat_map(|j| m.column(j)).map(|v| v.value()).collect());
    }
    out
}

fn feature_names(params: &Params) -> Vec<String> {
    (0..params.files())
        .map(|f| format!("file {f} positions"))
        .chain((0..params.servers() - 1).map(|i| format!("instance {i} coefficients")))
        .collect()
}

fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn sample_seed(base: u64, group: usize, index: usize) -> u64 {
    mix(base ^ mix((group as u64) << 32 | index as u64))
}

type Counts = Vec<HashMap<Vec<u32>, u64>>;

const BLOCK: usize = 4096;

/// Feature counts of server `server` over `seeds` for one pair.
fn sample_counts(
    params: &Params,
    request: &RequestSet,
    server: usize,
    control: Control,
    inner: &InnerGenerator,
    seeds: impl Iterator<Item = u64>,
) -> Counts {
    let mut counts: Counts = vec![HashMap::new(); params.files() + params.servers() - 1];
    let draw = if control == Control::UnpermutedFresh { FreshChunkDraw::Unpermuted } else { FreshChunkDraw::Permuted };
    for seed in seeds {
        let randomness = match control {
            Control::NoPermutations => Randomness::identity(params),
            _ => Randomness::from_seed(params, seed),
        };
        let query = server_query_with(params, request, &randomness, server, draw, inner);
        for (c, key) in counts.iter_mut().zip(features(&query)) {
            *c.entry(key).or_default() += 1;
        }
    }
    counts
}

/// Counts for each group, where group `g` samples pair `pairs[g]` over
/// seed indices `ranges[g]`. Blocks of seeds run in parallel.
fn grouped_counts(
    params: &Params,
    server: usize,
    groups: &[(RequestSet, std::ops::Range<usize>, usize)],
    config: &StatConfig,
) -> Result<Vec<Counts>, AuditError> {
    let inner = InnerGenerator::new(params.requests(), params.files(), params.modulus()).map_err(ProtocolError::from)?;
    let blocks: Vec<(usize, std::ops::Range<usize>)> = groups
        .iter()
        .enumerate()
        .flat_map(|(g, (_, range, _))| {
            let (start, end) = (range.start, range.end);
            (start..end).step_by(BLOCK).map(move |b| (g, b..(b + BLOCK).min(end)))
        })
        .collect();
    let partial = config.exec.map(&blocks, |(g, range)| {
        let (request, _, stream) = &groups[*g];
        let seeds = range.clone().map(|j| sample_seed(config.seed, *stream, j));
        (*g, sample_counts(params, request, server, config.control, &inner, seeds))
    });
    let width = params.files() + params.servers() - 1;
    let mut merged: Vec<Counts> = vec![vec![HashMap::new(); width]; groups.len()];
    for (g, counts) in partial {
        for (into, from) in merged[g].iter_mut().zip(counts) {
            for (k, v) in from {
                *into.entry(k).or_default() += v;
            }
        }
    }
    Ok(merged)
}

#[derive(Debug, Clone, Serialize)]
pub struct FeatureTest {
    pub feature: String,
    /// Distinct values observed across all groups.
    pub categories: usize,
    /// Categories left after pooling sparse ones.
    pub bins: usize,
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    pub degenerate: bool,
}

/// Chi-square homogeneity test of one feature across groups. Categories
/// with expected count below 5 are pooled.
fn homogeneity(name: String, groups: &[&HashMap<Vec<u32>, u64>]) -> FeatureTest {
    let keys: BTreeSet<&Vec<u32>> = groups.iter().flat_map(|g| g.keys()).collect();
    let row_totals: Vec<f64> = groups.iter().map(|g| g.values().sum::<u64>() as f64).collect();
    let grand: f64 = row_totals.iter().sum();
    let min_share = row_totals.iter().cloned().fold(f64::INFINITY, f64::min) / grand;
    let mut columns: Vec<Vec<f64>> = keys
        .iter()
        .map(|k| groups.iter().map(|g| g.get(*k).copied().unwrap_or(0) as f64).collect())
        .collect();
    columns.sort_by(|a, b| a.iter().sum::<f64>().total_cmp(&b.iter().sum::<f64>()));
    let expected_min = |col: &Vec<f64>| col.iter().sum::<f64>() * min_share;
    let mut bins: Vec<Vec<f64>> = Vec::new();
    let mut pool = vec![0.0; groups.len()];
    for col in columns {
        if expected_min(&pool) < MIN_EXPECTED && (pool.iter().sum::<f64>() > 0.0 || expected_min(&col) < MIN_EXPECTED) {
            pool.iter_mut().zip(&col).for_each(|(p, c)| *p += c);
        } else {
            bins.push(col);
        }
    }
    if pool.iter().sum::<f64>() > 0.0 {
        if expected_min(&pool) < MIN_EXPECTED {
            if let Some(smallest) = bins.first_mut() {
                smallest.iter_mut().zip(&pool).for_each(|(b, p)| *b += p);
            } else {
                bins.push(pool);
            }
        } else {
            bins.push(pool);
        }
    }
    let degenerate = bins.len() < 2 || groups.len() < 2;
    if degenerate {
        return FeatureTest {
            feature: name,
            categories: keys.len(),
            bins: bins.len(),
            statistic: 0.0,
            dof: 0,
            p_value: 1.0,
            degenerate,
        };
    }
    let mut statistic = 0.0;
    for col in &bins {
        let col_total: f64 = col.iter().sum();
        for (obs, row) in col.iter().zip(&row_totals) {
            let exp = row * col_total / grand;
            statistic += (obs - exp).powi(2) / exp;
        }
    }
    let dof = (bins.len() - 1) * (groups.len() - 1);
    let p_value = ChiSquared::new(dof as f64).map(|d| d.sf(statistic)).unwrap_or(0.0);
    FeatureTest { feature: name, categories: keys.len(), bins: bins.len(), statistic, dof, p_value, degenerate }
}

#[derive(Debug, Clone, Serialize)]
pub struct StatisticalReport {
    pub server: usize,
    pub groups: usize,
    pub samples_per_group: usize,
    pub control: Control,
    pub alpha: f64,
    /// Per-test level after Bonferroni correction.
    pub threshold: f64,
    pub tests: Vec<FeatureTest>,
    pub min_p_value: f64,
    pub pass: bool,
    pub warnings: Vec<String>,
}

fn report(
    params: &Params,
    server: usize,
    samples: usize,
    config: &StatConfig,
    counts: &[Counts],
) -> StatisticalReport {
    let names = feature_names(params);
    let tests: Vec<FeatureTest> = names
        .into_iter()
        .enumerate()
        .map(|(f, name)| homogeneity(name, &counts.iter().map(|c| &c[f]).collect::<Vec<_>>()))
        .collect();
    let threshold = config.alpha / (config.comparisons.max(1) * tests.len()) as f64;
    let warnings = tests
        .iter()
        .filter(|t| t.degenerate)
        .map(|t| format!("{}: only {} distinct value(s), test skipped", t.feature, t.categories))
        .collect();
    let min_p_value = tests.iter().filter(|t| !t.degenerate).map(|t| t.p_value).fold(1.0, f64::min);
    StatisticalReport {
        server,
        groups: counts.len(),
        samples_per_group: samples,
        control: config.control,
        alpha: config.alpha,
        threshold,
        pass: min_p_value >= threshold,
        min_p_value,
        tests,
        warnings,
    }
}

/// Samples `samples` seeds per admissible pair and tests every feature of
/// server `server`'s query for homogeneity across pairs.
pub fn statistical_audit(
    params: &Params,
    server: usize,
    samples: usize,
    config: &StatConfig,
) -> Result<StatisticalReport, AuditError> {
    check_server(params, server)?;
    if samples < MIN_SAMPLES {
        return Err(AuditError::TooFewSamples(samples));
    }
    let groups: Vec<_> = admissible_pairs(params.files(), params.requests(), params.side_size())
        .into_iter()
        .enumerate()
        .map(|(i, (_, request))| (request, 0..samples, i))
        .collect();
    let counts = grouped_counts(params, server, &groups, config)?;
    Ok(report(params, server, samples, config, &counts))
}

/// Runs [`statistical_audit`] for every server with the Bonferroni factor
/// set to the server count.
pub fn statistical_audit_all(
    params: &Params,
    samples: usize,
    config: &StatConfig,
) -> Result<Vec<StatisticalReport>, AuditError> {
    let config = StatConfig { comparisons: params.servers(), ..*config };
    (0..params.servers()).map(|s| statistical_audit(params, s, samples, &config)).collect()
}

/// Self-consistency: one pair's samples split into two halves must pass.
pub fn split_half_audit(
    params: &Params,
    server: usize,
    samples: usize,
    config: &StatConfig,
) -> Result<StatisticalReport, AuditError> {
    check_server(params, server)?;
    if samples < MIN_SAMPLES {
        return Err(AuditError::TooFewSamples(samples));
    }
    let (_, request) = admissible_pairs(params.files(), params.requests(), params.side_size())
        .into_iter()
        .next()
        .expect("at least one admissible pair");
    let half = samples / 2;
    let groups = vec![(request.clone(), 0..half, 0), (request, half..2 * half, 0)];
    let counts = grouped_counts(params, server, &groups, config)?;
    Ok(report(params, server, half, config, &counts))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn case_counts() {
        // 4 * 3 injections per file, two files, two column orders
        assert_eq!(exact_case_count(&Params::new(2, 2, 1, 0, 1).unwrap()), 12 * 12 * 2);
        assert_eq!(exact_case_count(&Params::new(2, 3, 1, 1, 1).unwrap()), 12u128.pow(3) * 6);
        assert_eq!(exact_case_count(&Params::new(2, 4, 2, 1, 1).unwrap()), 12u128.pow(4) * 24);
        assert!(exact_case_count(&Params::new(3, 3, 1, 1, 1).unwrap()) > EXACT_GUARD);
    }

    #[test]
    fn guard_rejects_large_params() {
        let params = Params::new(3, 3, 1, 1, 1).unwrap();
        let err = exact_distribution(&params, &RequestSet::new([0]), &[2].into(), 0, FreshChunkDraw::Permuted);
        assert!(matches!(err, Err(AuditError::TooLarge { .. })));
    }

    #[test]
    fn two_files_one_request_identical() {
        let params = Params::new(2, 2, 1, 0, 1).unwrap();
        let none = BTreeSet::new();
        for server in 0..2 {
            let a = exact_distribution(&params, &RequestSet::new([0]), &none, server, FreshChunkDraw::Permuted).unwrap();
            let b = exact_distribution(&params, &RequestSet::new([1]), &none, server, FreshChunkDraw::Permuted).unwrap();
            assert_eq!(a, b);
            assert_eq!(a.total(), 288);
            let sum: BigRational = a.probabilities().into_values().sum();
            assert_eq!(sum, BigRational::from_integer(1.into()));
        }
    }

    #[test]
    fn unpermuted_fresh_chunks_leak() {
        let params = Params::new(2, 2, 1, 0, 1).unwrap();
        let none = BTreeSet::new();
        let a = exact_distribution(&params, &RequestSet::new([0]), &none, 0, FreshChunkDraw::Unpermuted).unwrap();
        let b = exact_distribution(&params, &RequestSet::new([1]), &none, 0, FreshChunkDraw::Unpermuted).unwrap();
        assert_ne!(a, b);
        let report = exact_audit(&params, FreshChunkDraw::Unpermuted, Execution::Sequential).unwrap();
        assert!(!report.private);
    }

    #[test]
    fn permutation_completion() {
        let p = complete_permutation(5, &[3, 0], &[1, 4]);
        assert_eq!(p, vec![4, 0, 2, 1, 3]);
    }

    #[test]
    fn distribution_equality_is_by_probability() {
        let q = CanonicalQuery(vec![1]);
        let r = CanonicalQuery(vec![2]);
        let mut a = QueryDistribution::default();
        a.add(q.clone(), 1);
        a.add(r.clone(), 1);
        let mut b = QueryDistribution::default();
        b.add(q, 3);
        b.add(r.clone(), 3);
        assert_eq!(a, b);
        b.add(r, 1);
        assert_ne!(a, b);
    }

    #[test]
    fn homogeneity_on_identical_and_disjoint_groups() {
        let g1: HashMap<Vec<u32>, u64> = [(vec![0], 500), (vec![1], 500)].into();
        let g2 = g1.clone();
        let t = homogeneity("x".into(), &[&g1, &g2]);
        assert_eq!((t.statistic, t.dof), (0.0, 1));
        assert!((t.p_value - 1.0).abs() < 1e-12);
        let g3: HashMap<Vec<u32>, u64> = [(vec![0], 1000)].into();
        let g4: HashMap<Vec<u32>, u64> = [(vec![1], 1000)].into();
        let t = homogeneity("y".into(), &[&g3, &g4]);
        assert!((t.statistic - 2000.0).abs() < 1e-9);
        assert!(t.p_value < 1e-100);
    }

    #[test]
    fn sparse_categories_pooled() {
        let g: HashMap<Vec<u32>, u64> = [(vec![0], 100), (vec![1], 100), (vec![2], 1), (vec![3], 1)].into();
        let t = homogeneity("z".into(), &[&g, &g.clone()]);
        assert_eq!(t.categories, 4);
        assert_eq!(t.bins, 2);
        let single: HashMap<Vec<u32>, u64> = [(vec![0], 100)].into();
        assert!(homogeneity("w".into(), &[&single, &single.clone()]).degenerate);
    }

    #[test]
    fn small_statistical_run() {
        let params = Params::new(2, 2, 1, 0, 1).unwrap();
        let config = StatConfig { seed: 3, ..StatConfig::default() };
        let ok = statistical_audit(&params, 0, MIN_SAMPLES, &config).unwrap();
        assert!(ok.pass, "{ok:?}");
        // P = 1: every coefficient is 1, so the coefficient feature is constant
        assert_eq!(ok.warnings.len(), 1);
        let leak = statistical_audit(&params, 0, MIN_SAMPLES, &StatConfig { control: Control::NoPermutations, ..config })
            .unwrap();
        assert!(!leak.pass);
        assert!(statistical_audit(&params, 0, 10, &config).is_err());
        assert!(split_half_audit(&params, 1, MIN_SAMPLES, &config).unwrap().pass);
    }
}
