//! Capacity formulas, per-server load accounting for both regimes, the
//! library-size reduction identity, and the converse lower bounds.
//!
//! All loads are downloaded symbols per decoded symbol. The accounting
//! functions return per-server symbol counts normalised by the file length
//! `L`.

pub mod precise;

use std::io::{self, Write};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::exec::Execution;
use crate::mds::binomial;
use crate::protocol::Regime;
pub use precise::{Decimal, Real, Scalar};

/// Agreement required between irrational quantities.
pub const LOW_REGIME_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CapacityError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
}

fn check(n: usize, k: usize, p: usize, m: usize) -> Result<(), CapacityError> {
    if n < 2 {
        return Err(CapacityError::InvalidParams(format!("N = {n} must be at least 2")));
    }
    if p == 0 {
        return Err(CapacityError::InvalidParams("P must be at least 1".into()));
    }
    if p + m > k {
        return Err(CapacityError::InvalidParams(format!("P + M = {} exceeds K = {k}", p + m)));
    }
    Ok(())
}

fn int(v: u128) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

fn ratio(a: u128, b: u128) -> BigRational {
    BigRational::new(BigInt::from(a), BigInt::from(b))
}

/// `(1 - N^{-x}) / (1 - 1/N)` for integral `x`.
fn geometric_load(n: usize, x: usize) -> BigRational {
    let inv = ratio(1, n as u128);
    (BigRational::one() - inv.clone().pow(x as i32)) / (BigRational::one() - inv)
}

/// Optimal load where the capacity is known; `None` for `P < (K-M)/2` with
/// `(K-M)/P` not an integer.
pub fn dpsi(n: usize, k: usize, p: usize, m: usize) -> Result<Option<BigRational>, CapacityError> {
    check(n, k, p, m)?;
    let effective = k - m;
    if 2 * p >= effective {
        Ok(Some(BigRational::one() + ratio((effective - p) as u128, (p * n) as u128)))
    } else if effective % p == 0 {
        Ok(Some(geometric_load(n, effective / p)))
    } else {
        Ok(None)
    }
}

/// Whether `D(N, K, P, M) = D(N, K - M, P, 0)` holds exactly.
pub fn dpsi_equiv_check(n: usize, k: usize, p: usize, m: usize) -> Result<bool, CapacityError> {
    let with_side = dpsi(n, k, p, m)?;
    let reduced = dpsi(n, k - m, p, 0)?;
    Ok(with_side.is_some() && with_side == reduced)
}

/// `N^(1/P)` and `r = 1/(N^(1/P) - 1)`; exact when `N` is a perfect `P`-th power.
enum Ratio {
    Exact(BigRational),
    Approx(Decimal),
}

fn low_regime_r(n: usize, p: usize) -> Ratio {
    let root = (n as f64).powf(1.0 / p as f64).round() as u128;
    if root.checked_pow(p as u32) == Some(n as u128) {
        Ratio::Exact(BigRational::one() / (int(root) - BigRational::one()))
    } else {
        let s = Decimal::root_of_int(n as u64, p as u32);
        Ratio::Approx(Decimal::from_int(1) / (s - Decimal::from_int(1)))
    }
}

/// `sum_{k=1}^{upto} C(upto, k) r^{K-P-k}` for the `K`-file scheme.
fn alpha_sum<T: Scalar>(r: &T, files: usize, requests: usize, upto: usize) -> T {
    let mut acc = T::from_u128(0);
    for k in 1..=upto {
        let alpha = r.ipow(files as i64 - requests as i64 - k as i64);
        acc = acc + T::from_u128(binomial(upto as u64, k as u64)) * alpha;
    }
    acc
}

/// Low-regime `(p/L, q/L)`; the normalised chunk size follows from
/// requiring `P L` useful equations across all servers.
fn low_accounting<T: Scalar>(r: &T, n: usize, k: usize, p: usize, m: usize) -> (T, T) {
    let all = alpha_sum(r, k, p, k);
    let useless = alpha_sum(r, k, p, k - p);
    let chunk_norm = T::from_u128(p as u128) / T::from_u128(n as u128) / (all.clone() - useless);
    let known = alpha_sum(r, k, p, m);
    (chunk_norm.clone() * all, chunk_norm * known)
}

fn low_pair(n: usize, k: usize, p: usize, m: usize) -> (Real, Real) {
    match low_regime_r(n, p) {
        Ratio::Exact(r) => {
            let (a, b) = low_accounting(&r, n, k, p, m);
            (Real::Exact(a), Real::Exact(b))
        }
        Ratio::Approx(r) => {
            let (a, b) = low_accounting(&r, n, k, p, m);
            (Real::Approx(a), Real::Approx(b))
        }
    }
}

/// Per-server download of the no-side-information scheme, `p(N, K) / L`.
pub fn accounting_p(n: usize, k: usize, p: usize, regime: Regime) -> Result<Real, CapacityError> {
    check(n, k, p, 0)?;
    Ok(match regime {
        Regime::High => Real::Exact(ratio((k + p * (n - 1)) as u128, (n * n) as u128)),
        Regime::Low => low_pair(n, k, p, 0).0,
    })
}

/// Per-server symbols reconstructible from `M` side files, `q(N, K, M) / L`.
pub fn accounting_q(n: usize, k: usize, m: usize, p: usize, regime: Regime) -> Result<Real, CapacityError> {
    check(n, k, p, 0)?;
    if m > k {
        return Err(CapacityError::InvalidParams(format!("M = {m} exceeds K = {k}")));
    }
    Ok(match regime {
        Regime::High => Real::Exact(ratio(m as u128, (n * n) as u128)),
        Regime::Low => low_pair(n, k, p, m).1,
    })
}

/// Both sides of `p(N, K) - q(N, K, M) = p(N, K - M)`, normalised by `L`.
#[derive(Debug, Clone)]
pub struct IdentityReport {
    pub n: usize,
    pub k: usize,
    pub p: usize,
    pub m: usize,
    pub regime: Regime,
    pub lhs: Real,
    pub rhs: Real,
    /// `(P/N) D(N, K - M, P, 0)`, where that has a closed form.
    pub closed_form: Option<BigRational>,
    pub deviation: f64,
    pub ok: bool,
}

pub fn verify_reduction_identity(n: usize, k: usize, p: usize, m: usize) -> Result<IdentityReport, CapacityError> {
    check(n, k, p, m)?;
    let regime = Regime::of(k, p, m);
    let (lhs, rhs) = match regime {
        Regime::High => {
            let lhs = accounting_p(n, k, p, regime)?.as_exact().unwrap().clone()
                - accounting_q(n, k, m, p, regime)?.as_exact().unwrap().clone();
            (Real::Exact(lhs), accounting_p(n, k - m, p, regime)?)
        }
        Regime::Low => {
            let (pk, qk) = low_pair(n, k, p, m);
            let lhs = match (pk, qk) {
                (Real::Exact(a), Real::Exact(b)) => Real::Exact(a - b),
                (a, b) => Real::Approx(a.to_decimal() - b.to_decimal()),
            };
            (lhs, low_pair(n, k - m, p, 0).0)
        }
    };
    let closed_form = reduced_closed_form(n, k - m, p);
    let oracle = closed_form.clone().map(Real::Exact);
    let deviation = lhs.distance(&rhs).max(oracle.as_ref().map_or(0.0, |c| lhs.distance(c)));
    let ok = match (&lhs, &rhs) {
        (Real::Exact(a), Real::Exact(b)) => a == b && closed_form.as_ref().is_none_or(|c| a == c),
        _ => deviation <= LOW_REGIME_TOLERANCE,
    };
    Ok(IdentityReport { n, k, p, m, regime, lhs, rhs, closed_form, deviation, ok })
}

/// `(P/N) D(N, effective, P, 0)` where the capacity has a closed form:
/// `(effective + P(N-1)) / N^2` in the high regime and
/// `(P/N) (1 - N^{-x}) / (1 - 1/N)` for integral `x = effective / P`.
fn reduced_closed_form(n: usize, effective: usize, p: usize) -> Option<BigRational> {
    if 2 * p >= effective {
        Some(ratio((effective + p * (n - 1)) as u128, (n * n) as u128))
    } else if effective % p == 0 {
        Some(ratio(p as u128, n as u128) * geometric_load(n, effective / p))
    } else {
        None
    }
}

/// Lower bound on the load for any scheme.
///
/// The floor expression holds for every tuple and reduces to
/// `1 + (K-M-P)/(NP)` when `2P >= K - M`.
pub fn converse_bound(n: usize, k: usize, p: usize, m: usize) -> Result<BigRational, CapacityError> {
    check(n, k, p, m)?;
    let effective = k - m;
    let whole = effective / p;
    let frac = ratio((effective % p) as u128, p as u128);
    let floor_bound = geometric_load(n, whole) + frac / int(n as u128).pow(whole as i32);
    if 2 * p >= effective {
        let high = BigRational::one() + ratio((effective - p) as u128, (n * p) as u128);
        Ok(floor_bound.max(high))
    } else {
        Ok(floor_bound)
    }
}

/// Load of the executable construction: `1 + (K-M-P)/(PN)` in any regime.
pub fn scheme_load(n: usize, k: usize, p: usize, m: usize) -> Result<BigRational, CapacityError> {
    check(n, k, p, m)?;
    Ok(BigRational::one() + ratio((k - m - p) as u128, (p * n) as u128))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AchievableSource {
    /// Closed-form capacity.
    Theorem,
    /// Only the executable construction's load is known to be achievable.
    Scheme,
}

#[derive(Debug, Clone)]
pub struct CapacityReport {
    pub n: usize,
    pub k: usize,
    pub p: usize,
    pub m: usize,
    pub regime: Regime,
    pub achievable: BigRational,
    pub source: AchievableSource,
    pub converse: BigRational,
    pub optimal: bool,
    pub identity_ok: bool,
}

impl CapacityReport {
    pub fn capacity(&self) -> Option<BigRational> {
        self.optimal.then(|| self.achievable.recip())
    }
}

pub fn capacity_report(n: usize, k: usize, p: usize, m: usize) -> Result<CapacityReport, CapacityError> {
    let theorem = dpsi(n, k, p, m)?;
    let converse = converse_bound(n, k, p, m)?;
    let (achievable, source) = match theorem {
        Some(d) => (d, AchievableSource::Theorem),
        None => (scheme_load(n, k, p, m)?, AchievableSource::Scheme),
    };
    let optimal = source == AchievableSource::Theorem && achievable == converse;
    let identity_ok = verify_reduction_identity(n, k, p, m)?.ok;
    Ok(CapacityReport { n, k, p, m, regime: Regime::of(k, p, m), achievable, source, converse, optimal, identity_ok })
}

/// Inclusive parameter ranges for a sweep. `P` and `M` default to every
/// valid value for each `K`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepRanges {
    pub n: (usize, usize),
    pub k: (usize, usize),
    pub p: Option<(usize, usize)>,
    pub m: Option<(usize, usize)>,
}

impl SweepRanges {
    pub fn tuples(&self) -> Vec<(usize, usize, usize, usize)> {
        let mut out = Vec::new();
        for n in self.n.0.max(2)..=self.n.1 {
            for k in self.k.0.max(1)..=self.k.1 {
                let (p_lo, p_hi) = self.p.unwrap_or((1, k));
                for p in p_lo.max(1)..=p_hi.min(k) {
                    let (m_lo, m_hi) = self.m.unwrap_or((0, k - p));
                    for m in m_lo..=m_hi.min(k - p) {
                        out.push((n, k, p, m));
                    }
                }
            }
        }
        out
    }
}

pub fn sweep(ranges: &SweepRanges, exec: Execution) -> Result<Vec<CapacityReport>, CapacityError> {
    exec.map(&ranges.tuples(), |&(n, k, p, m)| capacity_report(n, k, p, m))
        .into_iter()
        .collect()
}

pub const CSV_HEADER: &str = "N,K,P,M,regime,achievable,converse,optimal,identity_ok";

pub fn format_rational(r: &BigRational, decimal: bool) -> String {
    if decimal {
        format!("{:.12}", r.to_f64().unwrap_or(f64::NAN))
    } else if r.denom().is_one() || r.is_zero() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn write_csv<W: Write>(reports: &[CapacityReport], decimal: bool, mut out: W) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in reports {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.n,
            r.k,
            r.p,
            r.m,
            r.regime,
            format_rational(&r.achievable, decimal),
            format_rational(&r.converse, decimal),
            r.optimal,
            r.identity_ok
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(a: u128, b: u128) -> BigRational {
        ratio(a, b)
    }

    #[test]
    fn dpsi_examples() {
        assert_eq!(dpsi(2, 4, 2, 1).unwrap(), Some(q(5, 4)));
        assert_eq!(dpsi(2, 4, 2, 0).unwrap(), Some(q(3, 2)));
        assert_eq!(dpsi(3, 7, 5, 2).unwrap(), Some(q(1, 1)));
        // (1 - 2^-4) / (1 - 1/2) = (15/16) * 2
        assert_eq!(dpsi(2, 6, 1, 2).unwrap(), Some(q(15, 8)));
        // (K-M)/P = 5/2 not integral, 2P < K-M
        assert_eq!(dpsi(2, 6, 2, 1).unwrap(), None);
        assert!(dpsi(2, 3, 0, 1).is_err());
        assert!(dpsi(1, 3, 1, 1).is_err());
        assert!(dpsi(2, 3, 2, 2).is_err());
    }

    #[test]
    fn equivalence_examples() {
        assert!(dpsi_equiv_check(2, 4, 2, 1).unwrap());
        assert_eq!(dpsi(2, 3, 2, 0).unwrap(), Some(q(5, 4)));
        assert!(dpsi_equiv_check(3, 6, 2, 0).unwrap());
        assert!(!dpsi_equiv_check(2, 6, 2, 1).unwrap());
    }

    #[test]
    fn high_regime_accounting() {
        let p = accounting_p(2, 4, 2, Regime::High).unwrap();
        assert_eq!(p, Real::Exact(q(6, 4)));
        assert_eq!(accounting_q(2, 4, 1, 2, Regime::High).unwrap(), Real::Exact(q(1, 4)));
        assert_eq!(accounting_q(2, 4, 0, 2, Regime::High).unwrap(), Real::Exact(q(0, 1)));
        // K = P collapses to P / N
        assert_eq!(accounting_p(3, 4, 4, Regime::High).unwrap(), Real::Exact(q(4, 3)));
    }

    #[test]
    fn high_accounting_times_n_over_p_is_dpsi() {
        for n in 2..=4 {
            for k in 1..=8 {
                for p in 1..=k {
                    if 2 * p < k {
                        continue;
                    }
                    let a = accounting_p(n, k, p, Regime::High).unwrap();
                    let scaled = a.as_exact().unwrap() * q(n as u128, p as u128);
                    assert_eq!(Some(scaled), dpsi(n, k, p, 0).unwrap());
                }
            }
        }
    }

    #[test]
    fn low_regime_accounting_exact_path() {
        // P = 1: r = 1/(N-1) is rational
        let a = accounting_p(2, 4, 1, Regime::Low).unwrap();
        let scaled = a.as_exact().expect("exact for P = 1") * q(2, 1);
        assert_eq!(scaled, q(15, 8));
        assert_eq!(accounting_q(2, 4, 0, 1, Regime::Low).unwrap(), Real::Exact(q(0, 1)));
    }

    #[test]
    fn low_regime_accounting_irrational_path() {
        // N = 2, P = 2: r = 1/(sqrt 2 - 1)
        let a = accounting_p(2, 4, 2, Regime::Low).unwrap();
        assert!(matches!(a, Real::Approx(_)));
        // N p / (P L) = (1 - 2^{-2}) / (1 - 1/2) = 3/2
        let scaled = a.to_decimal() * Decimal::from_int(2) / Decimal::from_int(2);
        assert!((scaled - Decimal::from_rational(&q(3, 2))).abs().to_f64() < 1e-60);
    }

    #[test]
    fn identity_examples() {
        let r = verify_reduction_identity(2, 4, 2, 1).unwrap();
        assert!(r.ok);
        assert_eq!(r.lhs, Real::Exact(q(5, 4)));
        assert_eq!(r.rhs, Real::Exact(q(5, 4)));
        assert!(verify_reduction_identity(3, 5, 2, 0).unwrap().ok);
        let low = verify_reduction_identity(2, 6, 1, 2).unwrap();
        assert_eq!(low.regime, Regime::Low);
        assert!(low.ok);
        let irr = verify_reduction_identity(3, 10, 2, 2).unwrap();
        assert!(irr.ok, "deviation {}", irr.deviation);
        assert!(matches!(irr.lhs, Real::Approx(_)));
    }

    #[test]
    fn converse_examples() {
        assert_eq!(converse_bound(2, 4, 2, 1).unwrap(), q(5, 4));
        assert_eq!(converse_bound(2, 6, 1, 2).unwrap(), q(15, 8));
        assert_eq!(converse_bound(2, 7, 2, 1).unwrap(), q(7, 4));
        // (K-M)/P = 5/2: floor 2, (1 - 1/4)/(1/2) + (1/2)/4
        assert_eq!(converse_bound(2, 6, 2, 1).unwrap(), q(3, 2) + q(1, 8));
    }

    #[test]
    fn report_flags() {
        let r = capacity_report(2, 4, 2, 1).unwrap();
        assert!(r.optimal && r.identity_ok);
        assert_eq!(r.capacity(), Some(q(4, 5)));
        let open = capacity_report(2, 6, 2, 1).unwrap();
        assert!(!open.optimal);
        assert_eq!(open.source, AchievableSource::Scheme);
        assert!(open.converse < open.achievable);
    }

    #[test]
    fn csv_output() {
        let ranges = SweepRanges { n: (2, 2), k: (4, 4), p: Some((2, 2)), m: Some((1, 1)) };
        let reports = sweep(&ranges, Execution::Sequential).unwrap();
        let mut buf = Vec::new();
        write_csv(&reports, false, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, format!("{CSV_HEADER}\n2,4,2,1,high,5/4,5/4,true,true\n"));
    }

    #[test]
    fn sweep_tuple_enumeration() {
        let ranges = SweepRanges { n: (2, 3), k: (1, 3), p: None, m: None };
        // per N: K=1: 1, K=2: 3, K=3: 6
        assert_eq!(ranges.tuples().len(), 2 * 10);
    }
}
