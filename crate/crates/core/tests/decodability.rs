use num_bigint::BigInt;
use num_rational::BigRational;
use pirpsi::protocol::{admissible_pairs, exhaustive_grid, run_exchange, Library, Params, RequestSet, SideInfo};
use pirpsi::Execution;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn small_grid_decodes_everywhere() {
    let cases = exhaustive_grid(&[2, 3], 4, 2, 1, Execution::default()).unwrap();
    assert!(!cases.is_empty());
    for c in &cases {
        assert!(c.decoded_ok, "{:?} {:?} {:?}: {:?}", c.params, c.side, c.request, c.error);
        let p = &c.params;
        let expected = p.servers() * p.chunk_len() * (p.files() + p.requests() * (p.servers() - 1) - p.side_size());
        assert_eq!(c.downloaded_symbols, expected as u64);
    }
}

#[test]
fn execution_modes_agree() {
    let seq = exhaustive_grid(&[2], 3, 2, 2, Execution::Sequential).unwrap();
    let par = exhaustive_grid(&[2], 3, 2, 2, Execution::Parallel).unwrap();
    let key = |v: &[pirpsi::protocol::CaseOutcome]| {
        v.iter().map(|c| (c.decoded_ok, c.downloaded_symbols, c.load.clone())).collect::<Vec<_>>()
    };
    assert_eq!(key(&seq), key(&par));
}

#[test]
fn admissible_pair_counts() {
    // C(K, M) * C(K - M, P)
    assert_eq!(admissible_pairs(4, 2, 1).len(), 4 * 3);
    assert_eq!(admissible_pairs(3, 1, 1).len(), 6);
    assert_eq!(admissible_pairs(5, 5, 0).len(), 1);
}

fn arb_case() -> impl Strategy<Value = (Params, u64)> {
    (2usize..4, 1usize..6, 0usize..6, 0usize..6, 1usize..4, any::<u64>()).prop_map(|(n, k, p, m, c, seed)| {
        let p = 1 + p % k;
        let m = m % (k - p + 1);
        (Params::new(n, k, p, m, c).unwrap(), seed)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_exchanges_decode_with_exact_load((params, seed) in arb_case()) {
        let lib = Library::random(params.modulus(), params.files(), params.file_len(), seed);
        let mut order: Vec<usize> = (0..params.files()).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let (side, rest) = order.split_at(params.side_size());
        let request = RequestSet::new(rest[..params.requests()].iter().copied());
        let info = SideInfo::from_library(&lib, side.iter().copied());
        let t = run_exchange(&params, &lib, &request, &info, seed).unwrap();
        prop_assert_eq!(t.verified, Some(true));
        let (n, k, p, m, c) = (params.servers(), params.files(), params.requests(), params.side_size(), params.chunk_len());
        let total = (n * c * (k + p * (n - 1) - m)) as u64;
        prop_assert_eq!(t.downloaded_symbols, total);
        prop_assert_eq!(t.load, BigRational::new(BigInt::from(total), BigInt::from((p * params.file_len()) as u64)));
        // identical across servers
        prop_assert!(t.answers.iter().all(|a| a.symbol_count() as u64 * n as u64 == total));
    }
}
