use std::collections::BTreeSet;

use pirpsi::audit::{exact_audit, exact_distribution, split_half_audit, statistical_audit_all, Control, StatConfig};
use pirpsi::protocol::{admissible_pairs, FreshChunkDraw, Params};
use pirpsi::Execution;

#[test]
fn exact_examples_are_private() {
    for (n, k, p, m) in [(2, 2, 1, 0), (2, 3, 1, 1), (2, 3, 2, 0)] {
        let params = Params::new(n, k, p, m, 1).unwrap();
        let report = exact_audit(&params, FreshChunkDraw::Permuted, Execution::default()).unwrap();
        assert!(report.private, "{:?}", (n, k, p, m));
        assert_eq!(report.servers.len(), 2);
        assert_eq!(report.servers[0].pairs, admissible_pairs(k, p, m).len());
    }
}

#[test]
fn every_pair_of_three_files_shares_one_distribution() {
    let params = Params::new(2, 3, 1, 1, 1).unwrap();
    let pairs = admissible_pairs(3, 1, 1);
    assert_eq!(pairs.len(), 6);
    for server in 0..2 {
        let reference = exact_distribution(&params, &pairs[0].1, &pairs[0].0, server, FreshChunkDraw::Permuted).unwrap();
        assert_eq!(reference.total(), 12u64.pow(3) * 6);
        for (side, request) in &pairs[1..] {
            let d = exact_distribution(&params, request, side, server, FreshChunkDraw::Permuted).unwrap();
            assert_eq!(d, reference);
        }
    }
}

#[test]
fn unpermuted_fresh_chunks_are_caught_exactly() {
    let params = Params::new(2, 3, 1, 1, 1).unwrap();
    let report = exact_audit(&params, FreshChunkDraw::Unpermuted, Execution::default()).unwrap();
    assert!(!report.private);
}

#[test]
fn side_information_alone_changes_nothing() {
    // same request, different side sets
    let params = Params::new(2, 3, 1, 1, 1).unwrap();
    let request = pirpsi::protocol::RequestSet::new([0]);
    let a = exact_distribution(&params, &request, &BTreeSet::from([1]), 1, FreshChunkDraw::Permuted).unwrap();
    let b = exact_distribution(&params, &request, &BTreeSet::from([2]), 1, FreshChunkDraw::Permuted).unwrap();
    assert_eq!(a, b);
}

#[test]
fn statistical_audit_and_controls() {
    let params = Params::new(2, 3, 2, 1, 1).unwrap();
    let config = StatConfig { seed: 11, ..StatConfig::default() };
    let reports = statistical_audit_all(&params, 10_000, &config).unwrap();
    assert!(reports.iter().all(|r| r.pass), "{reports:?}");
    assert!(reports.iter().all(|r| r.threshold == 0.01 / (2.0 * r.tests.len() as f64)));
    for control in [Control::NoPermutations, Control::UnpermutedFresh] {
        let leaky = statistical_audit_all(&params, 10_000, &StatConfig { control, ..config }).unwrap();
        assert!(leaky.iter().any(|r| !r.pass), "{control:?}");
    }
    assert!(split_half_audit(&params, 0, 10_000, &config).unwrap().pass);
}
