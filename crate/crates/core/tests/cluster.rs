use std::fs;

use atrahasis::cluster::{Cluster, ClusterError, NodeStatus, LOCK_FILE};
use atrahasis::code::{fixture_956, CodeError};
use atrahasis::format::{decode_blob, encode_blob, pack_bytes, unpack_bytes, CodeSpec, FormatError};
use atrahasis::field::FieldSpec;
use atrahasis::tensor::combinations;
use atrahasis::transforms::Strategy;
use proptest::prelude::*;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn bytes(len: usize, seed: u64) -> Vec<u8> {
    let mut v = vec![0; len];
    ChaCha8Rng::seed_from_u64(seed).fill_bytes(&mut v);
    v
}

fn fixture_spec() -> CodeSpec {
    CodeSpec::new(fixture_956())
}

#[test]
fn get_from_every_surviving_set() {
    let dir = tempfile::tempdir().unwrap();
    let data = bytes(5000, 1);
    let mut c = Cluster::create(dir.path(), fixture_spec()).unwrap();
    c.put("a", &data).unwrap();
    // any n-k failures leave k readable nodes
    for set in combinations(9, 5) {
        let (back, report) = c.get(Some("a"), Some(set.clone())).unwrap();
        assert_eq!(back, data, "nodes {set:?}");
        assert_eq!(report.per_chunk, 30);
    }
}

#[test]
fn repairs_restore_digests_and_ledger() {
    let dir = tempfile::tempdir().unwrap();
    let data = bytes(20_000, 2);
    let mut c = Cluster::create(dir.path(), fixture_spec()).unwrap();
    let put = c.put("a", &data).unwrap();
    let chunks = put.chunks as u64;
    for f in [8, 0, 4] {
        c.fail(f).unwrap();
        assert_eq!(c.manifest().node_status[f], NodeStatus::Failed);
        let r = c.repair(f, None).unwrap();
        assert_eq!(r.symbols, chunks * 18);
    }
    c.fail(2).unwrap();
    let r = c.repair(2, Some(vec![8, 7, 6, 5, 4, 3])).unwrap();
    assert_eq!(r.per_chunk, 18);
    assert_eq!(c.ledger().repair_symbols, 4 * chunks * 18);
    for (strategy, per) in [(Strategy::Naive, 30), (Strategy::Cascade, 28), (Strategy::Subspace, 27)] {
        c.fail(1).unwrap();
        c.fail(6).unwrap();
        assert_eq!(c.repair2(1, 6, strategy, None).unwrap().symbols, chunks * per);
    }
    assert_eq!(c.get(None, None).unwrap().0, data);
}

#[test]
fn node_state_errors() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = Cluster::create(dir.path(), fixture_spec()).unwrap();
    c.put("a", b"hello").unwrap();
    assert!(matches!(c.repair(0, None), Err(ClusterError::NodeState(_))));
    for h in 0..4 {
        c.fail(h).unwrap();
    }
    assert!(matches!(c.fail(0), Err(ClusterError::NodeState(_))));
    assert_eq!(c.get(None, None).unwrap().0, b"hello");
    c.fail(4).unwrap();
    let e = c.get(None, None).unwrap_err();
    assert!(matches!(e, ClusterError::Code(CodeError::InsufficientNodes { have: 4, need: 5 })));
    assert_eq!(e.exit_code(), 5);
    assert_eq!(c.repair(0, None).unwrap_err().exit_code(), 5);
    assert!(matches!(c.put("b", b"x"), Err(ClusterError::NodeState(_))));
    assert!(matches!(c.get(Some("zzz"), None), Err(ClusterError::NoSuchObject(_))));
}

#[test]
fn corruption_is_detected() {
    let dir = tempfile::tempdir().unwrap();
    {
        let mut c = Cluster::create(dir.path(), fixture_spec()).unwrap();
        c.put("a", &bytes(300, 3)).unwrap();
    }
    let blob = dir.path().join("node_0/o0_seg_0.blob");
    let mut raw = fs::read(&blob).unwrap();
    *raw.last_mut().unwrap() ^= 1;
    fs::write(&blob, &raw).unwrap();
    let mut c = Cluster::open(dir.path()).unwrap();
    assert!(matches!(c.get(None, None), Err(ClusterError::Corrupt { .. })));
    assert!(c.get(None, Some(vec![1, 2, 3, 4, 5])).is_ok());
}

#[test]
fn params_hash_is_checked() {
    let field = FieldSpec::gf16();
    let blob = encode_blob(&field, 2, 77, &[1, 2, 3]);
    assert!(matches!(decode_blob(&field, &blob, 78), Err(FormatError::ParamsHash { expected: 78, found: 77 })));
    let (h, v) = decode_blob(&field, &blob, 77).unwrap();
    assert_eq!((h.node, v), (2, vec![1, 2, 3]));
}

#[test]
fn store_lock_is_exclusive() {
    let dir = tempfile::tempdir().unwrap();
    let c = Cluster::create(dir.path(), fixture_spec()).unwrap();
    assert!(matches!(Cluster::open(dir.path()), Err(ClusterError::Locked(_))));
    drop(c);
    assert!(!dir.path().join(LOCK_FILE).exists());
    assert!(Cluster::open(dir.path()).is_ok());
}

#[test]
fn shortened_cluster() {
    let dir = tempfile::tempdir().unwrap();
    let spec = CodeSpec { stars: fixture_956(), pinned: vec![8] };
    let mut c = Cluster::create(dir.path(), spec).unwrap();
    let data = bytes(4000, 4);
    let chunks = c.put("a", &data).unwrap().chunks as u64;
    c.fail(7).unwrap();
    assert_eq!(c.repair(7, None).unwrap().symbols, chunks * 15);
    for set in combinations(8, 4) {
        assert_eq!(c.get(None, Some(set)).unwrap().0, data);
    }
    c.fail(0).unwrap();
    c.fail(1).unwrap();
    assert_eq!(c.repair2(0, 1, Strategy::Naive, None).unwrap_err().exit_code(), 2);
}

#[test]
fn empty_file_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = Cluster::create(dir.path(), fixture_spec()).unwrap();
    assert_eq!(c.put("e", b"").unwrap().chunks, 1);
    assert_eq!(c.get(Some("e"), None).unwrap().0, Vec::<u8>::new());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn packing_roundtrip(data in proptest::collection::vec(any::<u8>(), 0..400), which in 0usize..4) {
        let field = [FieldSpec::gf16(), FieldSpec::binary(8).unwrap(), FieldSpec::prime(127).unwrap(), FieldSpec::binary(12).unwrap()][which].clone();
        let (layout, symbols) = pack_bytes(&field, &data, 30);
        prop_assert_eq!(symbols.len(), layout.chunk_count * 30);
        prop_assert!(symbols.iter().all(|&s| field.contains(s)));
        let b = field.bits_per_symbol() as usize;
        prop_assert_eq!(layout.padding_bits, symbols.len() * b - (data.len() + 8) * 8);
        prop_assert_eq!(unpack_bytes(&field, &symbols).unwrap(), data);
    }
}
