use atrahasis::code::{
    derive_params, fixture_956, rs_stars_t2, verify_axioms, Axiom, AxiomReport, CodeError, FileTensor, Flavor, MsrCode,
    NodeContent, RegeneratingCode, StarFamily,
};
use atrahasis::field::{FieldSpec, Symbol};
use atrahasis::linalg::{in_span, Matrix};
use atrahasis::tensor::{combinations, expand_sym, x_tensor, SymBasis};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_file(code: &MsrCode, rng: &mut ChaCha8Rng) -> FileTensor {
    let order = code.stars().field().order();
    let raw: Vec<Symbol> = (0..code.params().file_size).map(|_| rng.random_range(0..order)).collect();
    code.encode(&raw).unwrap()
}

fn contents(code: &MsrCode, file: &FileTensor) -> Vec<NodeContent> {
    (0..code.params().n).map(|h| code.node_content(file, h).unwrap()).collect()
}

fn check_all_downloads(code: &MsrCode, file: &FileTensor) {
    let all = contents(code, file);
    for set in combinations(code.params().n, code.params().k) {
        let picked: Vec<NodeContent> = set.iter().map(|&h| all[h].clone()).collect();
        assert_eq!(&code.download(&picked).unwrap(), file, "download from {set:?}");
    }
}

fn check_all_repairs(code: &MsrCode, file: &FileTensor) {
    let p = *code.params();
    let all = contents(code, file);
    for f in 0..p.n {
        let others: Vec<usize> = (0..p.n).filter(|&h| h != f).collect();
        for pick in combinations(others.len(), p.d) {
            let msgs: Vec<_> = pick.iter().map(|&i| code.help(&all[others[i]], f).unwrap()).collect();
            assert!(msgs.iter().all(|m| m.values.len() == p.beta));
            assert_eq!(code.repair(&msgs, f).unwrap(), all[f], "repair {f} from {pick:?}");
        }
    }
}

#[test]
fn fixture_passes_axioms() {
    assert_eq!(verify_axioms(&fixture_956()), AxiomReport::Pass);
}

#[test]
fn fixture_node_basis_and_unit_file() {
    let code = MsrCode::new(fixture_956()).unwrap();
    let p = *code.params();
    let mut e1 = vec![0; p.file_size];
    e1[0] = 1;
    let file = code.encode(&e1).unwrap();
    for h in 0..p.n {
        let rows = code.node_rows(h).unwrap();
        assert_eq!(rows.rank(), 6);
        let c = code.node_content(&file, h).unwrap();
        // φ = e_1 picks the first coordinate of every basis tensor
        let expected: Vec<Symbol> = rows.row_iter().map(|r| r[0]).collect();
        assert_eq!(c.values, expected);
    }
}

#[test]
fn fixture_exhaustive_download_and_repair() {
    let code = MsrCode::new(fixture_956()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..2 {
        let file = random_file(&code, &mut rng);
        check_all_downloads(&code, &file);
        check_all_repairs(&code, &file);
    }
}

#[test]
fn zero_file_gives_zero_everything() {
    let code = MsrCode::new(fixture_956()).unwrap();
    let zero = FileTensor::zero(*code.params());
    let all = contents(&code, &zero);
    assert!(all.iter().all(|c| c.values.iter().all(|&v| v == 0)));
    let msg = code.help(&all[0], 3).unwrap();
    assert!(msg.values.iter().all(|&v| v == 0));
    assert_eq!(code.download(&all[..5]).unwrap(), zero);
}

#[test]
fn too_few_nodes_or_helpers_fail() {
    let code = MsrCode::new(fixture_956()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let file = random_file(&code, &mut rng);
    let all = contents(&code, &file);
    assert!(matches!(code.download(&all[..4]), Err(CodeError::InsufficientNodes { have: 4, need: 5 })));
    let msgs: Vec<_> = (1..6).map(|h| code.help(&all[h], 0).unwrap()).collect();
    match code.repair(&msgs, 0) {
        Err(CodeError::Axiom(v)) => {
            assert_eq!(v.axiom, Axiom::Repair);
            assert_eq!(v.failed, Some(0));
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn message_tensors_lie_in_node_subspace() {
    for stars in [fixture_956(), rs_stars_t2(&FieldSpec::gf16(), 6, 3, Flavor::Exterior).unwrap()] {
        let code = MsrCode::new(stars).unwrap();
        let field = code.stars().field().clone();
        let n = code.params().n;
        for h in 0..n {
            let gens: Vec<Vec<Symbol>> = code.node_rows(h).unwrap().row_iter().map(|r| r.to_vec()).collect();
            for f in (0..n).filter(|&f| f != h) {
                for row in code.help_rows(h, f).unwrap().row_iter() {
                    assert!(in_span(&field, row, &gens).is_some());
                }
            }
        }
    }
}

#[test]
fn help_rows_match_direct_expansion() {
    // x_h ⊗ y_h ⊙ η ⊙ y_f built from expand_sym with η given as a product of unit vectors
    let code = MsrCode::new(fixture_956()).unwrap();
    let field = code.stars().field().clone();
    let stars = code.stars();
    let sub = SymBasis::new(3, 1);
    let (h, f) = (2, 7);
    let rows = code.help_rows(h, f).unwrap();
    for j in 0..sub.dim() {
        let eta = sub.unit(j);
        let s = expand_sym(&field, 3, &[stars.second(h), &eta, stars.second(f)]).unwrap();
        assert_eq!(rows.row(j), x_tensor(&field, stars.x(h), &s).as_slice());
    }
}

#[test]
fn exterior_known_zero_rows_vanish() {
    let code = MsrCode::new(rs_stars_t2(&FieldSpec::gf16(), 6, 3, Flavor::Exterior).unwrap()).unwrap();
    for f in 0..6 {
        let rows = code.known_zero_rows(f).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows.iter().flatten().all(|&c| c == 0));
    }
}

#[test]
fn duplicate_stars_violate_mdsx() {
    let base = fixture_956();
    let mut x = base.x_stars().to_vec();
    let mut y = base.second_stars().to_vec();
    x[4] = x[1].clone();
    y[4] = y[1].clone();
    let fam = StarFamily::new(base.field(), *base.params(), x, y).unwrap();
    match verify_axioms(&fam) {
        AxiomReport::Violation(v) => {
            assert_eq!(v.axiom, Axiom::MdsX);
            assert!(v.set.contains(&1) && v.set.contains(&4));
        }
        AxiomReport::Pass => panic!("duplicate stars passed"),
    }
}

#[test]
fn rs_t2_families_verify_and_roundtrip() {
    let cases = [
        (FieldSpec::gf16(), 6, 3),
        (FieldSpec::prime(11).unwrap(), 5, 3),
        (FieldSpec::binary(3).unwrap(), 6, 3),
        (FieldSpec::binary(5).unwrap(), 8, 4),
        (FieldSpec::binary(5).unwrap(), 10, 5),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for (field, n, k) in cases {
        for flavor in [Flavor::Symmetric, Flavor::Exterior] {
            let stars = rs_stars_t2(&field, n, k, flavor).unwrap();
            assert_eq!(verify_axioms(&stars), AxiomReport::Pass, "{field} ({n},{k}) {flavor}");
            let code = MsrCode::new(stars).unwrap();
            let file = random_file(&code, &mut rng);
            check_all_downloads(&code, &file);
            check_all_repairs(&code, &file);
        }
    }
}

#[test]
fn degenerate_t_equals_k() {
    // d = k: α = β = 1, a plain MDS code with single-symbol repair
    let field = FieldSpec::gf16();
    for k in 2..5 {
        let p = derive_params(k + 1, k, k, Flavor::Symmetric).unwrap();
        let points: Vec<Symbol> = (1..=(k + 1) as Symbol).collect();
        let x_exps: Vec<u32> = (0..k as u32).collect();
        let stars = StarFamily::from_pattern(&field, p, &points, &x_exps, &[0]).unwrap();
        assert_eq!(verify_axioms(&stars), AxiomReport::Pass);
        let code = MsrCode::new(stars).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(k as u64);
        let file = random_file(&code, &mut rng);
        check_all_downloads(&code, &file);
        check_all_repairs(&code, &file);
    }
}

#[test]
fn exterior_t3_random_stars() {
    // (9,5,6) exterior over GF(4096) with random stars from a fixed seed
    let field = FieldSpec::binary(12).unwrap();
    let p = derive_params(9, 5, 6, Flavor::Exterior).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let x: Vec<Vec<Symbol>> = (0..9).map(|_| (0..3).map(|_| rng.random_range(0..4096)).collect()).collect();
    let w: Vec<Vec<Symbol>> = (0..9).map(|_| (0..5).map(|_| rng.random_range(0..4096)).collect()).collect();
    let stars = StarFamily::new(&field, p, x, w).unwrap();
    assert_eq!(verify_axioms(&stars), AxiomReport::Pass);
    let code = MsrCode::new(stars).unwrap();
    let file = random_file(&code, &mut rng);
    check_all_downloads(&code, &file);
    check_all_repairs(&code, &file);
}

#[test]
fn plans_match_direct_operations() {
    let code = MsrCode::new(fixture_956()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let file = random_file(&code, &mut rng);
    let nodes = code.encode_nodes(&file.coords).unwrap();
    let all = contents(&code, &file);
    for (h, c) in all.iter().enumerate() {
        assert_eq!(nodes[h], c.values);
    }
    let plan = code.download_plan(&[8, 2, 5, 0, 3]).unwrap();
    let used: Vec<&[Symbol]> = plan.nodes.iter().map(|&h| nodes[h].as_slice()).collect();
    assert_eq!(plan.apply(&used), file.coords);
    let plan = code.repair_plan(4, &[0, 1, 2, 3, 5, 6]).unwrap();
    assert_eq!(plan.bandwidth(), 18);
    let msgs: Vec<Vec<Symbol>> = plan.helpers.iter().enumerate().map(|(i, &h)| plan.message(i, &nodes[h])).collect();
    let refs: Vec<&[Symbol]> = msgs.iter().map(|m| m.as_slice()).collect();
    assert_eq!(plan.rebuild(&refs), nodes[4]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn operations_are_linear(seed in any::<u64>(), c in 1u32..16, f in 0usize..9) {
        let code = MsrCode::new(fixture_956()).unwrap();
        let field = code.stars().field().clone();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_file(&code, &mut rng);
        let b = random_file(&code, &mut rng);
        let combo: Vec<Symbol> = a.coords.iter().zip(&b.coords).map(|(&x, &y)| field.add(x, field.mul(c, y))).collect();
        let ab = code.encode(&combo).unwrap();
        let lin = |u: &[Symbol], v: &[Symbol]| -> Vec<Symbol> { u.iter().zip(v).map(|(&x, &y)| field.add(x, field.mul(c, y))).collect() };
        let h = (f + 1) % 9;
        let (ca, cb, cab) = (code.node_content(&a, h).unwrap(), code.node_content(&b, h).unwrap(), code.node_content(&ab, h).unwrap());
        prop_assert_eq!(&cab.values, &lin(&ca.values, &cb.values));
        let (ma, mb, mab) = (code.help(&ca, f).unwrap(), code.help(&cb, f).unwrap(), code.help(&cab, f).unwrap());
        prop_assert_eq!(&mab.values, &lin(&ma.values, &mb.values));
    }

    #[test]
    fn download_inverts_stacked_system(seed in any::<u64>()) {
        let code = MsrCode::new(fixture_956()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let file = random_file(&code, &mut rng);
        let mut nodes: Vec<usize> = (0..9).collect();
        for i in (1..9).rev() {
            nodes.swap(i, rng.random_range(0..=i));
        }
        let picked: Vec<NodeContent> = nodes[..5].iter().map(|&h| code.node_content(&file, h).unwrap()).collect();
        prop_assert_eq!(code.download(&picked).unwrap(), file);
        let blocks: Vec<&Matrix> = nodes[..5].iter().map(|&h| code.node_rows(h).unwrap()).collect();
        prop_assert_eq!(Matrix::stack(code.stars().field(), &blocks).unwrap().rank(), 30);
    }
}
