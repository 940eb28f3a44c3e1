mod common;

use proptest::prelude::*;
use qldpc::affine::{girth, Girth};
use qldpc::construct::*;
use qldpc::cycles::cycle_determinant;
use qldpc::{CssCode, Field, Which};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn published_384() -> GeneratorPair {
    GeneratorPair::from_coeffs(
        384,
        &[(221, 358), (101, 314), (217, 92)],
        &[(199, 303), (169, 324), (343, 375)],
    )
    .unwrap()
}

#[test]
fn published_generators_meet_the_design_criteria() {
    let gen = published_384();
    assert!(check_requirement1(&gen));
    assert!(check_criterion_b(&gen));
    let (hx, hz) = build_arrays(&gen).unwrap();
    assert!(check_criterion_c(&hx, &hz));
    assert_eq!(girth(&hx, &hz, 16), Girth::Length(12));
}

#[test]
fn construction_is_sound_and_deterministic() {
    let field = Field::with_default_poly(8).unwrap();
    let params = ConstructParams::new(384, common::P384_SEED);
    let c = construct(&field, &params).unwrap();
    assert_eq!(construct(&field, &params).unwrap(), c);

    let gen = &c.gen;
    assert!(check_requirement1(gen) && check_criterion_b(gen));
    let (hx, hz) = build_arrays(gen).unwrap();
    assert!(check_criterion_c(&hx, &hz));
    assert_eq!(girth(&hx, &hz, 12), Girth::Length(12));

    let lp = LabelProblem::new(&field, gen).unwrap();
    let m = field.order();
    assert!(lp.a01.evaluate(&c.gamma, m).iter().all(|&x| x == 0));
    assert!(lp.a2.evaluate(&c.gamma, m).iter().all(|&x| x != 0));
    assert!(lp.b2.evaluate(&c.delta, m).iter().all(|&x| x != 0));

    let code = CssCode::from_construction(field.clone(), &c, serde_json::Value::Null).unwrap();
    let report = code.verify_orthogonality(100, 1);
    assert!(report.ok, "{report:?}");
    for which in [Which::Gamma, Which::Delta] {
        let cat = code.catalog(which);
        assert_eq!(cat.records.len(), 3 * 384);
        for rec in &cat.records {
            let det = cycle_determinant(&field, rec);
            match rec.utcbc_j {
                Some(0 | 1) => assert_eq!(det, 0, "{which:?} {:?}", rec.rows),
                Some(2) => assert_ne!(det, 0),
                _ => unreachable!(),
            }
        }
    }
}

#[test]
fn conventional_search_keeps_requirement1() {
    let field = Field::with_default_poly(8).unwrap();
    for seed in 0..5 {
        let params = ConstructParams {
            design: Design::Conventional,
            ..ConstructParams::new(64, seed)
        };
        let c = construct(&field, &params).unwrap();
        assert!(check_requirement1(&c.gen));
        let code = CssCode::from_construction(field.clone(), &c, serde_json::Value::Null).unwrap();
        assert!(code.verify_orthogonality(20, seed).ok);
        assert_eq!(code.compute_dimension().k, code.n() / 3);
    }
}

#[test]
fn bad_parameters_are_rejected() {
    assert!(matches!(
        GeneratorPair::from_coeffs(8, &[(2, 0), (1, 0)], &[(1, 0), (1, 0)]),
        Err(ConstructError::Affine(_))
    ));
    let field = Field::with_default_poly(8).unwrap();
    let gen = GeneratorPair::from_coeffs(8, &[(1, 0), (1, 1)], &[(1, 0), (1, 1)]).unwrap();
    assert!(matches!(
        LabelProblem::new(&field, &gen),
        Err(ConstructError::InvalidParameters(_))
    ));
}

#[test]
fn example_labels_cover_the_worked_arrays() {
    for e in [3, 8] {
        let code = common::example_code(e, 1);
        assert!(code.verify_orthogonality(50, 2).ok);
        assert_eq!(code.compute_dimension().k, code.n() / 3);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]
    /// Any choice of free exponents solves the homogeneous zero system.
    #[test]
    fn free_bound_map_solves_zero_system(seed in any::<u64>()) {
        let field = Field::with_default_poly(8).unwrap();
        let gen = common::example_generators();
        let lp = LabelProblem::new(&field, &gen).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let free: Vec<u32> = (0..lp.fbm.free.len()).map(|_| rng.gen_range(0..255)).collect();
        let x = lp.fbm.assemble(&free);
        prop_assert!(lp.a01.evaluate(&x, 255).iter().all(|&v| v == 0));
    }
}
