mod common;

use proptest::prelude::*;
use qldpc::affine::{classify, commuting_lemma_check, composite_function, girth, Girth};
use qldpc::construct::build_arrays;
use qldpc::{AffinePerm, BlockCycle, CycleClass, PermArray};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn ap(a: u64, b: u64, p: u64) -> AffinePerm {
    AffinePerm::new(a, b, p).unwrap()
}

fn parse_rows(rows: &[&str]) -> Vec<Vec<u8>> {
    rows.iter().map(|r| r.bytes().map(|b| b - b'0').collect()).collect()
}

#[test]
fn map_2j_plus_1_mod_5() {
    let f = ap(2, 1, 5);
    assert_eq!(f.matrix(), parse_rows(&["00100", "10000", "00010", "01000", "00001"]));
    let fi = f.invert();
    assert_eq!(fi, ap(3, 2, 5));
    assert_eq!(fi.matrix(), parse_rows(&["01000", "00010", "10000", "00100", "00001"]));
    assert!(f.compose(&fi).unwrap().is_identity());
}

#[test]
fn worked_example_cycle_is_totally_closed() {
    let (hx, _) = build_arrays(&common::example_generators()).unwrap();
    let c = BlockCycle::new(vec![0, 3, 1, 5, 2, 4]).unwrap();
    let f = composite_function(&hx, &c).unwrap();
    assert!(f.is_identity());
    assert_eq!(classify(&f), CycleClass::TotallyClosed);
}

#[test]
fn worked_example_has_no_closed_4_cycles() {
    let (hx, hz) = build_arrays(&common::example_generators()).unwrap();
    assert_eq!(girth(&hx, &hz, 12), Girth::Length(8));
}

fn random_cpm_array(rng: &mut ChaCha8Rng, p: u64, l: usize) -> PermArray {
    let rows = (0..2)
        .map(|_| (0..l).map(|_| ap(1, rng.gen_range(0..p), p)).collect())
        .collect();
    PermArray::from_rows(p, rows).unwrap()
}

#[test]
fn commuting_2x3_subarrays_close_at_length_12() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let cycle = BlockCycle::new(vec![0, 1, 2, 0, 1, 2]).unwrap();
    for _ in 0..100 {
        let p = rng.gen_range(5..500);
        let arr = random_cpm_array(&mut rng, p, 3);
        let f = composite_function(&arr, &cycle).unwrap();
        assert_eq!(cycle.len(), 12);
        assert_eq!(classify(&f), CycleClass::TotallyClosed);
    }
}

#[test]
fn cpm_arrays_have_girth_at_most_12() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..30 {
        let p = rng.gen_range(5..200);
        let l = rng.gen_range(3..7);
        let arr = random_cpm_array(&mut rng, p, l);
        match girth(&arr, &arr, 12) {
            Girth::Length(g) => assert!(g <= 12, "girth {g}"),
            Girth::Beyond(_) => panic!("no closed cycle up to 12"),
        }
    }
}

fn unit(p: u64) -> impl Strategy<Value = u64> {
    (1..p).prop_filter("unit", move |a| qldpc::affine::gcd(*a, p) == 1)
}

fn perm(p: u64) -> impl Strategy<Value = AffinePerm> {
    (unit(p), 0..p).prop_map(move |(a, b)| ap(a, b, p))
}

fn perm_pair() -> impl Strategy<Value = (AffinePerm, AffinePerm, AffinePerm)> {
    (2u64..120).prop_flat_map(|p| (perm(p), perm(p), perm(p)))
}

proptest! {
    #[test]
    fn composition_laws((f, g, h) in perm_pair(), x in 0u64..1000) {
        let p = f.modulus();
        let x = x % p;
        prop_assert_eq!(f.compose(&g).unwrap().apply(x), f.apply(g.apply(x)));
        prop_assert_eq!(f.compose(&g).unwrap().compose(&h).unwrap(), f.compose(&g.compose(&h).unwrap()).unwrap());
        prop_assert!(f.compose(&f.invert()).unwrap().is_identity());
        prop_assert_eq!(f.invert().invert(), f);
    }

    #[test]
    fn commutation_matches_pointwise((f, g, _) in perm_pair()) {
        let p = f.modulus();
        let pointwise = (0..p).all(|x| f.apply(g.apply(x)) == g.apply(f.apply(x)));
        prop_assert_eq!(f.commutes(&g).unwrap(), pointwise);
        prop_assert_eq!(g.commutes(&f).unwrap(), pointwise);
        if pointwise {
            prop_assert!(commuting_lemma_check(&f, &g).unwrap());
        }
    }

    #[test]
    fn fixed_points_and_class_match_brute_force((f, _, _) in perm_pair()) {
        let p = f.modulus();
        let brute: Vec<u64> = (0..p).filter(|&x| f.apply(x) == x).collect();
        let mut fp = f.fixed_points();
        fp.sort_unstable();
        prop_assert_eq!(&fp, &brute);
        let expect = if brute.len() as u64 == p {
            CycleClass::TotallyClosed
        } else if brute.is_empty() {
            CycleClass::Open
        } else {
            CycleClass::Closed
        };
        prop_assert_eq!(classify(&f), expect);
    }

    #[test]
    fn matrix_is_a_permutation((f, _, _) in perm_pair()) {
        let m = f.matrix();
        for row in &m {
            prop_assert_eq!(row.iter().map(|&b| b as usize).sum::<usize>(), 1);
        }
        for j in 0..m.len() {
            prop_assert_eq!(m.iter().map(|r| r[j] as usize).sum::<usize>(), 1);
        }
        // The inverse map is the transpose.
        let mi = f.invert().matrix();
        for i in 0..m.len() {
            for j in 0..m.len() {
                prop_assert_eq!(m[i][j], mi[j][i]);
            }
        }
    }

    #[test]
    fn composite_matches_pointwise_walk(seed in any::<u64>(), len in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = rng.gen_range(3..60u64);
        let units: Vec<u64> = (1..p).filter(|&a| qldpc::affine::gcd(a, p) == 1).collect();
        let rows = (0..2).map(|_| (0..4).map(|_| ap(units[rng.gen_range(0..units.len())], rng.gen_range(0..p), p)).collect()).collect();
        let arr = PermArray::from_rows(p, rows).unwrap();
        let mut cols = vec![rng.gen_range(0..4)];
        while cols.len() < 2 * len {
            let c = rng.gen_range(0..4);
            if c != *cols.last().unwrap() && (cols.len() + 1 < 2 * len || c != cols[0]) {
                cols.push(c);
            }
        }
        let cycle = BlockCycle::new(cols.clone()).unwrap();
        let f = composite_function(&arr, &cycle).unwrap();
        for x in 0..p {
            // Row move in row block r: column c0 -> row f(x) -> column c1 via inverse.
            let mut y = x;
            for k in 0..cols.len() {
                let r = k % 2;
                let next = cols[(k + 1) % cols.len()];
                let row = arr.at(r, cols[k]).apply(y);
                y = arr.at(r, next).invert().apply(row);
            }
            prop_assert_eq!(f.apply(x), y);
        }
    }
}
