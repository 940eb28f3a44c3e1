mod common;

use std::collections::BTreeMap;

use qldpc::code::{v_expand, w_expand};
use qldpc::cycles::{
    cycle_determinant, cycle_nullspace, distance_upper_bound, enumerate_length16, CycleError, CycleRecord,
};
use qldpc::linalg::gf_det;
use qldpc::{CssCode, Field, Gf, Side, Which};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Visiting order laid out on the 2 x 6 block grid of the walked array.
fn block_grid(rec: &CycleRecord, p: usize) -> Vec<Vec<usize>> {
    let mut grid = vec![vec![usize::MAX; 6]; 2];
    for (k, &(r, c)) in rec.positions.iter().enumerate() {
        grid[r / p][c / p] = k;
    }
    grid
}

#[test]
fn worked_example_walk_order() {
    let code = common::example_code(8, 1);
    for which in [Which::Gamma, Which::Delta] {
        let rec = code.catalog(which).get(0, 7);
        assert_eq!(
            block_grid(rec, 8),
            vec![vec![0, 4, 8, 1, 9, 5], vec![11, 3, 7, 2, 10, 6]],
            "{which:?}"
        );
    }
}

#[test]
fn worked_example_delta_cycle_positions() {
    let code = common::example_code(8, 1);
    let rec = code.catalog(Which::Delta).get(0, 7);
    let expected = [
        (5, 0),
        (5, 24),
        (9, 24),
        (9, 12),
        (1, 12),
        (1, 40),
        (10, 40),
        (10, 17),
        (4, 17),
        (4, 34),
        (15, 34),
        (15, 0),
    ];
    assert_eq!(rec.positions, expected);
    assert_eq!(rec.columns, vec![0, 24, 12, 40, 17, 34]);
}

#[test]
fn catalog_records_are_weight_two_cycles() {
    let code = common::example_code(8, 1);
    for which in [Which::Gamma, Which::Delta] {
        let cat = code.catalog(which);
        let h = code.matrix(which);
        for (i, rec) in cat.records.iter().enumerate() {
            assert_eq!(rec.len(), 12);
            assert_eq!((rec.columns.len(), rec.rows.len()), (6, 6));
            for (k, &(r, c)) in rec.positions.iter().enumerate() {
                assert_eq!(h.get(r, c), Some(rec.labels[k]));
                let (nr, nc) = rec.positions[(k + 1) % 12];
                assert!(if k % 2 == 0 { nr == r } else { nc == c });
            }
            for &c in &rec.columns {
                assert!(cat.by_column[c].contains(&i));
            }
        }
    }
}

#[test]
fn determinant_matches_dense_elimination() {
    let f = Field::with_default_poly(8).unwrap();
    let code = common::example_code(8, 1);
    let base = code.catalog(Which::Gamma).get(2, 0).clone();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut zeros = 0;
    for t in 0..1000 {
        let mut rec = base.clone();
        for l in rec.labels.iter_mut() {
            *l = rng.gen_range(1..256) as Gf;
        }
        if t % 4 == 0 {
            // Force even and odd products to agree.
            let even = rec.labels.iter().step_by(2).fold(1, |a, &x| f.mul(a, x));
            let odd_rest = rec.labels[1..11].iter().step_by(2).fold(1, |a, &x| f.mul(a, x));
            rec.labels[11] = f.div(even, odd_rest).unwrap();
        }
        let det = cycle_determinant(&f, &rec);
        assert_eq!(det == 0, gf_det(&f, &rec.submatrix()) == 0);
        zeros += (det == 0) as usize;
    }
    assert!(zeros >= 250);
}

/// Null space against an exhaustive scan of GF(8)^6.
#[test]
fn nullspace_matches_exhaustive_scan() {
    let code = common::example_code(3, 1);
    let f = &code.field;
    for rec in code.catalog(Which::Delta).records.iter().step_by(5) {
        let m = rec.submatrix();
        let mut count = 0usize;
        for idx in 0..8usize.pow(6) {
            let x: Vec<Gf> = (0..6).map(|k| (idx >> (3 * k) & 7) as Gf).collect();
            if m.iter()
                .all(|row| row.iter().zip(&x).fold(0, |a, (&h, &v)| a ^ f.mul(h, v)) == 0)
            {
                count += 1;
            }
        }
        let ns = cycle_nullspace(f, rec);
        assert_eq!(count, 8usize.pow(ns.len() as u32));
        assert_eq!(ns.is_empty(), cycle_determinant(f, rec) != 0);
        for v in &ns {
            for row in &m {
                assert_eq!(row.iter().zip(v).fold(0, |a, (&h, &x)| a ^ f.mul(h, x)), 0);
            }
        }
    }
}

fn spread(code: &CssCode, rec: &CycleRecord, v: &[Gf]) -> Vec<Gf> {
    let mut full = vec![0; code.symbols()];
    for (&c, &x) in rec.columns.iter().zip(v) {
        full[c] = x;
    }
    full
}

/// Null codewords of u(0)/u(1) cycles are stabilizers of the opposite type.
fn check_unavoidable_null_codewords(code: &CssCode, stride: usize) {
    let f = &code.field;
    for rec in code
        .catalog(Which::Delta)
        .records
        .iter()
        .filter(|r| r.utcbc_j != Some(2))
        .step_by(stride)
    {
        let ns = cycle_nullspace(f, rec);
        assert_eq!(ns.len(), 1);
        for s in [1, 77] {
            let x: Vec<Gf> = ns[0].iter().map(|&v| f.mul(f.alpha_pow(s), v)).collect();
            assert!(code
                .dual_membership(Side::X, &w_expand(f, &spread(code, rec, &x)))
                .unwrap());
        }
    }
    for rec in code
        .catalog(Which::Gamma)
        .records
        .iter()
        .filter(|r| r.utcbc_j != Some(2))
        .step_by(stride)
    {
        let ns = cycle_nullspace(f, rec);
        assert_eq!(ns.len(), 1);
        assert!(code
            .dual_membership(Side::Z, &v_expand(f, &spread(code, rec, &ns[0])))
            .unwrap());
    }
}

#[test]
fn unavoidable_null_codewords_are_degenerate_small() {
    check_unavoidable_null_codewords(&common::example_code(8, 1), 1);
    check_unavoidable_null_codewords(&common::example_code(3, 2), 1);
}

#[test]
fn unavoidable_null_codewords_are_degenerate_384() {
    check_unavoidable_null_codewords(&common::proposed_384(), 7);
}

#[test]
fn distance_bound_on_proposed_code() {
    let code = common::proposed_384();
    assert_eq!(distance_upper_bound(&code, 12), Err(CycleError::NoDeficientCycles(12)));
    let b = distance_upper_bound(&code, 16).unwrap();
    let d = b.d().unwrap();
    assert!(d >= 12, "{d}");
    // Every contribution comes in q - 1 scalar multiples.
    assert_eq!(b.dist_x.total() % 255, 0);
    assert_eq!(b.dist_z.total() % 255, 0);
    let csv = b.to_csv();
    assert!(csv.starts_with("w,A_X,A_Z\n"));
    assert_eq!(
        csv.lines().count(),
        1 + b
            .dist_x
            .counts
            .keys()
            .chain(b.dist_z.counts.keys())
            .collect::<std::collections::BTreeSet<_>>()
            .len()
    );
}

#[test]
fn length16_records_are_simple_cycles() {
    let code = common::proposed_384();
    let recs = enumerate_length16(&code, Which::Gamma);
    assert!(!recs.is_empty());
    for rec in recs.iter().step_by(50) {
        assert_eq!(rec.len(), 16);
        let mut rows: BTreeMap<usize, usize> = BTreeMap::new();
        let mut cols: BTreeMap<usize, usize> = BTreeMap::new();
        for &(r, c) in &rec.positions {
            *rows.entry(r).or_default() += 1;
            *cols.entry(c).or_default() += 1;
        }
        assert!(rows.values().all(|&k| k == 2) && cols.values().all(|&k| k == 2));
        assert_eq!(rows.len(), 8);
    }
}

#[test]
fn weight_is_bit_popcount() {
    // All-α codeword on a GF(8) cycle: v(α) = 010, w(α) = 001, one bit per symbol.
    let f = Field::with_default_poly(3).unwrap();
    let a = vec![f.alpha_pow(1); 6];
    assert_eq!(v_expand(&f, &a).iter().map(|&b| b as usize).sum::<usize>(), 6);
    let a5 = vec![f.alpha_pow(5); 6];
    assert_eq!(v_expand(&f, &a5).iter().map(|&b| b as usize).sum::<usize>(), 18);
}
