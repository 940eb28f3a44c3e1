mod common;

use proptest::prelude::*;
use qldpc::code::{v_expand, w_expand, CodeError, CodeFile};
use qldpc::linalg::{gf_rank, pack_bits, BitEchelon};
use qldpc::{CssCode, Field, Gf, Side, Which};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn dense_mul(rows: &[Vec<u8>], x: &[u8]) -> Vec<u8> {
    rows.iter()
        .map(|r| r.iter().zip(x).fold(0, |acc, (&a, &b)| acc ^ (a & b)))
        .collect()
}

fn random_symbols(rng: &mut ChaCha8Rng, q: usize, n: usize) -> Vec<Gf> {
    (0..n).map(|_| rng.gen_range(0..q) as Gf).collect()
}

#[test]
fn binary_syndromes_match_symbol_syndromes() {
    let code = common::example_code(3, 1);
    let f = &code.field;
    let hx = code.dense_binary(Which::Gamma);
    let hz = code.dense_binary(Which::Delta);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..100 {
        let xi = random_symbols(&mut rng, f.q(), code.symbols());
        let zeta = random_symbols(&mut rng, f.q(), code.symbols());
        let sigma = code.hdelta.mul_vec(f, &xi);
        let tau = code.hgamma.mul_vec(f, &zeta);
        let (wx, vz) = (w_expand(f, &xi), v_expand(f, &zeta));
        assert_eq!(dense_mul(&hz, &wx), w_expand(f, &sigma));
        assert_eq!(dense_mul(&hx, &vz), v_expand(f, &tau));
        assert_eq!(
            code.expand_binary_row_action(Which::Delta, &wx).unwrap(),
            w_expand(f, &sigma)
        );
        assert_eq!(
            code.expand_binary_row_action(Which::Gamma, &vz).unwrap(),
            v_expand(f, &tau)
        );
    }
}

#[test]
fn dense_binary_matrices_are_orthogonal() {
    for e in [3, 8] {
        let code = common::example_code(e, 1);
        let hx = code.dense_binary(Which::Gamma);
        let hz = code.dense_binary(Which::Delta);
        for x in &hx {
            assert!(dense_mul(&hz, x).iter().all(|&b| b == 0));
        }
    }
}

#[test]
fn listed_inner_product_cancels() {
    let f = Field::with_default_poly(8).unwrap();
    let a = |i| f.alpha_pow(i);
    assert_eq!(f.mul(a(200), a(62)), a(262 % 255));
    assert_eq!(f.mul(a(200), a(62)) ^ f.mul(a(238), a(24)), 0);
}

#[test]
fn binary_rank_is_e_times_symbol_rank() {
    for e in [3, 8] {
        let code = common::example_code(e, 1);
        for which in [Which::Gamma, Which::Delta] {
            let mut ech = BitEchelon::new(code.n());
            for row in code.dense_binary(which) {
                ech.insert(pack_bits(&row));
            }
            let dense = code.matrix(which).dense();
            assert_eq!(ech.rank(), e as usize * gf_rank(&code.field, &dense, code.symbols()));
        }
        let dim = code.compute_dimension();
        assert_eq!(dim.rank_x + dim.rank_z + dim.k, dim.n);
    }
}

/// Membership through GF(q) elimination agrees with dense GF(2) elimination.
#[test]
fn dual_membership_agrees_with_binary_elimination() {
    let code = common::example_code(3, 1);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for (side, which) in [(Side::X, Which::Gamma), (Side::Z, Which::Delta)] {
        let rows = code.dense_binary(which);
        let mut ech = BitEchelon::new(code.n());
        for r in &rows {
            ech.insert(pack_bits(r));
        }
        let (mut members, mut others) = (0, 0);
        for trial in 0..400 {
            let mut x = vec![0u8; code.n()];
            for r in &rows {
                if rng.gen_bool(0.5) {
                    x.iter_mut().zip(r).for_each(|(a, b)| *a ^= b);
                }
            }
            if trial % 2 == 1 {
                let k = rng.gen_range(0..x.len());
                x[k] ^= 1;
            }
            let expected = ech.contains(&pack_bits(&x));
            assert_eq!(code.dual_membership(side, &x).unwrap(), expected);
            if expected {
                members += 1;
            } else {
                others += 1;
            }
        }
        assert!(members > 0 && others > 0);
    }
    assert!(matches!(
        code.dual_membership(Side::X, &[0, 1]),
        Err(CodeError::DimensionMismatch { .. })
    ));
}

#[test]
fn code_file_round_trip() {
    let code = common::example_code(8, 1);
    let text = code.to_json();
    let back = CssCode::from_json(&text).unwrap();
    assert_eq!(back.to_file(), code.to_file());
    assert_eq!(back.hgamma, code.hgamma);
    assert_eq!(back.hdelta, code.hdelta);
}

#[test]
fn truncated_file_is_a_format_error() {
    let text = common::example_code(8, 1).to_json();
    let cut = &text[..text.len() / 2];
    assert!(matches!(CssCode::from_json(cut), Err(CodeError::Format(_))));
}

#[test]
fn edited_exponent_breaks_orthogonality() {
    let mut file: CodeFile = common::example_code(8, 1).to_file();
    let entry = &mut file.gamma_rows[3][1];
    entry.1 = (entry.1 + 1) % 255;
    assert!(matches!(
        CssCode::from_file(file),
        Err(CodeError::InvariantViolation(_))
    ));
}

#[test]
fn malformed_headers_are_rejected() {
    let good = common::example_code(8, 1).to_file();
    let mut f = good.clone();
    f.version = 2;
    assert!(matches!(CssCode::from_file(f), Err(CodeError::Format(_))));
    let mut f = good.clone();
    f.gamma_rows[0][0].0 += 1;
    assert!(matches!(CssCode::from_file(f), Err(CodeError::InvariantViolation(_))));
    let mut f = good;
    f.delta_rows.pop();
    assert!(matches!(CssCode::from_file(f), Err(CodeError::Format(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    /// Rows of H_Γ expand into rows of H_X: every GF(q) combination of H_Γ rows
    /// maps under w into rowspace(H_X), and of H_Δ under v into rowspace(H_Z).
    #[test]
    fn symbol_rowspace_maps_into_binary_rowspace(seed in any::<u64>()) {
        let code = common::example_code(3, 1);
        let f = &code.field;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for (side, which, expand) in [(Side::X, Which::Gamma, w_expand as fn(&Field, &[Gf]) -> Vec<u8>), (Side::Z, Which::Delta, v_expand)] {
            let h = code.matrix(which);
            let mut acc = vec![0 as Gf; code.symbols()];
            for row in h.rows() {
                let c = rng.gen_range(0..8) as Gf;
                for &(j, v) in row {
                    acc[j] ^= f.mul(c, v);
                }
            }
            prop_assert!(code.dual_membership(side, &expand(f, &acc)).unwrap());
        }
    }
}
