#![allow(dead_code)]

use qldpc::construct::{construct, label, ConstructParams, Design, GeneratorPair, LabelParams};
use qldpc::{CssCode, Field};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generators of the P = 8 worked example.
pub fn example_generators() -> GeneratorPair {
    GeneratorPair::from_coeffs(8, &[(5, 7), (5, 3), (1, 6)], &[(5, 7), (5, 5), (5, 7)]).unwrap()
}

/// The P = 8 example arrays labelled over GF(2^e).
pub fn example_code(e: u32, seed: u64) -> CssCode {
    let field = Field::with_default_poly(e).unwrap();
    let gen = example_generators();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (g, d, _) = label(
        &field,
        &gen,
        &mut rng,
        &LabelParams {
            perturbation_cap: 10_000,
            full_rank: false,
        },
    )
    .unwrap();
    CssCode::from_parts(field, gen, &g, &d, serde_json::Value::Null).unwrap()
}

/// Master seed 11 finds a P = 384 proposed code within a few dozen restarts.
pub const P384_SEED: u64 = 11;

pub fn code_384(design: Design) -> CssCode {
    let field = Field::with_default_poly(8).unwrap();
    let params = ConstructParams {
        design,
        ..ConstructParams::new(384, P384_SEED)
    };
    let c = construct(&field, &params).unwrap();
    CssCode::from_construction(field, &c, serde_json::json!({ "seed": P384_SEED })).unwrap()
}

pub fn proposed_384() -> CssCode {
    code_384(Design::Proposed)
}

pub fn conventional_384() -> CssCode {
    code_384(Design::Conventional)
}

/// Columns `i = 0..6` of the GF(8) table under `1 + x + x^3`:
/// `(v(α^i), A^i rows, w(α^i), (A^T)^i rows)`, bits written left to right from index 0.
pub const GF8_TABLE: [(&str, [&str; 3], &str, [&str; 3]); 7] = [
    ("100", ["100", "010", "001"], "100", ["100", "010", "001"]),
    ("010", ["001", "101", "010"], "001", ["010", "001", "110"]),
    ("001", ["010", "011", "101"], "010", ["001", "110", "011"]),
    ("110", ["101", "111", "011"], "101", ["110", "011", "111"]),
    ("011", ["011", "110", "111"], "011", ["011", "111", "101"]),
    ("111", ["111", "100", "110"], "111", ["111", "101", "100"]),
    ("101", ["110", "001", "100"], "110", ["101", "100", "010"]),
];

/// `v` vectors listed for GF(256) under `x^8 + x^4 + x^3 + x^2 + 1`:
/// `(exponent or None for zero, bits)`.
pub const GF256_V: [(Option<u32>, &str); 5] = [
    (None, "00000000"),
    (Some(0), "10000000"),
    (Some(1), "01000000"),
    (Some(7), "00000001"),
    (Some(8), "10110000"),
];

pub fn bit_string(x: u32, e: u32) -> String {
    (0..e).map(|i| if x >> i & 1 == 1 { '1' } else { '0' }).collect()
}

pub fn rows_of(c: &qldpc::galois::Companion) -> Vec<String> {
    (0..c.dim() as usize).map(|i| c.row_string(i)).collect()
}
