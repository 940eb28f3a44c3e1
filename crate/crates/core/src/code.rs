//! The assembled CSS code: labelled parity-check matrices over GF(q), their
//! binary images, dimension, and row-space membership for degeneracy checks.

use std::collections::HashMap;
use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::affine::PermArray;
use crate::construct::{build_arrays, extended_arrays, ConstructError, Construction, GeneratorPair};
use crate::cycles::Catalog;
use crate::galois::{poly_from_lsb_string, poly_to_lsb_string, Field, FieldError, Gf};
use crate::linalg::GfEchelon;

#[derive(Debug, Error)]
pub enum CodeError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("malformed code file: {0}")]
    Format(String),
    #[error("code invariant violated: {0}")]
    InvariantViolation(String),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Construct(#[from] ConstructError),
}

/// The two labelled matrices: `H_Γ` (support of `Ĥ_X`) and `H_Δ` (support of `Ĥ_Z`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Which {
    Gamma,
    Delta,
}

/// Binary sides: X stabilizers (`H_X`, image of `H_Γ`) and Z stabilizers (`H_Z`, image of `H_Δ`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    X,
    Z,
}

/// Sparse GF(q) matrix with `J·P` rows of weight `L` and `L·P` columns of weight `J`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NbMatrix {
    pub m: usize,
    pub n: usize,
    pub p: usize,
    pub j: usize,
    pub l: usize,
    rows: Vec<Vec<(usize, Gf)>>,
    cols: Vec<Vec<(usize, Gf)>>,
}

impl NbMatrix {
    /// Labels `alpha^exps[b*N + c]` on the support of row blocks 0 and 1 of `support`.
    pub fn from_exponents(field: &Field, support: &PermArray, exps: &[u32]) -> Self {
        let p = support.block_size() as usize;
        let l = support.col_blocks();
        let n = l * p;
        let j = 2;
        let mut rows = vec![Vec::with_capacity(l); j * p];
        let mut cols = vec![Vec::with_capacity(j); n];
        for c in 0..n {
            for b in 0..j {
                let r = support.column_row(b, c);
                let v = field.alpha_pow(exps[b * n + c]);
                rows[r].push((c, v));
                cols[c].push((r, v));
            }
        }
        NbMatrix {
            m: j * p,
            n,
            p,
            j,
            l,
            rows,
            cols,
        }
    }

    pub fn row(&self, i: usize) -> &[(usize, Gf)] {
        &self.rows[i]
    }

    pub fn col(&self, c: usize) -> &[(usize, Gf)] {
        &self.cols[c]
    }

    pub fn rows(&self) -> &[Vec<(usize, Gf)>] {
        &self.rows
    }

    pub fn get(&self, i: usize, c: usize) -> Option<Gf> {
        self.rows[i].iter().find(|&&(cc, _)| cc == c).map(|&(_, v)| v)
    }

    pub fn mul_vec(&self, field: &Field, x: &[Gf]) -> Vec<Gf> {
        self.rows
            .iter()
            .map(|row| row.iter().fold(0, |acc, &(c, v)| acc ^ field.mul(v, x[c])))
            .collect()
    }

    pub fn dense(&self) -> Vec<Vec<Gf>> {
        let mut d = vec![vec![0; self.n]; self.m];
        for (i, row) in self.rows.iter().enumerate() {
            for &(c, v) in row {
                d[i][c] = v;
            }
        }
        d
    }

    /// Exponent of the label at (row block `b`, column `c`), laid out as `b*N + c`.
    pub fn exponents(&self, field: &Field) -> Vec<u32> {
        let mut out = vec![0u32; 2 * self.n];
        for (c, col) in self.cols.iter().enumerate() {
            for &(r, v) in col {
                out[(r / self.p) * self.n + c] = field.log(v).expect("labels are nonzero");
            }
        }
        out
    }

    fn echelon(&self, field: &Field) -> GfEchelon {
        let mut e = GfEchelon::new(self.n);
        for row in &self.rows {
            let mut v = vec![0 as Gf; self.n];
            for &(c, x) in row {
                v[c] = x;
            }
            e.insert(field, v);
        }
        e
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OrthogonalityReport {
    pub ok: bool,
    /// First failing `(gamma_row, delta_row)` pair.
    pub first_violation: Option<(usize, usize)>,
    pub violations: usize,
    pub binary_rows_checked: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Dimension {
    pub n: usize,
    pub k: usize,
    pub rank_x: usize,
    pub rank_z: usize,
}

#[derive(Debug)]
pub struct CssCode {
    pub field: Field,
    pub gen: GeneratorPair,
    pub hx: PermArray,
    pub hz: PermArray,
    pub hx_ext: PermArray,
    pub hz_ext: PermArray,
    pub hgamma: NbMatrix,
    pub hdelta: NbMatrix,
    pub seed_info: serde_json::Value,
    echelon_gamma: OnceLock<GfEchelon>,
    echelon_delta: OnceLock<GfEchelon>,
    catalog_gamma: OnceLock<Catalog>,
    catalog_delta: OnceLock<Catalog>,
}

impl CssCode {
    /// Assembles the code from generators and label exponents.
    pub fn from_parts(
        field: Field,
        gen: GeneratorPair,
        gamma: &[u32],
        delta: &[u32],
        seed_info: serde_json::Value,
    ) -> Result<Self, CodeError> {
        let (hx, hz) = build_arrays(&gen)?;
        let n = gen.l * gen.p as usize;
        for (name, v) in [("gamma", gamma), ("delta", delta)] {
            if v.len() != 2 * n {
                return Err(CodeError::DimensionMismatch {
                    expected: 2 * n,
                    got: v.len(),
                });
            }
            if let Some(x) = v.iter().find(|&&x| x >= field.order()) {
                return Err(CodeError::InvariantViolation(format!(
                    "{name} exponent {x} out of range"
                )));
            }
        }
        let (hx_ext, hz_ext) = extended_arrays(&gen);
        let hgamma = NbMatrix::from_exponents(&field, &hx, gamma);
        let hdelta = NbMatrix::from_exponents(&field, &hz, delta);
        Ok(CssCode {
            field,
            gen,
            hx,
            hz,
            hx_ext,
            hz_ext,
            hgamma,
            hdelta,
            seed_info,
            echelon_gamma: OnceLock::new(),
            echelon_delta: OnceLock::new(),
            catalog_gamma: OnceLock::new(),
            catalog_delta: OnceLock::new(),
        })
    }

    pub fn from_construction(field: Field, c: &Construction, seed_info: serde_json::Value) -> Result<Self, CodeError> {
        Self::from_parts(field, c.gen.clone(), &c.gamma, &c.delta, seed_info)
    }

    pub fn e(&self) -> usize {
        self.field.e() as usize
    }

    /// Number of GF(q) symbols `N = L·P`.
    pub fn symbols(&self) -> usize {
        self.hgamma.n
    }

    /// Number of GF(q) checks per matrix `M = J·P`.
    pub fn checks(&self) -> usize {
        self.hgamma.m
    }

    /// Binary block length `n = e·N`.
    pub fn n(&self) -> usize {
        self.e() * self.symbols()
    }

    /// Binary check count per side `m = e·M`.
    pub fn m(&self) -> usize {
        self.e() * self.checks()
    }

    pub fn matrix(&self, which: Which) -> &NbMatrix {
        match which {
            Which::Gamma => &self.hgamma,
            Which::Delta => &self.hdelta,
        }
    }

    /// `H_X x` (Gamma) or `H_Z x` (Delta) through per-block field products:
    /// `A(γ) v(y) = v(γ y)` and `A(δ)ᵀ w(y) = w(δ y)`.
    pub fn expand_binary_row_action(&self, which: Which, x: &[u8]) -> Result<Vec<u8>, CodeError> {
        if x.len() != self.n() {
            return Err(CodeError::DimensionMismatch {
                expected: self.n(),
                got: x.len(),
            });
        }
        let e = self.e();
        let f = &self.field;
        let segs: Vec<u32> = x.chunks(e).map(bits_to_word).collect();
        let mut out = Vec::with_capacity(self.m());
        for row in self.matrix(which).rows() {
            let mut acc = 0u32;
            for &(c, v) in row {
                acc ^= match which {
                    Which::Gamma => f.v(f.mul(v, f.from_v(segs[c]))),
                    Which::Delta => f.w(f.mul(v, f.from_w(segs[c]))),
                };
            }
            out.extend(word_to_bits(acc, e));
        }
        Ok(out)
    }

    /// Binary row `t` of symbol row `i` of `H_X` (Gamma) or `H_Z` (Delta).
    pub fn binary_row(&self, which: Which, i: usize, t: usize) -> Vec<u8> {
        let e = self.e();
        let mut out = vec![0u8; self.n()];
        for &(c, v) in self.matrix(which).row(i) {
            let a = match which {
                Which::Gamma => self.field.companion(v),
                Which::Delta => self.field.companion_transpose(v),
            };
            let word = a.rows()[t];
            for k in 0..e {
                out[c * e + k] = (word >> k & 1) as u8;
            }
        }
        out
    }

    /// Dense binary matrix; only sensible for small codes.
    pub fn dense_binary(&self, which: Which) -> Vec<Vec<u8>> {
        let e = self.e();
        (0..self.checks())
            .flat_map(|i| (0..e).map(move |t| (i, t)))
            .map(|(i, t)| self.binary_row(which, i, t))
            .collect()
    }

    /// Checks `H_Γ H_Δᵀ = O` over GF(q) row pair by row pair, and `H_X H_Zᵀ = O`
    /// on `binary_samples` random rows of `H_Z`.
    pub fn verify_orthogonality(&self, binary_samples: usize, seed: u64) -> OrthogonalityReport {
        let f = &self.field;
        let mut first = None;
        let mut violations = 0;
        for (i, row) in self.hgamma.rows().iter().enumerate() {
            let mut acc: HashMap<usize, Gf> = HashMap::new();
            for &(c, g) in row {
                for &(j, d) in self.hdelta.col(c) {
                    *acc.entry(j).or_insert(0) ^= f.mul(g, d);
                }
            }
            let mut bad: Vec<usize> = acc.into_iter().filter(|&(_, v)| v != 0).map(|(j, _)| j).collect();
            bad.sort_unstable();
            if let Some(&j) = bad.first() {
                first.get_or_insert((i, j));
                violations += bad.len();
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut checked = 0;
        for _ in 0..binary_samples {
            let i = rng.gen_range(0..self.checks());
            let t = rng.gen_range(0..self.e());
            let y = self.binary_row(Which::Delta, i, t);
            let s = self.expand_binary_row_action(Which::Gamma, &y).expect("length n");
            checked += 1;
            if s.iter().any(|&b| b != 0) && first.is_none() {
                first = Some((usize::MAX, i));
                violations += 1;
            }
        }
        OrthogonalityReport {
            ok: violations == 0,
            first_violation: first,
            violations,
            binary_rows_checked: checked,
        }
    }

    pub fn echelon(&self, which: Which) -> &GfEchelon {
        match which {
            Which::Gamma => self.echelon_gamma.get_or_init(|| self.hgamma.echelon(&self.field)),
            Which::Delta => self.echelon_delta.get_or_init(|| self.hdelta.echelon(&self.field)),
        }
    }

    /// `k = n - rank H_X - rank H_Z`, with binary ranks `e · rank_q`.
    pub fn compute_dimension(&self) -> Dimension {
        let e = self.e();
        let rank_x = e * self.echelon(Which::Gamma).rank();
        let rank_z = e * self.echelon(Which::Delta).rank();
        Dimension {
            n: self.n(),
            k: self.n() - rank_x - rank_z,
            rank_x,
            rank_z,
        }
    }

    /// Whether `bits` lies in `rowspace(H_X)` (side X) or `rowspace(H_Z)` (side Z).
    /// `rowspace(H_X) = w(rowspace H_Γ)` and `rowspace(H_Z) = v(rowspace H_Δ)`,
    /// so the test runs over GF(q).
    pub fn dual_membership(&self, side: Side, bits: &[u8]) -> Result<bool, CodeError> {
        if bits.len() != self.n() {
            return Err(CodeError::DimensionMismatch {
                expected: self.n(),
                got: bits.len(),
            });
        }
        let f = &self.field;
        let syms: Vec<Gf> = bits
            .chunks(self.e())
            .map(|s| match side {
                Side::X => f.from_w(bits_to_word(s)),
                Side::Z => f.from_v(bits_to_word(s)),
            })
            .collect();
        Ok(self.symbol_dual_membership(side, &syms))
    }

    /// Membership of a GF(q) vector in `rowspace(H_Γ)` (side X) or `rowspace(H_Δ)` (side Z).
    pub fn symbol_dual_membership(&self, side: Side, syms: &[Gf]) -> bool {
        if syms.iter().all(|&s| s == 0) {
            return true;
        }
        let which = match side {
            Side::X => Which::Gamma,
            Side::Z => Which::Delta,
        };
        self.echelon(which).contains(&self.field, syms)
    }

    pub fn catalog(&self, which: Which) -> &Catalog {
        match which {
            Which::Gamma => self.catalog_gamma.get_or_init(|| Catalog::build(self, Which::Gamma)),
            Which::Delta => self.catalog_delta.get_or_init(|| Catalog::build(self, Which::Delta)),
        }
    }

    pub fn to_file(&self) -> CodeFile {
        let row_pairs = |m: &NbMatrix| -> Vec<Vec<(usize, u32)>> {
            m.rows()
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|&(c, v)| (c, self.field.log(v).expect("nonzero")))
                        .collect()
                })
                .collect()
        };
        CodeFile {
            version: 1,
            e: self.field.e(),
            prim_poly: poly_to_lsb_string(self.field.poly()),
            p: self.gen.p,
            j: 2,
            l: self.gen.l,
            f: self.gen.f.iter().map(|x| (x.a(), x.b())).collect(),
            g: self.gen.g.iter().map(|x| (x.a(), x.b())).collect(),
            gamma_rows: row_pairs(&self.hgamma),
            delta_rows: row_pairs(&self.hdelta),
            seed_info: self.seed_info.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_file()).expect("plain data serializes")
    }

    /// Parses and re-verifies a code file.
    pub fn from_json(s: &str) -> Result<Self, CodeError> {
        let file: CodeFile = serde_json::from_str(s).map_err(|e| CodeError::Format(e.to_string()))?;
        Self::from_file(file)
    }

    pub fn from_file(file: CodeFile) -> Result<Self, CodeError> {
        if file.version != 1 {
            return Err(CodeError::Format(format!("unsupported version {}", file.version)));
        }
        if file.j != 2 {
            return Err(CodeError::Format(format!("J = {} unsupported", file.j)));
        }
        let poly = poly_from_lsb_string(&file.prim_poly).ok_or_else(|| CodeError::Format("bad prim_poly".into()))?;
        let field = Field::new(file.e, poly)?;
        let gen = GeneratorPair::from_coeffs(file.p, &file.f, &file.g)?;
        if gen.l != file.l {
            return Err(CodeError::Format(format!("L = {} but {} generators", file.l, gen.l)));
        }
        let (hx, hz) = build_arrays(&gen)?;
        let gamma = exponents_from_rows(&hx, &file.gamma_rows, field.order(), "gamma")?;
        let delta = exponents_from_rows(&hz, &file.delta_rows, field.order(), "delta")?;
        let code = Self::from_parts(field, gen, &gamma, &delta, file.seed_info)?;
        let rep = code.verify_orthogonality(0, 0);
        if !rep.ok {
            let (i, j) = rep.first_violation.expect("failure has a witness");
            return Err(CodeError::InvariantViolation(format!(
                "gamma row {i} and delta row {j} are not orthogonal"
            )));
        }
        Ok(code)
    }
}

fn exponents_from_rows(
    support: &PermArray,
    rows: &[Vec<(usize, u32)>],
    order: u32,
    name: &str,
) -> Result<Vec<u32>, CodeError> {
    let p = support.block_size() as usize;
    let n = support.col_blocks() * p;
    if rows.len() != 2 * p {
        return Err(CodeError::Format(format!(
            "{name}_rows has {} rows, expected {}",
            rows.len(),
            2 * p
        )));
    }
    let mut exps = vec![u32::MAX; 2 * n];
    for (i, row) in rows.iter().enumerate() {
        let b = i / p;
        let mut want = support.row_support(b, (i % p) as u64);
        let mut got: Vec<usize> = row.iter().map(|&(c, _)| c).collect();
        want.sort_unstable();
        got.sort_unstable();
        if want != got {
            return Err(CodeError::InvariantViolation(format!(
                "{name} row {i} support differs from the generator arrays"
            )));
        }
        for &(c, x) in row {
            if x >= order {
                return Err(CodeError::InvariantViolation(format!(
                    "{name} row {i} exponent {x} out of range"
                )));
            }
            exps[b * n + c] = x;
        }
    }
    Ok(exps)
}

/// On-disk code description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodeFile {
    pub version: u32,
    pub e: u32,
    pub prim_poly: String,
    #[serde(rename = "P")]
    pub p: u64,
    #[serde(rename = "J")]
    pub j: usize,
    #[serde(rename = "L")]
    pub l: usize,
    pub f: Vec<(u64, u64)>,
    pub g: Vec<(u64, u64)>,
    pub gamma_rows: Vec<Vec<(usize, u32)>>,
    pub delta_rows: Vec<Vec<(usize, u32)>>,
    #[serde(default)]
    pub seed_info: serde_json::Value,
}

/// Bit `k` of the result is `bits[k]`.
pub fn bits_to_word(bits: &[u8]) -> u32 {
    bits.iter()
        .enumerate()
        .fold(0, |acc, (k, &b)| acc | ((b as u32 & 1) << k))
}

pub fn word_to_bits(w: u32, e: usize) -> impl Iterator<Item = u8> {
    (0..e).map(move |k| (w >> k & 1) as u8)
}

/// `v`-expansion of a symbol vector (X-side convention for codewords of `C_Γ`).
pub fn v_expand(field: &Field, x: &[Gf]) -> Vec<u8> {
    x.iter()
        .flat_map(|&s| word_to_bits(field.v(s), field.e() as usize))
        .collect()
}

/// `w`-expansion of a symbol vector.
pub fn w_expand(field: &Field, x: &[Gf]) -> Vec<u8> {
    x.iter()
        .flat_map(|&s| word_to_bits(field.w(s), field.e() as usize))
        .collect()
}
