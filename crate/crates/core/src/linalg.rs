//! Small dense linear-algebra kernels: GF(2^e), GF(2) bit-packed, and Z_m with
//! unit pivots only.

use crate::affine::{gcd, inv_mod};
use crate::galois::{Field, Gf};

/// Reduces `rows` to reduced row-echelon form in place; returns pivot columns
/// (one per nonzero row, in row order). Zero rows are moved to the bottom.
pub fn gf_rref(field: &Field, rows: &mut [Vec<Gf>], ncols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == rows.len() {
            break;
        }
        let Some(sel) = (r..rows.len()).find(|&i| rows[i][c] != 0) else {
            continue;
        };
        rows.swap(r, sel);
        let inv = field.recip(rows[r][c]);
        for x in rows[r].iter_mut() {
            *x = field.mul(*x, inv);
        }
        let (head, tail) = rows.split_at_mut(r);
        let (piv, rest) = tail.split_first_mut().expect("row r exists");
        for other in head.iter_mut().chain(rest.iter_mut()) {
            let f = other[c];
            if f != 0 {
                for (o, p) in other.iter_mut().zip(piv.iter()) {
                    *o ^= field.mul(f, *p);
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn gf_rank(field: &Field, rows: &[Vec<Gf>], ncols: usize) -> usize {
    let mut m = rows.to_vec();
    gf_rref(field, &mut m, ncols).len()
}

/// Basis of the right null space `{x : A x = 0}`.
pub fn gf_nullspace(field: &Field, rows: &[Vec<Gf>], ncols: usize) -> Vec<Vec<Gf>> {
    let mut m = rows.to_vec();
    let pivots = gf_rref(field, &mut m, ncols);
    let mut is_pivot = vec![false; ncols];
    for &p in &pivots {
        is_pivot[p] = true;
    }
    (0..ncols)
        .filter(|&c| !is_pivot[c])
        .map(|free| {
            let mut x = vec![0 as Gf; ncols];
            x[free] = 1;
            for (i, &p) in pivots.iter().enumerate() {
                // Characteristic 2: x_p = -a_{i,free} = a_{i,free}.
                x[p] = m[i][free];
            }
            x
        })
        .collect()
}

/// Solves `A x = b`; free variables take the values in `hint`. `None` if inconsistent.
pub fn gf_solve(field: &Field, rows: &[Vec<Gf>], b: &[Gf], hint: &[Gf]) -> Option<Vec<Gf>> {
    let ncols = hint.len();
    let mut aug: Vec<Vec<Gf>> = rows
        .iter()
        .zip(b)
        .map(|(r, &bi)| {
            let mut v = r.clone();
            v.push(bi);
            v
        })
        .collect();
    let pivots = gf_rref(field, &mut aug, ncols);
    if aug.iter().skip(pivots.len()).any(|r| r[ncols] != 0) {
        return None;
    }
    let mut x = hint.to_vec();
    for &p in &pivots {
        x[p] = 0;
    }
    for (i, &p) in pivots.iter().enumerate() {
        let mut acc = aug[i][ncols];
        for (c, &xc) in x.iter().enumerate() {
            if c != p && xc != 0 {
                acc ^= field.mul(aug[i][c], xc);
            }
        }
        x[p] = acc;
    }
    Some(x)
}

/// Determinant of a square matrix (signs vanish in characteristic 2).
pub fn gf_det(field: &Field, rows: &[Vec<Gf>]) -> Gf {
    let n = rows.len();
    let mut m = rows.to_vec();
    let mut det: Gf = 1;
    for c in 0..n {
        let Some(sel) = (c..n).find(|&i| m[i][c] != 0) else {
            return 0;
        };
        m.swap(c, sel);
        let pivot = m[c][c];
        det = field.mul(det, pivot);
        let inv = field.recip(pivot);
        for i in c + 1..n {
            let f = field.mul(m[i][c], inv);
            if f != 0 {
                for k in c..n {
                    let t = field.mul(f, m[c][k]);
                    m[i][k] ^= t;
                }
            }
        }
    }
    det
}

/// Incrementally built row-echelon basis over GF(2^e) with dense rows.
#[derive(Debug, Clone)]
pub struct GfEchelon {
    ncols: usize,
    rows: Vec<Vec<Gf>>,
    pivots: Vec<usize>,
}

impl GfEchelon {
    pub fn new(ncols: usize) -> Self {
        GfEchelon {
            ncols,
            rows: Vec::new(),
            pivots: Vec::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    fn reduce(&self, field: &Field, v: &mut [Gf]) {
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            let f = v[p];
            if f != 0 {
                // Stored rows are normalized so row[p] == 1.
                let lf = field.log(f).expect("nonzero");
                for (x, &r) in v.iter_mut().zip(row) {
                    if r != 0 {
                        *x ^= field.alpha_pow(lf + field.log(r).expect("nonzero"));
                    }
                }
            }
        }
    }

    /// Adds `v` to the span; returns whether the rank grew.
    pub fn insert(&mut self, field: &Field, mut v: Vec<Gf>) -> bool {
        debug_assert_eq!(v.len(), self.ncols);
        self.reduce(field, &mut v);
        let Some(p) = v.iter().position(|&x| x != 0) else {
            return false;
        };
        let inv = field.recip(v[p]);
        for x in v.iter_mut() {
            *x = field.mul(*x, inv);
        }
        self.rows.push(v);
        self.pivots.push(p);
        true
    }

    pub fn contains(&self, field: &Field, v: &[Gf]) -> bool {
        let mut v = v.to_vec();
        self.reduce(field, &mut v);
        v.iter().all(|&x| x == 0)
    }
}

/// Incrementally built row-echelon basis over GF(2), 64 columns per word.
#[derive(Debug, Clone)]
pub struct BitEchelon {
    words: usize,
    rows: Vec<Vec<u64>>,
    pivots: Vec<usize>,
}

impl BitEchelon {
    pub fn new(ncols: usize) -> Self {
        BitEchelon {
            words: ncols.div_ceil(64),
            rows: Vec::new(),
            pivots: Vec::new(),
        }
    }

    pub fn words(&self) -> usize {
        self.words
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    fn reduce(&self, v: &mut [u64]) {
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            if v[p / 64] >> (p % 64) & 1 == 1 {
                let start = p / 64;
                for (x, r) in v[start..].iter_mut().zip(&row[start..]) {
                    *x ^= r;
                }
            }
        }
    }

    pub fn insert(&mut self, mut v: Vec<u64>) -> bool {
        debug_assert_eq!(v.len(), self.words);
        self.reduce(&mut v);
        let Some(w) = v.iter().position(|&x| x != 0) else {
            return false;
        };
        let p = w * 64 + v[w].trailing_zeros() as usize;
        // Rows only carry bits at or after their pivot, so reduction can skip the prefix.
        self.rows.push(v);
        self.pivots.push(p);
        true
    }

    pub fn contains(&self, v: &[u64]) -> bool {
        let mut v = v.to_vec();
        self.reduce(&mut v);
        v.iter().all(|&x| x == 0)
    }
}

/// Packs a 0/1 slice into words.
pub fn pack_bits(bits: &[u8]) -> Vec<u64> {
    let mut out = vec![0u64; bits.len().div_ceil(64)];
    for (i, &b) in bits.iter().enumerate() {
        if b & 1 == 1 {
            out[i / 64] |= 1 << (i % 64);
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NoUnitPivot {
    pub row: usize,
}

/// Reduced row-echelon form over Z_m pivoting only on units. Returns the
/// pivot columns, or the offending row if a nonzero row has no unit entry.
/// Entries are kept in `0..m`.
pub fn zm_rref(rows: &mut Vec<Vec<u32>>, ncols: usize, m: u32) -> Result<Vec<usize>, NoUnitPivot> {
    let m64 = m as u64;
    let mut pivots: Vec<usize> = Vec::new();
    let mut done: Vec<Vec<u32>> = Vec::new();
    for (ri, mut row) in std::mem::take(rows).into_iter().enumerate() {
        // Clear existing pivot columns from the incoming row.
        for (prow, &pc) in done.iter().zip(&pivots) {
            let f = row[pc];
            if f != 0 {
                let neg = m - f;
                for (x, &y) in row.iter_mut().zip(prow) {
                    if y != 0 {
                        *x = ((*x as u64 + neg as u64 * y as u64) % m64) as u32;
                    }
                }
            }
        }
        if row.iter().all(|&x| x == 0) {
            continue;
        }
        let Some(pc) = (0..ncols).find(|&c| row[c] != 0 && gcd(row[c] as u64, m64) == 1) else {
            return Err(NoUnitPivot { row: ri });
        };
        let inv = inv_mod(row[pc] as u64, m64).expect("unit");
        for x in row.iter_mut() {
            *x = ((*x as u64 * inv) % m64) as u32;
        }
        for prow in done.iter_mut() {
            let f = prow[pc];
            if f != 0 {
                let neg = m - f;
                for (x, &y) in prow.iter_mut().zip(&row) {
                    if y != 0 {
                        *x = ((*x as u64 + neg as u64 * y as u64) % m64) as u32;
                    }
                }
            }
        }
        done.push(row);
        pivots.push(pc);
    }
    *rows = done;
    Ok(pivots)
}
