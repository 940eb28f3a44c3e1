//! Affine permutations `x -> a x + b (mod P)`, permutation arrays built from
//! them, and block cycles through those arrays (column weight two only).

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AffineError {
    #[error("modulus must be at least 1")]
    ZeroModulus,
    #[error("multiplier {a} is not a unit mod {p}")]
    NotInvertible { a: u64, p: u64 },
    #[error("modulus mismatch: {0} vs {1}")]
    ModulusMismatch(u64, u64),
    #[error("invalid block cycle: {0}")]
    InvalidCycle(String),
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

#[inline]
fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

/// Inverse of `a` modulo `p`, if it exists.
pub fn inv_mod(a: u64, p: u64) -> Option<u64> {
    let (mut r0, mut r1) = (p as i128, (a % p) as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 != 1 {
        return if p == 1 { Some(0) } else { None };
    }
    Some(t0.rem_euclid(p as i128) as u64)
}

/// The permutation `x -> a x + b (mod p)` with `gcd(a, p) = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AffinePerm {
    a: u64,
    b: u64,
    p: u64,
}

impl AffinePerm {
    pub fn new(a: u64, b: u64, p: u64) -> Result<Self, AffineError> {
        if p == 0 {
            return Err(AffineError::ZeroModulus);
        }
        let (a, b) = (a % p, b % p);
        if gcd(a, p) != 1 && p != 1 {
            return Err(AffineError::NotInvertible { a, p });
        }
        Ok(AffinePerm { a, b, p })
    }

    pub fn identity(p: u64) -> Self {
        AffinePerm { a: 1 % p, b: 0, p }
    }

    pub fn a(&self) -> u64 {
        self.a
    }

    pub fn b(&self) -> u64 {
        self.b
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    #[inline]
    pub fn apply(&self, x: u64) -> u64 {
        (mul_mod(self.a, x, self.p) + self.b) % self.p
    }

    fn check(&self, other: &AffinePerm) -> Result<(), AffineError> {
        if self.p != other.p {
            return Err(AffineError::ModulusMismatch(self.p, other.p));
        }
        Ok(())
    }

    /// `self ∘ g`, i.e. `x -> self(g(x))`.
    pub fn compose(&self, g: &AffinePerm) -> Result<AffinePerm, AffineError> {
        self.check(g)?;
        Ok(self.then_after(g))
    }

    #[inline]
    fn then_after(&self, g: &AffinePerm) -> AffinePerm {
        let p = self.p;
        AffinePerm {
            a: mul_mod(self.a, g.a, p),
            b: (mul_mod(self.a, g.b, p) + self.b) % p,
            p,
        }
    }

    pub fn invert(&self) -> AffinePerm {
        let ai = inv_mod(self.a, self.p).expect("multiplier is a unit by construction");
        AffinePerm {
            a: ai,
            b: mul_mod(ai, (self.p - self.b) % self.p, self.p),
            p: self.p,
        }
    }

    /// Closed form: `a_f b_g + b_f = a_g b_f + b_g (mod P)`.
    pub fn commutes(&self, g: &AffinePerm) -> Result<bool, AffineError> {
        self.check(g)?;
        let p = self.p;
        let lhs = (mul_mod(self.a, g.b, p) + self.b) % p;
        let rhs = (mul_mod(g.a, self.b, p) + g.b) % p;
        Ok(lhs == rhs)
    }

    pub fn is_identity(&self) -> bool {
        self.a == 1 % self.p && self.b == 0
    }

    /// Solutions of `(1 - a) x = b (mod P)`.
    pub fn fixed_points(&self) -> Vec<u64> {
        let p = self.p;
        let c = (1 + p - self.a) % p;
        let g = gcd(c, p);
        if !self.b.is_multiple_of(g) {
            return Vec::new();
        }
        let (pg, cg, bg) = (p / g, c / g, self.b / g);
        let x0 = match inv_mod(cg, pg) {
            Some(inv) => mul_mod(bg, inv, pg.max(1)),
            None => 0,
        };
        (0..g).map(|t| (x0 + t * pg) % p).collect()
    }

    pub fn classify(&self) -> CycleClass {
        classify(self)
    }

    /// The `P x P` binary matrix `F` with `F[f(j)][j] = 1`, as dense rows.
    pub fn matrix(&self) -> Vec<Vec<u8>> {
        let p = self.p as usize;
        let mut m = vec![vec![0u8; p]; p];
        for j in 0..p {
            m[self.apply(j as u64) as usize][j] = 1;
        }
        m
    }
}

impl fmt::Display for AffinePerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}X+{}", self.a, self.b)
    }
}

/// Checks that if `f` and `g` commute then so do `(f^-1, g^-1)`, `(f, g^-1)` and `(f^-1, g)`.
pub fn commuting_lemma_check(f: &AffinePerm, g: &AffinePerm) -> Result<bool, AffineError> {
    let (fi, gi) = (f.invert(), g.invert());
    Ok(fi.commutes(&gi)? && f.commutes(&gi)? && fi.commutes(g)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CycleClass {
    Open,
    Closed,
    TotallyClosed,
}

impl CycleClass {
    pub fn is_closed(self) -> bool {
        self != CycleClass::Open
    }
}

pub fn classify(f: &AffinePerm) -> CycleClass {
    if f.is_identity() {
        return CycleClass::TotallyClosed;
    }
    let p = f.p;
    let g = gcd((1 + p - f.a) % p, p);
    if f.b.is_multiple_of(g) {
        CycleClass::Closed
    } else {
        CycleClass::Open
    }
}

/// A `rows x cols` grid of affine permutations sharing one modulus. Cells may
/// be empty while a generator search is still filling the array.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PermArray {
    rows: usize,
    cols: usize,
    p: u64,
    grid: Vec<Option<AffinePerm>>,
}

impl PermArray {
    pub fn empty(rows: usize, cols: usize, p: u64) -> Self {
        PermArray {
            rows,
            cols,
            p,
            grid: vec![None; rows * cols],
        }
    }

    pub fn from_rows(p: u64, rows: Vec<Vec<AffinePerm>>) -> Result<Self, AffineError> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut out = PermArray::empty(r, c, p);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != c {
                return Err(AffineError::InvalidCycle("ragged array".into()));
            }
            for (j, f) in row.into_iter().enumerate() {
                if f.modulus() != p {
                    return Err(AffineError::ModulusMismatch(f.modulus(), p));
                }
                out.set(i, j, Some(f));
            }
        }
        Ok(out)
    }

    pub fn row_blocks(&self) -> usize {
        self.rows
    }

    pub fn col_blocks(&self) -> usize {
        self.cols
    }

    pub fn block_size(&self) -> u64 {
        self.p
    }

    pub fn get(&self, r: usize, c: usize) -> Option<&AffinePerm> {
        self.grid[r * self.cols + c].as_ref()
    }

    /// The block at `(r, c)`; panics on an empty cell.
    pub fn at(&self, r: usize, c: usize) -> &AffinePerm {
        self.get(r, c).expect("permutation array cell is empty")
    }

    pub fn set(&mut self, r: usize, c: usize, f: Option<AffinePerm>) {
        self.grid[r * self.cols + c] = f;
    }

    pub fn is_complete(&self) -> bool {
        self.grid.iter().all(Option::is_some)
    }

    /// Global column indices of the support of row `r` in row block `rb`.
    pub fn row_support(&self, rb: usize, r: u64) -> Vec<usize> {
        let p = self.p as usize;
        (0..self.cols)
            .map(|c| c * p + self.at(rb, c).invert().apply(r) as usize)
            .collect()
    }

    /// Global row index hit by global column `col` inside row block `rb`.
    pub fn column_row(&self, rb: usize, col: usize) -> usize {
        let p = self.p as usize;
        rb * p + self.at(rb, col / p).apply((col % p) as u64) as usize
    }

    /// Dense binary expansion, for small-P oracles.
    pub fn dense(&self) -> Vec<Vec<u8>> {
        let p = self.p as usize;
        let mut m = vec![vec![0u8; self.cols * p]; self.rows * p];
        for rb in 0..self.rows {
            for cb in 0..self.cols {
                let f = self.at(rb, cb);
                for j in 0..p {
                    m[rb * p + f.apply(j as u64) as usize][cb * p + j] = 1;
                }
            }
        }
        m
    }
}

/// A block cycle in a two-row array, written as its sequence of column blocks.
/// The walk starts at `(start_row, columns[0])`, moves horizontally to
/// `columns[1]`, vertically to the other row, horizontally to `columns[2]`, and
/// so on, returning vertically to the start.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BlockCycle {
    pub columns: Vec<usize>,
    pub start_row: usize,
}

impl BlockCycle {
    pub fn new(columns: Vec<usize>) -> Result<Self, AffineError> {
        let c = BlockCycle { columns, start_row: 0 };
        c.validate()?;
        Ok(c)
    }

    pub fn len(&self) -> usize {
        2 * self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    fn validate(&self) -> Result<(), AffineError> {
        let m = self.columns.len();
        if m < 2 || !m.is_multiple_of(2) {
            return Err(AffineError::InvalidCycle(format!(
                "{m} columns; need an even count >= 2"
            )));
        }
        if self.start_row > 1 {
            return Err(AffineError::InvalidCycle("start row must be 0 or 1".into()));
        }
        for k in 0..m {
            if self.columns[k] == self.columns[(k + 1) % m] {
                return Err(AffineError::InvalidCycle(format!("repeated column at step {k}")));
            }
        }
        Ok(())
    }

    /// `(row, column)` blocks in visiting order; `2 * columns.len()` entries.
    pub fn blocks(&self) -> Vec<(usize, usize)> {
        let m = self.columns.len();
        let mut out = Vec::with_capacity(2 * m);
        for k in 0..m {
            let row = if k % 2 == 0 { self.start_row } else { 1 - self.start_row };
            out.push((row, self.columns[k]));
            out.push((row, self.columns[(k + 1) % m]));
        }
        out
    }

    /// Smallest equivalent sequence over even rotations of the cycle and of its reversal.
    pub fn canonical(&self) -> BlockCycle {
        let mut best = self.columns.clone();
        let mut rev = self.columns.clone();
        rev.reverse();
        let m = best.len();
        for s in [&self.columns, &rev] {
            for r in (0..m).step_by(2) {
                let cand: Vec<usize> = s[r..].iter().chain(&s[..r]).copied().collect();
                if cand < best {
                    best = cand;
                }
            }
        }
        BlockCycle {
            columns: best,
            start_row: self.start_row,
        }
    }
}

/// Composite map of a block cycle: alternating forward/inverse permutations along the walk.
pub fn composite_function(array: &PermArray, cycle: &BlockCycle) -> Result<AffinePerm, AffineError> {
    cycle.validate()?;
    if array.row_blocks() != 2 {
        return Err(AffineError::InvalidCycle("only two-row arrays are supported".into()));
    }
    let mut f = AffinePerm::identity(array.block_size());
    for pair in cycle.blocks().chunks(2) {
        let (r, c0) = pair[0];
        let (_, c1) = pair[1];
        if c0 >= array.col_blocks() || c1 >= array.col_blocks() {
            return Err(AffineError::InvalidCycle(format!("column {} out of range", c0.max(c1))));
        }
        let (Some(fwd), Some(back)) = (array.get(r, c0), array.get(r, c1)) else {
            return Err(AffineError::InvalidCycle("cycle visits an empty cell".into()));
        };
        f = back.invert().then_after(&fwd.then_after(&f));
    }
    Ok(f)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassifiedCycle {
    pub cycle: BlockCycle,
    pub composite: AffinePerm,
    pub class: CycleClass,
}

/// Every block cycle of length `<= max_len` (canonical representatives,
/// ordered by length then column sequence), restricted to columns whose two
/// cells are both filled.
pub fn enumerate_block_cycles(array: &PermArray, max_len: usize) -> Vec<ClassifiedCycle> {
    let mut out = Vec::new();
    for_each_block_cycle(array, max_len, |cycle, composite| {
        out.push(ClassifiedCycle {
            cycle: cycle.clone(),
            composite,
            class: classify(&composite),
        });
        true
    });
    out
}

/// Visits canonical block cycles in the same order as `enumerate_block_cycles`;
/// the visitor returns `false` to stop early.
pub fn for_each_block_cycle<F>(array: &PermArray, max_len: usize, mut visit: F)
where
    F: FnMut(&BlockCycle, AffinePerm) -> bool,
{
    assert_eq!(array.row_blocks(), 2, "block-cycle enumeration needs two row blocks");
    let usable: Vec<usize> = (0..array.col_blocks())
        .filter(|&c| array.get(0, c).is_some() && array.get(1, c).is_some())
        .collect();
    if usable.len() < 2 {
        return;
    }
    let p = array.block_size();
    // Per column: (top, top^-1, bottom, bottom^-1).
    let cells: Vec<Option<[AffinePerm; 4]>> = (0..array.col_blocks())
        .map(|c| match (array.get(0, c), array.get(1, c)) {
            (Some(t), Some(b)) => Some([*t, t.invert(), *b, b.invert()]),
            _ => None,
        })
        .collect();
    let mut m = 2;
    while 2 * m <= max_len {
        let mut seq = Vec::with_capacity(m);
        let mut prefix = vec![AffinePerm::identity(p); m + 1];
        if !dfs(&usable, &cells, m, &mut seq, &mut prefix, &mut visit) {
            return;
        }
        m += 2;
    }
}

fn dfs<F>(
    usable: &[usize],
    cells: &[Option<[AffinePerm; 4]>],
    m: usize,
    seq: &mut Vec<usize>,
    prefix: &mut [AffinePerm],
    visit: &mut F,
) -> bool
where
    F: FnMut(&BlockCycle, AffinePerm) -> bool,
{
    let k = seq.len();
    if k == m {
        if seq[m - 1] == seq[0] {
            return true;
        }
        let cycle = BlockCycle {
            columns: seq.clone(),
            start_row: 0,
        };
        if cycle.canonical().columns != cycle.columns {
            return true;
        }
        let f = step(cells, 1, seq[m - 1], seq[0], &prefix[m - 1]);
        return visit(&cycle, f);
    }
    for &c in usable {
        // Canonical sequences start with their smallest column.
        if k > 0 && (c == seq[k - 1] || c < seq[0]) {
            continue;
        }
        if k >= 1 {
            let row = (k - 1) % 2;
            prefix[k] = step(cells, row, seq[k - 1], c, &prefix[k - 1]);
        }
        seq.push(c);
        let go_on = dfs(usable, cells, m, seq, prefix, visit);
        seq.pop();
        if !go_on {
            return false;
        }
    }
    true
}

#[inline]
fn step(cells: &[Option<[AffinePerm; 4]>], row: usize, from: usize, to: usize, acc: &AffinePerm) -> AffinePerm {
    let a = cells[from].as_ref().expect("usable column");
    let b = cells[to].as_ref().expect("usable column");
    let fwd = &a[2 * row];
    let back_inv = &b[2 * row + 1];
    back_inv.then_after(&fwd.then_after(acc))
}

/// Shortest closed block cycle found while scanning lengths 4, 8, ...
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Girth {
    Length(usize),
    /// No closed cycle up to and including this length.
    Beyond(usize),
}

pub fn girth(array_x: &PermArray, array_z: &PermArray, max_len: usize) -> Girth {
    let mut len = 4;
    while len <= max_len {
        for array in [array_x, array_z] {
            let mut found = false;
            for_each_block_cycle(array, len, |c, f| {
                if c.len() == len && classify(&f).is_closed() {
                    found = true;
                    return false;
                }
                true
            });
            if found {
                return Girth::Length(len);
            }
        }
        len += 4;
    }
    Girth::Beyond(max_len)
}
