//! Tanner cycles of the labelled matrices: the catalog of unavoidable
//! length-2L cycles, their rank test, and short-cycle codewords for an upper
//! bound on the minimum distance.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::affine::{for_each_block_cycle, BlockCycle, CycleClass, PermArray};
use crate::code::{CssCode, NbMatrix, Side, Which};
use crate::galois::{Field, Gf};
use crate::linalg::gf_nullspace;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CycleError {
    #[error("no cycle of length <= {0} carries a codeword outside the dual; distance bound unavailable")]
    NoDeficientCycles(usize),
}

/// A simple Tanner cycle: alternating row/column moves through labelled entries.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleRecord {
    /// Which unavoidable cycle family the record belongs to, if any.
    pub utcbc_j: Option<usize>,
    pub anchor_row: usize,
    /// Entries `(row, column)` in traversal order; consecutive entries share a
    /// row or a column alternately, starting with a row move.
    pub positions: Vec<(usize, usize)>,
    pub labels: Vec<Gf>,
    /// Distinct columns in order of first visit.
    pub columns: Vec<usize>,
    /// Distinct rows in order of first visit.
    pub rows: Vec<usize>,
}

impl CycleRecord {
    fn from_positions(utcbc_j: Option<usize>, anchor_row: usize, positions: Vec<(usize, usize)>, h: &NbMatrix) -> Self {
        let labels = positions
            .iter()
            .map(|&(r, c)| h.get(r, c).expect("cycle entry on support"))
            .collect();
        let mut columns = Vec::new();
        let mut rows = Vec::new();
        for &(r, c) in &positions {
            if !columns.contains(&c) {
                columns.push(c);
            }
            if !rows.contains(&r) {
                rows.push(r);
            }
        }
        CycleRecord {
            utcbc_j,
            anchor_row,
            positions,
            labels,
            columns,
            rows,
        }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn column_set(&self) -> BTreeSet<usize> {
        self.columns.iter().copied().collect()
    }

    /// Square submatrix on the cycle's rows and columns (column order = `columns`).
    pub fn submatrix(&self) -> Vec<Vec<Gf>> {
        let mut m = vec![vec![0; self.columns.len()]; self.rows.len()];
        for (&(r, c), &v) in self.positions.iter().zip(&self.labels) {
            let ri = self.rows.iter().position(|&x| x == r).expect("row listed");
            let ci = self.columns.iter().position(|&x| x == c).expect("column listed");
            m[ri][ci] = v;
        }
        m
    }
}

/// Product of labels at even traversal positions plus product at odd positions.
/// Zero iff the cycle submatrix is singular.
pub fn cycle_determinant(field: &Field, rec: &CycleRecord) -> Gf {
    let even = rec.labels.iter().step_by(2).fold(1, |acc, &x| field.mul(acc, x));
    let odd = rec
        .labels
        .iter()
        .skip(1)
        .step_by(2)
        .fold(1, |acc, &x| field.mul(acc, x));
    even ^ odd
}

/// Null-space basis of the cycle submatrix, as vectors indexed like `rec.columns`.
/// Every column has weight two inside the cycle, so these are exactly the
/// codewords of the full matrix supported on the cycle's columns.
pub fn cycle_nullspace(field: &Field, rec: &CycleRecord) -> Vec<Vec<Gf>> {
    gf_nullspace(field, &rec.submatrix(), rec.columns.len())
}

/// The `3P` unavoidable cycles of one labelled matrix, indexed by `(j, r)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Catalog {
    pub which: Which,
    pub p: usize,
    pub records: Vec<CycleRecord>,
    /// Column -> indices into `records`.
    pub by_column: Vec<Vec<usize>>,
}

impl Catalog {
    /// Cycles of `H_Γ` (Gamma) or `H_Δ` (Delta). The cycle for `(j, r)`
    /// covers the support of row `r` in row block `j` of the other array.
    pub fn build(code: &CssCode, which: Which) -> Catalog {
        let (walk, other, h) = match which {
            Which::Gamma => (&code.hx, &code.hz_ext, &code.hgamma),
            Which::Delta => (&code.hz, &code.hx_ext, &code.hdelta),
        };
        let p = walk.block_size() as usize;
        let blocks = other.row_blocks().min(3);
        let mut records = Vec::with_capacity(blocks * p);
        for j in 0..blocks {
            for r in 0..p {
                let support = other.row_support(j, r as u64);
                let positions = walk_cycle(walk, &support).expect("unavoidable cycle closes");
                records.push(CycleRecord::from_positions(Some(j), r, positions, h));
            }
        }
        let mut by_column = vec![Vec::new(); h.n];
        for (i, rec) in records.iter().enumerate() {
            for &c in &rec.columns {
                by_column[c].push(i);
            }
        }
        Catalog {
            which,
            p,
            records,
            by_column,
        }
    }

    pub fn get(&self, j: usize, r: usize) -> &CycleRecord {
        &self.records[j * self.p + r]
    }
}

/// Clockwise walk through the quadrants of `walk` over the columns in
/// `support` (one per column block): start top-left at the first column,
/// then right, down, left, up, for `L/2` rounds.
pub fn walk_cycle(walk: &PermArray, support: &[usize]) -> Option<Vec<(usize, usize)>> {
    let l = walk.col_blocks();
    let p = walk.block_size() as usize;
    let h = l / 2;
    let (left, right) = support.split_at(h);
    let top = |c: usize| walk.column_row(0, c);
    let bottom = |c: usize| walk.column_row(1, c);
    let start = left[0];
    let mut col = start;
    let mut out = Vec::with_capacity(2 * l);
    for _ in 0..h {
        let r0 = top(col);
        out.push((r0, col));
        let cr = *right.iter().find(|&&c| top(c) == r0)?;
        out.push((r0, cr));
        let r1 = bottom(cr);
        out.push((r1, cr));
        col = *left.iter().find(|&&c| bottom(c) == r1)?;
        out.push((r1, col));
        if col == start {
            break;
        }
    }
    let closed = col == start && out.len() == 2 * l;
    debug_assert!(out.iter().all(|&(r, _)| r < 2 * p));
    closed.then_some(out)
}

/// All simple Tanner cycles of length `<= max_len` in `H_Γ` or `H_Δ` that
/// follow a closed block cycle, one per fixed point of its composite map,
/// deduplicated by column set.
pub fn enumerate_tanner_cycles(code: &CssCode, which: Which, max_len: usize) -> Vec<CycleRecord> {
    let (array, h) = match which {
        Which::Gamma => (&code.hx, &code.hgamma),
        Which::Delta => (&code.hz, &code.hdelta),
    };
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for_each_block_cycle(array, max_len, |cycle, f| {
        if crate::affine::classify(&f) == CycleClass::Open {
            return true;
        }
        for x in f.fixed_points() {
            let positions = tanner_positions(array, cycle, x);
            let rows: BTreeSet<usize> = positions.iter().map(|&(r, _)| r).collect();
            let cols: BTreeSet<usize> = positions.iter().map(|&(_, c)| c).collect();
            if 2 * cols.len() != positions.len() || rows.len() != cols.len() {
                continue;
            }
            if seen.insert(cols) {
                out.push(CycleRecord::from_positions(None, positions[0].0, positions, h));
            }
        }
        true
    });
    out
}

/// Length-16 Tanner cycles of a code whose girth is 12.
pub fn enumerate_length16(code: &CssCode, which: Which) -> Vec<CycleRecord> {
    enumerate_tanner_cycles(code, which, 16)
        .into_iter()
        .filter(|r| r.len() == 16)
        .collect()
}

/// Entries of the Tanner cycle that enters `cycle.columns[0]` at in-block column `x`.
fn tanner_positions(array: &PermArray, cycle: &BlockCycle, x: u64) -> Vec<(usize, usize)> {
    let p = array.block_size();
    let m = cycle.columns.len();
    let mut out = Vec::with_capacity(2 * m);
    let mut x = x;
    for k in 0..m {
        let rb = if k % 2 == 0 {
            cycle.start_row
        } else {
            1 - cycle.start_row
        };
        let (c0, c1) = (cycle.columns[k], cycle.columns[(k + 1) % m]);
        let row = array.at(rb, c0).apply(x);
        out.push((rb * p as usize + row as usize, c0 * p as usize + x as usize));
        x = array.at(rb, c1).invert().apply(row);
        out.push((rb * p as usize + row as usize, c1 * p as usize + x as usize));
    }
    out
}

/// Histogram of bit weights of short-cycle codewords outside the dual.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct WeightDistribution {
    pub counts: BTreeMap<usize, usize>,
}

impl WeightDistribution {
    pub fn min_weight(&self) -> Option<usize> {
        self.counts.keys().next().copied()
    }

    pub fn total(&self) -> usize {
        self.counts.values().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DistanceBound {
    pub max_len: usize,
    pub d_x: Option<usize>,
    pub d_z: Option<usize>,
    pub dist_x: WeightDistribution,
    pub dist_z: WeightDistribution,
    /// Rank-deficient cycles found per side.
    pub deficient_x: usize,
    pub deficient_z: usize,
}

impl DistanceBound {
    pub fn d(&self) -> Option<usize> {
        match (self.d_x, self.d_z) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }

    /// `w,A_X,A_Z` rows for every weight seen on either side.
    pub fn to_csv(&self) -> String {
        let weights: BTreeSet<usize> = self
            .dist_x
            .counts
            .keys()
            .chain(self.dist_z.counts.keys())
            .copied()
            .collect();
        let mut s = String::from("w,A_X,A_Z\n");
        for w in weights {
            let ax = self.dist_x.counts.get(&w).copied().unwrap_or(0);
            let az = self.dist_z.counts.get(&w).copied().unwrap_or(0);
            writeln!(s, "{w},{ax},{az}").expect("string write");
        }
        s
    }
}

/// Upper bound on the minimum distance from codewords supported on single
/// Tanner cycles of length `<= max_len`. X side: null vectors of `H_Γ` cycles,
/// weighed through `v` and discarded when in `rowspace(H_Δ)`. Z side:
/// `H_Δ` cycles, `w`, discarded when in `rowspace(H_Γ)`.
pub fn distance_upper_bound(code: &CssCode, max_len: usize) -> Result<DistanceBound, CycleError> {
    let (dist_x, deficient_x) = side_distribution(code, Which::Gamma, max_len);
    let (dist_z, deficient_z) = side_distribution(code, Which::Delta, max_len);
    let b = DistanceBound {
        max_len,
        d_x: dist_x.min_weight(),
        d_z: dist_z.min_weight(),
        dist_x,
        dist_z,
        deficient_x,
        deficient_z,
    };
    if b.d().is_none() {
        return Err(CycleError::NoDeficientCycles(max_len));
    }
    Ok(b)
}

fn side_distribution(code: &CssCode, which: Which, max_len: usize) -> (WeightDistribution, usize) {
    let f = &code.field;
    let n = code.symbols();
    let (dual_side, expand): (Side, fn(&Field, Gf) -> u32) = match which {
        Which::Gamma => (Side::Z, |f, x| f.v(x)),
        Which::Delta => (Side::X, |f, x| f.w(x)),
    };
    let mut dist = WeightDistribution::default();
    let mut deficient = 0;
    for rec in enumerate_tanner_cycles(code, which, max_len) {
        let ns = cycle_nullspace(f, &rec);
        if ns.is_empty() {
            continue;
        }
        deficient += 1;
        for basis in &ns {
            let mut full = vec![0 as Gf; n];
            for (&c, &x) in rec.columns.iter().zip(basis) {
                full[c] = x;
            }
            if code.symbol_dual_membership(dual_side, &full) {
                continue;
            }
            for s in 1..=f.order() {
                let scale = f.alpha_pow(s);
                let w: u32 = basis.iter().map(|&x| expand(f, f.mul(scale, x)).count_ones()).sum();
                *dist.counts.entry(w as usize).or_insert(0) += 1;
            }
        }
    }
    (dist, deficient)
}
