//! Code construction: the permutation arrays `Ĥ_X`/`Ĥ_Z` from generator
//! sequences `f`, `g`; the randomized generator search; and assignment of
//! GF(q) labels through exponent-domain linear systems over Z_{q-1}.

use std::collections::BTreeSet;

use log::{debug, info};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use crate::affine::PermArray;
use crate::affine::{for_each_block_cycle, gcd, AffineError, AffinePerm, BlockCycle, CycleClass};
use crate::derive_seed;
use crate::galois::{Field, Gf};
use crate::linalg::{gf_nullspace, zm_rref};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConstructError {
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("generator sequences violate the commutativity requirement: {0}")]
    RequirementViolation(String),
    #[error("generator search exhausted after {attempts} attempts at position {position}")]
    SearchExhausted { position: String, attempts: u64 },
    #[error("no unit pivot available in constraint row {row}")]
    NoUnitPivot { row: usize },
    #[error("{stage} did not finish within {cap} perturbations")]
    IterationLimitExceeded { stage: &'static str, cap: u64 },
    #[error("cycle submatrix for row block {block}, row {row} has null space of dimension {dim}")]
    RankAnomaly { block: usize, row: usize, dim: usize },
    #[error(transparent)]
    Affine(#[from] AffineError),
}

/// The sequences `f_0..f_{L/2-1}` and `g_0..g_{L/2-1}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorPair {
    pub p: u64,
    pub l: usize,
    pub f: Vec<AffinePerm>,
    pub g: Vec<AffinePerm>,
}

impl GeneratorPair {
    pub fn new(p: u64, f: Vec<AffinePerm>, g: Vec<AffinePerm>) -> Result<Self, ConstructError> {
        if f.is_empty() || f.len() != g.len() {
            return Err(ConstructError::InvalidParameters(
                "f and g need equal nonzero length".into(),
            ));
        }
        if let Some(x) = f.iter().chain(&g).find(|x| x.modulus() != p) {
            return Err(AffineError::ModulusMismatch(x.modulus(), p).into());
        }
        Ok(GeneratorPair {
            p,
            l: 2 * f.len(),
            f,
            g,
        })
    }

    /// Builds from `(a, b)` coefficient pairs.
    pub fn from_coeffs(p: u64, f: &[(u64, u64)], g: &[(u64, u64)]) -> Result<Self, ConstructError> {
        let mk = |v: &[(u64, u64)]| {
            v.iter()
                .map(|&(a, b)| AffinePerm::new(a, b, p))
                .collect::<Result<Vec<_>, _>>()
        };
        Self::new(p, mk(f)?, mk(g)?)
    }

    pub fn half(&self) -> usize {
        self.l / 2
    }
}

fn wrap(i: i64, h: usize) -> usize {
    i.rem_euclid(h as i64) as usize
}

/// Row block `j` of `Ĥ_X`: `(f_{l-j})_l ∥ (g_{l-j})_l`, indices mod L/2.
fn hx_block_row(f: &[Option<AffinePerm>], g: &[Option<AffinePerm>], j: usize) -> Vec<Option<AffinePerm>> {
    let h = f.len();
    let mut row = Vec::with_capacity(2 * h);
    for l in 0..h {
        row.push(f[wrap(l as i64 - j as i64, h)]);
    }
    for l in 0..h {
        row.push(g[wrap(l as i64 - j as i64, h)]);
    }
    row
}

/// Row block `j` of `Ĥ_Z`: `(g^-1_{-(l-j)})_l ∥ (f^-1_{-(l-j)})_l`.
fn hz_block_row(f: &[Option<AffinePerm>], g: &[Option<AffinePerm>], j: usize) -> Vec<Option<AffinePerm>> {
    let h = f.len();
    let mut row = Vec::with_capacity(2 * h);
    for l in 0..h {
        row.push(g[wrap(j as i64 - l as i64, h)].map(|x| x.invert()));
    }
    for l in 0..h {
        row.push(f[wrap(j as i64 - l as i64, h)].map(|x| x.invert()));
    }
    row
}

fn partial_arrays(p: u64, f: &[Option<AffinePerm>], g: &[Option<AffinePerm>], blocks: usize) -> (PermArray, PermArray) {
    let l = 2 * f.len();
    let mut hx = PermArray::empty(blocks, l, p);
    let mut hz = PermArray::empty(blocks, l, p);
    for j in 0..blocks {
        for (c, x) in hx_block_row(f, g, j).into_iter().enumerate() {
            hx.set(j, c, x);
        }
        for (c, x) in hz_block_row(f, g, j).into_iter().enumerate() {
            hz.set(j, c, x);
        }
    }
    (hx, hz)
}

fn somes(v: &[AffinePerm]) -> Vec<Option<AffinePerm>> {
    v.iter().copied().map(Some).collect()
}

/// `Ĥ_X` and `Ĥ_Z` with two row blocks.
pub fn build_arrays(gen: &GeneratorPair) -> Result<(PermArray, PermArray), ConstructError> {
    if !check_requirement1(gen) {
        return Err(ConstructError::RequirementViolation(format!(
            "f = {:?}, g = {:?}",
            gen.f, gen.g
        )));
    }
    Ok(partial_arrays(gen.p, &somes(&gen.f), &somes(&gen.g), 2))
}

/// Both arrays over the extended row-block range `0..L/2`.
pub fn extended_arrays(gen: &GeneratorPair) -> (PermArray, PermArray) {
    partial_arrays(gen.p, &somes(&gen.f), &somes(&gen.g), gen.half())
}

fn commute_opt(a: &Option<AffinePerm>, b: &Option<AffinePerm>) -> bool {
    match (a, b) {
        (Some(x), Some(y)) => x.commutes(y).unwrap_or(false),
        _ => true,
    }
}

/// `f_l` commutes with `g_{-l+j}` for `j` in `-(J-1)..=(J-1)`, `J = 2`.
fn requirement1_partial(f: &[Option<AffinePerm>], g: &[Option<AffinePerm>]) -> bool {
    let h = f.len() as i64;
    (0..h).all(|l| (-1..=1).all(|j| commute_opt(&f[l as usize], &g[(-l + j).rem_euclid(h) as usize])))
}

pub fn check_requirement1(gen: &GeneratorPair) -> bool {
    requirement1_partial(&somes(&gen.f), &somes(&gen.g))
}

/// Some pair within `seq` fails to commute.
fn incompletely_commuting(seq: &[AffinePerm]) -> bool {
    (0..seq.len()).any(|i| (i + 1..seq.len()).any(|j| !seq[i].commutes(&seq[j]).unwrap_or(true)))
}

/// Criterion (b): some `f_i, f_j` and some `g_i, g_j` do not commute.
pub fn check_criterion_b(gen: &GeneratorPair) -> bool {
    incompletely_commuting(&gen.f) && incompletely_commuting(&gen.g)
}

/// Column sequence of the unavoidable cycle `u(j)`: `f_0 ⇒ g_j ⇒ f_1 ⇒ g_{j-1} ⇒ ...`.
pub fn utcbc_cycle(l: usize, j: usize) -> BlockCycle {
    let h = l / 2;
    let mut cols = Vec::with_capacity(l);
    for i in 0..h {
        cols.push(i);
        cols.push(h + wrap(j as i64 - i as i64, h));
    }
    BlockCycle {
        columns: cols,
        start_row: 0,
    }
}

/// Indices `j` of the unavoidable cycles for column weight two: `0, 1` and `L/2 - 1`.
pub fn utcbc_indices(l: usize) -> Vec<usize> {
    let set: BTreeSet<usize> = [0, 1 % (l / 2), l / 2 - 1].into_iter().collect();
    set.into_iter().collect()
}

fn allowed_closed(l: usize) -> BTreeSet<Vec<usize>> {
    utcbc_indices(l)
        .into_iter()
        .map(|j| utcbc_cycle(l, j).canonical().columns)
        .collect()
}

/// First closed block cycle of length `<= 2L` that is not an unavoidable one.
fn extra_closed_cycle(array: &PermArray, l: usize, allowed: &BTreeSet<Vec<usize>>) -> Option<BlockCycle> {
    let mut hit = None;
    for_each_block_cycle(array, 2 * l, |c, f| {
        if crate::affine::classify(&f) != CycleClass::Open && !allowed.contains(&c.columns) {
            hit = Some(c.clone());
            return false;
        }
        true
    });
    hit
}

/// Criterion (c): the only closed block cycles of length `<= 2L` are the unavoidable ones.
pub fn check_criterion_c(hx: &PermArray, hz: &PermArray) -> bool {
    let l = hx.col_blocks();
    let allowed = allowed_closed(l);
    extra_closed_cycle(hx, l, &allowed).is_none() && extra_closed_cycle(hz, l, &allowed).is_none()
}

/// Every row of one array meets the other array's rows in `L` distinct rows
/// (two per row block), checked for all extended row blocks of both arrays.
pub fn rows_meet_distinct(hx_ext: &PermArray, hz_ext: &PermArray) -> bool {
    let l = hx_ext.col_blocks();
    let p = hx_ext.block_size();
    for (a, b) in [(hz_ext, hx_ext), (hx_ext, hz_ext)] {
        for j in 0..a.row_blocks() {
            for r in 0..p {
                let cols = a.row_support(j, r);
                let mut rows = BTreeSet::new();
                for &c in &cols {
                    rows.insert(b.column_row(0, c));
                    rows.insert(b.column_row(1, c));
                }
                if rows.len() != l {
                    return false;
                }
            }
        }
    }
    true
}

/// Which acceptance criteria the generator search enforces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Design {
    /// Requirement 1 plus criteria (b) and (c).
    Proposed,
    /// Requirement 1 only (plus the distinct-row condition needed for labelling).
    Conventional,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Letter {
    F,
    G,
}

fn partial_ok(
    p: u64,
    f: &[Option<AffinePerm>],
    g: &[Option<AffinePerm>],
    design: Design,
    allowed: &BTreeSet<Vec<usize>>,
) -> bool {
    if !requirement1_partial(f, g) {
        return false;
    }
    let complete = |v: &[Option<AffinePerm>]| v.iter().all(Option::is_some);
    let flat = |v: &[Option<AffinePerm>]| v.iter().flatten().copied().collect::<Vec<_>>();
    let all_done = complete(f) && complete(g);
    if design == Design::Proposed {
        if complete(f) && !incompletely_commuting(&flat(f)) {
            return false;
        }
        if complete(g) && !incompletely_commuting(&flat(g)) {
            return false;
        }
        let l = 2 * f.len();
        let empty = BTreeSet::new();
        let allowed = if all_done { allowed } else { &empty };
        let (hx, hz) = partial_arrays(p, f, g, 2);
        if extra_closed_cycle(&hx, l, allowed).is_some() || extra_closed_cycle(&hz, l, allowed).is_some() {
            return false;
        }
    }
    if all_done {
        let (hx, hz) = partial_arrays(p, f, g, f.len());
        if !rows_meet_distinct(&hx, &hz) {
            return false;
        }
    }
    true
}

/// Sequential randomized search: candidates `f_i` then `g_i` are drawn
/// uniformly from the affine group and kept only if the partial sequences
/// still satisfy the design criteria.
///
/// Drawing with rejection until acceptance yields a uniform element of the
/// valid set. We get the same distribution by visiting the candidates that pass
/// the cheap commutativity test in a seeded random order and taking the first
/// that passes everything, which also detects positions with no valid
/// candidate at all. `max_attempts` caps the full criteria checks per position.
pub fn sample_generators(
    p: u64,
    l: usize,
    seed: u64,
    max_attempts: u64,
    design: Design,
) -> Result<GeneratorPair, ConstructError> {
    if p < 2 || l < 4 || !l.is_multiple_of(2) {
        return Err(ConstructError::InvalidParameters(format!("P = {p}, L = {l}")));
    }
    let h = l / 2;
    let units: Vec<u64> = (1..p).filter(|&a| gcd(a, p) == 1).collect();
    let allowed = allowed_closed(l);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f: Vec<Option<AffinePerm>> = vec![None; h];
    let mut g: Vec<Option<AffinePerm>> = vec![None; h];
    for i in 0..h {
        for letter in [Letter::F, Letter::G] {
            let name = if letter == Letter::F { "f" } else { "g" };
            // Partners this slot must commute with under requirement 1.
            let partners: Vec<AffinePerm> = match letter {
                Letter::F => (-1..=1).filter_map(|j| g[wrap(j - i as i64, h)]).collect(),
                Letter::G => (0..h)
                    .filter(|&k| (-1..=1).any(|j| wrap(j - k as i64, h) == i))
                    .filter_map(|k| f[k])
                    .collect(),
            };
            let mut cands: Vec<(u64, u64)> = Vec::new();
            for &a in &units {
                for b in 0..p {
                    let ok = partners.iter().all(|x| {
                        // (a - 1) b_x == (a_x - 1) b  (mod P)
                        let lhs = ((a + p - 1) as u128 * x.b() as u128) % p as u128;
                        let rhs = ((x.a() + p - 1) as u128 * b as u128) % p as u128;
                        lhs == rhs
                    });
                    if ok {
                        cands.push((a, b));
                    }
                }
            }
            cands.shuffle(&mut rng);
            let mut attempts = 0u64;
            let mut accepted = false;
            for (a, b) in cands {
                if attempts == max_attempts {
                    break;
                }
                attempts += 1;
                let cand = Some(AffinePerm::new(a, b, p)?);
                match letter {
                    Letter::F => f[i] = cand,
                    Letter::G => g[i] = cand,
                }
                if partial_ok(p, &f, &g, design, &allowed) {
                    accepted = true;
                    break;
                }
            }
            if !accepted {
                return Err(ConstructError::SearchExhausted {
                    position: format!("{name}_{i}"),
                    attempts,
                });
            }
        }
    }
    let f = f.into_iter().map(|x| x.expect("filled")).collect();
    let g = g.into_iter().map(|x| x.expect("filled")).collect();
    GeneratorPair::new(p, f, g)
}

/// A sparse system over Z_{q-1} acting on an exponent vector of length `2N`
/// laid out as top-row-block labels (column order) then bottom-row-block labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintSystem {
    pub nvars: usize,
    pub rows: Vec<Vec<(usize, i8)>>,
    pub must_be_zero: bool,
}

impl ConstraintSystem {
    /// Row values mod `m` for an exponent vector.
    pub fn evaluate(&self, x: &[u32], m: u32) -> Vec<u32> {
        self.rows
            .iter()
            .map(|row| {
                let s: i64 = row.iter().map(|&(c, s)| s as i64 * x[c] as i64).sum();
                s.rem_euclid(m as i64) as u32
            })
            .collect()
    }
}

/// One row per row `(j, r)` of `support`'s row blocks `blocks`; each support
/// column `c` contributes `-top[c] + bottom[c]` (left half) or
/// `+top[c] - bottom[c]` (right half).
fn cycle_rows(support: &PermArray, blocks: std::ops::Range<usize>) -> Vec<Vec<(usize, i8)>> {
    let p = support.block_size();
    let n = support.col_blocks() * p as usize;
    let mut rows = Vec::new();
    for j in blocks {
        for r in 0..p {
            let mut row = Vec::with_capacity(2 * support.col_blocks());
            for c in support.row_support(j, r) {
                let s: i8 = if c < n / 2 { -1 } else { 1 };
                row.push((c, s));
                row.push((n + c, -s));
            }
            rows.push(row);
        }
    }
    rows
}

/// Orthogonality constraints for the labels of the matrix whose support is the
/// *other* array: rows of `other_ext` in row blocks 0 and 1.
pub fn build_zero_system(other_ext: &PermArray) -> ConstraintSystem {
    let n = other_ext.col_blocks() * other_ext.block_size() as usize;
    ConstraintSystem {
        nvars: 2 * n,
        rows: cycle_rows(other_ext, 0..2),
        must_be_zero: true,
    }
}

/// Full-rank constraints from row block 2 of `other_ext` (requires L = 6).
pub fn build_nonzero_system(other_ext: &PermArray) -> ConstraintSystem {
    let n = other_ext.col_blocks() * other_ext.block_size() as usize;
    ConstraintSystem {
        nvars: 2 * n,
        rows: cycle_rows(other_ext, 2..3),
        must_be_zero: false,
    }
}

/// Solution map of a homogeneous system: bound variables as a linear function of free ones.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FreeBoundMap {
    pub modulus: u32,
    pub nvars: usize,
    pub bound: Vec<usize>,
    pub free: Vec<usize>,
    /// Row-major `bound.len() x free.len()`.
    pub transform: Vec<u32>,
}

impl FreeBoundMap {
    pub fn coeff(&self, b: usize, f: usize) -> u32 {
        self.transform[b * self.free.len() + f]
    }

    /// Full vector from free values.
    pub fn assemble(&self, free_vals: &[u32]) -> Vec<u32> {
        let m = self.modulus as u64;
        let nf = self.free.len();
        let mut x = vec![0u32; self.nvars];
        for (&idx, &v) in self.free.iter().zip(free_vals) {
            x[idx] = v;
        }
        for (bi, &idx) in self.bound.iter().enumerate() {
            let row = &self.transform[bi * nf..(bi + 1) * nf];
            let s: u64 = row.iter().zip(free_vals).map(|(&a, &v)| a as u64 * v as u64).sum();
            x[idx] = (s % m) as u32;
        }
        x
    }
}

/// Unit-pivot elimination over Z_{q-1}; see [`zm_rref`].
pub fn solve_zero_system(sys: &ConstraintSystem, modulus: u32) -> Result<FreeBoundMap, ConstructError> {
    let m = modulus;
    let mut dense: Vec<Vec<u32>> = sys
        .rows
        .iter()
        .map(|row| {
            let mut v = vec![0u32; sys.nvars];
            for &(c, s) in row {
                let add = if s > 0 { s as u32 } else { m - (-s) as u32 };
                v[c] = (v[c] + add) % m;
            }
            v
        })
        .collect();
    let pivots = zm_rref(&mut dense, sys.nvars, m).map_err(|e| ConstructError::NoUnitPivot { row: e.row })?;
    let mut is_bound = vec![false; sys.nvars];
    for &p in &pivots {
        is_bound[p] = true;
    }
    let free: Vec<usize> = (0..sys.nvars).filter(|&c| !is_bound[c]).collect();
    let mut transform = vec![0u32; pivots.len() * free.len()];
    for (bi, row) in dense.iter().enumerate() {
        for (fi, &fc) in free.iter().enumerate() {
            let a = row[fc];
            transform[bi * free.len() + fi] = if a == 0 { 0 } else { m - a };
        }
    }
    Ok(FreeBoundMap {
        modulus: m,
        nvars: sys.nvars,
        bound: pivots,
        free,
        transform,
    })
}

/// Coefficients of `sys` after substituting the bound part: `E = S_f + S_b G`.
fn substituted(sys: &ConstraintSystem, fbm: &FreeBoundMap) -> Vec<Vec<u32>> {
    let m = fbm.modulus as u64;
    let nf = fbm.free.len();
    let mut free_pos = vec![usize::MAX; fbm.nvars];
    for (i, &c) in fbm.free.iter().enumerate() {
        free_pos[c] = i;
    }
    let mut bound_pos = vec![usize::MAX; fbm.nvars];
    for (i, &c) in fbm.bound.iter().enumerate() {
        bound_pos[c] = i;
    }
    sys.rows
        .iter()
        .map(|row| {
            let mut acc = vec![0u64; nf];
            for &(c, s) in row {
                let s = if s > 0 { s as u64 } else { m - (-s) as u64 };
                if free_pos[c] != usize::MAX {
                    acc[free_pos[c]] += s;
                } else {
                    let b = bound_pos[c];
                    for (a, &g) in acc.iter_mut().zip(&fbm.transform[b * nf..(b + 1) * nf]) {
                        *a += s * g as u64;
                    }
                }
            }
            acc.into_iter().map(|a| (a % m) as u32).collect()
        })
        .collect()
}

/// Tunables for label assignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelParams {
    pub perturbation_cap: u64,
    /// Drive the row-block-2 cycles to full rank (proposed design). When
    /// false, labels satisfy orthogonality only.
    pub full_rank: bool,
}

impl Default for LabelParams {
    fn default() -> Self {
        LabelParams {
            perturbation_cap: 10_000,
            full_rank: true,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelStats {
    pub initial_zeros_gamma: usize,
    pub perturbations_gamma: u64,
    pub initial_zeros_delta: usize,
    pub perturbations_delta: u64,
}

/// Everything needed to label one code: arrays, systems and the solved map.
pub struct LabelProblem<'a> {
    pub field: &'a Field,
    pub gen: &'a GeneratorPair,
    pub hx_ext: PermArray,
    pub hz_ext: PermArray,
    pub a01: ConstraintSystem,
    pub a2: ConstraintSystem,
    pub b2: ConstraintSystem,
    pub fbm: FreeBoundMap,
    e_a2: Vec<Vec<u32>>,
}

impl<'a> LabelProblem<'a> {
    pub fn new(field: &'a Field, gen: &'a GeneratorPair) -> Result<Self, ConstructError> {
        if gen.l != 6 {
            return Err(ConstructError::InvalidParameters(
                "label assignment is wired for L = 6".into(),
            ));
        }
        build_arrays(gen)?;
        let (hx_ext, hz_ext) = extended_arrays(gen);
        let a01 = build_zero_system(&hz_ext);
        let a2 = build_nonzero_system(&hz_ext);
        let b2 = build_nonzero_system(&hx_ext);
        let fbm = solve_zero_system(&a01, field.order())?;
        let e_a2 = substituted(&a2, &fbm);
        debug!("zero system: {} bound, {} free", fbm.bound.len(), fbm.free.len());
        Ok(LabelProblem {
            field,
            gen,
            hx_ext,
            hz_ext,
            a01,
            a2,
            b2,
            fbm,
            e_a2,
        })
    }

    fn n(&self) -> usize {
        self.gen.l * self.gen.p as usize
    }

    /// Labels of the gamma matrix: free part drawn uniformly, then single
    /// free-variable perturbations accepted only when they strictly reduce the
    /// number of zero entries of `A_2 log gamma`.
    pub fn label_gamma(
        &self,
        rng: &mut ChaCha8Rng,
        params: &LabelParams,
        stats: &mut LabelStats,
    ) -> Result<Vec<u32>, ConstructError> {
        let m = self.fbm.modulus;
        let nf = self.fbm.free.len();
        let mut free: Vec<u32> = (0..nf).map(|_| rng.gen_range(0..m)).collect();
        let mut c = self.a2_values(&free);
        let mut zeros = c.iter().filter(|&&x| x == 0).count();
        stats.initial_zeros_gamma = zeros;
        if !params.full_rank {
            return Ok(self.fbm.assemble(&free));
        }
        let mut it = 0u64;
        while zeros > 0 {
            if it == params.perturbation_cap {
                return Err(ConstructError::IterationLimitExceeded {
                    stage: "gamma labelling",
                    cap: it,
                });
            }
            it += 1;
            let j = self.pick_free(&c, rng);
            let old = free[j];
            let new = redraw(old, m, rng);
            let c2 = self.shift_a2(&c, j, new as i64 - old as i64);
            let z2 = c2.iter().filter(|&&x| x == 0).count();
            if z2 < zeros {
                free[j] = new;
                c = c2;
                zeros = z2;
            }
        }
        stats.perturbations_gamma = it;
        Ok(self.fbm.assemble(&free))
    }

    fn a2_values(&self, free: &[u32]) -> Vec<u32> {
        let m = self.fbm.modulus as u64;
        self.e_a2
            .iter()
            .map(|row| (row.iter().zip(free).map(|(&a, &v)| a as u64 * v as u64).sum::<u64>() % m) as u32)
            .collect()
    }

    fn shift_a2(&self, c: &[u32], j: usize, delta: i64) -> Vec<u32> {
        let m = self.fbm.modulus as i64;
        c.iter()
            .zip(&self.e_a2)
            .map(|(&ci, row)| (ci as i64 + row[j] as i64 * delta).rem_euclid(m) as u32)
            .collect()
    }

    /// A free variable with nonzero coefficient in some zero row, else uniform.
    fn pick_free(&self, c: &[u32], rng: &mut ChaCha8Rng) -> usize {
        let mut cands = BTreeSet::new();
        for (row, _) in self.e_a2.iter().zip(c).filter(|(_, &x)| x == 0) {
            cands.extend(row.iter().enumerate().filter(|(_, &a)| a != 0).map(|(i, _)| i));
        }
        if cands.is_empty() {
            rng.gen_range(0..self.fbm.free.len())
        } else {
            let v: Vec<usize> = cands.into_iter().collect();
            v[rng.gen_range(0..v.len())]
        }
    }

    /// Delta labels from gamma: each delta row is a random nonzero multiple of
    /// the null vector of the gamma cycle it must annihilate; then free gamma
    /// variables are perturbed until `B_2 log delta` has no zero entries while
    /// `A_2 log gamma` stays zero-free.
    pub fn label_delta(
        &self,
        gamma: &[u32],
        rng: &mut ChaCha8Rng,
        params: &LabelParams,
        stats: &mut LabelStats,
    ) -> Result<(Vec<u32>, Vec<u32>), ConstructError> {
        let m = self.fbm.modulus;
        let mut gamma = gamma.to_vec();
        let mut free: Vec<u32> = self.fbm.free.iter().map(|&i| gamma[i]).collect();
        let mut delta = self.delta_from_gamma(&gamma, rng)?;
        let mut d = self.b2.evaluate(&delta, m);
        let mut zeros = d.iter().filter(|&&x| x == 0).count();
        stats.initial_zeros_delta = zeros;
        if !params.full_rank {
            return Ok((gamma, delta));
        }
        let mut c = self.a2_values(&free);
        let mut it = 0u64;
        while zeros > 0 {
            if it == params.perturbation_cap {
                return Err(ConstructError::IterationLimitExceeded {
                    stage: "delta labelling",
                    cap: it,
                });
            }
            it += 1;
            let j = rng.gen_range(0..free.len());
            let old = free[j];
            let new = redraw(old, m, rng);
            let c2 = self.shift_a2(&c, j, new as i64 - old as i64);
            if c2.contains(&0) {
                continue;
            }
            free[j] = new;
            let gamma2 = self.fbm.assemble(&free);
            let delta2 = self.delta_from_gamma(&gamma2, rng)?;
            let d2 = self.b2.evaluate(&delta2, m);
            let z2 = d2.iter().filter(|&&x| x == 0).count();
            if z2 >= zeros {
                free[j] = old;
                continue;
            }
            (gamma, delta, c, d, zeros) = (gamma2, delta2, c2, d2, z2);
        }
        debug_assert!(d.iter().all(|&x| x != 0));
        stats.perturbations_delta = it;
        Ok((gamma, delta))
    }

    /// Null-space labelling of every delta row in row blocks 0 and 1.
    pub fn delta_from_gamma(&self, gamma: &[u32], rng: &mut ChaCha8Rng) -> Result<Vec<u32>, ConstructError> {
        let field = self.field;
        let n = self.n();
        let p = self.gen.p;
        let mut delta = vec![0u32; 2 * n];
        for j in 0..2 {
            for r in 0..p {
                let cols = self.hz_ext.row_support(j, r);
                let x = cycle_null_vector(field, &self.hx_ext, gamma, &cols).map_err(|dim| {
                    ConstructError::RankAnomaly {
                        block: j,
                        row: r as usize,
                        dim,
                    }
                })?;
                let s = field.alpha_pow(rng.gen_range(0..field.order()));
                for (&c, &xc) in cols.iter().zip(&x) {
                    let v = field.mul(s, xc);
                    delta[j * n + c] = field.log(v).expect("null vector of a cycle has full support");
                }
            }
        }
        Ok(delta)
    }
}

fn redraw(old: u32, m: u32, rng: &mut ChaCha8Rng) -> u32 {
    let v = rng.gen_range(0..m - 1);
    if v >= old {
        v + 1
    } else {
        v
    }
}

/// The unique (up to scale) vector `x` on columns `cols` with `H x = 0`, where
/// `H` carries labels `alpha^labels[b*N + c]` on the support of `support`.
/// Errors with the null-space dimension when it is not one or the vector has a zero.
pub fn cycle_null_vector(field: &Field, support: &PermArray, labels: &[u32], cols: &[usize]) -> Result<Vec<Gf>, usize> {
    let n = support.col_blocks() * support.block_size() as usize;
    let mut rows: Vec<usize> = Vec::with_capacity(2 * cols.len());
    for &c in cols {
        rows.push(support.column_row(0, c));
        rows.push(support.column_row(1, c));
    }
    rows.sort_unstable();
    rows.dedup();
    let mut mat = vec![vec![0 as Gf; cols.len()]; rows.len()];
    for (k, &c) in cols.iter().enumerate() {
        for b in 0..2 {
            let ri = rows.binary_search(&support.column_row(b, c)).expect("row present");
            mat[ri][k] = field.alpha_pow(labels[b * n + c]);
        }
    }
    let ns = gf_nullspace(field, &mat, cols.len());
    if ns.len() != 1 || ns[0].contains(&0) {
        return Err(ns.len());
    }
    Ok(ns.into_iter().next().expect("one vector"))
}

/// Construction settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstructParams {
    pub p: u64,
    pub l: usize,
    pub seed: u64,
    pub design: Design,
    /// Per-position attempt cap of the generator search.
    pub max_attempts: u64,
    /// Fresh generator searches (with derived seeds) before giving up.
    pub restarts: u64,
    pub perturbation_cap: u64,
}

impl ConstructParams {
    pub fn new(p: u64, seed: u64) -> Self {
        ConstructParams {
            p,
            l: 6,
            seed,
            design: Design::Proposed,
            max_attempts: 100_000,
            restarts: 50_000,
            perturbation_cap: 10_000,
        }
    }
}

/// Output of [`construct`]: generators and exponent vectors of both label matrices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Construction {
    pub gen: GeneratorPair,
    pub gamma: Vec<u32>,
    pub delta: Vec<u32>,
    pub restart: u64,
    pub stats: LabelStats,
}

/// Generator search followed by label assignment. A failed search or
/// labelling attempt restarts with a seed derived from `(seed, attempt)`.
pub fn construct(field: &Field, params: &ConstructParams) -> Result<Construction, ConstructError> {
    let label_params = LabelParams {
        perturbation_cap: params.perturbation_cap,
        full_rank: params.design == Design::Proposed,
    };
    let mut last_err = None;
    for t in 0..params.restarts.max(1) {
        let sub = derive_seed(params.seed, t);
        let gen = match sample_generators(params.p, params.l, sub, params.max_attempts, params.design) {
            Ok(g) => g,
            Err(e @ ConstructError::SearchExhausted { .. }) => {
                debug!("restart {t}: {e}");
                last_err = Some(e);
                continue;
            }
            Err(e) => return Err(e),
        };
        info!("restart {t}: generators f = {:?}, g = {:?}", gen.f, gen.g);
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(sub, u64::MAX));
        match label(field, &gen, &mut rng, &label_params) {
            Ok((gamma, delta, stats)) => {
                return Ok(Construction {
                    gen,
                    gamma,
                    delta,
                    restart: t,
                    stats,
                })
            }
            Err(
                e @ (ConstructError::NoUnitPivot { .. }
                | ConstructError::IterationLimitExceeded { .. }
                | ConstructError::RankAnomaly { .. }),
            ) => {
                info!("restart {t}: labelling failed: {e}");
                last_err = Some(e);
            }
            Err(e) => return Err(e),
        }
    }
    Err(last_err.unwrap_or(ConstructError::InvalidParameters("no restarts".into())))
}

/// Label assignment for fixed generators.
pub fn label(
    field: &Field,
    gen: &GeneratorPair,
    rng: &mut ChaCha8Rng,
    params: &LabelParams,
) -> Result<(Vec<u32>, Vec<u32>, LabelStats), ConstructError> {
    let problem = LabelProblem::new(field, gen)?;
    let mut stats = LabelStats::default();
    let gamma = problem.label_gamma(rng, params, &mut stats)?;
    let (gamma, delta) = problem.label_delta(&gamma, rng, params, &mut stats)?;
    Ok((gamma, delta, stats))
}
