//! Joint belief propagation over GF(q) for the X and Z noise, coupled through
//! the symbol prior, with cycle-trap post-processing.
//!
//! The X side estimates `xi` from `sigma = H_Δ xi`; the Z side estimates
//! `zeta` from `tau = H_Γ zeta`.

use serde::{Deserialize, Serialize};

use crate::channel::{NoisePair, Prior, SyndromePair};
use crate::code::{v_expand, w_expand, CssCode, NbMatrix, Side, Which};
use crate::cycles::Catalog;
use crate::galois::{Field, Gf};
use crate::linalg::gf_solve;

const FLOOR: f64 = 1e-30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecoderParams {
    pub max_iters: usize,
    /// Warm-up iterations before stagnation may fire.
    pub l_min: usize,
    /// Consecutive iterations with an identical change set that count as stagnation.
    pub stagnation_window: usize,
    /// Window length of the change history.
    pub d_window: usize,
    /// Maximum number of cycles in an estimated trap.
    pub u: usize,
    pub post_process: bool,
}

impl Default for DecoderParams {
    fn default() -> Self {
        DecoderParams {
            max_iters: 200,
            l_min: 20,
            stagnation_window: 4,
            d_window: 8,
            u: 2,
            post_process: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FailureReason {
    CycleEstimationNull,
    NoSolution,
    Length2Lplus4Trap,
    IterationLimit,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum DecodeOutcome {
    Converged {
        xi: Vec<Gf>,
        zeta: Vec<Gf>,
        iterations: usize,
    },
    /// `cycles` lists `(matrix, catalog index)` pairs used by the repair.
    PostProcessed {
        xi: Vec<Gf>,
        zeta: Vec<Gf>,
        iterations: usize,
        cycles: Vec<(Which, usize)>,
    },
    DetectedFailure {
        reason: FailureReason,
        iterations: usize,
    },
}

impl DecodeOutcome {
    pub fn iterations(&self) -> usize {
        match self {
            DecodeOutcome::Converged { iterations, .. }
            | DecodeOutcome::PostProcessed { iterations, .. }
            | DecodeOutcome::DetectedFailure { iterations, .. } => *iterations,
        }
    }

    pub fn estimates(&self) -> Option<(&[Gf], &[Gf])> {
        match self {
            DecodeOutcome::Converged { xi, zeta, .. } | DecodeOutcome::PostProcessed { xi, zeta, .. } => {
                Some((xi, zeta))
            }
            DecodeOutcome::DetectedFailure { .. } => None,
        }
    }
}

/// Truth-aware evaluation of an outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Tag {
    /// Estimates equal the true noise (also a degenerate success).
    ExactSuccess,
    /// Residuals lie in the stabilizer row spaces.
    DegenerateSuccess,
    /// Syndromes match but a residual is a nontrivial logical operator.
    LogicalError,
    DetectedFailure,
}

impl Tag {
    pub fn is_degenerate_success(self) -> bool {
        matches!(self, Tag::ExactSuccess | Tag::DegenerateSuccess)
    }

    pub fn is_exact_success(self) -> bool {
        self == Tag::ExactSuccess
    }
}

pub fn classify_outcome(code: &CssCode, outcome: &DecodeOutcome, truth: &NoisePair) -> Tag {
    let Some((xi, zeta)) = outcome.estimates() else {
        return Tag::DetectedFailure;
    };
    if xi == truth.xi.as_slice() && zeta == truth.zeta.as_slice() {
        return Tag::ExactSuccess;
    }
    let rx: Vec<Gf> = xi.iter().zip(&truth.xi).map(|(a, b)| a ^ b).collect();
    let rz: Vec<Gf> = zeta.iter().zip(&truth.zeta).map(|(a, b)| a ^ b).collect();
    let f = &code.field;
    let ok_x = code.dual_membership(Side::X, &w_expand(f, &rx)).expect("length n");
    let ok_z = code.dual_membership(Side::Z, &v_expand(f, &rz)).expect("length n");
    if ok_x && ok_z {
        Tag::DegenerateSuccess
    } else {
        Tag::LogicalError
    }
}

/// In-place Walsh-Hadamard transform over `(F_2)^e` (unnormalized).
pub fn wht(a: &mut [f64]) {
    let n = a.len();
    let mut h = 1;
    while h < n {
        for block in a.chunks_exact_mut(2 * h) {
            let (x, y) = block.split_at_mut(h);
            for (u, v) in x.iter_mut().zip(y.iter_mut()) {
                let (s, d) = (*u + *v, *u - *v);
                *u = s;
                *v = d;
            }
        }
        h *= 2;
    }
}

fn normalize(v: &mut [f64]) {
    let mut s = 0.0;
    for x in v.iter_mut() {
        if !(*x > FLOOR) {
            *x = FLOOR;
        }
        s += *x;
    }
    for x in v.iter_mut() {
        *x /= s;
    }
}

/// Check-to-variable messages of one check with coefficients `h` and syndrome
/// symbol `s`: `out[t][x]` is the probability that the other neighbours sum
/// to `s + h_t x`, computed with Walsh-Hadamard products.
pub fn check_update_fft(field: &Field, h: &[Gf], s: Gf, mu: &[&[f64]], out: &mut [Vec<f64>]) {
    let mut ws = CheckScratch::new(field.q(), h.len());
    ws.update(field, h, s, mu, out);
}

/// Reusable buffers for [`check_update_fft`].
pub struct CheckScratch {
    q: usize,
    spec: Vec<f64>,
    suffix: Vec<f64>,
    prefix: Vec<f64>,
    perm: Vec<usize>,
}

impl CheckScratch {
    pub fn new(q: usize, l: usize) -> Self {
        CheckScratch {
            q,
            spec: vec![0.0; l * q],
            suffix: vec![0.0; (l + 1) * q],
            prefix: vec![0.0; q],
            perm: vec![0; l * q],
        }
    }

    pub fn update(&mut self, field: &Field, h: &[Gf], s: Gf, mu: &[&[f64]], out: &mut [Vec<f64>]) {
        let q = self.q;
        let l = h.len();
        for (t, &ht) in h.iter().enumerate() {
            let perm = &mut self.perm[t * q..(t + 1) * q];
            for (x, p) in perm.iter_mut().enumerate() {
                *p = field.mul(ht, x as Gf) as usize;
            }
            let rho = &mut self.spec[t * q..(t + 1) * q];
            for (x, &m) in mu[t].iter().enumerate() {
                rho[perm[x]] = m;
            }
            wht(rho);
        }
        // suffix block t = prod_{t' >= t} spec[t']
        self.suffix[l * q..].fill(1.0);
        for t in (0..l).rev() {
            let (lo, hi) = self.suffix.split_at_mut((t + 1) * q);
            for ((a, &b), &c) in lo[t * q..].iter_mut().zip(&hi[..q]).zip(&self.spec[t * q..(t + 1) * q]) {
                *a = b * c;
            }
        }
        self.prefix.fill(1.0);
        for t in 0..l {
            let o = &mut out[t];
            for ((o, &p), &sf) in o
                .iter_mut()
                .zip(&self.prefix)
                .zip(&self.suffix[(t + 1) * q..(t + 2) * q])
            {
                *o = p * sf;
            }
            wht(o);
            let perm = &self.perm[t * q..(t + 1) * q];
            let conv = &mut self.suffix[(t + 1) * q..(t + 2) * q];
            conv.copy_from_slice(o);
            for x in 0..q {
                o[x] = conv[s as usize ^ perm[x]];
            }
            normalize(o);
            for (p, &sp) in self.prefix.iter_mut().zip(&self.spec[t * q..(t + 1) * q]) {
                *p *= sp;
            }
        }
    }
}

/// Direct evaluation of the check rule by enumerating all neighbour assignments.
pub fn check_update_brute(field: &Field, h: &[Gf], s: Gf, mu: &[&[f64]]) -> Vec<Vec<f64>> {
    let q = field.q();
    let l = h.len();
    let mut out = vec![vec![0.0; q]; l];
    let total = q.pow(l as u32);
    for idx in 0..total {
        let mut xs = vec![0usize; l];
        let mut r = idx;
        for x in xs.iter_mut() {
            *x = r % q;
            r /= q;
        }
        let sum = xs.iter().zip(h).fold(0, |acc, (&x, &hh)| acc ^ field.mul(hh, x as Gf));
        if sum != s {
            continue;
        }
        for t in 0..l {
            let p: f64 = (0..l).filter(|&u| u != t).map(|u| mu[u][xs[u]]).product();
            out[t][xs[t]] += p;
        }
    }
    for o in out.iter_mut() {
        normalize(o);
    }
    out
}

/// `kappa_X(xi) = sum_zeta p(xi, zeta) lambda_Z(zeta)` by the dense double loop.
pub fn couple_dense(prior: &Prior, lambda_other: &[f64], x_side: bool) -> Vec<f64> {
    let q = prior.q;
    let mut k = vec![0.0; q];
    for (a, ka) in k.iter_mut().enumerate() {
        *ka = (0..q)
            .map(|b| if x_side { prior.table[a * q + b] } else { prior.table[b * q + a] } * lambda_other[b])
            .sum();
    }
    normalize(&mut k);
    k
}

/// Same as [`couple_dense`] for a per-bit product prior: the kernel is applied
/// along each bit of `v(xi)` / `w(zeta)`, `O(q e)` per node.
pub fn couple_factored(field: &Field, t: &[[f64; 2]; 2], lambda_other: &[f64], x_side: bool) -> Vec<f64> {
    let q = field.q();
    let e = field.e() as usize;
    // Re-index the input by its bit pattern.
    let mut buf = vec![0.0; q];
    for (s, &l) in lambda_other.iter().enumerate() {
        let bits = if x_side { field.w(s as Gf) } else { field.v(s as Gf) };
        buf[bits as usize] = l;
    }
    // Apply T (indexed [x][z]) along each bit: X side maps z-bits to x-bits.
    for k in 0..e {
        let bit = 1 << k;
        for i in 0..q {
            if i & bit == 0 {
                let (b0, b1) = (buf[i], buf[i | bit]);
                if x_side {
                    buf[i] = t[0][0] * b0 + t[0][1] * b1;
                    buf[i | bit] = t[1][0] * b0 + t[1][1] * b1;
                } else {
                    buf[i] = t[0][0] * b0 + t[1][0] * b1;
                    buf[i | bit] = t[0][1] * b0 + t[1][1] * b1;
                }
            }
        }
    }
    let mut k: Vec<f64> = (0..q)
        .map(|s| {
            let bits = if x_side { field.v(s as Gf) } else { field.w(s as Gf) };
            buf[bits as usize]
        })
        .collect();
    normalize(&mut k);
    k
}

/// Grows a set of catalog cycles sharing at least two columns with
/// `k_d` until it covers `k_d`; `None` if more than `u` cycles are needed or
/// coverage is never reached. `k_d` must be sorted.
pub fn estimate_cycle_set(catalog: &Catalog, k_d: &[usize], u: usize) -> Option<Vec<usize>> {
    let mut chosen: Vec<usize> = Vec::new();
    for &j in k_d {
        for &ci in &catalog.by_column[j] {
            let rec = &catalog.records[ci];
            let hits = rec.columns.iter().filter(|c| k_d.binary_search(c).is_ok()).count();
            if hits >= 2 {
                if !chosen.contains(&ci) {
                    chosen.push(ci);
                }
                if chosen.len() > u {
                    return None;
                }
                let covered = k_d
                    .iter()
                    .all(|c| chosen.iter().any(|&x| catalog.records[x].columns.contains(c)));
                if covered {
                    return Some(chosen);
                }
            }
        }
    }
    None
}

/// Solves `H_K x_K = s + H_{K̄} est_{K̄}` on the rows touching `k`; free
/// variables keep their current estimates. Returns the updated estimate.
pub fn post_process(field: &Field, h: &NbMatrix, k: &[usize], est: &[Gf], syndrome: &[Gf]) -> Option<Vec<Gf>> {
    let mut rows: Vec<usize> = k.iter().flat_map(|&c| h.col(c).iter().map(|&(r, _)| r)).collect();
    rows.sort_unstable();
    rows.dedup();
    let pos = |c: usize| k.iter().position(|&x| x == c);
    let mut a = Vec::with_capacity(rows.len());
    let mut b = Vec::with_capacity(rows.len());
    for &r in &rows {
        let mut row = vec![0 as Gf; k.len()];
        let mut rhs = syndrome[r];
        for &(c, v) in h.row(r) {
            match pos(c) {
                Some(i) => row[i] = v,
                None => rhs ^= field.mul(v, est[c]),
            }
        }
        a.push(row);
        b.push(rhs);
    }
    let hint: Vec<Gf> = k.iter().map(|&c| est[c]).collect();
    let sol = gf_solve(field, &a, &b, &hint)?;
    let mut out = est.to_vec();
    for (&c, &x) in k.iter().zip(&sol) {
        out[c] = x;
    }
    Some(out)
}

/// Per-iteration statistics of one side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SideStats {
    pub k_d: usize,
    pub i_d: usize,
    pub unsatisfied: usize,
}

struct SideState {
    which: Which,
    syndrome: Vec<Gf>,
    /// Edge `i * L + t` is entry `t` of row `i`.
    col_edges: Vec<Vec<usize>>,
    mu: Vec<f64>,
    nu: Vec<f64>,
    lambda: Vec<f64>,
    kappa: Vec<f64>,
    est: Vec<Gf>,
    frozen: Option<Vec<Gf>>,
    last_change: Vec<usize>,
    last_unsat: Vec<usize>,
    prev_kd: Vec<usize>,
    stable: usize,
    failed_sets: Vec<Vec<usize>>,
    satisfied: bool,
}

impl SideState {
    fn new(h: &NbMatrix, which: Which, syndrome: &[Gf], q: usize) -> Self {
        let l = h.l;
        let mut col_edges = vec![Vec::with_capacity(h.j); h.n];
        for (i, row) in h.rows().iter().enumerate() {
            for (t, &(c, _)) in row.iter().enumerate() {
                col_edges[c].push(i * l + t);
            }
        }
        let edges = h.m * l;
        let uni = 1.0 / q as f64;
        SideState {
            which,
            syndrome: syndrome.to_vec(),
            col_edges,
            mu: vec![uni; edges * q],
            nu: vec![uni; edges * q],
            lambda: vec![uni; h.n * q],
            kappa: vec![uni; h.n * q],
            est: vec![0; h.n],
            frozen: None,
            last_change: vec![0; h.n],
            last_unsat: vec![0; h.m],
            prev_kd: Vec::new(),
            stable: 0,
            failed_sets: Vec::new(),
            satisfied: false,
        }
    }

    fn current(&self) -> &[Gf] {
        self.frozen.as_deref().unwrap_or(&self.est)
    }
}

/// Decoder state for one syndrome pair. Index 0 is the X side, 1 the Z side.
pub struct Decoder<'a> {
    code: &'a CssCode,
    prior: &'a Prior,
    params: DecoderParams,
    sides: [SideState; 2],
    iteration: usize,
    used_cycles: Vec<(Which, usize)>,
    scratch: Vec<Vec<f64>>,
    ws: CheckScratch,
}

impl<'a> Decoder<'a> {
    pub fn new(code: &'a CssCode, syn: &SyndromePair, prior: &'a Prior, params: DecoderParams) -> Self {
        let q = code.field.q();
        let x = SideState::new(&code.hdelta, Which::Delta, &syn.sigma, q);
        let z = SideState::new(&code.hgamma, Which::Gamma, &syn.tau, q);
        let l = code.hgamma.l;
        let mut d = Decoder {
            code,
            prior,
            params,
            sides: [x, z],
            iteration: 0,
            used_cycles: Vec::new(),
            scratch: vec![vec![0.0; q]; l],
            ws: CheckScratch::new(q, l),
        };
        // Coupling with uniform lambda gives the prior marginals; mu starts there.
        for s in 0..2 {
            d.couple(s);
            d.variable_update(s);
        }
        d
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    fn matrix(&self, s: usize) -> &'a NbMatrix {
        self.code.matrix(self.sides[s].which)
    }

    pub fn estimates(&self) -> (&[Gf], &[Gf]) {
        (self.sides[0].current(), self.sides[1].current())
    }

    /// Every message vector of both sides, for normalization checks.
    pub fn messages(&self) -> impl Iterator<Item = &[f64]> {
        let q = self.code.field.q();
        self.sides.iter().flat_map(move |s| {
            s.mu.chunks(q)
                .chain(s.nu.chunks(q))
                .chain(s.lambda.chunks(q))
                .chain(s.kappa.chunks(q))
        })
    }

    fn check_update(&mut self, s: usize) {
        let field = &self.code.field;
        let q = field.q();
        let h = self.matrix(s);
        let l = h.l;
        let side = &mut self.sides[s];
        let mut coeffs = vec![0 as Gf; l];
        for (i, row) in h.rows().iter().enumerate() {
            for (t, &(_, v)) in row.iter().enumerate() {
                coeffs[t] = v;
            }
            let base = i * l * q;
            let mu: Vec<&[f64]> = (0..l).map(|t| &side.mu[base + t * q..base + (t + 1) * q]).collect();
            self.ws.update(field, &coeffs, side.syndrome[i], &mu, &mut self.scratch);
            for t in 0..l {
                side.nu[base + t * q..base + (t + 1) * q].copy_from_slice(&self.scratch[t]);
            }
        }
    }

    fn beliefs(&mut self, s: usize) {
        let q = self.code.field.q();
        let side = &mut self.sides[s];
        for (c, edges) in side.col_edges.iter().enumerate() {
            let lam = &mut side.lambda[c * q..(c + 1) * q];
            lam.fill(1.0);
            for &e in edges {
                for (x, &v) in lam.iter_mut().zip(&side.nu[e * q..(e + 1) * q]) {
                    *x *= v;
                }
            }
            normalize(lam);
        }
    }

    fn couple(&mut self, s: usize) {
        let field = &self.code.field;
        let q = field.q();
        let x_side = s == 0;
        let (a, b) = self.sides.split_at_mut(1);
        let (me, other) = if x_side { (&mut a[0], &b[0]) } else { (&mut b[0], &a[0]) };
        for c in 0..me.est.len() {
            let lam = &other.lambda[c * q..(c + 1) * q];
            let k = match &self.prior.bit_kernel {
                Some(t) => couple_factored(field, t, lam, x_side),
                None => couple_dense(self.prior, lam, x_side),
            };
            me.kappa[c * q..(c + 1) * q].copy_from_slice(&k);
        }
    }

    fn estimate(&mut self, s: usize) {
        let q = self.code.field.q();
        let it = self.iteration;
        let side = &mut self.sides[s];
        for c in 0..side.est.len() {
            let k = &side.kappa[c * q..(c + 1) * q];
            let l = &side.lambda[c * q..(c + 1) * q];
            let mut best = 0;
            let mut best_v = f64::NEG_INFINITY;
            for x in 0..q {
                let v = k[x] * l[x];
                if v > best_v {
                    best_v = v;
                    best = x;
                }
            }
            if side.est[c] != best as Gf {
                side.est[c] = best as Gf;
                side.last_change[c] = it;
            }
        }
    }

    fn variable_update(&mut self, s: usize) {
        let q = self.code.field.q();
        let side = &mut self.sides[s];
        for (c, edges) in side.col_edges.iter().enumerate() {
            for &e in edges {
                let mut m: Vec<f64> = side.kappa[c * q..(c + 1) * q].to_vec();
                for &e2 in edges.iter().filter(|&&x| x != e) {
                    for (x, &v) in m.iter_mut().zip(&side.nu[e2 * q..(e2 + 1) * q]) {
                        *x *= v;
                    }
                }
                normalize(&mut m);
                side.mu[e * q..(e + 1) * q].copy_from_slice(&m);
            }
        }
    }

    /// Unsatisfied checks for the side's current estimate; updates the unsatisfied history.
    fn refresh_syndrome(&mut self, s: usize) -> usize {
        let h = self.matrix(s);
        let it = self.iteration;
        let side = &mut self.sides[s];
        let got = h.mul_vec(&self.code.field, side.current());
        let mut bad = 0;
        for (i, (&a, &b)) in got.iter().zip(&side.syndrome).enumerate() {
            if a != b {
                side.last_unsat[i] = it;
                bad += 1;
            }
        }
        side.satisfied = bad == 0;
        bad
    }

    /// Columns whose estimate changed during the last `d` iterations.
    pub fn change_set(&self, s: usize) -> Vec<usize> {
        let lo = (self.iteration + 1).saturating_sub(self.params.d_window).max(1);
        let side = &self.sides[s];
        (0..side.est.len())
            .filter(|&c| side.last_change[c] >= lo && side.last_change[c] > 0)
            .collect()
    }

    /// Checks unsatisfied at some point during the last `d` iterations.
    pub fn unsatisfied_set(&self, s: usize) -> Vec<usize> {
        let lo = (self.iteration + 1).saturating_sub(self.params.d_window).max(1);
        let side = &self.sides[s];
        (0..side.last_unsat.len())
            .filter(|&i| side.last_unsat[i] >= lo && side.last_unsat[i] > 0)
            .collect()
    }

    /// One flooding round; returns per-side statistics.
    pub fn step(&mut self) -> [SideStats; 2] {
        self.iteration += 1;
        for s in 0..2 {
            self.check_update(s);
            self.beliefs(s);
        }
        for s in 0..2 {
            self.couple(s);
        }
        let mut stats = [SideStats {
            k_d: 0,
            i_d: 0,
            unsatisfied: 0,
        }; 2];
        for s in 0..2 {
            self.estimate(s);
            self.variable_update(s);
            stats[s].unsatisfied = self.refresh_syndrome(s);
            stats[s].k_d = self.change_set(s).len();
            stats[s].i_d = self.unsatisfied_set(s).len();
        }
        stats
    }

    /// Stagnation test for side `s`; updates the stability counter.
    fn stagnates(&mut self, s: usize) -> Option<Vec<usize>> {
        let kd = self.change_set(s);
        let it = self.iteration;
        let p = self.params;
        let side = &mut self.sides[s];
        if side.satisfied || kd.is_empty() {
            side.stable = 0;
            side.prev_kd = kd;
            return None;
        }
        if kd == side.prev_kd {
            side.stable += 1;
        } else {
            side.stable = 1;
            side.prev_kd = kd.clone();
        }
        (it >= p.l_min && side.stable >= p.stagnation_window).then_some(kd)
    }

    /// Cycle estimation and linear repair on one side for change set `k_d`
    /// (sorted). `Ok(true)` freezes the side with a syndrome-consistent estimate;
    /// `Ok(false)` records `k_d` as tried.
    pub fn repair_side(&mut self, side: Side, k_d: Vec<usize>) -> Result<bool, FailureReason> {
        self.repair(if side == Side::X { 0 } else { 1 }, k_d)
    }

    fn repair(&mut self, s: usize, kd: Vec<usize>) -> Result<bool, FailureReason> {
        let side = &self.sides[s];
        if side.failed_sets.contains(&kd) {
            return Err(FailureReason::NoSolution);
        }
        let which = side.which;
        let catalog = self.code.catalog(which);
        let Some(cycles) = estimate_cycle_set(catalog, &kd, self.params.u) else {
            let l = self.matrix(s).l;
            return Err(if kd.len() == l + 2 {
                FailureReason::Length2Lplus4Trap
            } else {
                FailureReason::CycleEstimationNull
            });
        };
        let mut k: Vec<usize> = cycles
            .iter()
            .flat_map(|&ci| catalog.records[ci].columns.iter().copied())
            .collect();
        k.sort_unstable();
        k.dedup();
        let h = self.matrix(s);
        let side = &mut self.sides[s];
        side.stable = 0;
        match post_process(&self.code.field, h, &k, &side.est, &side.syndrome) {
            Some(sol) if h.mul_vec(&self.code.field, &sol) == side.syndrome => {
                side.frozen = Some(sol);
                side.satisfied = true;
                self.used_cycles.extend(cycles.into_iter().map(|c| (which, c)));
                Ok(true)
            }
            _ => {
                side.failed_sets.push(kd);
                Ok(false)
            }
        }
    }

    /// Runs to convergence, repair, or failure.
    pub fn run(mut self) -> DecodeOutcome {
        for s in 0..2 {
            self.refresh_syndrome(s);
        }
        if self.sides.iter().all(|s| s.satisfied) {
            return self.finish();
        }
        while self.iteration < self.params.max_iters {
            self.step();
            if self.sides.iter().all(|s| s.satisfied) {
                return self.finish();
            }
            if self.params.post_process {
                for s in 0..2 {
                    if self.sides[s].frozen.is_some() {
                        continue;
                    }
                    if let Some(kd) = self.stagnates(s) {
                        if let Err(reason) = self.repair(s, kd) {
                            return DecodeOutcome::DetectedFailure {
                                reason,
                                iterations: self.iteration,
                            };
                        }
                    }
                }
                if self.sides.iter().all(|s| s.satisfied) {
                    return self.finish();
                }
            }
        }
        DecodeOutcome::DetectedFailure {
            reason: FailureReason::IterationLimit,
            iterations: self.iteration,
        }
    }

    fn finish(self) -> DecodeOutcome {
        let xi = self.sides[0].current().to_vec();
        let zeta = self.sides[1].current().to_vec();
        if self.used_cycles.is_empty() {
            DecodeOutcome::Converged {
                xi,
                zeta,
                iterations: self.iteration,
            }
        } else {
            DecodeOutcome::PostProcessed {
                xi,
                zeta,
                iterations: self.iteration,
                cycles: self.used_cycles,
            }
        }
    }
}

pub fn decode(code: &CssCode, syn: &SyndromePair, prior: &Prior, params: &DecoderParams) -> DecodeOutcome {
    Decoder::new(code, syn, prior, *params).run()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wht_involution() {
        let mut a = vec![0.1, 0.2, 0.3, 0.4, 0.0, 0.0, 0.5, 0.5];
        let orig = a.clone();
        wht(&mut a);
        wht(&mut a);
        for (x, y) in a.iter().zip(&orig) {
            assert!((x / 8.0 - y).abs() < 1e-12);
        }
    }

    #[test]
    fn two_neighbour_check() {
        let f = Field::with_default_poly(3).unwrap();
        let h = [f.alpha_pow(2), f.alpha_pow(5)];
        let mu0 = [0.3, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1];
        let mu1 = [0.05, 0.25, 0.1, 0.1, 0.2, 0.1, 0.1, 0.1];
        let s = 3;
        let mut out = vec![vec![0.0; 8]; 2];
        check_update_fft(&f, &h, s, &[&mu0, &mu1], &mut out);
        // nu_0(x) = mu_1(h_1^-1 (s + h_0 x))
        for x in 0..8u16 {
            let y = f.div(s ^ f.mul(h[0], x), h[1]).unwrap();
            assert!((out[0][x as usize] - mu1[y as usize]).abs() < 1e-12);
        }
    }
}
