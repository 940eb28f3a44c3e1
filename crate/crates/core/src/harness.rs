//! Monte Carlo frame-error-rate estimation.

use std::io::Write;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{sample_noise, symbol_prior, syndromes, ChannelError};
use crate::code::CssCode;
use crate::decoder::{classify_outcome, decode, DecodeOutcome, DecoderParams, FailureReason, Tag};
use crate::derive_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    Degenerate,
    Exact,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrialResult {
    pub trial_id: u64,
    pub seed: u64,
    pub p_d: f64,
    pub tag: Tag,
    pub failure: Option<FailureReason>,
    pub iterations: usize,
    pub post_processing_used: bool,
    pub wall_time_ms: f64,
}

/// Wall time is not part of the identity of a trial.
impl PartialEq for TrialResult {
    fn eq(&self, o: &Self) -> bool {
        self.trial_id == o.trial_id
            && self.seed == o.seed
            && self.p_d.to_bits() == o.p_d.to_bits()
            && self.tag == o.tag
            && self.failure == o.failure
            && self.iterations == o.iterations
            && self.post_processing_used == o.post_processing_used
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FerSummary {
    pub p_d: f64,
    pub trials: usize,
    pub criterion: Criterion,
    pub logical_errors: usize,
    pub detected_failures: usize,
    /// Trials whose estimate differs from the true noise.
    pub exact_failures: usize,
    pub fer_degenerate: f64,
    pub fer_exact: f64,
    /// FER under `criterion`, with its Wilson 95% interval.
    pub fer: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepParams {
    pub trials: usize,
    pub criterion: Criterion,
    pub decoder: DecoderParams,
    pub master_seed: u64,
    pub workers: usize,
    /// Stop a p_D point once this many failures (under `criterion`) are seen.
    pub max_failures: Option<usize>,
    /// Early stopping is evaluated only at chunk boundaries, so results do not
    /// depend on the worker count.
    pub chunk: usize,
}

impl Default for SweepParams {
    fn default() -> Self {
        SweepParams {
            trials: 100,
            criterion: Criterion::Degenerate,
            decoder: DecoderParams::default(),
            master_seed: 0,
            workers: 1,
            max_failures: None,
            chunk: 64,
        }
    }
}

pub fn wilson_interval(failures: usize, trials: usize) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959_963_984_540_054;
    let n = trials as f64;
    let p = failures as f64 / n;
    let denom = 1.0 + z * z / n;
    let centre = (p + z * z / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / denom;
    let lo = if failures == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if failures == trials {
        1.0
    } else {
        (centre + half).min(1.0)
    };
    (lo, hi)
}

pub fn trial_seed(master: u64, p_d: f64, trial: u64) -> u64 {
    derive_seed(derive_seed(master, p_d.to_bits()), trial)
}

pub fn run_trial(
    code: &CssCode,
    p_d: f64,
    trial: u64,
    master: u64,
    params: &DecoderParams,
) -> Result<TrialResult, ChannelError> {
    let seed = trial_seed(master, p_d, trial);
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = sample_noise(&code.field, p_d, code.symbols(), &mut rng)?;
    let prior = symbol_prior(&code.field, p_d)?;
    let out = decode(code, &syndromes(code, &noise), &prior, params);
    let tag = classify_outcome(code, &out, &noise);
    let failure = match &out {
        DecodeOutcome::DetectedFailure { reason, .. } => Some(*reason),
        _ => None,
    };
    Ok(TrialResult {
        trial_id: trial,
        seed,
        p_d,
        tag,
        failure,
        iterations: out.iterations(),
        post_processing_used: matches!(out, DecodeOutcome::PostProcessed { .. }),
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

pub fn summarize(p_d: f64, criterion: Criterion, results: &[TrialResult]) -> FerSummary {
    let trials = results.len();
    let logical_errors = results.iter().filter(|r| r.tag == Tag::LogicalError).count();
    let detected_failures = results.iter().filter(|r| r.tag == Tag::DetectedFailure).count();
    let exact_failures = results.iter().filter(|r| !r.tag.is_exact_success()).count();
    let deg = logical_errors + detected_failures;
    let rate = |k: usize| {
        if trials == 0 {
            0.0
        } else {
            k as f64 / trials as f64
        }
    };
    let chosen = match criterion {
        Criterion::Degenerate => deg,
        Criterion::Exact => exact_failures,
    };
    let (ci_low, ci_high) = wilson_interval(chosen, trials);
    FerSummary {
        p_d,
        trials,
        criterion,
        logical_errors,
        detected_failures,
        exact_failures,
        fer_degenerate: rate(deg),
        fer_exact: rate(exact_failures),
        fer: rate(chosen),
        ci_low,
        ci_high,
    }
}

fn is_failure(r: &TrialResult, c: Criterion) -> bool {
    match c {
        Criterion::Degenerate => !r.tag.is_degenerate_success(),
        Criterion::Exact => !r.tag.is_exact_success(),
    }
}

/// Runs one p_D point; trials are returned in trial order.
pub fn run_point(code: &CssCode, p_d: f64, params: &SweepParams) -> Result<Vec<TrialResult>, ChannelError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(params.workers.max(1))
        .build()
        .expect("thread pool");
    let chunk = params.chunk.max(1) as u64;
    let mut results: Vec<TrialResult> = Vec::with_capacity(params.trials);
    let mut failures = 0;
    let mut next = 0u64;
    while next < params.trials as u64 {
        let end = (next + chunk).min(params.trials as u64);
        let batch: Result<Vec<_>, _> = pool.install(|| {
            (next..end)
                .into_par_iter()
                .map(|t| run_trial(code, p_d, t, params.master_seed, &params.decoder))
                .collect()
        });
        let batch = batch?;
        failures += batch.iter().filter(|r| is_failure(r, params.criterion)).count();
        results.extend(batch);
        next = end;
        log::debug!("p_D={p_d}: {} trials, {failures} failures", results.len());
        if params.max_failures.is_some_and(|m| failures >= m) {
            break;
        }
    }
    Ok(results)
}

pub fn run_sweep(
    code: &CssCode,
    p_ds: &[f64],
    params: &SweepParams,
) -> Result<(Vec<FerSummary>, Vec<TrialResult>), ChannelError> {
    let mut summaries = Vec::with_capacity(p_ds.len());
    let mut all = Vec::new();
    for &p in p_ds {
        let res = run_point(code, p, params)?;
        let s = summarize(p, params.criterion, &res);
        log::info!(
            "p_D={p}: FER={:.4e} [{:.3e}, {:.3e}] over {} trials",
            s.fer,
            s.ci_low,
            s.ci_high,
            s.trials
        );
        summaries.push(s);
        all.extend(res);
    }
    Ok((summaries, all))
}

pub fn write_jsonl<W: Write>(mut w: W, results: &[TrialResult]) -> std::io::Result<()> {
    for r in results {
        serde_json::to_writer(&mut w, r)?;
        writeln!(w)?;
    }
    Ok(())
}

pub fn summaries_csv(summaries: &[FerSummary]) -> String {
    let mut s = String::from("p_D,FER,CI_low,CI_high\n");
    for x in summaries {
        s.push_str(&format!("{},{},{},{}\n", x.p_d, x.fer, x.ci_low, x.ci_high));
    }
    s
}
