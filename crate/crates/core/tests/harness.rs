mod common;

use qldpc::harness::{run_point, run_sweep, summaries_csv, summarize, wilson_interval, write_jsonl};
use qldpc::{Criterion, SweepParams, Tag, TrialResult};

fn params(workers: usize) -> SweepParams {
    SweepParams {
        trials: 120,
        workers,
        master_seed: 77,
        chunk: 16,
        ..SweepParams::default()
    }
}

#[test]
fn results_do_not_depend_on_worker_count() {
    let code = common::example_code(3, 1);
    let a = run_point(&code, 0.08, &params(1)).unwrap();
    let b = run_point(&code, 0.08, &params(4)).unwrap();
    let c = run_point(&code, 0.08, &params(1)).unwrap();
    assert_eq!(a, b);
    assert_eq!(a, c);
    assert!(a.iter().enumerate().all(|(i, r)| r.trial_id == i as u64));
}

#[test]
fn early_stop_is_deterministic() {
    let code = common::example_code(3, 1);
    let p = |w| SweepParams {
        max_failures: Some(3),
        ..params(w)
    };
    let a = run_point(&code, 0.2, &p(1)).unwrap();
    let b = run_point(&code, 0.2, &p(3)).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.len() % 16, 0);
    assert!(a.len() < 120);
}

#[test]
fn noiseless_point_never_fails() {
    let code = common::example_code(3, 2);
    let (s, r) = run_sweep(&code, &[0.0], &params(2)).unwrap();
    assert_eq!(s[0].fer, 0.0);
    assert_eq!(s[0].ci_low, 0.0);
    assert!(r.iter().all(|t| t.tag == Tag::ExactSuccess && t.iterations == 0));
}

#[test]
fn degenerate_rate_bounded_by_exact_rate() {
    let code = common::example_code(3, 3);
    for p in [0.05, 0.1, 0.15] {
        let res = run_point(&code, p, &params(2)).unwrap();
        let deg = summarize(p, Criterion::Degenerate, &res);
        let ex = summarize(p, Criterion::Exact, &res);
        assert!(deg.fer_degenerate <= deg.fer_exact);
        assert_eq!(deg.fer, deg.fer_degenerate);
        assert_eq!(ex.fer, ex.fer_exact);
        assert!(deg.ci_low <= deg.fer && deg.fer <= deg.ci_high);
        assert_eq!(
            deg.logical_errors + deg.detected_failures,
            (deg.fer_degenerate * res.len() as f64).round() as usize
        );
    }
}

#[test]
fn wilson_interval_edges() {
    assert_eq!(wilson_interval(0, 0), (0.0, 1.0));
    let (lo, hi) = wilson_interval(10, 10);
    assert_eq!(hi, 1.0);
    assert!(lo > 0.69 && lo < 0.73, "{lo}");
}

#[test]
fn output_formats() {
    let code = common::example_code(3, 4);
    let (s, r) = run_sweep(
        &code,
        &[0.05, 0.1],
        &SweepParams {
            trials: 20,
            ..params(1)
        },
    )
    .unwrap();
    let mut buf = Vec::new();
    write_jsonl(&mut buf, &r).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let back: Vec<TrialResult> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(back, r);
    let first: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    for key in [
        "trial_id",
        "seed",
        "p_d",
        "tag",
        "failure",
        "iterations",
        "post_processing_used",
        "wall_time_ms",
    ] {
        assert!(first.get(key).is_some(), "{key}");
    }
    let csv = summaries_csv(&s);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "p_D,FER,CI_low,CI_high");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("0.05,"));
}
