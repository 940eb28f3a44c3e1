use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use qldpc::affine::girth;
use qldpc::channel::{hashing_bound, hashing_threshold};
use qldpc::construct::{check_criterion_b, check_criterion_c, check_requirement1, construct, ConstructParams, Design};
use qldpc::cycles::{cycle_determinant, distance_upper_bound, CycleError};
use qldpc::decoder::DecoderParams;
use qldpc::harness::{run_sweep, summaries_csv, write_jsonl, Criterion, SweepParams};
use qldpc::{CssCode, Field, Which};

#[derive(Parser)]
#[command(
    name = "qldpc",
    version,
    about = "Non-binary quantum LDPC codes: construction, analysis and decoding"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Search generators, assign labels and write a code file.
    Construct(ConstructArgs),
    /// Check a code file and print its report.
    Verify {
        file: PathBuf,
        /// Binary row pairs sampled in addition to the exhaustive symbol check.
        #[arg(long, default_value_t = 200)]
        samples: usize,
    },
    /// Monte Carlo frame error rate over the depolarizing channel.
    Simulate(SimulateArgs),
    /// Distance upper bound from short-cycle codewords.
    Distance {
        file: PathBuf,
        #[arg(long, default_value_t = 16)]
        max_cycle_len: usize,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Hashing bound of the depolarizing channel.
    Bound {
        /// Print the p_D at which the bound equals this rate.
        #[arg(long, value_parser = parse_num, conflicts_with = "p_d")]
        rate: Option<f64>,
        /// Print the bound at this p_D.
        #[arg(long = "p-d", value_parser = parse_num)]
        p_d: Option<f64>,
    },
    /// Dump the unavoidable-cycle catalog as JSON lines.
    Catalog {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = MatrixArg::Gamma)]
        which: MatrixArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ConstructArgs {
    #[arg(long = "P")]
    p: u64,
    #[arg(long, default_value_t = 8)]
    e: u32,
    #[arg(long = "L", default_value_t = 6)]
    l: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = DesignArg::Proposed)]
    design: DesignArg,
    /// Generator searches tried before giving up.
    #[arg(long, default_value_t = 50_000)]
    restarts: u64,
}

#[derive(Args)]
struct SimulateArgs {
    file: PathBuf,
    /// A value, a fraction like 1/20, or a range start:stop:step. Repeatable.
    #[arg(long = "p-d", required = true)]
    p_d: Vec<String>,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, value_enum, default_value_t = CriterionArg::Degenerate)]
    criterion: CriterionArg,
    #[arg(long, value_enum, default_value_t = DecoderArg::BpPost)]
    decoder: DecoderArg,
    #[arg(long, default_value_t = 200)]
    max_iters: usize,
    #[arg(long, default_value_t = 4)]
    stagnation_window: usize,
    #[arg(long, default_value_t = 8)]
    d_window: usize,
    #[arg(long, default_value_t = 2)]
    u: usize,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Stop a point after this many failures.
    #[arg(long)]
    max_failures: Option<usize>,
    /// Prefix for `<out>.jsonl` (trials) and `<out>.summary.json`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum DesignArg {
    Proposed,
    Conventional,
}

#[derive(Clone, Copy, ValueEnum)]
enum CriterionArg {
    Degenerate,
    Exact,
}

#[derive(Clone, Copy, ValueEnum)]
enum DecoderArg {
    Bp,
    BpPost,
}

#[derive(Clone, Copy, ValueEnum)]
enum MatrixArg {
    Gamma,
    Delta,
}

/// Decimal or `a/b`.
fn parse_num(s: &str) -> Result<f64, String> {
    let v = match s.split_once('/') {
        Some((a, b)) => {
            let a: f64 = a.trim().parse().map_err(|_| format!("bad number '{s}'"))?;
            let b: f64 = b.trim().parse().map_err(|_| format!("bad number '{s}'"))?;
            if b == 0.0 {
                return Err(format!("zero denominator in '{s}'"));
            }
            a / b
        }
        None => s.trim().parse().map_err(|_| format!("bad number '{s}'"))?,
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("bad number '{s}'"))
    }
}

/// Expands repeatable `--p-d` values; `a:b:step` includes `b` when it lies on the grid.
fn parse_p_list(items: &[String]) -> Result<Vec<f64>, String> {
    let mut out = Vec::new();
    for it in items {
        let parts: Vec<&str> = it.split(':').collect();
        match parts.as_slice() {
            [v] => out.push(parse_num(v)?),
            [a, b, step] => {
                let (a, b, step) = (parse_num(a)?, parse_num(b)?, parse_num(step)?);
                if step <= 0.0 || b < a {
                    return Err(format!("bad range '{it}'"));
                }
                let n = ((b - a) / step + 1e-9).floor() as usize;
                out.extend((0..=n).map(|i| a + i as f64 * step));
            }
            _ => return Err(format!("bad p_D '{it}'")),
        }
    }
    for &p in &out {
        if !(0.0..0.75).contains(&p) {
            return Err(format!("p_D = {p} outside [0, 3/4)"));
        }
    }
    Ok(out)
}

/// Usage problems found after parsing.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn load(path: &Path) -> Result<CssCode> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    CssCode::from_json(&text).with_context(|| format!("loading {}", path.display()))
}

fn cmd_construct(a: &ConstructArgs) -> Result<()> {
    if a.l != 6 {
        return Err(usage(format!(
            "--L {} unsupported: label assignment is implemented for L = 6",
            a.l
        )));
    }
    if a.p < 2 {
        return Err(usage("--P must be at least 2"));
    }
    let field = Field::with_default_poly(a.e).map_err(|e| usage(format!("--e {}: {e}", a.e)))?;
    let design = match a.design {
        DesignArg::Proposed => Design::Proposed,
        DesignArg::Conventional => Design::Conventional,
    };
    let params = ConstructParams {
        l: a.l,
        design,
        restarts: a.restarts,
        ..ConstructParams::new(a.p, a.seed)
    };
    let c = construct(&field, &params)?;
    let info = json!({ "seed": a.seed, "restart": c.restart, "design": design, "stats": c.stats });
    let code = CssCode::from_construction(field, &c, info)?;
    let report = code.verify_orthogonality(0, a.seed);
    if !report.ok {
        bail!("constructed code failed orthogonality at {:?}", report.first_violation);
    }
    log::info!("constructed P={} after {} restarts", a.p, c.restart);
    emit(a.out.as_deref(), &(code.to_json() + "\n"))
}

fn cmd_verify(path: &Path, samples: usize) -> Result<()> {
    let code = load(path)?;
    let orth = code.verify_orthogonality(samples, 0);
    let mut utcbc = serde_json::Map::new();
    for which in [Which::Gamma, Which::Delta] {
        let cat = code.catalog(which);
        let mut zero = [0usize; 3];
        let mut total = [0usize; 3];
        for rec in &cat.records {
            let j = rec.utcbc_j.expect("catalog records are unavoidable cycles");
            total[j] += 1;
            if cycle_determinant(&code.field, rec) == 0 {
                zero[j] += 1;
            }
        }
        utcbc.insert(format!("{which:?}"), json!({ "singular": zero, "total": total }));
    }
    let report = json!({
        "n": code.n(),
        "P": code.gen.p,
        "e": code.e(),
        "orthogonality": orth,
        "requirement1": check_requirement1(&code.gen),
        "criterion_b": check_criterion_b(&code.gen),
        "criterion_c": check_criterion_c(&code.hx, &code.hz),
        "girth": girth(&code.hx, &code.hz, 12),
        "utcbc": utcbc,
        "dimension": code.compute_dimension(),
    });
    println!("{}", serde_json::to_string_pretty(&report)?);
    if !orth.ok {
        bail!("orthogonality violated");
    }
    Ok(())
}

fn cmd_simulate(a: &SimulateArgs) -> Result<()> {
    let p_ds = parse_p_list(&a.p_d).map_err(usage)?;
    if a.trials == 0 || a.workers == 0 || a.u == 0 || a.d_window == 0 || a.stagnation_window == 0 {
        return Err(usage(
            "--trials, --workers, --u, --d-window and --stagnation-window must be positive",
        ));
    }
    let code = load(&a.file)?;
    let params = SweepParams {
        trials: a.trials,
        criterion: match a.criterion {
            CriterionArg::Degenerate => Criterion::Degenerate,
            CriterionArg::Exact => Criterion::Exact,
        },
        decoder: DecoderParams {
            max_iters: a.max_iters,
            stagnation_window: a.stagnation_window,
            d_window: a.d_window,
            u: a.u,
            post_process: matches!(a.decoder, DecoderArg::BpPost),
            ..DecoderParams::default()
        },
        master_seed: a.seed,
        workers: a.workers,
        max_failures: a.max_failures,
        ..SweepParams::default()
    };
    let (summaries, trials) = run_sweep(&code, &p_ds, &params)?;
    if let Some(prefix) = &a.out {
        let jsonl = prefix.with_extension("jsonl");
        let f = fs::File::create(&jsonl).with_context(|| format!("creating {}", jsonl.display()))?;
        write_jsonl(io::BufWriter::new(f), &trials)?;
        let summary = prefix.with_extension("summary.json");
        fs::write(&summary, serde_json::to_string_pretty(&summaries)?)
            .with_context(|| format!("writing {}", summary.display()))?;
    }
    match a.format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&summaries)?),
        Format::Csv => print!("{}", summaries_csv(&summaries)),
    }
    Ok(())
}

fn cmd_distance(path: &Path, max_len: usize, format: Format, out: Option<&Path>) -> Result<()> {
    if max_len < 4 || !max_len.is_multiple_of(2) {
        return Err(usage("--max-cycle-len must be an even number >= 4"));
    }
    let code = load(path)?;
    let b = match distance_upper_bound(&code, max_len) {
        Ok(b) => b,
        Err(CycleError::NoDeficientCycles(_)) => {
            let text = match format {
                Format::Json => json!({ "d": null, "max_len": max_len }).to_string() + "\n",
                Format::Csv => "w,A_X,A_Z\n".to_string(),
            };
            return emit(out, &text);
        }
    };
    let text = match format {
        Format::Json => serde_json::to_string_pretty(&json!({ "d": b.d(), "bound": b }))? + "\n",
        Format::Csv => b.to_csv(),
    };
    emit(out, &text)
}

fn cmd_bound(rate: Option<f64>, p_d: Option<f64>) -> Result<()> {
    match (rate, p_d) {
        (Some(r), _) => {
            let t = hashing_threshold(r).map_err(|e| usage(e.to_string()))?;
            println!("{}", json!({ "rate": r, "threshold": t }));
        }
        (None, Some(p)) => {
            if !(0.0..0.75).contains(&p) {
                return Err(usage(format!("p_D = {p} outside [0, 3/4)")));
            }
            println!("{}", json!({ "p_d": p, "rate": hashing_bound(p) }));
        }
        (None, None) => return Err(usage("bound needs --rate or --p-d")),
    }
    Ok(())
}

fn cmd_catalog(path: &Path, which: MatrixArg, out: Option<&Path>) -> Result<()> {
    let code = load(path)?;
    let which = match which {
        MatrixArg::Gamma => Which::Gamma,
        MatrixArg::Delta => Which::Delta,
    };
    let mut text = String::new();
    for rec in &code.catalog(which).records {
        text.push_str(&serde_json::to_string(rec)?);
        text.push('\n');
    }
    emit(out, &text)
}

fn run(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Construct(a) => cmd_construct(&a),
        Cmd::Verify { file, samples } => cmd_verify(&file, samples),
        Cmd::Simulate(a) => cmd_simulate(&a),
        Cmd::Distance {
            file,
            max_cycle_len,
            format,
            out,
        } => cmd_distance(&file, max_cycle_len, format, out.as_deref()),
        Cmd::Bound { rate, p_d } => cmd_bound(rate, p_d),
        Cmd::Catalog { file, which, out } => cmd_catalog(&file, which, out.as_deref()),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("QLDPC_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is::<Usage>() => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
