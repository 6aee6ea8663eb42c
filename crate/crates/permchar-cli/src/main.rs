//! `permchar` — batch computations over moments of characteristic
//! polynomials of random permutation matrices.
//!
//! Every command emits a machine-readable document (JSON by default, CSV
//! where tabular) and is reproducible: Monte Carlo commands default to the
//! fixed seed [`DEFAULT_SEED`] and identical invocations produce identical
//! output apart from the `elapsed_ms` field.
//!
//! Exit codes: 0 success, 1 computation failure (e.g. root-of-unity
//! rejection), 2 invalid arguments.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::{json, Value};

use permchar::asymptotics::verify_ratio;
use permchar::feller::{
    coupling_distribution_check, mc_moment, rng_from_seed, sample_z_infty, simulate_coupling,
};
use permchar::moments::{gf_moment_complex, gf_moment_integer, limit_complex, limit_integer};
use permchar::partitions::{brute_force_moment, exact_moment_partition_sum, MomentQuery};

/// Default RNG seed for all Monte Carlo commands.
pub const DEFAULT_SEED: u64 = 1729;

const SCHEMA: u32 = 1;

#[derive(Parser)]
#[command(name = "permchar", version, about, max_term_width = 100)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact moment by summation over cycle types (n <= 60)
    Exact(QueryArgs),
    /// Exact moment by generating-function coefficient extraction
    Gf(QueryArgs),
    /// Large-n limit of the moment (needs |x| < 1)
    Limit(LimitArgs),
    /// Feller-coupling simulation: coupling statistics, or a Monte Carlo
    /// moment estimate when --x/--s are given
    Simulate(SimulateArgs),
    /// Monte Carlo mean of the limiting infinite product Z_infty^s(x)
    Zinfty(ZinftyArgs),
    /// Exact-vs-predicted growth table on the unit circle (CSV)
    Asymptotic(AsymptoticArgs),
    /// Moment as a function of n over a range (CSV)
    Sweep(SweepArgs),
    /// Cross-check the three exact methods against each other
    Selftest,
}

#[derive(Args)]
struct QueryArgs {
    /// Matrix dimension
    #[arg(long)]
    n: usize,
    /// Evaluation point, "re,im" or "polar:r,phi"; repeat for several variables
    #[arg(long = "x", required = true)]
    xs: Vec<String>,
    /// Exponent, same forms as --x or a bare integer; one per --x
    #[arg(long = "s", required = true)]
    ss: Vec<String>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct LimitArgs {
    #[arg(long = "x", required = true)]
    xs: Vec<String>,
    #[arg(long = "s", required = true)]
    ss: Vec<String>,
    /// Truncation tolerance for non-integer exponents
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct SimulateArgs {
    /// Dimension(s); repeat for a grid
    #[arg(long = "n", required = true)]
    ns: Vec<usize>,
    /// Number of leading cycle counts to track
    #[arg(long, default_value_t = 5)]
    m: usize,
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Horizon multiplier: the xi sequence is drawn up to horizon*n
    #[arg(long, default_value_t = 8)]
    horizon: usize,
    /// With --s: estimate E[prod Z_n^s(x)] by Monte Carlo instead
    #[arg(long = "x")]
    xs: Vec<String>,
    #[arg(long = "s")]
    ss: Vec<String>,
    /// Write per-draw CSV (columns draw,m,c_m,y_m,boundary) to this path
    #[arg(long)]
    dump: Option<PathBuf>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct ZinftyArgs {
    #[arg(long)]
    x: String,
    #[arg(long)]
    s: String,
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Truncation tolerance for the infinite product and the reference limit
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct AsymptoticArgs {
    #[arg(long)]
    s1: u32,
    #[arg(long)]
    s2: u32,
    /// Point on the unit circle; prefer "polar:1,phi" so |x| is exactly 1
    #[arg(long)]
    x: String,
    /// Dimension(s); repeat for several rows
    #[arg(long = "n", required = true)]
    ns: Vec<u64>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    n_start: usize,
    #[arg(long)]
    n_end: usize,
    #[arg(long, default_value_t = 1)]
    n_step: usize,
    #[arg(long = "x", required = true)]
    xs: Vec<String>,
    #[arg(long = "s", required = true)]
    ss: Vec<String>,
    /// Exact method evaluated at each n
    #[arg(long, value_enum, default_value_t = SweepMethod::Gf)]
    method: SweepMethod,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Copy, Clone, ValueEnum)]
enum SweepMethod {
    Exact,
    Gf,
}

#[derive(Copy, Clone, PartialEq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    output: Format,
    /// Write the document here instead of stdout
    #[arg(long)]
    out_path: Option<PathBuf>,
}

enum CliError {
    /// Bad arguments; exit 2.
    Validation(String),
    /// The computation itself refused or failed; exit 1.
    Computation(String),
}

impl From<permchar::Error> for CliError {
    fn from(e: permchar::Error) -> Self {
        CliError::Computation(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Computation(format!("i/o error: {e}"))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Computation(msg)) => {
            eprintln!("permchar: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Validation(msg)) => {
            eprintln!("permchar: {msg}");
            ExitCode::from(2)
        }
    }
}

/// Accepts "re,im", a bare real, or "polar:r,phi".
fn parse_complex(text: &str) -> Result<Complex64, CliError> {
    let bad = || CliError::Validation(format!("cannot parse complex number {text:?}"));
    if let Some(rest) = text.strip_prefix("polar:") {
        let (r, phi) = rest.split_once(',').ok_or_else(bad)?;
        let r: f64 = r.trim().parse().map_err(|_| bad())?;
        let phi: f64 = phi.trim().parse().map_err(|_| bad())?;
        return Ok(Complex64::from_polar(r, phi));
    }
    if let Some((re, im)) = text.split_once(',') {
        let re: f64 = re.trim().parse().map_err(|_| bad())?;
        let im: f64 = im.trim().parse().map_err(|_| bad())?;
        return Ok(Complex64::new(re, im));
    }
    let re: f64 = text.trim().parse().map_err(|_| bad())?;
    Ok(Complex64::new(re, 0.0))
}

fn parse_all(texts: &[String]) -> Result<Vec<Complex64>, CliError> {
    texts.iter().map(|t| parse_complex(t)).collect()
}

fn build_query(n: usize, xs: &[String], ss: &[String]) -> Result<MomentQuery, CliError> {
    let xs = parse_all(xs)?;
    let ss = parse_all(ss)?;
    if xs.len() != ss.len() {
        return Err(CliError::Validation(format!(
            "{} --x values but {} --s values",
            xs.len(),
            ss.len()
        )));
    }
    Ok(MomentQuery::new(n, xs, ss)?)
}

fn complex_json(z: Complex64) -> Result<Value, CliError> {
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(CliError::Computation(format!("non-finite result {z}")));
    }
    Ok(json!({ "re": z.re, "im": z.im }))
}

fn echo_query(q: &MomentQuery) -> Value {
    json!({
        "n": q.n,
        "xs": q.xs.iter().map(|x| json!([x.re, x.im])).collect::<Vec<_>>(),
        "ss": q.ss.iter().map(|s| json!([s.re, s.im])).collect::<Vec<_>>(),
    })
}

fn write_out(out: &OutputArgs, body: &str) -> Result<(), CliError> {
    match &out.out_path {
        Some(path) => std::fs::write(path, body)?,
        None => println!("{}", body.trim_end_matches('\n')),
    }
    Ok(())
}

/// Standard JSON envelope for scalar results; CSV renders the value as one
/// `re,im` row.
fn emit_value(
    out: &OutputArgs,
    command: &str,
    method: &str,
    inputs: Value,
    value: Complex64,
    extra: &[(&str, Value)],
    started: Instant,
) -> Result<(), CliError> {
    match out.output {
        Format::Json => {
            let mut doc = json!({
                "schema": SCHEMA,
                "command": command,
                "method": method,
                "inputs": inputs,
                "value": complex_json(value)?,
                "elapsed_ms": started.elapsed().as_secs_f64() * 1e3,
                "version": env!("CARGO_PKG_VERSION"),
            });
            for (k, v) in extra {
                doc[*k] = v.clone();
            }
            write_out(out, &serde_json::to_string_pretty(&doc).unwrap())
        }
        Format::Csv => {
            if !value.re.is_finite() || !value.im.is_finite() {
                return Err(CliError::Computation(format!("non-finite result {value}")));
            }
            write_out(out, &format!("re,im\n{},{}\n", value.re, value.im))
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Exact(a) => {
            let started = Instant::now();
            let q = build_query(a.n, &a.xs, &a.ss)?;
            let value = exact_moment_partition_sum(&q)?;
            emit_value(&a.out, "exact", "partition-sum", echo_query(&q), value, &[], started)
        }
        Command::Gf(a) => {
            let started = Instant::now();
            let q = build_query(a.n, &a.xs, &a.ss)?;
            let (method, value) = if q.integer_exponents().is_some() {
                ("gf-recurrence", gf_moment_integer(&q)?)
            } else {
                ("gf-exp-log", gf_moment_complex(&q)?)
            };
            emit_value(&a.out, "gf", method, echo_query(&q), value, &[], started)
        }
        Command::Limit(a) => {
            let started = Instant::now();
            // n is irrelevant in the limit; a dummy query just validates arity
            let q = build_query(0, &a.xs, &a.ss)?;
            let (method, value) = match q.integer_exponents() {
                Some(ints) => ("limit-finite-product", limit_integer(&q.xs, &ints)?),
                None => ("limit-lattice-sum", limit_complex(&q.xs, &q.ss, a.tol)?),
            };
            let mut inputs = echo_query(&q);
            inputs["tol"] = json!(a.tol);
            inputs.as_object_mut().unwrap().remove("n");
            emit_value(&a.out, "limit", method, inputs, value, &[], started)
        }
        Command::Simulate(a) => run_simulate(a),
        Command::Zinfty(a) => {
            let started = Instant::now();
            let x = parse_complex(&a.x)?;
            let s = parse_complex(&a.s)?;
            if a.samples == 0 {
                return Err(CliError::Validation("--samples must be positive".into()));
            }
            let reference = limit_complex(&[x], &[s], a.tol)?;
            let mut rng = rng_from_seed(a.seed);
            let mut sum = Complex64::new(0.0, 0.0);
            let mut sq = 0.0f64;
            for _ in 0..a.samples {
                let z = sample_z_infty(x, s, a.tol, &mut rng)?;
                sum += z;
                sq += z.norm_sqr();
            }
            let mean = sum / a.samples as f64;
            let var = (sq / a.samples as f64 - mean.norm_sqr()).max(0.0);
            let stderr = (var / a.samples as f64).sqrt();
            let inputs = json!({
                "x": [x.re, x.im], "s": [s.re, s.im],
                "samples": a.samples, "seed": a.seed, "tol": a.tol,
            });
            emit_value(
                &a.out,
                "zinfty",
                "infinite-product-mc",
                inputs,
                mean,
                &[("stderr", json!(stderr)), ("limit", complex_json(reference)?)],
                started,
            )
        }
        Command::Asymptotic(a) => {
            let started = Instant::now();
            let x = parse_complex(&a.x)?;
            let mut csv = String::from("n,exact_re,exact_im,pred_re,pred_im,ratio_abs\n");
            let mut rows = Vec::new();
            for &n in &a.ns {
                let check = verify_ratio(a.s1, a.s2, x, n)?;
                let ratio = if check.near_zero { f64::NAN } else { check.ratio_abs };
                let _ = writeln!(
                    csv,
                    "{n},{},{},{},{},{}",
                    check.exact.re, check.exact.im, check.predicted.re, check.predicted.im, ratio
                );
                rows.push(json!({
                    "n": n,
                    "exact": complex_json(check.exact)?,
                    "predicted": complex_json(check.predicted)?,
                    "ratio_abs": if check.near_zero { Value::Null } else { json!(check.ratio_abs) },
                }));
            }
            match a.out.output {
                Format::Json => {
                    let doc = json!({
                        "schema": SCHEMA,
                        "command": "asymptotic",
                        "method": "leading-terms-vs-recurrence",
                        "inputs": { "s1": a.s1, "s2": a.s2, "x": [x.re, x.im], "ns": a.ns },
                        "rows": rows,
                        "elapsed_ms": started.elapsed().as_secs_f64() * 1e3,
                        "version": env!("CARGO_PKG_VERSION"),
                    });
                    write_out(&a.out, &serde_json::to_string_pretty(&doc).unwrap())
                }
                Format::Csv => write_out(&a.out, &csv),
            }
        }
        Command::Sweep(a) => {
            if a.n_step == 0 || a.n_end < a.n_start {
                return Err(CliError::Validation("empty sweep range".into()));
            }
            let mut csv = String::from("n,re,im\n");
            for n in (a.n_start..=a.n_end).step_by(a.n_step) {
                let q = build_query(n, &a.xs, &a.ss)?;
                let value = match a.method {
                    SweepMethod::Exact => exact_moment_partition_sum(&q)?,
                    SweepMethod::Gf => {
                        if let Some(_ints) = q.integer_exponents() {
                            gf_moment_integer(&q)?
                        } else {
                            gf_moment_complex(&q)?
                        }
                    }
                };
                if !value.re.is_finite() || !value.im.is_finite() {
                    return Err(CliError::Computation(format!("non-finite value at n={n}")));
                }
                let _ = writeln!(csv, "{n},{},{}", value.re, value.im);
            }
            write_out(&a.out, &csv)
        }
        Command::Selftest => selftest(),
    }
}

fn run_simulate(a: SimulateArgs) -> Result<(), CliError> {
    let started = Instant::now();
    if a.samples == 0 {
        return Err(CliError::Validation("--samples must be positive".into()));
    }
    if !a.xs.is_empty() || !a.ss.is_empty() {
        // Monte Carlo moment estimation path
        let n = match a.ns[..] {
            [n] => n,
            _ => {
                return Err(CliError::Validation(
                    "moment estimation takes exactly one --n".into(),
                ))
            }
        };
        let q = build_query(n, &a.xs, &a.ss)?;
        let est = mc_moment(&q, a.samples, a.seed)?;
        let mut inputs = echo_query(&q);
        inputs["samples"] = json!(a.samples);
        inputs["seed"] = json!(a.seed);
        return emit_value(
            &a.out,
            "simulate",
            "cycle-type-mc",
            inputs,
            est.mean,
            &[("stderr", json!(est.stderr))],
            started,
        );
    }

    if let Some(path) = &a.dump {
        let n = a.ns[0];
        if a.m > n {
            return Err(CliError::Validation(format!("--m {} exceeds --n {n}", a.m)));
        }
        let mut rng = rng_from_seed(a.seed);
        let mut csv = String::from("draw,m,c_m,y_m,boundary\n");
        for draw in 0..a.samples {
            let counts = simulate_coupling(n, a.m, a.horizon.max(2) * n, &mut rng)?;
            for m in 1..=a.m {
                let b = (counts.boundary == Some(m)) as u8;
                let _ = writeln!(csv, "{draw},{m},{},{},{b}", counts.c_of(m), counts.y_of(m));
            }
        }
        std::fs::write(path, csv)?;
    }

    let report = coupling_distribution_check(&a.ns, a.m, a.samples, a.seed)?;
    let doc = json!({
        "schema": SCHEMA,
        "command": "simulate",
        "method": "feller-coupling",
        "inputs": {
            "ns": a.ns, "m": a.m, "samples": a.samples,
            "seed": a.seed, "horizon_multiplier": a.horizon,
        },
        "mismatch": report
            .mismatch
            .iter()
            .map(|&(n, p)| json!({ "n": n, "p_mismatch": p }))
            .collect::<Vec<_>>(),
        "y_mean": report.y_mean,
        "y_var": report.y_var,
        "violations": report.violations,
        "elapsed_ms": started.elapsed().as_secs_f64() * 1e3,
        "version": env!("CARGO_PKG_VERSION"),
    });
    match a.out.output {
        Format::Json => write_out(&a.out, &serde_json::to_string_pretty(&doc).unwrap()),
        Format::Csv => {
            let mut csv = String::from("n,p_mismatch\n");
            for &(n, p) in &report.mismatch {
                let _ = writeln!(csv, "{n},{p}");
            }
            write_out(&a.out, &csv)
        }
    }
}

/// Small oracle-equivalence grid over the three exact methods plus a limit
/// sanity check; prints one line per check and fails fast.
fn selftest() -> Result<(), CliError> {
    let points = [
        Complex64::new(0.3, 0.0),
        Complex64::new(-0.2, 0.4),
        Complex64::new(0.1, -0.6),
    ];
    for &x in &points {
        for ss in [vec![1u32], vec![2], vec![3]] {
            for n in 0..=6usize {
                let q = MomentQuery::with_integer_exponents(n, vec![x], &ss)?;
                let bf = brute_force_moment(&q)?;
                let ps = exact_moment_partition_sum(&q)?;
                let gf = gf_moment_integer(&q)?;
                let scale = ps.norm().max(1.0);
                if (bf - ps).norm() / scale > 1e-9 || (gf - ps).norm() / scale > 1e-9 {
                    return Err(CliError::Computation(format!(
                        "selftest oracle mismatch: n={n} s={ss:?} x={x}: {bf} / {ps} / {gf}"
                    )));
                }
            }
            println!("selftest oracle-triangle x={x} s={ss:?}: ok");
        }
        // the n -> infinity limit must attract the finite-n values
        let q = MomentQuery::with_integer_exponents(60, vec![x], &[2])?;
        let at_60 = gf_moment_integer(&q)?;
        let lim = limit_integer(&[x], &[2])?;
        if (at_60 - lim).norm() > 1e-6 {
            return Err(CliError::Computation(format!(
                "selftest limit mismatch at x={x}: {at_60} vs {lim}"
            )));
        }
        println!("selftest limit-convergence x={x}: ok");
    }
    println!("selftest: all checks passed");
    Ok(())
}
