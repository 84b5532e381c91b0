//! The `reclab` command line. [`run`] is the whole program; the binary only
//! connects it to the process streams and exit status.
//!
//! Exit status: 0 on success, 1 when `--expect` is not met or the self-test
//! fails, 2 on usage errors, 3 on numerical failures.

use std::ffi::OsString;
use std::io::Write;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use reclab::characterize::{self, GridSpec, IdentityId, Params, QuadOrder, ScanOptions, Verdict};
use reclab::condmom::{self, Integrand, Window};
use reclab::report::{self, Format};
use reclab::simrec::{self, mix64, SimConfig};
use reclab::{acceptance, Error, HazardModel};

pub const EXIT_OK: i32 = 0;
pub const EXIT_EXPECTATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "reclab",
    version,
    about = "Conditional moments of record values and characterization identity checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// E[g(R)] for a record with R = u `i` records below it and R = v `j` above.
    Expect(ExpectArgs),
    /// E[R_n - R_m | R_{m-k} = u, R_{n+r} = v].
    Spacing(SpacingArgs),
    /// Simulated record paths as CSV.
    Simulate(SimulateArgs),
    /// Scan an identity over a grid and report residuals and a verdict.
    Verify(VerifyArgs),
    /// Exponential, WeibullHalf or Neither, from the standard scans.
    Classify(ClassifyArgs),
    /// Printed spacing constants against computed values.
    Errata(ErrataArgs),
    /// Run the acceptance suite; exits 0 iff every criterion passes.
    Selftest(SelftestArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutFormat {
    Text,
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Quad,
    Mc,
}

impl From<MethodArg> for characterize::Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Quad => characterize::Method::Quad,
            MethodArg::Mc => characterize::Method::Mc,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SamplerArg {
    Arrival,
    Naive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OrderArg {
    Nested,
    Enclosing,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Seed {
    Fixed(u64),
    Random,
}

impl Seed {
    fn resolve(self) -> u64 {
        match self {
            Seed::Fixed(s) => s,
            Seed::Random => {
                use std::hash::BuildHasher;
                let now = std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).unwrap_or_default();
                std::collections::hash_map::RandomState::new().hash_one(now.as_nanos())
            }
        }
    }
}

/// Integers, also written as `1e6` or `2.5e3`.
fn parse_u64(s: &str) -> Result<u64, String> {
    if let Ok(n) = s.trim().parse::<u64>() {
        return Ok(n);
    }
    let x: f64 = s.trim().parse().map_err(|_| format!("not an integer: {s:?}"))?;
    if x.fract() == 0.0 && (0.0..=9.007_199_254_740_992e15).contains(&x) {
        Ok(x as u64)
    } else {
        Err(format!("not a non-negative integer: {s:?}"))
    }
}

fn parse_u32(s: &str) -> Result<u32, String> {
    let n = parse_u64(s)?;
    u32::try_from(n).map_err(|_| format!("too large: {s:?}"))
}

fn parse_real(s: &str) -> Result<f64, String> {
    match s.trim().parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => Err(format!("not a finite number: {s:?}")),
    }
}

fn parse_seed(s: &str) -> Result<Seed, String> {
    if s.trim() == "random" {
        Ok(Seed::Random)
    } else {
        parse_u64(s).map(Seed::Fixed)
    }
}

fn parse_model(s: &str) -> Result<HazardModel, String> {
    s.parse::<HazardModel>().map_err(|e| e.to_string())
}

#[derive(Debug, Args)]
struct Output {
    /// Write to this file instead of standard output.
    #[arg(long)]
    out: Option<std::path::PathBuf>,
    #[arg(long, value_enum)]
    format: Option<OutFormat>,
}

#[derive(Debug, Args)]
struct Evaluation {
    #[arg(long, value_enum, default_value = "quad")]
    method: MethodArg,
    /// Draws per expectation for --method mc.
    #[arg(long, value_parser = parse_u64, default_value = "100000")]
    samples: u64,
    /// Integer seed or `random`.
    #[arg(long, value_parser = parse_seed, default_value = "0")]
    seed: Seed,
}

#[derive(Debug, Args)]
struct ExpectArgs {
    /// `exp:c=..,lf=..`, `weibull:alpha=..,c=..` or `linquad`.
    #[arg(long, value_parser = parse_model)]
    dist: HazardModel,
    #[arg(long = "i", value_parser = parse_u32)]
    i: u32,
    #[arg(long = "j", value_parser = parse_u32)]
    j: u32,
    #[arg(long, value_parser = parse_real, allow_hyphen_values = true)]
    u: f64,
    #[arg(long, value_parser = parse_real, allow_hyphen_values = true)]
    v: f64,
    /// `id`, `poly:c0,c1,..`, `mono:p` or `mono:p:d`.
    #[arg(long, default_value = "id")]
    g: String,
    #[command(flatten)]
    eval: Evaluation,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct SpacingArgs {
    #[arg(long, value_parser = parse_model)]
    dist: HazardModel,
    #[arg(long, value_parser = parse_u32)]
    m: u32,
    #[arg(long, value_parser = parse_u32)]
    n: u32,
    #[arg(long, value_parser = parse_u32, default_value = "1")]
    k: u32,
    #[arg(long, value_parser = parse_u32, default_value = "1")]
    r: u32,
    #[arg(long, value_parser = parse_real, allow_hyphen_values = true)]
    u: f64,
    #[arg(long, value_parser = parse_real, allow_hyphen_values = true)]
    v: f64,
    #[command(flatten)]
    eval: Evaluation,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long, value_parser = parse_model)]
    dist: HazardModel,
    /// Records per path.
    #[arg(long, value_parser = parse_u64, default_value = "5")]
    records: u64,
    /// Number of paths.
    #[arg(long, value_parser = parse_u64, default_value = "1000")]
    samples: u64,
    #[arg(long, value_parser = parse_seed, default_value = "0")]
    seed: Seed,
    #[arg(long, value_enum, default_value = "arrival")]
    sampler: SamplerArg,
    /// iid draw budget per naive path before the retry ladder.
    #[arg(long, value_parser = parse_u64, default_value = "1000000")]
    max_draws: u64,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct ParamArgs {
    #[arg(long, value_parser = parse_u32)]
    k: Option<u32>,
    #[arg(long, value_parser = parse_u32)]
    r: Option<u32>,
    #[arg(long, value_parser = parse_u32)]
    m: Option<u32>,
    #[arg(long, value_parser = parse_u32)]
    n: Option<u32>,
    /// Degree of h(x) = x^p/p! for identities built on h.
    #[arg(long, value_parser = parse_u32)]
    p: Option<u32>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long)]
    identity: String,
    #[arg(long, value_parser = parse_model)]
    dist: HazardModel,
    #[command(flatten)]
    params: ParamArgs,
    /// `lo:hi:count[:max_tuples]`; default l_F+0.25 to l_F+8 with 6 points.
    #[arg(long)]
    grid: Option<String>,
    /// Orderings of four-point tuples.
    #[arg(long, value_enum, default_value = "both")]
    order: OrderArg,
    /// Relative for quad (default 1e-6), standard errors for mc (default 4).
    #[arg(long, value_parser = parse_real)]
    tol: Option<f64>,
    #[command(flatten)]
    eval: Evaluation,
    /// `confirmed` or `violated`; exit 1 when the verdict differs.
    #[arg(long)]
    expect: Option<String>,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct ClassifyArgs {
    #[arg(long, value_parser = parse_model)]
    dist: HazardModel,
    #[arg(long, value_parser = parse_real, default_value = "1e-6")]
    tol: f64,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct ErrataArgs {
    #[arg(long, value_parser = parse_model)]
    dist: HazardModel,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct SelftestArgs {
    #[arg(long, value_parser = parse_seed, default_value = "0")]
    seed: Seed,
    #[arg(long)]
    out: Option<std::path::PathBuf>,
}

enum Failure {
    Usage(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type Outcome = Result<i32, Failure>;

fn emit(out: &mut dyn Write, path: Option<&std::path::Path>, bytes: &[u8]) -> Result<(), Failure> {
    let res = match path {
        Some(p) => std::fs::write(p, bytes),
        None => out.write_all(bytes).and_then(|_| out.flush()),
    };
    res.map_err(|e| Failure::Usage(format!("cannot write output: {e}")))
}

fn structured(format: Option<OutFormat>, default: OutFormat) -> OutFormat {
    format.unwrap_or(default)
}

fn json_line(value: serde_json::Value) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(&value).expect("JSON values serialize");
    bytes.push(b'\n');
    bytes
}

fn csv_bytes(header: &[&str], row: &[String]) -> Vec<u8> {
    format!("{}\n{}\n", header.join(","), row.join(",")).into_bytes()
}

fn opt_real(x: Option<f64>) -> String {
    x.map(report::real).unwrap_or_default()
}

/// Mean and standard error (Monte Carlo only) of `Σ sign·E[g]` over windows;
/// window `w` uses seed `mix64(seed, w)`.
fn evaluate(
    model: &HazardModel,
    parts: &[(f64, Window)],
    g: &Integrand,
    eval: &Evaluation,
    seed: u64,
) -> Result<(f64, Option<f64>), Failure> {
    let mut total = 0.0;
    let mut var = 0.0;
    for (w_idx, (sign, w)) in parts.iter().enumerate() {
        match eval.method {
            MethodArg::Quad => total += sign * condmom::conditional_expectation(model, w, |x| g.eval(x))?,
            MethodArg::Mc => {
                let cfg = SimConfig::new(mix64(seed, w_idx as u64), eval.samples);
                let est = simrec::mc_conditional_expectation(model, w, |x| g.eval(x), &cfg)?;
                total += sign * est.mean;
                var += est.stderr * est.stderr;
            }
        }
    }
    Ok((total, (eval.method == MethodArg::Mc).then(|| var.sqrt())))
}

/// The resolved configuration on the error stream, so plain-text results
/// still record their seed.
fn echo(err: &mut dyn Write, what: &str, eval: &Evaluation, seed: u64) {
    let samples = match eval.method {
        MethodArg::Quad => String::new(),
        MethodArg::Mc => format!(" samples={}", eval.samples),
    };
    let _ = writeln!(err, "{what} method={}{samples} seed={seed}", method_token(eval.method));
}

/// Text output: rounded to 15 significant digits, which hides last-ulp
/// quadrature noise, then printed in shortest form (`2.0`, not `2e0`).
fn display_real(x: f64) -> String {
    let rounded: f64 = format!("{x:.14e}").parse().unwrap_or(x);
    format!("{rounded:?}")
}

fn sampler_token(s: SamplerArg) -> &'static str {
    match s {
        SamplerArg::Arrival => "arrival",
        SamplerArg::Naive => "naive",
    }
}

fn method_token(m: MethodArg) -> &'static str {
    match m {
        MethodArg::Quad => "quad",
        MethodArg::Mc => "mc",
    }
}

fn cmd_expect(a: ExpectArgs, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let g = Integrand::parse(&a.g)?;
    let seed = a.eval.seed.resolve();
    echo(err, &format!("expect dist={} i={} j={} g={g}", a.dist, a.i, a.j), &a.eval, seed);
    let w = Window::new(a.i, a.j, a.u, a.v)?;
    let (value, stderr) = evaluate(&a.dist, &[(1.0, w)], &g, &a.eval, seed)?;
    let bytes = match structured(a.output.format, OutFormat::Text) {
        OutFormat::Text => format!("{}\n", display_real(value)).into_bytes(),
        OutFormat::Json => json_line(json!({
            "schema_version": 1,
            "command": "expect",
            "dist": a.dist.to_string(),
            "i": a.i, "j": a.j, "u": a.u, "v": a.v,
            "g": g.to_string(),
            "method": method_token(a.eval.method),
            "samples": (a.eval.method == MethodArg::Mc).then_some(a.eval.samples),
            "seed": seed,
            "value": value,
            "stderr": stderr,
        })),
        OutFormat::Csv => csv_bytes(
            &["dist", "i", "j", "u", "v", "g", "method", "seed", "value", "stderr"],
            &[
                format!("\"{}\"", a.dist),
                a.i.to_string(),
                a.j.to_string(),
                report::real(a.u),
                report::real(a.v),
                format!("\"{g}\""),
                method_token(a.eval.method).into(),
                seed.to_string(),
                report::real(value),
                opt_real(stderr),
            ],
        ),
    };
    emit(out, a.output.out.as_deref(), &bytes)?;
    Ok(EXIT_OK)
}

fn cmd_spacing(a: SpacingArgs, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    if !(a.k >= 1 && a.r >= 1 && a.k < a.m && a.m < a.n) {
        return Err(Failure::Usage(format!(
            "spacing needs 1 <= k <= m - 1, m < n and r >= 1; got k={}, r={}, m={}, n={}",
            a.k, a.r, a.m, a.n
        )));
    }
    let seed = a.eval.seed.resolve();
    echo(err, &format!("spacing dist={} k={} r={} m={} n={}", a.dist, a.k, a.r, a.m, a.n), &a.eval, seed);
    let gap = a.n - a.m;
    let parts = [(1.0, Window::new(gap + a.k, a.r, a.u, a.v)?), (-1.0, Window::new(a.k, gap + a.r, a.u, a.v)?)];
    let (value, stderr) = evaluate(&a.dist, &parts, &Integrand::Identity, &a.eval, seed)?;
    let bytes = match structured(a.output.format, OutFormat::Text) {
        OutFormat::Text => format!("{}\n", display_real(value)).into_bytes(),
        OutFormat::Json => json_line(json!({
            "schema_version": 1,
            "command": "spacing",
            "dist": a.dist.to_string(),
            "k": a.k, "r": a.r, "m": a.m, "n": a.n, "u": a.u, "v": a.v,
            "method": method_token(a.eval.method),
            "samples": (a.eval.method == MethodArg::Mc).then_some(a.eval.samples),
            "seed": seed,
            "value": value,
            "stderr": stderr,
        })),
        OutFormat::Csv => csv_bytes(
            &["dist", "k", "r", "m", "n", "u", "v", "method", "seed", "value", "stderr"],
            &[
                format!("\"{}\"", a.dist),
                a.k.to_string(),
                a.r.to_string(),
                a.m.to_string(),
                a.n.to_string(),
                report::real(a.u),
                report::real(a.v),
                method_token(a.eval.method).into(),
                seed.to_string(),
                report::real(value),
                opt_real(stderr),
            ],
        ),
    };
    emit(out, a.output.out.as_deref(), &bytes)?;
    Ok(EXIT_OK)
}

fn cmd_simulate(a: SimulateArgs, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let seed = a.seed.resolve();
    let _ = writeln!(
        err,
        "simulate dist={} records={} samples={} sampler={} seed={seed}",
        a.dist,
        a.records,
        a.samples,
        sampler_token(a.sampler)
    );
    let nmax = usize::try_from(a.records).map_err(|_| Failure::Usage("--records too large".into()))?;
    let cfg = SimConfig { seed, samples: a.samples, max_iid_draws: a.max_draws };
    let (paths, exhausted) = match a.sampler {
        SamplerArg::Arrival => (simrec::sample_paths(&a.dist, nmax, &cfg)?, 0),
        SamplerArg::Naive => {
            let batch = simrec::sample_paths_naive(&a.dist, nmax, &cfg)?;
            (batch.paths, batch.exhausted)
        }
    };
    if exhausted > 0 {
        let _ = writeln!(err, "warning: {exhausted} naive paths exhausted the draw budget and were dropped");
    }
    let bytes = match structured(a.output.format, OutFormat::Csv) {
        OutFormat::Json => json_line(json!({
            "schema_version": 1,
            "command": "simulate",
            "dist": a.dist.to_string(),
            "records": nmax,
            "samples": a.samples,
            "seed": seed,
            "sampler": sampler_token(a.sampler),
            "max_draws": a.max_draws,
            "exhausted": exhausted,
            "paths": paths,
        })),
        _ => {
            let mut buf = Vec::new();
            simrec::write_paths_csv(&paths, &mut buf)?;
            buf
        }
    };
    emit(out, a.output.out.as_deref(), &bytes)?;
    Ok(EXIT_OK)
}

fn cmd_verify(a: VerifyArgs, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let identity: IdentityId = a.identity.parse()?;
    let expect: Option<Verdict> = a.expect.as_deref().map(str::parse).transpose()?;
    let method: characterize::Method = a.eval.method.into();
    let order = match a.order {
        OrderArg::Nested => QuadOrder::Nested,
        OrderArg::Enclosing => QuadOrder::Enclosing,
        OrderArg::Both => QuadOrder::Both,
    };
    let grid = match &a.grid {
        Some(text) => GridSpec::parse(text)?,
        None => GridSpec::default_for(&a.dist),
    }
    .with_order(order);
    let opts = ScanOptions {
        grid,
        tol: a.tol.unwrap_or_else(|| characterize::default_tol(method)),
        method,
        samples: a.eval.samples,
        seed: a.eval.seed.resolve(),
    };
    let params = Params { k: a.params.k, r: a.params.r, m: a.params.m, n: a.params.n, p: a.params.p };
    let mut rep = characterize::scan(identity, &params, &a.dist, &opts)?;
    // Wall-clock time would make reruns differ.
    rep.runtime_ms = None;
    let format = match structured(a.output.format, OutFormat::Csv) {
        OutFormat::Json => Format::Json,
        _ => Format::Csv,
    };
    emit(out, a.output.out.as_deref(), &report::serialize_report(&rep, format)?)?;
    let _ = writeln!(
        err,
        "{identity} on {}: {} (max rel residual {:.3e} over {} points, tol {:e}, method {}, seed {})",
        rep.dist,
        rep.verdict,
        rep.max_rel_residual,
        rep.records.len(),
        rep.tol,
        rep.method,
        rep.seed
    );
    Ok(match expect {
        Some(v) if v != rep.verdict => {
            let _ = writeln!(err, "expected {v}, got {}", rep.verdict);
            EXIT_EXPECTATION
        }
        _ => EXIT_OK,
    })
}

fn cmd_classify(a: ClassifyArgs, out: &mut dyn Write) -> Outcome {
    let rep = characterize::classify_report(&a.dist, a.tol)?;
    let bytes = match structured(a.output.format, OutFormat::Text) {
        OutFormat::Text => format!("{}\n", rep.classification).into_bytes(),
        OutFormat::Csv => report::serialize_classify(&rep, Format::Csv)?,
        OutFormat::Json => report::serialize_classify(&rep, Format::Json)?,
    };
    emit(out, a.output.out.as_deref(), &bytes)?;
    Ok(EXIT_OK)
}

fn cmd_errata(a: ErrataArgs, out: &mut dyn Write) -> Outcome {
    let rep = characterize::errata_report(&a.dist)?;
    let format = match structured(a.output.format, OutFormat::Csv) {
        OutFormat::Json => Format::Json,
        _ => Format::Csv,
    };
    emit(out, a.output.out.as_deref(), &report::serialize_errata(&rep, format)?)?;
    Ok(EXIT_OK)
}

fn cmd_selftest(a: SelftestArgs, out: &mut dyn Write) -> Outcome {
    let seed = a.seed.resolve();
    let outcomes = acceptance::selftest(seed);
    let passed = outcomes.iter().filter(|o| o.passed).count();
    let mut text = format!("reclab selftest, seed {seed}\n");
    text.push_str(&acceptance::render(&outcomes));
    text.push_str(&format!("{passed}/{} criteria passed\n", outcomes.len()));
    emit(out, a.out.as_deref(), text.as_bytes())?;
    Ok(if acceptance::all_passed(&outcomes) { EXIT_OK } else { EXIT_EXPECTATION })
}

/// Parses `argv` (including the program name) and runs the command.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let rendered = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{rendered}");
                EXIT_USAGE
            } else {
                let _ = write!(out, "{rendered}");
                EXIT_OK
            };
        }
    };
    let result = match cli.command {
        Command::Expect(a) => cmd_expect(a, out, err),
        Command::Spacing(a) => cmd_spacing(a, out, err),
        Command::Simulate(a) => cmd_simulate(a, out, err),
        Command::Verify(a) => cmd_verify(a, out, err),
        Command::Classify(a) => cmd_classify(a, out),
        Command::Errata(a) => cmd_errata(a, out),
        Command::Selftest(a) => cmd_selftest(a, out),
    };
    match result {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Lib(e)) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_numerical() {
                EXIT_NUMERICAL
            } else {
                EXIT_USAGE
            }
        }
    }
}
