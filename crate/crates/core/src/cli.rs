//! Command-line surface: JSON input loading, divergence / hierarchy /
//! capacity / discrimination sweeps, CSV (or JSON-mirrored) output, and
//! the randomized self-test suites.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 partial results
//! (some sweep cells failed; failures are reported in the status
//! column, never silently substituted), 3 size budget exceeded.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use serde::Serialize;

use crate::channel_div::{
    capacity_curve, d_sharp_channel, hierarchy_bound, strong_converse_curve, two_way_rate_bound,
    ChannelOpts, DEFAULT_SIZE_BUDGET,
};
use crate::divergence::{
    d_classical, d_geometric, d_max, d_sandwiched, d_sharp_state, SharpOpts,
};
use crate::error::{Error, Result};
use crate::hermitian::{CMatrix, HermitianOperator, MatrixJson};
use crate::meanrep::mean_eval;
use crate::quantum::{amplitude_damping, depolarizing, identity_channel, QChannel, QState};
use crate::sdp::SolveStatus;

#[derive(Parser)]
#[command(name = "renyi-sharp", version, about = "Quantum Renyi divergences via convex optimization", disable_help_subcommand = true)]
struct Cli {
    /// Worker pool size for sweep cells (default: number of cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Mirror output rows as a JSON array instead of CSV.
    #[arg(long, global = true)]
    json: bool,
    /// Write output to a file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct SolveArgs {
    /// Single Renyi order (> 1).
    #[arg(long)]
    alpha: Option<String>,
    /// Alpha grid: comma list or inclusive start:stop:step.
    #[arg(long)]
    alphas: Option<String>,
    /// Dyadic approximation level for 1/alpha (2..=14).
    #[arg(long, default_value_t = 8)]
    bits: u32,
    /// Interior-point convergence tolerance (1e-10..=1e-4).
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, default_value_t = 200)]
    max_iter: usize,
    /// Cap on tensor-power Choi dimension.
    #[arg(long, default_value_t = DEFAULT_SIZE_BUDGET)]
    size_budget: usize,
}

#[derive(Subcommand)]
enum Cmd {
    /// Divergences between two states given as JSON matrices.
    StateDiv {
        #[arg(long)]
        rho: PathBuf,
        #[arg(long)]
        sigma: PathBuf,
        #[command(flatten)]
        solve: SolveArgs,
    },
    /// Sharp divergence between two channels.
    ChannelDiv {
        #[arg(long)]
        channel_n: String,
        #[arg(long)]
        channel_m: String,
        #[command(flatten)]
        solve: SolveArgs,
    },
    /// Tensor-power hierarchy bounds on the regularized divergence.
    Hierarchy {
        #[arg(long)]
        channel_n: String,
        #[arg(long)]
        channel_m: String,
        /// Tensor-power order.
        #[arg(long, default_value_t = 1)]
        m: usize,
        #[command(flatten)]
        solve: SolveArgs,
    },
    /// Capacity-style bound over the diamond-norm-constrained set.
    Capacity {
        /// Channel family (`ad`, `depol`) swept over --gammas, or a
        /// fixed channel spec (`ad:<g>`, `depol:<p>`, `identity:<d>`,
        /// JSON path).
        #[arg(long)]
        channel: String,
        /// Family parameter grid (comma list or start:stop:step).
        #[arg(long, default_value = "0")]
        gammas: String,
        #[command(flatten)]
        solve: SolveArgs,
    },
    /// Strong-converse exponent lower bounds for discrimination.
    Discrim {
        #[arg(long)]
        channel_n: String,
        #[arg(long)]
        channel_m: String,
        /// Rate grid (comma list or start:stop:step).
        #[arg(long)]
        rates: String,
        #[arg(long, default_value_t = 1)]
        m: usize,
        #[command(flatten)]
        solve: SolveArgs,
    },
    /// Finite-length two-way assisted rate bound.
    RateBound {
        #[arg(long)]
        channel: String,
        #[arg(long)]
        epsilon: f64,
        /// Block length.
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[command(flatten)]
        solve: SolveArgs,
    },
    /// Randomized property suites with a machine-readable report.
    Selftest {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Run only the named suite.
        #[arg(long)]
        suite: Option<String>,
    },
}

/// Entry point; returns the process exit code.
pub fn run<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    init_logging();
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            // help/version are success, everything else is a usage error
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    if let Some(jobs) = cli.jobs {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global();
    }
    match dispatch(&cli) {
        Ok(outcome) => {
            if let Err(e) = emit(&cli, &outcome.table) {
                eprintln!("error: {}", e);
                return 1;
            }
            if outcome.partial {
                2
            } else {
                0
            }
        }
        Err(Error::SizeBudget { dim, budget }) => {
            eprintln!(
                "error: size budget exceeded (dimension {} > budget {})",
                dim, budget
            );
            3
        }
        Err(e) => {
            eprintln!("error: {}", e);
            1
        }
    }
}

fn init_logging() {
    let _ = env_logger::Builder::from_env(
        env_logger::Env::new().filter_or("RENYI_SHARP_LOG", "error"),
    )
    .try_init();
}

struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

struct Outcome {
    table: Table,
    partial: bool,
}

/// 15 significant digits; stable across platforms.
fn fmt(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    format!("{:.14e}", x)
}

fn emit(cli: &Cli, table: &Table) -> Result<()> {
    let mut out = String::new();
    if cli.json {
        let objects: Vec<serde_json::Map<String, serde_json::Value>> = table
            .rows
            .iter()
            .map(|row| {
                table
                    .header
                    .iter()
                    .zip(row)
                    .map(|(k, v)| (k.to_string(), serde_json::Value::String(v.clone())))
                    .collect()
            })
            .collect();
        out = serde_json::to_string_pretty(&objects).expect("serializable") + "\n";
    } else {
        writeln!(out, "{}", table.header.join(",")).unwrap();
        for row in &table.rows {
            // RFC-4180 subset: fields never contain commas or quotes by
            // construction except status messages, which get quoted
            let encoded: Vec<String> = row
                .iter()
                .map(|f| {
                    if f.contains(',') || f.contains('"') || f.contains('\n') {
                        format!("\"{}\"", f.replace('"', "\"\""))
                    } else {
                        f.clone()
                    }
                })
                .collect();
            writeln!(out, "{}", encoded.join(",")).unwrap();
        }
    }
    match &cli.out {
        Some(path) => std::fs::write(path, out).map_err(Error::Io)?,
        None => print!("{}", out),
    }
    Ok(())
}

// ---------------------------------------------------------------- parsing

/// Exact decimal: "1.25" -> (125, 100). Avoids floating-point grid drift.
fn parse_decimal(s: &str) -> Result<(i64, i64)> {
    let s = s.trim();
    let bad = || Error::Parse(format!("invalid decimal literal '{}'", s));
    let (sign, digits) = match s.strip_prefix('-') {
        Some(rest) => (-1i64, rest),
        None => (1i64, s),
    };
    let mut parts = digits.splitn(2, '.');
    let int_part = parts.next().ok_or_else(bad)?;
    let frac_part = parts.next().unwrap_or("");
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().all(|c| c.is_ascii_digit())
        || !frac_part.chars().all(|c| c.is_ascii_digit())
        || frac_part.len() > 12
    {
        return Err(bad());
    }
    let den = 10i64.pow(frac_part.len() as u32);
    let num: i64 = format!("{}{}", int_part, frac_part)
        .parse()
        .map_err(|_| bad())?;
    Ok((sign * num, den))
}

/// Comma list or inclusive start:stop:step grid, parsed exactly.
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::Parse(format!(
                "grid '{}' must be start:stop:step",
                s
            )));
        }
        let (a, da) = parse_decimal(parts[0])?;
        let (b, db) = parse_decimal(parts[1])?;
        let (st, ds) = parse_decimal(parts[2])?;
        if st <= 0 {
            return Err(Error::Parse("grid step must be positive".into()));
        }
        // common denominator
        let den = [da, db, ds].iter().fold(1i64, |acc, &d| {
            let g = gcd(acc, d);
            acc / g * d
        });
        let (a, b, st) = (a * (den / da), b * (den / db), st * (den / ds));
        let mut out = Vec::new();
        let mut v = a;
        while v <= b {
            out.push(v as f64 / den as f64);
            v += st;
        }
        if out.is_empty() {
            return Err(Error::Parse(format!("grid '{}' is empty", s)));
        }
        Ok(out)
    } else {
        s.split(',')
            .map(|p| {
                let (n, d) = parse_decimal(p)?;
                Ok(n as f64 / d as f64)
            })
            .collect()
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.max(1)
}

fn alpha_list(solve: &SolveArgs) -> Result<Vec<f64>> {
    let alphas = match (&solve.alpha, &solve.alphas) {
        (Some(a), None) => parse_grid(a)?,
        (None, Some(g)) => parse_grid(g)?,
        (Some(_), Some(_)) => {
            return Err(Error::Parse(
                "--alpha and --alphas are mutually exclusive".into(),
            ))
        }
        (None, None) => return Err(Error::Parse("--alpha or --alphas is required".into())),
    };
    for &a in &alphas {
        if a <= 1.0 + 1e-6 {
            return Err(Error::OutOfRange(format!("alpha must exceed 1, got {}", a)));
        }
    }
    Ok(alphas)
}

fn validate(solve: &SolveArgs) -> Result<()> {
    if !(2..=14).contains(&solve.bits) {
        return Err(Error::OutOfRange(format!(
            "--bits must be in [2, 14], got {}",
            solve.bits
        )));
    }
    if !(1e-10..=1e-4).contains(&solve.tol) {
        return Err(Error::OutOfRange(format!(
            "--tol must be in [1e-10, 1e-4], got {:e}",
            solve.tol
        )));
    }
    Ok(())
}

fn sharp_opts(solve: &SolveArgs) -> SharpOpts<f64> {
    SharpOpts {
        bits: solve.bits,
        tol: solve.tol,
        max_iter: solve.max_iter,
    }
}

fn channel_opts(solve: &SolveArgs) -> ChannelOpts<f64> {
    ChannelOpts {
        bits: solve.bits,
        tol: solve.tol,
        max_iter: solve.max_iter,
        size_budget: solve.size_budget,
    }
}

/// State JSON: the shared matrix schema, interpreted as a PSD operator.
pub fn load_state(path: &std::path::Path) -> Result<QState<f64>> {
    let text = std::fs::read_to_string(path).map_err(Error::Io)?;
    let j: MatrixJson = serde_json::from_str(&text)
        .map_err(|e| Error::Parse(format!("{}: {}", path.display(), e)))?;
    let mat = j.to_cmatrix::<f64>()?;
    let dim = mat.rows;
    let op = HermitianOperator::new(mat)?;
    QState::new(op, vec![dim])
}

#[derive(serde::Deserialize)]
struct ChannelJson {
    dim_in: usize,
    dim_out: usize,
    kraus: Option<Vec<MatrixJson>>,
    choi: Option<MatrixJson>,
}

/// Channel spec: `ad:<gamma>`, `depol:<p>`, `identity:<d>`, or a path
/// to a JSON channel file.
pub fn load_channel(spec: &str) -> Result<QChannel<f64>> {
    if let Some(g) = spec.strip_prefix("ad:") {
        let (n, d) = parse_decimal(g)?;
        return amplitude_damping(n as f64 / d as f64);
    }
    if let Some(p) = spec.strip_prefix("depol:") {
        let (n, d) = parse_decimal(p)?;
        return depolarizing(n as f64 / d as f64);
    }
    if let Some(d) = spec.strip_prefix("identity:") {
        let dim: usize = d
            .parse()
            .map_err(|_| Error::Parse(format!("invalid dimension '{}'", d)))?;
        if dim == 0 {
            return Err(Error::OutOfRange("identity dimension must be >= 1".into()));
        }
        return Ok(identity_channel(dim));
    }
    let path = std::path::Path::new(spec);
    let text = std::fs::read_to_string(path).map_err(Error::Io)?;
    let j: ChannelJson = serde_json::from_str(&text)
        .map_err(|e| Error::Parse(format!("{}: {}", spec, e)))?;
    match (j.kraus, j.choi) {
        (Some(kraus), None) => {
            if j.dim_in != j.dim_out {
                return Err(Error::Parse(
                    "Kraus input requires dim_in = dim_out (square matrix schema); supply a Choi matrix instead".into(),
                ));
            }
            let ops: Vec<CMatrix<f64>> = kraus
                .iter()
                .map(|m| m.to_cmatrix())
                .collect::<Result<_>>()?;
            QChannel::from_kraus(j.dim_in, j.dim_out, ops)
        }
        (None, Some(choi)) => {
            let mat = choi.to_cmatrix()?;
            QChannel::from_choi(j.dim_in, j.dim_out, HermitianOperator::new(mat)?)
        }
        _ => Err(Error::Parse(
            "channel JSON needs exactly one of 'kraus' or 'choi'".into(),
        )),
    }
}

/// Family spec for capacity sweeps: a bare family name (`ad`, `depol`)
/// takes the gamma grid as its parameter; anything else is a fixed
/// channel and the grid is ignored beyond its first entry.
fn channel_family(spec: &str) -> Result<Box<dyn Fn(f64) -> Result<QChannel<f64>> + Sync + '_>> {
    match spec {
        "ad" => Ok(Box::new(|g| amplitude_damping(g))),
        "depol" => Ok(Box::new(|p| depolarizing(p))),
        _ => {
            let fixed = load_channel(spec)?;
            Ok(Box::new(move |_| Ok(fixed.clone())))
        }
    }
}

fn status_str(s: SolveStatus) -> &'static str {
    match s {
        SolveStatus::Optimal => "optimal",
        SolveStatus::MaxIter => "max-iter",
        SolveStatus::Infeasible => "infeasible",
        SolveStatus::Unbounded => "unbounded",
        SolveStatus::NumericalFailure => "numerical-failure",
    }
}

// ---------------------------------------------------------------- commands

fn dispatch(cli: &Cli) -> Result<Outcome> {
    match &cli.cmd {
        Cmd::StateDiv { rho, sigma, solve } => cmd_state_div(rho, sigma, solve),
        Cmd::ChannelDiv {
            channel_n,
            channel_m,
            solve,
        } => cmd_channel_div(channel_n, channel_m, solve),
        Cmd::Hierarchy {
            channel_n,
            channel_m,
            m,
            solve,
        } => cmd_hierarchy(channel_n, channel_m, *m, solve),
        Cmd::Capacity {
            channel,
            gammas,
            solve,
        } => cmd_capacity(channel, gammas, solve),
        Cmd::Discrim {
            channel_n,
            channel_m,
            rates,
            m,
            solve,
        } => cmd_discrim(channel_n, channel_m, rates, *m, solve),
        Cmd::RateBound {
            channel,
            epsilon,
            n,
            solve,
        } => cmd_rate_bound(channel, *epsilon, *n, solve),
        Cmd::Selftest { seed, suite } => cmd_selftest(*seed, suite.as_deref()),
    }
}

fn cmd_state_div(rho: &PathBuf, sigma: &PathBuf, solve: &SolveArgs) -> Result<Outcome> {
    validate(solve)?;
    let alphas = alpha_list(solve)?;
    let rho = load_state(rho)?;
    let sigma = load_state(sigma)?;
    if rho.op.dim != sigma.op.dim {
        return Err(Error::DimensionMismatch(format!(
            "state dims {} vs {}",
            rho.op.dim, sigma.op.dim
        )));
    }
    let opts = sharp_opts(solve);
    let mut rows = Vec::new();
    let mut partial = false;
    for &alpha in &alphas {
        let sand = d_sandwiched(&rho.op, &sigma.op, alpha)?;
        let geo = d_geometric(&rho.op, &sigma.op, alpha)?;
        let dm = d_max(&rho.op, &sigma.op)?;
        match d_sharp_state(&rho, &sigma, alpha, &opts) {
            Ok(r) => rows.push(vec![
                fmt(alpha),
                fmt(r.d_lo),
                fmt(r.d_hi),
                fmt(sand),
                fmt(geo),
                fmt(dm),
                fmt(r.value_q),
                r.solver.map(|s| s.iterations).unwrap_or(0).to_string(),
                r.solver
                    .map(|s| status_str(s.status))
                    .unwrap_or("support-violation")
                    .to_string(),
            ]),
            Err(e) => {
                partial = true;
                rows.push(vec![
                    fmt(alpha),
                    "nan".into(),
                    "nan".into(),
                    fmt(sand),
                    fmt(geo),
                    fmt(dm),
                    "nan".into(),
                    "0".into(),
                    e.to_string(),
                ]);
            }
        }
    }
    Ok(Outcome {
        table: Table {
            header: vec![
                "alpha",
                "d_sharp_lo",
                "d_sharp_hi",
                "d_sandwiched",
                "d_geometric",
                "d_max",
                "q_sharp",
                "iterations",
                "status",
            ],
            rows,
        },
        partial,
    })
}

fn cmd_channel_div(channel_n: &str, channel_m: &str, solve: &SolveArgs) -> Result<Outcome> {
    validate(solve)?;
    let alphas = alpha_list(solve)?;
    let n = load_channel(channel_n)?;
    let m = load_channel(channel_m)?;
    let opts = channel_opts(solve);
    let mut rows = Vec::new();
    let mut partial = false;
    for &alpha in &alphas {
        match d_sharp_channel(&n, &m, alpha, &opts) {
            Ok(r) => rows.push(vec![
                fmt(alpha),
                fmt(r.d_lo),
                fmt(r.d_hi),
                fmt(r.value_q),
                r.solver.map(|s| s.iterations).unwrap_or(0).to_string(),
                r.solver
                    .map(|s| status_str(s.status))
                    .unwrap_or("support-violation")
                    .to_string(),
            ]),
            Err(e @ Error::SizeBudget { .. }) => return Err(e),
            Err(e) => {
                partial = true;
                rows.push(vec![
                    fmt(alpha),
                    "nan".into(),
                    "nan".into(),
                    "nan".into(),
                    "0".into(),
                    e.to_string(),
                ]);
            }
        }
    }
    Ok(Outcome {
        table: Table {
            header: vec![
                "alpha",
                "d_sharp_lo",
                "d_sharp_hi",
                "q_sharp",
                "iterations",
                "status",
            ],
            rows,
        },
        partial,
    })
}

fn cmd_hierarchy(channel_n: &str, channel_m: &str, m: usize, solve: &SolveArgs) -> Result<Outcome> {
    validate(solve)?;
    let alphas = alpha_list(solve)?;
    let n = load_channel(channel_n)?;
    let m_ch = load_channel(channel_m)?;
    let opts = channel_opts(solve);
    let mut rows = Vec::new();
    let mut partial = false;
    for &alpha in &alphas {
        match hierarchy_bound(&n, &m_ch, alpha, m, &opts) {
            Ok(h) => rows.push(vec![
                fmt(alpha),
                m.to_string(),
                fmt(h.upper),
                fmt(h.lower),
                fmt(h.correction),
                h.detail
                    .solver
                    .map(|s| status_str(s.status))
                    .unwrap_or("support-violation")
                    .to_string(),
            ]),
            Err(e @ Error::SizeBudget { .. }) => return Err(e),
            Err(e) => {
                partial = true;
                rows.push(vec![
                    fmt(alpha),
                    m.to_string(),
                    "nan".into(),
                    "nan".into(),
                    "nan".into(),
                    e.to_string(),
                ]);
            }
        }
    }
    Ok(Outcome {
        table: Table {
            header: vec!["alpha", "m", "upper", "lower", "correction", "status"],
            rows,
        },
        partial,
    })
}

fn cmd_capacity(channel: &str, gammas: &str, solve: &SolveArgs) -> Result<Outcome> {
    validate(solve)?;
    let alphas = alpha_list(solve)?;
    let gammas = parse_grid(gammas)?;
    let family = channel_family(channel)?;
    let rows_raw = capacity_curve(family.as_ref(), &gammas, &alphas, &channel_opts(solve));
    let mut partial = false;
    let rows = rows_raw
        .iter()
        .map(|r| {
            let status = match &r.error {
                Some(e) => {
                    partial = true;
                    e.clone()
                }
                None => "optimal".to_string(),
            };
            vec![fmt(r.gamma), fmt(r.best_alpha), fmt(r.value), status]
        })
        .collect();
    Ok(Outcome {
        table: Table {
            header: vec!["gamma", "best_alpha", "bound", "status"],
            rows,
        },
        partial,
    })
}

fn cmd_discrim(
    channel_n: &str,
    channel_m: &str,
    rates: &str,
    m: usize,
    solve: &SolveArgs,
) -> Result<Outcome> {
    validate(solve)?;
    let alphas = alpha_list(solve)?;
    let r_values = parse_grid(rates)?;
    let n = load_channel(channel_n)?;
    let m_ch = load_channel(channel_m)?;
    let rows = strong_converse_curve(&n, &m_ch, &r_values, &alphas, m, &channel_opts(solve))?
        .iter()
        .map(|row| vec![fmt(row.r), fmt(row.exponent)])
        .collect();
    Ok(Outcome {
        table: Table {
            header: vec!["rate", "exponent"],
            rows,
        },
        partial: false,
    })
}

fn cmd_rate_bound(channel: &str, epsilon: f64, n_uses: usize, solve: &SolveArgs) -> Result<Outcome> {
    validate(solve)?;
    let alphas = alpha_list(solve)?;
    let ch = load_channel(channel)?;
    let bound = two_way_rate_bound(&ch, &alphas, epsilon, n_uses, &channel_opts(solve))?;
    Ok(Outcome {
        table: Table {
            header: vec!["epsilon", "n", "bound"],
            rows: vec![vec![fmt(epsilon), n_uses.to_string(), fmt(bound)]],
        },
        partial: false,
    })
}

// ---------------------------------------------------------------- selftest

#[derive(Serialize)]
struct SuiteReport {
    name: String,
    instances: usize,
    failures: Vec<String>,
    pass: bool,
}

#[derive(Serialize)]
struct SelftestReport {
    seed: u64,
    suites: Vec<SuiteReport>,
    pass: bool,
}

fn random_psd(rng: &mut impl Rng, n: usize) -> HermitianOperator<f64> {
    let g = CMatrix::from_fn(n, n, |_, _| {
        Complex::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
    });
    HermitianOperator::from_parts(g.matmul(&g.adjoint()))
}

fn random_density(rng: &mut impl Rng, n: usize) -> QState<f64> {
    let p = random_psd(rng, n);
    let t = p.trace();
    QState::new(p.scale(1.0 / t), vec![n]).expect("psd by construction")
}

fn run_suite(
    name: &str,
    instances: usize,
    mut case: impl FnMut(usize) -> std::result::Result<(), String>,
) -> SuiteReport {
    let mut failures = Vec::new();
    for i in 0..instances {
        if let Err(msg) = case(i) {
            failures.push(format!("instance {}: {}", i, msg));
        }
    }
    SuiteReport {
        name: name.to_string(),
        instances,
        pass: failures.is_empty(),
        failures,
    }
}

fn cmd_selftest(seed: u64, suite: Option<&str>) -> Result<Outcome> {
    let mut suites = Vec::new();
    let wanted = |n: &str| suite.map(|s| s == n).unwrap_or(true);

    if wanted("ordering") {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        suites.push(run_suite("ordering", 10, |_| {
            let rho = random_density(&mut rng, 3);
            let sigma = random_density(&mut rng, 3);
            let alpha = 2.0;
            let sand = d_sandwiched(&rho.op, &sigma.op, alpha).map_err(|e| e.to_string())?;
            let sharp = d_sharp_state(&rho, &sigma, alpha, &SharpOpts::default())
                .map_err(|e| e.to_string())?
                .value_d;
            let geo = d_geometric(&rho.op, &sigma.op, alpha).map_err(|e| e.to_string())?;
            if sand > sharp + 2e-3 || sharp > geo + 2e-3 {
                return Err(format!(
                    "chain violated: {} <= {} <= {}",
                    sand, sharp, geo
                ));
            }
            Ok(())
        }));
    }

    if wanted("commuting") {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
        let opts = SharpOpts {
            bits: 12,
            ..Default::default()
        };
        suites.push(run_suite("commuting", 10, |_| {
            let n = 3;
            let p: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() + 0.1).collect();
            let q: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() + 0.1).collect();
            let alpha = [1.5, 2.0][rng.gen_range(0..2)];
            let cl = d_classical(&p, &q, alpha).map_err(|e| e.to_string())?;
            let got = d_sharp_state(&QState::from_diag(&p), &QState::from_diag(&q), alpha, &opts)
                .map_err(|e| e.to_string())?
                .value_d;
            if (got - cl).abs() > 2e-3 {
                return Err(format!("got {} want {}", got, cl));
            }
            Ok(())
        }));
    }

    if wanted("mean") {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed.wrapping_add(2));
        suites.push(run_suite("mean", 10, |_| {
            let a = random_psd(&mut rng, 3).add(&HermitianOperator::identity(3).scale(0.2));
            let b = random_psd(&mut rng, 3).add(&HermitianOperator::identity(3).scale(0.2));
            let beta = 0.375;
            // homogeneity
            let lhs = mean_eval(&a.scale(2.0), &b.scale(0.5), beta).map_err(|e| e.to_string())?;
            let rhs = mean_eval(&a, &b, beta)
                .map_err(|e| e.to_string())?
                .scale(2.0f64.powf(1.0 - beta) * 0.5f64.powf(beta));
            if lhs.sub(&rhs).op_norm() > 1e-8 * (1.0 + lhs.op_norm()) {
                return Err("homogeneity violated".into());
            }
            // tensor factorization
            let c = random_psd(&mut rng, 2).add(&HermitianOperator::identity(2).scale(0.2));
            let d = random_psd(&mut rng, 2).add(&HermitianOperator::identity(2).scale(0.2));
            let lhs = mean_eval(&a.kron(&c), &b.kron(&d), beta).map_err(|e| e.to_string())?;
            let rhs = mean_eval(&a, &b, beta)
                .map_err(|e| e.to_string())?
                .kron(&mean_eval(&c, &d, beta).map_err(|e| e.to_string())?);
            if lhs.sub(&rhs).op_norm() > 1e-8 * (1.0 + lhs.op_norm()) {
                return Err("tensor factorization violated".into());
            }
            Ok(())
        }));
    }

    if wanted("dyadic") {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed.wrapping_add(3));
        suites.push(run_suite("dyadic", 3, |_| {
            let rho = random_density(&mut rng, 3);
            let sigma = random_density(&mut rng, 3);
            let alpha = 1.5;
            let at = |bits| {
                d_sharp_state(&rho, &sigma, alpha, &SharpOpts { bits, ..Default::default() })
                    .map(|r| r.value_d)
                    .map_err(|e| e.to_string())
            };
            let (a, b) = (at(10)?, at(12)?);
            if (a - b).abs() > 1e-3 {
                return Err(format!("bracket drift {} vs {}", a, b));
            }
            Ok(())
        }));
    }

    if suites.is_empty() {
        return Err(Error::Parse(format!(
            "unknown suite '{}'; available: ordering, commuting, mean, dyadic",
            suite.unwrap_or("")
        )));
    }

    let pass = suites.iter().all(|s| s.pass);
    let report = SelftestReport { seed, suites, pass };
    let json = serde_json::to_string_pretty(&report).expect("serializable");
    let rows = vec![vec![json]];
    Ok(Outcome {
        table: Table {
            header: vec!["report"],
            rows,
        },
        // selftest failures surface through the partial exit code
        partial: !pass,
    })
}
