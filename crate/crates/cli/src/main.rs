//! `su11lac`: build lacunary SU(1,1) products, check their identities,
//! measure `d_p` distances and run convergence experiments.
//!
//! Exit codes: 0 success, 1 a check failed, 2 invalid input, 3 budget or
//! overflow.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;

use su11_lacunary::lab::{run_experiment, ExperimentConfig, ExperimentReport};
use su11_lacunary::metric::{
    c_p, cauchy_bound_checks, d_p_between, identity_profile, write_distance_csv,
    write_profile_csv, DistanceRow,
};
use su11_lacunary::product::{
    centered_identity, energy_identity, min_gap_check, nonlinear_parseval, partial_product, s_mn,
};
use su11_lacunary::repr::{
    multiplicity_bound_check, representation_report, uniqueness_check, MultiplicityBoundReport,
    RepresentationReport, UniquenessReport,
};
use su11_lacunary::{
    CoefficientSequence, Error, LacunarySequence, Tolerances, TorusGrid, TrigPolyPair,
};

/// Oversampling of the minimal grid used by `check` for the Parseval line.
const PARSEVAL_OVERSAMPLING: usize = 4;
const PARSEVAL_TOL: f64 = 1e-8;

#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Self { code: 2, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Budget(_) | Error::Overflow | Error::QuadratureFailed { .. } => 3,
            _ => 2,
        };
        Self { code, message: e.to_string() }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

#[derive(Parser, Debug)]
#[command(name = "su11lac", version, about = "Lacunary SU(1,1) trigonometric products")]
struct Cli {
    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true, env = "SU11LAC_THREADS")]
    threads: Option<usize>,
    /// Largest number of factors in one window.
    #[arg(long, global = true)]
    max_factors: Option<usize>,
    /// Largest window for exhaustive representation checks.
    #[arg(long, global = true)]
    max_window: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Expand the product over (M, N] and write the polynomial pair as JSON.
    Build(BuildArgs),
    /// Run the identity, separation, Parseval, autocorrelation and C_p checks.
    Check(CheckArgs),
    /// Run an experiment described by a TOML file.
    Experiment(ExperimentArgs),
    /// Enumerate signed representations and check uniqueness and multiplicity.
    Representations(ReprArgs),
    /// d_p distances for a window, or between two pair files.
    Metric(MetricArgs),
    /// The constant C_p.
    Cp(CpArgs),
}

/// A coefficient given as `re` or `re:im`.
fn parse_complex(s: &str) -> std::result::Result<Complex64, String> {
    let num = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("`{x}`: {e}"));
    match s.split_once(':') {
        Some((re, im)) => Ok(Complex64::new(num(re)?, num(im)?)),
        None => Ok(Complex64::new(num(s)?, 0.0)),
    }
}

#[derive(Args, Debug, Clone)]
struct ProductArgs {
    /// Lacunarity ratio q.
    #[arg(long, default_value_t = 2.0)]
    q: f64,
    /// Explicit frequencies m_1, m_2, ...; otherwise m_1 = 1, m_{j+1} = ceil(q m_j).
    #[arg(long, value_delimiter = ',')]
    m_list: Option<Vec<i64>>,
    /// Off-diagonal coefficients B_j (one value is repeated).
    #[arg(long, value_delimiter = ',', value_parser = parse_complex, allow_hyphen_values = true, conflicts_with = "f")]
    b: Option<Vec<Complex64>>,
    /// Disk coefficients F_j = B_j / A_j with |F_j| < 1 (one value is repeated).
    #[arg(long, value_delimiter = ',', value_parser = parse_complex, allow_hyphen_values = true)]
    f: Option<Vec<Complex64>>,
    /// Window start M.
    #[arg(long, default_value_t = 0)]
    m: usize,
    /// Window end N.
    #[arg(long)]
    n: Option<usize>,
}

struct ProductInput {
    coeffs: CoefficientSequence,
    freqs: LacunarySequence,
    m: usize,
    n: usize,
}

fn broadcast(values: &[Complex64], count: usize) -> CliResult<Vec<Complex64>> {
    match values.len() {
        1 => Ok(vec![values[0]; count]),
        l if l >= count => Ok(values[..count].to_vec()),
        l => Err(Failure::input(format!("{l} coefficients given, {count} needed"))),
    }
}

impl ProductArgs {
    fn resolve(&self, min_n: usize) -> CliResult<ProductInput> {
        let n = self.n.unwrap_or(0).max(min_n);
        if self.m > n {
            return Err(Failure::input(format!("window start {} exceeds end {n}", self.m)));
        }
        let freqs = match &self.m_list {
            Some(list) => {
                if list.len() < n {
                    return Err(Failure::input(format!("{} frequencies given, {n} needed", list.len())));
                }
                LacunarySequence::new(list.clone(), self.q)?
            }
            None if n == 0 => LacunarySequence::new(Vec::new(), self.q)?,
            None => LacunarySequence::geometric_ceil(self.q, n)?,
        };
        let coeffs = match (&self.b, &self.f) {
            (Some(b), _) => CoefficientSequence::from_b(broadcast(b, n)?)?,
            (None, Some(f)) => CoefficientSequence::from_f(broadcast(f, n)?)?,
            (None, None) => CoefficientSequence::from_b(vec![Complex64::new(0.0, 0.0); n])?,
        };
        Ok(ProductInput { coeffs, freqs, m: self.m, n })
    }
}

#[derive(Args, Debug)]
struct BuildArgs {
    #[command(flatten)]
    product: ProductArgs,
    /// Output file for the pair; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CheckArgs {
    #[command(flatten)]
    product: ProductArgs,
    /// Pair file written by `build`; rebuilt from the parameters when absent.
    #[arg(long)]
    pair: Option<PathBuf>,
    /// Exponents for the C_p bound.
    #[arg(long, value_delimiter = ',', default_value = "3")]
    p: Vec<f64>,
    /// Copy of the report.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
    Both,
}

#[derive(Args, Debug)]
struct ExperimentArgs {
    /// TOML experiment description.
    #[arg(long)]
    config: PathBuf,
    /// Path prefix for report files.
    #[arg(long, default_value = "report")]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Both)]
    format: Format,
}

#[derive(Args, Debug)]
struct ReprArgs {
    #[arg(long, default_value_t = 3.0)]
    q: f64,
    #[arg(long, value_delimiter = ',')]
    m_list: Option<Vec<i64>>,
    #[arg(long, default_value_t = 0)]
    m: usize,
    #[arg(long)]
    n: usize,
    /// Also report every representation of this integer.
    #[arg(long, allow_hyphen_values = true)]
    target: Option<i64>,
    #[arg(long, default_value_t = 23)]
    max_j: usize,
    #[arg(long, default_value_t = 23)]
    max_k: usize,
    /// JSON output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct MetricArgs {
    #[command(flatten)]
    product: ProductArgs,
    /// Exponents p.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    p: Vec<f64>,
    /// Grid points; the minimal grid 4 * maxfreq + 4 when absent.
    #[arg(long)]
    grid: Option<usize>,
    /// Pair files to compare instead of the window product.
    #[arg(long, requires = "right")]
    left: Option<PathBuf>,
    #[arg(long, requires = "left")]
    right: Option<PathBuf>,
    /// CSV with the (M, N, p, d_p, bound) rows.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// CSV with the pointwise (t, rho) profile.
    #[arg(long)]
    profile: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CpArgs {
    #[arg(long, value_delimiter = ',', default_value = "2.5,3,4")]
    p: Vec<f64>,
    #[arg(long, default_value_t = 1e-8)]
    rel_tol: f64,
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_file(path: &Path, contents: &[u8]) -> CliResult<()> {
    fs::write(path, contents).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn read_file(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn read_pair(path: &Path) -> CliResult<TrigPolyPair> {
    serde_json::from_str(&read_file(path)?)
        .map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("reports serialize") + "\n"
}

fn cmd_build(args: &BuildArgs, tol: &Tolerances) -> CliResult<bool> {
    let input = args.product.resolve(0)?;
    let pair = partial_product(&input.coeffs, &input.freqs, input.m, input.n, tol)?;
    let summary = format!(
        "window ({}, {}]: |supp a| = {}, |supp b| = {}, mean(a) = {}, S_MN = {}",
        pair.start,
        pair.end,
        pair.a.len(),
        pair.b.len(),
        num(pair.a.mean().re),
        num(s_mn(&input.coeffs, input.m, input.n)?)
    );
    match &args.out {
        Some(path) => {
            write_file(path, to_json(&pair).as_bytes())?;
            println!("{summary}");
        }
        None => {
            print!("{}", to_json(&pair));
            eprintln!("{summary}");
        }
    }
    Ok(true)
}

struct CheckLine {
    name: String,
    lhs: f64,
    rhs: f64,
    residual: Option<f64>,
    ok: bool,
}

fn cmd_check(args: &CheckArgs, tol: &Tolerances) -> CliResult<bool> {
    let pair = match &args.pair {
        Some(path) => Some(read_pair(path)?),
        None => None,
    };
    let min_n = pair.as_ref().map_or(0, |p| p.end);
    let mut input = args.product.resolve(min_n)?;
    let pair = match pair {
        Some(p) => {
            input.m = p.start;
            input.n = p.end;
            p
        }
        None => partial_product(&input.coeffs, &input.freqs, input.m, input.n, tol)?,
    };
    let mut lines = Vec::new();

    let e = energy_identity(&pair, &input.coeffs)?;
    lines.push(CheckLine { name: "energy".into(), lhs: e.lhs, rhs: e.rhs, residual: Some(e.residual), ok: e.holds(tol.identity_rel) });
    let c = centered_identity(&pair, &input.coeffs)?;
    lines.push(CheckLine { name: "centered-energy".into(), lhs: c.lhs, rhs: c.rhs, residual: Some(c.residual), ok: c.holds(tol.identity_rel) });

    let gap = min_gap_check(&pair, &input.freqs);
    lines.push(CheckLine {
        name: "frequency-gap".into(),
        lhs: gap.gap().map_or(f64::INFINITY, |g| g as f64),
        rhs: gap.required.map_or(0.0, |r| r as f64),
        residual: None,
        ok: gap.ok,
    });

    let grid = PARSEVAL_OVERSAMPLING * TorusGrid::required_size(pair.a.max_abs_frequency());
    let parseval = nonlinear_parseval(&pair, &input.coeffs, grid)?;
    lines.push(CheckLine {
        name: "nonlinear-parseval".into(),
        lhs: parseval.quadrature,
        rhs: parseval.sum_log_a,
        residual: Some(parseval.residual),
        ok: parseval.residual <= PARSEVAL_TOL,
    });

    let auto = su11_lacunary::repr::autocorrelation_bound_check(&pair, &input.coeffs, tol)?;
    lines.push(CheckLine { name: "autocorrelation-bound".into(), lhs: auto.lhs, rhs: auto.rhs, residual: None, ok: auto.ok });

    // the bound is stated for the window product, so rebuild it from the coefficients
    let bounds = cauchy_bound_checks(&input.coeffs, &input.freqs, input.m, input.n, &args.p, None, tol)?;
    for (p, b) in args.p.iter().zip(bounds) {
        lines.push(CheckLine { name: format!("cp-bound-p{p}"), lhs: b.lhs, rhs: b.rhs, residual: None, ok: b.ok });
    }

    let mut text = String::from("check,lhs,rhs,residual,ok\n");
    for l in &lines {
        text.push_str(&format!(
            "{},{},{},{},{}\n",
            l.name,
            num(l.lhs),
            num(l.rhs),
            l.residual.map(num).unwrap_or_default(),
            l.ok
        ));
    }
    print!("{text}");
    if let Some(path) = &args.out {
        write_file(path, text.as_bytes())?;
    }
    Ok(lines.iter().all(|l| l.ok))
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn write_report(report: &ExperimentReport, prefix: &Path, format: Format) -> CliResult<Vec<PathBuf>> {
    let mut written = Vec::new();
    if matches!(format, Format::Json | Format::Both) {
        let path = with_suffix(prefix, ".json");
        write_file(&path, (report.to_json().expect("reports serialize") + "\n").as_bytes())?;
        written.push(path);
    }
    if matches!(format, Format::Csv | Format::Both) {
        type Writer = fn(&ExperimentReport, &mut Vec<u8>) -> std::io::Result<()>;
        let parts: [(&str, bool, Writer); 3] = [
            ("_rows.csv", !report.rows.is_empty(), |r, w| r.write_rows_csv(w)),
            ("_pointwise.csv", !report.pointwise.is_empty(), |r, w| r.write_pointwise_csv(w)),
            ("_chain.csv", !report.chain.is_empty(), |r, w| r.write_chain_csv(w)),
        ];
        for (suffix, present, write) in parts {
            if present {
                let mut buf = Vec::new();
                write(report, &mut buf).expect("writing to memory");
                let path = with_suffix(prefix, suffix);
                write_file(&path, &buf)?;
                written.push(path);
            }
        }
    }
    Ok(written)
}

fn cmd_experiment(args: &ExperimentArgs, tol: &Tolerances) -> CliResult<bool> {
    let text = read_file(&args.config)?;
    let config: ExperimentConfig = toml::from_str(&text)
        .map_err(|e| Failure::input(format!("{}: {e}", args.config.display())))?;
    let report = run_experiment(&config, tol)?;
    let written = write_report(&report, &args.out, args.format)?;
    for path in written {
        eprintln!("wrote {}", path.display());
    }
    println!("{} {}", config.experiment.name(), report.summary.verdict);
    Ok(true)
}

#[derive(Serialize)]
struct RepresentationsOutput {
    uniqueness: UniquenessReport,
    multiplicity: MultiplicityBoundReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    query: Option<RepresentationReport>,
}

fn cmd_representations(args: &ReprArgs, tol: &Tolerances) -> CliResult<bool> {
    if args.m > args.n {
        return Err(Failure::input(format!("window start {} exceeds end {}", args.m, args.n)));
    }
    if args.n - args.m > tol.max_exhaustive_window {
        return Err(Error::Budget(format!(
            "window of {} indices exceeds the exhaustive limit of {}",
            args.n - args.m,
            tol.max_exhaustive_window
        ))
        .into());
    }
    let freqs = match &args.m_list {
        Some(list) => LacunarySequence::new(list.clone(), args.q)?,
        None => LacunarySequence::geometric_ceil(args.q, args.n.max(1))?,
    };
    let uniqueness = uniqueness_check(&freqs, args.m, args.n, tol)?;
    let multiplicity = multiplicity_bound_check(&freqs, args.m, args.n, tol)?;
    let query = match args.target {
        Some(t) => Some(representation_report(t, &freqs, args.m, args.n, args.max_j, args.max_k)?),
        None => None,
    };
    eprintln!(
        "window ({}, {}], q = {}{}: {} representable integers, {} uniqueness violations, multiplicity bound {}",
        args.m,
        args.n,
        args.q,
        if uniqueness.certified { "" } else { " (diagnostic, q < 3)" },
        uniqueness.representable,
        uniqueness.violations.len(),
        if multiplicity.ok { "holds" } else { "violated" }
    );
    let ok = !uniqueness.certified || (uniqueness.violations.is_empty() && multiplicity.ok);
    let json = to_json(&RepresentationsOutput { uniqueness, multiplicity, query });
    match &args.out {
        Some(path) => write_file(path, json.as_bytes())?,
        None => print!("{json}"),
    }
    Ok(ok)
}

fn cmd_metric(args: &MetricArgs, tol: &Tolerances) -> CliResult<bool> {
    let grid_for = |maxfreq: u64| -> CliResult<TorusGrid> {
        match args.grid {
            Some(g) => {
                let grid = TorusGrid::new(g)?;
                grid.ensure_resolves(maxfreq)?;
                Ok(grid)
            }
            None => Ok(TorusGrid::minimal_for(maxfreq)),
        }
    };
    if let (Some(left), Some(right)) = (&args.left, &args.right) {
        let (l, r) = (read_pair(left)?, read_pair(right)?);
        let grid = grid_for(l.max_abs_frequency().max(r.max_abs_frequency()))?;
        println!("p,d_p");
        for &p in &args.p {
            println!("{},{}", num(p), num(d_p_between(&l, &r, p, &grid, tol)?.value));
        }
        return Ok(true);
    }
    let input = args.product.resolve(0)?;
    let pair = partial_product(&input.coeffs, &input.freqs, input.m, input.n, tol)?;
    let grid = grid_for(pair.max_abs_frequency())?;
    let profile = identity_profile(&pair, &grid, tol)?;
    let e = s_mn(&input.coeffs, input.m, input.n)?.exp_m1();
    let mut rows = Vec::new();
    for &p in &args.p {
        if !(p.is_finite() && p > 0.0) {
            return Err(Failure::input(format!("exponent p = {p} must be positive and finite")));
        }
        let d_p = su11_lacunary::grid::lp_functional(&grid, &profile, p);
        let bound = if p > 2.0 { Some(e * c_p(p, tol.cp_rel)?) } else { None };
        rows.push(DistanceRow { m: input.m, n: input.n, p, d_p, bound });
    }
    let mut out = Vec::new();
    write_distance_csv(&mut out, &rows).expect("writing to memory");
    std::io::stdout().write_all(&out).map_err(|e| Failure::input(e.to_string()))?;
    if let Some(path) = &args.csv {
        write_file(path, &out)?;
    }
    if let Some(path) = &args.profile {
        let mut buf = Vec::new();
        write_profile_csv(&mut buf, &grid, &profile).expect("writing to memory");
        write_file(path, &buf)?;
    }
    Ok(true)
}

fn cmd_cp(args: &CpArgs) -> CliResult<bool> {
    println!("p,C_p");
    for &p in &args.p {
        println!("{},{}", num(p), num(c_p(p, args.rel_tol)?));
    }
    Ok(true)
}

fn run(cli: &Cli) -> CliResult<bool> {
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Failure::input(format!("thread pool: {e}")))?;
    }
    let mut tol = Tolerances::default();
    if let Some(f) = cli.max_factors {
        tol.max_factors = f;
    }
    if let Some(w) = cli.max_window {
        tol.max_exhaustive_window = w;
    }
    match &cli.command {
        Command::Build(a) => cmd_build(a, &tol),
        Command::Check(a) => cmd_check(a, &tol),
        Command::Experiment(a) => cmd_experiment(a, &tol),
        Command::Representations(a) => cmd_representations(a, &tol),
        Command::Metric(a) => cmd_metric(a, &tol),
        Command::Cp(a) => cmd_cp(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
