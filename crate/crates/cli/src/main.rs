use std::io;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use rosenblatt::charfn::charfn_eps;
use rosenblatt::dist::{density_table, grid, ks_statistic, quantile, sample, InversionConfig};
use rosenblatt::fbm::{simulate_fbm, Hurst};
use rosenblatt::lrdmix::{approx_error_report, build_mixture_with, log_grid, simulate_lrd, CorrKind, WeightScheme};
use rosenblatt::mc::{run_monte_carlo, Functional, FunctionalSpec};
use rosenblatt::spectrum::{choose_m_with, eig_approx_with, Correction, Spectrum, TailRule};
use rosenblatt::Error;

mod output;
use output::{fmt, Sink};

#[derive(Parser)]
#[command(name = "rosenblatt", version, about = "Rosenblatt distribution and long-memory simulations")]
struct Cli {
    /// Worker threads for simulations and Monte-Carlo runs (output does not depend on it).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Approximate eigenvalues of the Riesz operator.
    Eigs(EigsArgs),
    /// Characteristic function on a z-grid.
    Charfn(CharfnArgs),
    /// Density, log-density and CDF on an x-grid.
    Density(TableArgs),
    /// Same table as `density`.
    Cdf(TableArgs),
    /// Quantiles at the given levels.
    Quantile(QuantileArgs),
    /// Exact draws of the truncated Rosenblatt variable.
    Sample(SampleArgs),
    /// Long-memory Gaussian sequence by AR(1) superposition.
    SimulateLrd(LrdArgs),
    /// Fractional Brownian motion on [0, 1].
    SimulateFbm(FbmArgs),
    /// Monte-Carlo experiments.
    Mc {
        #[command(subcommand)]
        command: McCommand,
    },
    /// Exponential-mixture approximation error of the correlation function.
    CorrAudit(AuditArgs),
}

#[derive(Subcommand)]
enum McCommand {
    /// Replicates of a normalised functional and their distance to the Rosenblatt law.
    Run(McArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
    Bin,
}

#[derive(Clone, Copy, ValueEnum)]
enum CorrArg {
    Power,
    Ml,
}

impl From<CorrArg> for CorrKind {
    fn from(c: CorrArg) -> Self {
        match c {
            CorrArg::Power => CorrKind::Power,
            CorrArg::Ml => CorrKind::MittagLeffler,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum CorrectionArg {
    Published,
    ReferenceCode,
}

#[derive(Clone, Copy, ValueEnum)]
enum WeightsArg {
    QuantileGaps,
    ReferenceCode,
}

#[derive(Clone, Copy, ValueEnum)]
enum FunctionalArg {
    Mean,
    Corr,
    Sojourn,
    Quadvar,
}

/// Which spectrum: a fixed truncation `--m` or a tail tolerance `--eps`.
#[derive(Args, Clone)]
struct SpectrumArgs {
    /// Rosenblatt shape, 0 ≤ a < 1/2.
    #[arg(long)]
    a: f64,
    /// Number of eigenvalues.
    #[arg(long, conflicts_with = "eps")]
    m: Option<usize>,
    /// Tail tolerance for choosing M (default 1e-4 when --m is absent).
    #[arg(long)]
    eps: Option<f64>,
}

impl SpectrumArgs {
    fn build(&self) -> Result<Spectrum, CliError> {
        check_shape(self.a)?;
        match self.m {
            Some(0) => Err(CliError::flag("--m", "must be at least 1")),
            Some(m) => Spectrum::build(self.a, m).map_err(|e| CliError::lib("--a/--m", e)),
            None => Spectrum::for_eps(self.a, self.eps.unwrap_or(1e-4)).map_err(|e| CliError::lib("--a/--eps", e)),
        }
    }
}

#[derive(Args, Clone)]
struct QuadArgs {
    /// Initial cut-off of the inversion integrals.
    #[arg(long = "quad-zmax", default_value_t = 20.0)]
    zmax: f64,
    /// Absolute tolerance of the inversion integrals.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
}

impl QuadArgs {
    fn config(&self) -> Result<InversionConfig, CliError> {
        if !(self.zmax > 0.0) {
            return Err(CliError::flag("--quad-zmax", "must be positive"));
        }
        if !(self.tol > 0.0) {
            return Err(CliError::flag("--tol", "must be positive"));
        }
        Ok(InversionConfig { zmax: self.zmax, tol: self.tol })
    }
}

#[derive(Args)]
struct OutArgs {
    /// Output file (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct EigsArgs {
    /// Rosenblatt shape, 0 ≤ a < 1/2.
    #[arg(long, required_unless_present = "a_range")]
    a: Option<f64>,
    /// Number of eigenvalues.
    #[arg(long, conflicts_with = "eps")]
    m: Option<usize>,
    /// Tail tolerance for choosing M (default 1e-4 when --m is absent).
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long, value_enum, default_value = "published")]
    correction: CorrectionArg,
    /// Sweep the shape over `start:stop:step` instead of printing one spectrum.
    #[arg(long, value_name = "START:STOP:STEP")]
    a_range: Option<String>,
    /// With --a-range: eigenvalue indices to report (e.g. 1,2,8).
    #[arg(long, value_delimiter = ',')]
    index: Vec<usize>,
    /// With --a-range: truncation levels M of Σ_{n≤M} λ_n² to report (e.g. 100,500,2000).
    #[arg(long, value_delimiter = ',')]
    partial_sums: Vec<usize>,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct CharfnArgs {
    #[command(flatten)]
    spectrum: SpectrumArgs,
    #[arg(long, default_value_t = -10.0, allow_negative_numbers = true)]
    zmin: f64,
    #[arg(long = "zmax", default_value_t = 10.0, allow_negative_numbers = true)]
    zmax: f64,
    #[arg(long, default_value_t = 0.05)]
    step: f64,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct TableArgs {
    #[command(flatten)]
    spectrum: SpectrumArgs,
    #[arg(long, default_value_t = -4.0, allow_negative_numbers = true)]
    xmin: f64,
    #[arg(long, default_value_t = 6.0, allow_negative_numbers = true)]
    xmax: f64,
    #[arg(long, default_value_t = 0.05)]
    step: f64,
    /// Cut-off of the inversion integrals.
    #[arg(long = "quad-zmax", default_value_t = 20.0)]
    quad_zmax: f64,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct QuantileArgs {
    #[command(flatten)]
    spectrum: SpectrumArgs,
    /// Probability levels in (0, 1).
    #[arg(long, value_delimiter = ',', required = true)]
    p: Vec<f64>,
    #[command(flatten)]
    quad: QuadArgs,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct SampleArgs {
    #[command(flatten)]
    spectrum: SpectrumArgs,
    #[arg(long)]
    count: usize,
    #[arg(long)]
    seed: u64,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct LrdArgs {
    #[arg(long, value_enum)]
    corr: CorrArg,
    /// Decay exponent of the correlation, 0 < a < 1.
    #[arg(long)]
    a: f64,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long, value_enum, default_value = "quantile-gaps")]
    weights: WeightsArg,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct FbmArgs {
    #[arg(long)]
    hurst: f64,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    seed: u64,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct McArgs {
    #[arg(long, value_enum)]
    functional: FunctionalArg,
    /// Rosenblatt shape, 0 < a < 1/2.
    #[arg(long)]
    a: f64,
    /// Sequence length (number of fBm steps for quadvar).
    #[arg(long)]
    n: usize,
    #[arg(long)]
    reps: usize,
    #[arg(long)]
    seed: u64,
    /// Lag k of the correlation functional.
    #[arg(long)]
    lag: Option<usize>,
    /// Level u of the sojourn functional.
    #[arg(long)]
    level: Option<f64>,
    #[arg(long, value_enum, default_value = "power")]
    corr: CorrArg,
    /// Tail tolerance of the reference Rosenblatt spectrum.
    #[arg(long, default_value_t = 1e-4)]
    eps: f64,
    /// Path prefix: writes `<out>.json` (summary) and `<out>.csv` (x, kde, rosenblatt_pdf).
    /// The summary goes to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the raw replicate values, one per line.
    #[arg(long)]
    replicates_out: Option<PathBuf>,
}

#[derive(Args)]
struct AuditArgs {
    #[arg(long, value_enum)]
    corr: CorrArg,
    #[arg(long)]
    a: f64,
    #[arg(long, default_value_t = 0.1)]
    tmin: f64,
    #[arg(long, default_value_t = 1e4)]
    tmax: f64,
    /// Number of log-spaced lags.
    #[arg(long, default_value_t = 200)]
    points: usize,
    #[arg(long, value_enum, default_value = "quantile-gaps")]
    weights: WeightsArg,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Debug)]
enum CliError {
    /// Bad flag value or domain violation (exit 2).
    Usage(String),
    /// Numerical failure (exit 3).
    Numerical(String),
    Io(io::Error),
}

impl CliError {
    fn flag(flag: &str, msg: &str) -> Self {
        CliError::Usage(format!("{flag}: {msg}"))
    }

    fn lib(flags: &str, e: Error) -> Self {
        match e {
            Error::Numerical { .. } => CliError::Numerical(e.to_string()),
            other => CliError::Usage(format!("{flags}: {other}")),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Numerical { .. } => CliError::Numerical(e.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    }
}

fn check_shape(a: f64) -> Result<(), CliError> {
    if (0.0..0.5).contains(&a) {
        Ok(())
    } else {
        Err(CliError::flag("--a", &format!("must satisfy 0 ≤ a < 1/2, got {a}")))
    }
}

fn checked_grid(lo: f64, hi: f64, step: f64, names: &str) -> Result<Vec<f64>, CliError> {
    grid(lo, hi, step).map_err(|e| CliError::lib(names, e))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(k) = cli.threads {
        if k == 0 {
            eprintln!("error: --threads: must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(k).build_global() {
            eprintln!("error: --threads: {e}");
            return ExitCode::from(2);
        }
    }
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(CliError::Numerical(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
        Err(CliError::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(CliError::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Eigs(args) => eigs(args),
        Command::Charfn(args) => charfn(args),
        Command::Density(args) | Command::Cdf(args) => table(args),
        Command::Quantile(args) => quantiles(args),
        Command::Sample(args) => draw(args),
        Command::SimulateLrd(args) => lrd(args),
        Command::SimulateFbm(args) => fbm(args),
        Command::Mc { command: McCommand::Run(args) } => mc_run(args),
        Command::CorrAudit(args) => audit(args),
    }
}

fn eigs(args: EigsArgs) -> Result<(), CliError> {
    let correction = match args.correction {
        CorrectionArg::Published => Correction::Published,
        CorrectionArg::ReferenceCode => Correction::ReferenceCode,
    };
    let mut sink = Sink::open(args.out.out.as_deref())?;
    if let Some(range) = &args.a_range {
        let shapes = parse_range(range)?;
        if args.index.is_empty() == args.partial_sums.is_empty() {
            return Err(CliError::flag("--a-range", "needs exactly one of --index or --partial-sums"));
        }
        if args.index.contains(&0) {
            return Err(CliError::flag("--index", "eigenvalues are numbered from 1"));
        }
        let mut rows = Vec::new();
        for &a in &shapes {
            check_shape(a)?;
            for &n in &args.index {
                rows.push((a, n, eig_approx_with(a, n, correction)?));
            }
            for &m in &args.partial_sums {
                let spec = Spectrum::build_with(a, m, correction)?;
                rows.push((a, m, spec.power_sum(2)));
            }
        }
        let col = if args.index.is_empty() { "M,sum_lambda_sq" } else { "n,lambda" };
        return match args.out.format {
            Format::Csv => {
                sink.line(&format!("a,{col}"))?;
                for (a, k, v) in rows {
                    sink.line(&format!("{},{k},{}", fmt(a), fmt(v)))?;
                }
                sink.finish()
            }
            Format::Json => {
                let key = if args.index.is_empty() { "M" } else { "n" };
                let rows: Vec<_> = rows
                    .iter()
                    .map(|(a, k, v)| json!({ "a": a, key: k, "value": v }))
                    .collect();
                sink.json(&json!(rows))
            }
            Format::Bin => Err(CliError::flag("--format", "bin is only available for sample and simulate-*")),
        };
    }

    let a = args.a.ok_or_else(|| CliError::flag("--a", "required"))?;
    check_shape(a)?;
    let spec = match args.m {
        Some(0) => return Err(CliError::flag("--m", "must be at least 1")),
        Some(m) => Spectrum::build_with(a, m, correction).map_err(|e| CliError::lib("--a/--m", e))?,
        None => {
            let m = choose_m_with(a, args.eps.unwrap_or(1e-4), TailRule::default())
                .map_err(|e| CliError::lib("--a/--eps", e))?;
            Spectrum::build_with(a, m, correction)?
        }
    };
    match args.out.format {
        Format::Csv => {
            sink.line("n,lambda")?;
            for (i, l) in spec.lambdas.iter().enumerate() {
                sink.line(&format!("{},{}", i + 1, fmt(*l)))?;
            }
            sink.line(&format!("sigma_eps2,{}", fmt(spec.sigma_eps2)))?;
            sink.finish()
        }
        Format::Json => sink.json(&serde_json::to_value(&spec).expect("spectrum serialises")),
        Format::Bin => Err(CliError::flag("--format", "bin is only available for sample and simulate-*")),
    }
}

fn parse_range(s: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<f64> = s
        .split(':')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::flag("--a-range", "expected START:STOP:STEP"))?;
    match parts[..] {
        [lo, hi, step] => checked_grid(lo, hi, step, "--a-range"),
        _ => Err(CliError::flag("--a-range", "expected START:STOP:STEP")),
    }
}

fn charfn(args: CharfnArgs) -> Result<(), CliError> {
    let spec = args.spectrum.build()?;
    let zs = checked_grid(args.zmin, args.zmax, args.step, "--zmin/--zmax/--step")?;
    let values: Vec<_> = zs.iter().map(|&z| (z, charfn_eps(&spec, z))).collect();
    let mut sink = Sink::open(args.out.out.as_deref())?;
    match args.out.format {
        Format::Csv => {
            sink.line("z,re,im")?;
            for (z, c) in values {
                sink.line(&format!("{},{},{}", fmt(z), fmt(c.re), fmt(c.im)))?;
            }
            sink.finish()
        }
        Format::Json => sink.json(&json!({
            "a": spec.a,
            "M": spec.m,
            "z": zs,
            "re": values.iter().map(|v| v.1.re).collect::<Vec<_>>(),
            "im": values.iter().map(|v| v.1.im).collect::<Vec<_>>(),
        })),
        Format::Bin => Err(CliError::flag("--format", "bin is only available for sample and simulate-*")),
    }
}

fn table(args: TableArgs) -> Result<(), CliError> {
    let spec = args.spectrum.build()?;
    let cfg = QuadArgs { zmax: args.quad_zmax, tol: args.tol }.config()?;
    let xs = checked_grid(args.xmin, args.xmax, args.step, "--xmin/--xmax/--step")?;
    let t = density_table(&spec, &xs, &cfg)?;
    let mut sink = Sink::open(args.out.out.as_deref())?;
    match args.out.format {
        Format::Csv => {
            sink.line("x,pdf,log_pdf,cdf")?;
            for (j, lp) in t.log_pdf().iter().enumerate() {
                sink.line(&format!("{},{},{},{}", fmt(t.xs[j]), fmt(t.pdf[j]), fmt(*lp), fmt(t.cdf[j])))?;
            }
            sink.finish()
        }
        Format::Json => sink.json(&serde_json::to_value(&t).expect("table serialises")),
        Format::Bin => Err(CliError::flag("--format", "bin is only available for sample and simulate-*")),
    }
}

fn quantiles(args: QuantileArgs) -> Result<(), CliError> {
    let spec = args.spectrum.build()?;
    let cfg = args.quad.config()?;
    if let Some(p) = args.p.iter().find(|p| !(**p > 0.0 && **p < 1.0)) {
        return Err(CliError::flag("--p", &format!("levels must lie in (0, 1), got {p}")));
    }
    let xs = args
        .p
        .iter()
        .map(|&p| quantile(&spec, p, &cfg))
        .collect::<Result<Vec<f64>, _>>()?;
    let mut sink = Sink::open(args.out.out.as_deref())?;
    match args.out.format {
        Format::Csv => {
            sink.line("p,x")?;
            for (p, x) in args.p.iter().zip(&xs) {
                sink.line(&format!("{},{}", fmt(*p), fmt(*x)))?;
            }
            sink.finish()
        }
        Format::Json => sink.json(&json!({ "a": spec.a, "M": spec.m, "p": args.p, "x": xs })),
        Format::Bin => Err(CliError::flag("--format", "bin is only available for sample and simulate-*")),
    }
}

fn write_series(out: &OutArgs, header: &str, values: &[f64], index: Option<&dyn Fn(usize) -> f64>) -> Result<(), CliError> {
    let mut sink = Sink::open(out.out.as_deref())?;
    match out.format {
        Format::Csv => {
            sink.line(header)?;
            for (i, v) in values.iter().enumerate() {
                match index {
                    Some(f) => sink.line(&format!("{},{}", fmt(f(i)), fmt(*v)))?,
                    None => sink.line(&fmt(*v))?,
                }
            }
            sink.finish()
        }
        Format::Bin => sink.binary(values),
        Format::Json => sink.json(&json!({ "values": values })),
    }
}

fn draw(args: SampleArgs) -> Result<(), CliError> {
    if args.count == 0 {
        return Err(CliError::flag("--count", "must be at least 1"));
    }
    let spec = args.spectrum.build()?;
    write_series(&args.out, "value", &sample(&spec, args.seed, args.count), None)
}

fn weights(w: WeightsArg) -> WeightScheme {
    match w {
        WeightsArg::QuantileGaps => WeightScheme::QuantileGaps,
        WeightsArg::ReferenceCode => WeightScheme::ReferenceCode,
    }
}

fn lrd(args: LrdArgs) -> Result<(), CliError> {
    if !(args.a > 0.0 && args.a < 1.0) {
        return Err(CliError::flag("--a", &format!("must satisfy 0 < a < 1, got {}", args.a)));
    }
    if args.n == 0 {
        return Err(CliError::flag("--n", "must be at least 1"));
    }
    let mix = build_mixture_with(args.a, args.corr.into(), weights(args.weights))?;
    write_series(&args.out, "value", &simulate_lrd(&mix, args.n, args.seed), None)
}

fn fbm(args: FbmArgs) -> Result<(), CliError> {
    let h = Hurst::new(args.hurst).map_err(|e| CliError::lib("--hurst", e))?;
    if args.n < 2 {
        return Err(CliError::flag("--n", "must be at least 2"));
    }
    let path = simulate_fbm(h, args.n, args.seed)?;
    let n = args.n as f64;
    write_series(&args.out, "t,x", &path, Some(&|i| i as f64 / n))
}

fn mc_run(args: McArgs) -> Result<(), CliError> {
    if !(args.a > 0.0 && args.a < 0.5) {
        return Err(CliError::flag("--a", &format!("must satisfy 0 < a < 1/2, got {}", args.a)));
    }
    if args.reps < 2 {
        return Err(CliError::flag("--reps", "must be at least 2"));
    }
    let functional = match args.functional {
        FunctionalArg::Mean => Functional::Mean,
        FunctionalArg::Corr => Functional::Corr {
            lag: args.lag.ok_or_else(|| CliError::flag("--lag", "required for --functional corr"))?,
        },
        FunctionalArg::Sojourn => Functional::Sojourn {
            level: args.level.ok_or_else(|| CliError::flag("--level", "required for --functional sojourn"))?,
        },
        FunctionalArg::Quadvar => Functional::Quadvar,
    };
    let fs = FunctionalSpec { functional, a: args.a, n: args.n, corr: args.corr.into() };
    fs.validate().map_err(|e| CliError::lib("--a/--n/--lag/--level", e))?;
    let spec = Spectrum::for_eps(args.a, args.eps).map_err(|e| CliError::lib("--eps", e))?;
    let cfg = InversionConfig::default();

    let ed = run_monte_carlo(&fs, args.reps, args.seed)?;
    let ks = ks_statistic(&ed.replicates, &spec, &cfg)?;
    let summary = json!({
        "params": {
            "functional": fs,
            "reps": args.reps,
            "seed": args.seed,
            "eps": args.eps,
            "M": spec.m,
        },
        "mean": ed.mean,
        "sd": ed.sd,
        "skewness": ed.skewness,
        "ks": ks,
    });

    if let Some(path) = &args.replicates_out {
        let mut sink = Sink::open(Some(path))?;
        sink.line("value")?;
        for v in &ed.replicates {
            sink.line(&fmt(*v))?;
        }
        sink.finish()?;
    }
    match &args.out {
        None => Sink::open(None)?.json(&summary),
        Some(prefix) => {
            Sink::open(Some(&with_suffix(prefix, "json")))?.json(&summary)?;
            let overlay = if ed.kde_xs.is_empty() {
                Vec::new()
            } else {
                density_table(&spec, &ed.kde_xs, &cfg)?.pdf
            };
            let mut sink = Sink::open(Some(&with_suffix(prefix, "csv")))?;
            sink.line("x,kde,rosenblatt_pdf")?;
            for ((x, k), p) in ed.kde_xs.iter().zip(&ed.kde_vals).zip(&overlay) {
                sink.line(&format!("{},{},{}", fmt(*x), fmt(*k), fmt(*p)))?;
            }
            sink.finish()
        }
    }
}

fn with_suffix(prefix: &Path, ext: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

fn audit(args: AuditArgs) -> Result<(), CliError> {
    if !(args.a > 0.0 && args.a < 1.0) {
        return Err(CliError::flag("--a", &format!("must satisfy 0 < a < 1, got {}", args.a)));
    }
    if !(args.tmin > 0.0 && args.tmax >= args.tmin) {
        return Err(CliError::flag("--tmin/--tmax", "need 0 < tmin ≤ tmax"));
    }
    if args.points == 0 {
        return Err(CliError::flag("--points", "must be at least 1"));
    }
    let mix = build_mixture_with(args.a, args.corr.into(), weights(args.weights))?;
    let report = approx_error_report(&mix, &log_grid(args.tmin, args.tmax, args.points))?;
    let mut sink = Sink::open(args.out.out.as_deref())?;
    match args.out.format {
        Format::Csv => {
            sink.line("t,target,approx,rel_err")?;
            for r in &report.rows {
                sink.line(&format!("{},{},{},{}", fmt(r.t), fmt(r.target), fmt(r.approx), fmt(r.rel_err)))?;
            }
            sink.finish()
        }
        Format::Json => sink.json(&json!({
            "mixture": mix,
            "max_rel_err": report.max_rel_err,
            "rows": report.rows,
        })),
        Format::Bin => Err(CliError::flag("--format", "bin is only available for sample and simulate-*")),
    }
}
