use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use smoothcert::batch::{
    self, certify_batch, concentrated_logistic_suite, parse_grid, read_jsonl, CertifySettings,
    InputSource, RunConfig, SampleFormat,
};
use smoothcert::{MeasureKind, Method, Sigma};

/// Exit status when some inputs could not be certified.
const PARTIAL_FAILURE: u8 = 2;

#[derive(Parser)]
#[command(
    name = "smoothcert",
    version,
    about = "Certified score bounds for Gaussian-smoothed classifiers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Certify every input and write certificates as JSON lines.
    Certify(CertifyArgs),
    /// Turn a certificate file into a certified-fraction curve.
    Curve(CurveArgs),
    /// Write a synthetic input spec of concentrated logistic classifiers.
    Suite(SuiteArgs),
}

#[derive(Args)]
struct CertifyArgs {
    /// Score-sample file (CSV or binary).
    #[arg(
        long,
        conflicts_with = "synthetic",
        required_unless_present = "synthetic"
    )]
    input: Option<PathBuf>,
    /// Sample file format; inferred from the extension when omitted.
    #[arg(long, value_enum, requires = "input")]
    format: Option<FormatArg>,
    /// Synthetic input spec (JSON).
    #[arg(long)]
    synthetic: Option<PathBuf>,
    /// Noise samples per synthetic input.
    #[arg(long, default_value_t = batch::DEFAULT_SYNTHETIC_SAMPLES)]
    m: usize,
    #[arg(long)]
    sigma: f64,
    #[arg(long, default_value_t = batch::DEFAULT_ALPHA)]
    alpha: f64,
    /// Number of score levels for the CDF method.
    #[arg(long, default_value_t = batch::DEFAULT_LEVELS)]
    levels: usize,
    #[arg(long, default_value_t = smoothcert::SearchParams::DEFAULT_TAU)]
    tau: f64,
    /// Search ceiling; defaults to 50 sigma.
    #[arg(long)]
    rmax: Option<f64>,
    #[arg(long, value_enum, default_values_t = [MeasureArg::AverageScore])]
    measure: Vec<MeasureArg>,
    #[arg(long, value_enum, default_values_t = [MethodArg::Naive, MethodArg::Cdf])]
    method: Vec<MethodArg>,
    #[arg(long, required = true)]
    threshold: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also certify upper bounds.
    #[arg(long)]
    upper: bool,
    /// Certificate output; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write a curve table here.
    #[arg(long)]
    curve: Option<PathBuf>,
    /// Radius grid for --curve: `start:stop:step` or a comma list.
    #[arg(long, default_value = "0:1:0.05", requires = "curve")]
    grid: String,
}

#[derive(Args)]
struct CurveArgs {
    #[arg(long)]
    certificates: PathBuf,
    #[arg(long)]
    grid: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SuiteArgs {
    #[arg(long, default_value_t = 200)]
    count: usize,
    #[arg(long, default_value_t = 16)]
    dimension: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Binary,
}

#[derive(Clone, Copy, ValueEnum)]
enum MeasureArg {
    AverageScore,
    Margin,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Naive,
    Cdf,
    BestBaseline,
}

impl From<MeasureArg> for MeasureKind {
    fn from(m: MeasureArg) -> Self {
        match m {
            MeasureArg::AverageScore => MeasureKind::AverageScore,
            MeasureArg::Margin => MeasureKind::Margin,
        }
    }
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Naive => Method::Naive,
            MethodArg::Cdf => Method::Cdf,
            MethodArg::BestBaseline => Method::BestBaseline,
        }
    }
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn certify(args: CertifyArgs) -> Result<ExitCode> {
    let sigma = Sigma::new(args.sigma)?;
    let source = match (&args.input, &args.synthetic) {
        (Some(path), None) => InputSource::SamplesFile {
            path: path.clone(),
            format: match args.format {
                Some(FormatArg::Csv) => SampleFormat::Csv,
                Some(FormatArg::Binary) => SampleFormat::Binary,
                None => SampleFormat::from_path(path),
            },
        },
        (None, Some(path)) => InputSource::SyntheticFile(path.clone()),
        _ => bail!("exactly one of --input and --synthetic is required"),
    };
    let grid = match args.curve {
        Some(_) => Some(parse_grid(&args.grid)?),
        None => None,
    };
    let settings = CertifySettings {
        sigma,
        alpha: args.alpha,
        m: args.m,
        n_levels: args.levels,
        measures: args.measure.into_iter().map(Into::into).collect(),
        thresholds: args.threshold,
        methods: args.method.into_iter().map(Into::into).collect(),
        tau: args.tau,
        r_max: args.rmax,
        seed: args.seed,
        upper: args.upper,
    };
    let report = certify_batch(&RunConfig::new(source, settings))?;

    batch::write_jsonl(output(args.out.as_deref())?, &report.certificates)
        .context("writing certificates")?;
    if let (Some(path), Some(grid)) = (&args.curve, grid) {
        if report.certificates.is_empty() {
            bail!("no certificates to build a curve from");
        }
        batch::curve(&report.certificates, &grid)?
            .write_csv(output(Some(path))?)
            .context("writing curve")?;
    }

    for failure in &report.failures {
        eprintln!("input {}: {}", failure.input_id, failure.message);
    }
    if report.failures.is_empty() {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!(
            "{} of {} inputs failed",
            report.failures.len(),
            report.inputs
        );
        Ok(ExitCode::from(PARTIAL_FAILURE))
    }
}

fn curve(args: CurveArgs) -> Result<ExitCode> {
    let file = File::open(&args.certificates)
        .with_context(|| format!("cannot read {}", args.certificates.display()))?;
    let certs = read_jsonl(BufReader::new(file))?;
    let grid = parse_grid(&args.grid)?;
    batch::curve(&certs, &grid)?.write_csv(output(args.out.as_deref())?)?;
    Ok(ExitCode::SUCCESS)
}

fn suite(args: SuiteArgs) -> Result<ExitCode> {
    if args.count == 0 || args.dimension == 0 {
        bail!("--count and --dimension must be positive");
    }
    let spec = concentrated_logistic_suite(args.count, args.dimension, args.seed);
    let mut out = output(args.out.as_deref())?;
    writeln!(out, "{}", spec.to_json())?;
    out.flush()?;
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Certify(args) => certify(args),
        Command::Curve(args) => curve(args),
        Command::Suite(args) => suite(args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
