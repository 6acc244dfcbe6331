mod shape_arg;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use homotopy_recon::appendix::{run_monte_carlo, Lemma, MonteCarloReport};
use homotopy_recon::complexes::{build_cech_ambient, build_cech_restricted, build_rips, PointCloud, RestrictedMethod, SimplicialComplex};
use homotopy_recon::conditions::ComplexKind;
use homotopy_recon::constants::{comparison_constants, max_ratio, ratio_curve, DimConvention, RatioProblem, Regime};
use homotopy_recon::experiments::{
    offset_betti, reconstruct, ring_below_bound, semicircle_counterexample, two_point_tightness, ComplexChoice, Radii,
    ReconstructConfig, SecondRadius,
};
use homotopy_recon::homology::{betti_simplicial, BettiVector};
use homotopy_recon::sampling::{covering_probability_sim, min_covering_radius, RadiusRule, SamplingModel};
use homotopy_recon::shapes::{double_offset_field, offset_field};
use shape_arg::parse_shape;

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Core(#[from] homotopy_recon::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Usage(String),
}

type CliResult<T> = Result<T, CliError>;

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(homotopy_recon::Error::Precondition(_)) => 2,
            _ => 1,
        }
    }
}

#[derive(Parser)]
#[command(name = "homotopy-recon", version, about = "Homotopy reconstruction experiments from point-cloud samples")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a shape, check the hypotheses and compare Betti numbers.
    Reconstruct(ReconstructArgs),
    /// Largest admissible noise-to-reach ratio.
    Constants(ConstantsArgs),
    /// Empirical probability that random samples cover the shape.
    CoveringSim(CoveringArgs),
    /// Monte Carlo check of a projection inequality.
    VerifyInequalities(VerifyArgs),
    /// Cubical Betti numbers of an offset or double offset.
    Offsets(OffsetArgs),
    /// Build or inspect a simplicial complex.
    Complex {
        #[command(subcommand)]
        action: ComplexAction,
    },
    /// Betti numbers of a stored complex or of one built from a point file.
    Betti(BettiArgs),
}

#[derive(Args)]
struct Output {
    /// Write the report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct RadiusArgs {
    /// Same radius for every sample.
    #[arg(long, conflicts_with = "radii_file")]
    radius: Option<f64>,
    /// One radius per line.
    #[arg(long)]
    radii_file: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Scenario {
    /// Random samples of the shape.
    Sample,
    /// Two wide balls on the semicircle meeting off it, plus dense small balls.
    SemicircleCounterexample,
    /// Two samples on a diameter of the unit circle with restricted balls.
    TwoPointTightness,
    /// Evenly spaced samples inside the unit circle with restricted balls.
    Ring,
}

#[derive(Args)]
struct ReconstructArgs {
    #[arg(long, value_enum, default_value_t = Scenario::Sample)]
    scenario: Scenario,
    #[arg(long, default_value = "circle")]
    shape: String,
    #[arg(long, default_value_t = 200)]
    n: usize,
    #[arg(long, default_value_t = 0.0)]
    eps: f64,
    #[command(flatten)]
    radii: RadiusArgs,
    /// rips, cech or restricted-cech.
    #[arg(long, default_value = "cech")]
    complex: String,
    /// Defaults to one more than the intrinsic dimension of the shape.
    #[arg(long)]
    max_dim: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    output: Output,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Cech,
    Rips,
}

#[derive(Clone, Copy, ValueEnum)]
enum RegimeArg {
    General,
    Noisy,
}

#[derive(Args)]
struct ConstantsArgs {
    #[arg(long, value_enum, default_value_t = KindArg::Cech)]
    kind: KindArg,
    #[arg(long, value_enum, default_value_t = RegimeArg::General)]
    regime: RegimeArg,
    /// Ambient dimension, or `inf` for the large-dimension limit.
    #[arg(long, default_value = "inf")]
    dim: String,
    #[arg(long, default_value_t = 1e-5)]
    tol: f64,
    /// Also write the feasibility curve as CSV.
    #[arg(long)]
    curve_out: Option<PathBuf>,
    #[arg(long, default_value_t = 200)]
    curve_points: usize,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct CoveringArgs {
    #[arg(long, default_value = "circle")]
    shape: String,
    #[arg(long, default_value_t = 1000)]
    n: usize,
    /// Defaults to the smallest admissible radius for `n`.
    #[arg(long)]
    r_min: Option<f64>,
    /// Draw radii uniformly from `[r_min, r_max]`.
    #[arg(long)]
    r_max: Option<f64>,
    #[arg(long, default_value_t = 500)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct VerifyArgs {
    /// a1, a2, federer, a4, a5, a6 or d3.
    #[arg(long)]
    lemma: String,
    #[arg(long, default_value = "circle")]
    shape: String,
    #[arg(long, default_value_t = 100_000)]
    cases: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct OffsetArgs {
    #[arg(long, default_value = "circle")]
    shape: String,
    #[arg(long)]
    r: f64,
    /// Second radius of the double offset: a number or `auto-mu`.
    #[arg(long)]
    s: Option<String>,
    #[arg(long, default_value_t = 512)]
    resolution: usize,
    /// Also write the occupancy grid in text form.
    #[arg(long)]
    field_out: Option<PathBuf>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct CloudArgs {
    /// Point file: one point per line, `#` comments.
    #[arg(long)]
    input: PathBuf,
    /// The last column of the point file is the radius.
    #[arg(long)]
    radii_inline: bool,
    #[command(flatten)]
    radii: RadiusArgs,
    /// rips, cech or restricted-cech.
    #[arg(long, default_value = "cech")]
    kind: String,
    /// Target shape for restricted balls.
    #[arg(long)]
    shape: Option<String>,
    #[arg(long, default_value_t = 2)]
    max_dim: usize,
}

#[derive(Subcommand)]
enum ComplexAction {
    /// Build a complex from a point file and write it in text form.
    Build {
        #[command(flatten)]
        cloud: CloudArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Summarize a stored complex.
    Inspect {
        #[arg(long)]
        complex: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct BettiArgs {
    /// Stored complex in text form.
    #[arg(long, conflicts_with = "input")]
    complex: Option<PathBuf>,
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    radii_inline: bool,
    #[command(flatten)]
    radii: RadiusArgs,
    #[arg(long, default_value = "cech")]
    kind: String,
    #[arg(long)]
    shape: Option<String>,
    #[arg(long, default_value_t = 2)]
    max_dim: usize,
    /// Highest Betti number to report; defaults to `max_dim - 1`.
    #[arg(long)]
    up_to: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.into(), source })
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => fs::write(path, text).map_err(|source| CliError::Io { path: path.into(), source }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|source| CliError::Io { path: "<stdout>".into(), source })
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> CliResult<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn to_csv<T: Serialize>(rows: &[T]) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn json_only(output: &Output, value: &impl Serialize) -> CliResult<()> {
    if output.format == Format::Csv {
        return Err(CliError::Usage("this report is only available as JSON".into()));
    }
    emit(output.out.as_deref(), &to_json(value)?)
}

fn read_radii(path: &Path) -> CliResult<Vec<f64>> {
    read(path)?
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map(|(i, l)| {
            l.trim().parse::<f64>().map_err(|e| {
                CliError::Core(homotopy_recon::Error::Parse { line: i + 1, msg: e.to_string() })
            })
        })
        .collect()
}

fn radii_from(args: &RadiusArgs) -> CliResult<Option<Radii>> {
    Ok(match (&args.radius, &args.radii_file) {
        (Some(r), _) => Some(Radii::Constant(*r)),
        (None, Some(path)) => Some(Radii::PerPoint(read_radii(path)?)),
        (None, None) => None,
    })
}

fn need_radius(args: &RadiusArgs) -> CliResult<f64> {
    args.radius.ok_or_else(|| CliError::Usage("--radius is required for this scenario".into()))
}

fn cmd_reconstruct(args: &ReconstructArgs) -> CliResult<()> {
    match args.scenario {
        Scenario::Sample => {
            let shape = parse_shape(&args.shape)?;
            let radii = radii_from(&args.radii)?
                .ok_or_else(|| CliError::Usage("one of --radius or --radii-file is required".into()))?;
            let mut config = ReconstructConfig::new(shape, args.n, args.eps, 1.0, args.complex.parse()?, args.seed);
            config.radii = radii;
            if let Some(k) = args.max_dim {
                config.max_dim = k;
            }
            json_only(&args.output, &reconstruct(&config)?)
        }
        Scenario::SemicircleCounterexample => json_only(&args.output, &semicircle_counterexample(args.eps)?),
        Scenario::TwoPointTightness => json_only(&args.output, &two_point_tightness(args.eps, need_radius(&args.radii)?)?),
        Scenario::Ring => json_only(&args.output, &ring_below_bound(args.eps, args.n, need_radius(&args.radii)?)?),
    }
}

#[derive(Serialize)]
struct ConstantsReport {
    problem: String,
    value: f64,
    convention: String,
    curve_csv_path: Option<PathBuf>,
    infeasible: bool,
    first_only: f64,
    second_only: f64,
    comparison: std::collections::BTreeMap<&'static str, f64>,
}

fn cmd_constants(args: &ConstantsArgs) -> CliResult<()> {
    let kind = match args.kind {
        KindArg::Cech => ComplexKind::Cech,
        KindArg::Rips => ComplexKind::Rips,
    };
    let regime = match args.regime {
        RegimeArg::General => Regime::General,
        RegimeArg::Noisy => Regime::NoisyAsymptotic,
    };
    let dim = match args.dim.as_str() {
        "inf" => DimConvention::Limit,
        d => DimConvention::Finite(d.parse().map_err(|_| CliError::Usage(format!("bad --dim {d:?}")))?),
    };
    let problem = RatioProblem::new(kind, regime).with_dim(dim);
    let result = max_ratio(&problem, args.tol)?;
    let rhos: Vec<f64> = (1..=args.curve_points).map(|i| 0.2 * i as f64 / args.curve_points as f64).collect();
    let curve = match (&args.curve_out, args.output.format) {
        (Some(_), _) | (None, Format::Csv) => ratio_curve(&problem, &rhos)?,
        _ => Vec::new(),
    };
    if let Some(path) = &args.curve_out {
        emit(Some(path), &to_csv(&curve)?)?;
    }
    if args.output.format == Format::Csv {
        return emit(args.output.out.as_deref(), &to_csv(&curve)?);
    }
    let report = ConstantsReport {
        problem: result.problem,
        value: result.value,
        convention: result.convention,
        curve_csv_path: args.curve_out.clone(),
        infeasible: result.infeasible,
        first_only: result.first_only,
        second_only: result.second_only,
        comparison: comparison_constants(),
    };
    emit(args.output.out.as_deref(), &to_json(&report)?)
}

fn cmd_covering(args: &CoveringArgs) -> CliResult<()> {
    let shape = parse_shape(&args.shape)?;
    let model = SamplingModel::uniform(&shape)?;
    let r_min = args.r_min.unwrap_or_else(|| min_covering_radius(&model, args.n));
    let rule = match args.r_max {
        Some(max) => RadiusRule::Uniform { min: r_min, max },
        None => RadiusRule::Constant { r: r_min },
    };
    let report = covering_probability_sim(&model, args.n, rule, args.trials, args.seed)?;
    let text = match args.output.format {
        Format::Csv => to_csv(&report.trials)?,
        Format::Json => {
            #[derive(Serialize)]
            struct Wrapped<'a> {
                shape: &'a str,
                seed: u64,
                #[serde(flatten)]
                report: &'a homotopy_recon::sampling::CoveringReport,
            }
            to_json(&Wrapped { shape: &args.shape, seed: args.seed, report: &report })?
        }
    };
    emit(args.output.out.as_deref(), &text)
}

#[derive(Serialize)]
struct VerifyReport<'a> {
    shape: &'a str,
    seed: u64,
    #[serde(flatten)]
    report: MonteCarloReport,
}

fn cmd_verify(args: &VerifyArgs) -> CliResult<()> {
    let lemma: Lemma = args.lemma.parse()?;
    let shape = parse_shape(&args.shape)?;
    let report = VerifyReport { shape: &args.shape, seed: args.seed, report: run_monte_carlo(lemma, &shape, args.cases, args.seed)? };
    let text = match args.output.format {
        Format::Json => to_json(&report)?,
        Format::Csv => to_csv(&[&report.report])?,
    };
    emit(args.output.out.as_deref(), &text)
}

fn cmd_offsets(args: &OffsetArgs) -> CliResult<()> {
    let shape = parse_shape(&args.shape)?;
    let second = match args.s.as_deref() {
        None => SecondRadius::None,
        Some("auto-mu") => SecondRadius::AutoMu,
        Some(v) => SecondRadius::Fixed(v.parse().map_err(|_| CliError::Usage(format!("bad --s {v:?}")))?),
    };
    let report = offset_betti(&shape, args.r, second, args.resolution)?;
    if let Some(path) = &args.field_out {
        let field = match report.s {
            Some(s) => double_offset_field(&shape, args.r, s, args.resolution)?,
            None => offset_field(&shape, args.r, args.resolution)?,
        };
        emit(Some(path), &field.to_text())?;
    }
    json_only(&args.output, &report)
}

fn load_cloud(input: &Path, radii_inline: bool, radii: &RadiusArgs) -> CliResult<PointCloud> {
    let cloud = PointCloud::from_text(&read(input)?, radii_inline)?;
    Ok(match radii_from(radii)? {
        Some(Radii::Constant(r)) => cloud.with_constant_radius(r)?,
        Some(Radii::PerPoint(r)) => cloud.with_radii(r)?,
        None => cloud,
    })
}

fn build(cloud: &PointCloud, kind: &str, shape: Option<&str>, max_dim: usize) -> CliResult<SimplicialComplex> {
    Ok(match kind.parse::<ComplexChoice>()? {
        ComplexChoice::Rips => build_rips(cloud, max_dim)?,
        ComplexChoice::Cech => build_cech_ambient(cloud, max_dim)?,
        ComplexChoice::RestrictedCech => {
            let shape = shape.ok_or_else(|| CliError::Usage("restricted-cech needs --shape".into()))?;
            build_cech_restricted(cloud, &parse_shape(shape)?, max_dim, RestrictedMethod::Auto)?
        }
    })
}

#[derive(Serialize)]
struct ComplexSummary {
    vertices: usize,
    max_dim: usize,
    counts: Vec<usize>,
    indeterminate: usize,
}

fn cmd_complex(action: &ComplexAction) -> CliResult<()> {
    match action {
        ComplexAction::Build { cloud, out } => {
            let c = load_cloud(&cloud.input, cloud.radii_inline, &cloud.radii)?;
            let complex = build(&c, &cloud.kind, cloud.shape.as_deref(), cloud.max_dim)?;
            emit(out.as_deref(), &complex.to_text())
        }
        ComplexAction::Inspect { complex, out } => {
            let c = SimplicialComplex::from_text(&read(complex)?)?;
            let summary =
                ComplexSummary { vertices: c.n_vertices(), max_dim: c.max_dim(), counts: c.counts(), indeterminate: c.indeterminate };
            emit(out.as_deref(), &to_json(&summary)?)
        }
    }
}

#[derive(Serialize)]
struct BettiReport {
    betti: BettiVector,
    euler_characteristic: i64,
    counts: Vec<usize>,
}

fn cmd_betti(args: &BettiArgs) -> CliResult<()> {
    let complex = match (&args.complex, &args.input) {
        (Some(path), _) => SimplicialComplex::from_text(&read(path)?)?,
        (None, Some(input)) => {
            let cloud = load_cloud(input, args.radii_inline, &args.radii)?;
            build(&cloud, &args.kind, args.shape.as_deref(), args.max_dim)?
        }
        (None, None) => return Err(CliError::Usage("one of --complex or --input is required".into())),
    };
    let up_to = args.up_to.unwrap_or(complex.max_dim().saturating_sub(1));
    let betti = betti_simplicial(&complex, up_to)?;
    let report = BettiReport { euler_characteristic: betti.euler_characteristic(), betti, counts: complex.counts() };
    emit(args.out.as_deref(), &to_json(&report)?)
}

fn run(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Reconstruct(a) => cmd_reconstruct(a),
        Command::Constants(a) => cmd_constants(a),
        Command::CoveringSim(a) => cmd_covering(a),
        Command::VerifyInequalities(a) => cmd_verify(a),
        Command::Offsets(a) => cmd_offsets(a),
        Command::Complex { action } => cmd_complex(action),
        Command::Betti(a) => cmd_betti(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
