//! Command-line front end: taxonomy validation, single concept-pair and
//! set-pair queries, the full combination benchmark, and a static SVG
//! heatmap renderer.
//!
//! Exit codes: 0 success, 2 input or validation error, 3 internal error.

mod config;
mod heatmap;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use taxosim_core::bench::{
    enumerate_combos, format_value, load_cohort, load_truth, run_benchmark, set_pair_score,
    write_outputs, AlgorithmCombo, BenchConfig, BenchError, BenchRun, ComboFilter, CsSource,
    NormalizePolicy, PatientSet, RunInputs, UnknownCodePolicy,
};
use taxosim_core::concept::{cs as score_concepts, CsMeasure, LiVariant};
use taxosim_core::ic::IcMeasure;
use taxosim_core::scale::LogBase;
use taxosim_core::set::SetSimError;
use taxosim_core::taxonomy::{ConceptCode, Taxonomy, TaxonomyError};

#[derive(Parser)]
#[command(
    name = "taxosim",
    version,
    about = "Taxonomy-based semantic similarity over diagnosis code sets"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Inspect a taxonomy file
    #[command(subcommand)]
    Taxonomy(TaxonomyCommand),
    /// Score a single concept pair
    Cs(CsArgs),
    /// Score a single pair of code sets
    Setsim(SetsimArgs),
    /// Evaluate algorithm combinations over a cohort
    Benchmark(BenchmarkArgs),
    /// Render a matrix CSV as an SVG heatmap
    Heatmap(HeatmapArgs),
}

#[derive(Subcommand)]
enum TaxonomyCommand {
    /// Parse an edge list and report node, leaf, and depth counts
    Validate {
        /// CSV edge list: `child,parent`, empty parent marks the root
        #[arg(long)]
        edges: PathBuf,
    },
}

/// Tunables shared by the scoring commands. Every flag can also come
/// from a `--config` file; explicit flags win.
#[derive(Args, Default)]
struct Tuning {
    /// Sign variant of the exponential decay in the Li measure
    #[arg(long, value_name = "original|table")]
    li_variant: Option<LiVariant>,
    /// Log base of the size-difference penalty in the scale term
    #[arg(long, value_name = "e|2|10")]
    scale_log: Option<LogBase>,
    /// Rescale distance-style concept scores per run, or trust them as-is
    #[arg(long, value_name = "run|none")]
    normalize: Option<NormalizePolicy>,
    /// Cohort codes missing from the taxonomy: fail or drop them
    #[arg(long, value_name = "error|skip")]
    unknown_codes: Option<UnknownCodePolicy>,
    /// Worker threads; 0 uses every core
    #[arg(long, value_name = "N")]
    parallelism: Option<usize>,
    /// Feed self-pairs into the correlation as well
    #[arg(long)]
    include_diagonal: bool,
    /// Replace every concept score with a fixed value (test hook)
    #[arg(long, hide = true, value_name = "V")]
    constant_cs: Option<f64>,
    /// key=value file supplying defaults for the flags above
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct CsArgs {
    /// CSV edge list file
    #[arg(long)]
    edges: PathBuf,
    /// Information-content measure
    #[arg(long, default_value = "level", value_name = "level|sanchez")]
    ic: IcMeasure,
    /// Concept measure
    #[arg(long, value_name = "nguyen|path|lch|swupalmer|li|wupalmer")]
    cs: CsMeasure,
    /// First concept code
    code_a: String,
    /// Second concept code
    code_b: String,
    #[command(flatten)]
    tuning: Tuning,
}

#[derive(Args)]
struct SetsimArgs {
    /// CSV edge list file
    #[arg(long)]
    edges: PathBuf,
    /// Combination id, e.g. `ic=level,cs=wupalmer,set=mbm,scaled` or `set=dice,unscaled`
    #[arg(long)]
    combo: String,
    /// Semicolon-separated code list for the first set
    #[arg(long)]
    a: String,
    /// Semicolon-separated code list for the second set
    #[arg(long)]
    b: String,
    #[command(flatten)]
    tuning: Tuning,
}

#[derive(Args)]
struct BenchmarkArgs {
    /// CSV edge list file
    #[arg(long)]
    edges: PathBuf,
    /// Cohort CSV: `pseudonym,code1;code2;...`
    #[arg(long)]
    cohort: PathBuf,
    /// Expert similarity CSV; without it the ranking carries no correlations
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Output directory for matrices, ranking.csv, and run.json
    #[arg(long)]
    out: PathBuf,
    /// `all`, one combination id, or a substring pattern
    #[arg(long, value_name = "SELECTOR")]
    combos: Option<String>,
    #[command(flatten)]
    tuning: Tuning,
}

#[derive(Args)]
struct HeatmapArgs {
    /// Matrix CSV as written by `benchmark` (or any file in that layout)
    #[arg(long)]
    matrix: PathBuf,
    /// Output SVG path
    #[arg(long)]
    out: PathBuf,
    /// Cell edge length in pixels
    #[arg(long, default_value_t = 24)]
    cell: u32,
}

struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn input(message: impl Into<String>) -> Self {
        Self { code: 2, message: message.into() }
    }

    fn internal(message: impl Into<String>) -> Self {
        Self { code: 3, message: message.into() }
    }
}

fn taxonomy_error_name(e: &TaxonomyError) -> &'static str {
    match e {
        TaxonomyError::MultipleRoots { .. } => "MultipleRoots",
        TaxonomyError::CycleDetected { .. } => "CycleDetected",
        TaxonomyError::DuplicateChild { .. } => "DuplicateChild",
        TaxonomyError::EmptyDocument => "EmptyDocument",
        TaxonomyError::MalformedLine { .. } => "MalformedLine",
        TaxonomyError::EmptyCode => "EmptyCode",
        TaxonomyError::UnknownCode { .. } => "UnknownCode",
        TaxonomyError::UnknownCodes { .. } => "UnknownCodes",
        TaxonomyError::InvalidJson(_) => "InvalidJson",
    }
}

fn set_sim_error_name(e: &SetSimError) -> &'static str {
    match e {
        SetSimError::EmptyMatrix => "EmptyMatrix",
        SetSimError::NonFiniteWeight { .. } => "NonFiniteWeight",
        SetSimError::OutOfRangeDistance { .. } => "OutOfRangeDistance",
        SetSimError::EmptySet => "EmptySet",
    }
}

fn bench_error_name(e: &BenchError) -> &'static str {
    match e {
        BenchError::Taxonomy(inner) => taxonomy_error_name(inner),
        BenchError::SetSim(inner) => set_sim_error_name(inner),
        BenchError::Scale(_) => "ZeroSetSize",
        BenchError::DuplicatePseudonym { .. } => "DuplicatePseudonym",
        BenchError::EmptyCodeList { .. } => "EmptyCodeList",
        BenchError::MissingPseudonym { .. } => "MissingPseudonym",
        BenchError::AsymmetricTruth { .. } => "AsymmetricTruth",
        BenchError::OutOfRangeScore { .. } => "OutOfRangeScore",
        BenchError::DimensionMismatch { .. } => "DimensionMismatch",
        BenchError::ZeroVariance => "ZeroVariance",
        BenchError::TooFewPatients { .. } => "TooFewPatients",
        BenchError::MalformedLine { .. } => "MalformedLine",
        BenchError::UnknownCombo(_) => "UnknownCombo",
        BenchError::Internal(_) => "Internal",
        BenchError::Io(_) => "Io",
    }
}

impl From<TaxonomyError> for CliError {
    fn from(e: TaxonomyError) -> Self {
        CliError::input(format!("{}: {e}", taxonomy_error_name(&e)))
    }
}

impl From<BenchError> for CliError {
    fn from(e: BenchError) -> Self {
        let message = format!("{}: {e}", bench_error_name(&e));
        match e {
            BenchError::Internal(_) | BenchError::Io(_) => CliError::internal(message),
            _ => CliError::input(message),
        }
    }
}

fn read_input(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path)
        .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))
}

/// Flag values resolved against the config file and defaults.
struct Effective {
    li_variant: LiVariant,
    scale_log: LogBase,
    normalize: NormalizePolicy,
    unknown_codes: UnknownCodePolicy,
    parallelism: usize,
    include_diagonal: bool,
    constant_cs: Option<f64>,
    combos: String,
}

fn pick<T>(cli: Option<T>, file: Option<&str>, default: T, what: &str) -> Result<T, CliError>
where
    T: FromStr,
    T::Err: fmt::Display,
{
    if let Some(v) = cli {
        return Ok(v);
    }
    match file {
        Some(s) => s
            .parse()
            .map_err(|e| CliError::input(format!("config {what}: {e}"))),
        None => Ok(default),
    }
}

fn resolve(tuning: &Tuning, combos_flag: Option<&str>) -> Result<Effective, CliError> {
    let file = match &tuning.config {
        Some(path) => config::parse(&read_input(path)?).map_err(CliError::input)?,
        None => config::ConfigFile::default(),
    };
    // A bare flag can only switch the diagonal on, so presence wins and
    // absence defers to the file.
    let include_diagonal = tuning.include_diagonal
        || pick(None, file.get("include-diagonal"), false, "include-diagonal")?;
    Ok(Effective {
        li_variant: pick(
            tuning.li_variant,
            file.get("li-variant"),
            LiVariant::default(),
            "li-variant",
        )?,
        scale_log: pick(
            tuning.scale_log,
            file.get("scale-log"),
            LogBase::default(),
            "scale-log",
        )?,
        normalize: pick(
            tuning.normalize,
            file.get("normalize"),
            NormalizePolicy::default(),
            "normalize",
        )?,
        unknown_codes: pick(
            tuning.unknown_codes,
            file.get("unknown-codes"),
            UnknownCodePolicy::default(),
            "unknown-codes",
        )?,
        parallelism: pick(tuning.parallelism, file.get("parallelism"), 0, "parallelism")?,
        include_diagonal,
        constant_cs: match tuning.constant_cs {
            Some(v) => Some(v),
            None => file
                .get("constant-cs")
                .map(|s| {
                    s.parse::<f64>()
                        .map_err(|e| CliError::input(format!("config constant-cs: {e}")))
                })
                .transpose()?,
        },
        combos: combos_flag
            .map(str::to_owned)
            .or_else(|| file.get("combos").map(str::to_owned))
            .unwrap_or_else(|| "all".to_owned()),
    })
}

impl Effective {
    fn bench_config(&self) -> BenchConfig {
        BenchConfig {
            li_variant: self.li_variant,
            scale_base: self.scale_log,
            normalize: self.normalize,
            include_diagonal: self.include_diagonal,
            parallelism: self.parallelism,
            cs_source: match self.constant_cs {
                Some(v) => CsSource::Constant(v),
                None => CsSource::Real,
            },
        }
    }

    /// The resolved configuration as echoed into `run.json`.
    fn echo_json(&self) -> serde_json::Value {
        json!({
            "li_variant": self.li_variant.name(),
            "scale_log": self.scale_log.name(),
            "normalize": self.normalize.name(),
            "unknown_codes": self.unknown_codes.name(),
            "parallelism": self.parallelism,
            "include_diagonal": self.include_diagonal,
            "combos": self.combos,
            "constant_cs": self.constant_cs,
        })
    }
}

fn cmd_validate(edges: &Path) -> Result<(), CliError> {
    let tax = Taxonomy::parse_edge_list(&read_input(edges)?)?;
    println!(
        "nodes={} leaves={} max_depth={}",
        tax.node_count(),
        tax.total_leaves(),
        tax.max_depth()
    );
    Ok(())
}

fn cmd_cs(args: &CsArgs) -> Result<(), CliError> {
    let eff = resolve(&args.tuning, None)?;
    let tax = Taxonomy::parse_edge_list(&read_input(&args.edges)?)?;
    let score = score_concepts(
        &tax,
        args.ic,
        args.cs,
        eff.li_variant,
        &args.code_a,
        &args.code_b,
    )?;
    println!("{} {}", format_value(score.value), score.direction);
    Ok(())
}

fn parse_set(label: &str, raw: &str) -> Result<PatientSet, CliError> {
    let codes = raw
        .split(';')
        .filter(|s| !s.trim().is_empty())
        .map(ConceptCode::new)
        .collect::<Result<Vec<_>, _>>()?;
    PatientSet::new(label, codes).map_err(CliError::from)
}

fn cmd_setsim(args: &SetsimArgs) -> Result<(), CliError> {
    let eff = resolve(&args.tuning, None)?;
    let combo: AlgorithmCombo = args.combo.parse().map_err(CliError::from)?;
    let tax = Taxonomy::parse_edge_list(&read_input(&args.edges)?)?;
    let a = parse_set("A", &args.a)?;
    let b = parse_set("B", &args.b)?;
    let score = set_pair_score(&tax, &combo, &a, &b, &eff.bench_config())?;
    println!(
        "raw={} scaled={} size_a={} size_b={}",
        format_value(score.raw),
        format_value(score.scaled),
        score.size_a,
        score.size_b
    );
    Ok(())
}

fn cmd_benchmark(args: &BenchmarkArgs) -> Result<(), CliError> {
    let eff = resolve(&args.tuning, args.combos.as_deref())?;
    // Read every input up front so a bad path fails before any
    // computation starts or output paths are touched.
    let edges_text = read_input(&args.edges)?;
    let cohort_text = read_input(&args.cohort)?;
    let truth_text = match &args.truth {
        Some(path) => Some(read_input(path)?),
        None => None,
    };

    let tax = Taxonomy::parse_edge_list(&edges_text)?;
    let cohort = load_cohort(&cohort_text, &tax, eff.unknown_codes)?;
    let pseudonyms: Vec<String> = cohort.iter().map(|p| p.pseudonym().to_owned()).collect();
    let truth = truth_text
        .as_deref()
        .map(|t| load_truth(t, &pseudonyms))
        .transpose()?;

    let filter = ComboFilter::parse(&eff.combos);
    if !enumerate_combos().iter().any(|c| filter.matches(c)) {
        return Err(CliError::input(format!(
            "no combination matches selector {:?}",
            eff.combos
        )));
    }

    let run = run_benchmark(&tax, &cohort, truth.as_ref(), &filter, &eff.bench_config())?;

    let inputs = RunInputs {
        taxonomy: &edges_text,
        cohort: &cohort_text,
        truth: truth_text.as_deref(),
    };
    let created = !args.out.exists();
    if let Err(e) = write_outputs(&args.out, &run, &eff.echo_json(), &inputs) {
        discard_partial_outputs(&args.out, created, &run);
        return Err(e.into());
    }

    println!("combos={} out={}", run.results.len(), args.out.display());
    for (rank, idx) in run.ranking().into_iter().take(5).enumerate() {
        let result = &run.results[idx];
        let r = result.r.map_or_else(|| "nan".to_owned(), format_value);
        println!("{}. {} r={}", rank + 1, result.combo.id(), r);
    }
    Ok(())
}

/// Leave no half-written result set behind: drop the whole directory if
/// this run created it, otherwise just the files this run would own.
fn discard_partial_outputs(dir: &Path, created: bool, run: &BenchRun) {
    if created {
        let _ = fs::remove_dir_all(dir);
        return;
    }
    for result in &run.results {
        let _ = fs::remove_file(dir.join(format!("{}.csv", result.combo.id())));
    }
    let _ = fs::remove_file(dir.join("ranking.csv"));
    let _ = fs::remove_file(dir.join("run.json"));
}

fn cmd_heatmap(args: &HeatmapArgs) -> Result<(), CliError> {
    if args.cell == 0 {
        return Err(CliError::input("--cell must be at least 1"));
    }
    let data = heatmap::parse_matrix_csv(&read_input(&args.matrix)?).map_err(CliError::input)?;
    let svg = heatmap::render_svg(&data, args.cell);
    fs::write(&args.out, svg)
        .map_err(|e| CliError::internal(format!("cannot write {}: {e}", args.out.display())))?;
    println!("wrote {}", args.out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Taxonomy(TaxonomyCommand::Validate { edges }) => cmd_validate(edges),
        Command::Cs(args) => cmd_cs(args),
        Command::Setsim(args) => cmd_setsim(args),
        Command::Benchmark(args) => cmd_benchmark(args),
        Command::Heatmap(args) => cmd_heatmap(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
