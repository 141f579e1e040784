//! Command-line pipeline: gazetteer ingestion, trajectory extraction, and
//! four-method evaluation.
//!
//! Exit codes: 0 success, 1 empty or degenerate result, 2 configuration or
//! input error.

use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use n2t::chart::{to_geojson, to_json, to_svg, ChartConfig};
use n2t::eval::{compare_methods, load_ground_truth, render_table, EvalError};
use n2t::extract::{run_method, GeoStoplist, MethodConfig, MethodId, Trajectory};
use n2t::gazetteer::{
    ingest_geonames_reader, parse_homonym_supplement, DisambiguationPolicy, GazetteerError,
    IngestOutcome, LocationDimension,
};
use n2t::normalize::{load_corpus, load_narrative};
use n2t::tokenize::{MWLexicon, TokenizeConfig};

const CONFIG_ENV: &str = "N2T_CONFIG";

#[derive(Parser)]
#[command(
    name = "n2t",
    version,
    about = "Narrative-to-trajectory geoparsing pipeline"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the location dimension from a GeoNames export and report counts.
    Ingest(IngestArgs),
    /// Extract a trajectory from one narrative and write it as JSON, GeoJSON, or SVG.
    Extract(ExtractArgs),
    /// Run all four methods over a corpus and score them against ground truth.
    Evaluate(EvaluateArgs),
}

/// Options shared by every subcommand that builds the dimension.
#[derive(Args, Debug, Default, Clone)]
struct SourceArgs {
    /// GeoNames main-export TSV (19 tab-separated columns).
    #[arg(long)]
    gazetteer: Option<PathBuf>,
    /// Supplementary homonyms: geoname_id<TAB>name per line.
    #[arg(long)]
    homonyms: Option<PathBuf>,
    /// Additional multi-word names merged into the lexicon, one per line.
    #[arg(long)]
    lexicon: Option<PathBuf>,
    /// Geo-stoplist file replacing the built-in defaults, one token per line.
    #[arg(long)]
    stoplist: Option<PathBuf>,
    /// Abbreviation list replacing the built-in defaults, one per line.
    #[arg(long)]
    abbrev: Option<PathBuf>,
    /// Disambiguation policy: population, country:CC[,CC...], or feature.
    #[arg(long)]
    policy: Option<String>,
    /// Ignore gazetteer candidates below this population (default 0 = off).
    #[arg(long)]
    min_population: Option<u64>,
}

#[derive(Args, Debug)]
struct IngestArgs {
    #[command(flatten)]
    source: SourceArgs,
}

#[derive(Args, Debug)]
struct ExtractArgs {
    /// Narrative text file (optional sidecar <stem>.json supplies metadata).
    narrative: PathBuf,
    #[command(flatten)]
    source: SourceArgs,
    /// Extraction method: st, st-geo, mwt, mwt-geo, or all.
    #[arg(long)]
    method: Option<String>,
    /// Output format: json, geojson, or svg (default: by --out extension, else geojson).
    #[arg(long)]
    format: Option<String>,
    /// Output path; with --method all, the method slug is inserted before the extension.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EvaluateArgs {
    /// Directory of narrative *.txt files.
    corpus: PathBuf,
    /// Ground truth JSON: {narrative_id: [{"name": ..., "geoname_id": ...}]}.
    #[arg(long)]
    truth: Option<PathBuf>,
    #[command(flatten)]
    source: SourceArgs,
    /// Write the full JSON report here in addition to the table on stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Optional config file named by N2T_CONFIG; flags override its values.
#[derive(Debug, Default, serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    gazetteer: Option<PathBuf>,
    homonyms: Option<PathBuf>,
    lexicon: Option<PathBuf>,
    stoplist: Option<PathBuf>,
    abbrev: Option<PathBuf>,
    policy: Option<String>,
    min_population: Option<u64>,
    method: Option<String>,
    format: Option<String>,
    truth: Option<PathBuf>,
}

impl FileConfig {
    fn load() -> Result<FileConfig> {
        match std::env::var_os(CONFIG_ENV) {
            Some(path) => {
                let path = PathBuf::from(path);
                let raw = std::fs::read_to_string(&path).with_context(|| {
                    format!("cannot read {} file {}", CONFIG_ENV, path.display())
                })?;
                toml::from_str(&raw)
                    .with_context(|| format!("invalid config file {}", path.display()))
            }
            None => Ok(FileConfig::default()),
        }
    }
}

struct Pipeline {
    dimension: LocationDimension,
    lexicon: MWLexicon,
    config: MethodConfig,
}

fn parse_policy(s: &str) -> Result<DisambiguationPolicy> {
    let lower = s.to_lowercase();
    if lower == "population" {
        Ok(DisambiguationPolicy::Population)
    } else if lower == "feature" {
        Ok(DisambiguationPolicy::PreferFeatureClasses)
    } else if let Some(list) = lower.strip_prefix("country:") {
        let countries: Vec<String> = list
            .split(',')
            .map(|c| c.trim().to_uppercase())
            .filter(|c| !c.is_empty())
            .collect();
        if countries.is_empty() {
            bail!("policy country: needs at least one country code");
        }
        Ok(DisambiguationPolicy::PreferCountries(countries))
    } else {
        bail!("unknown policy {s:?} (expected population, country:CC,..., or feature)");
    }
}

fn open_buffered(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path).with_context(|| {
        format!("cannot open {}", path.display())
    })?))
}

fn build_dimension(source: &SourceArgs, file: &FileConfig) -> Result<IngestOutcome> {
    let gazetteer = source
        .gazetteer
        .clone()
        .or_else(|| file.gazetteer.clone())
        .ok_or_else(|| anyhow!("--gazetteer is required (flag or {} config)", CONFIG_ENV))?;
    let mut outcome = ingest_geonames_reader(open_buffered(&gazetteer)?)
        .with_context(|| format!("ingest of {} failed", gazetteer.display()))?;
    if let Some(path) = source.homonyms.clone().or_else(|| file.homonyms.clone()) {
        for (id, name) in parse_homonym_supplement(open_buffered(&path)?)? {
            outcome
                .dimension
                .add_homonyms(id, &[name])
                .with_context(|| format!("homonym supplement {}", path.display()))?;
        }
    }
    Ok(outcome)
}

fn build_pipeline(source: &SourceArgs, file: &FileConfig) -> Result<Pipeline> {
    let outcome = build_dimension(source, file)?;
    report_skipped(&outcome);
    let dimension = outcome.dimension;

    let mut lexicon = dimension.derive_mw_lexicon();
    if let Some(path) = source.lexicon.clone().or_else(|| file.lexicon.clone()) {
        lexicon.merge_from_reader(open_buffered(&path)?)?;
    }
    if lexicon.is_empty() {
        eprintln!("warning: multi-word lexicon is empty; multi-word names will not be merged");
    }

    let stoplist = match source.stoplist.clone().or_else(|| file.stoplist.clone()) {
        Some(path) => GeoStoplist::from_reader(open_buffered(&path)?)?,
        None => GeoStoplist::default(),
    };
    let mut tokenize = TokenizeConfig::default();
    if let Some(path) = source.abbrev.clone().or_else(|| file.abbrev.clone()) {
        tokenize = tokenize.with_abbreviations(open_buffered(&path)?)?;
    }
    let policy = match source.policy.clone().or_else(|| file.policy.clone()) {
        Some(s) => parse_policy(&s)?,
        None => DisambiguationPolicy::default(),
    };
    let min_population = source.min_population.or(file.min_population).unwrap_or(0);

    Ok(Pipeline {
        dimension,
        lexicon,
        config: MethodConfig {
            tokenize,
            policy,
            min_population,
            stoplist,
        },
    })
}

fn report_skipped(outcome: &IngestOutcome) {
    for diag in &outcome.skipped {
        eprintln!("gazetteer line {}: {}", diag.line, diag.reason);
    }
}

fn cmd_ingest(args: &IngestArgs, file: &FileConfig) -> Result<ExitCode> {
    let outcome = match build_dimension(&args.source, file) {
        Ok(outcome) => outcome,
        Err(err) => {
            // zero valid entries is a degenerate input, not a config error
            if err
                .downcast_ref::<GazetteerError>()
                .is_some_and(|g| matches!(g, GazetteerError::NoValidEntries))
            {
                eprintln!("error: {err:#}");
                return Ok(ExitCode::from(1));
            }
            return Err(err);
        }
    };
    report_skipped(&outcome);
    println!("entries: {}", outcome.dimension.len());
    println!("indexed names: {}", outcome.dimension.indexed_name_count());
    println!("skipped lines: {}", outcome.skipped.len());
    Ok(ExitCode::SUCCESS)
}

#[derive(Clone, Copy, PartialEq)]
enum OutputFormat {
    Json,
    GeoJson,
    Svg,
}

impl OutputFormat {
    fn parse(s: &str) -> Result<Self> {
        match s.to_lowercase().as_str() {
            "json" => Ok(OutputFormat::Json),
            "geojson" => Ok(OutputFormat::GeoJson),
            "svg" => Ok(OutputFormat::Svg),
            other => bail!("unknown format {other:?} (expected json, geojson, or svg)"),
        }
    }

    fn from_extension(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()? {
            "json" => Some(OutputFormat::Json),
            "geojson" => Some(OutputFormat::GeoJson),
            "svg" => Some(OutputFormat::Svg),
            _ => None,
        }
    }

    fn render(self, tr: &Trajectory) -> Result<String> {
        Ok(match self {
            OutputFormat::Json => to_json(tr),
            OutputFormat::GeoJson => to_geojson(tr),
            OutputFormat::Svg => to_svg(tr, &ChartConfig::default())?,
        })
    }
}

fn method_output_path(base: &Path, method: MethodId) -> PathBuf {
    let ext = base
        .extension()
        .map(|e| e.to_string_lossy().into_owned())
        .unwrap_or_default();
    let stem = base
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let name = if ext.is_empty() {
        format!("{stem}.{}", method.slug())
    } else {
        format!("{stem}.{}.{}", method.slug(), ext)
    };
    base.with_file_name(name)
}

fn cmd_extract(args: &ExtractArgs, file: &FileConfig) -> Result<ExitCode> {
    let pipeline = build_pipeline(&args.source, file)?;
    let narrative = load_narrative(&args.narrative)?;

    let method_spec = args
        .method
        .clone()
        .or_else(|| file.method.clone())
        .unwrap_or_else(|| "mwt-geo".to_owned());
    let methods: Vec<MethodId> = if method_spec.eq_ignore_ascii_case("all") {
        MethodId::ALL.to_vec()
    } else {
        vec![method_spec.parse().map_err(|e: String| anyhow!(e))?]
    };

    let format = match args.format.clone().or_else(|| file.format.clone()) {
        Some(s) => Some(OutputFormat::parse(&s)?),
        None => None,
    };
    let resolved_format = format
        .or_else(|| args.out.as_deref().and_then(OutputFormat::from_extension))
        .unwrap_or(OutputFormat::GeoJson);

    if methods.len() > 1 && args.out.is_none() {
        bail!("--method all requires --out to name the output files");
    }

    for method in methods {
        let trajectory = run_method(
            &narrative,
            method,
            &pipeline.dimension,
            &pipeline.lexicon,
            &pipeline.config,
        );
        let body = resolved_format.render(&trajectory)?;
        match &args.out {
            Some(path) => {
                let target = if method_spec.eq_ignore_ascii_case("all") {
                    method_output_path(path, method)
                } else {
                    path.clone()
                };
                std::fs::write(&target, body)
                    .with_context(|| format!("cannot write {}", target.display()))?;
                eprintln!(
                    "{}: {} visits -> {}",
                    method,
                    trajectory.len(),
                    target.display()
                );
            }
            None => {
                let mut stdout = std::io::stdout().lock();
                stdout.write_all(body.as_bytes())?;
                if !body.ends_with('\n') {
                    stdout.write_all(b"\n")?;
                }
                eprintln!("{}: {} visits", method, trajectory.len());
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_evaluate(args: &EvaluateArgs, file: &FileConfig) -> Result<ExitCode> {
    let pipeline = build_pipeline(&args.source, file)?;
    let corpus = load_corpus(&args.corpus)?;
    let truth_path = args
        .truth
        .clone()
        .or_else(|| file.truth.clone())
        .ok_or_else(|| anyhow!("--truth is required"))?;
    let raw = std::fs::read_to_string(&truth_path)
        .with_context(|| format!("cannot read {}", truth_path.display()))?;
    let truth = load_ground_truth(&raw)
        .with_context(|| format!("ground truth {}", truth_path.display()))?;

    let report = match compare_methods(
        &corpus,
        &truth,
        &pipeline.dimension,
        &pipeline.lexicon,
        &pipeline.config,
    ) {
        Ok(report) => report,
        Err(EvalError::NoOverlap) => {
            eprintln!("error: {}", EvalError::NoOverlap);
            return Ok(ExitCode::from(1));
        }
        Err(err) => return Err(err.into()),
    };
    print!("{}", render_table(&report));
    if let Some(path) = &args.out {
        let json = serde_json::to_string_pretty(&report)?;
        std::fs::write(path, json + "\n")
            .with_context(|| format!("cannot write {}", path.display()))?;
        eprintln!("report written to {}", path.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn real_main() -> Result<ExitCode> {
    let cli = Cli::parse();
    let file = FileConfig::load()?;
    match &cli.command {
        Command::Ingest(args) => cmd_ingest(args, &file),
        Command::Extract(args) => cmd_extract(args, &file),
        Command::Evaluate(args) => cmd_evaluate(args, &file),
    }
}

fn main() -> ExitCode {
    match real_main() {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
