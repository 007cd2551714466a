//! `gendial`: generate the dialogue gender test suite, align and label MT
//! system outputs, and produce effect and regression reports.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use gendial_core::extract::ingest_provided_alignments;
use gendial_core::metrics::{compute_report, ReportKind};
use gendial_core::pipeline::{
    self, emit_release_bundle, read_annotations, read_suite, run_pipeline, Labeler, OutputFormat,
    PipelineConfig, StageStatus, SystemOutput,
};
use gendial_core::regress::{run_regression, FitOptions, ModelKind};
use gendial_core::templgen::{generate_all, SubsetKind, TemplateParams};
use gendial_core::vocab::{load_vocabulary_dir, validate_occupation_pairing};
use gendial_core::Language;

#[derive(Parser)]
#[command(
    name = "gendial",
    version,
    about = "Literary-dialogue gender test suite: generation, labeling and reports"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the test suite and the sources.txt fed to MT systems.
    Generate(GenerateArgs),
    /// Align one system's raw output with the suite into translation records.
    Ingest(IngestArgs),
    /// Extract adjective slots from translations and label their gender.
    Label(LabelArgs),
    /// Compute the balanced effect reports (proportions, accuracies, deltas).
    Score(ScoreArgs),
    /// Fit the logistic-regression models over labeled records.
    Regress(RegressArgs),
    /// Run the whole pipeline from a config file.
    Run(RunArgs),
    /// Pack a run directory into a reproducible tar archive.
    Bundle(BundleArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Directory with adjectives.tsv, adverbs.tsv, occupations.tsv.
    #[arg(long)]
    vocab_dir: Option<PathBuf>,
    /// Pipeline config JSON; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output suite path; a sources.txt is written alongside it.
    #[arg(long, default_value = "suite.jsonl")]
    out: PathBuf,
}

#[derive(Args)]
struct IngestArgs {
    #[arg(long)]
    suite: PathBuf,
    /// The system's raw output file.
    #[arg(long)]
    system_out: PathBuf,
    #[arg(long)]
    system_id: String,
    /// Target language (es, cs or is).
    #[arg(long)]
    lang: String,
    /// text (line-aligned with sources.txt) or jsonl ({instanceId, targetText}).
    #[arg(long, default_value = "text")]
    format: String,
    #[arg(long, default_value = "translations.jsonl")]
    out: PathBuf,
}

#[derive(Args)]
struct LabelArgs {
    #[arg(long)]
    suite: PathBuf,
    #[arg(long)]
    vocab_dir: PathBuf,
    /// Translation records produced by `ingest`.
    #[arg(long, conflicts_with = "provided")]
    translations: Option<PathBuf>,
    /// Pre-aligned extractions (JSON-lines), replacing the built-in aligner.
    #[arg(long)]
    provided: Option<PathBuf>,
    /// Directory with dict.<lang>.tsv local dictionaries.
    #[arg(long)]
    dict_dir: Option<PathBuf>,
    /// Persistent dictionary cache (JSON-lines, append-only).
    #[arg(long)]
    dict_cache: Option<PathBuf>,
    /// Morphology rule table (rules.<lang>.tsv); built-in rules by default.
    #[arg(long)]
    rules: Option<PathBuf>,
    /// Translation lexicon (source<TAB>target_lemma) for extraction.
    #[arg(long)]
    lexicon: Option<PathBuf>,
    #[arg(long)]
    system_id: String,
    #[arg(long)]
    lang: String,
    #[arg(long, default_value = "annotations.jsonl")]
    out: PathBuf,
}

#[derive(Args)]
struct ScoreArgs {
    /// Suite path; used only to cross-check annotation instance ids.
    #[arg(long)]
    suite: Option<PathBuf>,
    #[arg(long)]
    annotations: PathBuf,
    /// all, adverb, char_amb, char_det, struct_amb or struct_det.
    #[arg(long, default_value = "all")]
    kind: String,
    #[arg(long, default_value_t = 0)]
    balancing_seed: u64,
    #[arg(long, default_value = "reports")]
    out: PathBuf,
    /// Additionally emit per-template-family breakdowns of char_amb.
    #[arg(long)]
    per_template: bool,
}

#[derive(Args)]
struct RegressArgs {
    #[arg(long)]
    annotations: PathBuf,
    /// all, adverb, character or structural.
    #[arg(long, default_value = "all")]
    model: String,
    #[arg(long, default_value = "reports")]
    out: PathBuf,
    /// Fit the structural model per structure variant as well.
    #[arg(long)]
    per_variant: bool,
    #[arg(long, default_value_t = 100)]
    max_iter: usize,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, default_value_t = 15.0)]
    divergence_guard: f64,
}

#[derive(Args)]
struct RunArgs {
    /// Pipeline config JSON.
    #[arg(long)]
    config: PathBuf,
    /// System output spec `id=path,lang[,format]`; repeatable.
    #[arg(long = "system-out")]
    system_out: Vec<String>,
    /// Override the config's output directory.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct BundleArgs {
    /// A completed run directory (the pipeline's output_dir).
    #[arg(long)]
    run_dir: PathBuf,
    #[arg(long, default_value = "bundle.tar")]
    out: PathBuf,
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run() -> Result<ExitCode> {
    match Cli::parse().command {
        Command::Generate(args) => generate(args),
        Command::Ingest(args) => ingest(args),
        Command::Label(args) => label(args),
        Command::Score(args) => score(args),
        Command::Regress(args) => regress(args),
        Command::Run(args) => run_cmd(args),
        Command::Bundle(args) => bundle(args),
    }
}

fn generate(args: GenerateArgs) -> Result<ExitCode> {
    let config = args
        .config
        .as_deref()
        .map(PipelineConfig::load)
        .transpose()?;
    let vocab_dir = args
        .vocab_dir
        .or_else(|| config.as_ref().map(|c| c.vocab_dir.clone()))
        .context("--vocab-dir is required (directly or via --config)")?;
    let seed = args
        .seed
        .or_else(|| config.as_ref().map(|c| c.seed))
        .unwrap_or(0);
    let params = config
        .as_ref()
        .map(|c| c.template_params.clone())
        .unwrap_or_default();

    let vocab = load_vocabulary_dir(&vocab_dir)?;
    for violation in validate_occupation_pairing(&vocab) {
        eprintln!("warning: {violation}");
    }
    let suite = generate_all(&vocab, &params, seed)?;
    pipeline::write_suite(&args.out, &suite)?;
    let sources = args.out.with_file_name("sources.txt");
    pipeline::write_sources(&sources, &suite)?;
    println!(
        "generated {} instances -> {} (+ {})",
        suite.instances.len(),
        args.out.display(),
        sources.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn parse_lang(s: &str) -> Result<Language> {
    Language::from_str(s).map_err(|e| anyhow::anyhow!(e))
}

fn ingest(args: IngestArgs) -> Result<ExitCode> {
    let suite = read_suite(&args.suite)?;
    let format = match args.format.as_str() {
        "text" => OutputFormat::Text,
        "jsonl" => OutputFormat::Jsonl,
        other => bail!("unknown --format `{other}` (expected text or jsonl)"),
    };
    let system = SystemOutput {
        system_id: args.system_id,
        path: args.system_out,
        language: parse_lang(&args.lang)?,
        format,
    };
    let records = pipeline::ingest_system_output(&suite, &system)?;
    pipeline::write_translations(&args.out, &records)?;
    println!("ingested {} translations -> {}", records.len(), args.out.display());
    Ok(ExitCode::SUCCESS)
}

fn label(args: LabelArgs) -> Result<ExitCode> {
    let suite = read_suite(&args.suite)?;
    let vocab = load_vocabulary_dir(&args.vocab_dir)?;
    let language = parse_lang(&args.lang)?;

    let mut rule_tables = BTreeMap::new();
    if let Some(rules) = &args.rules {
        rule_tables.insert(language.code().to_string(), rules.clone());
    }
    let mut lexicons = BTreeMap::new();
    if let Some(lexicon) = &args.lexicon {
        lexicons.insert(language.code().to_string(), lexicon.clone());
    }
    let config = PipelineConfig {
        vocab_dir: args.vocab_dir.clone(),
        seed: 0,
        balancing_seed: 0,
        languages: vec![language],
        template_params: TemplateParams::default(),
        providers: Vec::new(),
        dict_dir: args.dict_dir.clone(),
        dict_cache: args.dict_cache.clone(),
        rule_tables,
        lexicons,
        copula_cues: BTreeMap::new(),
        output_dir: PathBuf::from("."),
        manifest_timestamp: 0,
        fit_options: FitOptions::default(),
    };
    let labeler = Labeler::from_config(&config)?;

    let records = match (&args.translations, &args.provided) {
        (Some(translations), None) => {
            let translations = pipeline::read_translations(translations)?;
            let (records, diagnostics) =
                labeler.label(&suite, &vocab, &translations, &args.system_id, language)?;
            for d in diagnostics {
                eprintln!("warning: {d}");
            }
            records
        }
        (None, Some(provided)) => {
            let extractions = ingest_provided_alignments(provided, &suite)?;
            pipeline::label_provided(&suite, &vocab, &extractions, &labeler, &args.system_id, language)?
        }
        _ => bail!("exactly one of --translations or --provided is required"),
    };
    pipeline::write_annotations(&args.out, &records)?;
    println!("labeled {} slots -> {}", records.len(), args.out.display());
    Ok(ExitCode::SUCCESS)
}

fn score(args: ScoreArgs) -> Result<ExitCode> {
    let records = read_annotations(&args.annotations)?;
    if let Some(suite_path) = &args.suite {
        let suite = read_suite(suite_path)?;
        let known: std::collections::HashSet<&str> = suite
            .instances
            .iter()
            .map(|i| i.instance_id.as_str())
            .collect();
        for r in &records {
            if !known.contains(r.instance_id.as_str()) {
                bail!("annotation references unknown instance `{}`", r.instance_id);
            }
        }
    }
    let system_id = records
        .first()
        .map(|r| r.system_id.clone())
        .context("no annotation records")?;
    let kinds: Vec<ReportKind> = match args.kind.as_str() {
        "all" => ReportKind::ALL.to_vec(),
        name => vec![parse_kind(name)?],
    };
    let mut failures = Vec::new();
    for kind in kinds {
        match compute_report(kind, &records, args.balancing_seed) {
            Ok(report) => {
                let (tsv, _) = pipeline::write_effect_report(&args.out, &system_id, kind, &report)?;
                println!("wrote {}", tsv.display());
            }
            Err(e) => {
                eprintln!("error: {}: {e}", kind.name());
                failures.push(kind.name());
            }
        }
        if args.per_template && kind == ReportKind::CharAmb {
            for family in [SubsetKind::StereoCharSingle, SubsetKind::StereoCharDialogue] {
                let subset: Vec<_> = records
                    .iter()
                    .filter(|r| r.subset_kind == family)
                    .cloned()
                    .collect();
                let tag = format!("{system_id}.{}", family_tag(family));
                match compute_report(kind, &subset, args.balancing_seed) {
                    Ok(report) => {
                        let (tsv, _) =
                            pipeline::write_effect_report(&args.out, &tag, kind, &report)?;
                        println!("wrote {}", tsv.display());
                    }
                    Err(e) => eprintln!("error: {}/{}: {e}", kind.name(), family_tag(family)),
                }
            }
        }
    }
    Ok(if failures.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn family_tag(kind: SubsetKind) -> &'static str {
    match kind {
        SubsetKind::StereoCharSingle => "single",
        SubsetKind::StereoCharDialogue => "dialogue",
        other => other.id_prefix(),
    }
}

fn parse_kind(name: &str) -> Result<ReportKind> {
    ReportKind::ALL
        .into_iter()
        .find(|k| k.name() == name)
        .with_context(|| format!("unknown report kind `{name}`"))
}

fn regress(args: RegressArgs) -> Result<ExitCode> {
    let records = read_annotations(&args.annotations)?;
    let system_id = records
        .first()
        .map(|r| r.system_id.clone())
        .context("no annotation records")?;
    let options = FitOptions {
        max_iter: args.max_iter,
        tol: args.tol,
        divergence_guard: args.divergence_guard,
    };
    let models: Vec<ModelKind> = match args.model.as_str() {
        "all" => ModelKind::ALL.to_vec(),
        name => vec![ModelKind::ALL
            .into_iter()
            .find(|m| m.name() == name)
            .with_context(|| format!("unknown model `{name}`"))?],
    };
    let mut failures = Vec::new();
    for model in models {
        match run_regression(&records, model, &options) {
            Ok(result) => {
                for w in &result.warnings {
                    eprintln!("warning: {}: {w}", model.name());
                }
                let (tsv, _) =
                    pipeline::write_regression_report(&args.out, &system_id, model, &result)?;
                println!("wrote {}", tsv.display());
            }
            Err(e) => {
                eprintln!("error: {}: {e}", model.name());
                failures.push(model.name());
            }
        }
        if args.per_variant && model == ModelKind::Structural {
            for family in [
                SubsetKind::StructureStyle1Full,
                SubsetKind::StructureStyle1Partial,
                SubsetKind::StructureStyle2Full,
                SubsetKind::StructureStyle2Partial,
            ] {
                let subset: Vec<_> = records
                    .iter()
                    .filter(|r| r.subset_kind == family)
                    .cloned()
                    .collect();
                let tag = format!("{system_id}.{}", family.id_prefix());
                match run_regression(&subset, model, &options) {
                    Ok(result) => {
                        let (tsv, _) =
                            pipeline::write_regression_report(&args.out, &tag, model, &result)?;
                        println!("wrote {}", tsv.display());
                    }
                    Err(e) => eprintln!("error: {}/{}: {e}", model.name(), family.id_prefix()),
                }
            }
        }
    }
    Ok(if failures.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

/// `id=path,lang[,format]`
fn parse_system_spec(spec: &str) -> Result<SystemOutput> {
    let (id, rest) = spec
        .split_once('=')
        .with_context(|| format!("system spec `{spec}` is not id=path,lang[,format]"))?;
    let parts: Vec<&str> = rest.split(',').collect();
    if parts.len() < 2 || parts.len() > 3 {
        bail!("system spec `{spec}` is not id=path,lang[,format]");
    }
    let format = match parts.get(2).copied() {
        None | Some("text") => OutputFormat::Text,
        Some("jsonl") => OutputFormat::Jsonl,
        Some(other) => bail!("unknown format `{other}` in system spec"),
    };
    Ok(SystemOutput {
        system_id: id.to_string(),
        path: PathBuf::from(parts[0]),
        language: parse_lang(parts[1])?,
        format,
    })
}

fn run_cmd(args: RunArgs) -> Result<ExitCode> {
    let mut config = PipelineConfig::load(&args.config)?;
    if let Some(out_dir) = args.out_dir {
        config.output_dir = out_dir;
    }
    let systems: Vec<SystemOutput> = args
        .system_out
        .iter()
        .map(|s| parse_system_spec(s))
        .collect::<Result<_>>()?;
    let manifest = run_pipeline(&config, &systems)?;
    println!(
        "run {}: {} stages, manifest -> {}",
        match manifest.status {
            StageStatus::Ok => "ok",
            _ => "FAILED",
        },
        manifest.stages.len(),
        config.output_dir.join("manifest.json").display()
    );
    for stage in &manifest.stages {
        if stage.status != StageStatus::Ok {
            eprintln!(
                "stage {} failed: {}",
                stage.name,
                stage.error.as_deref().unwrap_or("unknown")
            );
        }
    }
    Ok(if manifest.status == StageStatus::Ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn bundle(args: BundleArgs) -> Result<ExitCode> {
    if !args.run_dir.join("manifest.json").exists() {
        eprintln!(
            "warning: {} has no manifest.json; bundling anyway",
            args.run_dir.display()
        );
    }
    emit_release_bundle(&args.run_dir, &args.out)?;
    println!("bundle -> {}", args.out.display());
    Ok(ExitCode::SUCCESS)
}
