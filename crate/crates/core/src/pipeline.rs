//! Pipeline orchestration: a single JSON config drives
//! generate -> ingest -> label -> score -> regress, with JSON-lines
//! artifacts between stages, a digest manifest, and a reproducible release
//! bundle.
//!
//! All writes are atomic (temp file + rename). Stage failures are recorded
//! in the manifest with a FAILED marker; artifacts already produced are
//! kept, so later stages can be re-run from upstream artifacts alone.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dictclient::{DictClient, DictError, HttpFieldMapping, HttpJsonProvider, LocalTsvProvider};
use crate::extract::{self, ExtractConfig, ExtractionMethod, SlotExtraction, TranslationRecord};
use crate::gendertag::{classify, RuleTable, RuleTableError};
use crate::metrics::{compute_report, EffectReport, LabeledSlotRecord, ReportKind};
use crate::regress::{run_regression, FitOptions, ModelKind, RegressionResult};
use crate::templgen::{generate_all, TemplGenError, TemplateParams, TestInstance, TestSuite};
use crate::vocab::{load_vocabulary_dir, VocabError, Vocabulary};
use crate::{sha256_hex, Language};

pub const SUITE_SCHEMA: &str = "suite/1";
pub const TRANSLATIONS_SCHEMA: &str = "translations/1";
pub const ANNOTATIONS_SCHEMA: &str = "annotations/1";

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct PipelineConfig {
    pub vocab_dir: PathBuf,
    pub seed: u64,
    #[serde(default = "default_balancing_seed")]
    pub balancing_seed: u64,
    #[serde(default = "default_languages")]
    pub languages: Vec<Language>,
    #[serde(default)]
    pub template_params: TemplateParams,
    #[serde(default)]
    pub providers: Vec<ProviderConfig>,
    /// Directory of `dict.<lang>.tsv` files for the local provider.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub dict_dir: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub dict_cache: Option<PathBuf>,
    /// `rules.<lang>.tsv` paths; languages not listed use the built-in rules.
    #[serde(default)]
    pub rule_tables: BTreeMap<String, PathBuf>,
    /// Translation lexicons (`translations.<lang>.tsv`) for extraction.
    #[serde(default)]
    pub lexicons: BTreeMap<String, PathBuf>,
    /// Copula cue overrides for the position heuristic; built-in lists
    /// otherwise.
    #[serde(default)]
    pub copula_cues: BTreeMap<String, Vec<String>>,
    pub output_dir: PathBuf,
    /// Timestamp written into the manifest; fixed by default so reruns are
    /// byte-identical.
    #[serde(default)]
    pub manifest_timestamp: u64,
    #[serde(default)]
    pub fit_options: FitOptions,
}

fn default_balancing_seed() -> u64 {
    0
}

fn default_languages() -> Vec<Language> {
    vec![Language::Es, Language::Cs, Language::Is]
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ProviderConfig {
    Local,
    Http {
        id: String,
        url_template: String,
        mapping: HttpFieldMapping,
        #[serde(default = "default_timeout_ms")]
        timeout_ms: u64,
    },
}

fn default_timeout_ms() -> u64 {
    5000
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = fs::read_to_string(path).map_err(|source| PipelineError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|e| PipelineError::BadConfig {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })
    }

    pub fn digest(&self) -> String {
        sha256_hex(
            serde_json::to_string(self)
                .expect("config serializes")
                .as_bytes(),
        )
    }
}

/// One MT system's output to evaluate.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SystemOutput {
    pub system_id: String,
    pub path: PathBuf,
    pub language: Language,
    #[serde(default)]
    pub format: OutputFormat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    /// Plain text, one translation per line, aligned with `sources.txt`.
    #[default]
    Text,
    /// JSON-lines of `{instanceId, targetText}`.
    Jsonl,
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("io on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("bad config {path}: {reason}")]
    BadConfig { path: PathBuf, reason: String },
    #[error("bad artifact {path}: line {line}: {reason}")]
    BadArtifact {
        path: PathBuf,
        line: usize,
        reason: String,
    },
    #[error(transparent)]
    Vocab(#[from] VocabError),
    #[error(transparent)]
    TemplGen(#[from] TemplGenError),
    #[error(transparent)]
    Dict(#[from] DictError),
    #[error(transparent)]
    Rules(#[from] RuleTableError),
    #[error(transparent)]
    Extract(#[from] crate::extract::ExtractError),
    #[error("system output {path} has {got} lines but the suite has {expected} sources")]
    LineCountMismatch {
        path: PathBuf,
        expected: usize,
        got: usize,
    },
}

/// Write `content` to `path` atomically.
pub fn atomic_write(path: &Path, content: &[u8]) -> Result<(), PipelineError> {
    let tmp = path.with_extension("tmp");
    let io_err = |source| PipelineError::Io {
        path: path.to_path_buf(),
        source,
    };
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(io_err)?;
    }
    let mut file = fs::File::create(&tmp).map_err(io_err)?;
    file.write_all(content).map_err(io_err)?;
    file.sync_all().map_err(io_err)?;
    fs::rename(&tmp, path).map_err(io_err)
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct SuiteHeader {
    schema: String,
    generation_seed: u64,
    vocabulary_digest: String,
}

/// Serialize the suite as JSON-lines: a header line, then one instance per
/// line in canonical (sorted) order.
pub fn write_suite(path: &Path, suite: &TestSuite) -> Result<(), PipelineError> {
    let mut out = String::new();
    out.push_str(
        &serde_json::to_string(&SuiteHeader {
            schema: SUITE_SCHEMA.to_string(),
            generation_seed: suite.generation_seed,
            vocabulary_digest: suite.vocabulary_digest.clone(),
        })
        .expect("header serializes"),
    );
    out.push('\n');
    for inst in &suite.instances {
        out.push_str(&serde_json::to_string(inst).expect("instance serializes"));
        out.push('\n');
    }
    atomic_write(path, out.as_bytes())
}

pub fn read_suite(path: &Path) -> Result<TestSuite, PipelineError> {
    let text = fs::read_to_string(path).map_err(|source| PipelineError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut lines = text.lines().enumerate();
    let (_, header_line) = lines.next().ok_or_else(|| PipelineError::BadArtifact {
        path: path.to_path_buf(),
        line: 1,
        reason: "empty suite file".to_string(),
    })?;
    let header: SuiteHeader =
        serde_json::from_str(header_line).map_err(|e| PipelineError::BadArtifact {
            path: path.to_path_buf(),
            line: 1,
            reason: e.to_string(),
        })?;
    if header.schema != SUITE_SCHEMA {
        return Err(PipelineError::BadArtifact {
            path: path.to_path_buf(),
            line: 1,
            reason: format!("unsupported schema `{}`", header.schema),
        });
    }
    let mut instances = Vec::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let inst: TestInstance =
            serde_json::from_str(line).map_err(|e| PipelineError::BadArtifact {
                path: path.to_path_buf(),
                line: idx + 1,
                reason: e.to_string(),
            })?;
        instances.push(inst);
    }
    Ok(TestSuite {
        instances,
        generation_seed: header.generation_seed,
        vocabulary_digest: header.vocabulary_digest,
    })
}

/// One source passage per line, suite order; the file fed to MT systems.
pub fn write_sources(path: &Path, suite: &TestSuite) -> Result<(), PipelineError> {
    let mut out = String::new();
    for inst in &suite.instances {
        debug_assert!(!inst.source_text.contains('\n'));
        out.push_str(&inst.source_text);
        out.push('\n');
    }
    atomic_write(path, out.as_bytes())
}

/// Align a system output file with the suite, producing translation records.
pub fn ingest_system_output(
    suite: &TestSuite,
    output: &SystemOutput,
) -> Result<Vec<TranslationRecord>, PipelineError> {
    let text = fs::read_to_string(&output.path).map_err(|source| PipelineError::Io {
        path: output.path.clone(),
        source,
    })?;
    match output.format {
        OutputFormat::Text => {
            let lines: Vec<&str> = text.lines().collect();
            if lines.len() != suite.instances.len() {
                return Err(PipelineError::LineCountMismatch {
                    path: output.path.clone(),
                    expected: suite.instances.len(),
                    got: lines.len(),
                });
            }
            Ok(suite
                .instances
                .iter()
                .zip(lines)
                .map(|(inst, line)| TranslationRecord {
                    instance_id: inst.instance_id.clone(),
                    system_id: output.system_id.clone(),
                    target_text: line.to_string(),
                    language: output.language,
                })
                .collect())
        }
        OutputFormat::Jsonl => {
            #[derive(Deserialize)]
            #[serde(rename_all = "camelCase")]
            struct Row {
                instance_id: String,
                target_text: String,
            }
            let known: BTreeMap<&str, ()> = suite
                .instances
                .iter()
                .map(|i| (i.instance_id.as_str(), ()))
                .collect();
            let mut records = Vec::new();
            for (idx, line) in text.lines().enumerate() {
                if line.trim().is_empty() {
                    continue;
                }
                let row: Row =
                    serde_json::from_str(line).map_err(|e| PipelineError::BadArtifact {
                        path: output.path.clone(),
                        line: idx + 1,
                        reason: e.to_string(),
                    })?;
                if !known.contains_key(row.instance_id.as_str()) {
                    return Err(PipelineError::BadArtifact {
                        path: output.path.clone(),
                        line: idx + 1,
                        reason: format!("unknown instance id `{}`", row.instance_id),
                    });
                }
                records.push(TranslationRecord {
                    instance_id: row.instance_id,
                    system_id: output.system_id.clone(),
                    target_text: row.target_text,
                    language: output.language,
                });
            }
            Ok(records)
        }
    }
}

pub fn write_translations(path: &Path, records: &[TranslationRecord]) -> Result<(), PipelineError> {
    let mut out = format!("{{\"schema\":\"{TRANSLATIONS_SCHEMA}\"}}\n");
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("record serializes"));
        out.push('\n');
    }
    atomic_write(path, out.as_bytes())
}

pub fn read_translations(path: &Path) -> Result<Vec<TranslationRecord>, PipelineError> {
    read_jsonl_with_header(path, TRANSLATIONS_SCHEMA)
}

pub fn write_annotations(path: &Path, records: &[LabeledSlotRecord]) -> Result<(), PipelineError> {
    let mut out = format!("{{\"schema\":\"{ANNOTATIONS_SCHEMA}\"}}\n");
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("record serializes"));
        out.push('\n');
    }
    atomic_write(path, out.as_bytes())
}

pub fn read_annotations(path: &Path) -> Result<Vec<LabeledSlotRecord>, PipelineError> {
    read_jsonl_with_header(path, ANNOTATIONS_SCHEMA)
}

fn read_jsonl_with_header<T: serde::de::DeserializeOwned>(
    path: &Path,
    schema: &str,
) -> Result<Vec<T>, PipelineError> {
    #[derive(Deserialize)]
    struct Header {
        schema: String,
    }
    let text = fs::read_to_string(path).map_err(|source| PipelineError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut lines = text.lines().enumerate();
    let (_, header_line) = lines.next().ok_or_else(|| PipelineError::BadArtifact {
        path: path.to_path_buf(),
        line: 1,
        reason: "empty artifact".to_string(),
    })?;
    let header: Header =
        serde_json::from_str(header_line).map_err(|e| PipelineError::BadArtifact {
            path: path.to_path_buf(),
            line: 1,
            reason: e.to_string(),
        })?;
    if header.schema != schema {
        return Err(PipelineError::BadArtifact {
            path: path.to_path_buf(),
            line: 1,
            reason: format!("expected schema `{schema}`, found `{}`", header.schema),
        });
    }
    let mut rows = Vec::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        rows.push(
            serde_json::from_str(line).map_err(|e| PipelineError::BadArtifact {
                path: path.to_path_buf(),
                line: idx + 1,
                reason: e.to_string(),
            })?,
        );
    }
    Ok(rows)
}

/// The labeling engine: dictionary client, per-language rule tables and
/// extraction configs, built once from the pipeline config.
pub struct Labeler {
    pub dict: DictClient,
    rules: BTreeMap<Language, RuleTable>,
    extract_configs: BTreeMap<Language, ExtractConfig>,
}

impl Labeler {
    pub fn from_config(config: &PipelineConfig) -> Result<Self, PipelineError> {
        let mut providers: Vec<Box<dyn crate::dictclient::Provider>> = Vec::new();
        let provider_list = if config.providers.is_empty() {
            vec![ProviderConfig::Local]
        } else {
            config.providers.clone()
        };
        for p in provider_list {
            match p {
                ProviderConfig::Local => {
                    let Some(dir) = &config.dict_dir else { continue };
                    let files: Vec<(Language, PathBuf)> = config
                        .languages
                        .iter()
                        .map(|&l| (l, dir.join(format!("dict.{}.tsv", l.code()))))
                        .filter(|(_, p)| p.exists())
                        .collect();
                    providers.push(Box::new(LocalTsvProvider::from_files(&files)?));
                }
                ProviderConfig::Http {
                    id,
                    url_template,
                    mapping,
                    timeout_ms,
                } => {
                    providers.push(Box::new(HttpJsonProvider::new(
                        id,
                        url_template,
                        mapping,
                        Duration::from_millis(timeout_ms),
                    )));
                }
            }
        }
        let mut dict = DictClient::new(providers);
        if let Some(cache) = &config.dict_cache {
            dict = dict.with_cache_file(cache)?;
        }
        let mut rules = BTreeMap::new();
        let mut extract_configs = BTreeMap::new();
        for &lang in &config.languages {
            let table = match config.rule_tables.get(lang.code()) {
                Some(path) => RuleTable::load(path)?,
                None => RuleTable::builtin(lang),
            };
            rules.insert(lang, table);
            let mut ec = match config.lexicons.get(lang.code()) {
                Some(path) => ExtractConfig::load(path, lang)?,
                None => ExtractConfig {
                    translations: Default::default(),
                    copula_cues: extract::default_copula_cues(lang),
                },
            };
            if let Some(cues) = config.copula_cues.get(lang.code()) {
                ec.copula_cues = cues.clone();
            }
            extract_configs.insert(lang, ec);
        }
        Ok(Labeler {
            dict,
            rules,
            extract_configs,
        })
    }

    /// Extract and classify every slot of every translated instance.
    pub fn label(
        &self,
        suite: &TestSuite,
        vocab: &Vocabulary,
        translations: &[TranslationRecord],
        system_id: &str,
        language: Language,
    ) -> Result<(Vec<LabeledSlotRecord>, Vec<String>), PipelineError> {
        let by_id: BTreeMap<&str, &TestInstance> = suite
            .instances
            .iter()
            .map(|i| (i.instance_id.as_str(), i))
            .collect();
        let rules = self.rules.get(&language).cloned().unwrap_or_else(|| RuleTable::builtin(language));
        let ec = self
            .extract_configs
            .get(&language)
            .cloned()
            .unwrap_or_else(|| ExtractConfig {
                translations: Default::default(),
                copula_cues: extract::default_copula_cues(language),
            });
        let mut records = Vec::new();
        let mut diagnostics = Vec::new();
        for rec in translations {
            let instance = by_id.get(rec.instance_id.as_str()).ok_or_else(|| {
                PipelineError::Extract(crate::extract::ExtractError::UnknownInstance(
                    rec.instance_id.clone(),
                ))
            })?;
            let outcome = extract::extract_slots(instance, rec, &self.dict, &ec)?;
            diagnostics.extend(outcome.diagnostics);
            for (slot, extraction) in instance.slots.iter().zip(&outcome.extractions) {
                let annotation = match (&extraction.extracted_form, extraction.method) {
                    (Some(form), m) if m != ExtractionMethod::Missing => Some(classify(
                        form,
                        language,
                        &self.dict,
                        &rules,
                        &slot.source_lemma,
                    )?),
                    _ => None,
                };
                records.push(LabeledSlotRecord::build(
                    instance, slot, vocab, system_id, language, extraction, annotation,
                ));
            }
        }
        Ok((records, diagnostics))
    }
}

/// Stand-alone labeling of provided alignments (CLI `label --provided`).
pub fn label_provided(
    suite: &TestSuite,
    vocab: &Vocabulary,
    extractions: &[SlotExtraction],
    labeler: &Labeler,
    system_id: &str,
    language: Language,
) -> Result<Vec<LabeledSlotRecord>, PipelineError> {
    let by_id: BTreeMap<&str, &TestInstance> = suite
        .instances
        .iter()
        .map(|i| (i.instance_id.as_str(), i))
        .collect();
    let rules = labeler
        .rules
        .get(&language)
        .cloned()
        .unwrap_or_else(|| RuleTable::builtin(language));
    let mut records = Vec::new();
    for extraction in extractions {
        let instance = by_id.get(extraction.instance_id.as_str()).ok_or_else(|| {
            PipelineError::Extract(crate::extract::ExtractError::UnknownInstance(
                extraction.instance_id.clone(),
            ))
        })?;
        let slot = &instance.slots[extraction.slot_index];
        let annotation = match (&extraction.extracted_form, extraction.method) {
            (Some(form), m) if m != ExtractionMethod::Missing => Some(classify(
                form,
                language,
                &labeler.dict,
                &rules,
                &slot.source_lemma,
            )?),
            _ => None,
        };
        records.push(LabeledSlotRecord::build(
            instance, slot, vocab, system_id, language, extraction, annotation,
        ));
    }
    Ok(records)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum StageStatus {
    Ok,
    Failed,
    Skipped,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct StageRecord {
    pub name: String,
    pub status: StageStatus,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
}

/// Digest manifest of one pipeline run.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RunManifest {
    pub schema: String,
    pub tool_version: String,
    pub config_digest: String,
    pub vocabulary_digest: String,
    pub suite_digest: String,
    pub timestamp: u64,
    pub stages: Vec<StageRecord>,
    pub status: StageStatus,
}

impl RunManifest {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }
}

fn file_digest(path: &Path) -> Result<String, PipelineError> {
    let bytes = fs::read(path).map_err(|source| PipelineError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(sha256_hex(&bytes))
}

/// Run the full pipeline. Stage failures are recorded in the manifest
/// (status FAILED) without discarding completed artifacts; the manifest is
/// always written.
pub fn run_pipeline(
    config: &PipelineConfig,
    systems: &[SystemOutput],
) -> Result<RunManifest, PipelineError> {
    let out_dir = &config.output_dir;
    fs::create_dir_all(out_dir).map_err(|source| PipelineError::Io {
        path: out_dir.clone(),
        source,
    })?;

    let mut stages: Vec<StageRecord> = Vec::new();
    let vocab = load_vocabulary_dir(&config.vocab_dir)?;
    let vocabulary_digest = vocab.digest();

    // generate
    let suite_path = out_dir.join("suite.jsonl");
    let sources_path = out_dir.join("sources.txt");
    let suite = generate_all(&vocab, &config.template_params, config.seed)?;
    write_suite(&suite_path, &suite)?;
    write_sources(&sources_path, &suite)?;
    let suite_digest = suite.digest();
    stages.push(StageRecord {
        name: "generate".to_string(),
        status: StageStatus::Ok,
        error: None,
        inputs: BTreeMap::from([("vocabulary".to_string(), vocabulary_digest.clone())]),
        outputs: BTreeMap::from([
            ("suite.jsonl".to_string(), file_digest(&suite_path)?),
            ("sources.txt".to_string(), file_digest(&sources_path)?),
        ]),
    });

    // per-system stages
    let labeler = Labeler::from_config(config)?;
    for system in systems {
        let sys = &system.system_id;
        let run_system = || -> Result<Vec<StageRecord>, PipelineError> {
            let mut recs = Vec::new();

            let translations = ingest_system_output(&suite, system)?;
            let translations_path = out_dir.join(format!("translations.{sys}.jsonl"));
            write_translations(&translations_path, &translations)?;
            recs.push(StageRecord {
                name: format!("ingest:{sys}"),
                status: StageStatus::Ok,
                error: None,
                inputs: BTreeMap::from([
                    ("suite.jsonl".to_string(), file_digest(&suite_path)?),
                    (
                        system.path.display().to_string(),
                        file_digest(&system.path)?,
                    ),
                ]),
                outputs: BTreeMap::from([(
                    format!("translations.{sys}.jsonl"),
                    file_digest(&translations_path)?,
                )]),
            });

            let (records, _diags) =
                labeler.label(&suite, &vocab, &translations, sys, system.language)?;
            let annotations_path = out_dir.join(format!("annotations.{sys}.jsonl"));
            write_annotations(&annotations_path, &records)?;
            recs.push(StageRecord {
                name: format!("label:{sys}"),
                status: StageStatus::Ok,
                error: None,
                inputs: BTreeMap::from([(
                    format!("translations.{sys}.jsonl"),
                    file_digest(&translations_path)?,
                )]),
                outputs: BTreeMap::from([(
                    format!("annotations.{sys}.jsonl"),
                    file_digest(&annotations_path)?,
                )]),
            });

            let reports_dir = out_dir.join("reports");
            let mut score_outputs = BTreeMap::new();
            let mut score_errors = Vec::new();
            for kind in ReportKind::ALL {
                match compute_report(kind, &records, config.balancing_seed) {
                    Ok(report) => {
                        let (tsv_path, json_path) =
                            write_effect_report(&reports_dir, sys, kind, &report)?;
                        score_outputs
                            .insert(rel(&tsv_path, out_dir), file_digest(&tsv_path)?);
                        score_outputs
                            .insert(rel(&json_path, out_dir), file_digest(&json_path)?);
                    }
                    Err(e) => score_errors.push(format!("{}: {e}", kind.name())),
                }
            }
            recs.push(StageRecord {
                name: format!("score:{sys}"),
                status: if score_errors.is_empty() {
                    StageStatus::Ok
                } else {
                    StageStatus::Failed
                },
                error: if score_errors.is_empty() {
                    None
                } else {
                    Some(score_errors.join("; "))
                },
                inputs: BTreeMap::from([(
                    format!("annotations.{sys}.jsonl"),
                    file_digest(&annotations_path)?,
                )]),
                outputs: score_outputs,
            });

            let mut regress_outputs = BTreeMap::new();
            let mut regress_errors = Vec::new();
            for model in ModelKind::ALL {
                match run_regression(&records, model, &config.fit_options) {
                    Ok(result) => {
                        let (tsv_path, json_path) =
                            write_regression_report(&reports_dir, sys, model, &result)?;
                        regress_outputs
                            .insert(rel(&tsv_path, out_dir), file_digest(&tsv_path)?);
                        regress_outputs
                            .insert(rel(&json_path, out_dir), file_digest(&json_path)?);
                    }
                    Err(e) => regress_errors.push(format!("{}: {e}", model.name())),
                }
            }
            recs.push(StageRecord {
                name: format!("regress:{sys}"),
                status: if regress_errors.is_empty() {
                    StageStatus::Ok
                } else {
                    StageStatus::Failed
                },
                error: if regress_errors.is_empty() {
                    None
                } else {
                    Some(regress_errors.join("; "))
                },
                inputs: BTreeMap::from([(
                    format!("annotations.{sys}.jsonl"),
                    file_digest(&annotations_path)?,
                )]),
                outputs: regress_outputs,
            });
            Ok(recs)
        };
        match run_system() {
            Ok(recs) => stages.extend(recs),
            Err(e) => stages.push(StageRecord {
                name: format!("system:{sys}"),
                status: StageStatus::Failed,
                error: Some(e.to_string()),
                inputs: BTreeMap::new(),
                outputs: BTreeMap::new(),
            }),
        }
    }

    let status = if stages.iter().all(|s| s.status == StageStatus::Ok) {
        StageStatus::Ok
    } else {
        StageStatus::Failed
    };
    let manifest = RunManifest {
        schema: "manifest/1".to_string(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        config_digest: config.digest(),
        vocabulary_digest,
        suite_digest,
        timestamp: config.manifest_timestamp,
        stages,
        status,
    };
    atomic_write(&out_dir.join("manifest.json"), manifest.to_json().as_bytes())?;
    Ok(manifest)
}

fn rel(path: &Path, base: &Path) -> String {
    path.strip_prefix(base)
        .unwrap_or(path)
        .display()
        .to_string()
}

pub fn write_effect_report(
    reports_dir: &Path,
    system_id: &str,
    kind: ReportKind,
    report: &EffectReport,
) -> Result<(PathBuf, PathBuf), PipelineError> {
    let tsv_path = reports_dir.join(format!("{system_id}.{}.tsv", kind.name()));
    let json_path = reports_dir.join(format!("{system_id}.{}.json", kind.name()));
    atomic_write(
        &tsv_path,
        crate::metrics::render_report_tsv(kind, &[report]).as_bytes(),
    )?;
    atomic_write(
        &json_path,
        serde_json::to_string_pretty(report)
            .expect("report serializes")
            .as_bytes(),
    )?;
    Ok((tsv_path, json_path))
}

pub fn write_regression_report(
    reports_dir: &Path,
    system_id: &str,
    model: ModelKind,
    result: &RegressionResult,
) -> Result<(PathBuf, PathBuf), PipelineError> {
    let tsv_path = reports_dir.join(format!("{system_id}.regress.{}.tsv", model.name()));
    let json_path = reports_dir.join(format!("{system_id}.regress.{}.json", model.name()));
    atomic_write(
        &tsv_path,
        crate::regress::render_regression_table(result).as_bytes(),
    )?;
    atomic_write(
        &json_path,
        serde_json::to_string_pretty(result)
            .expect("result serializes")
            .as_bytes(),
    )?;
    Ok((tsv_path, json_path))
}

/// Pack the run directory into a reproducible tar archive: fixed metadata,
/// paths sorted, so re-archiving an identical run is byte-identical.
pub fn emit_release_bundle(run_dir: &Path, archive_path: &Path) -> Result<(), PipelineError> {
    let mut paths = Vec::new();
    collect_files(run_dir, run_dir, &mut paths)?;
    paths.sort();
    let mut builder = tar::Builder::new(Vec::new());
    for rel_path in &paths {
        let full = run_dir.join(rel_path);
        let data = fs::read(&full).map_err(|source| PipelineError::Io {
            path: full.clone(),
            source,
        })?;
        let mut header = tar::Header::new_gnu();
        header.set_size(data.len() as u64);
        header.set_mode(0o644);
        header.set_mtime(0);
        header.set_uid(0);
        header.set_gid(0);
        header.set_cksum();
        builder
            .append_data(&mut header, rel_path, data.as_slice())
            .map_err(|source| PipelineError::Io {
                path: archive_path.to_path_buf(),
                source,
            })?;
    }
    let bytes = builder.into_inner().map_err(|source| PipelineError::Io {
        path: archive_path.to_path_buf(),
        source,
    })?;
    atomic_write(archive_path, &bytes)
}

fn collect_files(base: &Path, dir: &Path, out: &mut Vec<PathBuf>) -> Result<(), PipelineError> {
    let entries = fs::read_dir(dir).map_err(|source| PipelineError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    for entry in entries {
        let entry = entry.map_err(|source| PipelineError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        let path = entry.path();
        if path.is_dir() {
            collect_files(base, &path, out)?;
        } else {
            out.push(path.strip_prefix(base).unwrap_or(&path).to_path_buf());
        }
    }
    Ok(())
}
