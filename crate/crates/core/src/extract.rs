//! Alignment of adjective slots with tokens in a system's translation.
//!
//! The strategy is quote-anchored: the target text is segmented into quoted
//! spans, each slot is mapped to its expected span (the span its adjective
//! occupies in the source), and within the span the extractor prefers a
//! token whose dictionary lemma is a known translation of the source lemma,
//! falling back to a copula-anchored position heuristic. Slot gender
//! metadata is never consulted.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dictclient::DictClient;
use crate::templgen::{TestInstance, TestSuite};
use crate::Language;

/// One system translation of one suite instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TranslationRecord {
    pub instance_id: String,
    pub system_id: String,
    pub target_text: String,
    pub language: Language,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ExtractionMethod {
    DictionaryMatch,
    PositionHeuristic,
    Provided,
    Missing,
}

/// The aligned form for one slot; offsets are character offsets into the
/// target text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SlotExtraction {
    pub instance_id: String,
    pub slot_index: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub extracted_form: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub span_start: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub span_end: Option<usize>,
    pub method: ExtractionMethod,
}

impl SlotExtraction {
    fn missing(instance_id: &str, slot_index: usize) -> Self {
        SlotExtraction {
            instance_id: instance_id.to_string(),
            slot_index,
            extracted_form: None,
            span_start: None,
            span_end: None,
            method: ExtractionMethod::Missing,
        }
    }
}

/// Extraction output for one instance; span mismatches downgrade slots to
/// MISSING and are reported here rather than aborting the batch.
#[derive(Debug, Clone, Default)]
pub struct ExtractionOutcome {
    pub extractions: Vec<SlotExtraction>,
    pub diagnostics: Vec<String>,
}

#[derive(Debug, Error)]
pub enum ExtractError {
    #[error("translation record for unknown instance `{0}`")]
    UnknownInstance(String),
    #[error("instance `{instance_id}`: record has {got} slots, suite expects {expected}")]
    SlotCountMismatch {
        instance_id: String,
        expected: usize,
        got: usize,
    },
    #[error("record mismatch: translation is for `{got}`, expected `{expected}`")]
    InstanceMismatch { expected: String, got: String },
    #[error("provided alignment {path}: line {line}: {reason}")]
    BadProvidedFile {
        path: PathBuf,
        line: usize,
        reason: String,
    },
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Translation lexicon and copula cues driving the two alignment passes.
#[derive(Debug, Clone, Default)]
pub struct ExtractConfig {
    /// source lemma -> known target lemmas.
    pub translations: HashMap<String, HashSet<String>>,
    /// Copula forms used by the position heuristic.
    pub copula_cues: Vec<String>,
}

impl ExtractConfig {
    /// Load a `source<TAB>target_lemma` lexicon (one pair per row, repeated
    /// sources allowed) and the default copula cues for the language.
    pub fn load(lexicon: &Path, language: Language) -> Result<Self, ExtractError> {
        let text = fs::read_to_string(lexicon).map_err(|source| ExtractError::Io {
            path: lexicon.to_path_buf(),
            source,
        })?;
        let mut translations: HashMap<String, HashSet<String>> = HashMap::new();
        for (idx, line) in text.lines().enumerate() {
            if idx == 0 || line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 2 {
                return Err(ExtractError::BadProvidedFile {
                    path: lexicon.to_path_buf(),
                    line: idx + 1,
                    reason: format!("expected 2 columns, got {}", cols.len()),
                });
            }
            translations
                .entry(cols[0].to_lowercase())
                .or_default()
                .insert(cols[1].to_lowercase());
        }
        Ok(ExtractConfig {
            translations,
            copula_cues: default_copula_cues(language),
        })
    }
}

/// Built-in copula cue lists (overridable via config).
pub fn default_copula_cues(language: Language) -> Vec<String> {
    let cues: &[&str] = match language {
        Language::Es => &[
            "soy", "eres", "es", "somos", "sois", "son", "estoy", "estás", "está", "estamos",
            "están", "era", "eras",
        ],
        Language::Cs => &["jsem", "jsi", "je", "jsme", "jste", "jsou", "byl", "byla", "nejsem", "nejsi"],
        Language::Is => &["er", "ert", "erum", "eruð", "eru", "var", "varst"],
    };
    cues.iter().map(|s| s.to_string()).collect()
}

/// Opening/closing quote pairs recognized by the segmenter. ASCII double
/// quotes toggle; typographic pairs match their counterpart, covering the
/// Spanish, Czech and Icelandic conventions.
const QUOTE_PAIRS: [(char, char); 5] = [
    ('“', '”'),
    ('„', '“'),
    ('«', '»'),
    ('»', '«'),
    ('‘', '’'),
];

/// Character-offset spans of quoted dialogue in `text`, in order.
pub fn quoted_spans(text: &str) -> Vec<(usize, usize)> {
    let chars: Vec<char> = text.chars().collect();
    let mut spans = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let closer = if c == '"' {
            Some('"')
        } else {
            QUOTE_PAIRS.iter().find(|(open, _)| *open == c).map(|&(_, close)| close)
        };
        if let Some(closer) = closer {
            if let Some(off) = chars[i + 1..].iter().position(|&ch| ch == closer) {
                spans.push((i + 1, i + 1 + off));
                i = i + 1 + off + 1;
                continue;
            }
        }
        i += 1;
    }
    spans
}

#[derive(Debug, Clone)]
struct Token {
    text: String,
    start: usize,
    end: usize,
}

/// Whitespace tokens with surrounding punctuation trimmed; offsets are
/// character offsets into the full text.
fn tokenize(chars: &[char], span: (usize, usize)) -> Vec<Token> {
    let is_punct = |c: char| {
        c.is_whitespace()
            || matches!(
                c,
                '.' | ',' | '!' | '?' | ';' | ':' | '"' | '«' | '»' | '„' | '“' | '”' | '‘'
                    | '’' | '‚' | '(' | ')' | '—' | '…'
            )
    };
    let mut tokens = Vec::new();
    let mut i = span.0;
    while i < span.1 {
        if is_punct(chars[i]) {
            i += 1;
            continue;
        }
        let start = i;
        while i < span.1 && !is_punct(chars[i]) {
            i += 1;
        }
        tokens.push(Token {
            text: chars[start..i].iter().collect(),
            start,
            end: i,
        });
    }
    tokens
}

/// Map each slot to the ordinal of the quoted span its adjective occupies in
/// the *source* text. Uses only the source text and slot lemmas.
fn slot_span_ordinals(instance: &TestInstance) -> Option<Vec<usize>> {
    let spans = quoted_spans(&instance.source_text);
    let chars: Vec<char> = instance.source_text.chars().collect();
    let mut ordinals = Vec::with_capacity(instance.slots.len());
    let mut search_from = 0usize;
    for slot in &instance.slots {
        let lemma: Vec<char> = slot.source_lemma.chars().collect();
        // slot adjectives live inside quotes; skip narration occurrences
        // (a character description may reuse a slot's adjective)
        let (pos, ordinal) = loop {
            let pos = find_word(&chars, &lemma, search_from)?;
            match spans.iter().position(|&(s, e)| pos >= s && pos < e) {
                Some(ordinal) => break (pos, ordinal),
                None => search_from = pos + lemma.len(),
            }
        };
        search_from = pos + lemma.len();
        ordinals.push(ordinal);
    }
    Some(ordinals)
}

/// Whole-word occurrence of `needle` in `haystack` at or after `from`.
fn find_word(haystack: &[char], needle: &[char], from: usize) -> Option<usize> {
    if needle.is_empty() || haystack.len() < needle.len() {
        return None;
    }
    (from..=haystack.len() - needle.len()).find(|&i| {
        haystack[i..i + needle.len()] == *needle
            && (i == 0 || !haystack[i - 1].is_alphanumeric())
            && (i + needle.len() == haystack.len() || !haystack[i + needle.len()].is_alphanumeric())
    })
}

/// Align every slot of `instance` with a token of `rec.target_text`.
pub fn extract_slots(
    instance: &TestInstance,
    rec: &TranslationRecord,
    dict: &DictClient,
    config: &ExtractConfig,
) -> Result<ExtractionOutcome, ExtractError> {
    if rec.instance_id != instance.instance_id {
        return Err(ExtractError::InstanceMismatch {
            expected: instance.instance_id.clone(),
            got: rec.instance_id.clone(),
        });
    }
    let mut outcome = ExtractionOutcome::default();
    let target_chars: Vec<char> = rec.target_text.chars().collect();
    let target_spans = quoted_spans(&rec.target_text);

    let source_ordinals = match slot_span_ordinals(instance) {
        Some(o) => o,
        None => {
            outcome
                .diagnostics
                .push(format!("{}: could not map slots to source spans", instance.instance_id));
            outcome.extractions = instance
                .slots
                .iter()
                .map(|s| SlotExtraction::missing(&instance.instance_id, s.slot_index))
                .collect();
            return Ok(outcome);
        }
    };
    let needed_spans = source_ordinals.iter().copied().max().map(|m| m + 1).unwrap_or(0);
    if target_spans.len() < needed_spans {
        outcome.diagnostics.push(format!(
            "{}: span mismatch: translation has {} quoted spans, slots need {}",
            instance.instance_id,
            target_spans.len(),
            needed_spans
        ));
    }

    // token cursor per span so two slots in one span consume tokens in order
    let mut span_cursor: HashMap<usize, usize> = HashMap::new();
    for (slot, &ordinal) in instance.slots.iter().zip(&source_ordinals) {
        let Some(&span) = target_spans.get(ordinal) else {
            outcome
                .extractions
                .push(SlotExtraction::missing(&instance.instance_id, slot.slot_index));
            continue;
        };
        let tokens = tokenize(&target_chars, span);
        let start_at = *span_cursor.get(&ordinal).unwrap_or(&0);
        let known: Option<&HashSet<String>> =
            config.translations.get(&slot.source_lemma.to_lowercase());

        // pass 1: dictionary-backed lemma match against the known translations
        let mut selected: Option<(usize, ExtractionMethod)> = None;
        if let Some(known) = known {
            for (ti, token) in tokens.iter().enumerate().skip(start_at) {
                let Ok(ev) = dict.lookup(&token.text, rec.language) else {
                    continue;
                };
                if ev.found
                    && ev
                        .readings
                        .iter()
                        .any(|r| known.contains(&r.lemma.to_lowercase()))
                {
                    selected = Some((ti, ExtractionMethod::DictionaryMatch));
                    break;
                }
            }
        }

        // pass 2: first token after the next copula cue
        if selected.is_none() {
            let cue_index = tokens
                .iter()
                .enumerate()
                .skip(start_at)
                .find(|(_, t)| config.copula_cues.iter().any(|c| t.text.eq_ignore_ascii_case(c)))
                .map(|(i, _)| i);
            if let Some(ci) = cue_index {
                if let Some((ti, _)) = tokens
                    .iter()
                    .enumerate()
                    .skip(ci + 1)
                    .find(|(_, t)| !config.copula_cues.iter().any(|c| t.text.eq_ignore_ascii_case(c)))
                {
                    selected = Some((ti, ExtractionMethod::PositionHeuristic));
                }
            }
        }

        match selected {
            Some((ti, method)) => {
                let token = &tokens[ti];
                span_cursor.insert(ordinal, ti + 1);
                outcome.extractions.push(SlotExtraction {
                    instance_id: instance.instance_id.clone(),
                    slot_index: slot.slot_index,
                    extracted_form: Some(token.text.clone()),
                    span_start: Some(token.start),
                    span_end: Some(token.end),
                    method,
                });
            }
            None => outcome
                .extractions
                .push(SlotExtraction::missing(&instance.instance_id, slot.slot_index)),
        }
    }
    Ok(outcome)
}

/// Validate and ingest pre-aligned extractions supplied by the user.
///
/// The file is JSON-lines of `{instanceId, slotIndex, extractedForm,
/// spanStart?, spanEnd?}`; every record is re-marked PROVIDED.
pub fn ingest_provided_alignments(
    path: &Path,
    suite: &TestSuite,
) -> Result<Vec<SlotExtraction>, ExtractError> {
    #[derive(Deserialize)]
    #[serde(rename_all = "camelCase")]
    struct ProvidedRow {
        instance_id: String,
        slot_index: usize,
        extracted_form: Option<String>,
        span_start: Option<usize>,
        span_end: Option<usize>,
    }

    let text = fs::read_to_string(path).map_err(|source| ExtractError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let by_id: HashMap<&str, &TestInstance> = suite
        .instances
        .iter()
        .map(|i| (i.instance_id.as_str(), i))
        .collect();
    let mut per_instance: HashMap<String, usize> = HashMap::new();
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row: ProvidedRow =
            serde_json::from_str(line).map_err(|e| ExtractError::BadProvidedFile {
                path: path.to_path_buf(),
                line: idx + 1,
                reason: e.to_string(),
            })?;
        let instance = by_id
            .get(row.instance_id.as_str())
            .ok_or_else(|| ExtractError::UnknownInstance(row.instance_id.clone()))?;
        if row.slot_index >= instance.slots.len() {
            return Err(ExtractError::SlotCountMismatch {
                instance_id: row.instance_id.clone(),
                expected: instance.slots.len(),
                got: row.slot_index + 1,
            });
        }
        if let (Some(s), Some(e), Some(form)) = (row.span_start, row.span_end, &row.extracted_form)
        {
            if s > e || form.chars().count() != e - s {
                return Err(ExtractError::BadProvidedFile {
                    path: path.to_path_buf(),
                    line: idx + 1,
                    reason: format!("span {s}..{e} inconsistent with form `{form}`"),
                });
            }
        }
        *per_instance.entry(row.instance_id.clone()).or_default() += 1;
        let has_form = row.extracted_form.is_some();
        out.push(SlotExtraction {
            instance_id: row.instance_id,
            slot_index: row.slot_index,
            extracted_form: row.extracted_form,
            span_start: row.span_start,
            span_end: row.span_end,
            method: if has_form {
                ExtractionMethod::Provided
            } else {
                ExtractionMethod::Missing
            },
        });
    }
    for (id, count) in &per_instance {
        let expected = by_id[id.as_str()].slots.len();
        if *count != expected {
            return Err(ExtractError::SlotCountMismatch {
                instance_id: id.clone(),
                expected,
                got: *count,
            });
        }
    }
    Ok(out)
}
