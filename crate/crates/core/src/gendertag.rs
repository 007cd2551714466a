//! Two-pass gender labeling of extracted translations: dictionary evidence
//! first, morphological-regularity fallback second, else unclassified.
//!
//! Matching is diacritic-sensitive throughout; Czech and Icelandic gender is
//! often carried by the diacritic alone.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dictclient::{DictClient, DictError, DictionaryEvidence, GenderOfForm, PartOfSpeech};
use crate::{GenderLabel, Language};

/// Which pass produced the label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Stage {
    Dictionary,
    Morphology,
    None,
}

/// Fine-grained outcome recorded alongside the label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Detail {
    /// A regular gendered reading or ending chose M or F.
    RegularGendered,
    /// Form is valid for both M and F referents.
    EpiceneForm,
    /// Neuter grammatical gender.
    NeuterCase,
    /// The English source adjective was copied verbatim.
    SourceCopy,
    /// A noun (or other non-adjective) stands in for the adjective.
    NounPhrase,
    /// Out-of-dictionary form with a regular gendered adjective ending.
    OodRegularEnding,
    /// Neither pass matched.
    NoMatch,
}

/// The labeling outcome for one extracted target-language form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GenderAnnotation {
    pub label: GenderLabel,
    pub stage: Stage,
    pub detail: Detail,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub evidence: Option<DictionaryEvidence>,
}

impl GenderAnnotation {
    fn unclassified(evidence: Option<DictionaryEvidence>) -> Self {
        GenderAnnotation {
            label: GenderLabel::Unclassified,
            stage: Stage::None,
            detail: Detail::NoMatch,
            evidence,
        }
    }
}

/// One ending rule of the morphological fallback.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndingRule {
    pub ending: String,
    pub label: GenderLabel,
    pub detail: Detail,
}

/// Per-language ending-rule table; longest ending wins, first match on ties.
#[derive(Debug, Clone, Default)]
pub struct RuleTable {
    rules: Vec<EndingRule>,
}

#[derive(Debug, Error)]
pub enum RuleTableError {
    #[error("rule table {path}: line {line}: {reason}")]
    Malformed {
        path: PathBuf,
        line: usize,
        reason: String,
    },
    #[error("failed to read rule table {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl RuleTable {
    pub fn new(mut rules: Vec<EndingRule>) -> Self {
        rules.sort_by(|a, b| {
            b.ending
                .chars()
                .count()
                .cmp(&a.ending.chars().count())
                .then_with(|| a.ending.cmp(&b.ending))
        });
        RuleTable { rules }
    }

    /// Load `rules.<lang>.tsv`: `ending<TAB>label<TAB>detail` rows where
    /// label is m/f/n and detail is regular/epicene/neuter.
    pub fn load(path: &Path) -> Result<Self, RuleTableError> {
        let text = fs::read_to_string(path).map_err(|source| RuleTableError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut rules = Vec::new();
        let mut saw_header = false;
        for (idx, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            if !saw_header {
                saw_header = true;
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 3 {
                return Err(RuleTableError::Malformed {
                    path: path.to_path_buf(),
                    line: idx + 1,
                    reason: format!("expected 3 columns, got {}", cols.len()),
                });
            }
            let (label, detail) = match (cols[1], cols[2]) {
                ("m", "regular") => (GenderLabel::M, Detail::OodRegularEnding),
                ("f", "regular") => (GenderLabel::F, Detail::OodRegularEnding),
                ("n", "epicene") => (GenderLabel::N, Detail::EpiceneForm),
                ("n", "neuter") => (GenderLabel::N, Detail::NeuterCase),
                (l, d) => {
                    return Err(RuleTableError::Malformed {
                        path: path.to_path_buf(),
                        line: idx + 1,
                        reason: format!("unsupported label/detail pair `{l}`/`{d}`"),
                    })
                }
            };
            rules.push(EndingRule {
                ending: cols[0].to_string(),
                label,
                detail,
            });
        }
        Ok(RuleTable::new(rules))
    }

    /// The built-in tables: the regular adjective endings of the three
    /// target languages (identical to the shipped `rules.<lang>.tsv` files).
    pub fn builtin(language: Language) -> Self {
        let rules = match language {
            Language::Es => vec![
                ("o", GenderLabel::M, Detail::OodRegularEnding),
                ("a", GenderLabel::F, Detail::OodRegularEnding),
                ("e", GenderLabel::N, Detail::EpiceneForm),
            ],
            Language::Cs => vec![
                ("ý", GenderLabel::M, Detail::OodRegularEnding),
                ("á", GenderLabel::F, Detail::OodRegularEnding),
                ("é", GenderLabel::N, Detail::NeuterCase),
                ("í", GenderLabel::N, Detail::EpiceneForm),
            ],
            Language::Is => vec![
                ("ur", GenderLabel::M, Detail::OodRegularEnding),
                ("t", GenderLabel::N, Detail::NeuterCase),
            ],
        };
        RuleTable::new(
            rules
                .into_iter()
                .map(|(e, label, detail)| EndingRule {
                    ending: e.to_string(),
                    label,
                    detail,
                })
                .collect(),
        )
    }

    fn apply(&self, form: &str) -> Option<(GenderLabel, Detail)> {
        self.rules
            .iter()
            .find(|r| form.ends_with(r.ending.as_str()) && form.chars().count() > r.ending.chars().count())
            .map(|r| (r.label, r.detail))
    }
}

/// Morphological fallback for a form absent from every dictionary: a label
/// only when the form matches a regular gendered adjective ending.
pub fn morphological_fallback(
    form: &str,
    rules: &RuleTable,
) -> Option<(GenderLabel, Detail)> {
    rules.apply(form)
}

/// Classify one extracted form. The dictionary pass runs first and wins
/// whenever evidence is found; a verbatim copy of the English source lemma
/// is neutral regardless of what else would match.
///
/// The morphological fallback requires a dictionary answer of "not found",
/// so an unavailable provider chain propagates as an error unless the form
/// is a source copy (which needs no dictionary).
pub fn classify(
    form: &str,
    language: Language,
    dict: &DictClient,
    rules: &RuleTable,
    source_lemma: &str,
) -> Result<GenderAnnotation, DictError> {
    let form = form.trim();
    let evidence = match dict.lookup(form, language) {
        Ok(ev) => Some(ev),
        Err(unavailable @ DictError::ProviderUnavailable { .. }) => {
            if form.eq_ignore_ascii_case(source_lemma) {
                return Ok(GenderAnnotation {
                    label: GenderLabel::N,
                    stage: Stage::Dictionary,
                    detail: Detail::SourceCopy,
                    evidence: None,
                });
            }
            return Err(unavailable);
        }
        Err(e) => return Err(e),
    };

    if form.eq_ignore_ascii_case(source_lemma) {
        return Ok(GenderAnnotation {
            label: GenderLabel::N,
            stage: Stage::Dictionary,
            detail: Detail::SourceCopy,
            evidence,
        });
    }

    if let Some(ev) = evidence.as_ref().filter(|ev| ev.found) {
        let (label, detail) = label_from_readings(ev);
        return Ok(GenderAnnotation {
            label,
            stage: Stage::Dictionary,
            detail,
            evidence,
        });
    }

    // multiword extraction: label via its head adjective when one can be
    // identified, else count it as a noun-phrase substitution
    if form.split_whitespace().nth(1).is_some() {
        for token in form.split_whitespace() {
            let ev = dict.lookup(token, language)?;
            if ev.found
                && ev
                    .readings
                    .iter()
                    .any(|r| r.part_of_speech == PartOfSpeech::Adjective)
            {
                let (label, detail) = label_from_readings(&ev);
                return Ok(GenderAnnotation {
                    label,
                    stage: Stage::Dictionary,
                    detail,
                    evidence: Some(ev),
                });
            }
        }
        return Ok(GenderAnnotation {
            label: GenderLabel::N,
            stage: Stage::Dictionary,
            detail: Detail::NounPhrase,
            evidence,
        });
    }

    match morphological_fallback(form, rules) {
        Some((label, detail)) => Ok(GenderAnnotation {
            label,
            stage: Stage::Morphology,
            detail,
            evidence,
        }),
        None => Ok(GenderAnnotation::unclassified(evidence)),
    }
}

/// Map dictionary readings to a label. Adjective readings take precedence;
/// conflicting M and F adjective readings of one surface form are treated
/// as an epicene form, neuter readings as the neuter case, and forms with
/// only non-adjective readings as a noun-phrase substitution.
fn label_from_readings(ev: &DictionaryEvidence) -> (GenderLabel, Detail) {
    let adj: Vec<_> = ev
        .readings
        .iter()
        .filter(|r| r.part_of_speech == PartOfSpeech::Adjective)
        .collect();
    if adj.is_empty() {
        return (GenderLabel::N, Detail::NounPhrase);
    }
    let has = |g: GenderOfForm| adj.iter().any(|r| r.gender_of_form == g);
    if has(GenderOfForm::Epicene) || (has(GenderOfForm::M) && has(GenderOfForm::F)) {
        (GenderLabel::N, Detail::EpiceneForm)
    } else if has(GenderOfForm::M) {
        (GenderLabel::M, Detail::RegularGendered)
    } else if has(GenderOfForm::F) {
        (GenderLabel::F, Detail::RegularGendered)
    } else {
        (GenderLabel::N, Detail::NeuterCase)
    }
}
