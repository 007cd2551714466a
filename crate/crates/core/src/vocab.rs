//! Annotated vocabulary: adjectives with stereotype/sentiment/type labels,
//! plus gender-stereotyped adverbs and occupations.
//!
//! The three sets are loaded from UTF-8 tab-separated files with a header
//! row. Label spellings are accepted case-insensitively and normalized on
//! load; a loaded [`Vocabulary`] is immutable.

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::BinaryGender;

/// Gender stereotype annotation of an adjective (adverbs and occupations use
/// the binary [`BinaryGender`] form).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Stereotype {
    M,
    F,
    Neutral,
}

impl Stereotype {
    pub fn as_binary(self) -> Option<BinaryGender> {
        match self {
            Stereotype::M => Some(BinaryGender::M),
            Stereotype::F => Some(BinaryGender::F),
            Stereotype::Neutral => None,
        }
    }

    fn label(self) -> &'static str {
        match self {
            Stereotype::M => "m",
            Stereotype::F => "f",
            Stereotype::Neutral => "neutral",
        }
    }
}

impl FromStr for Stereotype {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s.to_ascii_lowercase().as_str() {
            "m" | "male" | "masc" => Ok(Stereotype::M),
            "f" | "female" | "fem" => Ok(Stereotype::F),
            "neutral" | "neu" | "n" => Ok(Stereotype::Neutral),
            _ => Err(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Sentiment {
    Positive,
    Negative,
    Neutral,
}

impl Sentiment {
    fn label(self) -> &'static str {
        match self {
            Sentiment::Positive => "pos",
            Sentiment::Negative => "neg",
            Sentiment::Neutral => "neu",
        }
    }
}

impl FromStr for Sentiment {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s.to_ascii_lowercase().as_str() {
            "pos" | "positive" => Ok(Sentiment::Positive),
            "neg" | "negative" => Ok(Sentiment::Negative),
            "neu" | "neutral" => Ok(Sentiment::Neutral),
            _ => Err(()),
        }
    }
}

/// Whether an adjective describes character or appearance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum AdjType {
    Character,
    Appearance,
}

impl AdjType {
    fn label(self) -> &'static str {
        match self {
            AdjType::Character => "character",
            AdjType::Appearance => "appearance",
        }
    }
}

impl FromStr for AdjType {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s.to_ascii_lowercase().as_str() {
            "character" | "char" => Ok(AdjType::Character),
            "appearance" | "app" => Ok(AdjType::Appearance),
            _ => Err(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdjectiveEntry {
    pub lemma: String,
    pub stereotype: Stereotype,
    pub sentiment: Sentiment,
    pub adj_type: AdjType,
}

impl AdjectiveEntry {
    /// The (sentiment, type) trait cell, used for balanced sampling and
    /// balanced report subsets.
    pub fn trait_cell(&self) -> (Sentiment, AdjType) {
        (self.sentiment, self.adj_type)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdverbEntry {
    pub lemma: String,
    pub stereotype: BinaryGender,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OccupationEntry {
    pub lemma: String,
    pub stereotype: BinaryGender,
}

#[derive(Debug, Error)]
pub enum VocabError {
    #[error("{path}:{line}: malformed row: {reason}")]
    MalformedRow {
        path: PathBuf,
        line: usize,
        reason: String,
    },
    #[error("{path}:{line}: unknown {field} label `{value}`")]
    UnknownLabel {
        path: PathBuf,
        line: usize,
        field: &'static str,
        value: String,
    },
    #[error("{path}:{line}: duplicate lemma `{lemma}`")]
    DuplicateLemma {
        path: PathBuf,
        line: usize,
        lemma: String,
    },
    #[error("{path}: file contains a header but no entries")]
    EmptySet { path: PathBuf },
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// A data-level problem reported by validation; not a load failure.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Violation {
    /// Occupation set does not split into equal M and F halves.
    OccupationImbalance { m: usize, f: usize, empty: bool },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::OccupationImbalance { m, f: fc, empty } => {
                if *empty {
                    write!(f, "occupation set is empty ({m} M, {fc} F)")
                } else {
                    write!(f, "occupation set is imbalanced: {m} M vs {fc} F")
                }
            }
        }
    }
}

/// The loaded vocabulary. Immutable after load; lemma lookups are total over
/// the loaded entries.
#[derive(Debug, Clone)]
pub struct Vocabulary {
    adjectives: Vec<AdjectiveEntry>,
    adverbs: Vec<AdverbEntry>,
    occupations: Vec<OccupationEntry>,
    adj_index: HashMap<String, usize>,
}

impl PartialEq for Vocabulary {
    fn eq(&self, other: &Self) -> bool {
        self.adjectives == other.adjectives
            && self.adverbs == other.adverbs
            && self.occupations == other.occupations
    }
}

impl Vocabulary {
    pub fn new(
        adjectives: Vec<AdjectiveEntry>,
        adverbs: Vec<AdverbEntry>,
        occupations: Vec<OccupationEntry>,
    ) -> Self {
        let adj_index = adjectives
            .iter()
            .enumerate()
            .map(|(i, a)| (a.lemma.clone(), i))
            .collect();
        Vocabulary {
            adjectives,
            adverbs,
            occupations,
            adj_index,
        }
    }

    pub fn adjectives(&self) -> &[AdjectiveEntry] {
        &self.adjectives
    }

    pub fn adverbs(&self) -> &[AdverbEntry] {
        &self.adverbs
    }

    pub fn occupations(&self) -> &[OccupationEntry] {
        &self.occupations
    }

    pub fn adjective(&self, lemma: &str) -> Option<&AdjectiveEntry> {
        self.adj_index.get(lemma).map(|&i| &self.adjectives[i])
    }

    pub fn adverb(&self, lemma: &str) -> Option<&AdverbEntry> {
        self.adverbs.iter().find(|a| a.lemma == lemma)
    }

    /// Canonical TSV serialization of all three sets, also the digest input.
    /// Reloading the three sections yields an identical vocabulary.
    pub fn to_tsv(&self) -> (String, String, String) {
        let mut adj = String::from("lemma\tstereotype\tsentiment\ttype\n");
        for a in &self.adjectives {
            adj.push_str(&format!(
                "{}\t{}\t{}\t{}\n",
                a.lemma,
                a.stereotype.label(),
                a.sentiment.label(),
                a.adj_type.label()
            ));
        }
        let mut adv = String::from("lemma\tstereotype\n");
        for a in &self.adverbs {
            adv.push_str(&format!("{}\t{}\n", a.lemma, a.stereotype.letter().to_lowercase()));
        }
        let mut occ = String::from("lemma\tstereotype\n");
        for o in &self.occupations {
            occ.push_str(&format!("{}\t{}\n", o.lemma, o.stereotype.letter().to_lowercase()));
        }
        (adj, adv, occ)
    }

    /// SHA-256 over the canonical TSV serialization; recorded in every
    /// generated suite so downstream stages can detect vocabulary drift.
    pub fn digest(&self) -> String {
        let (adj, adv, occ) = self.to_tsv();
        crate::sha256_hex(format!("{adj}\x00{adv}\x00{occ}").as_bytes())
    }
}

/// Load and validate the three vocabulary files.
pub fn load_vocabulary(
    adj_path: &Path,
    adv_path: &Path,
    occ_path: &Path,
) -> Result<Vocabulary, VocabError> {
    let adjectives = load_adjective_file(adj_path)?;
    let adverbs = load_binary_file(adv_path, |lemma, stereotype| AdverbEntry {
        lemma,
        stereotype,
    })?;
    let occupations = load_binary_file(occ_path, |lemma, stereotype| OccupationEntry {
        lemma,
        stereotype,
    })?;
    Ok(Vocabulary::new(adjectives, adverbs, occupations))
}

/// Convenience loader for a directory holding `adjectives.tsv`,
/// `adverbs.tsv` and `occupations.tsv` (the CLI's `--vocab-dir` layout).
pub fn load_vocabulary_dir(dir: &Path) -> Result<Vocabulary, VocabError> {
    load_vocabulary(
        &dir.join("adjectives.tsv"),
        &dir.join("adverbs.tsv"),
        &dir.join("occupations.tsv"),
    )
}

/// Empty iff the occupation set splits into equal, non-empty M and F halves.
pub fn validate_occupation_pairing(v: &Vocabulary) -> Vec<Violation> {
    let m = v
        .occupations()
        .iter()
        .filter(|o| o.stereotype == BinaryGender::M)
        .count();
    let f = v.occupations().len() - m;
    if m == f && m > 0 {
        Vec::new()
    } else {
        vec![Violation::OccupationImbalance {
            m,
            f,
            empty: m == 0 && f == 0,
        }]
    }
}

fn read_rows(path: &Path, expected_cols: usize) -> Result<Vec<(usize, Vec<String>)>, VocabError> {
    let text = fs::read_to_string(path).map_err(|source| VocabError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.split('\t').count() == expected_cols => {}
        Some((_, header)) => {
            return Err(VocabError::MalformedRow {
                path: path.to_path_buf(),
                line: 1,
                reason: format!(
                    "header has {} columns, expected {expected_cols}",
                    header.split('\t').count()
                ),
            })
        }
        None => return Err(VocabError::EmptySet {
            path: path.to_path_buf(),
        }),
    }
    let mut rows = Vec::new();
    for (idx, line) in lines {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<String> = line.split('\t').map(|c| c.trim().to_string()).collect();
        if cols.len() != expected_cols || cols[0].is_empty() {
            return Err(VocabError::MalformedRow {
                path: path.to_path_buf(),
                line: idx + 1,
                reason: if cols[0].is_empty() {
                    "empty lemma".to_string()
                } else {
                    format!("{} columns, expected {expected_cols}", cols.len())
                },
            });
        }
        rows.push((idx + 1, cols));
    }
    if rows.is_empty() {
        return Err(VocabError::EmptySet {
            path: path.to_path_buf(),
        });
    }
    Ok(rows)
}

fn load_adjective_file(path: &Path) -> Result<Vec<AdjectiveEntry>, VocabError> {
    let mut seen: HashMap<String, usize> = HashMap::new();
    let mut out = Vec::new();
    for (line, cols) in read_rows(path, 4)? {
        let lemma = cols[0].clone();
        if seen.insert(lemma.clone(), line).is_some() {
            return Err(VocabError::DuplicateLemma {
                path: path.to_path_buf(),
                line,
                lemma,
            });
        }
        let stereotype = cols[1].parse().map_err(|_| VocabError::UnknownLabel {
            path: path.to_path_buf(),
            line,
            field: "stereotype",
            value: cols[1].clone(),
        })?;
        let sentiment = cols[2].parse().map_err(|_| VocabError::UnknownLabel {
            path: path.to_path_buf(),
            line,
            field: "sentiment",
            value: cols[2].clone(),
        })?;
        let adj_type = cols[3].parse().map_err(|_| VocabError::UnknownLabel {
            path: path.to_path_buf(),
            line,
            field: "type",
            value: cols[3].clone(),
        })?;
        out.push(AdjectiveEntry {
            lemma,
            stereotype,
            sentiment,
            adj_type,
        });
    }
    Ok(out)
}

fn load_binary_file<T>(
    path: &Path,
    build: impl Fn(String, BinaryGender) -> T,
) -> Result<Vec<T>, VocabError> {
    let mut seen: HashMap<String, usize> = HashMap::new();
    let mut out = Vec::new();
    for (line, cols) in read_rows(path, 2)? {
        let lemma = cols[0].clone();
        if seen.insert(lemma.clone(), line).is_some() {
            return Err(VocabError::DuplicateLemma {
                path: path.to_path_buf(),
                line,
                lemma,
            });
        }
        let stereotype = match cols[1].to_ascii_lowercase().as_str() {
            "m" | "male" | "masc" => BinaryGender::M,
            "f" | "female" | "fem" => BinaryGender::F,
            other => {
                return Err(VocabError::UnknownLabel {
                    path: path.to_path_buf(),
                    line,
                    field: "stereotype",
                    value: other.to_string(),
                })
            }
        };
        out.push(build(lemma, stereotype));
    }
    Ok(out)
}
