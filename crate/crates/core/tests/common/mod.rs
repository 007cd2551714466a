//! Shared test support: a full-scale synthetic vocabulary, a synthetic
//! Spanish-like target language (dictionary + lexicon), mock translators,
//! and an independent text-scan oracle for slot lookahead flags.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use gendial_core::pipeline::{OutputFormat, PipelineConfig, ProviderConfig, SystemOutput};
use gendial_core::templgen::{generate_all, Referent, SubsetKind, TemplateParams, TestInstance};
use gendial_core::vocab::{
    AdjectiveEntry, AdjType, AdverbEntry, OccupationEntry, Sentiment, Stereotype, Vocabulary,
};
use gendial_core::{BinaryGender, Language};

/// 350 adjectives (30 M + 30 F + 290 neutral, trait cells cycled), 29
/// adverbs (15 M + 14 F), 44 occupations (22 + 22): the full-scale set sizes.
pub fn synthetic_vocabulary() -> Vocabulary {
    let sentiments = [Sentiment::Positive, Sentiment::Negative, Sentiment::Neutral];
    let types = [AdjType::Character, AdjType::Appearance];
    let adjectives = (0..350)
        .map(|i| AdjectiveEntry {
            lemma: format!("adj{i:03}"),
            stereotype: if i < 30 {
                Stereotype::M
            } else if i < 60 {
                Stereotype::F
            } else {
                Stereotype::Neutral
            },
            sentiment: sentiments[i % 3],
            adj_type: types[(i / 3) % 2],
        })
        .collect();
    let adverbs = (0..29)
        .map(|i| AdverbEntry {
            lemma: if i < 15 {
                format!("advm{i:02}")
            } else {
                format!("advf{:02}", i - 15)
            },
            stereotype: if i < 15 { BinaryGender::M } else { BinaryGender::F },
        })
        .collect();
    let occupations = (0..44)
        .map(|i| OccupationEntry {
            lemma: if i < 22 {
                format!("occm{i:02}")
            } else {
                format!("occf{:02}", i - 22)
            },
            stereotype: if i < 22 { BinaryGender::M } else { BinaryGender::F },
        })
        .collect();
    Vocabulary::new(adjectives, adverbs, occupations)
}

/// A reduced synthetic vocabulary for quicker pipeline runs.
pub fn small_synthetic_vocabulary() -> Vocabulary {
    let sentiments = [Sentiment::Positive, Sentiment::Negative, Sentiment::Neutral];
    let types = [AdjType::Character, AdjType::Appearance];
    let adjectives = (0..120)
        .map(|i| AdjectiveEntry {
            lemma: format!("adj{i:03}"),
            stereotype: if i < 12 {
                Stereotype::M
            } else if i < 24 {
                Stereotype::F
            } else {
                Stereotype::Neutral
            },
            sentiment: sentiments[i % 3],
            adj_type: types[(i / 3) % 2],
        })
        .collect();
    let adverbs = (0..8)
        .map(|i| AdverbEntry {
            lemma: if i < 4 {
                format!("advm{i:02}")
            } else {
                format!("advf{:02}", i - 4)
            },
            stereotype: if i < 4 { BinaryGender::M } else { BinaryGender::F },
        })
        .collect();
    let occupations = (0..8)
        .map(|i| OccupationEntry {
            lemma: if i < 4 {
                format!("occm{i:02}")
            } else {
                format!("occf{:02}", i - 4)
            },
            stereotype: if i < 4 { BinaryGender::M } else { BinaryGender::F },
        })
        .collect();
    Vocabulary::new(adjectives, adverbs, occupations)
}

/// Write a vocabulary as the `--vocab-dir` TSV layout.
pub fn write_vocab_dir(dir: &Path, v: &Vocabulary) {
    let (adj, adv, occ) = v.to_tsv();
    fs::create_dir_all(dir).unwrap();
    fs::write(dir.join("adjectives.tsv"), adj).unwrap();
    fs::write(dir.join("adverbs.tsv"), adv).unwrap();
    fs::write(dir.join("occupations.tsv"), occ).unwrap();
}

/// Masculine / feminine synthetic target forms of an English lemma.
pub fn target_forms(lemma: &str) -> (String, String) {
    (format!("{lemma}o"), format!("{lemma}a"))
}

/// Write a synthetic target-language dictionary (`dict.es.tsv`) and
/// translation lexicon (`translations.es.tsv`) covering the vocabulary.
/// Returns (dict dir, lexicon path).
pub fn write_synthetic_language(dir: &Path, v: &Vocabulary) -> (PathBuf, PathBuf) {
    let dict_dir = dir.join("dict");
    fs::create_dir_all(&dict_dir).unwrap();
    let mut dict = String::from("form\tlemma\tpos\tgender\n");
    let mut lex = String::from("source\ttarget_lemma\n");
    for adj in v.adjectives() {
        let (m, f) = target_forms(&adj.lemma);
        dict.push_str(&format!("{m}\t{m}\tadj\tm\n"));
        dict.push_str(&format!("{f}\t{m}\tadj\tf\n"));
        lex.push_str(&format!("{}\t{m}\n", adj.lemma));
    }
    let dict_path = dict_dir.join("dict.es.tsv");
    fs::write(&dict_path, dict).unwrap();
    let lex_path = dir.join("translations.es.tsv");
    fs::write(&lex_path, lex).unwrap();
    (dict_dir, lex_path)
}

/// How a mock system chooses the gendered form for each slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MockPolicy {
    /// Every adjective gets the masculine form.
    AlwaysMasculine,
    /// Gender follows the slot referent's stereotype (masculine default).
    StereotypeFollowing,
}

/// Template-faithful synthetic translation: the source passage with each
/// adjective slot replaced by a gendered synthetic target form.
pub fn mock_translate(instance: &TestInstance, policy: MockPolicy) -> String {
    let chars: Vec<char> = instance.source_text.chars().collect();
    let spans = ascii_quoted_spans(&chars);
    let mut out = String::new();
    let mut cursor = 0usize;
    for slot in &instance.slots {
        let lemma: Vec<char> = slot.source_lemma.chars().collect();
        let pos = find_word_in_spans(&chars, &lemma, cursor, &spans)
            .unwrap_or_else(|| panic!("lemma `{}` not found in source", slot.source_lemma));
        out.extend(&chars[cursor..pos]);
        let gender = match policy {
            MockPolicy::AlwaysMasculine => BinaryGender::M,
            MockPolicy::StereotypeFollowing => {
                slot.referent_stereotype.unwrap_or(BinaryGender::M)
            }
        };
        let (m, f) = target_forms(&slot.source_lemma);
        out.push_str(if gender == BinaryGender::M { &m } else { &f });
        cursor = pos + lemma.len();
    }
    out.extend(&chars[cursor..]);
    out
}

/// Translate the whole suite in order (one line per instance).
pub fn mock_translate_suite(
    instances: &[TestInstance],
    policy: MockPolicy,
) -> String {
    let mut out = String::new();
    for inst in instances {
        out.push_str(&mock_translate(inst, policy));
        out.push('\n');
    }
    out
}

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

/// Spans between ASCII double quotes (the convention of generated sources).
fn ascii_quoted_spans(chars: &[char]) -> Vec<(usize, usize)> {
    let mut spans = Vec::new();
    let mut open: Option<usize> = None;
    for (i, &c) in chars.iter().enumerate() {
        if c == '"' {
            match open.take() {
                Some(s) => spans.push((s + 1, i)),
                None => open = Some(i),
            }
        }
    }
    spans
}

/// Whole-word occurrence of `needle` at or after `from` that falls inside a
/// quoted span (slot adjectives never sit in narration).
fn find_word_in_spans(
    haystack: &[char],
    needle: &[char],
    from: usize,
    spans: &[(usize, usize)],
) -> Option<usize> {
    let mut cursor = from;
    loop {
        let pos = find_word(haystack, needle, cursor)?;
        if spans.iter().any(|&(s, e)| pos >= s && pos < e) {
            return Some(pos);
        }
        cursor = pos + needle.len();
    }
}

fn find_substring(haystack: &[char], needle: &str) -> Option<usize> {
    let needle: Vec<char> = needle.chars().collect();
    if needle.is_empty() || haystack.len() < needle.len() {
        return None;
    }
    (0..=haystack.len() - needle.len()).find(|&i| haystack[i..i + needle.len()] == needle[..])
}

/// Lay out a complete mock evaluation under `base`: vocabulary dir,
/// synthetic target language, mock system outputs (one per policy), and a
/// pipeline config pointing at them.
pub fn setup_mock_run(
    base: &Path,
    v: &Vocabulary,
    params: &TemplateParams,
    seed: u64,
    policies: &[(&str, MockPolicy)],
) -> (PipelineConfig, Vec<SystemOutput>) {
    let vocab_dir = base.join("vocab");
    write_vocab_dir(&vocab_dir, v);
    let (dict_dir, lex_path) = write_synthetic_language(base, v);

    let suite = generate_all(v, params, seed).expect("mock suite generates");
    let mut systems = Vec::new();
    for (system_id, policy) in policies {
        let path = base.join(format!("{system_id}.out.txt"));
        fs::write(&path, mock_translate_suite(&suite.instances, *policy)).unwrap();
        systems.push(SystemOutput {
            system_id: system_id.to_string(),
            path,
            language: Language::Es,
            format: OutputFormat::Text,
        });
    }

    let config = PipelineConfig {
        vocab_dir,
        seed,
        balancing_seed: 11,
        languages: vec![Language::Es],
        template_params: params.clone(),
        providers: vec![ProviderConfig::Local],
        dict_dir: Some(dict_dir),
        dict_cache: None,
        rule_tables: BTreeMap::new(),
        lexicons: BTreeMap::from([("es".to_string(), lex_path)]),
        copula_cues: BTreeMap::new(),
        output_dir: base.join("out"),
        manifest_timestamp: 0,
        fit_options: Default::default(),
    };
    (config, systems)
}

/// Re-derive each slot's lookahead flag from the source text alone: the
/// flag must be true exactly when the referent's first narration mention
/// comes after the slot's adjective.
///
/// The scan knows only the four narration shapes: speaker 1 is introduced
/// at the start of the passage; speaker 2 is introduced by "to the <desc>"
/// (single-speaker family), "The <desc> laughed back" (two-way characters)
/// or "<He|She|I> laughed back" (structure families).
pub fn lookahead_oracle(instance: &TestInstance) -> Vec<bool> {
    let chars: Vec<char> = instance.source_text.chars().collect();
    let second_mention: Option<usize> = match instance.subset_kind {
        SubsetKind::StereoAdverb => None,
        SubsetKind::StereoCharSingle => {
            let (_, c2) = instance.characters.as_ref().expect("characters present");
            find_substring(&chars, &format!("to the {}", c2.phrase()))
        }
        SubsetKind::StereoCharDialogue => {
            let (_, c2) = instance.characters.as_ref().expect("characters present");
            find_substring(&chars, &format!("The {} laughed back", c2.phrase()))
        }
        _ => {
            let combo = instance
                .template_variables
                .get("genderCombo")
                .expect("structure instances carry genderCombo");
            let opener = match combo.as_bytes()[1] {
                b'm' => "He laughed back",
                b'f' => "She laughed back",
                _ => "I laughed back",
            };
            find_substring(&chars, opener)
        }
    };

    let spans = ascii_quoted_spans(&chars);
    let mut flags = Vec::with_capacity(instance.slots.len());
    let mut cursor = 0usize;
    for slot in &instance.slots {
        let lemma: Vec<char> = slot.source_lemma.chars().collect();
        let pos = find_word_in_spans(&chars, &lemma, cursor, &spans)
            .expect("slot lemma occurs in a quoted span");
        cursor = pos + lemma.len();
        let flag = match slot.referent {
            // speaker 1 is introduced by the first words of the passage
            Referent::Speaker1 => false,
            Referent::Speaker2 => match second_mention {
                Some(mention) => mention > pos,
                None => false,
            },
        };
        flags.push(flag);
    }
    flags
}
