//! Deterministic expansion of the four dialogue template families into test
//! instances with complete per-slot metadata.
//!
//! Generation is a pure function of (vocabulary, params, seed): every random
//! draw happens on a ChaCha stream derived from the seed and the base
//! template's key, so families and base templates can be regenerated
//! independently and the output is byte-identical across runs. Instances are
//! returned sorted by id.

mod families;
mod sampling;

pub use families::{
    generate_stereo_adverb, generate_stereo_character_dialogue, generate_stereo_character_single,
    generate_structure, GenderContext, StructureStyle,
};
pub use sampling::{balanced_sample, build_character_pairs, derive_rng};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::vocab::{AdverbEntry, Vocabulary};
use crate::BinaryGender;

/// The test suite subset a generated instance belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SubsetKind {
    StereoAdverb,
    StereoCharSingle,
    StereoCharDialogue,
    StructureStyle1Full,
    StructureStyle1Partial,
    StructureStyle2Full,
    StructureStyle2Partial,
}

impl SubsetKind {
    pub fn is_structure(self) -> bool {
        matches!(
            self,
            SubsetKind::StructureStyle1Full
                | SubsetKind::StructureStyle1Partial
                | SubsetKind::StructureStyle2Full
                | SubsetKind::StructureStyle2Partial
        )
    }

    pub fn id_prefix(self) -> &'static str {
        match self {
            SubsetKind::StereoAdverb => "stereo_adverb",
            SubsetKind::StereoCharSingle => "stereo_char_single",
            SubsetKind::StereoCharDialogue => "stereo_char_dialogue",
            SubsetKind::StructureStyle1Full => "structure_style1_full",
            SubsetKind::StructureStyle1Partial => "structure_style1_partial",
            SubsetKind::StructureStyle2Full => "structure_style2_full",
            SubsetKind::StructureStyle2Partial => "structure_style2_partial",
        }
    }
}

/// Which of the two characters an adjective slot refers to, by order of
/// introduction in the passage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Referent {
    #[serde(rename = "SPEAKER_1")]
    Speaker1,
    #[serde(rename = "SPEAKER_2")]
    Speaker2,
}

/// Grammatical person of the referent at the slot ("I'm ..." vs "you're ...").
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ReferentRole {
    I,
    You,
}

/// Whether the meta-context fixes the referent's gender at this slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum GenderStatus {
    DeterminedM,
    DeterminedF,
    Ambiguous,
}

impl GenderStatus {
    pub fn determined(gender: BinaryGender) -> GenderStatus {
        match gender {
            BinaryGender::M => GenderStatus::DeterminedM,
            BinaryGender::F => GenderStatus::DeterminedF,
        }
    }

    pub fn true_gender(self) -> Option<BinaryGender> {
        match self {
            GenderStatus::DeterminedM => Some(BinaryGender::M),
            GenderStatus::DeterminedF => Some(BinaryGender::F),
            GenderStatus::Ambiguous => None,
        }
    }
}

/// Adverb condition of a Stereo-Adverb instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum AdverbCondition {
    #[default]
    None,
    M,
    F,
}

/// A gender-stereotyped character description: adjective + occupation with
/// matching stereotypes ("pretty nurse", "strong doctor").
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CharacterDescription {
    pub adj_lemma: String,
    pub occ_lemma: String,
    pub stereotype: BinaryGender,
}

impl CharacterDescription {
    pub fn phrase(&self) -> String {
        format!("{} {}", self.adj_lemma, self.occ_lemma)
    }
}

/// One adjective position in a generated passage, with the structural
/// metadata later stages condition on.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AdjectiveSlot {
    pub slot_index: usize,
    pub source_lemma: String,
    pub referent: Referent,
    pub referent_role: ReferentRole,
    pub gender_status: GenderStatus,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub referent_stereotype: Option<BinaryGender>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub other_speaker_gender: Option<BinaryGender>,
    /// True when the referent's first narration mention (its introducing
    /// noun phrase or pronoun outside the quotes) comes after this slot in
    /// the source text. The Stereo-Adverb family's self-referring speaker is
    /// never a lookahead referent.
    pub lookahead: bool,
    /// Indices of earlier slots in this instance with the same referent.
    pub prior_same_referent_slots: Vec<usize>,
    /// Slots sharing a group id carry the same lemma by construction.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub equality_group: Option<u32>,
}

/// One generated source passage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TestInstance {
    pub instance_id: String,
    pub subset_kind: SubsetKind,
    pub source_text: String,
    pub slots: Vec<AdjectiveSlot>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub adverb: Option<AdverbEntry>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub characters: Option<(CharacterDescription, CharacterDescription)>,
    /// Every combinatorial choice that produced this instance; the source
    /// text is regenerable from these plus the vocabulary.
    pub template_variables: BTreeMap<String, String>,
}

impl TestInstance {
    pub fn adverb_condition(&self) -> AdverbCondition {
        match self.template_variables.get("adverbCondition").map(|s| s.as_str()) {
            Some("M") => AdverbCondition::M,
            Some("F") => AdverbCondition::F,
            _ => AdverbCondition::None,
        }
    }

    /// Style-1 chaining flag; None for families without one.
    pub fn chaining(&self) -> Option<bool> {
        self.template_variables.get("chaining").map(|v| v == "1")
    }

    /// Character order variable of the stereo-character families
    /// ("fm" = female-stereotyped description first).
    pub fn character_order(&self) -> Option<&str> {
        self.template_variables.get("order").map(|s| s.as_str())
    }
}

/// A full generated suite plus the inputs that pin it down.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TestSuite {
    pub instances: Vec<TestInstance>,
    pub generation_seed: u64,
    pub vocabulary_digest: String,
}

impl TestSuite {
    /// Digest over the serialized instances; used by the manifest and the
    /// determinism tests.
    pub fn digest(&self) -> String {
        let mut buf = String::new();
        for inst in &self.instances {
            buf.push_str(&serde_json::to_string(inst).expect("instance serializes"));
            buf.push('\n');
        }
        crate::sha256_hex(buf.as_bytes())
    }

    /// Guard for regeneration: errors when the vocabulary the caller holds
    /// does not match the one this suite was generated from.
    pub fn check_vocabulary(&self, v: &Vocabulary) -> Result<(), TemplGenError> {
        let actual = v.digest();
        if actual != self.vocabulary_digest {
            return Err(TemplGenError::VocabularyDigestMismatch {
                expected: self.vocabulary_digest.clone(),
                actual,
            });
        }
        Ok(())
    }
}

/// Sample sizes for each family; defaults are the full-scale values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct TemplateParams {
    /// Adjectives sampled for the Stereo-Adverb family.
    pub adverb_adjective_sample: usize,
    /// Adverbs used per stereotype (M and F each).
    pub adverbs_per_stereotype: usize,
    /// Explicit adverb selection (m, f); defaults to the first lemmas per
    /// stereotype in sorted order.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub adverb_selection: Option<AdverbSelection>,
    /// Adjectives paired with each single-speaker base template.
    pub char_adjectives_per_base: usize,
    /// Adjective tuples per two-way conversation base template.
    pub dialogue_tuples_per_base: usize,
    /// Adjective tuples per structure base template.
    pub structure_tuples_per_base: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdverbSelection {
    pub m: Vec<String>,
    pub f: Vec<String>,
}

impl Default for TemplateParams {
    fn default() -> Self {
        TemplateParams {
            adverb_adjective_sample: 130,
            adverbs_per_stereotype: 3,
            adverb_selection: None,
            char_adjectives_per_base: 4,
            dialogue_tuples_per_base: 5,
            structure_tuples_per_base: 60,
        }
    }
}

#[derive(Debug, Error)]
pub enum TemplGenError {
    #[error("insufficient vocabulary for {what}: need {need}, have {have}")]
    InsufficientVocabulary {
        what: String,
        need: usize,
        have: usize,
    },
    #[error("character pair has mismatched stereotypes: {adj} is {adj_stereo}, {occ} is {occ_stereo}")]
    MismatchedPair {
        adj: String,
        adj_stereo: BinaryGender,
        occ: String,
        occ_stereo: BinaryGender,
    },
    #[error("unknown lemma `{lemma}` ({what}) not present in the vocabulary")]
    UnknownLemma { lemma: String, what: &'static str },
    #[error("vocabulary digest mismatch: suite was generated from {expected}, loaded vocabulary is {actual}")]
    VocabularyDigestMismatch { expected: String, actual: String },
    #[error("duplicate instance id `{0}` in generated suite")]
    DuplicateInstanceId(String),
}

/// Generate the complete suite: all four families at the configured sizes,
/// concatenated and sorted by instance id.
pub fn generate_all(
    v: &Vocabulary,
    params: &TemplateParams,
    seed: u64,
) -> Result<TestSuite, TemplGenError> {
    let adj_sample = sampling::sample_adverb_adjectives(v, params.adverb_adjective_sample, seed)?;
    let (m_advs, f_advs) = sampling::select_adverbs(v, params)?;
    let pairs = build_character_pairs(v, seed)?;

    let mut instances = generate_stereo_adverb(v, &adj_sample, (&m_advs, &f_advs))?;
    instances.extend(generate_stereo_character_single(
        v,
        &pairs,
        params.char_adjectives_per_base,
        seed,
    )?);
    instances.extend(generate_stereo_character_dialogue(
        v,
        &pairs,
        params.dialogue_tuples_per_base,
        seed,
    )?);
    for style in [StructureStyle::ReferentChain, StructureStyle::BothReferenced] {
        for context in [GenderContext::Full, GenderContext::Partial] {
            instances.extend(generate_structure(
                v,
                style,
                context,
                params.structure_tuples_per_base,
                seed,
            )?);
        }
    }

    instances.sort_by(|a, b| a.instance_id.cmp(&b.instance_id));
    for pair in instances.windows(2) {
        if pair[0].instance_id == pair[1].instance_id {
            return Err(TemplGenError::DuplicateInstanceId(pair[0].instance_id.clone()));
        }
    }

    Ok(TestSuite {
        instances,
        generation_seed: seed,
        vocabulary_digest: v.digest(),
    })
}
