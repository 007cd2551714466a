//! The four template families.
//!
//! Text is rendered exactly as the template definitions prescribe, including
//! the comma-inside-quote convention; every passage is a single line so the
//! companion `sources.txt` stays line-aligned with the suite.

use std::collections::BTreeMap;

use crate::vocab::{AdjectiveEntry, Vocabulary};
use crate::BinaryGender;

use super::sampling::{balanced_sample, check_pair, derive_rng};
use super::{
    AdjectiveSlot, CharacterDescription, GenderStatus, Referent, ReferentRole, SubsetKind,
    TemplGenError, TestInstance,
};

/// The two-slot chain style (all adjectives describe one entity) vs the
/// four-slot style where both characters are referenced in equal measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StructureStyle {
    ReferentChain,
    BothReferenced,
}

/// Complete gender context (both characters gendered) vs partial (one
/// character is a first-person speaker of unknown gender).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GenderContext {
    Full,
    Partial,
}

/// The four adjective equality patterns of the four-slot templates, as
/// slot -> tuple-position maps plus the equality groups they induce.
const EQUALITY_PATTERNS: [[usize; 4]; 4] = [
    [0, 1, 2, 3], // (A1, A2, A3, A4)
    [0, 1, 1, 3], // (A1, A2, A2, A4)
    [0, 1, 2, 0], // (A1, A2, A3, A1)
    [0, 1, 1, 0], // (A1, A2, A2, A1)
];

fn equality_groups(pattern: usize) -> [Option<u32>; 4] {
    match pattern {
        0 => [None, None, None, None],
        1 => [None, Some(0), Some(0), None],
        2 => [Some(0), None, None, Some(0)],
        3 => [Some(0), Some(1), Some(1), Some(0)],
        _ => unreachable!("pattern index out of range"),
    }
}

/// Cut a balanced draw of `count * size` adjectives into `count` tuples.
///
/// Tuple `i` takes positions `i, i+count, i+2*count, ...`, so each tuple
/// position is fed by one contiguous (cell-balanced) block of the draw;
/// chunking consecutively would tie tuple positions to trait cells.
fn cut_tuples<'a, 'v>(
    drawn: &'a [&'v AdjectiveEntry],
    size: usize,
    count: usize,
) -> impl Iterator<Item = Vec<&'v AdjectiveEntry>> + 'a {
    debug_assert_eq!(drawn.len(), size * count);
    (0..count).map(move |i| (0..size).map(|s| drawn[i + s * count]).collect())
}

fn pronoun(gender: BinaryGender) -> &'static str {
    match gender {
        BinaryGender::M => "he",
        BinaryGender::F => "she",
    }
}

fn pronoun_cap(gender: BinaryGender) -> &'static str {
    match gender {
        BinaryGender::M => "He",
        BinaryGender::F => "She",
    }
}

fn noun_phrase(gender: BinaryGender) -> &'static str {
    match gender {
        BinaryGender::M => "The man",
        BinaryGender::F => "The woman",
    }
}

/// Stereo-Adverb family: single-slot self-reference, adverb condition
/// none / M-stereotyped / F-stereotyped.
pub fn generate_stereo_adverb(
    v: &Vocabulary,
    adj_sample: &[AdjectiveEntry],
    adverb_selection: (&[String], &[String]),
) -> Result<Vec<TestInstance>, TemplGenError> {
    let (m_advs, f_advs) = adverb_selection;
    if m_advs.is_empty() || f_advs.is_empty() || adj_sample.is_empty() {
        return Err(TemplGenError::InsufficientVocabulary {
            what: "stereo-adverb inputs".to_string(),
            need: 1,
            have: 0,
        });
    }
    let mut conditions: Vec<(String, Option<&str>)> = vec![("none".to_string(), None)];
    for (tag, lemmas) in [("m", m_advs), ("f", f_advs)] {
        for lemma in lemmas {
            let adverb = v.adverb(lemma).ok_or_else(|| TemplGenError::UnknownLemma {
                lemma: lemma.clone(),
                what: "adverb",
            })?;
            let expect = if tag == "m" { BinaryGender::M } else { BinaryGender::F };
            if adverb.stereotype != expect {
                return Err(TemplGenError::InsufficientVocabulary {
                    what: format!("{expect}-stereotyped adverb `{lemma}` has the wrong stereotype"),
                    need: 1,
                    have: 0,
                });
            }
            conditions.push((format!("{tag}={lemma}"), Some(lemma.as_str())));
        }
    }

    let mut out = Vec::with_capacity(adj_sample.len() * conditions.len());
    for (ai, adj) in adj_sample.iter().enumerate() {
        for (cond_key, adverb_lemma) in &conditions {
            let source_text = match adverb_lemma {
                Some(adv) => format!("\"I think I'm {},\" I said {}.", adj.lemma, adv),
                None => format!("\"I think I'm {},\" I said.", adj.lemma),
            };
            let mut vars = BTreeMap::new();
            vars.insert("adjective".to_string(), adj.lemma.clone());
            match adverb_lemma {
                None => {
                    vars.insert("adverbCondition".to_string(), "NONE".to_string());
                }
                Some(l) => {
                    let adverb = v.adverb(l).expect("validated above");
                    vars.insert("adverb".to_string(), l.to_string());
                    vars.insert(
                        "adverbCondition".to_string(),
                        adverb.stereotype.letter().to_string(),
                    );
                }
            }
            out.push(TestInstance {
                instance_id: format!("stereo_adverb:adv={cond_key}:{ai:03}"),
                subset_kind: SubsetKind::StereoAdverb,
                source_text,
                slots: vec![AdjectiveSlot {
                    slot_index: 0,
                    source_lemma: adj.lemma.clone(),
                    referent: Referent::Speaker1,
                    referent_role: ReferentRole::I,
                    gender_status: GenderStatus::Ambiguous,
                    referent_stereotype: None,
                    other_speaker_gender: None,
                    lookahead: false,
                    prior_same_referent_slots: Vec::new(),
                    equality_group: None,
                }],
                adverb: adverb_lemma.and_then(|l| v.adverb(l).cloned()),
                characters: None,
                template_variables: vars,
            });
        }
    }
    Ok(out)
}

/// Single-speaker stereo-character family: one slot, speaker addresses the
/// other character; "I'm" + he/she fixes the referent's gender.
pub fn generate_stereo_character_single(
    v: &Vocabulary,
    pairs: &[(CharacterDescription, CharacterDescription)],
    adj_per_base: usize,
    seed: u64,
) -> Result<Vec<TestInstance>, TemplGenError> {
    let pool: Vec<&AdjectiveEntry> = v.adjectives().iter().collect();
    let mut out = Vec::new();
    for (pi, pair) in pairs.iter().enumerate() {
        check_pair(v, pair)?;
        let (cf, cm) = pair;
        for (order, c1, c2) in [("fm", cf, cm), ("mf", cm, cf)] {
            for ref_variant in ["i", "you"] {
                for pron in ["he", "she", "they"] {
                    let base_key = format!("pair{pi:02}:{order}:ref={ref_variant}:pron={pron}");
                    let mut rng =
                        derive_rng(seed, &["stereo_char_single", &base_key]);
                    let adjectives =
                        balanced_sample(&pool, adj_per_base, &mut rng, "single-speaker adjectives")?;
                    for (ai, adj) in adjectives.iter().enumerate() {
                        let copula = if ref_variant == "i" { "I'm" } else { "you're" };
                        let source_text = format!(
                            "The {} smiled. \"I think {} {},\" {} said to the {}.",
                            c1.phrase(),
                            copula,
                            adj.lemma,
                            pron,
                            c2.phrase(),
                        );
                        let (referent, role) = if ref_variant == "i" {
                            (Referent::Speaker1, ReferentRole::I)
                        } else {
                            (Referent::Speaker2, ReferentRole::You)
                        };
                        let speaker_gender = match pron {
                            "he" => Some(BinaryGender::M),
                            "she" => Some(BinaryGender::F),
                            _ => None,
                        };
                        let gender_status = match (referent, speaker_gender) {
                            (Referent::Speaker1, Some(g)) => GenderStatus::determined(g),
                            _ => GenderStatus::Ambiguous,
                        };
                        let referent_stereotype = Some(match referent {
                            Referent::Speaker1 => c1.stereotype,
                            Referent::Speaker2 => c2.stereotype,
                        });
                        // When the slot describes the listener, the speaker's
                        // pronoun may reveal the other participant's gender.
                        let other_speaker_gender = match referent {
                            Referent::Speaker1 => None,
                            Referent::Speaker2 => speaker_gender,
                        };
                        let mut vars = BTreeMap::new();
                        vars.insert("pair".to_string(), format!("{pi}"));
                        vars.insert("order".to_string(), order.to_string());
                        vars.insert("referent".to_string(), ref_variant.to_string());
                        vars.insert("speakerPronoun".to_string(), pron.to_string());
                        vars.insert("adjective".to_string(), adj.lemma.clone());
                        out.push(TestInstance {
                            instance_id: format!(
                                "stereo_char_single:{base_key}:{ai:02}"
                            ),
                            subset_kind: SubsetKind::StereoCharSingle,
                            source_text,
                            slots: vec![AdjectiveSlot {
                                slot_index: 0,
                                source_lemma: adj.lemma.clone(),
                                referent,
                                referent_role: role,
                                gender_status,
                                referent_stereotype,
                                other_speaker_gender,
                                // the listener is only introduced after the quote
                                lookahead: referent == Referent::Speaker2,
                                prior_same_referent_slots: Vec::new(),
                                equality_group: None,
                            }],
                            adverb: None,
                            characters: Some((c1.clone(), c2.clone())),
                            template_variables: vars,
                        });
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Two-way stereo-character conversations: four ambiguous slots, with the
/// four adjective equality patterns.
pub fn generate_stereo_character_dialogue(
    v: &Vocabulary,
    pairs: &[(CharacterDescription, CharacterDescription)],
    tuples_per_base: usize,
    seed: u64,
) -> Result<Vec<TestInstance>, TemplGenError> {
    let pool: Vec<&AdjectiveEntry> = v.adjectives().iter().collect();
    let mut out = Vec::new();
    for (pi, pair) in pairs.iter().enumerate() {
        check_pair(v, pair)?;
        let (cf, cm) = pair;
        for (order, c1, c2) in [("fm", cf, cm), ("mf", cm, cf)] {
            for (pat_idx, pattern) in EQUALITY_PATTERNS.iter().enumerate() {
                let base_key = format!("pair{pi:02}:{order}:pat{pat_idx}");
                let mut rng = derive_rng(seed, &["stereo_char_dialogue", &base_key]);
                let drawn = balanced_sample(
                    &pool,
                    tuples_per_base * 4,
                    &mut rng,
                    "dialogue adjective tuples",
                )?;
                for (ti, tuple) in cut_tuples(&drawn, 4, tuples_per_base).enumerate() {
                    let lemmas: Vec<&str> =
                        pattern.iter().map(|&p| tuple[p].lemma.as_str()).collect();
                    let source_text = format!(
                        "The {} smiled. \"I think I'm {} and you're {},\" they said. \
                         The {} laughed back. \"No, you're {}, but I'm {},\" they replied.",
                        c1.phrase(),
                        lemmas[0],
                        lemmas[1],
                        c2.phrase(),
                        lemmas[2],
                        lemmas[3],
                    );
                    let groups = equality_groups(pat_idx);
                    let slots = dialogue_slots(&lemmas, &groups, |referent| {
                        Some(match referent {
                            Referent::Speaker1 => c1.stereotype,
                            Referent::Speaker2 => c2.stereotype,
                        })
                    });
                    let mut vars = BTreeMap::new();
                    vars.insert("pair".to_string(), format!("{pi}"));
                    vars.insert("order".to_string(), order.to_string());
                    vars.insert("pattern".to_string(), format!("{pat_idx}"));
                    for (i, lemma) in lemmas.iter().enumerate() {
                        vars.insert(format!("adjective{}", i + 1), lemma.to_string());
                    }
                    out.push(TestInstance {
                        instance_id: format!("stereo_char_dialogue:{base_key}:{ti:02}"),
                        subset_kind: SubsetKind::StereoCharDialogue,
                        source_text,
                        slots,
                        adverb: None,
                        characters: Some((c1.clone(), c2.clone())),
                        template_variables: vars,
                    });
                }
            }
        }
    }
    Ok(out)
}

/// Slot skeleton shared by the four-slot templates: speaker 1 describes
/// self then listener, speaker 2 replies describing speaker 1 then self.
/// All slots ambiguous; gender status is refined by the caller.
fn dialogue_slots(
    lemmas: &[&str],
    groups: &[Option<u32>; 4],
    stereotype_of: impl Fn(Referent) -> Option<BinaryGender>,
) -> Vec<AdjectiveSlot> {
    let layout = [
        (Referent::Speaker1, ReferentRole::I),
        (Referent::Speaker2, ReferentRole::You),
        (Referent::Speaker1, ReferentRole::You),
        (Referent::Speaker2, ReferentRole::I),
    ];
    layout
        .iter()
        .enumerate()
        .map(|(i, &(referent, role))| AdjectiveSlot {
            slot_index: i,
            source_lemma: lemmas[i].to_string(),
            referent,
            referent_role: role,
            gender_status: GenderStatus::Ambiguous,
            referent_stereotype: stereotype_of(referent),
            other_speaker_gender: None,
            // slot 2 of the first quote describes speaker 2, who is only
            // introduced by the second narration sentence
            lookahead: i == 1,
            prior_same_referent_slots: match i {
                2 => vec![0],
                3 => vec![1],
                _ => Vec::new(),
            },
            equality_group: groups[i],
        })
        .collect()
}

/// A structure-template character: a known gender or the first-person
/// speaker of unknown gender.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum StructureChar {
    Known(BinaryGender),
    Unknown,
}

impl StructureChar {
    fn gender(self) -> Option<BinaryGender> {
        match self {
            StructureChar::Known(g) => Some(g),
            StructureChar::Unknown => None,
        }
    }

    fn combo_tag(self) -> &'static str {
        match self {
            StructureChar::Known(BinaryGender::M) => "m",
            StructureChar::Known(BinaryGender::F) => "f",
            StructureChar::Unknown => "u",
        }
    }

    fn intro(self) -> &'static str {
        match self {
            StructureChar::Known(g) => noun_phrase(g),
            StructureChar::Unknown => "I",
        }
    }

    fn open(self) -> &'static str {
        match self {
            StructureChar::Known(g) => pronoun_cap(g),
            StructureChar::Unknown => "I",
        }
    }

    fn tag(self) -> &'static str {
        match self {
            StructureChar::Known(g) => pronoun(g),
            StructureChar::Unknown => "I",
        }
    }
}

fn gender_combos(context: GenderContext) -> Vec<(StructureChar, StructureChar)> {
    use BinaryGender::{F, M};
    use StructureChar::{Known, Unknown};
    match context {
        GenderContext::Full => vec![
            (Known(M), Known(M)),
            (Known(M), Known(F)),
            (Known(F), Known(M)),
            (Known(F), Known(F)),
        ],
        GenderContext::Partial => vec![
            (Known(M), Unknown),
            (Known(F), Unknown),
            (Unknown, Known(M)),
            (Unknown, Known(F)),
        ],
    }
}

/// Structure family: no gender-stereotyped variables, adjectives drawn from
/// the neutral-stereotype pool only.
pub fn generate_structure(
    v: &Vocabulary,
    style: StructureStyle,
    context: GenderContext,
    tuples_per_base: usize,
    seed: u64,
) -> Result<Vec<TestInstance>, TemplGenError> {
    let pool: Vec<&AdjectiveEntry> = v
        .adjectives()
        .iter()
        .filter(|a| a.stereotype.as_binary().is_none())
        .collect();
    let kind = match (style, context) {
        (StructureStyle::ReferentChain, GenderContext::Full) => SubsetKind::StructureStyle1Full,
        (StructureStyle::ReferentChain, GenderContext::Partial) => {
            SubsetKind::StructureStyle1Partial
        }
        (StructureStyle::BothReferenced, GenderContext::Full) => SubsetKind::StructureStyle2Full,
        (StructureStyle::BothReferenced, GenderContext::Partial) => {
            SubsetKind::StructureStyle2Partial
        }
    };
    let mut out = Vec::new();
    for (c1, c2) in gender_combos(context) {
        let combo = format!("{}{}", c1.combo_tag(), c2.combo_tag());
        match style {
            StructureStyle::ReferentChain => {
                for ref_variant in ["i", "you"] {
                    for chaining in [false, true] {
                        let base_key =
                            format!("combo={combo}:ref={ref_variant}:chain={}", u8::from(chaining));
                        let mut rng = derive_rng(seed, &[kind.id_prefix(), &base_key]);
                        let drawn = balanced_sample(
                            &pool,
                            tuples_per_base * 2,
                            &mut rng,
                            "structure adjective tuples (neutral pool)",
                        )?;
                        for (ti, tuple) in cut_tuples(&drawn, 2, tuples_per_base).enumerate() {
                            out.push(style1_instance(
                                kind, &base_key, combo.as_str(), c1, c2, ref_variant, chaining,
                                &tuple, ti,
                            ));
                        }
                    }
                }
            }
            StructureStyle::BothReferenced => {
                for pat_idx in 0..EQUALITY_PATTERNS.len() {
                    let base_key = format!("combo={combo}:pat{pat_idx}");
                    let mut rng = derive_rng(seed, &[kind.id_prefix(), &base_key]);
                    let drawn = balanced_sample(
                        &pool,
                        tuples_per_base * 4,
                        &mut rng,
                        "structure adjective tuples (neutral pool)",
                    )?;
                    for (ti, tuple) in cut_tuples(&drawn, 4, tuples_per_base).enumerate() {
                        out.push(style2_instance(
                            kind, &base_key, combo.as_str(), c1, c2, pat_idx, &tuple, ti,
                        ));
                    }
                }
            }
        }
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn style1_instance(
    kind: SubsetKind,
    base_key: &str,
    combo: &str,
    c1: StructureChar,
    c2: StructureChar,
    ref_variant: &str,
    chaining: bool,
    tuple: &[&AdjectiveEntry],
    tuple_index: usize,
) -> TestInstance {
    let (a1, a2) = (tuple[0].lemma.as_str(), tuple[1].lemma.as_str());
    let first_copula = if ref_variant == "i" { "I'm" } else { "you're" };
    // The reply negates about the same entity: "you..." when speaker 1
    // described themselves, "I..." when speaker 1 described the listener.
    let (neg, affirm) = if ref_variant == "i" {
        ("you're", "you are")
    } else {
        ("I'm", "I am")
    };
    let line1 = format!(
        "{} smiled. \"I think {} {},\" {} said.",
        c1.intro(),
        first_copula,
        a1,
        c1.tag()
    );
    let line2 = if chaining {
        format!(
            "{} laughed back. \"No, {} not {}, but {} {},\" {} replied.",
            c2.open(),
            neg,
            a1,
            affirm,
            a2,
            c2.tag()
        )
    } else {
        format!(
            "{} laughed back. \"No, {} {},\" {} replied.",
            c2.open(),
            affirm,
            a2,
            c2.tag()
        )
    };
    let source_text = format!("{line1} {line2}");

    let (referent, referent_char, other_char) = if ref_variant == "i" {
        (Referent::Speaker1, c1, c2)
    } else {
        (Referent::Speaker2, c2, c1)
    };
    let gender_status = match referent_char.gender() {
        Some(g) => GenderStatus::determined(g),
        None => GenderStatus::Ambiguous,
    };
    let other_speaker_gender = other_char.gender();
    // Roles: slot 0 sits in speaker 1's line, the reply slots in speaker
    // 2's line; the role is I when the line's speaker is the referent.
    let (role0, role_reply) = if ref_variant == "i" {
        (ReferentRole::I, ReferentRole::You)
    } else {
        (ReferentRole::You, ReferentRole::I)
    };
    // The referent's first narration mention: speaker 1 is introduced at the
    // start, speaker 2 only by the second narration sentence, after slot 0.
    let lookahead0 = referent == Referent::Speaker2;

    let mut slots = vec![AdjectiveSlot {
        slot_index: 0,
        source_lemma: a1.to_string(),
        referent,
        referent_role: role0,
        gender_status,
        referent_stereotype: None,
        other_speaker_gender,
        lookahead: lookahead0,
        prior_same_referent_slots: Vec::new(),
        equality_group: chaining.then_some(0),
    }];
    if chaining {
        slots.push(AdjectiveSlot {
            slot_index: 1,
            source_lemma: a1.to_string(),
            referent,
            referent_role: role_reply,
            gender_status,
            referent_stereotype: None,
            other_speaker_gender,
            lookahead: false,
            prior_same_referent_slots: vec![0],
            equality_group: Some(0),
        });
    }
    let last_index = slots.len();
    slots.push(AdjectiveSlot {
        slot_index: last_index,
        source_lemma: a2.to_string(),
        referent,
        referent_role: role_reply,
        gender_status,
        referent_stereotype: None,
        other_speaker_gender,
        lookahead: false,
        prior_same_referent_slots: (0..last_index).collect(),
        equality_group: None,
    });

    let mut vars = BTreeMap::new();
    vars.insert("genderCombo".to_string(), combo.to_string());
    vars.insert("referent".to_string(), ref_variant.to_string());
    vars.insert("chaining".to_string(), u8::from(chaining).to_string());
    vars.insert("adjective1".to_string(), a1.to_string());
    vars.insert("adjective2".to_string(), a2.to_string());
    TestInstance {
        instance_id: format!("{}:{base_key}:{tuple_index:02}", kind.id_prefix()),
        subset_kind: kind,
        source_text,
        slots,
        adverb: None,
        characters: None,
        template_variables: vars,
    }
}

#[allow(clippy::too_many_arguments)]
fn style2_instance(
    kind: SubsetKind,
    base_key: &str,
    combo: &str,
    c1: StructureChar,
    c2: StructureChar,
    pat_idx: usize,
    tuple: &[&AdjectiveEntry],
    tuple_index: usize,
) -> TestInstance {
    let pattern = &EQUALITY_PATTERNS[pat_idx];
    let lemmas: Vec<&str> = pattern.iter().map(|&p| tuple[p].lemma.as_str()).collect();
    let source_text = format!(
        "{} smiled. \"I think I'm {} and you're {},\" {} said. \
         {} laughed back. \"No, you're {}, but I'm {},\" {} replied.",
        c1.intro(),
        lemmas[0],
        lemmas[1],
        c1.tag(),
        c2.open(),
        lemmas[2],
        lemmas[3],
        c2.tag(),
    );
    let groups = equality_groups(pat_idx);
    let mut slots = dialogue_slots(&lemmas, &groups, |_| None);
    for slot in &mut slots {
        let (referent_char, other_char) = match slot.referent {
            Referent::Speaker1 => (c1, c2),
            Referent::Speaker2 => (c2, c1),
        };
        slot.gender_status = match referent_char.gender() {
            Some(g) => GenderStatus::determined(g),
            None => GenderStatus::Ambiguous,
        };
        slot.other_speaker_gender = other_char.gender();
    }

    let mut vars = BTreeMap::new();
    vars.insert("genderCombo".to_string(), combo.to_string());
    vars.insert("pattern".to_string(), format!("{pat_idx}"));
    for (i, lemma) in lemmas.iter().enumerate() {
        vars.insert(format!("adjective{}", i + 1), lemma.to_string());
    }
    TestInstance {
        instance_id: format!("{}:{base_key}:{tuple_index:02}", kind.id_prefix()),
        subset_kind: kind,
        source_text,
        slots,
        adverb: None,
        characters: None,
        template_variables: vars,
    }
}
