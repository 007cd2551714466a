//! Property tests over randomized inputs: vocabulary round-trips, balancing
//! behaviour, and delta antisymmetry.

mod common;

use std::collections::{BTreeMap, HashSet};

use proptest::prelude::*;

use gendial_core::extract::ExtractionMethod;
use gendial_core::metrics::{
    balance_subset, compute_report, BalanceDim, LabeledSlotRecord, RecordLabel, ReportKind,
};
use gendial_core::templgen::{
    AdverbCondition, GenderStatus, Referent, ReferentRole, SubsetKind,
};
use gendial_core::vocab::{
    load_vocabulary, AdjectiveEntry, AdjType, AdverbEntry, OccupationEntry, Sentiment, Stereotype,
    Vocabulary,
};
use gendial_core::Language;

fn lemma_strategy() -> impl Strategy<Value = String> {
    "[a-zñáéíóú]{2,10}"
}

fn vocabulary_strategy() -> impl Strategy<Value = Vocabulary> {
    let stereotype = prop_oneof![
        Just(Stereotype::M),
        Just(Stereotype::F),
        Just(Stereotype::Neutral)
    ];
    let sentiment = prop_oneof![
        Just(Sentiment::Positive),
        Just(Sentiment::Negative),
        Just(Sentiment::Neutral)
    ];
    let adj_type = prop_oneof![Just(AdjType::Character), Just(AdjType::Appearance)];
    let binary = prop_oneof![
        Just(gendial_core::BinaryGender::M),
        Just(gendial_core::BinaryGender::F)
    ];
    (
        proptest::collection::btree_map(lemma_strategy(), (stereotype, sentiment, adj_type), 1..20),
        proptest::collection::btree_map(lemma_strategy(), binary.clone(), 1..8),
        proptest::collection::btree_map(lemma_strategy(), binary, 1..8),
    )
        .prop_map(|(adjs, advs, occs)| {
            Vocabulary::new(
                adjs.into_iter()
                    .map(|(lemma, (stereotype, sentiment, adj_type))| AdjectiveEntry {
                        lemma,
                        stereotype,
                        sentiment,
                        adj_type,
                    })
                    .collect(),
                advs.into_iter()
                    .map(|(lemma, stereotype)| AdverbEntry { lemma, stereotype })
                    .collect(),
                occs.into_iter()
                    .map(|(lemma, stereotype)| OccupationEntry { lemma, stereotype })
                    .collect(),
            )
        })
}

fn record_strategy() -> impl Strategy<Value = LabeledSlotRecord> {
    let label = prop_oneof![
        Just(RecordLabel::M),
        Just(RecordLabel::F),
        Just(RecordLabel::N),
        Just(RecordLabel::Unclassified),
    ];
    let cond = prop_oneof![
        Just(AdverbCondition::None),
        Just(AdverbCondition::M),
        Just(AdverbCondition::F)
    ];
    let sentiment = prop_oneof![Just(Sentiment::Positive), Just(Sentiment::Negative)];
    let adj_type = prop_oneof![Just(AdjType::Character), Just(AdjType::Appearance)];
    (0u32..1_000_000, label, cond, sentiment, adj_type).prop_map(
        |(idx, label, adverb_condition, sentiment, adj_type)| LabeledSlotRecord {
            schema: "annotation/1".to_string(),
            instance_id: format!("stereo_adverb:adv=none:{idx:06}"),
            slot_index: 0,
            system_id: "sys".to_string(),
            language: Language::Es,
            subset_kind: SubsetKind::StereoAdverb,
            source_lemma: format!("adj{idx}"),
            adj_stereotype: Stereotype::Neutral,
            sentiment,
            adj_type,
            referent: Referent::Speaker1,
            referent_role: ReferentRole::I,
            gender_status: GenderStatus::Ambiguous,
            lookahead: false,
            prior_same_referent_slots: Vec::new(),
            equality_group: None,
            chaining: None,
            character_order: None,
            adverb_condition,
            referent_stereotype: None,
            other_speaker_gender: None,
            pro_anti: None,
            structure_subset: None,
            label,
            extraction_method: ExtractionMethod::DictionaryMatch,
            extracted_form: Some("x".to_string()),
            annotation: None,
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn vocabulary_tsv_round_trip(v in vocabulary_strategy()) {
        let dir = tempfile::tempdir().unwrap();
        let (adj, adv, occ) = v.to_tsv();
        let write = |name: &str, content: &str| {
            let path = dir.path().join(name);
            std::fs::write(&path, content).unwrap();
            path
        };
        let reloaded = load_vocabulary(
            &write("a.tsv", &adj),
            &write("b.tsv", &adv),
            &write("c.tsv", &occ),
        ).unwrap();
        prop_assert_eq!(&v, &reloaded);
        prop_assert_eq!(v.digest(), reloaded.digest());
    }

    #[test]
    fn balancing_equalizes_and_conserves(
        records in proptest::collection::vec(record_strategy(), 1..200),
        seed in 0u64..1000,
    ) {
        // deduplicate ids so record identity is well-defined
        let mut seen = HashSet::new();
        let records: Vec<LabeledSlotRecord> = records
            .into_iter()
            .filter(|r| seen.insert(r.instance_id.clone()))
            .collect();
        let mf: Vec<&LabeledSlotRecord> = records
            .iter()
            .filter(|r| r.label.as_binary().is_some())
            .collect();
        let dims = [BalanceDim::Sentiment, BalanceDim::AdjType];
        match balance_subset(&mf, &dims, seed) {
            Ok(balanced) => {
                let mut cells: BTreeMap<(Sentiment, AdjType), usize> = BTreeMap::new();
                for r in &balanced {
                    *cells.entry((r.sentiment, r.adj_type)).or_default() += 1;
                }
                let counts: Vec<usize> = cells.values().copied().collect();
                prop_assert!(counts.windows(2).all(|w| w[0] == w[1]));
                // idempotent under the same seed
                let again = balance_subset(&balanced, &dims, seed).unwrap();
                prop_assert_eq!(balanced.len(), again.len());
                let a: Vec<_> = balanced.iter().map(|r| &r.instance_id).collect();
                let b: Vec<_> = again.iter().map(|r| &r.instance_id).collect();
                prop_assert_eq!(a, b);
            }
            Err(_) => {
                // an empty cell must actually exist in the observed
                // cross-product
                let mut sentiments = HashSet::new();
                let mut types = HashSet::new();
                for r in &mf {
                    sentiments.insert(r.sentiment);
                    types.insert(r.adj_type);
                }
                let mut missing = false;
                for s in &sentiments {
                    for t in &types {
                        if !mf.iter().any(|r| r.sentiment == *s && r.adj_type == *t) {
                            missing = true;
                        }
                    }
                }
                prop_assert!(missing);
            }
        }
    }

    #[test]
    fn report_conservation_and_antisymmetry(
        records in proptest::collection::vec(record_strategy(), 40..200),
        seed in 0u64..100,
    ) {
        let mut seen = HashSet::new();
        let mut records: Vec<LabeledSlotRecord> = records
            .into_iter()
            .filter(|r| seen.insert(r.instance_id.clone()))
            .collect();
        let Ok(report) = compute_report(ReportKind::Adverb, &records, seed) else {
            return Ok(()); // empty-cell inputs are covered above
        };
        prop_assert_eq!(
            report.total_records,
            report.used_records + report.excluded.total()
        );
        if let Some(delta) = report.delta {
            for r in &mut records {
                r.adverb_condition = match r.adverb_condition {
                    AdverbCondition::M => AdverbCondition::F,
                    AdverbCondition::F => AdverbCondition::M,
                    AdverbCondition::None => AdverbCondition::None,
                };
            }
            if let Ok(swapped) = compute_report(ReportKind::Adverb, &records, seed) {
                if let Some(swapped_delta) = swapped.delta {
                    prop_assert!((delta + swapped_delta).abs() < 1e-12);
                }
            }
        }
    }
}
