//! Design-matrix encoding checks and model-level regression invariants.

mod common;

use gendial_core::extract::ExtractionMethod;
use gendial_core::metrics::{LabeledSlotRecord, RecordLabel};
use gendial_core::regress::{build_design, fit_logistic, run_regression, FitOptions, ModelKind};
use gendial_core::templgen::{
    AdverbCondition, GenderStatus, Referent, ReferentRole, SubsetKind,
};
use gendial_core::vocab::{AdjType, Sentiment, Stereotype};
use gendial_core::{BinaryGender, Language};

fn base_record(kind: SubsetKind, idx: usize) -> LabeledSlotRecord {
    LabeledSlotRecord {
        schema: "annotation/1".to_string(),
        instance_id: format!("{}:base:{idx:03}", kind.id_prefix()),
        slot_index: 0,
        system_id: "sys".to_string(),
        language: Language::Es,
        subset_kind: kind,
        source_lemma: format!("adj{idx}"),
        adj_stereotype: Stereotype::Neutral,
        sentiment: Sentiment::Positive,
        adj_type: AdjType::Character,
        referent: Referent::Speaker1,
        referent_role: ReferentRole::I,
        gender_status: GenderStatus::Ambiguous,
        lookahead: false,
        prior_same_referent_slots: Vec::new(),
        equality_group: None,
        chaining: None,
        character_order: None,
        adverb_condition: AdverbCondition::None,
        referent_stereotype: None,
        other_speaker_gender: None,
        pro_anti: None,
        structure_subset: None,
        label: RecordLabel::M,
        extraction_method: ExtractionMethod::DictionaryMatch,
        extracted_form: Some("x".to_string()),
        annotation: None,
    }
}

#[test]
fn adverb_row_encoding_matches_term_list() {
    // F-stereotyped adverb, negative appearance adjective of neutral
    // stereotype -> (1, 0, 0, 1, 1, 0, 1)
    let mut r = base_record(SubsetKind::StereoAdverb, 0);
    r.adverb_condition = AdverbCondition::F;
    r.sentiment = Sentiment::Negative;
    r.adj_type = AdjType::Appearance;
    let design = build_design(&[r], ModelKind::Adverb).unwrap();
    assert_eq!(
        design.terms,
        vec![
            "Intercept",
            "Adj Stereo(M)",
            "Adj Stereo(F)",
            "Adj Sentiment(neg)",
            "Adj Type(appearance)",
            "Adv Stereo(M)",
            "Adv Stereo(F)",
        ]
    );
    assert_eq!(design.x[0], vec![1.0, 0.0, 0.0, 1.0, 1.0, 0.0, 1.0]);
    // masculine label -> feminine-positive outcome is 0
    assert_eq!(design.y[0], 0.0);
}

#[test]
fn character_reference_category_is_male_stereotype() {
    let mut r = base_record(SubsetKind::StereoCharSingle, 0);
    r.referent_stereotype = Some(BinaryGender::M);
    let design = build_design(&[r.clone()], ModelKind::Character).unwrap();
    assert_eq!(*design.x[0].last().unwrap(), 0.0);
    r.referent_stereotype = Some(BinaryGender::F);
    let design = build_design(&[r], ModelKind::Character).unwrap();
    assert_eq!(*design.x[0].last().unwrap(), 1.0);
}

#[test]
fn neutral_labels_are_excluded_from_rows() {
    let mut r = base_record(SubsetKind::StereoAdverb, 0);
    r.label = RecordLabel::N;
    let design = build_design(&[r], ModelKind::Adverb).unwrap();
    assert!(design.x.is_empty());
}

#[test]
fn structural_dummies_pair_flags_with_known_gender() {
    let mut r = base_record(SubsetKind::StructureStyle1Full, 0);
    r.referent_role = ReferentRole::You;
    r.gender_status = GenderStatus::DeterminedF;
    r.lookahead = true;
    r.other_speaker_gender = Some(BinaryGender::M);
    r.label = RecordLabel::F;
    let design = build_design(&[r.clone()], ModelKind::Structural).unwrap();
    let term = |name: &str| {
        let j = design.terms.iter().position(|t| t == name).unwrap();
        design.x[0][j]
    };
    assert_eq!(term("True(M)"), 0.0);
    assert_eq!(term("You(M)"), 0.0);
    assert_eq!(term("You(F)"), 1.0);
    assert_eq!(term("Lookahead(M)"), 0.0);
    assert_eq!(term("Lookahead(F)"), 1.0);
    assert_eq!(term("Opposite(M)"), 1.0);

    // ambiguous referent: the paired dummies stay at zero even with the
    // flags set
    r.gender_status = GenderStatus::Ambiguous;
    let design = build_design(&[r], ModelKind::Structural).unwrap();
    assert_eq!(term_of(&design, "You(F)"), 0.0);
    assert_eq!(term_of(&design, "Lookahead(F)"), 0.0);
}

fn term_of(design: &gendial_core::regress::Design, name: &str) -> f64 {
    let j = design.terms.iter().position(|t| t == name).unwrap();
    design.x[0][j]
}

#[test]
fn consistency_uses_most_recent_prior_mf_label() {
    // slots 0 and 1 precede slot 2 with the same referent; slot 1 is
    // neutral-labeled, so slot 0's F decides Consistency(F)
    let mut s0 = base_record(SubsetKind::StructureStyle1Full, 0);
    s0.instance_id = "structure_style1_full:base:000".to_string();
    s0.slot_index = 0;
    s0.label = RecordLabel::F;
    let mut s1 = s0.clone();
    s1.slot_index = 1;
    s1.label = RecordLabel::N;
    s1.prior_same_referent_slots = vec![0];
    let mut s2 = s0.clone();
    s2.slot_index = 2;
    s2.label = RecordLabel::M;
    s2.prior_same_referent_slots = vec![0, 1];

    let design = build_design(&[s0, s1, s2], ModelKind::Structural).unwrap();
    // rows: slot 0 (no prior), slot 2 (prior slot 1 is N -> fall back to 0)
    assert_eq!(design.x.len(), 2);
    let j_f = design.terms.iter().position(|t| t == "Consistency(F)").unwrap();
    let j_m = design.terms.iter().position(|t| t == "Consistency(M)").unwrap();
    assert_eq!(design.x[0][j_f], 0.0);
    assert_eq!(design.x[1][j_f], 1.0);
    assert_eq!(design.x[1][j_m], 0.0);
}

#[test]
fn degenerate_column_is_reported_and_retained() {
    // all records share the NONE adverb condition: both adverb dummies are
    // constant zero
    let records: Vec<LabeledSlotRecord> = (0..40)
        .map(|i| {
            let mut r = base_record(SubsetKind::StereoAdverb, i);
            r.label = if i % 3 == 0 { RecordLabel::F } else { RecordLabel::M };
            r.sentiment = if i % 2 == 0 { Sentiment::Positive } else { Sentiment::Negative };
            r.adj_type = if i % 4 < 2 { AdjType::Character } else { AdjType::Appearance };
            r
        })
        .collect();
    let design = build_design(&records, ModelKind::Adverb).unwrap();
    assert!(design
        .warnings
        .iter()
        .any(|w| w.contains("Adv Stereo(M)")));
    assert_eq!(design.x[0].len(), design.terms.len());

    // and the fit aliases them instead of failing
    let result = run_regression(&records, ModelKind::Adverb, &FitOptions::default()).unwrap();
    let aliased = result.coefficient("Adv Stereo(M)").unwrap();
    assert_eq!(aliased.estimate, 0.0);
    assert_eq!(aliased.p_value, 1.0);
    assert!(result.warnings.iter().any(|w| w.contains("aliased")));
    assert!(result.converged);
}

#[test]
fn dropping_a_column_never_increases_log_likelihood() {
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(3);
    let n = 800;
    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let row = vec![
            1.0,
            rng.random::<f64>() * 2.0 - 1.0,
            rng.random::<f64>() * 2.0 - 1.0,
            f64::from(rng.random::<f64>() < 0.5),
        ];
        let eta = -0.3 + 1.2 * row[1] - 0.7 * row[2] + 0.4 * row[3];
        y.push(f64::from(rng.random::<f64>() < 1.0 / (1.0 + (-eta).exp())));
        x.push(row);
    }
    let terms: Vec<String> = (0..4).map(|j| format!("b{j}")).collect();
    let full = fit_logistic(&x, &y, &terms, &FitOptions::default()).unwrap();
    for drop_col in 1..4 {
        let reduced_x: Vec<Vec<f64>> = x
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(j, _)| *j != drop_col)
                    .map(|(_, v)| *v)
                    .collect()
            })
            .collect();
        let reduced_terms: Vec<String> = terms
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != drop_col)
            .map(|(_, t)| t.clone())
            .collect();
        let reduced = fit_logistic(&reduced_x, &y, &reduced_terms, &FitOptions::default()).unwrap();
        assert!(
            reduced.log_likelihood <= full.log_likelihood + 1e-9,
            "dropping b{drop_col} raised the log-likelihood"
        );
    }
}

#[test]
fn sign_recovery_for_character_stereotype_effect() {
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(9);
    // noisy but strongly positive feminine-description effect
    let records: Vec<LabeledSlotRecord> = (0..2000)
        .map(|i| {
            let mut r = base_record(SubsetKind::StereoCharSingle, i);
            let stereo_f = i % 2 == 0;
            r.referent_stereotype = Some(if stereo_f { BinaryGender::F } else { BinaryGender::M });
            r.sentiment = [Sentiment::Positive, Sentiment::Negative, Sentiment::Neutral][i % 3];
            r.adj_type = if (i / 3) % 2 == 0 { AdjType::Character } else { AdjType::Appearance };
            let p_f = if stereo_f { 0.8 } else { 0.2 };
            r.label = if rng.random::<f64>() < p_f { RecordLabel::F } else { RecordLabel::M };
            r
        })
        .collect();
    let result = run_regression(&records, ModelKind::Character, &FitOptions::default()).unwrap();
    let effect = result.coefficient("Character Stereo(F)").unwrap();
    assert!(
        effect.estimate > 0.0 && effect.p_value < 0.001,
        "expected a strong positive effect, got {effect:?}"
    );
    assert!(!result.separation_warning);
}

#[test]
fn mock_run_regressions_have_expected_directions() {
    // the stereotype-following mock produces a positive, significant
    // character effect through the full pipeline
    let dir = tempfile::tempdir().unwrap();
    let v = common::synthetic_vocabulary();
    let (config, systems) = common::setup_mock_run(
        dir.path(),
        &v,
        &gendial_core::templgen::TemplateParams::default(),
        21,
        &[("mock-stereo", common::MockPolicy::StereotypeFollowing)],
    );
    gendial_core::pipeline::run_pipeline(&config, &systems).unwrap();
    let records = gendial_core::pipeline::read_annotations(
        &config.output_dir.join("annotations.mock-stereo.jsonl"),
    )
    .unwrap();
    let result = run_regression(&records, ModelKind::Character, &FitOptions::default()).unwrap();
    let effect = result.coefficient("Character Stereo(F)").unwrap();
    assert!(effect.estimate > 0.0);
    // deterministic labeling separates perfectly; the divergence must be
    // flagged, not suppressed
    assert!(result.separation_warning);
}
