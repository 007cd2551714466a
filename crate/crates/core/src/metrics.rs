//! Balanced-subset proportions, accuracies and delta effect statistics.
//!
//! Reports follow the analysis scope rule: only M- and F-labeled slots enter
//! a denominator. Neutral, unclassified and missing slots are counted and
//! conserved in `excluded`, as are gendered-stereotype adjectives (excluded
//! from proportion/accuracy reports but kept for regression) and records
//! dropped by balancing, so that `total = used + excluded` always holds.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::extract::{ExtractionMethod, SlotExtraction};
use crate::gendertag::GenderAnnotation;
use crate::templgen::derive_rng;
use crate::templgen::{
    AdjectiveSlot, AdverbCondition, GenderStatus, Referent, ReferentRole, SubsetKind, TestInstance,
};
use crate::vocab::{AdjType, Sentiment, Stereotype, Vocabulary};
use crate::{BinaryGender, GenderLabel, Language};

use rand::seq::SliceRandom;

/// Label of one slot record, including the missing-extraction terminal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RecordLabel {
    M,
    F,
    N,
    #[serde(rename = "UNCLASSIFIED")]
    Unclassified,
    #[serde(rename = "MISSING")]
    Missing,
}

impl RecordLabel {
    pub fn as_binary(self) -> Option<BinaryGender> {
        match self {
            RecordLabel::M => Some(BinaryGender::M),
            RecordLabel::F => Some(BinaryGender::F),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ProAnti {
    Pro,
    Anti,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum StructureSubset {
    OneGender,
    Same,
    Opposite,
}

/// One fully labeled slot: everything the scoring and regression stages
/// need, self-contained so they can run from the annotations file alone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LabeledSlotRecord {
    #[serde(default = "default_schema")]
    pub schema: String,
    pub instance_id: String,
    pub slot_index: usize,
    pub system_id: String,
    pub language: Language,
    pub subset_kind: SubsetKind,
    // adjective traits
    pub source_lemma: String,
    pub adj_stereotype: Stereotype,
    pub sentiment: Sentiment,
    pub adj_type: AdjType,
    // structural slot metadata
    pub referent: Referent,
    pub referent_role: ReferentRole,
    pub gender_status: GenderStatus,
    pub lookahead: bool,
    pub prior_same_referent_slots: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub equality_group: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub chaining: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub character_order: Option<String>,
    // condition keys
    pub adverb_condition: AdverbCondition,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub referent_stereotype: Option<BinaryGender>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub other_speaker_gender: Option<BinaryGender>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub pro_anti: Option<ProAnti>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub structure_subset: Option<StructureSubset>,
    // outcome
    pub label: RecordLabel,
    pub extraction_method: ExtractionMethod,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub extracted_form: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub annotation: Option<GenderAnnotation>,
}

fn default_schema() -> String {
    "annotation/1".to_string()
}

impl LabeledSlotRecord {
    /// Assemble the record for one slot from the pieces the pipeline holds.
    pub fn build(
        instance: &TestInstance,
        slot: &AdjectiveSlot,
        vocab: &Vocabulary,
        system_id: &str,
        language: Language,
        extraction: &SlotExtraction,
        annotation: Option<GenderAnnotation>,
    ) -> Self {
        let adj = vocab
            .adjective(&slot.source_lemma)
            .unwrap_or_else(|| panic!("slot lemma `{}` missing from vocabulary", slot.source_lemma));
        let label = match (&annotation, extraction.method) {
            (_, ExtractionMethod::Missing) | (None, _) => RecordLabel::Missing,
            (Some(a), _) => match a.label {
                GenderLabel::M => RecordLabel::M,
                GenderLabel::F => RecordLabel::F,
                GenderLabel::N => RecordLabel::N,
                GenderLabel::Unclassified => RecordLabel::Unclassified,
            },
        };
        let true_gender = slot.gender_status.true_gender();
        let pro_anti = match (true_gender, slot.referent_stereotype) {
            (Some(truth), Some(stereo)) => Some(if truth == stereo {
                ProAnti::Pro
            } else {
                ProAnti::Anti
            }),
            _ => None,
        };
        let structure_subset = match (instance.subset_kind.is_structure(), true_gender) {
            (true, Some(truth)) => Some(match slot.other_speaker_gender {
                None => StructureSubset::OneGender,
                Some(other) if other == truth => StructureSubset::Same,
                Some(_) => StructureSubset::Opposite,
            }),
            _ => None,
        };
        LabeledSlotRecord {
            schema: default_schema(),
            instance_id: instance.instance_id.clone(),
            slot_index: slot.slot_index,
            system_id: system_id.to_string(),
            language,
            subset_kind: instance.subset_kind,
            source_lemma: slot.source_lemma.clone(),
            adj_stereotype: adj.stereotype,
            sentiment: adj.sentiment,
            adj_type: adj.adj_type,
            referent: slot.referent,
            referent_role: slot.referent_role,
            gender_status: slot.gender_status,
            lookahead: slot.lookahead,
            prior_same_referent_slots: slot.prior_same_referent_slots.clone(),
            equality_group: slot.equality_group,
            chaining: instance.chaining(),
            character_order: instance.character_order().map(str::to_string),
            adverb_condition: instance.adverb_condition(),
            referent_stereotype: slot.referent_stereotype,
            other_speaker_gender: slot.other_speaker_gender,
            pro_anti,
            structure_subset,
            label,
            extraction_method: extraction.method,
            extracted_form: extraction.extracted_form.clone(),
            annotation,
        }
    }

    fn true_gender(&self) -> Option<BinaryGender> {
        self.gender_status.true_gender()
    }
}

/// The five report kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ReportKind {
    Adverb,
    CharAmb,
    CharDet,
    StructAmb,
    StructDet,
}

impl ReportKind {
    pub const ALL: [ReportKind; 5] = [
        ReportKind::Adverb,
        ReportKind::CharAmb,
        ReportKind::CharDet,
        ReportKind::StructAmb,
        ReportKind::StructDet,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ReportKind::Adverb => "adverb",
            ReportKind::CharAmb => "char_amb",
            ReportKind::CharDet => "char_det",
            ReportKind::StructAmb => "struct_amb",
            ReportKind::StructDet => "struct_det",
        }
    }

    pub fn is_accuracy(self) -> bool {
        matches!(self, ReportKind::CharDet | ReportKind::StructDet)
    }

    /// Does this record belong to the kind's underlying subset?
    pub fn selects(self, r: &LabeledSlotRecord) -> bool {
        let det = r.gender_status != GenderStatus::Ambiguous;
        match self {
            ReportKind::Adverb => r.subset_kind == SubsetKind::StereoAdverb,
            ReportKind::CharAmb => {
                matches!(
                    r.subset_kind,
                    SubsetKind::StereoCharSingle | SubsetKind::StereoCharDialogue
                ) && !det
            }
            ReportKind::CharDet => r.subset_kind == SubsetKind::StereoCharSingle && det,
            ReportKind::StructAmb => r.subset_kind.is_structure() && !det,
            ReportKind::StructDet => r.subset_kind.is_structure() && det,
        }
    }

    /// The report's condition key for a record, or None when the record
    /// cannot be conditioned (and thus cannot be used).
    pub fn condition_of(self, r: &LabeledSlotRecord) -> Option<String> {
        match self {
            ReportKind::Adverb => Some(
                match r.adverb_condition {
                    AdverbCondition::None => "NONE",
                    AdverbCondition::M => "M",
                    AdverbCondition::F => "F",
                }
                .to_string(),
            ),
            ReportKind::CharAmb => r.referent_stereotype.map(|g| g.letter().to_string()),
            ReportKind::CharDet => r.pro_anti.map(|p| {
                match p {
                    ProAnti::Pro => "PRO",
                    ProAnti::Anti => "ANTI",
                }
                .to_string()
            }),
            ReportKind::StructAmb => r.other_speaker_gender.map(|g| g.letter().to_string()),
            ReportKind::StructDet => r.structure_subset.map(|s| {
                match s {
                    StructureSubset::OneGender => "ONE_GENDER",
                    StructureSubset::Same => "SAME",
                    StructureSubset::Opposite => "OPPOSITE",
                }
                .to_string()
            }),
        }
    }

    /// The delta formula of the report kind over its computed cells.
    pub fn delta(self, cells: &BTreeMap<String, Cell>) -> Option<f64> {
        let m_prop = |key: &str| match cells.get(key) {
            Some(Cell::Proportion { m, .. }) => Some(*m),
            _ => None,
        };
        let acc = |key: &str| match cells.get(key) {
            Some(Cell::Accuracy { accuracy, .. }) => Some(*accuracy),
            _ => None,
        };
        match self {
            ReportKind::Adverb | ReportKind::CharAmb | ReportKind::StructAmb => {
                Some(m_prop("M")? - m_prop("F")?)
            }
            ReportKind::CharDet => Some(acc("PRO")? - acc("ANTI")?),
            ReportKind::StructDet => Some(acc("SAME")? - acc("OPPOSITE")?),
        }
    }
}

/// Balancing dimensions; the "as applicable" balancing sets are chosen
/// per (report kind, template family) by [`balance_dims`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BalanceDim {
    Condition(ReportKind),
    Sentiment,
    AdjType,
    ReferentRole,
    /// The template's character-order variable (stereo-character families).
    CharacterOrder,
    /// Whether the referent is the first- or second-introduced speaker.
    ReferentPosition,
    Chaining,
}

fn dim_value(r: &LabeledSlotRecord, dim: &BalanceDim) -> String {
    match dim {
        BalanceDim::Condition(kind) => kind.condition_of(r).unwrap_or_else(|| "na".to_string()),
        BalanceDim::Sentiment => format!("{:?}", r.sentiment),
        BalanceDim::AdjType => format!("{:?}", r.adj_type),
        BalanceDim::ReferentRole => format!("{:?}", r.referent_role),
        BalanceDim::CharacterOrder => r.character_order.clone().unwrap_or_else(|| "na".to_string()),
        BalanceDim::ReferentPosition => format!("{:?}", r.referent),
        BalanceDim::Chaining => match r.chaining {
            Some(true) => "chain".to_string(),
            Some(false) => "plain".to_string(),
            None => "na".to_string(),
        },
    }
}

/// Applicable balancing dimensions for one family's records within a report.
///
/// STEREO_CHAR_SINGLE omits the character-order variable: condition and
/// referent role determine it there, so crossing it would only create
/// structurally empty cells.
pub fn balance_dims(kind: ReportKind, family: SubsetKind) -> Vec<BalanceDim> {
    let mut dims = vec![
        BalanceDim::Condition(kind),
        BalanceDim::Sentiment,
        BalanceDim::AdjType,
    ];
    match family {
        SubsetKind::StereoAdverb => {}
        SubsetKind::StereoCharSingle => {
            if kind == ReportKind::CharDet {
                // determined slots are all first-person; order varies
                dims.push(BalanceDim::CharacterOrder);
            } else {
                dims.push(BalanceDim::ReferentRole);
            }
        }
        SubsetKind::StereoCharDialogue => {
            dims.push(BalanceDim::ReferentRole);
            dims.push(BalanceDim::CharacterOrder);
        }
        SubsetKind::StructureStyle1Full | SubsetKind::StructureStyle1Partial => {
            dims.push(BalanceDim::ReferentRole);
            dims.push(BalanceDim::ReferentPosition);
            dims.push(BalanceDim::Chaining);
        }
        SubsetKind::StructureStyle2Full | SubsetKind::StructureStyle2Partial => {
            dims.push(BalanceDim::ReferentRole);
            dims.push(BalanceDim::ReferentPosition);
        }
    }
    dims
}

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("empty balancing cell {cell} ({family} records, {kind} report)")]
    EmptyCell {
        kind: &'static str,
        family: String,
        cell: String,
    },
}

/// Deterministic seeded downsampling so every cell of the cross-product of
/// `dims` holds the minimum cell count. Already-balanced input is returned
/// unchanged; a structurally possible but empty cell is an error.
pub fn balance_subset<'a>(
    records: &[&'a LabeledSlotRecord],
    dims: &[BalanceDim],
    seed: u64,
) -> Result<Vec<&'a LabeledSlotRecord>, MetricsError> {
    if records.is_empty() || dims.is_empty() {
        return Ok(records.to_vec());
    }
    let mut cells: BTreeMap<Vec<String>, Vec<&LabeledSlotRecord>> = BTreeMap::new();
    for r in records {
        let key: Vec<String> = dims.iter().map(|d| dim_value(r, d)).collect();
        cells.entry(key).or_default().push(r);
    }
    // the cross-product of observed per-dimension values must be realized
    let mut observed: Vec<Vec<String>> = vec![Vec::new(); dims.len()];
    for key in cells.keys() {
        for (i, v) in key.iter().enumerate() {
            if !observed[i].contains(v) {
                observed[i].push(v.clone());
            }
        }
    }
    let mut combo = vec![0usize; dims.len()];
    loop {
        let key: Vec<String> = combo
            .iter()
            .enumerate()
            .map(|(i, &j)| observed[i][j].clone())
            .collect();
        if !cells.contains_key(&key) {
            return Err(MetricsError::EmptyCell {
                kind: "balance",
                family: String::new(),
                cell: key.join("/"),
            });
        }
        // advance the mixed-radix counter
        let mut i = dims.len();
        loop {
            if i == 0 {
                break;
            }
            i -= 1;
            combo[i] += 1;
            if combo[i] < observed[i].len() {
                break;
            }
            combo[i] = 0;
        }
        if combo.iter().all(|&c| c == 0) {
            break;
        }
    }

    let min = cells.values().map(|v| v.len()).min().unwrap_or(0);
    if cells.values().all(|v| v.len() == min) {
        return Ok(records.to_vec());
    }
    let mut kept = Vec::with_capacity(min * cells.len());
    for (key, mut members) in cells {
        members.sort_by(|a, b| {
            (a.instance_id.as_str(), a.slot_index).cmp(&(b.instance_id.as_str(), b.slot_index))
        });
        // the stream is keyed on the non-condition dimensions only, so
        // relabeling the conditions cannot change what is retained (delta
        // antisymmetry stays exact under balancing)
        let tag: String = key
            .iter()
            .zip(dims)
            .filter(|(_, d)| !matches!(d, BalanceDim::Condition(_)))
            .map(|(v, _)| v.as_str())
            .collect::<Vec<_>>()
            .join("/");
        let mut rng = derive_rng(seed, &["balance", &tag]);
        members.shuffle(&mut rng);
        kept.extend(members.into_iter().take(min));
    }
    kept.sort_by(|a, b| {
        (a.instance_id.as_str(), a.slot_index).cmp(&(b.instance_id.as_str(), b.slot_index))
    });
    Ok(kept)
}

/// Proportion of masculine and feminine labels over M/F-labeled records.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Proportion { f: f64, m: f64, n: usize },
    Accuracy { accuracy: f64, n: usize },
}

impl Cell {
    pub fn n(&self) -> usize {
        match self {
            Cell::Proportion { n, .. } | Cell::Accuracy { n, .. } => *n,
        }
    }
}

/// `{F, M, n}` over records already filtered to labels in {M, F};
/// None when the denominator is empty.
pub fn proportions(records: &[&LabeledSlotRecord]) -> Option<Cell> {
    let n = records.len();
    if n == 0 {
        return None;
    }
    let m = records
        .iter()
        .filter(|r| r.label == RecordLabel::M)
        .count();
    debug_assert!(records.iter().all(|r| r.label.as_binary().is_some()));
    Some(Cell::Proportion {
        f: (n - m) as f64 / n as f64,
        m: m as f64 / n as f64,
        n,
    })
}

/// Fraction of records whose label equals the referent's true gender;
/// None when empty. Records must be determined and M/F-labeled.
pub fn accuracy(records: &[&LabeledSlotRecord]) -> Option<Cell> {
    let n = records.len();
    if n == 0 {
        return None;
    }
    let correct = records
        .iter()
        .filter(|r| r.label.as_binary() == r.true_gender())
        .count();
    Some(Cell::Accuracy {
        accuracy: correct as f64 / n as f64,
        n,
    })
}

/// Exclusion bookkeeping; `total = used + sum(excluded fields)` on every
/// report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ExcludedCounts {
    pub n: usize,
    pub unclassified: usize,
    pub missing: usize,
    /// Gendered-stereotype adjectives (kept for regression only).
    pub stereotyped: usize,
    /// M/F records dropped by balancing (or lacking a condition).
    pub balance_dropped: usize,
}

impl ExcludedCounts {
    pub fn total(&self) -> usize {
        self.n + self.unclassified + self.missing + self.stereotyped + self.balance_dropped
    }
}

/// Aggregated proportions/accuracies and the delta statistic for one
/// (system, report kind).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EffectReport {
    #[serde(default = "default_report_schema")]
    pub schema: String,
    pub system_id: String,
    pub report_kind: ReportKind,
    pub cells: BTreeMap<String, Cell>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub delta: Option<f64>,
    pub excluded: ExcludedCounts,
    /// All records of the kind's subset that entered the computation.
    pub total_records: usize,
    /// Records inside the balanced denominators (sum of cell n's).
    pub used_records: usize,
}

fn default_report_schema() -> String {
    "report/1".to_string()
}

/// Compute one report over the given records (any subset kinds; the report
/// selects its own). Balancing is applied per template family, then the
/// balanced families are pooled.
pub fn compute_report(
    kind: ReportKind,
    records: &[LabeledSlotRecord],
    seed: u64,
) -> Result<EffectReport, MetricsError> {
    compute_report_detailed(kind, records, seed).map(|(report, _)| report)
}

/// As [`compute_report`], also returning the balanced records behind the
/// cells (used by verification tests).
pub fn compute_report_detailed(
    kind: ReportKind,
    records: &[LabeledSlotRecord],
    seed: u64,
) -> Result<(EffectReport, Vec<&LabeledSlotRecord>), MetricsError> {
    let selected: Vec<&LabeledSlotRecord> = records.iter().filter(|r| kind.selects(r)).collect();
    let system_id = selected
        .first()
        .map(|r| r.system_id.clone())
        .unwrap_or_default();

    let mut excluded = ExcludedCounts::default();
    let mut usable: Vec<&LabeledSlotRecord> = Vec::new();
    for r in &selected {
        if r.adj_stereotype.as_binary().is_some() {
            excluded.stereotyped += 1;
            continue;
        }
        match r.label {
            RecordLabel::N => excluded.n += 1,
            RecordLabel::Unclassified => excluded.unclassified += 1,
            RecordLabel::Missing => excluded.missing += 1,
            RecordLabel::M | RecordLabel::F => {
                if kind.condition_of(r).is_some() {
                    usable.push(r);
                } else {
                    excluded.balance_dropped += 1;
                }
            }
        }
    }

    // balance each family over its applicable dimensions, then pool
    let mut families: Vec<SubsetKind> = usable.iter().map(|r| r.subset_kind).collect();
    families.sort();
    families.dedup();
    let mut balanced: Vec<&LabeledSlotRecord> = Vec::new();
    for family in families {
        let members: Vec<&LabeledSlotRecord> = usable
            .iter()
            .copied()
            .filter(|r| r.subset_kind == family)
            .collect();
        let dims = balance_dims(kind, family);
        let kept =
            balance_subset(&members, &dims, seed).map_err(|e| annotate_family(e, kind, family))?;
        balanced.extend(kept);
    }
    excluded.balance_dropped += usable.len() - balanced.len();

    let mut by_condition: BTreeMap<String, Vec<&LabeledSlotRecord>> = BTreeMap::new();
    for r in &balanced {
        let cond = kind.condition_of(r).expect("usable records carry a condition");
        by_condition.entry(cond).or_default().push(r);
    }
    let mut cells = BTreeMap::new();
    for (cond, members) in by_condition {
        let cell = if kind.is_accuracy() {
            accuracy(&members)
        } else {
            proportions(&members)
        };
        if let Some(cell) = cell {
            cells.insert(cond, cell);
        }
    }
    let delta = kind.delta(&cells);
    let used_records = cells.values().map(Cell::n).sum();
    let report = EffectReport {
        schema: default_report_schema(),
        system_id,
        report_kind: kind,
        cells,
        delta,
        excluded,
        total_records: selected.len(),
        used_records,
    };
    Ok((report, balanced))
}

fn annotate_family(e: MetricsError, kind: ReportKind, family: SubsetKind) -> MetricsError {
    match e {
        MetricsError::EmptyCell { cell, .. } => MetricsError::EmptyCell {
            kind: kind.name(),
            family: format!("{family:?}"),
            cell,
        },
    }
}

/// Render reports of one kind as a TSV table, one row per system, matching
/// the layout of the result tables (3-decimal rounding; full
/// precision lives in the JSON reports).
pub fn render_report_tsv(kind: ReportKind, reports: &[&EffectReport]) -> String {
    let headers: &[&str] = match kind {
        ReportKind::Adverb => &["system", "F", "M", "F_M", "M_M", "F_F", "M_F", "delta_M_MF"],
        ReportKind::CharAmb | ReportKind::StructAmb => {
            &["system", "F_M", "M_M", "F_F", "M_F", "delta_M_MF"]
        }
        ReportKind::CharDet => &["system", "acc_PRO", "acc_ANTI", "delta_PRO_ANTI"],
        ReportKind::StructDet => &[
            "system",
            "acc_ONE_GENDER",
            "acc_SAME",
            "acc_OPPOSITE",
            "delta_SAME_OPP",
        ],
    };
    let mut out = headers.join("\t");
    out.push('\n');
    for report in reports {
        let mut row = vec![report.system_id.clone()];
        let prop = |key: &str, pick_m: bool| -> String {
            match report.cells.get(key) {
                Some(Cell::Proportion { f, m, .. }) => {
                    format!("{:.3}", if pick_m { *m } else { *f })
                }
                _ => "-".to_string(),
            }
        };
        let acc = |key: &str| -> String {
            match report.cells.get(key) {
                Some(Cell::Accuracy { accuracy, .. }) => format!("{accuracy:.3}"),
                _ => "-".to_string(),
            }
        };
        match kind {
            ReportKind::Adverb => {
                row.push(prop("NONE", false));
                row.push(prop("NONE", true));
                row.push(prop("M", false));
                row.push(prop("M", true));
                row.push(prop("F", false));
                row.push(prop("F", true));
            }
            ReportKind::CharAmb | ReportKind::StructAmb => {
                row.push(prop("M", false));
                row.push(prop("M", true));
                row.push(prop("F", false));
                row.push(prop("F", true));
            }
            ReportKind::CharDet => {
                row.push(acc("PRO"));
                row.push(acc("ANTI"));
            }
            ReportKind::StructDet => {
                row.push(acc("ONE_GENDER"));
                row.push(acc("SAME"));
                row.push(acc("OPPOSITE"));
            }
        }
        row.push(
            report
                .delta
                .map(|d| format!("{d:.3}"))
                .unwrap_or_else(|| "-".to_string()),
        );
        out.push_str(&row.join("\t"));
        out.push('\n');
    }
    out
}
