//! Self-assessment questionnaire: rubric catalog, answer sheets and scorers.
//!
//! The rubric texts and point values live in `data/rubrics.json` so the
//! service can hand them to form renderers unchanged.

use std::sync::OnceLock;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::doc;
use crate::error::{Error, Result};
use crate::scoring::{compute_cas, CasResult, PropertyId, RawScoreVector, WeightConfig};
use crate::taxonomy::Reliance;

pub const TRACEABILITY_SUBCRITERIA: usize = 5;
pub const EASE_ITEMS: usize = 10;
pub const SCS_ITEMS: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RubricOption {
    pub label: String,
    pub points: u32,
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Subcriterion {
    pub name: String,
    /// Descriptions for 0, 1 and 2 points.
    pub levels: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChecklistItem {
    pub label: String,
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RubricKind {
    SingleChoice {
        options: Vec<RubricOption>,
    },
    SubcriteriaSum {
        subcriteria: Vec<Subcriterion>,
    },
    ChecklistSum {
        items: Vec<ChecklistItem>,
    },
    LikertBattery {
        scale_min: u32,
        scale_max: u32,
        statements: Vec<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyRubric {
    pub id: PropertyId,
    pub title: String,
    pub question: String,
    #[serde(flatten)]
    pub kind: RubricKind,
    pub max_points: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelLabel {
    pub level: u32,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RubricCatalog {
    #[serde(default = "doc::current_version")]
    pub schema_version: String,
    pub properties: Vec<PropertyRubric>,
    pub impact_severity: Vec<LevelLabel>,
    pub autonomy: Vec<LevelLabel>,
}

const RUBRICS_JSON: &str = include_str!("../data/rubrics.json");

impl RubricCatalog {
    pub fn builtin() -> &'static RubricCatalog {
        static CATALOG: OnceLock<RubricCatalog> = OnceLock::new();
        CATALOG.get_or_init(|| {
            let catalog: RubricCatalog =
                doc::parse_document(RUBRICS_JSON).expect("embedded rubric catalog parses");
            catalog.check().expect("embedded rubric catalog is consistent");
            catalog
        })
    }

    pub fn rubric(&self, id: &PropertyId) -> Option<&PropertyRubric> {
        self.properties.iter().find(|r| &r.id == id)
    }

    /// Verifies the structural invariants of every rubric.
    pub fn check(&self) -> Result<()> {
        for id in PropertyId::CANONICAL.iter() {
            if self.rubric(id).is_none() {
                return Err(Error::invalid(id.as_str(), "rubric missing from catalog"));
            }
        }
        for r in &self.properties {
            let field = r.id.as_str();
            match &r.kind {
                RubricKind::SingleChoice { options } => {
                    let top = options.iter().map(|o| o.points).max().unwrap_or(0);
                    if top != r.max_points {
                        return Err(Error::invalid(field, "max_points differs from best option"));
                    }
                    let mut labels: Vec<&str> = options.iter().map(|o| o.label.as_str()).collect();
                    labels.sort_unstable();
                    if labels.windows(2).any(|w| w[0] == w[1]) {
                        return Err(Error::invalid(field, "duplicate option label"));
                    }
                }
                RubricKind::SubcriteriaSum { subcriteria } => {
                    if subcriteria.len() != TRACEABILITY_SUBCRITERIA
                        || subcriteria.iter().any(|s| s.levels.len() != 3)
                        || r.max_points != 2 * TRACEABILITY_SUBCRITERIA as u32
                    {
                        return Err(Error::invalid(field, "expected five 0/1/2 subcriteria out of 10"));
                    }
                }
                RubricKind::ChecklistSum { items } => {
                    if items.len() != EASE_ITEMS || r.max_points != EASE_ITEMS as u32 {
                        return Err(Error::invalid(field, "expected ten binary items out of 10"));
                    }
                }
                RubricKind::LikertBattery {
                    scale_min,
                    scale_max,
                    statements,
                } => {
                    if statements.len() != SCS_ITEMS
                        || *scale_min != 1
                        || *scale_max != 5
                        || r.max_points != SCS_ITEMS as u32 * scale_max
                    {
                        return Err(Error::invalid(field, "expected ten 1-5 statements out of 50"));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Points for a single-choice rubric answer.
pub fn score_single_choice(rubric: &PropertyRubric, chosen: &str) -> Result<u32> {
    let RubricKind::SingleChoice { options } = &rubric.kind else {
        return Err(Error::invalid(rubric.id.as_str(), "rubric is not single-choice"));
    };
    options
        .iter()
        .find(|o| o.label == chosen)
        .map(|o| o.points)
        .ok_or_else(|| Error::UnknownOption {
            property: rubric.id.to_string(),
            label: chosen.to_string(),
        })
}

/// Sum of the five traceability subcriterion levels, each 0, 1 or 2.
pub fn score_traceability(levels: &[i64]) -> Result<u32> {
    let property = PropertyId::Traceability.to_string();
    if levels.len() != TRACEABILITY_SUBCRITERIA {
        return Err(Error::Arity {
            property,
            expected: TRACEABILITY_SUBCRITERIA,
            found: levels.len(),
        });
    }
    let mut total = 0;
    for (index, &value) in levels.iter().enumerate() {
        if !(0..=2).contains(&value) {
            return Err(Error::ValueOutOfRange {
                property,
                index,
                value,
                allowed: "{0, 1, 2}",
            });
        }
        total += value as u32;
    }
    Ok(total)
}

/// Number of satisfied ease-of-contestation items.
pub fn score_ease(checks: &[bool]) -> Result<u32> {
    if checks.len() != EASE_ITEMS {
        return Err(Error::Arity {
            property: PropertyId::Ease.to_string(),
            expected: EASE_ITEMS,
            found: checks.len(),
        });
    }
    Ok(checks.iter().filter(|c| **c).count() as u32)
}

/// System Causability Scale total: mean rating per statement across raters,
/// summed over the ten statements. Lies in `[10, 50]`.
pub fn score_scs(ratings: &[Vec<i64>]) -> Result<f64> {
    let property = PropertyId::ExplanationQuality.to_string();
    if ratings.is_empty() {
        return Err(Error::EmptyRatings { property });
    }
    let mut item_sums = [0i64; SCS_ITEMS];
    for (row_index, row) in ratings.iter().enumerate() {
        if row.len() != SCS_ITEMS {
            return Err(Error::Arity {
                property,
                expected: SCS_ITEMS,
                found: row.len(),
            });
        }
        for (item, &value) in row.iter().enumerate() {
            if !(1..=5).contains(&value) {
                return Err(Error::ValueOutOfRange {
                    property,
                    index: row_index * SCS_ITEMS + item,
                    value,
                    allowed: "1..=5",
                });
            }
            item_sums[item] += value;
        }
    }
    // Integer item sums make the result independent of rater order.
    let raters = ratings.len() as f64;
    Ok(item_sums.iter().map(|s| *s as f64 / raters).sum())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChoiceAnswer {
    pub choice: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceabilityAnswer {
    /// Canonical subcriterion order: granularity, accessibility, retention,
    /// transparency, error tracking.
    pub levels: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EaseAnswer {
    /// Canonical item order as listed in the rubric catalog.
    pub checks: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QualityAnswer {
    #[serde(default = "yes")]
    pub assessed: bool,
    /// One ten-element row per rater.
    #[serde(default)]
    pub ratings: Vec<Vec<i64>>,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Opacity {
    Open,
    Partial,
    Proprietary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Latency {
    Measured { value: f64, unit: String },
    Text(String),
}

/// Qualitative context factors. They never enter any score.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContextFactors {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub latency: Option<Latency>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub opacity: Option<Opacity>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub capability_disparity: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adaptivity_constraint: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Metadata {
    /// 0 minimal, 1 transparency, 2 high, 3 unacceptable risk.
    pub impact_severity: i64,
    /// 0 (no autonomy) to 10 (absolute autonomy).
    pub autonomy_level: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reliance: Option<Reliance>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub context: Option<ContextFactors>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Annotations {
    /// A total printed by an external source, kept for discrepancy reporting.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub published_total: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnswerSheet {
    #[serde(default = "doc::current_version")]
    pub schema_version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system: Option<String>,
    pub explainability: Option<ChoiceAnswer>,
    pub openness: Option<ChoiceAnswer>,
    pub traceability: Option<TraceabilityAnswer>,
    pub safeguards: Option<ChoiceAnswer>,
    pub adaptivity: Option<ChoiceAnswer>,
    pub auditing: Option<ChoiceAnswer>,
    pub ease: Option<EaseAnswer>,
    pub explanation_quality: Option<QualityAnswer>,
    pub metadata: Metadata,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub annotations: Option<Annotations>,
}

impl AnswerSheet {
    pub fn from_json(text: &str) -> Result<Self> {
        doc::parse_document(text)
    }

    /// Lowest-scoring complete sheet, used as the blank template.
    pub fn template() -> Self {
        let catalog = RubricCatalog::builtin();
        let first = |id: PropertyId| {
            let rubric = catalog.rubric(&id).expect("canonical rubric");
            let RubricKind::SingleChoice { options } = &rubric.kind else {
                unreachable!("single-choice rubric")
            };
            let lowest = options.iter().min_by_key(|o| o.points).expect("options");
            Some(ChoiceAnswer {
                choice: lowest.label.clone(),
            })
        };
        AnswerSheet {
            schema_version: doc::current_version(),
            system: Some(String::new()),
            explainability: first(PropertyId::Explainability),
            openness: first(PropertyId::Openness),
            traceability: Some(TraceabilityAnswer {
                levels: vec![0; TRACEABILITY_SUBCRITERIA],
            }),
            safeguards: first(PropertyId::Safeguards),
            adaptivity: first(PropertyId::Adaptivity),
            auditing: first(PropertyId::Auditing),
            ease: Some(EaseAnswer {
                checks: vec![false; EASE_ITEMS],
            }),
            explanation_quality: Some(QualityAnswer {
                assessed: false,
                ratings: Vec::new(),
            }),
            metadata: Metadata::default(),
            annotations: None,
        }
    }

    /// Content hash of the canonicalized sheet.
    pub fn content_id(&self) -> String {
        let value = serde_json::to_value(self).expect("sheet serializes");
        doc::sha256_hex(doc::canonical_json(&value).as_bytes())[..32].to_string()
    }

    fn choice(&self, id: &PropertyId) -> Option<&ChoiceAnswer> {
        match id {
            PropertyId::Explainability => self.explainability.as_ref(),
            PropertyId::Openness => self.openness.as_ref(),
            PropertyId::Safeguards => self.safeguards.as_ref(),
            PropertyId::Adaptivity => self.adaptivity.as_ref(),
            PropertyId::Auditing => self.auditing.as_ref(),
            _ => None,
        }
    }

    /// Raw score of one canonical property.
    pub fn property_points(&self, id: &PropertyId) -> Result<f64> {
        let catalog = RubricCatalog::builtin();
        let missing = || Error::MissingBlock(id.to_string());
        match id {
            PropertyId::Traceability => {
                let a = self.traceability.as_ref().ok_or_else(missing)?;
                Ok(score_traceability(&a.levels)? as f64)
            }
            PropertyId::Ease => {
                let a = self.ease.as_ref().ok_or_else(missing)?;
                Ok(score_ease(&a.checks)? as f64)
            }
            PropertyId::ExplanationQuality => {
                let a = self.explanation_quality.as_ref().ok_or_else(missing)?;
                if a.assessed {
                    score_scs(&a.ratings)
                } else {
                    Ok(0.0)
                }
            }
            PropertyId::Custom(_) => Err(Error::UnknownProperty(id.to_string())),
            _ => {
                let a = self.choice(id).ok_or_else(missing)?;
                let rubric = catalog.rubric(id).ok_or_else(missing)?;
                Ok(score_single_choice(rubric, &a.choice)? as f64)
            }
        }
    }

    pub fn quality_assessed(&self) -> bool {
        self.explanation_quality
            .as_ref()
            .map(|q| q.assessed)
            .unwrap_or(false)
    }

    /// Every problem with the sheet, in canonical property order followed by metadata.
    pub fn validate(&self) -> Vec<Error> {
        let mut issues = Vec::new();
        if self.schema_version != doc::SCHEMA_VERSION {
            issues.push(Error::SchemaVersion {
                found: self.schema_version.clone(),
                expected: doc::SCHEMA_VERSION,
                hint: "set \"schema_version\": \"1\"".into(),
            });
        }
        for id in PropertyId::CANONICAL.iter() {
            if let Err(e) = self.property_points(id) {
                issues.push(e);
            }
        }
        if !(0..=3).contains(&self.metadata.impact_severity) {
            issues.push(Error::invalid(
                "metadata.impact_severity",
                format!("{} is outside 0..=3", self.metadata.impact_severity),
            ));
        }
        if !(0..=10).contains(&self.metadata.autonomy_level) {
            issues.push(Error::invalid(
                "metadata.autonomy_level",
                format!("{} is outside 0..=10", self.metadata.autonomy_level),
            ));
        }
        issues
    }

    pub fn raw_scores(&self) -> Result<RawScoreVector> {
        let catalog = RubricCatalog::builtin();
        let mut raw = RawScoreVector::new();
        for id in PropertyId::CANONICAL.iter() {
            let points = self.property_points(id)?;
            let max = catalog.rubric(id).expect("canonical rubric").max_points as f64;
            raw.insert(id.clone(), points, max);
        }
        Ok(raw)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub schema_version: String,
    pub engine_version: String,
    pub sheet_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scored_at: Option<DateTime<Utc>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredAssessment {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system: Option<String>,
    pub raw: RawScoreVector,
    pub cas: CasResult,
    pub explanation_quality_assessed: bool,
    pub metadata: Metadata,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub published_total: Option<f64>,
    pub provenance: Provenance,
}

impl ScoredAssessment {
    pub fn label(&self) -> String {
        self.system
            .clone()
            .filter(|s| !s.is_empty())
            .unwrap_or_else(|| self.provenance.sheet_id.clone())
    }

    pub fn stamped(mut self, at: DateTime<Utc>) -> Self {
        self.provenance.scored_at = Some(at);
        self
    }
}

/// Scores every property of a sheet and computes its composite score.
/// Metadata is carried through untouched.
pub fn score_assessment(sheet: &AnswerSheet, config: &WeightConfig) -> Result<ScoredAssessment> {
    if let Some(first) = sheet.validate().into_iter().next() {
        return Err(first);
    }
    let raw = sheet.raw_scores()?;
    let cas = compute_cas(&raw, config)?;
    Ok(ScoredAssessment {
        system: sheet.system.clone(),
        raw,
        cas,
        explanation_quality_assessed: sheet.quality_assessed(),
        metadata: sheet.metadata.clone(),
        published_total: sheet.annotations.as_ref().and_then(|a| a.published_total),
        provenance: Provenance {
            schema_version: doc::SCHEMA_VERSION.to_string(),
            engine_version: env!("CARGO_PKG_VERSION").to_string(),
            sheet_id: sheet.content_id(),
            scored_at: None,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rubric(id: PropertyId) -> &'static PropertyRubric {
        RubricCatalog::builtin().rubric(&id).unwrap()
    }

    #[test]
    fn catalog_invariants() {
        let c = RubricCatalog::builtin();
        c.check().unwrap();
        let maxima: Vec<u32> = PropertyId::CANONICAL
            .iter()
            .map(|p| c.rubric(p).unwrap().max_points)
            .collect();
        assert_eq!(maxima, vec![2, 2, 10, 1, 2, 2, 10, 50]);
        assert_eq!(c.impact_severity.len(), 4);
        assert_eq!(c.autonomy.len(), 11);
    }

    #[test]
    fn single_choice_examples() {
        assert_eq!(
            score_single_choice(rubric(PropertyId::Explainability), "Post-Hoc Explanations").unwrap(),
            1
        );
        assert_eq!(
            score_single_choice(rubric(PropertyId::Explainability), "Approximated Explanations").unwrap(),
            1
        );
        assert_eq!(score_single_choice(rubric(PropertyId::Openness), "No Contestation").unwrap(), 0);
        assert_eq!(
            score_single_choice(rubric(PropertyId::Auditing), "Independent External Audit").unwrap(),
            2
        );
        let err = score_single_choice(rubric(PropertyId::Auditing), "Self Audit").unwrap_err();
        assert!(matches!(err, Error::UnknownOption { .. }));
        assert!(score_single_choice(rubric(PropertyId::Ease), "x").is_err());
    }

    /// Oracle: enumerate all 3^5 level tuples and count those summing to 6.
    #[test]
    fn traceability_matches_enumeration() {
        let mut sixes = 0;
        for code in 0..243i64 {
            let mut c = code;
            let levels: Vec<i64> = (0..5)
                .map(|_| {
                    let l = c % 3;
                    c /= 3;
                    l
                })
                .collect();
            let expected: i64 = levels.iter().sum();
            assert_eq!(score_traceability(&levels).unwrap() as i64, expected);
            if expected == 6 {
                sixes += 1;
            }
        }
        assert_eq!(sixes, 45);
        assert_eq!(score_traceability(&[2, 1, 2, 1, 0]).unwrap(), 6);
        assert_eq!(score_traceability(&[0; 5]).unwrap(), 0);
        assert_eq!(score_traceability(&[2; 5]).unwrap(), 10);
    }

    #[test]
    fn traceability_rejects_bad_input() {
        assert!(matches!(score_traceability(&[1, 1, 1, 1]), Err(Error::Arity { .. })));
        assert!(matches!(
            score_traceability(&[1, 1, 3, 1, 1]),
            Err(Error::ValueOutOfRange { index: 2, .. })
        ));
        assert!(score_traceability(&[1, -1, 0, 0, 0]).is_err());
    }

    #[test]
    fn ease_examples() {
        let mut checks = [false; 10];
        checks[0] = true;
        checks[1] = true;
        assert_eq!(score_ease(&checks).unwrap(), 2);
        assert_eq!(score_ease(&[false; 10]).unwrap(), 0);
        assert_eq!(score_ease(&[true; 10]).unwrap(), 10);
        assert!(score_ease(&[true; 9]).is_err());
    }

    #[test]
    fn scs_examples() {
        assert_eq!(score_scs(&[vec![5; 10]]).unwrap(), 50.0);
        assert_eq!(score_scs(&[vec![3; 10], vec![4; 10]]).unwrap(), 35.0);
        assert_eq!(score_scs(&[vec![1; 10]]).unwrap(), 10.0);
        assert!(matches!(score_scs(&[]), Err(Error::EmptyRatings { .. })));
        assert!(score_scs(&[vec![6; 10]]).is_err());
        assert!(score_scs(&[vec![0; 10]]).is_err());
        assert!(score_scs(&[vec![3; 9]]).is_err());
    }

    #[test]
    fn template_scores_zero() {
        let sheet = AnswerSheet::template();
        let scored = score_assessment(&sheet, &WeightConfig::default()).unwrap();
        assert_eq!(scored.cas.total, 0.0);
        assert!(!scored.explanation_quality_assessed);
    }

    #[test]
    fn missing_block_is_named() {
        let mut sheet = AnswerSheet::template();
        sheet.traceability = None;
        let err = score_assessment(&sheet, &WeightConfig::default()).unwrap_err();
        assert!(err.to_string().contains("traceability"), "{err}");
        assert_eq!(err.field().as_deref(), Some("traceability"));
    }

    #[test]
    fn metadata_ranges_are_checked() {
        let mut sheet = AnswerSheet::template();
        sheet.metadata.impact_severity = 4;
        sheet.metadata.autonomy_level = 11;
        let issues = sheet.validate();
        assert_eq!(issues.len(), 2);
    }

    #[test]
    fn assessed_quality_without_ratings_is_an_error() {
        let mut sheet = AnswerSheet::template();
        sheet.explanation_quality = Some(QualityAnswer {
            assessed: true,
            ratings: vec![],
        });
        assert!(matches!(
            score_assessment(&sheet, &WeightConfig::default()),
            Err(Error::EmptyRatings { .. })
        ));
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let mut v = serde_json::to_value(AnswerSheet::template()).unwrap();
        v["traceabilty"] = serde_json::json!({"levels": [0, 0, 0, 0, 0]});
        let err = AnswerSheet::from_json(&v.to_string()).unwrap_err();
        assert!(err.to_string().contains("traceabilty"), "{err}");
    }

    #[test]
    fn content_id_is_stable() {
        let a = AnswerSheet::template();
        let b = AnswerSheet::from_json(&serde_json::to_string_pretty(&a).unwrap()).unwrap();
        assert_eq!(a.content_id(), b.content_id());
        assert_eq!(a.content_id().len(), 32);
    }
}
