//! What-if scenarios: feasibility-tagged raw-score changes applied to a
//! scored baseline, plus single-step intervention ranking.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::doc;
use crate::error::{Error, Result};
use crate::questionnaire::{Annotations, AnswerSheet, ScoredAssessment};
use crate::scoring::{compute_cas, PropertyId, RawScoreVector, WeightConfig};
use crate::taxonomy::Dimension;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Feasibility {
    Highly,
    Moderately,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Policy {
    OnlyHighly,
    UpToModerately,
}

impl Policy {
    pub fn as_str(&self) -> &'static str {
        match self {
            Policy::OnlyHighly => "only_highly",
            Policy::UpToModerately => "up_to_moderately",
        }
    }

    /// Short column tag used in comparison tables.
    pub fn tag(&self) -> &'static str {
        match self {
            Policy::OnlyHighly => "HF",
            Policy::UpToModerately => "MF",
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Display for Feasibility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Feasibility::Highly => "highly",
            Feasibility::Moderately => "moderately",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Modification {
    pub property: PropertyId,
    pub new_raw_score: f64,
    pub feasibility: Feasibility,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub rationale: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dimension: Option<Dimension>,
}

impl Modification {
    pub fn new(property: PropertyId, new_raw_score: f64, feasibility: Feasibility) -> Self {
        Modification {
            property,
            new_raw_score,
            feasibility,
            rationale: String::new(),
            dimension: None,
        }
    }

    fn check_against(&self, raw: &RawScoreVector) -> Result<()> {
        let current = raw
            .get(&self.property)
            .ok_or_else(|| Error::UnknownProperty(self.property.to_string()))?;
        let s = self.new_raw_score;
        if !(s.is_finite() && s >= 0.0 && s <= current.max) {
            return Err(Error::ScoreOutOfRange {
                property: self.property.to_string(),
                score: s,
                max: current.max,
            });
        }
        Ok(())
    }
}

/// At most one modification per (property, feasibility) pair. A property may
/// carry one value per tier; the moderately-feasible one wins when both apply.
fn check_unique(mods: &[Modification]) -> Result<()> {
    let mut seen = BTreeSet::new();
    for (i, m) in mods.iter().enumerate() {
        if !seen.insert((m.property.clone(), m.feasibility)) {
            return Err(Error::invalid(
                format!("modifications[{i}]"),
                format!("second {} modification of `{}`", m.feasibility, m.property),
            ));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub baseline: ScoredAssessment,
    pub modifications: Vec<Modification>,
    pub policy: Policy,
}

impl Scenario {
    pub fn new(
        name: impl Into<String>,
        baseline: ScoredAssessment,
        modifications: Vec<Modification>,
        policy: Policy,
    ) -> Result<Self> {
        check_unique(&modifications)?;
        for m in &modifications {
            m.check_against(&baseline.raw)?;
        }
        Ok(Scenario {
            name: name.into(),
            baseline,
            modifications,
            policy,
        })
    }

    /// The value each affected property takes under the policy.
    pub fn effective_changes(&self) -> BTreeMap<PropertyId, &Modification> {
        let mut out = BTreeMap::new();
        for m in self.modifications.iter().filter(|m| m.feasibility == Feasibility::Highly) {
            out.insert(m.property.clone(), m);
        }
        if self.policy == Policy::UpToModerately {
            for m in self
                .modifications
                .iter()
                .filter(|m| m.feasibility == Feasibility::Moderately)
            {
                out.insert(m.property.clone(), m);
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioRow {
    pub property: PropertyId,
    pub max: f64,
    pub weight: f64,
    pub baseline_score: f64,
    pub new_score: f64,
    pub baseline_contribution: f64,
    pub new_contribution: f64,
    pub changed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioResult {
    pub name: String,
    pub policy: Policy,
    pub rows: Vec<ScenarioRow>,
    pub baseline_total: f64,
    pub new_total: f64,
    pub delta: f64,
    pub config_fingerprint: String,
}

impl ScenarioResult {
    pub fn row(&self, id: &PropertyId) -> Option<&ScenarioRow> {
        self.rows.iter().find(|r| &r.property == id)
    }
}

fn same_config(baseline: &ScoredAssessment, config: &WeightConfig) -> Result<()> {
    if baseline.cas.config_fingerprint != config.fingerprint() {
        return Err(Error::invalid(
            "baseline",
            "baseline was scored under a different weight configuration",
        ));
    }
    Ok(())
}

/// Recomputes the composite score with the scenario's changes. The baseline
/// is recomputed from its raw scores, so stored contributions never leak in.
pub fn apply_scenario(scenario: &Scenario, config: &WeightConfig) -> Result<ScenarioResult> {
    same_config(&scenario.baseline, config)?;
    let base_raw = &scenario.baseline.raw;
    let base = compute_cas(base_raw, config)?;
    let mut raw = base_raw.clone();
    for (id, m) in scenario.effective_changes() {
        m.check_against(base_raw)?;
        let max = base_raw.get(&id).expect("checked").max;
        raw.insert(id, m.new_raw_score, max);
    }
    let new = compute_cas(&raw, config)?;
    let rows = base
        .contributions
        .iter()
        .zip(&new.contributions)
        .map(|(b, n)| ScenarioRow {
            property: b.property.clone(),
            max: b.max,
            weight: b.weight,
            baseline_score: b.score,
            new_score: n.score,
            baseline_contribution: b.value,
            new_contribution: n.value,
            changed: b.score != n.score,
        })
        .collect();
    Ok(ScenarioResult {
        name: scenario.name.clone(),
        policy: scenario.policy,
        rows,
        baseline_total: base.total,
        new_total: new.total,
        delta: new.total - base.total,
        config_fingerprint: new.config_fingerprint,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedIntervention {
    pub modification: Modification,
    pub baseline_score: f64,
    pub new_total: f64,
    pub delta: f64,
}

/// Deltas closer than this are treated as ties.
pub const RANK_QUANTUM: f64 = 1e-12;

fn quantize(delta: f64) -> i64 {
    (delta / RANK_QUANTUM).round() as i64
}

/// Ordering used by [`rank_interventions`]: larger delta first, then highly
/// feasible before moderately, then canonical property order.
pub fn rank_order(a: &RankedIntervention, b: &RankedIntervention) -> Ordering {
    quantize(b.delta)
        .cmp(&quantize(a.delta))
        .then(a.modification.feasibility.cmp(&b.modification.feasibility))
        .then_with(|| a.modification.property.cmp(&b.modification.property))
}

/// Evaluates each candidate alone against the baseline and sorts them.
pub fn rank_interventions(
    baseline: &ScoredAssessment,
    candidates: &[Modification],
    config: &WeightConfig,
) -> Result<Vec<RankedIntervention>> {
    same_config(baseline, config)?;
    let base = compute_cas(&baseline.raw, config)?;
    let mut out = Vec::with_capacity(candidates.len());
    for m in candidates {
        m.check_against(&baseline.raw)?;
        let current = *baseline.raw.get(&m.property).expect("checked");
        let mut raw = baseline.raw.clone();
        raw.insert(m.property.clone(), m.new_raw_score, current.max);
        let new = compute_cas(&raw, config)?;
        out.push(RankedIntervention {
            modification: m.clone(),
            baseline_score: current.score,
            new_total: new.total,
            delta: new.total - base.total,
        });
    }
    out.sort_by(rank_order);
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub system: String,
    /// `s_p / s_p^max` in configuration order.
    pub normalized: Vec<(PropertyId, f64)>,
    pub total: f64,
}

pub fn compare_systems(systems: &[ScoredAssessment]) -> Result<Vec<ComparisonRow>> {
    if let Some(first) = systems.first() {
        if systems
            .iter()
            .any(|s| s.cas.config_fingerprint != first.cas.config_fingerprint)
        {
            return Err(Error::MixedConfigs);
        }
    }
    Ok(systems
        .iter()
        .map(|s| ComparisonRow {
            system: s.label(),
            normalized: s
                .cas
                .contributions
                .iter()
                .map(|c| (c.property.clone(), c.score / c.max))
                .collect(),
            total: s.cas.total,
        })
        .collect())
}

/// Where a scenario document finds its baseline sheet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BaselineRef {
    /// Relative paths resolve against the scenario file's directory.
    Path { path: PathBuf },
    /// Id of a sheet stored in a workspace.
    Id { id: String },
    Sheet { sheet: Box<AnswerSheet> },
}

/// On-disk scenario format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDocument {
    #[serde(default = "doc::current_version")]
    pub schema_version: String,
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub baseline: Option<BaselineRef>,
    pub policy: Policy,
    #[serde(default)]
    pub modifications: Vec<Modification>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub annotations: Option<Annotations>,
}

impl ScenarioDocument {
    pub fn from_json(text: &str) -> Result<Self> {
        let d: ScenarioDocument = doc::parse_document(text)?;
        check_unique(&d.modifications)?;
        Ok(d)
    }

    pub fn baseline_ref(&self) -> Result<&BaselineRef> {
        self.baseline
            .as_ref()
            .ok_or_else(|| Error::invalid("baseline", "scenario has no baseline reference"))
    }

    pub fn published_total(&self) -> Option<f64> {
        self.annotations.as_ref().and_then(|a| a.published_total)
    }

    /// Builds the scenario over an already-scored baseline.
    pub fn scenario(&self, baseline: ScoredAssessment) -> Result<Scenario> {
        Scenario::new(self.name.clone(), baseline, self.modifications.clone(), self.policy)
    }

    /// Scores `sheet` and applies this scenario to it.
    pub fn evaluate(&self, sheet: &AnswerSheet, config: &WeightConfig) -> Result<(ScoredAssessment, ScenarioResult)> {
        let baseline = crate::questionnaire::score_assessment(sheet, config)?;
        let result = apply_scenario(&self.scenario(baseline.clone())?, config)?;
        Ok((baseline, result))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::questionnaire::{Metadata, Provenance};

    fn baseline(scores: [f64; 8]) -> ScoredAssessment {
        let config = WeightConfig::default_config();
        let raw = RawScoreVector::canonical(scores);
        let cas = compute_cas(&raw, config).unwrap();
        ScoredAssessment {
            system: Some("test".into()),
            raw,
            cas,
            explanation_quality_assessed: true,
            metadata: Metadata::default(),
            published_total: None,
            provenance: Provenance {
                schema_version: "1".into(),
                engine_version: "test".into(),
                sheet_id: "x".into(),
                scored_at: None,
            },
        }
    }

    const CASE1: [f64; 8] = [1.0, 1.0, 6.0, 1.0, 1.0, 1.0, 2.0, 25.0];

    fn m(p: PropertyId, s: f64, f: Feasibility) -> Modification {
        Modification::new(p, s, f)
    }

    #[test]
    fn empty_scenario_has_zero_delta() {
        let s = Scenario::new("none", baseline(CASE1), vec![], Policy::UpToModerately).unwrap();
        let r = apply_scenario(&s, WeightConfig::default_config()).unwrap();
        assert_eq!(r.delta, 0.0);
        assert!(r.rows.iter().all(|r| !r.changed));
    }

    #[test]
    fn policy_filters_and_moderately_overrides() {
        use Feasibility::*;
        use PropertyId::*;
        let mods = vec![m(Ease, 5.0, Highly), m(Ease, 6.0, Moderately), m(Auditing, 2.0, Moderately)];
        let cfg = WeightConfig::default_config();
        let hf = Scenario::new("hf", baseline(CASE1), mods.clone(), Policy::OnlyHighly).unwrap();
        let r = apply_scenario(&hf, cfg).unwrap();
        assert_eq!(r.row(&Ease).unwrap().new_score, 5.0);
        assert!(!r.row(&Auditing).unwrap().changed);
        let mf = Scenario::new("mf", baseline(CASE1), mods, Policy::UpToModerately).unwrap();
        let r = apply_scenario(&mf, cfg).unwrap();
        assert_eq!(r.row(&Ease).unwrap().new_score, 6.0);
        assert_eq!(r.row(&Auditing).unwrap().new_score, 2.0);
        // Untouched rows keep bit-identical contributions.
        for row in r.rows.iter().filter(|r| !r.changed) {
            assert_eq!(row.baseline_contribution.to_bits(), row.new_contribution.to_bits());
        }
    }

    #[test]
    fn rejects_bad_modifications() {
        use Feasibility::*;
        let b = baseline(CASE1);
        assert!(Scenario::new("x", b.clone(), vec![m(PropertyId::Ease, 11.0, Highly)], Policy::OnlyHighly).is_err());
        assert!(Scenario::new(
            "x",
            b.clone(),
            vec![m(PropertyId::Custom("fairness".into()), 1.0, Highly)],
            Policy::OnlyHighly
        )
        .is_err());
        assert!(Scenario::new(
            "x",
            b,
            vec![m(PropertyId::Ease, 3.0, Highly), m(PropertyId::Ease, 4.0, Highly)],
            Policy::OnlyHighly
        )
        .is_err());
    }

    #[test]
    fn ranking_examples() {
        use Feasibility::*;
        use PropertyId::*;
        let cfg = WeightConfig::default_config();
        let b = baseline(CASE1);
        let r = rank_interventions(&b, &[m(Traceability, 8.0, Highly), m(Explainability, 2.0, Highly)], cfg).unwrap();
        assert_eq!(r[0].modification.property, Explainability);
        assert!((r[0].delta - 0.15).abs() < 1e-12);
        assert!((r[1].delta - 0.024).abs() < 1e-12);

        let single = rank_interventions(&b, &[m(Ease, 3.0, Highly)], cfg).unwrap();
        assert_eq!(single.len(), 1);

        // Adaptivity and auditing 1 -> 2 both add 0.05.
        let r = rank_interventions(&b, &[m(Auditing, 2.0, Moderately), m(Adaptivity, 2.0, Highly)], cfg).unwrap();
        assert_eq!(r[0].modification.feasibility, Highly);
        let r = rank_interventions(&b, &[m(Auditing, 2.0, Highly), m(Adaptivity, 2.0, Highly)], cfg).unwrap();
        assert_eq!(r[0].modification.property, Adaptivity);
    }

    #[test]
    fn compare_rows_and_mixed_configs() {
        let a = baseline(CASE1);
        let rows = compare_systems(&[a.clone(), a.clone()]).unwrap();
        assert_eq!(rows[0], rows[1]);
        let norms: Vec<f64> = rows[0].normalized.iter().map(|(_, v)| *v).collect();
        assert_eq!(norms, vec![0.5, 0.5, 0.6, 1.0, 0.5, 0.5, 0.2, 0.5]);
        let mut other = a.clone();
        other.cas.config_fingerprint = "different".into();
        assert!(matches!(compare_systems(&[a, other]), Err(Error::MixedConfigs)));
    }

    #[test]
    fn document_baseline_forms() {
        let by_path = r#"{"schema_version":"1","policy":"only_highly","baseline":{"path":"case1.json"}}"#;
        let d = ScenarioDocument::from_json(by_path).unwrap();
        assert!(matches!(d.baseline_ref().unwrap(), BaselineRef::Path { .. }));
        let by_id = r#"{"schema_version":"1","policy":"only_highly","baseline":{"id":"abc"}}"#;
        assert!(matches!(
            ScenarioDocument::from_json(by_id).unwrap().baseline_ref().unwrap(),
            BaselineRef::Id { .. }
        ));
        let none = r#"{"schema_version":"1","policy":"up_to_moderately"}"#;
        let err = ScenarioDocument::from_json(none).unwrap().baseline_ref().unwrap_err();
        assert_eq!(err.field().as_deref(), Some("baseline"));
    }
}
