//! Report rendering: markdown, JSON and CSV views of a scored assessment with
//! optional scenario columns, taxonomy placement and ledger evaluation.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::doc;
use crate::error::{Error, Result};
use crate::formal::LedgerEvaluation;
use crate::questionnaire::{RubricCatalog, ScoredAssessment};
use crate::scoring::{round3, PropertyId};
use crate::taxonomy::{CellFlag, Classification, Cluster, Dimension, Level, LevelSource, Reliance, Taxonomy};
use crate::whatif::{ComparisonRow, Policy, ScenarioResult};

/// Published and recomputed totals may differ by this much before a note is added.
pub const DISCREPANCY_TOLERANCE: f64 = 0.002;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Markdown,
    Json,
    Csv,
}

impl FromStr for ReportFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            _ => Err(Error::UnsupportedFormat(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSection {
    pub result: ScenarioResult,
    pub published_total: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RequirementGroup {
    pub cluster: Cluster,
    pub cluster_name: String,
    pub dimension: Dimension,
    /// (id, name) pairs.
    pub criteria: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaxonomySection {
    pub classification: Classification,
    pub groups: Vec<RequirementGroup>,
}

impl TaxonomySection {
    pub fn new(classification: Classification, taxonomy: &Taxonomy) -> Self {
        let mut groups: Vec<RequirementGroup> = Vec::new();
        for id in &classification.requirements {
            let Some(c) = taxonomy.criterion(id) else { continue };
            for d in &c.dimensions {
                match groups.iter_mut().find(|g| g.cluster == c.cluster && g.dimension == *d) {
                    Some(g) => g.criteria.push((c.id.clone(), c.name.clone())),
                    None => groups.push(RequirementGroup {
                        cluster: c.cluster,
                        cluster_name: taxonomy.cluster_name(c.cluster).to_string(),
                        dimension: *d,
                        criteria: vec![(c.id.clone(), c.name.clone())],
                    }),
                }
            }
        }
        groups.sort_by_key(|g| (g.cluster, g.dimension));
        TaxonomySection { classification, groups }
    }
}

/// Everything a report can show. Only the assessment is required.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportBundle {
    pub assessment: ScoredAssessment,
    pub scenarios: Vec<ScenarioSection>,
    pub taxonomy: Option<TaxonomySection>,
    pub formal: Option<LedgerEvaluation>,
}

impl ReportBundle {
    pub fn new(assessment: ScoredAssessment) -> Self {
        ReportBundle {
            assessment,
            scenarios: Vec::new(),
            taxonomy: None,
            formal: None,
        }
    }

    pub fn with_scenario(mut self, result: ScenarioResult, published_total: Option<f64>) -> Self {
        self.scenarios.push(ScenarioSection {
            result,
            published_total,
        });
        self
    }

    pub fn with_taxonomy(mut self, classification: Classification, taxonomy: &Taxonomy) -> Self {
        self.taxonomy = Some(TaxonomySection::new(classification, taxonomy));
        self
    }

    pub fn with_ledger(mut self, evaluation: LedgerEvaluation) -> Self {
        self.formal = Some(evaluation);
        self
    }

    /// Scenarios must share the assessment's configuration and baseline total.
    pub fn check(&self) -> Result<()> {
        let fp = &self.assessment.cas.config_fingerprint;
        for s in &self.scenarios {
            if &s.result.config_fingerprint != fp {
                return Err(Error::MixedConfigs);
            }
            if s.result.baseline_total.to_bits() != self.assessment.cas.total.to_bits() {
                return Err(Error::invalid(
                    "scenarios",
                    format!("scenario `{}` was computed against a different baseline", s.result.name),
                ));
            }
        }
        Ok(())
    }

    /// Column labels: the policy tag, or the scenario name when tags repeat.
    fn scenario_labels(&self) -> Vec<String> {
        let tags: Vec<&str> = self.scenarios.iter().map(|s| s.result.policy.tag()).collect();
        self.scenarios
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let tag = tags[i];
                if tags.iter().filter(|t| **t == tag).count() > 1 && !s.result.name.is_empty() {
                    s.result.name.clone()
                } else {
                    tag.to_string()
                }
            })
            .collect()
    }

    pub fn discrepancies(&self) -> Vec<DiscrepancyNote> {
        let mut notes = Vec::new();
        let mut check = |subject: String, published: Option<f64>, computed: f64| {
            if let Some(p) = published {
                if (computed - p).abs() > DISCREPANCY_TOLERANCE {
                    notes.push(DiscrepancyNote {
                        subject,
                        published: p,
                        computed: round3(computed),
                    });
                }
            }
        };
        check("baseline".into(), self.assessment.published_total, self.assessment.cas.total);
        for (s, label) in self.scenarios.iter().zip(self.scenario_labels()) {
            check(label, s.published_total, s.result.new_total);
        }
        notes
    }

    /// Machine-readable view with every number rounded as in the tables.
    pub fn document(&self) -> Result<ReportDocument> {
        self.check()?;
        let a = &self.assessment;
        let catalog = RubricCatalog::builtin();
        let title = |p: &PropertyId| {
            catalog
                .rubric(p)
                .map(|r| r.title.clone())
                .unwrap_or_else(|| p.title().to_string())
        };
        let rows = a
            .cas
            .contributions
            .iter()
            .map(|c| TableRow {
                property: c.property.clone(),
                title: title(&c.property),
                max: c.max,
                weight: c.weight,
                score: c.score,
                cas: round3(c.value),
            })
            .collect();
        let labels = self.scenario_labels();
        let scenarios = self
            .scenarios
            .iter()
            .zip(labels)
            .map(|(s, label)| ScenarioColumn {
                label,
                name: s.result.name.clone(),
                policy: s.result.policy,
                rows: s
                    .result
                    .rows
                    .iter()
                    .map(|r| ScenarioCell {
                        property: r.property.clone(),
                        score: r.new_score,
                        cas: round3(r.new_contribution),
                        changed: r.changed,
                    })
                    .collect(),
                total: round3(s.result.new_total),
                delta: round3(s.result.delta),
                published_total: s.published_total,
            })
            .collect();
        let taxonomy = self.taxonomy.as_ref().map(|t| TaxonomyPlacement {
            reliance: t.classification.reliance,
            level: t.classification.level,
            source: t.classification.source,
            flags: t.classification.flags.clone(),
            examples: t.classification.cell.examples.clone(),
            groups: t.groups.clone(),
        });
        Ok(ReportDocument {
            schema_version: doc::current_version(),
            system: a.label(),
            sheet_id: a.provenance.sheet_id.clone(),
            engine_version: a.provenance.engine_version.clone(),
            config_fingerprint: a.cas.config_fingerprint.clone(),
            explanation_quality_assessed: a.explanation_quality_assessed,
            cas_table: CasTable {
                rows,
                total: round3(a.cas.total),
                published_total: a.published_total,
            },
            scenarios,
            taxonomy,
            formal: self.formal.clone(),
            notes: self.discrepancies(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscrepancyNote {
    /// `baseline` or a scenario column label.
    pub subject: String,
    pub published: f64,
    pub computed: f64,
}

impl DiscrepancyNote {
    pub fn message(&self) -> String {
        format!(
            "{}: published total {} differs from the recomputed total {:.3} ({:+.3}); \
             the recomputed value follows from the listed raw scores and weights",
            self.subject,
            fmt_weight(self.published),
            self.computed,
            self.computed - self.published
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub property: PropertyId,
    pub title: String,
    pub max: f64,
    pub weight: f64,
    pub score: f64,
    pub cas: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CasTable {
    pub rows: Vec<TableRow>,
    pub total: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub published_total: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioCell {
    pub property: PropertyId,
    pub score: f64,
    pub cas: f64,
    pub changed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioColumn {
    pub label: String,
    pub name: String,
    pub policy: Policy,
    pub rows: Vec<ScenarioCell>,
    pub total: f64,
    pub delta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub published_total: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaxonomyPlacement {
    pub reliance: Reliance,
    pub level: Level,
    pub source: LevelSource,
    pub flags: Vec<CellFlag>,
    pub examples: Vec<String>,
    pub groups: Vec<RequirementGroup>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub schema_version: String,
    pub system: String,
    pub sheet_id: String,
    pub engine_version: String,
    pub config_fingerprint: String,
    pub explanation_quality_assessed: bool,
    pub cas_table: CasTable,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub scenarios: Vec<ScenarioColumn>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub taxonomy: Option<TaxonomyPlacement>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub formal: Option<LedgerEvaluation>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<DiscrepancyNote>,
}

impl ReportDocument {
    pub fn from_json(text: &str) -> Result<Self> {
        doc::parse_document(text)
    }
}

pub fn render_report(bundle: &ReportBundle, format: ReportFormat) -> Result<String> {
    let d = bundle.document()?;
    match format {
        ReportFormat::Markdown => Ok(markdown(bundle, &d)),
        ReportFormat::Json => doc::to_pretty_json(&d),
        ReportFormat::Csv => csv_table(&d),
    }
}

/// Integers print bare; anything else gets up to three decimals.
pub fn fmt_points(x: f64) -> String {
    if x.fract() == 0.0 {
        format!("{x:.0}")
    } else {
        let s = format!("{x:.3}");
        s.trim_end_matches('0').to_string()
    }
}

fn fmt_weight(w: f64) -> String {
    if ((w * 100.0).round() - w * 100.0).abs() < 1e-9 {
        format!("{w:.2}")
    } else {
        format!("{w:.3}")
    }
}

fn markdown(bundle: &ReportBundle, d: &ReportDocument) -> String {
    let a = &bundle.assessment;
    let mut out = String::new();
    let _ = writeln!(out, "# Contestability assessment: {}\n", d.system);
    let _ = writeln!(out, "- Sheet id: `{}`", d.sheet_id);
    let _ = writeln!(out, "- Weight configuration: `{}`", &d.config_fingerprint[..16.min(d.config_fingerprint.len())]);
    let _ = writeln!(out, "- Impact severity: {}", a.metadata.impact_severity);
    let _ = writeln!(out, "- Autonomy level: {}", a.metadata.autonomy_level);
    if let Some(r) = a.metadata.reliance {
        let _ = writeln!(out, "- AI reliance: {r}");
    }
    if !d.explanation_quality_assessed {
        let _ = writeln!(out, "- Explanation quality: not assessed (scored 0)");
    }
    out.push('\n');

    out.push_str("## CAS\n\n");
    let mut header = String::from("| Property | Max | Weight | Score | CAS System |");
    let mut rule = String::from("|---|---:|---:|---:|---:|");
    for s in &d.scenarios {
        let _ = write!(header, " Score {0} | CAS {0} |", s.label);
        rule.push_str("---:|---:|");
    }
    let _ = writeln!(out, "{header}\n{rule}");
    for (i, r) in d.cas_table.rows.iter().enumerate() {
        let _ = write!(
            out,
            "| {} | {} | {} | {} | {:.3} |",
            r.title,
            fmt_points(r.max),
            fmt_weight(r.weight),
            fmt_points(r.score),
            r.cas
        );
        for s in &d.scenarios {
            let c = &s.rows[i];
            let mark = if c.changed { "*" } else { "" };
            let _ = write!(out, " {}{mark} | {:.3} |", fmt_points(c.score), c.cas);
        }
        out.push('\n');
    }
    let _ = write!(out, "| **Total CAS** | | | | **{:.3}** |", d.cas_table.total);
    for s in &d.scenarios {
        let _ = write!(out, " | **{:.3}** |", s.total);
    }
    out.push_str("\n\n");

    if !d.scenarios.is_empty() {
        out.push_str("## Scenarios\n\n");
        for s in &d.scenarios {
            let changed: Vec<String> = s
                .rows
                .iter()
                .zip(&d.cas_table.rows)
                .filter(|(c, _)| c.changed)
                .map(|(c, b)| format!("{} {} -> {}", c.property, fmt_points(b.score), fmt_points(c.score)))
                .collect();
            let name = if s.name.is_empty() { &s.label } else { &s.name };
            let _ = writeln!(
                out,
                "- {name} ({}): total {:.3}, change {:+.3}; {}",
                s.policy,
                s.total,
                s.delta,
                if changed.is_empty() { "no changes".to_string() } else { changed.join(", ") }
            );
        }
        out.push_str("\n* marks a modified score.\n\n");
    }

    if let Some(t) = &d.taxonomy {
        out.push_str("## Taxonomy placement\n\n");
        let how = match t.source {
            LevelSource::Score => "from CAS",
            LevelSource::Override => "set manually",
        };
        let _ = writeln!(out, "Reliance **{}**, contestability **{}** ({how}).\n", t.reliance, t.level);
        if t.flags.contains(&CellFlag::RegulatoryWarning) {
            out.push_str(
                "> **Warning:** high AI reliance with low contestability. This combination is likely \
                 to fall short of regulatory expectations for contestable automated decisions.\n\n",
            );
        }
        if !t.examples.is_empty() {
            let _ = writeln!(out, "Typical systems: {}.\n", t.examples.join("; "));
        }
        out.push_str("| Cluster | Dimension | Required criteria |\n|---|---|---|\n");
        for g in &t.groups {
            let names: Vec<&str> = g.criteria.iter().map(|(_, n)| n.as_str()).collect();
            let _ = writeln!(out, "| {} | {} | {} |", g.cluster_name, g.dimension, names.join(", "));
        }
        out.push('\n');
    }

    if let Some(f) = &d.formal {
        out.push_str("## Formal contestability\n\n```text\n");
        out.push_str(&f.render_text());
        out.push_str("```\n\n");
    }

    if !d.notes.is_empty() {
        out.push_str("## Notes\n\n");
        for n in &d.notes {
            let _ = writeln!(out, "- {}", n.message());
        }
        out.push('\n');
    }
    out
}

fn csv_table(d: &ReportDocument) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| Error::invalid("csv", e.to_string());
    w.write_record(["column", "property", "max", "weight", "score", "cas"]).map_err(err)?;
    for r in &d.cas_table.rows {
        w.write_record([
            "system",
            r.property.as_str(),
            &fmt_points(r.max),
            &fmt_weight(r.weight),
            &fmt_points(r.score),
            &format!("{:.3}", r.cas),
        ])
        .map_err(err)?;
    }
    w.write_record(["system", "total", "", "", "", &format!("{:.3}", d.cas_table.total)])
        .map_err(err)?;
    for s in &d.scenarios {
        for (c, b) in s.rows.iter().zip(&d.cas_table.rows) {
            w.write_record([
                s.label.as_str(),
                c.property.as_str(),
                &fmt_points(b.max),
                &fmt_weight(b.weight),
                &fmt_points(c.score),
                &format!("{:.3}", c.cas),
            ])
            .map_err(err)?;
        }
        w.write_record([s.label.as_str(), "total", "", "", "", &format!("{:.3}", s.total)])
            .map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::invalid("csv", e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadarAxis {
    pub property: PropertyId,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadarSeries {
    pub system: String,
    pub axes: Vec<RadarAxis>,
}

/// One series per row, axes in canonical property order.
pub fn radar_data(rows: &[ComparisonRow]) -> Vec<RadarSeries> {
    rows.iter()
        .map(|r| {
            let mut axes: Vec<RadarAxis> = r
                .normalized
                .iter()
                .map(|(p, v)| RadarAxis {
                    property: p.clone(),
                    value: *v,
                })
                .collect();
            axes.sort_by(|a, b| a.property.cmp(&b.property));
            RadarSeries {
                system: r.system.clone(),
                axes,
            }
        })
        .collect()
}

/// `system,property,value` rows.
pub fn radar_csv(series: &[RadarSeries]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| Error::invalid("csv", e.to_string());
    w.write_record(["system", "property", "value"]).map_err(err)?;
    for s in series {
        for a in &s.axes {
            w.write_record([s.system.as_str(), a.property.as_str(), &a.value.to_string()])
                .map_err(err)?;
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::invalid("csv", e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Markdown table of several systems side by side.
pub fn render_comparison(rows: &[ComparisonRow]) -> String {
    let mut out = String::new();
    let Some(first) = rows.first() else {
        return out;
    };
    out.push_str("| System |");
    for (p, _) in &first.normalized {
        let _ = write!(out, " {} |", p.title());
    }
    out.push_str(" Total CAS |\n|---|");
    for _ in &first.normalized {
        out.push_str("---:|");
    }
    out.push_str("---:|\n");
    for r in rows {
        let _ = write!(out, "| {} |", r.system);
        for (_, v) in &r.normalized {
            let _ = write!(out, " {v:.2} |");
        }
        let _ = writeln!(out, " {:.3} |", r.total);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::questionnaire::score_assessment;
    use crate::scoring::WeightConfig;
    use crate::whatif::compare_systems;

    fn bundle(case: &str) -> ReportBundle {
        let cfg = WeightConfig::default_config();
        let sheet = fixtures::sheet(case).unwrap();
        let scored = score_assessment(&sheet, cfg).unwrap();
        let mut b = ReportBundle::new(scored);
        for tier in ["hf", "mf"] {
            let d = fixtures::scenario(case, tier).unwrap();
            let (_, r) = d.evaluate(&sheet, cfg).unwrap();
            b = b.with_scenario(r, d.published_total());
        }
        b
    }

    #[test]
    fn case1_markdown_has_table_layout_and_totals() {
        let md = render_report(&bundle("case1"), ReportFormat::Markdown).unwrap();
        assert!(md.contains("| Property | Max | Weight | Score | CAS System | Score HF | CAS HF | Score MF | CAS MF |"));
        assert!(md.contains("| **Total CAS** | | | | **0.551** | | **0.622** | | **0.927** |"), "{md}");
        assert!(md.contains("| Explainability | 2 | 0.30 | 1 | 0.150 |"));
        assert!(!md.contains("## Notes"));
    }

    #[test]
    fn discrepancy_notes_for_cases_two_and_three() {
        for case in ["case2", "case3"] {
            let notes = bundle(case).discrepancies();
            let subjects: Vec<&str> = notes.iter().map(|n| n.subject.as_str()).collect();
            assert_eq!(subjects, vec!["baseline", "HF", "MF"], "{case}");
        }
        assert!(bundle("case1").discrepancies().is_empty());
    }

    #[test]
    fn deterministic_and_round_trips() {
        let b = bundle("case2");
        for f in [ReportFormat::Markdown, ReportFormat::Json, ReportFormat::Csv] {
            assert_eq!(render_report(&b, f).unwrap(), render_report(&b, f).unwrap());
        }
        let json = render_report(&b, ReportFormat::Json).unwrap();
        let back = ReportDocument::from_json(&json).unwrap();
        assert_eq!(back, b.document().unwrap());
        assert!((back.cas_table.total - b.assessment.cas.total).abs() <= 5e-4);
    }

    #[test]
    fn no_scenarios_means_no_scenario_section() {
        let mut b = bundle("case1");
        b.scenarios.clear();
        let md = render_report(&b, ReportFormat::Markdown).unwrap();
        assert!(!md.contains("## Scenarios"));
        assert!(md.contains("| Property | Max | Weight | Score | CAS System |\n"));
        let csv = render_report(&b, ReportFormat::Csv).unwrap();
        assert_eq!(csv.lines().count(), 10);
    }

    #[test]
    fn unsupported_format() {
        assert!(matches!("pdf".parse::<ReportFormat>(), Err(Error::UnsupportedFormat(_))));
        assert_eq!("MD".parse::<ReportFormat>().unwrap(), ReportFormat::Markdown);
    }

    #[test]
    fn radar_axes_for_case1() {
        let b = bundle("case1");
        let rows = compare_systems(&[b.assessment]).unwrap();
        let series = radar_data(&rows);
        let values: Vec<f64> = series[0].axes.iter().map(|a| a.value).collect();
        assert_eq!(values, vec![0.5, 0.5, 0.6, 1.0, 0.5, 0.5, 0.2, 0.5]);
        let csv = radar_csv(&series).unwrap();
        assert!(csv.starts_with("system,property,value\n"));
        assert_eq!(csv.lines().count(), 9);
    }
}
