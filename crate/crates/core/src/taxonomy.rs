//! Criteria catalog and the reliance × contestability-level matrix.
//!
//! Requirements cascade within a reliance row: a cell requires its own
//! criteria plus those of every lower level in the same row. Rows never
//! borrow from each other.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::doc;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reliance {
    Low,
    Medium,
    High,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Level {
    Low,
    Medium,
    High,
}

pub const RELIANCES: [Reliance; 3] = [Reliance::Low, Reliance::Medium, Reliance::High];
pub const LEVELS: [Level; 3] = [Level::Low, Level::Medium, Level::High];

macro_rules! three_way_str {
    ($ty:ident, $what:literal) => {
        impl $ty {
            pub fn as_str(&self) -> &'static str {
                match self {
                    $ty::Low => "low",
                    $ty::Medium => "medium",
                    $ty::High => "high",
                }
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $ty {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                match s.to_ascii_lowercase().as_str() {
                    "low" => Ok($ty::Low),
                    "medium" => Ok($ty::Medium),
                    "high" => Ok($ty::High),
                    _ => Err(Error::invalid($what, format!("`{s}` is not one of low, medium, high"))),
                }
            }
        }
    };
}

three_way_str!(Reliance, "reliance");
three_way_str!(Level, "level");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dimension {
    HumanCentered,
    Technical,
    Legal,
    Organizational,
}

impl Dimension {
    pub const ALL: [Dimension; 4] = [
        Dimension::HumanCentered,
        Dimension::Technical,
        Dimension::Legal,
        Dimension::Organizational,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Dimension::HumanCentered => "human_centered",
            Dimension::Technical => "technical",
            Dimension::Legal => "legal",
            Dimension::Organizational => "organizational",
        }
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Dimension {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Dimension::ALL
            .into_iter()
            .find(|d| d.as_str() == s.replace('-', "_").to_ascii_lowercase())
            .ok_or_else(|| Error::invalid("dimension", format!("unknown dimension `{s}`")))
    }
}

/// The five criteria clusters, in catalog order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cluster {
    StructuralPreconditions,
    ProcessIntegrity,
    GovernanceAccountability,
    AdaptationLifecycle,
    SupportiveInfrastructure,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterInfo {
    pub id: Cluster,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Criterion {
    pub id: String,
    pub name: String,
    pub cluster: Cluster,
    pub dimensions: Vec<Dimension>,
    pub description: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellFlag {
    RegulatoryWarning,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaxonomyCell {
    pub reliance: Reliance,
    pub level: Level,
    /// Criteria introduced by this cell; lower cells in the row add theirs.
    pub criteria: Vec<String>,
    pub examples: Vec<String>,
    #[serde(default)]
    pub flags: Vec<CellFlag>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Taxonomy {
    #[serde(default = "doc::current_version")]
    pub schema_version: String,
    pub clusters: Vec<ClusterInfo>,
    pub criteria: Vec<Criterion>,
    pub cells: Vec<TaxonomyCell>,
}

const TAXONOMY_JSON: &str = include_str!("../data/taxonomy.json");

impl Taxonomy {
    pub fn builtin() -> &'static Taxonomy {
        static TAXONOMY: OnceLock<Taxonomy> = OnceLock::new();
        TAXONOMY.get_or_init(|| Taxonomy::from_json(TAXONOMY_JSON).expect("embedded taxonomy is valid"))
    }

    pub fn builtin_json() -> &'static str {
        TAXONOMY_JSON
    }

    /// Loads and checks a catalog/cell-mapping document.
    pub fn from_json(text: &str) -> Result<Taxonomy> {
        let t: Taxonomy = doc::parse_document(text)?;
        t.check()?;
        Ok(t)
    }

    fn check(&self) -> Result<()> {
        let mut ids = BTreeSet::new();
        for c in &self.criteria {
            if !ids.insert(c.id.as_str()) {
                return Err(Error::invalid("criteria", format!("duplicate criterion `{}`", c.id)));
            }
            if c.dimensions.is_empty() {
                return Err(Error::invalid("criteria", format!("`{}` has no dimension", c.id)));
            }
        }
        for r in RELIANCES {
            for l in LEVELS {
                let n = self
                    .cells
                    .iter()
                    .filter(|c| c.reliance == r && c.level == l)
                    .count();
                if n != 1 {
                    return Err(Error::invalid("cells", format!("expected one ({r}, {l}) cell, found {n}")));
                }
            }
        }
        for cell in &self.cells {
            if let Some(unknown) = cell.criteria.iter().find(|id| !ids.contains(id.as_str())) {
                return Err(Error::invalid("cells", format!("unknown criterion `{unknown}`")));
            }
        }
        let warn = self.cell(Reliance::High, Level::Low);
        if !warn.flags.contains(&CellFlag::RegulatoryWarning) {
            return Err(Error::invalid("cells", "(high, low) must carry regulatory_warning"));
        }
        Ok(())
    }

    pub fn criterion(&self, id: &str) -> Option<&Criterion> {
        self.criteria.iter().find(|c| c.id == id)
    }

    pub fn cluster_name(&self, cluster: Cluster) -> &str {
        self.clusters
            .iter()
            .find(|c| c.id == cluster)
            .map(|c| c.name.as_str())
            .unwrap_or("")
    }

    pub fn cell(&self, reliance: Reliance, level: Level) -> &TaxonomyCell {
        self.cells
            .iter()
            .find(|c| c.reliance == reliance && c.level == level)
            .expect("checked at load: every cell present")
    }

    /// Criteria required at `(reliance, level)`, cumulative over lower levels
    /// of the same row, ordered by cluster then catalog position.
    pub fn resolve_requirements(&self, reliance: Reliance, level: Level) -> Vec<&Criterion> {
        let wanted: BTreeSet<&str> = LEVELS
            .iter()
            .filter(|l| **l <= level)
            .flat_map(|l| self.cell(reliance, *l).criteria.iter().map(String::as_str))
            .collect();
        self.ordered(|c| wanted.contains(c.id.as_str()))
    }

    pub fn criteria_by_dimension(&self, dimension: Dimension) -> Vec<&Criterion> {
        self.ordered(|c| c.dimensions.contains(&dimension))
    }

    fn ordered(&self, keep: impl Fn(&Criterion) -> bool) -> Vec<&Criterion> {
        let mut out: Vec<(usize, &Criterion)> = self
            .criteria
            .iter()
            .enumerate()
            .filter(|(_, c)| keep(c))
            .collect();
        out.sort_by_key(|(i, c)| (c.cluster, *i));
        out.into_iter().map(|(_, c)| c).collect()
    }

    pub fn classify(&self, input: &ClassificationInput, thresholds: Thresholds) -> Result<Classification> {
        thresholds.check()?;
        let (level, source) = match (input.level_override, input.cas_total) {
            (Some(l), _) => (l, LevelSource::Override),
            (None, Some(cas)) => {
                if !(cas.is_finite() && (0.0..=1.0).contains(&cas)) {
                    return Err(Error::invalid("cas_total", format!("{cas} is outside [0, 1]")));
                }
                (thresholds.level_for(cas), LevelSource::Score)
            }
            (None, None) => {
                return Err(Error::invalid("cas_total", "either a score or a level override is required"))
            }
        };
        let cell = self.cell(input.reliance, level).clone();
        let requirements = self
            .resolve_requirements(input.reliance, level)
            .into_iter()
            .map(|c| c.id.clone())
            .collect();
        Ok(Classification {
            reliance: input.reliance,
            level,
            source,
            flags: cell.flags.clone(),
            cell,
            requirements,
        })
    }

    /// Fixed-width text rendering of the matrix, one block per row.
    pub fn render_grid(&self) -> String {
        let mut out = String::new();
        out.push_str("reliance \\ level | low | medium | high\n");
        out.push_str("-----------------+-----+--------+-----\n");
        for r in RELIANCES.iter().rev() {
            let counts: Vec<String> = LEVELS
                .iter()
                .map(|l| {
                    let n = self.resolve_requirements(*r, *l).len();
                    let warn = if self.cell(*r, *l).flags.contains(&CellFlag::RegulatoryWarning) {
                        "!"
                    } else {
                        ""
                    };
                    format!("{n}{warn}")
                })
                .collect();
            out.push_str(&format!("{:<16} | {:<3} | {:<6} | {}\n", r, counts[0], counts[1], counts[2]));
        }
        out.push_str("\ncells list the number of required criteria; ! marks a regulatory warning\n");
        for r in RELIANCES.iter().rev() {
            for l in LEVELS {
                let cell = self.cell(*r, l);
                out.push_str(&format!("\n[{r} reliance / {l} level]\n"));
                out.push_str(&format!("  examples: {}\n", cell.examples.join("; ")));
                for c in self.resolve_requirements(*r, l) {
                    out.push_str(&format!("  - {} ({})\n", c.name, join_dims(&c.dimensions)));
                }
            }
        }
        out
    }

    /// One row per (cell, required criterion).
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "reliance",
            "level",
            "criterion_id",
            "criterion",
            "cluster",
            "dimensions",
            "introduced_here",
            "flags",
        ])
        .map_err(csv_err)?;
        for r in RELIANCES {
            for l in LEVELS {
                let cell = self.cell(r, l);
                let flags = cell
                    .flags
                    .iter()
                    .map(|_| "regulatory_warning")
                    .collect::<Vec<_>>()
                    .join(";");
                for c in self.resolve_requirements(r, l) {
                    let here = cell.criteria.contains(&c.id);
                    w.write_record([
                        r.as_str(),
                        l.as_str(),
                        &c.id,
                        &c.name,
                        self.cluster_name(c.cluster),
                        &c.dimensions.iter().map(|d| d.as_str()).collect::<Vec<_>>().join(";"),
                        if here { "true" } else { "false" },
                        &flags,
                    ])
                    .map_err(csv_err)?;
                }
            }
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

fn join_dims(dims: &[Dimension]) -> String {
    dims.iter().map(|d| d.as_str()).collect::<Vec<_>>().join(", ")
}

pub(crate) fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// CAS cut points separating low / medium / high contestability. Not derived
/// from any published calibration; tertiles by default.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub low: f64,
    pub high: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            low: 1.0 / 3.0,
            high: 2.0 / 3.0,
        }
    }
}

impl Thresholds {
    pub fn check(&self) -> Result<()> {
        if 0.0 < self.low && self.low < self.high && self.high < 1.0 {
            Ok(())
        } else {
            Err(Error::InvalidThresholds {
                low: self.low,
                high: self.high,
            })
        }
    }

    /// Half-open intervals: `[0, low)`, `[low, high)`, `[high, 1]`.
    pub fn level_for(&self, cas: f64) -> Level {
        if cas < self.low {
            Level::Low
        } else if cas < self.high {
            Level::Medium
        } else {
            Level::High
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationInput {
    pub reliance: Reliance,
    #[serde(default)]
    pub cas_total: Option<f64>,
    #[serde(default)]
    pub level_override: Option<Level>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LevelSource {
    Score,
    Override,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub reliance: Reliance,
    pub level: Level,
    pub source: LevelSource,
    pub flags: Vec<CellFlag>,
    pub cell: TaxonomyCell,
    /// Resolved (cumulative) criterion ids.
    pub requirements: Vec<String>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t() -> &'static Taxonomy {
        Taxonomy::builtin()
    }

    #[test]
    fn catalog_has_21_criteria_in_five_clusters() {
        assert_eq!(t().criteria.len(), 21);
        let per_cluster: Vec<usize> = [
            Cluster::StructuralPreconditions,
            Cluster::ProcessIntegrity,
            Cluster::GovernanceAccountability,
            Cluster::AdaptationLifecycle,
            Cluster::SupportiveInfrastructure,
        ]
        .iter()
        .map(|k| t().criteria.iter().filter(|c| c.cluster == *k).count())
        .collect();
        assert_eq!(per_cluster, vec![4, 5, 4, 5, 3]);
    }

    #[test]
    fn cascade_within_row() {
        let ids = |r, l| -> BTreeSet<String> {
            t().resolve_requirements(r, l).iter().map(|c| c.id.clone()).collect()
        };
        let expected: BTreeSet<String> = LEVELS
            .iter()
            .flat_map(|l| t().cell(Reliance::Medium, *l).criteria.clone())
            .collect();
        assert_eq!(ids(Reliance::Medium, Level::High), expected);
        let base: BTreeSet<String> = t().cell(Reliance::Low, Level::Low).criteria.iter().cloned().collect();
        assert_eq!(ids(Reliance::Low, Level::Low), base);
        for r in RELIANCES {
            assert!(ids(r, Level::Medium).is_superset(&ids(r, Level::Low)));
            assert!(ids(r, Level::High).is_superset(&ids(r, Level::Medium)));
        }
        assert_eq!(ids(Reliance::High, Level::High).len(), 21);
    }

    #[test]
    fn resolved_lists_are_cluster_ordered() {
        let list = t().resolve_requirements(Reliance::High, Level::High);
        assert!(list.windows(2).all(|w| w[0].cluster <= w[1].cluster));
    }

    #[test]
    fn classification_thresholds() {
        let th = Thresholds::default();
        let c = t()
            .classify(
                &ClassificationInput {
                    reliance: Reliance::High,
                    cas_total: Some(0.551),
                    level_override: None,
                },
                th,
            )
            .unwrap();
        assert_eq!(c.level, Level::Medium);
        assert!(c.flags.is_empty());

        let c = t()
            .classify(
                &ClassificationInput {
                    reliance: Reliance::High,
                    cas_total: Some(0.9),
                    level_override: Some(Level::Low),
                },
                th,
            )
            .unwrap();
        assert_eq!(c.level, Level::Low);
        assert_eq!(c.source, LevelSource::Override);
        assert_eq!(c.flags, vec![CellFlag::RegulatoryWarning]);

        let at_cut = Thresholds { low: 0.25, high: 0.75 };
        assert_eq!(at_cut.level_for(0.25), Level::Medium);
        assert_eq!(at_cut.level_for(0.75), Level::High);
        assert_eq!(at_cut.level_for(0.2499), Level::Low);
    }

    #[test]
    fn invalid_thresholds_are_rejected() {
        let input = ClassificationInput {
            reliance: Reliance::Low,
            cas_total: Some(0.5),
            level_override: None,
        };
        for (low, high) in [(0.0, 0.5), (0.6, 0.4), (0.5, 0.5), (0.2, 1.0)] {
            assert!(matches!(
                t().classify(&input, Thresholds { low, high }),
                Err(Error::InvalidThresholds { .. })
            ));
        }
    }

    #[test]
    fn dimension_queries() {
        let legal: Vec<&str> = t().criteria_by_dimension(Dimension::Legal).iter().map(|c| c.name.as_str()).collect();
        assert!(legal.contains(&"Education and Right-to-Know"));
        let human: Vec<&str> = t()
            .criteria_by_dimension(Dimension::HumanCentered)
            .iter()
            .map(|c| c.name.as_str())
            .collect();
        assert!(human.contains(&"Stakeholder Co-Design and Participatory Development"));
        let union: BTreeSet<&str> = Dimension::ALL
            .iter()
            .flat_map(|d| t().criteria_by_dimension(*d))
            .map(|c| c.id.as_str())
            .collect();
        assert_eq!(union.len(), t().criteria.len());
    }

    #[test]
    fn csv_and_grid_render() {
        let csv = t().to_csv().unwrap();
        assert!(csv.starts_with("reliance,level,criterion_id"));
        assert!(csv.contains("regulatory_warning"));
        let grid = t().render_grid();
        assert!(grid.contains("2!") || grid.contains("3!"));
    }

    #[test]
    fn broken_mapping_is_rejected() {
        let mut v: serde_json::Value = serde_json::from_str(TAXONOMY_JSON).unwrap();
        v["cells"][6]["flags"] = serde_json::json!([]);
        assert!(Taxonomy::from_json(&v.to_string()).is_err());
        let mut v: serde_json::Value = serde_json::from_str(TAXONOMY_JSON).unwrap();
        v["cells"][0]["criteria"] = serde_json::json!(["nope"]);
        assert!(Taxonomy::from_json(&v.to_string()).is_err());
    }
}
