//! Weighted composite contestability score.
//!
//! Each property contributes `weight * score / max`, so a property at its
//! maximum contributes exactly its weight and the total over a valid weight
//! configuration lies in `[0, 1]`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::doc;
use crate::error::{Error, Result};

/// Tolerance applied to weight sums and intra-tier equality.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum PropertyId {
    Explainability,
    Openness,
    Traceability,
    Safeguards,
    Adaptivity,
    Auditing,
    Ease,
    ExplanationQuality,
    /// Extension property. Never equal to a canonical id: parsing a canonical
    /// name always yields the canonical variant.
    Custom(String),
}

impl PropertyId {
    pub const CANONICAL: [PropertyId; 8] = [
        PropertyId::Explainability,
        PropertyId::Openness,
        PropertyId::Traceability,
        PropertyId::Safeguards,
        PropertyId::Adaptivity,
        PropertyId::Auditing,
        PropertyId::Ease,
        PropertyId::ExplanationQuality,
    ];

    pub fn as_str(&self) -> &str {
        match self {
            PropertyId::Explainability => "explainability",
            PropertyId::Openness => "openness",
            PropertyId::Traceability => "traceability",
            PropertyId::Safeguards => "safeguards",
            PropertyId::Adaptivity => "adaptivity",
            PropertyId::Auditing => "auditing",
            PropertyId::Ease => "ease",
            PropertyId::ExplanationQuality => "explanation_quality",
            PropertyId::Custom(s) => s,
        }
    }

    pub fn title(&self) -> &str {
        match self {
            PropertyId::Explainability => "Explainability",
            PropertyId::Openness => "Openness to Contestation",
            PropertyId::Traceability => "Traceability",
            PropertyId::Safeguards => "Built-in Safeguards",
            PropertyId::Adaptivity => "Adaptivity",
            PropertyId::Auditing => "Auditing",
            PropertyId::Ease => "Ease of Contestation",
            PropertyId::ExplanationQuality => "Explanation Quality",
            PropertyId::Custom(s) => s,
        }
    }

    /// Position in the canonical order, `None` for custom properties.
    pub fn canonical_rank(&self) -> Option<usize> {
        Self::CANONICAL.iter().position(|p| p == self)
    }

    pub fn is_canonical(&self) -> bool {
        !matches!(self, PropertyId::Custom(_))
    }

    pub fn parse(s: &str) -> Result<Self> {
        if let Some(p) = Self::CANONICAL.iter().find(|p| p.as_str() == s) {
            return Ok(p.clone());
        }
        let valid = !s.is_empty()
            && s.len() <= 64
            && s.chars()
                .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_' || c == '-');
        if !valid {
            return Err(Error::invalid(
                "id",
                format!("`{s}` is not a valid property id (lowercase letters, digits, `_`, `-`)"),
            ));
        }
        Ok(PropertyId::Custom(s.to_string()))
    }
}

impl fmt::Display for PropertyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl TryFrom<String> for PropertyId {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        PropertyId::parse(&s)
    }
}

impl From<PropertyId> for String {
    fn from(p: PropertyId) -> String {
        p.as_str().to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightEntry {
    pub id: PropertyId,
    pub weight: f64,
    /// 1 is the most critical tier.
    pub tier: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightConfig {
    #[serde(default = "doc::current_version")]
    pub schema_version: String,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    pub entries: Vec<WeightEntry>,
}

fn default_tolerance() -> f64 {
    DEFAULT_TOLERANCE
}

const DEFAULT_WEIGHTS_JSON: &str = include_str!("../data/weights.default.json");

impl WeightConfig {
    pub fn new(entries: Vec<WeightEntry>) -> Self {
        WeightConfig {
            schema_version: doc::current_version(),
            tolerance: DEFAULT_TOLERANCE,
            entries,
        }
    }

    /// The shipped eight-property configuration.
    pub fn default_config() -> &'static WeightConfig {
        static DEFAULT: OnceLock<WeightConfig> = OnceLock::new();
        DEFAULT.get_or_init(|| {
            doc::parse_document(DEFAULT_WEIGHTS_JSON).expect("embedded default weights parse")
        })
    }

    pub fn default_json() -> &'static str {
        DEFAULT_WEIGHTS_JSON
    }

    pub fn from_json(text: &str) -> Result<Self> {
        doc::parse_document(text)
    }

    pub fn weight_of(&self, id: &PropertyId) -> Option<f64> {
        self.entries.iter().find(|e| &e.id == id).map(|e| e.weight)
    }

    pub fn properties(&self) -> impl Iterator<Item = &PropertyId> {
        self.entries.iter().map(|e| &e.id)
    }

    /// Content hash of the weights and tolerance, stable across key order and
    /// formatting of the source document.
    pub fn fingerprint(&self) -> String {
        let value = serde_json::json!({
            "tolerance": self.tolerance,
            "entries": self.entries,
        });
        doc::sha256_hex(doc::canonical_json(&value).as_bytes())
    }

    pub fn validate(&self) -> ValidationReport {
        validate_weights(self)
    }
}

impl Default for WeightConfig {
    fn default() -> Self {
        Self::default_config().clone()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightViolation {
    Empty,
    InvalidTolerance { tolerance: f64 },
    DuplicateProperty { id: PropertyId },
    WeightOutOfRange { id: PropertyId, weight: f64 },
    InvalidTier { id: PropertyId, tier: u32 },
    SumNotOne { sum: f64 },
    TierWeightsUnequal { tier: u32, entries: Vec<(PropertyId, f64)> },
    /// A less critical tier carries a weight not strictly below a more critical one.
    TierOrder {
        critical_tier: u32,
        critical_weight: f64,
        lesser_tier: u32,
        lesser_weight: f64,
    },
}

impl WeightViolation {
    pub fn kind(&self) -> &'static str {
        match self {
            WeightViolation::Empty => "empty",
            WeightViolation::InvalidTolerance { .. } => "invalid_tolerance",
            WeightViolation::DuplicateProperty { .. } => "duplicate_property",
            WeightViolation::WeightOutOfRange { .. } => "weight_out_of_range",
            WeightViolation::InvalidTier { .. } => "invalid_tier",
            WeightViolation::SumNotOne { .. } => "sum_not_one",
            WeightViolation::TierWeightsUnequal { .. } => "tier_weights_unequal",
            WeightViolation::TierOrder { .. } => "tier_order",
        }
    }
}

impl fmt::Display for WeightViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightViolation::Empty => write!(f, "configuration has no entries"),
            WeightViolation::InvalidTolerance { tolerance } => {
                write!(f, "tolerance {tolerance} must be finite and non-negative")
            }
            WeightViolation::DuplicateProperty { id } => write!(f, "`{id}` appears more than once"),
            WeightViolation::WeightOutOfRange { id, weight } => {
                write!(f, "weight {weight} of `{id}` is not strictly between 0 and 1")
            }
            WeightViolation::InvalidTier { id, tier } => {
                write!(f, "tier {tier} of `{id}` must be a positive integer")
            }
            WeightViolation::SumNotOne { sum } => write!(f, "weights sum to {sum}, not 1"),
            WeightViolation::TierWeightsUnequal { tier, entries } => {
                let list: Vec<String> = entries.iter().map(|(p, w)| format!("{p}={w}")).collect();
                write!(f, "tier {tier} weights differ: {}", list.join(", "))
            }
            WeightViolation::TierOrder {
                critical_tier,
                critical_weight,
                lesser_tier,
                lesser_weight,
            } => write!(
                f,
                "tier {lesser_tier} weight {lesser_weight} is not below tier {critical_tier} weight {critical_weight}"
            ),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<WeightViolation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, kind: &str) -> bool {
        self.violations.iter().any(|v| v.kind() == kind)
    }

    pub fn kinds(&self) -> BTreeSet<&'static str> {
        self.violations.iter().map(WeightViolation::kind).collect()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return f.write_str("ok");
        }
        let parts: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        f.write_str(&parts.join("; "))
    }
}

/// Checks every weight-configuration constraint. Violations are returned as
/// data; this never fails.
pub fn validate_weights(config: &WeightConfig) -> ValidationReport {
    let mut violations = Vec::new();
    let tol = config.tolerance;
    if !(tol.is_finite() && tol >= 0.0) {
        violations.push(WeightViolation::InvalidTolerance { tolerance: tol });
    }
    let tol = if tol.is_finite() && tol >= 0.0 { tol } else { DEFAULT_TOLERANCE };

    if config.entries.is_empty() {
        violations.push(WeightViolation::Empty);
        return ValidationReport { violations };
    }

    let mut seen = BTreeSet::new();
    for e in &config.entries {
        if !seen.insert(&e.id) {
            violations.push(WeightViolation::DuplicateProperty { id: e.id.clone() });
        }
        if !(e.weight.is_finite() && e.weight > 0.0 && e.weight < 1.0) {
            violations.push(WeightViolation::WeightOutOfRange {
                id: e.id.clone(),
                weight: e.weight,
            });
        }
        if e.tier == 0 {
            violations.push(WeightViolation::InvalidTier {
                id: e.id.clone(),
                tier: e.tier,
            });
        }
    }

    // A single property may legitimately carry weight 1.
    if config.entries.len() == 1 {
        violations.retain(|v| {
            !matches!(v, WeightViolation::WeightOutOfRange { weight, .. } if (*weight - 1.0).abs() <= tol)
        });
    }

    let sum = compensated_sum(config.entries.iter().map(|e| e.weight));
    let off = (sum - 1.0).abs();
    if off.is_nan() || off > tol {
        violations.push(WeightViolation::SumNotOne { sum });
    }

    let mut tiers: BTreeMap<u32, Vec<(PropertyId, f64)>> = BTreeMap::new();
    for e in &config.entries {
        tiers.entry(e.tier).or_default().push((e.id.clone(), e.weight));
    }
    for (tier, members) in &tiers {
        let (lo, hi) = min_max(members.iter().map(|(_, w)| *w));
        if hi - lo > tol {
            violations.push(WeightViolation::TierWeightsUnequal {
                tier: *tier,
                entries: members.clone(),
            });
        }
    }

    // Strict decrease over every pair of tiers, so unequal tiers still get
    // their ordering checked.
    let ranked: Vec<(u32, f64, f64)> = tiers
        .iter()
        .map(|(t, m)| {
            let (lo, hi) = min_max(m.iter().map(|(_, w)| *w));
            (*t, lo, hi)
        })
        .collect();
    for (i, &(critical_tier, critical_lo, _)) in ranked.iter().enumerate() {
        for &(lesser_tier, _, lesser_hi) in &ranked[i + 1..] {
            if lesser_hi > critical_lo - tol {
                violations.push(WeightViolation::TierOrder {
                    critical_tier,
                    critical_weight: critical_lo,
                    lesser_tier,
                    lesser_weight: lesser_hi,
                });
            }
        }
    }

    ValidationReport { violations }
}

fn min_max(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), w| {
        (lo.min(w), hi.max(w))
    })
}

/// Neumaier summation; keeps totals of decimal weights on the nearest double.
pub(crate) fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RawScore {
    pub score: f64,
    pub max: f64,
}

impl RawScore {
    pub fn new(score: f64, max: f64) -> Self {
        RawScore { score, max }
    }

    pub fn normalized(&self) -> f64 {
        self.score / self.max
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RawScoreVector {
    pub scores: BTreeMap<PropertyId, RawScore>,
}

impl RawScoreVector {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, id: PropertyId, score: f64, max: f64) -> &mut Self {
        self.scores.insert(id, RawScore { score, max });
        self
    }

    pub fn get(&self, id: &PropertyId) -> Option<&RawScore> {
        self.scores.get(id)
    }

    /// Builds a canonical vector from eight raw scores in canonical order.
    pub fn canonical(scores: [f64; 8]) -> Self {
        let mut v = Self::new();
        for (p, s) in PropertyId::CANONICAL.iter().zip(scores) {
            v.insert(p.clone(), s, canonical_max(p).unwrap_or(1.0));
        }
        v
    }

    /// Checks one property's score against its bounds.
    pub fn check(&self, id: &PropertyId) -> Result<RawScore> {
        let raw = *self
            .scores
            .get(id)
            .ok_or_else(|| Error::MissingScore(id.to_string()))?;
        if !(raw.max.is_finite() && raw.max > 0.0) {
            return Err(Error::InvalidMaximum {
                property: id.to_string(),
                max: raw.max,
            });
        }
        if !(raw.score.is_finite() && raw.score >= 0.0 && raw.score <= raw.max) {
            return Err(Error::ScoreOutOfRange {
                property: id.to_string(),
                score: raw.score,
                max: raw.max,
            });
        }
        Ok(raw)
    }
}

/// Maximum raw score of a canonical property.
pub fn canonical_max(id: &PropertyId) -> Option<f64> {
    match id {
        PropertyId::Explainability
        | PropertyId::Openness
        | PropertyId::Adaptivity
        | PropertyId::Auditing => Some(2.0),
        PropertyId::Safeguards => Some(1.0),
        PropertyId::Traceability | PropertyId::Ease => Some(10.0),
        PropertyId::ExplanationQuality => Some(50.0),
        PropertyId::Custom(_) => None,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Contribution {
    pub property: PropertyId,
    pub weight: f64,
    pub score: f64,
    pub max: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CasResult {
    /// In weight-configuration order.
    pub contributions: Vec<Contribution>,
    pub total: f64,
    pub config_fingerprint: String,
}

impl CasResult {
    pub fn contribution(&self, id: &PropertyId) -> Option<&Contribution> {
        self.contributions.iter().find(|c| &c.property == id)
    }

    pub fn contribution_map(&self) -> BTreeMap<PropertyId, f64> {
        self.contributions
            .iter()
            .map(|c| (c.property.clone(), c.value))
            .collect()
    }
}

/// Computes the weighted, normalized composite score.
///
/// Scores for properties absent from `config` are ignored.
pub fn compute_cas(scores: &RawScoreVector, config: &WeightConfig) -> Result<CasResult> {
    let report = validate_weights(config);
    if !report.is_ok() {
        return Err(Error::InvalidWeights(report));
    }
    let mut contributions = Vec::with_capacity(config.entries.len());
    for entry in &config.entries {
        let raw = scores.check(&entry.id)?;
        contributions.push(Contribution {
            property: entry.id.clone(),
            weight: entry.weight,
            score: raw.score,
            max: raw.max,
            value: entry.weight * (raw.score / raw.max),
        });
    }
    let total = compensated_sum(contributions.iter().map(|c| c.value)).clamp(0.0, 1.0);
    Ok(CasResult {
        contributions,
        total,
        config_fingerprint: config.fingerprint(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalGain {
    pub property: PropertyId,
    /// CAS gained per additional raw point.
    pub gain: f64,
}

/// Ranks properties by the CAS gained per raw point, highest first; ties keep
/// canonical order.
pub fn marginal_gains(
    config: &WeightConfig,
    maxima: &BTreeMap<PropertyId, f64>,
) -> Result<Vec<MarginalGain>> {
    let report = validate_weights(config);
    if !report.is_ok() {
        return Err(Error::InvalidWeights(report));
    }
    let mut gains = Vec::with_capacity(config.entries.len());
    for e in &config.entries {
        let max = *maxima
            .get(&e.id)
            .ok_or_else(|| Error::MissingScore(e.id.to_string()))?;
        if !(max.is_finite() && max > 0.0) {
            return Err(Error::InvalidMaximum {
                property: e.id.to_string(),
                max,
            });
        }
        gains.push(MarginalGain {
            property: e.id.clone(),
            gain: e.weight / max,
        });
    }
    gains.sort_by(|a, b| {
        b.gain
            .total_cmp(&a.gain)
            .then_with(|| a.property.cmp(&b.property))
    });
    Ok(gains)
}

/// Maxima of the eight canonical properties.
pub fn canonical_maxima() -> BTreeMap<PropertyId, f64> {
    PropertyId::CANONICAL
        .iter()
        .map(|p| (p.clone(), canonical_max(p).unwrap()))
        .collect()
}

/// Rounds half away from zero to three decimals, the precision used in reports.
pub fn round3(x: f64) -> f64 {
    (x * 1000.0).round() / 1000.0
}
