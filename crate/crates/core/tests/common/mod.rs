//! Generators and brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use cas_core::formal::{
    AggregateWeights, ContestAction, ContestabilityInstance, ContestationEvent, ContestationLedger, Mode, Outcome,
    Representation, Stakeholder,
};
use cas_core::scoring::{canonical_max, PropertyId, WeightConfig};
use rand::Rng;

pub const OUTCOMES: [Outcome; 3] = [Outcome::Corrected, Outcome::SystemAdapted, Outcome::Rejected];

/// Plain description of a formal-model instance, kept alongside the built
/// ledger so the oracle never looks at the implementation's data.
#[derive(Debug, Clone)]
pub struct FormalCase {
    pub decisions: usize,
    pub stakeholders: usize,
    /// Decision index of each representation.
    pub reps: Vec<usize>,
    /// `actionable[r][s]`.
    pub actionable: Vec<Vec<bool>>,
    pub actions: Vec<Mode>,
    /// (stakeholder, decision, action, outcome)
    pub events: Vec<(usize, usize, usize, Outcome)>,
}

impl FormalCase {
    pub fn random(rng: &mut impl Rng) -> Self {
        let decisions = rng.gen_range(1..=5);
        let stakeholders = rng.gen_range(1..=5);
        let reps: Vec<usize> = (0..rng.gen_range(1..=8)).map(|_| rng.gen_range(0..decisions)).collect();
        // Bias towards dense relations so both verdicts occur often.
        let density = rng.gen_range(0.3..1.0);
        let actionable = reps
            .iter()
            .map(|_| (0..stakeholders).map(|_| rng.gen_bool(density)).collect())
            .collect();
        let actions = (0..rng.gen_range(1..=3))
            .map(|_| if rng.gen_bool(0.5) { Mode::ByDesign } else { Mode::PostHoc })
            .collect::<Vec<_>>();
        let n_events = rng.gen_range(0..=15);
        let events = (0..n_events)
            .map(|_| {
                (
                    rng.gen_range(0..stakeholders),
                    rng.gen_range(0..decisions),
                    rng.gen_range(0..actions.len()),
                    OUTCOMES[rng.gen_range(0..3)],
                )
            })
            .collect();
        FormalCase {
            decisions,
            stakeholders,
            reps,
            actionable,
            actions,
            events,
        }
    }

    pub fn ledger(&self) -> ContestationLedger {
        let instance = ContestabilityInstance::new(
            (0..self.decisions).map(|d| format!("d{d}")).collect(),
            (0..self.stakeholders)
                .map(|s| Stakeholder {
                    id: format!("s{s}"),
                    capabilities: vec![],
                })
                .collect(),
            self.reps
                .iter()
                .enumerate()
                .map(|(r, d)| Representation {
                    id: format!("r{r}"),
                    decision: format!("d{d}"),
                })
                .collect(),
            self.actionable
                .iter()
                .enumerate()
                .flat_map(|(r, row)| {
                    row.iter()
                        .enumerate()
                        .filter(|(_, ok)| **ok)
                        .map(move |(s, _)| (format!("r{r}"), format!("s{s}")))
                })
                .collect(),
            self.actions
                .iter()
                .enumerate()
                .map(|(i, m)| ContestAction {
                    id: format!("a{i}"),
                    mode: *m,
                })
                .collect(),
        )
        .expect("generated instance is well formed");
        let mut ledger = ContestationLedger::new(instance);
        for (s, d, a, o) in &self.events {
            ledger
                .push(ContestationEvent {
                    stakeholder: format!("s{s}"),
                    decision: format!("d{d}"),
                    action: format!("a{a}"),
                    outcome: *o,
                    mode: None,
                    timestamp: None,
                })
                .expect("generated event is well formed");
        }
        ledger
    }

    pub fn oracle_xlc(&self) -> bool {
        (0..self.decisions).all(|d| {
            (0..self.stakeholders).all(|s| (0..self.reps.len()).any(|r| self.reps[r] == d && self.actionable[r][s]))
        })
    }

    pub fn oracle_slc(&self) -> bool {
        (0..self.stakeholders).all(|s| {
            self.events
                .iter()
                .any(|(es, _, _, o)| *es == s && matches!(o, Outcome::Corrected | Outcome::SystemAdapted))
        })
    }

    /// `(successes, attempts)` per stakeholder.
    pub fn oracle_counts(&self) -> Vec<(u64, u64)> {
        (0..self.stakeholders)
            .map(|s| {
                let mine: Vec<_> = self.events.iter().filter(|e| e.0 == s).collect();
                let ok = mine.iter().filter(|e| e.3 != Outcome::Rejected).count();
                (ok as u64, mine.len() as u64)
            })
            .collect()
    }

    /// `None` when some stakeholder never contested.
    pub fn oracle_aggregate(&self, w: AggregateWeights) -> Option<f64> {
        let counts = self.oracle_counts();
        if counts.iter().any(|(_, n)| *n == 0) {
            return None;
        }
        let min = counts
            .iter()
            .map(|(k, n)| *k as f64 / *n as f64)
            .fold(f64::INFINITY, f64::min);
        let ind = |b: bool| if b { 1.0 } else { 0.0 };
        Some(w.alpha * ind(self.oracle_xlc()) + w.beta * ind(self.oracle_slc()) + w.gamma * min)
    }
}

/// Direct evaluation of the weighted sum, in canonical order.
pub fn brute_cas(config: &WeightConfig, scores: &[f64; 8]) -> f64 {
    let mut total = 0.0;
    for (p, s) in PropertyId::CANONICAL.iter().zip(scores) {
        let w = config.weight_of(p).unwrap();
        total += w * s / canonical_max(p).unwrap();
    }
    total
}

pub fn canonical_maxima() -> [f64; 8] {
    let mut m = [0.0; 8];
    for (i, p) in PropertyId::CANONICAL.iter().enumerate() {
        m[i] = canonical_max(p).unwrap();
    }
    m
}

/// Uniform raw scores; explanation quality may be a half point (two raters).
pub fn random_scores(rng: &mut impl Rng) -> [f64; 8] {
    let max = canonical_maxima();
    let mut s = [0.0; 8];
    for i in 0..8 {
        s[i] = rng.gen_range(0..=max[i] as u32) as f64;
    }
    if s[7] < max[7] && rng.gen_bool(0.3) {
        s[7] += 0.5;
    }
    s
}

/// A case-1 assessment with its raw scores replaced by `scores`.
pub fn assessment_with(scores: [f64; 8]) -> cas_core::questionnaire::ScoredAssessment {
    let config = WeightConfig::default_config();
    let sheet = cas_core::fixtures::sheet("case1").unwrap();
    let mut a = cas_core::questionnaire::score_assessment(&sheet, config).unwrap();
    a.raw = cas_core::RawScoreVector::canonical(scores);
    a.cas = cas_core::compute_cas(&a.raw, config).unwrap();
    a
}
