//! Contestability predicates over finite, enumerable instances.
//!
//! * explanation-level: every (decision, stakeholder) pair has at least one
//!   representation of the decision that is actionable for the stakeholder;
//! * system-level: every stakeholder has at least one successful contestation;
//! * aggregate: `alpha * [explanation-level] + beta * [system-level]
//!   + gamma * min over stakeholders of the success rate`.
//!
//! The two predicates enter the aggregate as 0/1 indicators.

use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::doc;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    ByDesign,
    PostHoc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Corrected,
    SystemAdapted,
    Rejected,
}

impl Outcome {
    pub fn is_success(self) -> bool {
        matches!(self, Outcome::Corrected | Outcome::SystemAdapted)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stakeholder {
    pub id: String,
    #[serde(default)]
    pub capabilities: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Representation {
    pub id: String,
    pub decision: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContestAction {
    pub id: String,
    pub mode: Mode,
}

/// Finite instance. `actionable` lists the (representation, stakeholder)
/// pairs that hold; every unlisted pair is false, so the relation is total.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawInstance", into = "RawInstance")]
pub struct ContestabilityInstance {
    decisions: Vec<String>,
    stakeholders: Vec<Stakeholder>,
    representations: Vec<Representation>,
    actionable: HashSet<(usize, usize)>,
    actions: Vec<ContestAction>,
    decision_index: HashMap<String, usize>,
    stakeholder_index: HashMap<String, usize>,
    action_index: HashMap<String, usize>,
    /// Representation indices per decision.
    explanations: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct RawInstance {
    decisions: Vec<String>,
    stakeholders: Vec<Stakeholder>,
    representations: Vec<Representation>,
    #[serde(default)]
    actionable: Vec<(String, String)>,
    actions: Vec<ContestAction>,
}

fn index_of(items: impl Iterator<Item = String>, what: &str) -> Result<HashMap<String, usize>> {
    let mut map = HashMap::new();
    for (i, id) in items.enumerate() {
        if map.insert(id.clone(), i).is_some() {
            return Err(Error::invalid(what, format!("duplicate id `{id}`")));
        }
    }
    if map.is_empty() {
        return Err(Error::invalid(what, "must not be empty"));
    }
    Ok(map)
}

impl TryFrom<RawInstance> for ContestabilityInstance {
    type Error = Error;

    fn try_from(raw: RawInstance) -> Result<Self> {
        let decision_index = index_of(raw.decisions.iter().cloned(), "instance.decisions")?;
        let stakeholder_index =
            index_of(raw.stakeholders.iter().map(|s| s.id.clone()), "instance.stakeholders")?;
        let action_index = index_of(raw.actions.iter().map(|a| a.id.clone()), "instance.actions")?;
        let rep_index = index_of(
            raw.representations.iter().map(|r| r.id.clone()),
            "instance.representations",
        )?;
        let mut explanations = vec![Vec::new(); raw.decisions.len()];
        for (i, r) in raw.representations.iter().enumerate() {
            let d = *decision_index.get(&r.decision).ok_or_else(|| {
                Error::invalid(
                    "instance.representations",
                    format!("`{}` refers to unknown decision `{}`", r.id, r.decision),
                )
            })?;
            explanations[d].push(i);
        }
        let mut actionable = HashSet::new();
        for (r, s) in &raw.actionable {
            let ri = *rep_index.get(r).ok_or_else(|| {
                Error::invalid("instance.actionable", format!("unknown representation `{r}`"))
            })?;
            let si = *stakeholder_index
                .get(s)
                .ok_or_else(|| Error::UnknownStakeholder(s.clone()))?;
            actionable.insert((ri, si));
        }
        Ok(ContestabilityInstance {
            decisions: raw.decisions,
            stakeholders: raw.stakeholders,
            representations: raw.representations,
            actionable,
            actions: raw.actions,
            decision_index,
            stakeholder_index,
            action_index,
            explanations,
        })
    }
}

impl From<ContestabilityInstance> for RawInstance {
    fn from(i: ContestabilityInstance) -> Self {
        let mut pairs: Vec<(usize, usize)> = i.actionable.iter().copied().collect();
        pairs.sort_unstable();
        RawInstance {
            actionable: pairs
                .into_iter()
                .map(|(r, s)| (i.representations[r].id.clone(), i.stakeholders[s].id.clone()))
                .collect(),
            decisions: i.decisions,
            stakeholders: i.stakeholders,
            representations: i.representations,
            actions: i.actions,
        }
    }
}

impl ContestabilityInstance {
    pub fn new(
        decisions: Vec<String>,
        stakeholders: Vec<Stakeholder>,
        representations: Vec<Representation>,
        actionable: Vec<(String, String)>,
        actions: Vec<ContestAction>,
    ) -> Result<Self> {
        RawInstance {
            decisions,
            stakeholders,
            representations,
            actionable,
            actions,
        }
        .try_into()
    }

    pub fn decisions(&self) -> &[String] {
        &self.decisions
    }

    pub fn stakeholders(&self) -> &[Stakeholder] {
        &self.stakeholders
    }

    pub fn representations(&self) -> &[Representation] {
        &self.representations
    }

    pub fn actions(&self) -> &[ContestAction] {
        &self.actions
    }

    /// Whether representation `rep` is actionable for stakeholder `stakeholder`.
    pub fn is_actionable(&self, rep: &str, stakeholder: &str) -> bool {
        let r = self.representations.iter().position(|x| x.id == rep);
        let s = self.stakeholder_index.get(stakeholder);
        match (r, s) {
            (Some(r), Some(s)) => self.actionable.contains(&(r, *s)),
            _ => false,
        }
    }

    /// Representations explaining `decision`.
    pub fn explanations_of(&self, decision: &str) -> impl Iterator<Item = &Representation> {
        let reps = self
            .decision_index
            .get(decision)
            .map(|d| self.explanations[*d].as_slice())
            .unwrap_or(&[]);
        reps.iter().map(|i| &self.representations[*i])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContestationEvent {
    pub stakeholder: String,
    pub decision: String,
    pub action: String,
    pub outcome: Outcome,
    /// Defaults to the mode of the referenced action; must match it when given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<String>,
}

/// Append-only record of contestation attempts over one instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LedgerDocument", into = "LedgerDocument")]
pub struct ContestationLedger {
    instance: ContestabilityInstance,
    events: Vec<ContestationEvent>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct LedgerDocument {
    #[serde(default = "doc::current_version")]
    schema_version: String,
    instance: ContestabilityInstance,
    #[serde(default)]
    events: Vec<ContestationEvent>,
}

impl TryFrom<LedgerDocument> for ContestationLedger {
    type Error = Error;
    fn try_from(d: LedgerDocument) -> Result<Self> {
        let mut ledger = ContestationLedger::new(d.instance);
        for (i, e) in d.events.into_iter().enumerate() {
            ledger.push(e).map_err(|err| match err {
                Error::Invalid { field, message } => Error::invalid(format!("events[{i}].{field}"), message),
                other => other,
            })?;
        }
        Ok(ledger)
    }
}

impl From<ContestationLedger> for LedgerDocument {
    fn from(l: ContestationLedger) -> Self {
        LedgerDocument {
            schema_version: doc::current_version(),
            instance: l.instance,
            events: l.events,
        }
    }
}

impl ContestationLedger {
    pub fn new(instance: ContestabilityInstance) -> Self {
        ContestationLedger {
            instance,
            events: Vec::new(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        doc::parse_document(text)
    }

    pub fn instance(&self) -> &ContestabilityInstance {
        &self.instance
    }

    pub fn events(&self) -> &[ContestationEvent] {
        &self.events
    }

    /// Appends an event after checking its references. The stored event
    /// always carries its resolved mode.
    pub fn push(&mut self, mut event: ContestationEvent) -> Result<()> {
        let inst = &self.instance;
        if !inst.stakeholder_index.contains_key(&event.stakeholder) {
            return Err(Error::UnknownStakeholder(event.stakeholder));
        }
        if !inst.decision_index.contains_key(&event.decision) {
            return Err(Error::invalid("decision", format!("unknown decision `{}`", event.decision)));
        }
        let action = inst
            .action_index
            .get(&event.action)
            .map(|i| &inst.actions[*i])
            .ok_or_else(|| Error::invalid("action", format!("unknown action `{}`", event.action)))?;
        match event.mode {
            Some(m) if m != action.mode => {
                return Err(Error::invalid(
                    "mode",
                    format!("event mode {m} differs from action `{}` mode {}", action.id, action.mode),
                ))
            }
            _ => event.mode = Some(action.mode),
        }
        self.events.push(event);
        Ok(())
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::ByDesign => "by_design",
            Mode::PostHoc => "post_hoc",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct XlcVerdict {
    pub holds: bool,
    /// First failing (decision, stakeholder) pair in instance order.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<(String, String)>,
}

pub fn evaluate_xlc(instance: &ContestabilityInstance) -> XlcVerdict {
    for (d, decision) in instance.decisions.iter().enumerate() {
        for (s, stakeholder) in instance.stakeholders.iter().enumerate() {
            let ok = instance.explanations[d]
                .iter()
                .any(|r| instance.actionable.contains(&(*r, s)));
            if !ok {
                return XlcVerdict {
                    holds: false,
                    counterexample: Some((decision.clone(), stakeholder.id.clone())),
                };
            }
        }
    }
    XlcVerdict {
        holds: true,
        counterexample: None,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlcVerdict {
    pub holds: bool,
    /// First stakeholder (instance order) without a successful contestation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub missing: Option<String>,
    /// When the predicate holds: each stakeholder's first successful event index.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub witnesses: Vec<(String, usize)>,
}

pub fn evaluate_slc(ledger: &ContestationLedger) -> SlcVerdict {
    let mut first_success: HashMap<&str, usize> = HashMap::new();
    for (i, e) in ledger.events.iter().enumerate() {
        if e.outcome.is_success() {
            first_success.entry(e.stakeholder.as_str()).or_insert(i);
        }
    }
    let mut witnesses = Vec::new();
    for s in &ledger.instance.stakeholders {
        match first_success.get(s.id.as_str()) {
            Some(i) => witnesses.push((s.id.clone(), *i)),
            None => {
                return SlcVerdict {
                    holds: false,
                    missing: Some(s.id.clone()),
                    witnesses: Vec::new(),
                }
            }
        }
    }
    SlcVerdict {
        holds: true,
        missing: None,
        witnesses,
    }
}

/// Exact `successes / attempts`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ratio {
    pub successes: u64,
    pub attempts: u64,
}

impl Ratio {
    pub fn value(&self) -> f64 {
        self.successes as f64 / self.attempts as f64
    }

    fn less_than(&self, other: &Ratio) -> bool {
        (self.successes as u128) * (other.attempts as u128) < (other.successes as u128) * (self.attempts as u128)
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.successes, self.attempts)
    }
}

/// `Ok(None)` when the stakeholder never contested: undefined, not zero.
pub fn success_rate(ledger: &ContestationLedger, stakeholder: &str) -> Result<Option<Ratio>> {
    if !ledger.instance.stakeholder_index.contains_key(stakeholder) {
        return Err(Error::UnknownStakeholder(stakeholder.to_string()));
    }
    let (attempts, successes) = ledger
        .events
        .iter()
        .filter(|e| e.stakeholder == stakeholder)
        .fold((0u64, 0u64), |(a, s), e| (a + 1, s + e.outcome.is_success() as u64));
    Ok((attempts > 0).then_some(Ratio { successes, attempts }))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AggregateWeights {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl Default for AggregateWeights {
    fn default() -> Self {
        AggregateWeights {
            alpha: 1.0 / 3.0,
            beta: 1.0 / 3.0,
            gamma: 1.0 / 3.0,
        }
    }
}

impl AggregateWeights {
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        let w = AggregateWeights { alpha, beta, gamma };
        w.check()?;
        Ok(w)
    }

    pub fn check(&self) -> Result<()> {
        let parts = [self.alpha, self.beta, self.gamma];
        if parts.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(Error::invalid("weights", "alpha, beta and gamma must be finite and non-negative"));
        }
        let sum: f64 = parts.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::invalid("weights", format!("alpha + beta + gamma = {sum}, expected 1")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateBreakdown {
    pub weights: AggregateWeights,
    pub xlc: XlcVerdict,
    pub slc: SlcVerdict,
    pub min_success_rate: Ratio,
    /// Stakeholder attaining the minimum (first in instance order on ties).
    pub min_stakeholder: String,
    pub value: f64,
}

pub fn aggregate_contest(ledger: &ContestationLedger, weights: AggregateWeights) -> Result<AggregateBreakdown> {
    weights.check()?;
    let mut min: Option<(Ratio, &str)> = None;
    for s in &ledger.instance.stakeholders {
        let rate = success_rate(ledger, &s.id)?.ok_or_else(|| Error::UndefinedSuccessRate(s.id.clone()))?;
        if min.is_none_or(|(m, _)| rate.less_than(&m)) {
            min = Some((rate, &s.id));
        }
    }
    let (min_rate, min_stakeholder) = min.expect("instance has stakeholders");
    let xlc = evaluate_xlc(&ledger.instance);
    let slc = evaluate_slc(ledger);
    let value = weights.alpha * indicator(xlc.holds)
        + weights.beta * indicator(slc.holds)
        + weights.gamma * min_rate.value();
    Ok(AggregateBreakdown {
        weights,
        xlc,
        slc,
        min_success_rate: min_rate,
        min_stakeholder: min_stakeholder.to_string(),
        value,
    })
}

pub(crate) fn indicator(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub attempts: u64,
    pub successes: u64,
}

impl Tally {
    fn add(&mut self, success: bool) {
        self.attempts += 1;
        self.successes += success as u64;
    }

    pub fn rate(&self) -> Option<f64> {
        (self.attempts > 0).then(|| self.successes as f64 / self.attempts as f64)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModeTallies {
    pub by_design: Tally,
    pub post_hoc: Tally,
    pub total: Tally,
}

pub fn partition_modes(ledger: &ContestationLedger) -> ModeTallies {
    let mut t = ModeTallies::default();
    for e in &ledger.events {
        let ok = e.outcome.is_success();
        match e.mode.expect("resolved on push") {
            Mode::ByDesign => t.by_design.add(ok),
            Mode::PostHoc => t.post_hoc.add(ok),
        }
        t.total.add(ok);
    }
    t
}

/// Everything the ledger evaluator reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerEvaluation {
    pub xlc: XlcVerdict,
    pub slc: SlcVerdict,
    /// Per stakeholder; `None` means undefined (no attempts).
    pub success_rates: Vec<(String, Option<Ratio>)>,
    pub modes: ModeTallies,
    /// Absent when some stakeholder never contested.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aggregate: Option<AggregateBreakdown>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aggregate_error: Option<String>,
}

pub fn evaluate_ledger(ledger: &ContestationLedger, weights: AggregateWeights) -> Result<LedgerEvaluation> {
    weights.check()?;
    let success_rates = ledger
        .instance
        .stakeholders
        .iter()
        .map(|s| Ok((s.id.clone(), success_rate(ledger, &s.id)?)))
        .collect::<Result<Vec<_>>>()?;
    let (aggregate, aggregate_error) = match aggregate_contest(ledger, weights) {
        Ok(a) => (Some(a), None),
        Err(e @ Error::UndefinedSuccessRate(_)) => (None, Some(e.to_string())),
        Err(e) => return Err(e),
    };
    Ok(LedgerEvaluation {
        xlc: evaluate_xlc(&ledger.instance),
        slc: evaluate_slc(ledger),
        success_rates,
        modes: partition_modes(ledger),
        aggregate,
        aggregate_error,
    })
}

impl LedgerEvaluation {
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let yes = |b: bool| if b { "holds" } else { "fails" };
        out.push_str(&format!("explanation-level contestability: {}", yes(self.xlc.holds)));
        if let Some((d, s)) = &self.xlc.counterexample {
            out.push_str(&format!(" (decision `{d}`, stakeholder `{s}`)"));
        }
        out.push('\n');
        out.push_str(&format!("system-level contestability: {}", yes(self.slc.holds)));
        if let Some(s) = &self.slc.missing {
            out.push_str(&format!(" (no successful contestation by `{s}`)"));
        }
        out.push('\n');
        out.push_str("success rates:\n");
        for (s, r) in &self.success_rates {
            match r {
                Some(r) => out.push_str(&format!("  {s}: {r} = {:.3}\n", r.value())),
                None => out.push_str(&format!("  {s}: undefined (no attempts)\n")),
            }
        }
        let m = &self.modes;
        out.push_str(&format!(
            "modes: by_design {}/{} successes, post_hoc {}/{} successes, total {}/{}\n",
            m.by_design.successes,
            m.by_design.attempts,
            m.post_hoc.successes,
            m.post_hoc.attempts,
            m.total.successes,
            m.total.attempts
        ));
        match (&self.aggregate, &self.aggregate_error) {
            (Some(a), _) => out.push_str(&format!(
                "aggregate: {:.3} = {:.3}*{} + {:.3}*{} + {:.3}*({}) (min at `{}`)\n",
                a.value,
                a.weights.alpha,
                indicator(a.xlc.holds),
                a.weights.beta,
                indicator(a.slc.holds),
                a.weights.gamma,
                a.min_success_rate,
                a.min_stakeholder
            )),
            (None, Some(e)) => out.push_str(&format!("aggregate: unavailable: {e}\n")),
            (None, None) => {}
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(prefix: &str, n: usize) -> Vec<String> {
        (0..n).map(|i| format!("{prefix}{i}")).collect()
    }

    /// Two decisions, two stakeholders, one representation per decision.
    fn small(actionable: &[(&str, &str)]) -> ContestabilityInstance {
        ContestabilityInstance::new(
            ids("d", 2),
            ids("s", 2)
                .into_iter()
                .map(|id| Stakeholder {
                    id,
                    capabilities: vec![],
                })
                .collect(),
            vec![
                Representation {
                    id: "r0".into(),
                    decision: "d0".into(),
                },
                Representation {
                    id: "r1".into(),
                    decision: "d1".into(),
                },
            ],
            actionable.iter().map(|(r, s)| (r.to_string(), s.to_string())).collect(),
            vec![
                ContestAction {
                    id: "appeal".into(),
                    mode: Mode::PostHoc,
                },
                ContestAction {
                    id: "override".into(),
                    mode: Mode::ByDesign,
                },
            ],
        )
        .unwrap()
    }

    fn event(s: &str, action: &str, outcome: Outcome) -> ContestationEvent {
        ContestationEvent {
            stakeholder: s.into(),
            decision: "d0".into(),
            action: action.into(),
            outcome,
            mode: None,
            timestamp: None,
        }
    }

    const ALL: [(&str, &str); 4] = [("r0", "s0"), ("r0", "s1"), ("r1", "s0"), ("r1", "s1")];

    #[test]
    fn xlc_universal_and_counterexample() {
        assert!(evaluate_xlc(&small(&ALL)).holds);
        let v = evaluate_xlc(&small(&ALL[..3]));
        assert!(!v.holds);
        assert_eq!(v.counterexample, Some(("d1".into(), "s1".into())));
    }

    #[test]
    fn slc_cases() {
        let mut l = ContestationLedger::new(small(&ALL));
        l.push(event("s0", "appeal", Outcome::Corrected)).unwrap();
        l.push(event("s1", "override", Outcome::SystemAdapted)).unwrap();
        let v = evaluate_slc(&l);
        assert!(v.holds);
        assert_eq!(v.witnesses, vec![("s0".into(), 0), ("s1".into(), 1)]);

        let mut l = ContestationLedger::new(small(&ALL));
        l.push(event("s0", "appeal", Outcome::Corrected)).unwrap();
        l.push(event("s1", "appeal", Outcome::Rejected)).unwrap();
        l.push(event("s1", "appeal", Outcome::Rejected)).unwrap();
        let v = evaluate_slc(&l);
        assert!(!v.holds);
        assert_eq!(v.missing.as_deref(), Some("s1"));
    }

    #[test]
    fn success_rates() {
        let mut l = ContestationLedger::new(small(&ALL));
        for o in [Outcome::Corrected, Outcome::Rejected, Outcome::SystemAdapted] {
            l.push(event("s0", "appeal", o)).unwrap();
        }
        let r = success_rate(&l, "s0").unwrap().unwrap();
        assert_eq!((r.successes, r.attempts), (2, 3));
        assert_eq!(success_rate(&l, "s1").unwrap(), None);
        assert!(matches!(success_rate(&l, "nobody"), Err(Error::UnknownStakeholder(_))));
    }

    #[test]
    fn aggregate_examples() {
        let w = AggregateWeights::default();
        let mut l = ContestationLedger::new(small(&ALL));
        l.push(event("s0", "appeal", Outcome::Corrected)).unwrap();
        l.push(event("s1", "appeal", Outcome::Corrected)).unwrap();
        assert!((aggregate_contest(&l, w).unwrap().value - 1.0).abs() < 1e-12);

        // Success for each, but one stakeholder also failed once: min SR 1/2.
        l.push(event("s1", "appeal", Outcome::Rejected)).unwrap();
        let a = aggregate_contest(&l, w).unwrap();
        assert_eq!(a.min_stakeholder, "s1");
        assert!((a.value - (2.0 / 3.0 + 1.0 / 6.0)).abs() < 1e-12);

        // XLC holds, s0 never succeeds: SLC fails and the minimum SR is 0.
        let mut l = ContestationLedger::new(small(&ALL));
        l.push(event("s0", "appeal", Outcome::Rejected)).unwrap();
        l.push(event("s1", "appeal", Outcome::Corrected)).unwrap();
        let a = aggregate_contest(&l, w).unwrap();
        assert!((a.value - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn aggregate_needs_every_stakeholder() {
        let mut l = ContestationLedger::new(small(&ALL));
        l.push(event("s0", "appeal", Outcome::Corrected)).unwrap();
        assert!(matches!(
            aggregate_contest(&l, AggregateWeights::default()),
            Err(Error::UndefinedSuccessRate(s)) if s == "s1"
        ));
        assert!(AggregateWeights::new(0.5, 0.5, 0.5).is_err());
        assert!(AggregateWeights::new(-0.1, 0.6, 0.5).is_err());
    }

    #[test]
    fn mode_partition() {
        let mut l = ContestationLedger::new(small(&ALL));
        for o in [Outcome::Corrected, Outcome::Corrected, Outcome::Rejected] {
            l.push(event("s0", "override", o)).unwrap();
        }
        let t = partition_modes(&l);
        assert_eq!(t.post_hoc, Tally::default());
        for o in [Outcome::Corrected, Outcome::Rejected] {
            l.push(event("s1", "appeal", o)).unwrap();
        }
        let t = partition_modes(&l);
        assert_eq!((t.by_design.attempts, t.by_design.successes), (3, 2));
        assert_eq!((t.post_hoc.attempts, t.post_hoc.successes), (2, 1));
        assert_eq!((t.total.attempts, t.total.successes), (5, 3));
    }

    #[test]
    fn bad_references_are_rejected() {
        let mut l = ContestationLedger::new(small(&ALL));
        assert!(l.push(event("x", "appeal", Outcome::Corrected)).is_err());
        assert!(l.push(event("s0", "nope", Outcome::Corrected)).is_err());
        let mut e = event("s0", "appeal", Outcome::Corrected);
        e.mode = Some(Mode::ByDesign);
        assert!(l.push(e).is_err());
        assert!(ContestabilityInstance::new(vec![], vec![], vec![], vec![], vec![]).is_err());
    }

    #[test]
    fn ledger_json_round_trip() {
        let mut l = ContestationLedger::new(small(&ALL[..2]));
        l.push(event("s0", "appeal", Outcome::Corrected)).unwrap();
        let text = serde_json::to_string(&l).unwrap();
        assert!(text.contains("\"schema_version\":\"1\""));
        let back = ContestationLedger::from_json(&text).unwrap();
        assert_eq!(back, l);
    }
}
