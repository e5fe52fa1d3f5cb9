//! Bundled case-study documents: three answer sheets, their highly- and
//! moderately-feasible scenarios, and a sample contestation ledger.

use crate::error::{Error, Result};
use crate::questionnaire::AnswerSheet;
use crate::whatif::ScenarioDocument;

/// (file name, contents) for every bundled document.
pub const FILES: &[(&str, &str)] = &[
    ("case1.json", include_str!("../fixtures/case1.json")),
    ("case1_hf.json", include_str!("../fixtures/case1_hf.json")),
    ("case1_mf.json", include_str!("../fixtures/case1_mf.json")),
    ("case2.json", include_str!("../fixtures/case2.json")),
    ("case2_hf.json", include_str!("../fixtures/case2_hf.json")),
    ("case2_mf.json", include_str!("../fixtures/case2_mf.json")),
    ("case3.json", include_str!("../fixtures/case3.json")),
    ("case3_hf.json", include_str!("../fixtures/case3_hf.json")),
    ("case3_mf.json", include_str!("../fixtures/case3_mf.json")),
    ("ledger_loans.json", include_str!("../fixtures/ledger_loans.json")),
];

pub const CASES: [&str; 3] = ["case1", "case2", "case3"];

pub fn text(file: &str) -> Result<&'static str> {
    FILES
        .iter()
        .find(|(name, _)| *name == file)
        .map(|(_, text)| *text)
        .ok_or_else(|| Error::NotFound(file.to_string()))
}

/// Baseline sheet of a case, e.g. `sheet("case1")`.
pub fn sheet(case: &str) -> Result<AnswerSheet> {
    AnswerSheet::from_json(text(&format!("{case}.json"))?)
}

/// Scenario of a case; `tier` is `"hf"` or `"mf"`.
pub fn scenario(case: &str, tier: &str) -> Result<ScenarioDocument> {
    ScenarioDocument::from_json(text(&format!("{case}_{tier}.json"))?)
}
