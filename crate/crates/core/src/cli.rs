//! `cas` command-line front end. Exit codes: 0 success, 1 invalid input,
//! 2 usage error.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::Value;

use crate::doc;
use crate::error::{Error, Result};
use crate::formal::{evaluate_ledger, AggregateWeights, ContestationLedger};
use crate::questionnaire::{score_assessment, AnswerSheet, ScoredAssessment};
use crate::report::{radar_csv, radar_data, render_comparison, render_report, ReportBundle, ReportFormat};
use crate::scoring::WeightConfig;
use crate::store::WorkspaceStore;
use crate::taxonomy::{ClassificationInput, Level, Reliance, Taxonomy, Thresholds};
use crate::whatif::{compare_systems, rank_interventions, BaselineRef, ScenarioDocument};

#[derive(Debug, Parser)]
#[command(name = "cas", version, about = "Contestability assessment scoring toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Markdown,
    Json,
    Csv,
}

impl From<Format> for ReportFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Markdown => ReportFormat::Markdown,
            Format::Json => ReportFormat::Json,
            Format::Csv => ReportFormat::Csv,
        }
    }
}

#[derive(Debug, Args)]
struct WeightsArg {
    /// Weight configuration file (defaults to the shipped weights)
    #[arg(long, value_name = "FILE")]
    weights: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ThresholdArgs {
    /// CAS below this is low contestability
    #[arg(long, default_value_t = 1.0 / 3.0)]
    low: f64,
    /// CAS at or above this is high contestability
    #[arg(long, default_value_t = 2.0 / 3.0)]
    high: f64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print a blank answer sheet
    Template,
    /// Score an answer sheet
    Score {
        sheet: PathBuf,
        #[command(flatten)]
        weights: WeightsArg,
        #[arg(long, value_enum, default_value = "markdown")]
        format: Format,
    },
    /// Apply a scenario to its baseline and print the comparison
    Whatif {
        scenario: PathBuf,
        #[command(flatten)]
        weights: WeightsArg,
        #[arg(long, value_enum, default_value = "markdown")]
        format: Format,
        /// Workspace used to resolve `{"id": ...}` baselines
        #[arg(long, env = "CAS_WORKSPACE")]
        workspace: Option<PathBuf>,
    },
    /// Rank a scenario's modifications as single-step interventions
    Rank {
        scenario: PathBuf,
        #[command(flatten)]
        weights: WeightsArg,
        #[arg(long)]
        json: bool,
        #[arg(long, env = "CAS_WORKSPACE")]
        workspace: Option<PathBuf>,
    },
    /// Query the reliance x contestability matrix
    Taxonomy {
        #[arg(long, requires = "level")]
        reliance: Option<Reliance>,
        #[arg(long, requires = "reliance")]
        level: Option<Level>,
        /// Place a scored sheet in the matrix
        #[arg(long, value_name = "SHEET", conflicts_with_all = ["level", "csv"])]
        classify: Option<PathBuf>,
        /// Print the criteria catalog as CSV
        #[arg(long)]
        csv: bool,
        #[command(flatten)]
        thresholds: ThresholdArgs,
        #[command(flatten)]
        weights: WeightsArg,
    },
    /// Contestation ledger operations
    Ledger {
        #[command(subcommand)]
        command: LedgerCommand,
    },
    /// Render a full report for a sheet
    Report {
        sheet: PathBuf,
        #[arg(long, value_enum, default_value = "markdown")]
        format: Format,
        /// Scenario files to add as columns
        #[arg(long = "scenario", value_name = "FILE")]
        scenarios: Vec<PathBuf>,
        /// Ledger file to evaluate in a formal section
        #[arg(long)]
        ledger: Option<PathBuf>,
        #[command(flatten)]
        thresholds: ThresholdArgs,
        #[command(flatten)]
        weights: WeightsArg,
        #[arg(long, env = "CAS_WORKSPACE")]
        workspace: Option<PathBuf>,
    },
    /// Check any document (sheet, scenario, ledger, weights, taxonomy)
    Validate { file: PathBuf },
    /// Print the default weight configuration
    Weights,
    /// Side-by-side comparison of several sheets
    Compare {
        #[arg(required = true)]
        sheets: Vec<PathBuf>,
        #[command(flatten)]
        weights: WeightsArg,
    },
    /// Radar-chart data for one or more sheets
    Radar {
        #[arg(required = true)]
        sheets: Vec<PathBuf>,
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        weights: WeightsArg,
    },
    /// Run the HTTP API
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: SocketAddr,
        #[arg(long, env = "CAS_WORKSPACE", default_value = "cas-workspace")]
        workspace: PathBuf,
        /// Directory of static UI assets to serve
        #[arg(long)]
        static_dir: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
enum LedgerCommand {
    /// Evaluate the contestability predicates over a ledger
    Eval {
        file: PathBuf,
        #[arg(long, requires_all = ["beta", "gamma"])]
        alpha: Option<f64>,
        #[arg(long, requires_all = ["alpha", "gamma"])]
        beta: Option<f64>,
        #[arg(long, requires_all = ["alpha", "beta"])]
        gamma: Option<f64>,
        #[arg(long)]
        json: bool,
    },
}

impl clap::ValueEnum for Reliance {
    fn value_variants<'a>() -> &'a [Self] {
        &crate::taxonomy::RELIANCES
    }
    fn to_possible_value(&self) -> Option<clap::builder::PossibleValue> {
        Some(clap::builder::PossibleValue::new(self.as_str()))
    }
}

impl clap::ValueEnum for Level {
    fn value_variants<'a>() -> &'a [Self] {
        &crate::taxonomy::LEVELS
    }
    fn to_possible_value(&self) -> Option<clap::builder::PossibleValue> {
        Some(clap::builder::PossibleValue::new(self.as_str()))
    }
}

/// Runs the CLI and returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    0
                }
                _ => {
                    let _ = write!(err, "{text}");
                    2
                }
            };
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path)
        .map_err(|e| Error::invalid(path.display().to_string(), format!("cannot read file: {e}")))
}

/// Prefixes an error with the file it came from, keeping line/column detail.
fn in_file<T>(path: &Path, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Io(_) => e,
        other => Error::invalid(path.display().to_string(), other.to_string()),
    })
}

fn load_weights(arg: &WeightsArg) -> Result<WeightConfig> {
    match &arg.weights {
        None => Ok(WeightConfig::default_config().clone()),
        Some(p) => {
            let w = in_file(p, WeightConfig::from_json(&read(p)?))?;
            let report = w.validate();
            if !report.is_ok() {
                return in_file(p, Err(Error::InvalidWeights(report)));
            }
            Ok(w)
        }
    }
}

fn load_sheet(path: &Path) -> Result<AnswerSheet> {
    let sheet = in_file(path, AnswerSheet::from_json(&read(path)?))?;
    if let Some(e) = sheet.validate().into_iter().next() {
        return in_file(path, Err(e));
    }
    Ok(sheet)
}

fn score_file(path: &Path, weights: &WeightConfig) -> Result<ScoredAssessment> {
    in_file(path, score_assessment(&load_sheet(path)?, weights))
}

fn load_scenario(path: &Path, workspace: Option<&Path>) -> Result<(ScenarioDocument, AnswerSheet)> {
    let d = in_file(path, ScenarioDocument::from_json(&read(path)?))?;
    let sheet = match in_file(path, d.baseline_ref())? {
        BaselineRef::Sheet { sheet } => (**sheet).clone(),
        BaselineRef::Path { path: p } => {
            let base = path.parent().unwrap_or(Path::new("."));
            load_sheet(&base.join(p))?
        }
        BaselineRef::Id { id } => {
            let root = workspace.ok_or_else(|| {
                Error::invalid("baseline", format!("`{id}` is a workspace id; pass --workspace or set CAS_WORKSPACE"))
            })?;
            WorkspaceStore::open(root)?.get_sheet(id).map_err(|e| match e {
                Error::NotFound(id) => Error::invalid("baseline", format!("no stored assessment `{id}`")),
                other => other,
            })?
        }
    };
    Ok((d, sheet))
}

fn json_line(out: &mut dyn Write, v: &impl serde::Serialize) -> Result<()> {
    out.write_all(doc::to_pretty_json(v)?.as_bytes())?;
    Ok(())
}

fn dispatch(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Template => json_line(out, &AnswerSheet::template())?,
        Command::Weights => out.write_all(WeightConfig::default_json().as_bytes())?,
        Command::Score { sheet, weights, format } => {
            let w = load_weights(&weights)?;
            let scored = score_file(&sheet, &w)?;
            match format {
                Format::Json => json_line(out, &scored)?,
                f => out.write_all(render_report(&ReportBundle::new(scored), f.into())?.as_bytes())?,
            }
        }
        Command::Whatif {
            scenario,
            weights,
            format,
            workspace,
        } => {
            let w = load_weights(&weights)?;
            let (d, sheet) = load_scenario(&scenario, workspace.as_deref())?;
            let (baseline, result) = in_file(&scenario, d.evaluate(&sheet, &w))?;
            let bundle = ReportBundle::new(baseline).with_scenario(result, d.published_total());
            out.write_all(render_report(&bundle, format.into())?.as_bytes())?;
        }
        Command::Rank {
            scenario,
            weights,
            json,
            workspace,
        } => {
            let w = load_weights(&weights)?;
            let (d, sheet) = load_scenario(&scenario, workspace.as_deref())?;
            let baseline = score_assessment(&sheet, &w)?;
            let ranked = in_file(&scenario, rank_interventions(&baseline, &d.modifications, &w))?;
            if json {
                json_line(out, &ranked)?;
            } else {
                writeln!(out, "baseline CAS {:.3}\n", baseline.cas.total)?;
                writeln!(out, "| Rank | Property | Change | Feasibility | New CAS | Delta |")?;
                writeln!(out, "|---:|---|---|---|---:|---:|")?;
                for (i, r) in ranked.iter().enumerate() {
                    let m = &r.modification;
                    writeln!(
                        out,
                        "| {} | {} | {} -> {} | {} | {:.3} | {:+.4} |",
                        i + 1,
                        m.property,
                        crate::report::fmt_points(r.baseline_score),
                        crate::report::fmt_points(m.new_raw_score),
                        m.feasibility,
                        r.new_total,
                        r.delta
                    )?;
                }
            }
        }
        Command::Taxonomy {
            reliance,
            level,
            classify,
            csv,
            thresholds,
            weights,
        } => {
            let t = Taxonomy::builtin();
            let th = Thresholds {
                low: thresholds.low,
                high: thresholds.high,
            };
            if csv {
                out.write_all(t.to_csv()?.as_bytes())?;
            } else if let Some(path) = classify {
                let w = load_weights(&weights)?;
                let sheet = load_sheet(&path)?;
                let scored = score_assessment(&sheet, &w)?;
                let reliance = reliance
                    .or(sheet.metadata.reliance)
                    .ok_or_else(|| Error::invalid("metadata.reliance", "not set; pass --reliance"))?;
                let input = ClassificationInput {
                    reliance,
                    cas_total: Some(scored.cas.total),
                    level_override: None,
                };
                let c = t.classify(&input, th)?;
                let bundle = ReportBundle::new(scored).with_taxonomy(c, t);
                let md = render_report(&bundle, ReportFormat::Markdown)?;
                let section = md.find("## Taxonomy placement").map(|i| &md[i..]).unwrap_or(&md);
                let section = section.find("\n## ").map(|j| &section[..j + 1]).unwrap_or(section);
                writeln!(out, "CAS {:.3}\n", bundle.assessment.cas.total)?;
                out.write_all(section.as_bytes())?;
            } else if let (Some(r), Some(l)) = (reliance, level) {
                let cell = t.cell(r, l);
                writeln!(out, "reliance {r}, contestability {l}")?;
                if cell.flags.contains(&crate::taxonomy::CellFlag::RegulatoryWarning) {
                    writeln!(out, "warning: high AI reliance with low contestability")?;
                }
                writeln!(out)?;
                for c in t.resolve_requirements(r, l) {
                    let dims: Vec<&str> = c.dimensions.iter().map(|d| d.as_str()).collect();
                    writeln!(out, "- {} [{}; {}]", c.name, t.cluster_name(c.cluster), dims.join(", "))?;
                }
            } else {
                out.write_all(t.render_grid().as_bytes())?;
            }
        }
        Command::Ledger {
            command:
                LedgerCommand::Eval {
                    file,
                    alpha,
                    beta,
                    gamma,
                    json,
                },
        } => {
            let weights = match (alpha, beta, gamma) {
                (Some(a), Some(b), Some(g)) => AggregateWeights::new(a, b, g)?,
                _ => AggregateWeights::default(),
            };
            let ledger = in_file(&file, ContestationLedger::from_json(&read(&file)?))?;
            let eval = evaluate_ledger(&ledger, weights)?;
            if json {
                json_line(out, &eval)?;
            } else {
                out.write_all(eval.render_text().as_bytes())?;
            }
        }
        Command::Report {
            sheet,
            format,
            scenarios,
            ledger,
            thresholds,
            weights,
            workspace,
        } => {
            let w = load_weights(&weights)?;
            let answer = load_sheet(&sheet)?;
            let scored = score_assessment(&answer, &w)?;
            let mut bundle = ReportBundle::new(scored.clone());
            for path in &scenarios {
                let (d, base) = load_scenario(path, workspace.as_deref())?;
                if base.content_id() != answer.content_id() {
                    return Err(Error::invalid(
                        path.display().to_string(),
                        "scenario baseline is a different sheet from the report's",
                    ));
                }
                let (_, r) = in_file(path, d.evaluate(&base, &w))?;
                bundle = bundle.with_scenario(r, d.published_total());
            }
            if let Some(reliance) = answer.metadata.reliance {
                let t = Taxonomy::builtin();
                let input = ClassificationInput {
                    reliance,
                    cas_total: Some(scored.cas.total),
                    level_override: None,
                };
                let th = Thresholds {
                    low: thresholds.low,
                    high: thresholds.high,
                };
                bundle = bundle.with_taxonomy(t.classify(&input, th)?, t);
            }
            if let Some(path) = ledger {
                let l = in_file(&path, ContestationLedger::from_json(&read(&path)?))?;
                bundle = bundle.with_ledger(evaluate_ledger(&l, AggregateWeights::default())?);
            }
            out.write_all(render_report(&bundle, format.into())?.as_bytes())?;
        }
        Command::Validate { file } => return validate(&file, out, err),
        Command::Compare { sheets, weights } => {
            let w = load_weights(&weights)?;
            let scored = sheets.iter().map(|p| score_file(p, &w)).collect::<Result<Vec<_>>>()?;
            out.write_all(render_comparison(&compare_systems(&scored)?).as_bytes())?;
        }
        Command::Radar { sheets, json, weights } => {
            let w = load_weights(&weights)?;
            let scored = sheets.iter().map(|p| score_file(p, &w)).collect::<Result<Vec<_>>>()?;
            let series = radar_data(&compare_systems(&scored)?);
            if json {
                json_line(out, &series)?;
            } else {
                out.write_all(radar_csv(&series)?.as_bytes())?;
            }
        }
        Command::Serve {
            addr,
            workspace,
            static_dir,
        } => {
            let store = WorkspaceStore::open(&workspace)?;
            let state = crate::http::AppState::new(store);
            let rt = tokio::runtime::Runtime::new()?;
            writeln!(err, "listening on http://{addr} (workspace {})", workspace.display())?;
            rt.block_on(crate::http::serve(addr, state, static_dir))?;
        }
    }
    Ok(0)
}

/// Guesses the document type from its top-level keys.
fn validate(path: &Path, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let text = read(path)?;
    let value: Value = in_file(path, serde_json::from_str(&text).map_err(Error::from))?;
    let has = |k: &str| value.get(k).is_some();
    let (kind, issues): (&str, Vec<Error>) = if has("instance") {
        ("ledger", ContestationLedger::from_json(&text).err().into_iter().collect())
    } else if has("policy") {
        ("scenario", ScenarioDocument::from_json(&text).err().into_iter().collect())
    } else if has("entries") {
        let issues = match WeightConfig::from_json(&text) {
            Ok(w) => {
                let r = w.validate();
                if r.is_ok() {
                    vec![]
                } else {
                    vec![Error::InvalidWeights(r)]
                }
            }
            Err(e) => vec![e],
        };
        ("weight configuration", issues)
    } else if has("clusters") {
        ("taxonomy", Taxonomy::from_json(&text).err().into_iter().collect())
    } else {
        let issues = match AnswerSheet::from_json(&text) {
            Ok(s) => s.validate(),
            Err(e) => vec![e],
        };
        ("answer sheet", issues)
    };
    if issues.is_empty() {
        writeln!(out, "{}: valid {kind}", path.display())?;
        Ok(0)
    } else {
        for e in &issues {
            match e.field() {
                Some(f) => writeln!(err, "{}: {kind}: [{f}] {e}", path.display())?,
                None => writeln!(err, "{}: {kind}: {e}", path.display())?,
            }
        }
        Ok(1)
    }
}
