//! Mutation oracle: a pair is a fix when neutralizing its declaration
//! removes the failure without introducing any new one.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::Pair;
use crate::css::{parse_declarations, parse_stylesheet, to_css, Declaration, Origin};
use crate::detection::{detect, DetectConfig, FailureReport, RlfType};
use crate::localization::{Candidate, CandidateKind};
use crate::snapshot::{load_bundle, CaptureBundle, DomNode, SnapshotError, StylesheetSource};

pub const MUTATIONS_FILE: &str = "mutations.json";
pub const MUTATIONS_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("capture unavailable: {0}")]
    CaptureUnavailable(String),
    #[error("no recorded mutation for {xpath} {property} ({strategy:?})")]
    UnknownMutation {
        xpath: String,
        property: String,
        strategy: Neutralization,
    },
    #[error(transparent)]
    Snapshot(#[from] SnapshotError),
    #[error("{0}")]
    Schema(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Neutralization {
    /// Remove the winning declaration.
    #[default]
    Delete,
    /// Replace its value with `initial`.
    Initial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Fixes,
    NoEffect,
    IntroducesNew,
}

/// Page sources after a mutation: the DOM (inline styles may change) and
/// the author stylesheets.
#[derive(Debug, Clone, PartialEq)]
pub struct PageSources {
    pub dom: DomNode,
    pub stylesheets: Vec<StylesheetSource>,
}

/// Value inserted for candidates that flag a missing declaration.
pub fn missing_value(property: &str) -> &'static str {
    match property {
        "flex-wrap" => "wrap",
        "display" => "flex",
        _ => "initial",
    }
}

fn find_mut<'a>(node: &'a mut DomNode, xpath: &str) -> Option<&'a mut DomNode> {
    if node.xpath == xpath {
        return Some(node);
    }
    node.children.iter_mut().find_map(|c| find_mut(c, xpath))
}

fn declarations_text(decls: &[Declaration]) -> String {
    decls
        .iter()
        .map(|d| format!("{}: {}{}", d.property, d.raw_value, if d.important { " !important" } else { "" }))
        .collect::<Vec<_>>()
        .join("; ")
}

/// Applies the neutralization of `candidate` to the bundle's page sources.
/// Authored declarations are deleted or set to `initial` where they were
/// written; missing ones are inserted into the element's inline style.
pub fn neutralize(bundle: &CaptureBundle, candidate: &Candidate, strategy: Neutralization) -> Result<PageSources, OracleError> {
    let mut dom = bundle.dom().clone();
    let mut stylesheets = bundle.stylesheets().to_vec();
    let edit = |decls: &mut Vec<Declaration>, important: bool, raw: &str| {
        // shorthands expand to several longhands; only the named one changes
        if let Some(i) = decls
            .iter()
            .rposition(|d| d.property == candidate.property && d.important == important && d.raw_value == raw)
        {
            match strategy {
                Neutralization::Delete => {
                    decls.remove(i);
                }
                Neutralization::Initial => decls[i].raw_value = "initial".into(),
            }
        }
    };
    match (candidate.kind, &candidate.authored) {
        (CandidateKind::Missing, _) | (_, None) => {
            let node = find_mut(&mut dom, &candidate.xpath)
                .ok_or_else(|| SnapshotError::UnknownXPath(candidate.xpath.clone()))?;
            let (mut decls, _) = parse_declarations(&node.inline_style);
            decls.push(Declaration {
                property: candidate.property.clone(),
                raw_value: missing_value(&candidate.property).into(),
                important: false,
            });
            node.inline_style = declarations_text(&decls);
        }
        (CandidateKind::Authored, Some(a)) => match a.origin {
            Origin::Inline => {
                let node = find_mut(&mut dom, &candidate.xpath)
                    .ok_or_else(|| SnapshotError::UnknownXPath(candidate.xpath.clone()))?;
                let (mut decls, _) = parse_declarations(&node.inline_style);
                edit(&mut decls, a.important, &a.raw_value);
                node.inline_style = declarations_text(&decls);
            }
            Origin::Rule { sheet, rule } => {
                let source = stylesheets
                    .get_mut(sheet)
                    .ok_or_else(|| OracleError::Schema(format!("stylesheet {sheet} does not exist")))?;
                let mut parsed = parse_stylesheet(&source.text, sheet).rules;
                let target = parsed
                    .get_mut(rule)
                    .ok_or_else(|| OracleError::Schema(format!("rule {rule} of sheet {sheet} does not exist")))?;
                edit(&mut target.declarations, a.important, &a.raw_value);
                source.text = to_css(&parsed);
            }
        },
    }
    Ok(PageSources { dom, stylesheets })
}

/// Something that can re-render a page after a mutation.
pub trait Recapture {
    fn recapture(&self, pair: &Pair, strategy: Neutralization) -> Result<CaptureBundle, OracleError>;
}

/// Pre-recorded mutated bundles: `<root>/mutations.json` indexes
/// subdirectories by (xpath, property, strategy).
#[derive(Debug, Clone)]
pub struct RecordedMutations {
    root: PathBuf,
    index: BTreeMap<(String, String, Neutralization), String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MutationEntry {
    pub xpath: String,
    pub property: String,
    pub neutralization: Neutralization,
    /// Bundle directory relative to the index file.
    pub bundle: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MutationIndex {
    pub schema_version: u32,
    pub mutations: Vec<MutationEntry>,
}

impl RecordedMutations {
    pub fn open(root: impl AsRef<Path>) -> Result<Self, OracleError> {
        let root = root.as_ref().to_path_buf();
        let path = root.join(MUTATIONS_FILE);
        let text = fs::read_to_string(&path).map_err(|e| OracleError::Schema(format!("{}: {e}", path.display())))?;
        let idx: MutationIndex =
            serde_json::from_str(&text).map_err(|e| OracleError::Schema(format!("{}: {e}", path.display())))?;
        if idx.schema_version != MUTATIONS_SCHEMA_VERSION {
            return Err(OracleError::Schema(format!("unsupported schema_version {}", idx.schema_version)));
        }
        let index = idx
            .mutations
            .into_iter()
            .map(|m| ((m.xpath, m.property, m.neutralization), m.bundle))
            .collect();
        Ok(Self { root, index })
    }

    pub fn pairs(&self) -> impl Iterator<Item = Pair> + '_ {
        self.index.keys().map(|(x, p, _)| Pair::new(x.clone(), p.clone()))
    }
}

impl Recapture for RecordedMutations {
    fn recapture(&self, pair: &Pair, strategy: Neutralization) -> Result<CaptureBundle, OracleError> {
        let key = (pair.xpath.clone(), pair.property.clone(), strategy);
        let dir = self.index.get(&key).ok_or_else(|| OracleError::UnknownMutation {
            xpath: pair.xpath.clone(),
            property: pair.property.clone(),
            strategy,
        })?;
        Ok(load_bundle(self.root.join(dir))?)
    }
}

/// Re-renders through an external capture command. The command receives a
/// job file path and must write a bundle to the job's `out_dir`.
#[derive(Debug, Clone)]
pub struct BridgeRecapture<'a> {
    pub command: PathBuf,
    pub bundle: &'a CaptureBundle,
    pub candidates: &'a [Candidate],
    pub work_dir: PathBuf,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct BridgeJob {
    url: String,
    width_min: u32,
    width_max: u32,
    step: u32,
    height: u32,
    dom: DomNode,
    stylesheets: Vec<StylesheetSource>,
    out_dir: PathBuf,
}

impl Recapture for BridgeRecapture<'_> {
    fn recapture(&self, pair: &Pair, strategy: Neutralization) -> Result<CaptureBundle, OracleError> {
        let candidate = self
            .candidates
            .iter()
            .find(|c| pair.matches(c))
            .ok_or_else(|| OracleError::UnknownMutation {
                xpath: pair.xpath.clone(),
                property: pair.property.clone(),
                strategy,
            })?;
        let sources = neutralize(self.bundle, candidate, strategy)?;
        let out_dir = self.work_dir.join("recapture");
        let job = BridgeJob {
            url: self.bundle.url.clone(),
            width_min: self.bundle.width_min,
            width_max: self.bundle.width_max,
            step: self.bundle.step,
            height: self.bundle.height,
            dom: sources.dom,
            stylesheets: sources.stylesheets,
            out_dir: out_dir.clone(),
        };
        fs::create_dir_all(&self.work_dir).map_err(|e| OracleError::CaptureUnavailable(e.to_string()))?;
        let job_path = self.work_dir.join("job.json");
        let text = serde_json::to_string_pretty(&job).map_err(|e| OracleError::Schema(e.to_string()))?;
        fs::write(&job_path, text).map_err(|e| OracleError::CaptureUnavailable(e.to_string()))?;
        let status = Command::new(&self.command)
            .arg(&job_path)
            .status()
            .map_err(|e| OracleError::CaptureUnavailable(format!("{}: {e}", self.command.display())))?;
        if !status.success() {
            return Err(OracleError::CaptureUnavailable(format!(
                "{} exited with {status}",
                self.command.display()
            )));
        }
        Ok(load_bundle(out_dir)?)
    }
}

fn key(r: &FailureReport) -> (RlfType, Vec<String>) {
    (r.rlf_type, r.affected.clone())
}

/// Verdict from detection output before and after a mutation.
pub fn judge(original: &[FailureReport], failure: &FailureReport, mutated: &[FailureReport]) -> Verdict {
    let before: BTreeSet<_> = original.iter().map(key).collect();
    if mutated.iter().any(|r| !before.contains(&key(r))) {
        return Verdict::IntroducesNew;
    }
    let persists = mutated
        .iter()
        .any(|r| key(r) == key(failure) && r.fail_min <= failure.fail_max && r.fail_max >= failure.fail_min);
    if persists {
        Verdict::NoEffect
    } else {
        Verdict::Fixes
    }
}

/// Neutralizes `pair`, re-renders through `source`, re-runs detection and
/// judges the outcome against `original` (the unmutated detection output).
pub fn oracle_verify(
    source: &dyn Recapture,
    original: &[FailureReport],
    failure: &FailureReport,
    pair: &Pair,
    strategy: Neutralization,
    config: &DetectConfig,
) -> Result<Verdict, OracleError> {
    let mutated = source.recapture(pair, strategy)?;
    Ok(judge(original, failure, &detect(&mutated, config)))
}
