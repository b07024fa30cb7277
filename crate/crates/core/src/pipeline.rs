//! Stage documents exchanged between pipeline steps, and the
//! detect → localize → rank chain over one bundle.

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::css::StyleIndex;
use crate::detection::{detect_with, FailureReport, RlfType};
use crate::localization::{
    candidate_source, localize_all, Candidate, CandidateKind, Direction, Localization, MediaConflict, Tier,
};
use crate::par::Execution;
use crate::prioritization::{rank, RankedEntry, RankedList};
use crate::snapshot::CaptureBundle;

pub const SCHEMA_VERSION: u32 = 1;

/// `failures.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailuresDoc {
    pub schema_version: u32,
    pub url: String,
    pub width_min: u32,
    pub width_max: u32,
    pub step: u32,
    pub eps: f64,
    pub failures: Vec<FailureReport>,
}

/// One row of a ranked list as written to `ranked.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedRow {
    pub rank: usize,
    pub xpath: String,
    pub property: String,
    pub value: String,
    pub normalized_px: Option<f64>,
    pub tier: Tier,
    pub set_rank: u32,
    pub kind: CandidateKind,
    pub source: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureRanking {
    pub failure_id: String,
    pub rlf_type: RlfType,
    pub direction: Direction,
    /// False when the candidate set was empty.
    pub localized: bool,
    pub entries: Vec<RankedRow>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub media_conflicts: Vec<MediaConflict>,
}

/// `ranked.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedDoc {
    pub schema_version: u32,
    pub url: String,
    pub rankings: Vec<FailureRanking>,
}

impl RankedDoc {
    /// Ranked lists keyed by failure id, as consumed by the metrics.
    pub fn ranked_lists(&self) -> Vec<RankedList> {
        self.rankings
            .iter()
            .map(|f| RankedList {
                failure_id: f.failure_id.clone(),
                entries: f
                    .entries
                    .iter()
                    .enumerate()
                    .map(|(i, r)| RankedEntry {
                        rank: r.rank,
                        candidate: Candidate {
                            xpath: r.xpath.clone(),
                            property: r.property.clone(),
                            kind: r.kind,
                            authored: None,
                            normalized_px: r.normalized_px,
                            tier: r.tier,
                            set_rank: r.set_rank,
                            doc_order: i,
                        },
                    })
                    .collect(),
            })
            .collect()
    }
}

pub fn failures_doc(bundle: &CaptureBundle, config: &RunConfig, failures: Vec<FailureReport>) -> FailuresDoc {
    FailuresDoc {
        schema_version: SCHEMA_VERSION,
        url: bundle.url.clone(),
        width_min: bundle.width_min,
        width_max: bundle.width_max,
        step: bundle.step,
        eps: config.eps,
        failures,
    }
}

pub fn detect_stage(bundle: &CaptureBundle, config: &RunConfig, exec: Execution) -> FailuresDoc {
    failures_doc(bundle, config, detect_with(bundle, &config.detect(), exec))
}

fn ranking_of(report: &FailureReport, loc: Localization, style: &StyleIndex, config: &RunConfig) -> FailureRanking {
    let (localized, entries) = match rank(&report.id, &loc.candidates, &config.rank()) {
        Ok(list) => (
            true,
            list.entries
                .into_iter()
                .map(|e| RankedRow {
                    rank: e.rank,
                    value: e.candidate.value(),
                    source: candidate_source(style, &e.candidate),
                    xpath: e.candidate.xpath,
                    property: e.candidate.property,
                    normalized_px: e.candidate.normalized_px,
                    tier: e.candidate.tier,
                    set_rank: e.candidate.set_rank,
                    kind: e.candidate.kind,
                })
                .collect(),
        ),
        Err(_) => (!loc.media_conflicts.is_empty(), Vec::new()),
    };
    FailureRanking {
        failure_id: report.id.clone(),
        rlf_type: report.rlf_type,
        direction: loc.direction,
        localized,
        entries,
        media_conflicts: loc.media_conflicts,
    }
}

/// Localizes and ranks every failure.
pub fn localize_stage(
    bundle: &CaptureBundle,
    style: &StyleIndex,
    failures: &[FailureReport],
    config: &RunConfig,
    exec: Execution,
) -> (Vec<Localization>, RankedDoc) {
    let locs = localize_all(failures, bundle, style, &config.localize(), exec);
    let rankings = failures
        .iter()
        .zip(locs.iter().cloned())
        .map(|(r, l)| ranking_of(r, l, style, config))
        .collect();
    (
        locs,
        RankedDoc {
            schema_version: SCHEMA_VERSION,
            url: bundle.url.clone(),
            rankings,
        },
    )
}

/// Detect, localize and rank in one go.
pub fn run(bundle: &CaptureBundle, config: &RunConfig, exec: Execution) -> (FailuresDoc, RankedDoc) {
    let failures = detect_stage(bundle, config, exec);
    let style = StyleIndex::new(bundle);
    let (_, ranked) = localize_stage(bundle, &style, &failures.failures, config, exec);
    (failures, ranked)
}

/// Pretty JSON with a trailing newline; the byte form every stage writes.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("stage documents always serialize");
    s.push('\n');
    s
}
