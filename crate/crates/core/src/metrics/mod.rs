//! Ranking-quality metrics: Top-N accuracy, mean reciprocal rank and
//! precision at K, scored against ground-truth annotations.

pub mod oracle;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::detection::RlfType;
use crate::localization::Candidate;
use crate::prioritization::RankedList;

pub const TRUTH_SCHEMA_VERSION: u32 = 1;
pub const TOP_N: [usize; 4] = [1, 3, 5, 7];

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Pair {
    pub xpath: String,
    pub property: String,
}

impl Pair {
    pub fn new(xpath: impl Into<String>, property: impl Into<String>) -> Self {
        Self {
            xpath: xpath.into(),
            property: property.into(),
        }
    }

    pub fn matches(&self, c: &Candidate) -> bool {
        self.xpath == c.xpath && self.property == c.property
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthEntry {
    /// Pairs whose neutralization fixes the failure.
    pub acceptable: Vec<Pair>,
    /// Judged "no problem": the failure is intentional.
    #[serde(default)]
    pub np: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rlf_type: Option<RlfType>,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub schema_version: u32,
    pub failures: BTreeMap<String, TruthEntry>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricsError {
    #[error("no ground truth for failure {0}")]
    MissingTruth(String),
    #[error("unsupported truth schema_version {0}")]
    Schema(u32),
    #[error("{0} must be at least 1")]
    ZeroCutoff(&'static str),
}

impl GroundTruth {
    pub fn validate(&self) -> Result<(), MetricsError> {
        if self.schema_version != TRUTH_SCHEMA_VERSION {
            return Err(MetricsError::Schema(self.schema_version));
        }
        Ok(())
    }
}

/// Which failures to leave out of the scores.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Exclusions {
    /// Drop every failure marked NP.
    pub exclude_np: bool,
    /// Drop NP-marked wrapping failures only.
    pub exclude_we_np: bool,
}

impl Exclusions {
    fn drops(&self, t: &TruthEntry) -> bool {
        t.np && (self.exclude_np || (self.exclude_we_np && t.rlf_type == Some(RlfType::WE)))
    }
}

/// Fraction of failures whose first correct pair sits within the top `n`.
pub fn top_n(first_ranks: &[Option<usize>], n: usize) -> f64 {
    if first_ranks.is_empty() {
        return 0.0;
    }
    let hits = first_ranks.iter().filter(|r| r.is_some_and(|r| r <= n)).count();
    hits as f64 / first_ranks.len() as f64
}

/// Mean reciprocal rank; failures never localized contribute 0.
pub fn mrr(first_ranks: &[Option<usize>]) -> f64 {
    if first_ranks.is_empty() {
        return 0.0;
    }
    let sum: f64 = first_ranks.iter().map(|r| r.map_or(0.0, |r| 1.0 / r as f64)).sum();
    sum / first_ranks.len() as f64
}

/// Relevant entries among the top `k`, divided by `k`.
pub fn p_at_k(list: &RankedList, relevant: impl Fn(&Candidate) -> bool, k: usize) -> f64 {
    if k == 0 {
        return 0.0;
    }
    let hits = list.entries.iter().take(k).filter(|e| relevant(&e.candidate)).count();
    hits as f64 / k as f64
}

/// Arithmetic mean, 0 for an empty slice.
pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        0.0
    } else {
        values.iter().sum::<f64>() / values.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scores {
    pub rlf_count: usize,
    /// N -> (hits, fraction)
    pub top_n: BTreeMap<usize, (usize, f64)>,
    pub mrr: f64,
    pub mrr_excluding_np: f64,
    pub p_at_k: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PageMetrics {
    pub page: String,
    #[serde(flatten)]
    pub scores: Scores,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub schema_version: u32,
    pub k: usize,
    pub exclusions: Exclusions,
    pub pages: Vec<PageMetrics>,
    /// Top-N and MRR over all failures; P@K averaged over pages.
    pub total: Scores,
}

/// One page's rankings together with its annotations.
#[derive(Debug, Clone, PartialEq)]
pub struct PageInput {
    pub page: String,
    pub rankings: Vec<RankedList>,
    pub truth: GroundTruth,
}

struct Scored {
    first: Option<usize>,
    p: f64,
    np: bool,
}

fn score_page(page: &PageInput, ex: &Exclusions, k: usize) -> Result<Vec<Scored>, MetricsError> {
    page.truth.validate()?;
    let mut out = Vec::new();
    for list in &page.rankings {
        let truth = page
            .truth
            .failures
            .get(&list.failure_id)
            .ok_or_else(|| MetricsError::MissingTruth(list.failure_id.clone()))?;
        if ex.drops(truth) {
            continue;
        }
        let relevant = |c: &Candidate| truth.acceptable.iter().any(|p| p.matches(c));
        out.push(Scored {
            first: list.first_rank(relevant),
            p: p_at_k(list, relevant, k),
            np: truth.np,
        });
    }
    Ok(out)
}

fn summarize(scored: &[&Scored], p_at_k: f64) -> Scores {
    let firsts: Vec<Option<usize>> = scored.iter().map(|s| s.first).collect();
    let without_np: Vec<Option<usize>> = scored.iter().filter(|s| !s.np).map(|s| s.first).collect();
    Scores {
        rlf_count: scored.len(),
        top_n: TOP_N
            .iter()
            .map(|&n| {
                let hits = firsts.iter().filter(|r| r.is_some_and(|r| r <= n)).count();
                (n, (hits, top_n(&firsts, n)))
            })
            .collect(),
        mrr: mrr(&firsts),
        mrr_excluding_np: mrr(&without_np),
        p_at_k,
    }
}

/// Scores every page and the total.
pub fn evaluate(pages: &[PageInput], exclusions: Exclusions, k: usize) -> Result<MetricsReport, MetricsError> {
    if k == 0 {
        return Err(MetricsError::ZeroCutoff("k"));
    }
    let mut per_page = Vec::new();
    let mut all = Vec::new();
    for page in pages {
        all.push(score_page(page, &exclusions, k)?);
    }
    let mut page_p = Vec::new();
    for (page, scored) in pages.iter().zip(&all) {
        let refs: Vec<&Scored> = scored.iter().collect();
        let p = mean(&scored.iter().map(|s| s.p).collect::<Vec<_>>());
        if !scored.is_empty() {
            page_p.push(p);
        }
        per_page.push(PageMetrics {
            page: page.page.clone(),
            scores: summarize(&refs, p),
        });
    }
    let refs: Vec<&Scored> = all.iter().flatten().collect();
    Ok(MetricsReport {
        schema_version: TRUTH_SCHEMA_VERSION,
        k,
        exclusions,
        pages: per_page,
        total: summarize(&refs, mean(&page_p)),
    })
}

fn pct(v: f64) -> String {
    format!("{:.2}%", v * 100.0)
}

/// Plain-text table with one row per page and a total row.
pub fn render_metrics(report: &MetricsReport) -> String {
    let mut out = String::new();
    let _ = write!(out, "{:<24} {:>5}", "page", "RLFs");
    for n in TOP_N {
        let _ = write!(out, " {:>14}", format!("Top-{n}"));
    }
    let _ = writeln!(out, " {:>8} {:>12} {:>8}", "MRR", "MRR w/o NP", format!("P@{}", report.k));
    let row = |out: &mut String, name: &str, s: &Scores| {
        let _ = write!(out, "{name:<24} {:>5}", s.rlf_count);
        for n in TOP_N {
            let (hits, frac) = s.top_n[&n];
            let _ = write!(out, " {:>14}", format!("{hits} ({})", pct(frac)));
        }
        let _ = writeln!(
            out,
            " {:>8} {:>12} {:>8.2}",
            pct(s.mrr),
            pct(s.mrr_excluding_np),
            s.p_at_k
        );
    };
    for p in &report.pages {
        row(&mut out, &p.page, &p.scores);
    }
    row(&mut out, "total", &report.total);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::localization::{CandidateKind, Tier};
    use crate::prioritization::RankedEntry;
    use proptest::prelude::*;

    fn list(id: &str, pairs: &[(&str, &str)]) -> RankedList {
        RankedList {
            failure_id: id.into(),
            entries: pairs
                .iter()
                .enumerate()
                .map(|(i, (x, p))| RankedEntry {
                    rank: i + 1,
                    candidate: Candidate {
                        xpath: x.to_string(),
                        property: p.to_string(),
                        kind: CandidateKind::Authored,
                        authored: None,
                        normalized_px: None,
                        tier: Tier::Affected,
                        set_rank: 1,
                        doc_order: i,
                    },
                })
                .collect(),
        }
    }

    #[test]
    fn top_n_examples() {
        let close = |a: f64, b: f64| (a - b).abs() < 1e-12;
        assert!(close(top_n(&[Some(1), Some(4), Some(2)], 3), 2.0 / 3.0));
        assert_eq!(top_n(&[Some(1), Some(1)], 1), 1.0);
        assert_eq!(top_n(&[], 3), 0.0);
    }

    #[test]
    fn mrr_examples() {
        assert_eq!(mrr(&[Some(1), Some(1), Some(1), Some(2)]), 0.875);
        assert_eq!(mrr(&[Some(2)]), 0.5);
        assert_eq!(mrr(&[None]), 0.0);
    }

    #[test]
    fn p_at_k_examples() {
        let l = list("f", &[("a", "x"), ("b", "y"), ("c", "z"), ("d", "w")]);
        let p = p_at_k(&l, |c| c.xpath != "b", 3);
        assert!((p - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(p_at_k(&l, |_| false, 3), 0.0);
        assert_eq!(mean(&[1.0, 0.5]), 0.75);
    }

    fn truth(entries: &[(&str, &[(&str, &str)], bool, Option<RlfType>)]) -> GroundTruth {
        GroundTruth {
            schema_version: TRUTH_SCHEMA_VERSION,
            failures: entries
                .iter()
                .map(|(id, pairs, np, t)| {
                    (
                        id.to_string(),
                        TruthEntry {
                            acceptable: pairs.iter().map(|(x, p)| Pair::new(*x, *p)).collect(),
                            np: *np,
                            rlf_type: *t,
                            note: String::new(),
                        },
                    )
                })
                .collect(),
        }
    }

    #[test]
    fn evaluate_pages_and_exclusions() {
        let page1 = PageInput {
            page: "p1".into(),
            rankings: vec![
                list("rlf-001", &[("a", "x"), ("b", "y")]),
                list("rlf-002", &[("c", "z"), ("d", "w")]),
            ],
            truth: truth(&[
                ("rlf-001", &[("a", "x")], false, Some(RlfType::EP)),
                ("rlf-002", &[("d", "w")], true, Some(RlfType::WE)),
            ]),
        };
        let page2 = PageInput {
            page: "p2".into(),
            rankings: vec![list("rlf-001", &[("e", "v")])],
            truth: truth(&[("rlf-001", &[], false, None)]),
        };
        let r = evaluate(&[page1.clone(), page2.clone()], Exclusions::default(), 3).unwrap();
        assert_eq!(r.total.rlf_count, 3);
        assert_eq!(r.total.top_n[&1], (1, 1.0 / 3.0));
        assert!((r.total.mrr - 0.5).abs() < 1e-12);
        assert!((r.total.mrr_excluding_np - 0.5).abs() < 1e-12);
        // page 1: (1/3 + 1/3) / 2, page 2: 0
        assert!((r.total.p_at_k - (1.0 / 3.0) / 2.0).abs() < 1e-12);

        let r = evaluate(&[page1, page2], Exclusions { exclude_np: false, exclude_we_np: true }, 3).unwrap();
        assert_eq!(r.total.rlf_count, 2);
        assert!(render_metrics(&r).lines().count() == 4);
    }

    #[test]
    fn missing_truth_is_an_error() {
        let page = PageInput {
            page: "p".into(),
            rankings: vec![list("rlf-003", &[])],
            truth: truth(&[]),
        };
        assert_eq!(
            evaluate(&[page], Exclusions::default(), 3),
            Err(MetricsError::MissingTruth("rlf-003".into()))
        );
    }

    fn ranks() -> impl Strategy<Value = Vec<Option<usize>>> {
        prop::collection::vec(prop::option::of(1usize..12), 1..40)
    }

    proptest! {
        #[test]
        fn top_n_is_monotone_and_bounded(r in ranks(), n in 1usize..12) {
            let a = top_n(&r, n);
            let b = top_n(&r, n + 1);
            prop_assert!((0.0..=1.0).contains(&a));
            prop_assert!(a <= b);
        }

        #[test]
        fn mrr_bounds(r in ranks()) {
            let m = mrr(&r);
            prop_assert!((0.0..=1.0).contains(&m));
            prop_assert!(top_n(&r, usize::MAX) >= m);
            if r.iter().any(Option::is_some) {
                prop_assert!(m > 0.0);
            }
        }

        #[test]
        fn all_first_is_one(len in 1usize..50) {
            prop_assert_eq!(mrr(&vec![Some(1); len]), 1.0);
        }

        #[test]
        fn page_average_ignores_order(mut v in prop::collection::vec(0.0f64..=1.0, 1..20)) {
            let a = mean(&v);
            v.reverse();
            prop_assert!((a - mean(&v)).abs() < 1e-12);
        }
    }
}
