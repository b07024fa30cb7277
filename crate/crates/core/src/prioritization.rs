//! Ordering of candidate pairs into a ranked list.
//!
//! Categorical candidates (no px value) form a block ordered by set rank.
//! Numeric candidates sort by value, largest first, with set rank breaking
//! ties. Remaining ties fall to tier, document order and property name.
//! By default the categorical block comes first.

use std::cmp::Ordering;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::css::StyleIndex;
use crate::localization::{candidate_source, Candidate};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RankError {
    #[error("failure {0} has no candidate pairs")]
    EmptyCandidateSet(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RankOptions {
    /// Put numeric candidates ahead of the categorical block.
    pub numeric_first: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedEntry {
    pub rank: usize,
    pub candidate: Candidate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedList {
    pub failure_id: String,
    pub entries: Vec<RankedEntry>,
}

impl RankedList {
    /// 1-based rank of the first entry accepted by `pred`.
    pub fn first_rank(&self, mut pred: impl FnMut(&Candidate) -> bool) -> Option<usize> {
        self.entries.iter().find(|e| pred(&e.candidate)).map(|e| e.rank)
    }
}

/// Total order used by [`rank`].
pub fn compare(a: &Candidate, b: &Candidate, options: &RankOptions) -> Ordering {
    let block = |c: &Candidate| match (c.normalized_px.is_some(), options.numeric_first) {
        (false, false) | (true, true) => 0,
        _ => 1,
    };
    let primary = block(a).cmp(&block(b)).then_with(|| match (a.normalized_px, b.normalized_px) {
        (Some(x), Some(y)) => y.total_cmp(&x),
        _ => Ordering::Equal,
    });
    primary
        .then(a.set_rank.cmp(&b.set_rank))
        .then(a.tier.cmp(&b.tier))
        .then(a.doc_order.cmp(&b.doc_order))
        .then_with(|| a.property.cmp(&b.property))
        .then_with(|| a.xpath.cmp(&b.xpath))
}

pub fn rank(failure_id: &str, candidates: &[Candidate], options: &RankOptions) -> Result<RankedList, RankError> {
    if candidates.is_empty() {
        return Err(RankError::EmptyCandidateSet(failure_id.to_string()));
    }
    let mut sorted = candidates.to_vec();
    sorted.sort_by(|a, b| compare(a, b, options));
    Ok(RankedList {
        failure_id: failure_id.to_string(),
        entries: sorted
            .into_iter()
            .enumerate()
            .map(|(i, candidate)| RankedEntry { rank: i + 1, candidate })
            .collect(),
    })
}

/// Plain-text table of a ranked list.
pub fn render_report(list: &RankedList, style: Option<&StyleIndex>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "failure {}", list.failure_id);
    if list.entries.is_empty() {
        out.push_str("  no candidates\n");
        return out;
    }
    let rows: Vec<[String; 5]> = list
        .entries
        .iter()
        .map(|e| {
            let c = &e.candidate;
            [
                e.rank.to_string(),
                c.xpath.clone(),
                c.property.clone(),
                c.value(),
                style.map(|s| candidate_source(s, c)).unwrap_or_else(|| "-".into()),
            ]
        })
        .collect();
    let header = ["rank", "xpath", "property", "value", "source"];
    let mut widths = header.map(str::len);
    for r in &rows {
        for (w, cell) in widths.iter_mut().zip(r) {
            *w = (*w).max(cell.len());
        }
    }
    let line = |cells: [&str; 5]| {
        let mut s = String::from(" ");
        for (cell, w) in cells.iter().zip(widths) {
            let _ = write!(s, " {cell:<w$}");
        }
        s.trim_end().to_string() + "\n"
    };
    out.push_str(&line(header));
    for r in &rows {
        out.push_str(&line([&r[0], &r[1], &r[2], &r[3], &r[4]]));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::localization::{CandidateKind, Tier};
    use proptest::prelude::*;

    fn cand(xpath: &str, property: &str, px: Option<f64>, set_rank: u32, tier: Tier, doc: usize) -> Candidate {
        Candidate {
            xpath: xpath.into(),
            property: property.into(),
            kind: CandidateKind::Authored,
            authored: None,
            normalized_px: px,
            tier,
            set_rank,
            doc_order: doc,
        }
    }

    fn order(list: &RankedList) -> Vec<(String, String)> {
        list.entries
            .iter()
            .map(|e| (e.candidate.xpath.clone(), e.candidate.property.clone()))
            .collect()
    }

    #[test]
    fn value_beats_tier() {
        let c = vec![
            cand("button", "margin-top", Some(40.0), 5, Tier::Affected, 5),
            cand("title", "padding-top", Some(10.0), 5, Tier::Neighbor, 4),
            cand("title", "height", Some(120.0), 3, Tier::Neighbor, 4),
        ];
        let r = rank("f", &c, &RankOptions::default()).unwrap();
        let props: Vec<_> = order(&r).into_iter().map(|p| p.1).collect();
        assert_eq!(props, ["height", "margin-top", "padding-top"]);
        assert_eq!(r.entries.iter().map(|e| e.rank).collect::<Vec<_>>(), [1, 2, 3]);
    }

    #[test]
    fn equal_values_fall_back_to_set_rank() {
        let c = vec![
            cand("a", "margin-top", Some(20.0), 5, Tier::Affected, 1),
            cand("b", "height", Some(20.0), 3, Tier::Neighbor, 2),
        ];
        let r = rank("f", &c, &RankOptions::default()).unwrap();
        assert_eq!(r.entries[0].candidate.set_rank, 3);
    }

    #[test]
    fn categorical_block_leads() {
        let c = vec![
            cand("a", "height", Some(500.0), 3, Tier::Affected, 1),
            cand("a", "position", None, 1, Tier::Affected, 1),
        ];
        let r = rank("f", &c, &RankOptions::default()).unwrap();
        assert_eq!(r.entries[0].candidate.property, "position");
        let r = rank("f", &c, &RankOptions { numeric_first: true }).unwrap();
        assert_eq!(r.entries[0].candidate.property, "height");
    }

    #[test]
    fn empty_set_is_an_error() {
        assert_eq!(
            rank("rlf-009", &[], &RankOptions::default()),
            Err(RankError::EmptyCandidateSet("rlf-009".into()))
        );
    }

    #[test]
    fn report_rows() {
        let empty = RankedList { failure_id: "x".into(), entries: vec![] };
        assert!(render_report(&empty, None).contains("no candidates"));
        let c = vec![
            cand("a", "height", Some(3.0), 3, Tier::Affected, 1),
            cand("b", "height", Some(2.0), 3, Tier::Affected, 2),
            cand("c", "height", Some(1.0), 3, Tier::Affected, 3),
        ];
        let text = render_report(&rank("x", &c, &RankOptions::default()).unwrap(), None);
        assert_eq!(text.lines().count(), 5);
        assert!(text.lines().nth(4).unwrap().trim_start().starts_with('3'));
    }

    fn candidate_strategy() -> impl Strategy<Value = Candidate> {
        (
            0usize..6,
            prop::sample::select(vec!["height", "width", "margin-top", "float", "display"]),
            prop::option::of(0u32..400),
            1u32..8,
            any::<bool>(),
        )
            .prop_map(|(doc, property, px, set_rank, affected)| {
                let tier = if affected { Tier::Affected } else { Tier::Neighbor };
                cand(&format!("/e{doc}"), property, px.map(f64::from), set_rank, tier, doc)
            })
    }

    fn unique(mut v: Vec<Candidate>) -> Vec<Candidate> {
        v.sort_by(|a, b| (&a.xpath, &a.property).cmp(&(&b.xpath, &b.property)));
        v.dedup_by(|a, b| a.xpath == b.xpath && a.property == b.property);
        v
    }

    proptest! {
        #[test]
        fn permutation_invariant(v in prop::collection::vec(candidate_strategy(), 1..20), seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let v = unique(v);
            let mut shuffled = v.clone();
            shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let opts = RankOptions::default();
            prop_assert_eq!(rank("f", &v, &opts).unwrap(), rank("f", &shuffled, &opts).unwrap());
        }

        #[test]
        fn every_candidate_once(v in prop::collection::vec(candidate_strategy(), 1..20)) {
            let r = rank("f", &v, &RankOptions::default()).unwrap();
            prop_assert_eq!(r.entries.len(), v.len());
            for c in &v {
                prop_assert!(r.entries.iter().any(|e| &e.candidate == c));
            }
        }

        #[test]
        fn scaling_up_never_lowers_rank(v in prop::collection::vec(candidate_strategy(), 1..20), pick in any::<prop::sample::Index>(), factor in 1.01f64..10.0) {
            let mut v = unique(v);
            let numeric: Vec<usize> = (0..v.len()).filter(|&i| v[i].normalized_px.is_some()).collect();
            prop_assume!(!numeric.is_empty());
            let i = numeric[pick.index(numeric.len())];
            let key = (v[i].xpath.clone(), v[i].property.clone());
            let opts = RankOptions::default();
            let position = |list: &RankedList| list.entries.iter().position(|e| (e.candidate.xpath.clone(), e.candidate.property.clone()) == key).unwrap();
            let before = position(&rank("f", &v, &opts).unwrap());
            v[i].normalized_px = v[i].normalized_px.map(|x| x * factor + 1.0);
            let after = position(&rank("f", &v, &opts).unwrap());
            prop_assert!(after <= before);
        }
    }
}
