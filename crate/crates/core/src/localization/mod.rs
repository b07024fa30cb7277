//! Contextual search and candidate collection.
//!
//! For a failure, the direction is read from geometry at `fail_min`; the
//! affected elements, their aligned siblings and their container are then
//! searched for developer-authored properties from the failure type's
//! ranked search set.

mod property_set;

pub use property_set::{Matcher, PropertySet, SetEntry};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::css::{AuthoredValue, RuleSource, StyleIndex};
use crate::detection::{candidate_pool, violated_edge, Boundary, FailureReport, RlfType};
use crate::par::{map_slice, Execution};
use crate::snapshot::{BBox, CaptureBundle};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Horizontal,
    Vertical,
    Both,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Direction {
    pub axis: Axis,
    pub boundary: Boundary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tier {
    Affected,
    Neighbor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CandidateKind {
    Authored,
    Missing,
}

/// How an element entered the search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Subject,
    Sibling,
    Parent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Neighbor {
    pub xpath: String,
    pub node: usize,
    pub role: Role,
    pub tier: Tier,
}

/// One (element, property) pair of the candidate set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub xpath: String,
    pub property: String,
    pub kind: CandidateKind,
    pub authored: Option<AuthoredValue>,
    /// Present only for value matchers; categorical candidates leave it empty.
    pub normalized_px: Option<f64>,
    pub tier: Tier,
    pub set_rank: u32,
    /// Preorder index of the element, used as the final tie-breaker.
    pub doc_order: usize,
}

impl Candidate {
    pub fn value(&self) -> String {
        match (&self.kind, &self.authored) {
            (CandidateKind::Authored, Some(a)) => a.raw_value.clone(),
            _ => "(missing)".to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalizeOptions {
    pub eps: f64,
    /// Structural hops above the affected elements searched for neighbours.
    pub hops: usize,
}

impl Default for LocalizeOptions {
    fn default() -> Self {
        Self { eps: 1.0, hops: 1 }
    }
}

const HORIZONTAL_PROPS: &[&str] = &[
    "width",
    "min-width",
    "max-width",
    "margin-left",
    "margin-right",
    "padding-left",
    "padding-right",
];
const VERTICAL_PROPS: &[&str] = &[
    "height",
    "min-height",
    "max-height",
    "margin-top",
    "margin-bottom",
    "padding-top",
    "padding-bottom",
];
const NEUTRAL_PROPS: &[&str] = &["font-size", "white-space", "display", "position", "float", "flex-wrap"];

/// Whether `property` can influence a failure along `dir`.
pub fn axis_relevant(property: &str, dir: Direction) -> bool {
    let neutral = NEUTRAL_PROPS.contains(&property);
    match dir.axis {
        Axis::None => false,
        Axis::Both => neutral || HORIZONTAL_PROPS.contains(&property) || VERTICAL_PROPS.contains(&property),
        Axis::Horizontal => neutral || HORIZONTAL_PROPS.contains(&property),
        Axis::Vertical => neutral || VERTICAL_PROPS.contains(&property),
    }
}

fn axis_of(boundary: Boundary) -> Axis {
    match boundary {
        Boundary::Left | Boundary::Right => Axis::Horizontal,
        Boundary::Top | Boundary::Bottom => Axis::Vertical,
        Boundary::None => Axis::None,
    }
}

fn box_at(bundle: &CaptureBundle, xpath: &str, width: u32) -> Option<BBox> {
    bundle.element_state(xpath, width).ok().flatten().map(|s| s.bbox)
}

/// Direction of a failure, read at `fail_min`.
pub fn failure_direction(report: &FailureReport, bundle: &CaptureBundle, eps: f64) -> Direction {
    let w = report.fail_min;
    let from_edges = |outer: BBox, inner: BBox, horizontal_only: bool| {
        let h = outer.x - inner.x > eps || inner.right() - outer.right() > eps;
        let v = !horizontal_only && (outer.y - inner.y > eps || inner.bottom() - outer.bottom() > eps);
        if h && v {
            return Direction {
                axis: Axis::Both,
                boundary: Boundary::None,
            };
        }
        let mut edge_inner = inner;
        if horizontal_only {
            // ignore vertical extent for viewport bounds
            edge_inner.y = outer.y;
            edge_inner.h = outer.h.min(inner.h);
        }
        let boundary = violated_edge(&outer, &edge_inner, eps);
        let boundary = if boundary == Boundary::None { report.boundary } else { boundary };
        Direction {
            axis: axis_of(boundary),
            boundary,
        }
    };
    let boxes: Vec<Option<BBox>> = report.affected.iter().map(|x| box_at(bundle, x, w)).collect();
    match (report.rlf_type, boxes.as_slice()) {
        (RlfType::EP, [Some(child), Some(parent)]) => from_edges(*parent, *child, false),
        (RlfType::VP, [Some(child), Some(body)]) => from_edges(*body, *child, true),
        (RlfType::EC, [Some(a), Some(b)]) => {
            let dx = a.right().min(b.right()) - a.x.max(b.x);
            let dy = a.bottom().min(b.bottom()) - a.y.max(b.y);
            Direction {
                axis: if dx <= dy { Axis::Horizontal } else { Axis::Vertical },
                boundary: Boundary::None,
            }
        }
        (RlfType::WE, _) => Direction {
            axis: Axis::Both,
            boundary: Boundary::None,
        },
        (RlfType::SR, _) => Direction {
            axis: Axis::None,
            boundary: Boundary::None,
        },
        _ => Direction {
            axis: axis_of(report.boundary),
            boundary: report.boundary,
        },
    }
}

fn ranges_overlap(a0: f64, a1: f64, b0: f64, b1: f64) -> bool {
    a1.min(b1) - a0.max(b0) > 0.0
}

fn aligned(a: &BBox, b: &BBox, axis: Axis) -> bool {
    let column = ranges_overlap(a.x, a.right(), b.x, b.right());
    let row = ranges_overlap(a.y, a.bottom(), b.y, b.bottom());
    match axis {
        Axis::Vertical => column,
        Axis::Horizontal => row,
        Axis::Both | Axis::None => column || row,
    }
}

/// Elements searched for a failure: the affected elements that are not
/// containers, their siblings aligned along the failure axis, and their
/// containers (hop by hop up to `options.hops`).
pub fn neighbor_search(
    report: &FailureReport,
    bundle: &CaptureBundle,
    dir: Direction,
    options: &LocalizeOptions,
) -> Vec<Neighbor> {
    let tree = bundle.tree();
    let pool = candidate_pool(bundle);
    let Some(record) = bundle.record_index(report.fail_min) else {
        return Vec::new();
    };
    let affected: Vec<usize> = report.affected.iter().filter_map(|x| tree.index_of(x)).collect();
    let tier = |n: usize| if affected.contains(&n) { Tier::Affected } else { Tier::Neighbor };
    let visible_box = |n: usize| {
        bundle
            .state(record, n)
            .filter(|s| s.visible && !s.bbox.is_empty())
            .map(|s| s.bbox)
    };

    let container = match report.rlf_type {
        RlfType::EP | RlfType::VP => report.affected.get(1).and_then(|x| tree.index_of(x)),
        _ => None,
    };
    let subjects: Vec<usize> = affected.iter().copied().filter(|&n| Some(n) != container && pool[n]).collect();

    let mut found: BTreeMap<(usize, Role), ()> = BTreeMap::new();
    for &s in &subjects {
        found.insert((s, Role::Subject), ());
    }
    let mut level = subjects.clone();
    for _ in 0..options.hops.max(1) {
        let mut parents = Vec::new();
        for &s in &level {
            let Some(sb) = visible_box(s) else { continue };
            for sib in tree.siblings(s) {
                if !pool[sib] || subjects.contains(&sib) {
                    continue;
                }
                if visible_box(sib).is_some_and(|b| aligned(&b, &sb, dir.axis)) {
                    found.insert((sib, Role::Sibling), ());
                }
            }
            if let Some(p) = tree.node(s).parent {
                if pool[p] && !parents.contains(&p) {
                    parents.push(p);
                }
            }
        }
        for &p in &parents {
            found.insert((p, Role::Parent), ());
        }
        level = parents;
        if level.is_empty() {
            break;
        }
    }
    found
        .into_keys()
        .map(|(node, role)| Neighbor {
            xpath: tree.node(node).xpath.clone(),
            node,
            role,
            tier: tier(node),
        })
        .collect()
}

fn is_flex(display: &str) -> bool {
    matches!(display.trim(), "flex" | "inline-flex")
}

/// Candidates for one neighbour under one set entry.
fn evaluate(
    entry: SetEntry,
    neighbor: &Neighbor,
    bundle: &CaptureBundle,
    style: &StyleIndex,
    record: usize,
    dir: Direction,
) -> Vec<Candidate> {
    let m = entry.matcher;
    if m.applies_to_parent() != (neighbor.role == Role::Parent) {
        return Vec::new();
    }
    let node = neighbor.node;
    let make = |property: &str, kind, authored: Option<AuthoredValue>, normalized_px| Candidate {
        xpath: neighbor.xpath.clone(),
        property: property.to_string(),
        kind,
        authored,
        normalized_px,
        tier: neighbor.tier,
        set_rank: entry.rank,
        doc_order: node,
    };
    let mut out = Vec::new();
    for &property in m.properties() {
        if !axis_relevant(property, dir) {
            continue;
        }
        let authored = style.resolve_at(bundle, node, property, record);
        let raw = authored.as_ref().map(|a| a.raw_value.trim().to_ascii_lowercase());
        match m {
            Matcher::PositionAbsolute => {
                if raw.as_deref() == Some("absolute") {
                    out.push(make(property, CandidateKind::Authored, authored, None));
                }
            }
            Matcher::Float => {
                if raw.as_deref().is_some_and(|v| v != "none") {
                    out.push(make(property, CandidateKind::Authored, authored, None));
                }
            }
            Matcher::Display | Matcher::WhiteSpace => {
                if authored.is_some() {
                    out.push(make(property, CandidateKind::Authored, authored, None));
                }
            }
            Matcher::NegativeMargin => {
                if authored.as_ref().and_then(|a| a.normalized_px).is_some_and(|v| v < 0.0) {
                    out.push(make(property, CandidateKind::Authored, authored, None));
                }
            }
            Matcher::FixedDimension => {
                if let Some(a) = authored.filter(|a| crate::css::is_fixed_px(&a.raw_value)) {
                    let px = a.normalized_px;
                    out.push(make(property, CandidateKind::Authored, Some(a), px));
                }
            }
            Matcher::MarginPadding | Matcher::FontSize | Matcher::MaxDimension | Matcher::ParentWidth => {
                if let Some(a) = authored.filter(|a| a.normalized_px.is_some()) {
                    let px = a.normalized_px;
                    out.push(make(property, CandidateKind::Authored, Some(a), px));
                }
            }
            Matcher::MissingFlexWrap => {
                let flex = bundle.state(record, node).is_some_and(|s| is_flex(&s.computed.display));
                let wraps = raw.as_deref().is_some_and(|v| v.starts_with("wrap"));
                if flex && !wraps {
                    let kind = if authored.is_some() { CandidateKind::Authored } else { CandidateKind::Missing };
                    out.push(make(property, kind, authored, None));
                }
            }
            Matcher::MissingFlex => {
                let flex = bundle.state(record, node).is_some_and(|s| is_flex(&s.computed.display));
                if !flex {
                    let kind = if authored.is_some() { CandidateKind::Authored } else { CandidateKind::Missing };
                    out.push(make(property, kind, authored, None));
                }
            }
        }
    }
    out
}

/// The candidate set for a non-SR failure, in document order. A pair found
/// by several set entries keeps the best-ranked one.
pub fn collect_candidates(
    report: &FailureReport,
    bundle: &CaptureBundle,
    style: &StyleIndex,
    set: &PropertySet,
    dir: Direction,
    neighbors: &[Neighbor],
) -> Vec<Candidate> {
    let Some(record) = bundle.record_index(report.fail_min) else {
        return Vec::new();
    };
    let mut best: BTreeMap<(usize, String), Candidate> = BTreeMap::new();
    for n in neighbors {
        for &entry in &set.entries {
            for c in evaluate(entry, n, bundle, style, record, dir) {
                let key = (c.doc_order, c.property.clone());
                match best.get(&key) {
                    Some(old) if old.set_rank <= c.set_rank => {}
                    _ => {
                        best.insert(key, c);
                    }
                }
            }
        }
    }
    best.into_values().collect()
}

/// A pair of media-conditioned rules that both apply throughout a small
/// range and set the same property on the same elements.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MediaConflict {
    pub first: RuleSource,
    pub second: RuleSource,
    pub property: String,
    pub xpaths: Vec<String>,
    /// Closed width interval where both conditions hold.
    pub interval: (f64, f64),
}

fn overlap_interval(a: &[(f64, f64)], b: &[(f64, f64)], lo: f64, hi: f64) -> Option<(f64, f64)> {
    for &(a0, a1) in a {
        for &(b0, b1) in b {
            let (s, e) = (a0.max(b0), a1.min(b1));
            if s <= lo && e >= hi {
                return Some((s, e));
            }
        }
    }
    None
}

/// Media rule pairs behind a small-range failure.
pub fn localize_small_range(report: &FailureReport, bundle: &CaptureBundle, style: &StyleIndex) -> Vec<MediaConflict> {
    let rules = style.rules();
    let active: Vec<usize> = (0..rules.len())
        .filter(|&r| {
            rules[r].media.as_ref().is_some_and(|m| {
                bundle
                    .widths()
                    .filter(|w| (report.fail_min..=report.fail_max).contains(w))
                    .all(|w| m.matches(w as f64))
            })
        })
        .collect();
    let tree = bundle.tree();
    let body = tree.subtree(bundle.body_index());
    let mut conflicts: BTreeMap<(RuleSource, RuleSource, String), MediaConflict> = BTreeMap::new();
    for node in body {
        let matched: Vec<usize> = style.matching_rules(node).filter(|r| active.contains(r)).collect();
        for (i, &a) in matched.iter().enumerate() {
            for &b in &matched[i + 1..] {
                let (ra, rb) = (&rules[a], &rules[b]);
                let (Some(ma), Some(mb)) = (&ra.media, &rb.media) else { continue };
                let Some(interval) = overlap_interval(
                    &ma.intervals(),
                    &mb.intervals(),
                    report.fail_min as f64,
                    report.fail_max as f64,
                ) else {
                    continue;
                };
                for da in &ra.declarations {
                    if !rb.declarations.iter().any(|db| db.property == da.property) {
                        continue;
                    }
                    let (first, second) = if ra.source <= rb.source {
                        (ra.source, rb.source)
                    } else {
                        (rb.source, ra.source)
                    };
                    let entry = conflicts
                        .entry((first, second, da.property.clone()))
                        .or_insert_with(|| MediaConflict {
                            first,
                            second,
                            property: da.property.clone(),
                            xpaths: Vec::new(),
                            interval,
                        });
                    let xp = &tree.node(node).xpath;
                    if !entry.xpaths.contains(xp) {
                        entry.xpaths.push(xp.clone());
                    }
                }
            }
        }
    }
    conflicts.into_values().collect()
}

/// Localization output for one failure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Localization {
    pub failure_id: String,
    pub direction: Direction,
    pub neighbors: Vec<String>,
    pub candidates: Vec<Candidate>,
    pub media_conflicts: Vec<MediaConflict>,
}

pub fn localize(
    report: &FailureReport,
    bundle: &CaptureBundle,
    style: &StyleIndex,
    options: &LocalizeOptions,
) -> Localization {
    let direction = failure_direction(report, bundle, options.eps);
    let mut out = Localization {
        failure_id: report.id.clone(),
        direction,
        neighbors: Vec::new(),
        candidates: Vec::new(),
        media_conflicts: Vec::new(),
    };
    match PropertySet::for_type(report.rlf_type) {
        Some(set) => {
            let neighbors = neighbor_search(report, bundle, direction, options);
            out.candidates = collect_candidates(report, bundle, style, &set, direction, &neighbors);
            out.neighbors = neighbors.into_iter().map(|n| n.xpath).collect();
            out.neighbors.dedup();
        }
        None => out.media_conflicts = localize_small_range(report, bundle, style),
    }
    out
}

pub fn localize_all(
    reports: &[FailureReport],
    bundle: &CaptureBundle,
    style: &StyleIndex,
    options: &LocalizeOptions,
    exec: Execution,
) -> Vec<Localization> {
    map_slice(reports, exec, |r| localize(r, bundle, style, options))
}

/// Human-readable origin of a candidate's value.
pub fn candidate_source(style: &StyleIndex, c: &Candidate) -> String {
    match &c.authored {
        Some(a) => style.describe_origin(&a.origin),
        None => "-".to_string(),
    }
}
