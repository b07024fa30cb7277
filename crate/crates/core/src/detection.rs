//! Responsive layout failure detection.
//!
//! Every sampled width is classified independently (in parallel when the
//! `parallel` feature is on), then consecutive widths that show the same
//! (type, affected elements) failure are merged into one report.
//!
//! Per-width rules, evaluated over the candidate pool (rendered elements
//! other than `html`/`body`, minus animated subtrees):
//!
//! * **VP**: the element crosses the body's horizontal bounds by more than
//!   `eps` and its parent does not (only the outermost protruder counts).
//! * **EP**: the element is not contained in its DOM parent (within `eps`)
//!   and is not already a VP at that width. Children of `body` are covered
//!   by VP instead.
//! * **EC**: two siblings intersect by more than `eps` on both axes.
//! * **WE**: a row of at least three siblings at the widest sampled width
//!   loses a member below the leader's band while two or more stay on it.
//! * **SR**: a short interior run of widths whose relation map differs from
//!   both neighbouring runs while those two agree.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::par::{map_range, Execution};
use crate::snapshot::{BBox, CaptureBundle, ElementState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RlfType {
    EC,
    EP,
    VP,
    WE,
    SR,
}

impl RlfType {
    pub const ALL: [RlfType; 5] = [RlfType::EC, RlfType::EP, RlfType::VP, RlfType::WE, RlfType::SR];

    pub fn name(self) -> &'static str {
        match self {
            RlfType::EC => "EC",
            RlfType::EP => "EP",
            RlfType::VP => "VP",
            RlfType::WE => "WE",
            RlfType::SR => "SR",
        }
    }
}

impl fmt::Display for RlfType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Left,
    Right,
    Top,
    Bottom,
    #[default]
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Observability {
    #[default]
    Unknown,
    Observable,
    Noi,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureReport {
    pub id: String,
    pub rlf_type: RlfType,
    /// EP: [protruder, container]; VP: [protruder, body]; EC: the colliding
    /// pair in document order; WE: [wrapped, row members...]; SR: empty.
    pub affected: Vec<String>,
    pub fail_min: u32,
    pub fail_max: u32,
    pub boundary: Boundary,
    pub observability: Observability,
    /// Pixel-diff count behind the observability verdict, once classified.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub differing_pixels: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectConfig {
    pub eps: f64,
    pub sr_max_span: u32,
}

impl Default for DetectConfig {
    fn default() -> Self {
        Self {
            eps: 1.0,
            sr_max_span: 50,
        }
    }
}

/// Minimum vertical overlap (fraction of the shorter box) for two siblings
/// to count as one horizontal row.
pub const ROW_OVERLAP_RATIO: f64 = 0.5;

/// True iff the rectangles overlap by more than `eps` on both axes.
pub fn intersects(a: &BBox, b: &BBox, eps: f64) -> bool {
    let dx = a.right().min(b.right()) - a.x.max(b.x);
    let dy = a.bottom().min(b.bottom()) - a.y.max(b.y);
    dx > eps && dy > eps
}

/// True iff `child` lies inside `parent` grown by `eps` on every side.
pub fn contains(parent: &BBox, child: &BBox, eps: f64) -> bool {
    child.x >= parent.x - eps
        && child.y >= parent.y - eps
        && child.right() <= parent.right() + eps
        && child.bottom() <= parent.bottom() + eps
}

/// Edge of `outer` that `inner` crosses the furthest, if any.
pub fn violated_edge(outer: &BBox, inner: &BBox, eps: f64) -> Boundary {
    let depths = [
        (Boundary::Left, outer.x - inner.x),
        (Boundary::Right, inner.right() - outer.right()),
        (Boundary::Top, outer.y - inner.y),
        (Boundary::Bottom, inner.bottom() - outer.bottom()),
    ];
    depths
        .iter()
        .filter(|(_, d)| *d > eps)
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(b, _)| *b)
        .unwrap_or(Boundary::None)
}

fn vertical_row_overlap(a: &BBox, b: &BBox) -> bool {
    let dy = a.bottom().min(b.bottom()) - a.y.max(b.y);
    let shorter = a.h.min(b.h);
    shorter > 0.0 && dy >= ROW_OVERLAP_RATIO * shorter
}

fn horizontally_disjoint(a: &BBox, b: &BBox, eps: f64) -> bool {
    a.right().min(b.right()) - a.x.max(b.x) <= eps
}

/// One per-width classification.
#[derive(Debug, Clone, PartialEq)]
pub struct Hit {
    pub width: u32,
    pub rlf_type: RlfType,
    pub affected: Vec<String>,
    pub boundary: Boundary,
}

/// Merges hits into reports: maximal runs of consecutive sampled widths
/// (`step` apart) with equal (type, affected). Report ids are assigned in
/// (fail_min, type, affected) order.
pub fn merge_ranges(hits: &[Hit], step: u32) -> Vec<FailureReport> {
    let mut groups: BTreeMap<(RlfType, &[String]), Vec<(u32, Boundary)>> = BTreeMap::new();
    for h in hits {
        groups
            .entry((h.rlf_type, h.affected.as_slice()))
            .or_default()
            .push((h.width, h.boundary));
    }
    let mut reports = Vec::new();
    for ((rlf_type, affected), mut widths) in groups {
        widths.sort_by_key(|w| w.0);
        widths.dedup_by_key(|w| w.0);
        let mut start = 0;
        for i in 1..=widths.len() {
            if i == widths.len() || widths[i].0 != widths[i - 1].0 + step {
                reports.push(FailureReport {
                    id: String::new(),
                    rlf_type,
                    affected: affected.to_vec(),
                    fail_min: widths[start].0,
                    fail_max: widths[i - 1].0,
                    boundary: widths[start].1,
                    observability: Observability::Unknown,
                    differing_pixels: None,
                });
                start = i;
            }
        }
    }
    reports.sort_by(|a, b| {
        (a.fail_min, a.rlf_type, &a.affected, a.fail_max).cmp(&(b.fail_min, b.rlf_type, &b.affected, b.fail_max))
    });
    for (i, r) in reports.iter_mut().enumerate() {
        r.id = format!("rlf-{:03}", i + 1);
    }
    reports
}

/// Elements eligible for classification: everything under `body` that is
/// not animated and has no animated ancestor.
pub fn candidate_pool(bundle: &CaptureBundle) -> Vec<bool> {
    let tree = bundle.tree();
    let mut pool = vec![true; tree.len()];
    pool[0] = false;
    pool[bundle.body_index()] = false;
    for node in 0..tree.len() {
        let animated = (0..bundle.record_count())
            .any(|r| bundle.state(r, node).is_some_and(|s| s.computed.is_animated()));
        if animated {
            for n in tree.subtree(node) {
                pool[n] = false;
            }
        }
    }
    // anything outside body's subtree (head content) never renders
    let body = tree.subtree(bundle.body_index());
    for (n, p) in pool.iter_mut().enumerate() {
        if !body.contains(&n) {
            *p = false;
        }
    }
    pool
}

/// Horizontal rows at the reference (widest) width: sibling groups of three
/// or more, leader first.
#[derive(Debug, Clone, PartialEq)]
pub struct RowGroup {
    pub leader: usize,
    pub members: Vec<usize>,
}

struct Detector<'a> {
    bundle: &'a CaptureBundle,
    eps: f64,
    pool: Vec<bool>,
    /// Pool children per node, document order.
    pool_children: Vec<Vec<usize>>,
    rows: Vec<RowGroup>,
}

impl<'a> Detector<'a> {
    fn new(bundle: &'a CaptureBundle, eps: f64) -> Self {
        let pool = candidate_pool(bundle);
        let tree = bundle.tree();
        let pool_children = (0..tree.len())
            .map(|n| tree.node(n).children.iter().copied().filter(|&c| pool[c]).collect())
            .collect();
        let mut d = Detector {
            bundle,
            eps,
            pool,
            pool_children,
            rows: Vec::new(),
        };
        d.rows = d.row_groups(bundle.record_count() - 1);
        d
    }

    fn live(&self, record: usize, node: usize) -> Option<&'a ElementState> {
        if !self.pool[node] {
            return None;
        }
        self.bundle
            .state(record, node)
            .filter(|s| s.visible && !s.bbox.is_empty())
    }

    fn xpath(&self, node: usize) -> String {
        self.bundle.tree().node(node).xpath.clone()
    }

    fn row_pairs(&self, record: usize, parent: usize) -> Vec<(usize, usize)> {
        let kids: Vec<(usize, BBox)> = self.pool_children[parent]
            .iter()
            .filter_map(|&c| self.live(record, c).map(|s| (c, s.bbox)))
            .collect();
        let mut pairs = Vec::new();
        for i in 0..kids.len() {
            for j in i + 1..kids.len() {
                let (a, b) = (&kids[i].1, &kids[j].1);
                if vertical_row_overlap(a, b) && horizontally_disjoint(a, b, self.eps) {
                    pairs.push((kids[i].0, kids[j].0));
                }
            }
        }
        pairs
    }

    fn row_groups(&self, record: usize) -> Vec<RowGroup> {
        let tree = self.bundle.tree();
        let mut groups = Vec::new();
        for parent in 0..tree.len() {
            let pairs = self.row_pairs(record, parent);
            if pairs.is_empty() {
                continue;
            }
            // union-find over the parent's children
            let mut root: BTreeMap<usize, usize> = BTreeMap::new();
            fn find(root: &mut BTreeMap<usize, usize>, x: usize) -> usize {
                let p = *root.entry(x).or_insert(x);
                if p == x {
                    x
                } else {
                    let r = find(root, p);
                    root.insert(x, r);
                    r
                }
            }
            for (a, b) in pairs {
                let (ra, rb) = (find(&mut root, a), find(&mut root, b));
                if ra != rb {
                    root.insert(ra.max(rb), ra.min(rb));
                }
            }
            let keys: Vec<usize> = root.keys().copied().collect();
            let mut comps: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
            for k in keys {
                let r = find(&mut root, k);
                comps.entry(r).or_default().push(k);
            }
            for (_, members) in comps {
                if members.len() < 3 {
                    continue;
                }
                let leader = *members
                    .iter()
                    .min_by(|&&a, &&b| {
                        let xa = self.bundle.state(record, a).map(|s| s.bbox.x).unwrap_or(0.0);
                        let xb = self.bundle.state(record, b).map(|s| s.bbox.x).unwrap_or(0.0);
                        xa.total_cmp(&xb).then(a.cmp(&b))
                    })
                    .expect("non-empty");
                groups.push(RowGroup { leader, members });
            }
        }
        groups
    }

    fn classify(&self, record: usize) -> Vec<Hit> {
        let bundle = self.bundle;
        let tree = bundle.tree();
        let width = bundle.width_at(record);
        let eps = self.eps;
        let body = bundle.body_index();
        let body_box = bundle.state(record, body).map(|s| s.bbox).unwrap_or_default();
        let crosses_viewport = |b: &BBox| b.x < body_box.x - eps || b.right() > body_box.right() + eps;
        let mut hits = Vec::new();
        let mut hit = |t: RlfType, affected: Vec<usize>, boundary: Boundary| {
            hits.push(Hit {
                width,
                rlf_type: t,
                affected: affected.into_iter().map(|n| self.xpath(n)).collect(),
                boundary,
            });
        };

        for node in 0..tree.len() {
            let Some(state) = self.live(record, node) else { continue };
            let parent = tree.node(node).parent.expect("pool nodes sit under body");
            let parent_state = self.live(record, parent);

            if crosses_viewport(&state.bbox) {
                let parent_crosses = parent_state.is_some_and(|p| crosses_viewport(&p.bbox));
                if !parent_crosses {
                    let edge = if state.bbox.right() - body_box.right() >= body_box.x - state.bbox.x {
                        Boundary::Right
                    } else {
                        Boundary::Left
                    };
                    hit(RlfType::VP, vec![node, body], edge);
                }
                continue;
            }
            if let Some(p) = parent_state {
                if !contains(&p.bbox, &state.bbox, eps) {
                    hit(RlfType::EP, vec![node, parent], violated_edge(&p.bbox, &state.bbox, eps));
                }
            }
        }

        for parent in 0..tree.len() {
            let kids: Vec<(usize, BBox)> = self.pool_children[parent]
                .iter()
                .filter_map(|&c| self.live(record, c).map(|s| (c, s.bbox)))
                .collect();
            for i in 0..kids.len() {
                for j in i + 1..kids.len() {
                    if intersects(&kids[i].1, &kids[j].1, eps) {
                        hit(RlfType::EC, vec![kids[i].0, kids[j].0], Boundary::None);
                    }
                }
            }
        }

        for row in &self.rows {
            let Some(leader) = self.live(record, row.leader) else { continue };
            let band_bottom = leader.bbox.bottom();
            let mut on_band = Vec::new();
            let mut wrapped = Vec::new();
            for &m in &row.members {
                match self.live(record, m) {
                    Some(s) if m != row.leader && s.bbox.y >= band_bottom - eps => wrapped.push(m),
                    Some(_) => on_band.push(m),
                    None => {}
                }
            }
            if on_band.len() < 2 {
                continue;
            }
            for w in wrapped {
                let mut affected = vec![w];
                affected.extend(row.members.iter().copied().filter(|&m| m != w));
                hit(RlfType::WE, affected, Boundary::None);
            }
        }
        hits
    }

    /// Discrete layout relations at one width.
    fn relation_map(&self, record: usize) -> RelationMap {
        let tree = self.bundle.tree();
        let mut map = RelationMap::default();
        for parent in 0..tree.len() {
            let parent_box = if parent == self.bundle.body_index() {
                self.bundle.state(record, parent).map(|s| s.bbox)
            } else {
                self.live(record, parent).map(|s| s.bbox)
            };
            let kids: Vec<(usize, BBox)> = self.pool_children[parent]
                .iter()
                .filter_map(|&c| self.live(record, c).map(|s| (c, s.bbox)))
                .collect();
            if let Some(pb) = parent_box {
                for (c, b) in &kids {
                    if contains(&pb, b, self.eps) {
                        map.contained.insert((parent, *c));
                    }
                }
            }
            for i in 0..kids.len() {
                for j in i + 1..kids.len() {
                    let (a, b) = (&kids[i].1, &kids[j].1);
                    let key = (kids[i].0, kids[j].0);
                    if intersects(a, b, self.eps) {
                        map.overlapping.insert(key);
                    }
                    if vertical_row_overlap(a, b) && horizontally_disjoint(a, b, self.eps) {
                        map.rows.insert(key);
                    }
                }
            }
        }
        map
    }
}

/// Per-width layout relations between DOM neighbours, by node index.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RelationMap {
    /// (parent, child) pairs where the parent contains the child.
    pub contained: BTreeSet<(usize, usize)>,
    /// Sibling pairs aligned in one horizontal row.
    pub rows: BTreeSet<(usize, usize)>,
    /// Sibling pairs that intersect.
    pub overlapping: BTreeSet<(usize, usize)>,
}

/// Relation maps for every sampled width.
pub fn relation_maps(bundle: &CaptureBundle, eps: f64, exec: Execution) -> Vec<RelationMap> {
    let d = Detector::new(bundle, eps);
    map_range(bundle.record_count(), exec, |r| d.relation_map(r))
}

/// Small-range intervals: interior runs of equal relation maps that differ
/// from both neighbouring runs while those agree, no longer than `max_span` px.
pub fn small_range_intervals(bundle: &CaptureBundle, maps: &[RelationMap], max_span: u32) -> Vec<(u32, u32)> {
    let mut runs: Vec<(usize, usize)> = Vec::new();
    let mut start = 0;
    for i in 1..=maps.len() {
        if i == maps.len() || maps[i] != maps[start] {
            runs.push((start, i - 1));
            start = i;
        }
    }
    let mut out = Vec::new();
    for k in 1..runs.len().saturating_sub(1) {
        let (s, e) = runs[k];
        let (v1, v2) = (bundle.width_at(s), bundle.width_at(e));
        if maps[runs[k - 1].0] == maps[runs[k + 1].0] && v2 - v1 < max_span {
            out.push((v1, v2));
        }
    }
    out
}

/// Detects failures over every sampled width.
pub fn detect(bundle: &CaptureBundle, config: &DetectConfig) -> Vec<FailureReport> {
    detect_with(bundle, config, Execution::default())
}

pub fn detect_with(bundle: &CaptureBundle, config: &DetectConfig, exec: Execution) -> Vec<FailureReport> {
    let detector = Detector::new(bundle, config.eps);
    let n = bundle.record_count();
    let (mut hits, maps): (Vec<Vec<Hit>>, Vec<RelationMap>) =
        map_range(n, exec, |r| (detector.classify(r), detector.relation_map(r)))
            .into_iter()
            .unzip();
    for (v1, v2) in small_range_intervals(bundle, &maps, config.sr_max_span) {
        hits.push(
            bundle
                .widths()
                .filter(|w| (v1..=v2).contains(w))
                .map(|width| Hit {
                    width,
                    rlf_type: RlfType::SR,
                    affected: Vec::new(),
                    boundary: Boundary::None,
                })
                .collect(),
        );
    }
    let hits: Vec<Hit> = hits.into_iter().flatten().collect();
    merge_ranges(&hits, bundle.step)
}

/// Row groups at the widest sampled width, for inspection and tests.
pub fn reference_rows(bundle: &CaptureBundle, eps: f64) -> Vec<RowGroup> {
    Detector::new(bundle, eps).rows
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::snapshot::{testutil::tiny_parts, BundleParts, CaptureBundle, ComputedSubset};

    #[test]
    fn intersects_examples() {
        let b = |x, y| BBox::new(x, y, 10.0, 10.0);
        assert!(!intersects(&b(0.0, 0.0), &b(20.0, 0.0), 1.0));
        assert!(intersects(&b(0.0, 0.0), &b(5.0, 5.0), 1.0));
        assert!(!intersects(&b(0.0, 0.0), &b(10.0, 0.0), 1.0));
    }

    #[test]
    fn contains_examples() {
        let parent = BBox::new(0.0, 0.0, 100.0, 100.0);
        assert!(contains(&parent, &BBox::new(10.0, 10.0, 20.0, 20.0), 1.0));
        assert!(!contains(&parent, &BBox::new(95.0, 10.0, 20.0, 20.0), 1.0));
        assert!(contains(&parent, &parent, 0.0));
    }

    #[test]
    fn violated_edge_picks_deepest() {
        let p = BBox::new(0.0, 0.0, 100.0, 100.0);
        assert_eq!(violated_edge(&p, &BBox::new(90.0, 0.0, 20.0, 10.0), 1.0), Boundary::Right);
        assert_eq!(violated_edge(&p, &BBox::new(0.0, 95.0, 10.0, 10.0), 1.0), Boundary::Bottom);
        assert_eq!(violated_edge(&p, &BBox::new(95.0, 70.0, 10.0, 50.0), 1.0), Boundary::Bottom);
        assert_eq!(violated_edge(&p, &BBox::new(0.0, 0.0, 100.5, 10.0), 1.0), Boundary::None);
    }

    fn hit(width: u32, affected: &[&str]) -> Hit {
        Hit {
            width,
            rlf_type: RlfType::EP,
            affected: affected.iter().map(|s| s.to_string()).collect(),
            boundary: Boundary::Right,
        }
    }

    #[test]
    fn merge_examples() {
        let r = merge_ranges(&[hit(320, &["a"]), hit(321, &["a"]), hit(322, &["a"])], 1);
        assert_eq!(r.len(), 1);
        assert_eq!((r[0].fail_min, r[0].fail_max), (320, 322));
        assert_eq!(r[0].id, "rlf-001");

        let r = merge_ranges(&[hit(320, &["a"]), hit(322, &["a"])], 1);
        assert_eq!(r.len(), 2);
        assert!(merge_ranges(&[], 1).is_empty());

        // different keys never merge; step-aware adjacency
        let r = merge_ranges(&[hit(320, &["a"]), hit(330, &["a"]), hit(330, &["b"])], 10);
        assert_eq!(r.len(), 2);
        assert_eq!((r[0].fail_min, r[0].fail_max), (320, 330));
    }

    /// Sets the box of `xpath` at every width via `f(width)`.
    fn with_boxes(mut parts: BundleParts, xpath: &str, f: impl Fn(f64) -> BBox) -> BundleParts {
        for r in &mut parts.records {
            r.entries.get_mut(xpath).unwrap().bbox = f(r.width as f64);
        }
        parts
    }

    const A: &str = "/html[1]/body[1]/div[1]";
    const SPAN: &str = "/html[1]/body[1]/div[1]/span[1]";
    const B: &str = "/html[1]/body[1]/div[2]";
    const C: &str = "/html[1]/body[1]/div[3]";

    #[test]
    fn tiny_bundle_is_clean() {
        let b = CaptureBundle::from_parts(tiny_parts(320, 400, 1)).unwrap();
        assert!(detect(&b, &DetectConfig::default()).is_empty());
    }

    #[test]
    fn protruding_span_yields_one_ep_range() {
        // span right edge 260 exceeds div[1] right edge (w - 100) by more than eps up to w = 358
        let parts = with_boxes(tiny_parts(320, 400, 1), A, |w| BBox::new(0.0, 0.0, w - 100.0, 100.0));
        let parts = with_boxes(parts, SPAN, |_| BBox::new(200.0, 10.0, 60.0, 20.0));
        let b = CaptureBundle::from_parts(parts).unwrap();
        let r = detect(&b, &DetectConfig::default());
        assert_eq!(r.len(), 1, "{r:?}");
        assert_eq!(r[0].rlf_type, RlfType::EP);
        assert_eq!(r[0].affected, vec![SPAN.to_string(), A.to_string()]);
        assert_eq!((r[0].fail_min, r[0].fail_max), (320, 358));
        assert_eq!(r[0].boundary, Boundary::Right);
    }

    #[test]
    fn sibling_collision_is_ec_and_viewport_crossing_is_vp() {
        let parts = with_boxes(tiny_parts(320, 340, 1), B, |_| BBox::new(0.0, 50.0, 100.0, 100.0));
        let parts = with_boxes(parts, C, |w| BBox::new(0.0, 200.0, w + 30.0, 50.0));
        let b = CaptureBundle::from_parts(parts).unwrap();
        let r = detect(&b, &DetectConfig::default());
        let kinds: Vec<_> = r.iter().map(|f| (f.rlf_type, f.fail_min, f.fail_max)).collect();
        assert_eq!(kinds, vec![(RlfType::EC, 320, 340), (RlfType::VP, 320, 340)]);
        assert_eq!(r[0].affected, vec![A.to_string(), B.to_string()]);
        assert_eq!(r[1].boundary, Boundary::Right);
    }

    #[test]
    fn animated_subtrees_are_excluded() {
        let mut parts = with_boxes(tiny_parts(320, 340, 1), SPAN, |w| BBox::new(w, 10.0, 50.0, 20.0));
        for r in &mut parts.records {
            r.entries.get_mut(A).unwrap().computed = ComputedSubset {
                has_transition: true,
                ..ComputedSubset::default()
            };
        }
        let b = CaptureBundle::from_parts(parts).unwrap();
        assert!(detect(&b, &DetectConfig::default()).is_empty());
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let parts = with_boxes(tiny_parts(320, 500, 1), A, |w| BBox::new(0.0, 0.0, w - 150.0, 100.0));
        let parts = with_boxes(parts, SPAN, |_| BBox::new(200.0, 10.0, 60.0, 20.0));
        let b = CaptureBundle::from_parts(parts).unwrap();
        let cfg = DetectConfig::default();
        assert_eq!(detect_with(&b, &cfg, Execution::Sequential), detect_with(&b, &cfg, Execution::Parallel));
    }
}
