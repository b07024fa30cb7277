//! Capture bundles: the on-disk record of one page rendered at every sampled
//! viewport width, and the geometry/tree queries the analysis runs on.
//!
//! A bundle is a directory:
//!
//! ```text
//! manifest.json      schema_version, url, height, width range, file names, screenshots
//! dom.json           the DOM tree (captured once, shared by every width)
//! stylesheets.json   author stylesheets in document order, with origin labels
//! geometry.jsonl     one ViewportRecord per line, ascending width
//! images/            NOI screenshot pairs, "<failure id>.visible.png" / ".hidden.png"
//! ```
//!
//! Geometry is stored in CSS px rounded to two fractional digits. Boxes are
//! serialized as `[x, y, w, h]`.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.json";
pub const DOM_FILE: &str = "dom.json";
pub const STYLESHEETS_FILE: &str = "stylesheets.json";
pub const GEOMETRY_FILE: &str = "geometry.jsonl";
pub const IMAGES_DIR: &str = "images";

/// Tolerance on the body-width capture contract.
const BODY_WIDTH_TOLERANCE: f64 = 1.0;

#[derive(Debug, thiserror::Error)]
pub enum SnapshotError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("schema error: {0}")]
    Schema(String),
    #[error("no viewport record for width {0}")]
    MissingViewport(u32),
    #[error("duplicate xpath {0}")]
    DuplicateXPath(String),
    #[error("unknown xpath {0}")]
    UnknownXPath(String),
    #[error("width {0} was not sampled")]
    UnsampledWidth(u32),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> SnapshotError + '_ {
    move |source| SnapshotError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn round2(v: f64) -> f64 {
    let r = (v * 100.0).round() / 100.0;
    // normalize -0.0 so output is stable
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

/// Border box of an element in page coordinates (CSS px).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BBox {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl BBox {
    pub const fn new(x: f64, y: f64, w: f64, h: f64) -> Self {
        Self { x, y, w, h }
    }

    pub fn right(&self) -> f64 {
        self.x + self.w
    }

    pub fn bottom(&self) -> f64 {
        self.y + self.h
    }

    pub fn is_empty(&self) -> bool {
        self.w <= 0.0 || self.h <= 0.0
    }

    pub fn is_valid(&self) -> bool {
        [self.x, self.y, self.w, self.h].iter().all(|v| v.is_finite()) && self.w >= 0.0 && self.h >= 0.0
    }

    /// Smallest box covering both.
    pub fn union(&self, other: &BBox) -> BBox {
        let x = self.x.min(other.x);
        let y = self.y.min(other.y);
        BBox::new(x, y, self.right().max(other.right()) - x, self.bottom().max(other.bottom()) - y)
    }

    pub fn rounded(&self) -> BBox {
        BBox::new(round2(self.x), round2(self.y), round2(self.w), round2(self.h))
    }
}

impl Serialize for BBox {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        [round2(self.x), round2(self.y), round2(self.w), round2(self.h)].serialize(s)
    }
}

impl<'de> Deserialize<'de> for BBox {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let [x, y, w, h] = <[f64; 4]>::deserialize(d)?;
        Ok(BBox { x, y, w, h })
    }
}

/// One element of the captured DOM tree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomNode {
    pub xpath: String,
    pub tag: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub classes: Vec<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub attributes: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub inline_style: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<DomNode>,
}

impl DomNode {
    pub fn new(xpath: impl Into<String>, tag: impl Into<String>) -> Self {
        Self {
            xpath: xpath.into(),
            tag: tag.into(),
            id: None,
            classes: Vec::new(),
            attributes: BTreeMap::new(),
            inline_style: String::new(),
            children: Vec::new(),
        }
    }
}

/// The slice of the browser's computed style the analysis needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComputedSubset {
    pub font_size: f64,
    pub display: String,
    pub position: String,
    pub float: String,
    pub has_transition: bool,
    pub has_transform: bool,
}

impl Default for ComputedSubset {
    fn default() -> Self {
        Self {
            font_size: 16.0,
            display: "block".into(),
            position: "static".into(),
            float: "none".into(),
            has_transition: false,
            has_transform: false,
        }
    }
}

impl ComputedSubset {
    pub fn is_animated(&self) -> bool {
        self.has_transition || self.has_transform
    }
}

/// Geometry of one element at one width.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElementState {
    pub bbox: BBox,
    pub visible: bool,
    pub computed: ComputedSubset,
}

/// Serialized form of one sampled width.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViewportRecord {
    pub width: u32,
    pub entries: BTreeMap<String, ElementState>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StylesheetSource {
    /// Where the sheet came from: a URL, or `inline:<n>` for `<style>` blocks.
    pub origin: String,
    pub text: String,
}

/// A NOI screenshot pair. Paths are relative to the bundle directory;
/// `region` is in device px of the images.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreenshotPair {
    pub visible: String,
    pub hidden: String,
    pub region: BBox,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Manifest {
    schema_version: u32,
    url: String,
    height: u32,
    width_min: u32,
    width_max: u32,
    step: u32,
    dom: String,
    stylesheets: String,
    geometry: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    screenshots: BTreeMap<String, ScreenshotPair>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    warnings: Vec<String>,
}

/// Flattened, index-addressed view of one DOM node.
#[derive(Debug, Clone)]
pub struct NodeInfo {
    pub xpath: String,
    pub tag: String,
    pub id: Option<String>,
    pub classes: Vec<String>,
    pub attributes: BTreeMap<String, String>,
    pub inline_style: String,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    pub depth: usize,
}

/// Document-order node table built from the DOM tree. Node indices are
/// preorder positions, so comparing indices compares document order.
#[derive(Debug, Clone, Default)]
pub struct DomTree {
    nodes: Vec<NodeInfo>,
    by_xpath: HashMap<String, usize>,
    /// exclusive end of each node's subtree in preorder
    subtree_end: Vec<usize>,
}

impl DomTree {
    fn build(root: &DomNode) -> Result<Self, SnapshotError> {
        let mut tree = DomTree::default();
        tree.push(root, None, 0)?;
        Ok(tree)
    }

    fn push(&mut self, node: &DomNode, parent: Option<usize>, depth: usize) -> Result<usize, SnapshotError> {
        if node.xpath.is_empty() {
            return Err(SnapshotError::Schema("node with empty xpath".into()));
        }
        if let Some(p) = parent {
            let prefix = &self.nodes[p].xpath;
            if !(node.xpath.len() > prefix.len() + 1
                && node.xpath.starts_with(prefix.as_str())
                && node.xpath.as_bytes()[prefix.len()] == b'/')
            {
                return Err(SnapshotError::Schema(format!(
                    "xpath {} does not extend its parent {}",
                    node.xpath, prefix
                )));
            }
        }
        let idx = self.nodes.len();
        if self.by_xpath.insert(node.xpath.clone(), idx).is_some() {
            return Err(SnapshotError::DuplicateXPath(node.xpath.clone()));
        }
        self.nodes.push(NodeInfo {
            xpath: node.xpath.clone(),
            tag: node.tag.to_ascii_lowercase(),
            id: node.id.clone(),
            classes: node.classes.clone(),
            attributes: node.attributes.clone(),
            inline_style: node.inline_style.clone(),
            parent,
            children: Vec::new(),
            depth,
        });
        self.subtree_end.push(idx + 1);
        for child in &node.children {
            let c = self.push(child, Some(idx), depth + 1)?;
            self.nodes[idx].children.push(c);
        }
        self.subtree_end[idx] = self.nodes.len();
        Ok(idx)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, idx: usize) -> &NodeInfo {
        &self.nodes[idx]
    }

    pub fn nodes(&self) -> &[NodeInfo] {
        &self.nodes
    }

    pub fn index_of(&self, xpath: &str) -> Option<usize> {
        self.by_xpath.get(xpath).copied()
    }

    /// True when `ancestor` is a proper ancestor of `node`.
    pub fn is_ancestor(&self, ancestor: usize, node: usize) -> bool {
        ancestor < node && node < self.subtree_end[ancestor]
    }

    /// Indices of `idx` and all its descendants.
    pub fn subtree(&self, idx: usize) -> std::ops::Range<usize> {
        idx..self.subtree_end[idx]
    }

    pub fn siblings(&self, idx: usize) -> Vec<usize> {
        match self.nodes[idx].parent {
            Some(p) => self.nodes[p].children.iter().copied().filter(|&c| c != idx).collect(),
            None => Vec::new(),
        }
    }
}

/// Structural relatives of one element, as xpaths in document order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Neighbors {
    /// Empty for the root.
    pub parent: String,
    pub siblings: Vec<String>,
    pub children: Vec<String>,
}

/// A validated capture bundle. Immutable once built.
#[derive(Debug, Clone)]
pub struct CaptureBundle {
    pub url: String,
    pub height: u32,
    pub width_min: u32,
    pub width_max: u32,
    pub step: u32,
    dom: DomNode,
    stylesheets: Vec<StylesheetSource>,
    screenshots: BTreeMap<String, ScreenshotPair>,
    warnings: Vec<String>,
    /// Directory the bundle was loaded from, for resolving screenshot paths.
    root_dir: Option<PathBuf>,
    tree: DomTree,
    body: usize,
    /// states[record][node]
    states: Vec<Vec<Option<ElementState>>>,
}

impl PartialEq for CaptureBundle {
    fn eq(&self, other: &Self) -> bool {
        self.url == other.url
            && self.height == other.height
            && self.width_min == other.width_min
            && self.width_max == other.width_max
            && self.step == other.step
            && self.dom == other.dom
            && self.stylesheets == other.stylesheets
            && self.screenshots == other.screenshots
            && self.warnings == other.warnings
            && self.states == other.states
    }
}

/// Everything needed to assemble a bundle in memory.
#[derive(Debug, Clone)]
pub struct BundleParts {
    pub url: String,
    pub height: u32,
    pub width_min: u32,
    pub width_max: u32,
    pub step: u32,
    pub dom: DomNode,
    pub stylesheets: Vec<StylesheetSource>,
    pub records: Vec<ViewportRecord>,
    pub screenshots: BTreeMap<String, ScreenshotPair>,
    pub warnings: Vec<String>,
}

impl CaptureBundle {
    /// Validates the parts and builds the indexed bundle.
    pub fn from_parts(parts: BundleParts) -> Result<Self, SnapshotError> {
        let BundleParts {
            url,
            height,
            width_min,
            width_max,
            step,
            dom,
            stylesheets,
            mut records,
            screenshots,
            warnings,
        } = parts;
        if step == 0 {
            return Err(SnapshotError::Schema("step must be at least 1".into()));
        }
        if width_min > width_max {
            return Err(SnapshotError::Schema(format!(
                "width_min {width_min} exceeds width_max {width_max}"
            )));
        }
        if !dom.tag.eq_ignore_ascii_case("html") {
            return Err(SnapshotError::Schema(format!("root tag is {:?}, expected html", dom.tag)));
        }
        let tree = DomTree::build(&dom)?;
        let body = tree.nodes[0]
            .children
            .iter()
            .copied()
            .find(|&c| tree.nodes[c].tag == "body")
            .ok_or_else(|| SnapshotError::Schema("html has no body child".into()))?;

        records.sort_by_key(|r| r.width);
        let expected = ((width_max - width_min) / step + 1) as usize;
        let mut states = Vec::with_capacity(expected);
        let mut iter = records.into_iter().peekable();
        for k in 0..expected {
            let width = width_min + k as u32 * step;
            // anything sorting before the expected width is off-grid or a duplicate
            if let Some(r) = iter.peek() {
                if r.width < width {
                    return Err(SnapshotError::Schema(format!(
                        "record width {} is off the sampling grid or duplicated",
                        r.width
                    )));
                }
            }
            match iter.peek() {
                Some(r) if r.width == width => {}
                _ => return Err(SnapshotError::MissingViewport(width)),
            }
            let record = iter.next().expect("peeked");
            let mut row: Vec<Option<ElementState>> = vec![None; tree.len()];
            for (xpath, state) in record.entries {
                let idx = tree
                    .index_of(&xpath)
                    .ok_or_else(|| SnapshotError::Schema(format!("record {width} names unknown xpath {xpath}")))?;
                if !state.bbox.is_valid() {
                    return Err(SnapshotError::Schema(format!("invalid bbox for {xpath} at width {width}")));
                }
                if !(state.computed.font_size > 0.0 && state.computed.font_size.is_finite()) {
                    return Err(SnapshotError::Schema(format!(
                        "non-positive font size for {xpath} at width {width}"
                    )));
                }
                row[idx] = Some(state);
            }
            match &row[body] {
                Some(s) if (s.bbox.w - width as f64).abs() <= BODY_WIDTH_TOLERANCE => {}
                Some(s) => {
                    return Err(SnapshotError::Schema(format!(
                        "body width {} differs from viewport width {width}",
                        s.bbox.w
                    )))
                }
                None => return Err(SnapshotError::Schema(format!("record {width} has no body entry"))),
            }
            states.push(row);
        }
        if let Some(r) = iter.next() {
            return Err(SnapshotError::Schema(format!(
                "record width {} lies outside {width_min}..{width_max} or off the grid",
                r.width
            )));
        }
        for (id, pair) in &screenshots {
            if !pair.region.is_valid() {
                return Err(SnapshotError::Schema(format!("invalid screenshot region for {id}")));
            }
        }
        Ok(Self {
            url,
            height,
            width_min,
            width_max,
            step,
            dom,
            stylesheets,
            screenshots,
            warnings,
            root_dir: None,
            tree,
            body,
            states,
        })
    }

    pub fn into_parts(self) -> BundleParts {
        let records = self.viewport_records();
        BundleParts {
            url: self.url,
            height: self.height,
            width_min: self.width_min,
            width_max: self.width_max,
            step: self.step,
            dom: self.dom,
            stylesheets: self.stylesheets,
            records,
            screenshots: self.screenshots,
            warnings: self.warnings,
        }
    }

    pub fn dom(&self) -> &DomNode {
        &self.dom
    }

    pub fn tree(&self) -> &DomTree {
        &self.tree
    }

    pub fn stylesheets(&self) -> &[StylesheetSource] {
        &self.stylesheets
    }

    pub fn screenshots(&self) -> &BTreeMap<String, ScreenshotPair> {
        &self.screenshots
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn root_dir(&self) -> Option<&Path> {
        self.root_dir.as_deref()
    }

    pub fn body_index(&self) -> usize {
        self.body
    }

    pub fn record_count(&self) -> usize {
        self.states.len()
    }

    /// Sampled widths, ascending.
    pub fn widths(&self) -> impl DoubleEndedIterator<Item = u32> + ExactSizeIterator + '_ {
        (0..self.states.len()).map(move |k| self.width_at(k))
    }

    pub fn width_at(&self, record: usize) -> u32 {
        self.width_min + record as u32 * self.step
    }

    pub fn record_index(&self, width: u32) -> Option<usize> {
        if width < self.width_min || width > self.width_max || !(width - self.width_min).is_multiple_of(self.step) {
            return None;
        }
        let k = ((width - self.width_min) / self.step) as usize;
        (k < self.states.len()).then_some(k)
    }

    pub fn is_sampled(&self, width: u32) -> bool {
        self.record_index(width).is_some()
    }

    /// State of node `node` in record `record`.
    pub fn state(&self, record: usize, node: usize) -> Option<&ElementState> {
        self.states[record][node].as_ref()
    }

    pub fn node_index(&self, xpath: &str) -> Result<usize, SnapshotError> {
        self.tree
            .index_of(xpath)
            .ok_or_else(|| SnapshotError::UnknownXPath(xpath.to_string()))
    }

    /// State of an element at a sampled width.
    pub fn element_state(&self, xpath: &str, width: u32) -> Result<Option<&ElementState>, SnapshotError> {
        let node = self.node_index(xpath)?;
        let record = self.record_index(width).ok_or(SnapshotError::UnsampledWidth(width))?;
        Ok(self.state(record, node))
    }

    /// Recorded border box of `xpath` at `width`. Elements with no entry at
    /// that width (never rendered) report an empty box at the origin.
    pub fn element_box(&self, xpath: &str, width: u32) -> Result<BBox, SnapshotError> {
        Ok(self.element_state(xpath, width)?.map(|s| s.bbox).unwrap_or_default())
    }

    pub fn tree_neighbors(&self, xpath: &str) -> Result<Neighbors, SnapshotError> {
        let idx = self.node_index(xpath)?;
        let info = self.tree.node(idx);
        let name = |i: usize| self.tree.node(i).xpath.clone();
        Ok(Neighbors {
            parent: info.parent.map(name).unwrap_or_default(),
            siblings: self.tree.siblings(idx).into_iter().map(name).collect(),
            children: info.children.iter().copied().map(name).collect(),
        })
    }

    /// Materializes the serialized per-width records.
    pub fn viewport_records(&self) -> Vec<ViewportRecord> {
        (0..self.states.len()).map(|k| self.viewport_record_at(k)).collect()
    }

    fn viewport_record_at(&self, k: usize) -> ViewportRecord {
        let entries = self.states[k]
            .iter()
            .enumerate()
            .filter_map(|(i, s)| s.as_ref().map(|s| (self.tree.node(i).xpath.clone(), s.clone())))
            .collect();
        ViewportRecord {
            width: self.width_at(k),
            entries,
        }
    }

    /// Writes the bundle directory. Screenshot images are not copied; the
    /// caller places them under `images/`.
    pub fn write(&self, dir: &Path) -> Result<(), SnapshotError> {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        let manifest = Manifest {
            schema_version: SCHEMA_VERSION,
            url: self.url.clone(),
            height: self.height,
            width_min: self.width_min,
            width_max: self.width_max,
            step: self.step,
            dom: DOM_FILE.into(),
            stylesheets: STYLESHEETS_FILE.into(),
            geometry: GEOMETRY_FILE.into(),
            screenshots: self.screenshots.clone(),
            warnings: self.warnings.clone(),
        };
        write_json(&dir.join(MANIFEST_FILE), &manifest)?;
        write_json(&dir.join(DOM_FILE), &self.dom)?;
        write_json(&dir.join(STYLESHEETS_FILE), &self.stylesheets)?;

        let path = dir.join(GEOMETRY_FILE);
        let file = fs::File::create(&path).map_err(io_err(&path))?;
        let mut out = BufWriter::new(file);
        for k in 0..self.states.len() {
            let record = self.viewport_record_at(k);
            serde_json::to_writer(&mut out, &record)
                .map_err(|e| SnapshotError::Schema(format!("serializing record: {e}")))?;
            out.write_all(b"\n").map_err(io_err(&path))?;
        }
        out.flush().map_err(io_err(&path))?;
        Ok(())
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), SnapshotError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| SnapshotError::Schema(format!("serializing {}: {e}", path.display())))?;
    text.push('\n');
    fs::write(path, text).map_err(io_err(path))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, SnapshotError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|e| SnapshotError::Schema(format!("{}: {e}", path.display())))
}

/// Loads and validates a bundle directory.
pub fn load_bundle(dir: impl AsRef<Path>) -> Result<CaptureBundle, SnapshotError> {
    let dir = dir.as_ref();
    let manifest: Manifest = read_json(&dir.join(MANIFEST_FILE))?;
    if manifest.schema_version != SCHEMA_VERSION {
        return Err(SnapshotError::Schema(format!(
            "unsupported schema_version {} (expected {SCHEMA_VERSION})",
            manifest.schema_version
        )));
    }
    let dom: DomNode = read_json(&dir.join(&manifest.dom))?;
    let stylesheets: Vec<StylesheetSource> = read_json(&dir.join(&manifest.stylesheets))?;

    let path = dir.join(&manifest.geometry);
    let file = fs::File::open(&path).map_err(io_err(&path))?;
    let mut records = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err(&path))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: ViewportRecord = serde_json::from_str(&line)
            .map_err(|e| SnapshotError::Schema(format!("{} line {}: {e}", path.display(), n + 1)))?;
        records.push(record);
    }
    for (id, pair) in &manifest.screenshots {
        for rel in [&pair.visible, &pair.hidden] {
            if !dir.join(rel).is_file() {
                return Err(SnapshotError::Schema(format!("screenshot {rel} for {id} is missing")));
            }
        }
    }

    let mut bundle = CaptureBundle::from_parts(BundleParts {
        url: manifest.url,
        height: manifest.height,
        width_min: manifest.width_min,
        width_max: manifest.width_max,
        step: manifest.step,
        dom,
        stylesheets,
        records,
        screenshots: manifest.screenshots,
        warnings: manifest.warnings,
    })?;
    bundle.root_dir = Some(dir.to_path_buf());
    Ok(bundle)
}
