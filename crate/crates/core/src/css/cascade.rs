//! Author-origin cascade: decides which developer-written declaration, if
//! any, sets a property on an element at a given viewport width.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::length::{normalize_length, LengthContext};
use super::parser::{parse_declarations, parse_stylesheet, Declaration, RuleSource, StyleRule};
use super::selector::Specificity;
use crate::snapshot::{CaptureBundle, SnapshotError};

/// Where an authored declaration lives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Origin {
    Inline,
    Rule { sheet: usize, rule: usize },
}

impl Origin {
    pub fn rule_source(&self) -> Option<RuleSource> {
        match *self {
            Origin::Inline => None,
            Origin::Rule { sheet, rule } => Some(RuleSource { sheet, rule }),
        }
    }
}

/// The winning developer-authored declaration for one (element, property).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuthoredValue {
    pub property: String,
    pub raw_value: String,
    pub normalized_px: Option<f64>,
    pub origin: Origin,
    /// Selector specificity of the winning rule; zero for inline styles.
    pub specificity: Specificity,
    pub important: bool,
}

/// Cascade key of one candidate declaration; larger wins.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Precedence {
    important: bool,
    inline: bool,
    specificity: Specificity,
    /// (sheet, rule, declaration) position; inline styles sort after all sheets.
    order: (usize, usize, usize),
}

impl Ord for Precedence {
    fn cmp(&self, other: &Self) -> Ordering {
        self.important
            .cmp(&other.important)
            .then(self.inline.cmp(&other.inline))
            .then(self.specificity.cmp(&other.specificity))
            .then(self.order.cmp(&other.order))
    }
}

impl PartialOrd for Precedence {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Parsed author styles of a bundle plus per-element selector matches.
/// Immutable after construction.
#[derive(Debug, Clone)]
pub struct StyleIndex {
    rules: Vec<StyleRule>,
    origins: Vec<String>,
    warnings: Vec<String>,
    inline: Vec<Vec<Declaration>>,
    /// per node: (rule index, highest specificity among matching selectors)
    matched: Vec<Vec<(usize, Specificity)>>,
}

impl StyleIndex {
    pub fn new(bundle: &CaptureBundle) -> Self {
        let mut rules = Vec::new();
        let mut warnings = Vec::new();
        let mut origins = Vec::new();
        for (i, sheet) in bundle.stylesheets().iter().enumerate() {
            let parsed = parse_stylesheet(&sheet.text, i);
            warnings.extend(parsed.warnings.into_iter().map(|w| format!("{}: {w}", sheet.origin)));
            rules.extend(parsed.rules);
            origins.push(sheet.origin.clone());
        }
        let tree = bundle.tree();
        let mut inline = Vec::with_capacity(tree.len());
        let mut matched = Vec::with_capacity(tree.len());
        for (idx, node) in tree.nodes().iter().enumerate() {
            let (decls, w) = parse_declarations(&node.inline_style);
            warnings.extend(w.into_iter().map(|w| format!("{} style attribute: {w}", node.xpath)));
            inline.push(decls);
            let hits = rules
                .iter()
                .enumerate()
                .filter_map(|(r, rule)| {
                    rule.selectors
                        .iter()
                        .filter(|s| s.matches(tree, idx))
                        .map(|s| s.specificity())
                        .max()
                        .map(|spec| (r, spec))
                })
                .collect();
            matched.push(hits);
        }
        StyleIndex {
            rules,
            origins,
            warnings,
            inline,
            matched,
        }
    }

    pub fn rules(&self) -> &[StyleRule] {
        &self.rules
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn rule(&self, source: RuleSource) -> Option<&StyleRule> {
        self.rules.iter().find(|r| r.source == source)
    }

    /// Indices (into `rules()`) of rules with a selector matching `node`.
    pub fn matching_rules(&self, node: usize) -> impl Iterator<Item = usize> + '_ {
        self.matched[node].iter().map(|&(r, _)| r)
    }

    pub fn inline_declarations(&self, node: usize) -> &[Declaration] {
        &self.inline[node]
    }

    /// Human-readable location of a declaration origin.
    pub fn describe_origin(&self, origin: &Origin) -> String {
        match origin {
            Origin::Inline => "inline style".to_string(),
            Origin::Rule { sheet, rule } => {
                let label = self.origins.get(*sheet).map(String::as_str).unwrap_or("?");
                let source = RuleSource {
                    sheet: *sheet,
                    rule: *rule,
                };
                match self.rule(source) {
                    Some(r) => match &r.media {
                        Some(m) => format!("{label} rule #{rule} `{}` @media {m}", r.selector_text()),
                        None => format!("{label} rule #{rule} `{}`", r.selector_text()),
                    },
                    None => format!("{label} rule #{rule}"),
                }
            }
        }
    }

    /// Winning authored declaration of `property` on node `node` at `width`,
    /// without length normalization.
    pub fn winning(&self, node: usize, property: &str, width: f64) -> Option<(Declaration, Origin, Specificity)> {
        let mut winner: Option<(Precedence, &Declaration, Origin, Specificity)> = None;
        for &(r, spec) in &self.matched[node] {
            let rule = &self.rules[r];
            if rule.media.as_ref().is_some_and(|m| !m.matches(width)) {
                continue;
            }
            let origin = Origin::Rule {
                sheet: rule.source.sheet,
                rule: rule.source.rule,
            };
            for (k, d) in rule.declarations.iter().enumerate() {
                if d.property != property {
                    continue;
                }
                let p = Precedence {
                    important: d.important,
                    inline: false,
                    specificity: spec,
                    order: (rule.source.sheet, rule.source.rule, k),
                };
                if winner.as_ref().is_none_or(|(bp, ..)| p > *bp) {
                    winner = Some((p, d, origin, spec));
                }
            }
        }
        for (k, d) in self.inline[node].iter().enumerate() {
            if d.property != property {
                continue;
            }
            let p = Precedence {
                important: d.important,
                inline: true,
                specificity: Specificity::default(),
                order: (usize::MAX, 0, k),
            };
            if winner.as_ref().is_none_or(|(bp, ..)| p > *bp) {
                winner = Some((p, d, Origin::Inline, Specificity::default()));
            }
        }
        winner.map(|(_, d, o, s)| (d.clone(), o, s))
    }

    /// Every property some author source sets on `node` at `width`.
    pub fn authored_properties(&self, node: usize, width: f64) -> BTreeSet<String> {
        let mut props: BTreeSet<String> = self.inline[node].iter().map(|d| d.property.clone()).collect();
        for &(r, _) in &self.matched[node] {
            let rule = &self.rules[r];
            if rule.media.as_ref().is_none_or(|m| m.matches(width)) {
                props.extend(rule.declarations.iter().map(|d| d.property.clone()));
            }
        }
        props
    }

    /// Resolves the authored value of `property` on `xpath` at `width`.
    /// User-agent defaults and inheritance never count as authored.
    pub fn resolve_authored(
        &self,
        bundle: &CaptureBundle,
        xpath: &str,
        property: &str,
        width: u32,
    ) -> Result<Option<AuthoredValue>, SnapshotError> {
        let node = bundle.node_index(xpath)?;
        let record = bundle.record_index(width).ok_or(SnapshotError::UnsampledWidth(width))?;
        Ok(self.resolve_at(bundle, node, property, record))
    }

    /// Index-based form of [`StyleIndex::resolve_authored`].
    pub fn resolve_at(&self, bundle: &CaptureBundle, node: usize, property: &str, record: usize) -> Option<AuthoredValue> {
        let width = bundle.width_at(record);
        let (decl, origin, specificity) = self.winning(node, property, width as f64)?;
        let ctx = length_context(bundle, node, property, record);
        Some(AuthoredValue {
            property: decl.property,
            normalized_px: normalize_length(&decl.raw_value, &ctx),
            raw_value: decl.raw_value,
            origin,
            specificity,
            important: decl.important,
        })
    }
}

fn is_vertical_extent(property: &str) -> bool {
    matches!(property, "height" | "min-height" | "max-height" | "top" | "bottom")
}

/// Length-resolution context for `property` on `node` at `record`.
pub fn length_context(bundle: &CaptureBundle, node: usize, property: &str, record: usize) -> LengthContext {
    let tree = bundle.tree();
    let width = bundle.width_at(record) as f64;
    let state = |i: usize| bundle.state(record, i);
    let font = |i: usize| state(i).map(|s| s.computed.font_size).unwrap_or(16.0);
    let parent = tree.node(node).parent;
    let root_font_size = font(0);
    let font_size = if property == "font-size" {
        parent.map(font).unwrap_or(16.0)
    } else {
        font(node)
    };
    let parent_extent = if property == "font-size" {
        font_size
    } else {
        match parent.and_then(state) {
            Some(p) if is_vertical_extent(property) => p.bbox.h,
            Some(p) => p.bbox.w,
            None if is_vertical_extent(property) => bundle.height as f64,
            None => width,
        }
    };
    LengthContext {
        font_size,
        root_font_size,
        parent_extent,
        viewport_width: width,
        viewport_height: bundle.height as f64,
    }
}
