//! Error-tolerant stylesheet parser.
//!
//! Produces style rules in source order. Constructs outside the supported
//! subset (other at-rules, pseudo selectors, sibling combinators,
//! non-width media features) are skipped and reported as warnings.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::media::MediaCondition;
use super::selector::Selector;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Declaration {
    pub property: String,
    pub raw_value: String,
    pub important: bool,
}

/// Position of a rule in the cascade's source order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RuleSource {
    pub sheet: usize,
    pub rule: usize,
}

impl fmt::Display for RuleSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "sheet {} rule {}", self.sheet, self.rule)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StyleRule {
    pub selectors: Vec<Selector>,
    pub declarations: Vec<Declaration>,
    pub media: Option<MediaCondition>,
    pub source: RuleSource,
}

impl StyleRule {
    pub fn selector_text(&self) -> String {
        self.selectors.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(", ")
    }
}

impl fmt::Display for StyleRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let body = self
            .declarations
            .iter()
            .map(|d| format!("{}: {}{};", d.property, d.raw_value, if d.important { " !important" } else { "" }))
            .collect::<Vec<_>>()
            .join(" ");
        let rule = format!("{} {{ {} }}", self.selector_text(), body);
        match &self.media {
            Some(m) => write!(f, "@media {m} {{ {rule} }}"),
            None => f.write_str(&rule),
        }
    }
}

/// Serializes rules back to stylesheet text, one rule per line.
pub fn to_css(rules: &[StyleRule]) -> String {
    let mut out = String::new();
    for r in rules {
        out.push_str(&r.to_string());
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParsedSheet {
    pub rules: Vec<StyleRule>,
    pub warnings: Vec<String>,
}

fn strip_comments(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut chars = text.chars().peekable();
    let mut quote: Option<char> = None;
    while let Some(c) = chars.next() {
        if let Some(q) = quote {
            out.push(c);
            if c == '\\' {
                if let Some(n) = chars.next() {
                    out.push(n);
                }
            } else if c == q {
                quote = None;
            }
            continue;
        }
        if c == '"' || c == '\'' {
            quote = Some(c);
            out.push(c);
        } else if c == '/' && chars.peek() == Some(&'*') {
            chars.next();
            let mut prev = '\0';
            for n in chars.by_ref() {
                if prev == '*' && n == '/' {
                    break;
                }
                prev = n;
            }
            out.push(' ');
        } else {
            out.push(c);
        }
    }
    out
}

/// Byte offset of the `}` closing the block opened just before `start`.
fn find_block_end(s: &str, start: usize) -> Option<usize> {
    let mut depth = 1usize;
    let mut quote: Option<u8> = None;
    let bytes = s.as_bytes();
    let mut i = start;
    while i < bytes.len() {
        let b = bytes[i];
        if let Some(q) = quote {
            if b == b'\\' {
                i += 1;
            } else if b == q {
                quote = None;
            }
        } else {
            match b {
                b'"' | b'\'' => quote = Some(b),
                b'{' => depth += 1,
                b'}' => {
                    depth -= 1;
                    if depth == 0 {
                        return Some(i);
                    }
                }
                _ => {}
            }
        }
        i += 1;
    }
    None
}

/// Splits on `sep` outside parentheses and quotes.
fn split_top_level(s: &str, sep: char) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut quote: Option<char> = None;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        if let Some(q) = quote {
            if c == q {
                quote = None;
            }
            continue;
        }
        match c {
            '"' | '\'' => quote = Some(c),
            '(' => depth += 1,
            ')' => depth -= 1,
            c if c == sep && depth == 0 => {
                parts.push(&s[start..i]);
                start = i + sep.len_utf8();
            }
            _ => {}
        }
    }
    parts.push(&s[start..]);
    parts
}

/// Splits a value on whitespace outside parentheses.
fn split_components(value: &str) -> Vec<String> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for c in value.chars() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            _ => {}
        }
        if c.is_whitespace() && depth == 0 {
            if !cur.is_empty() {
                parts.push(std::mem::take(&mut cur));
            }
        } else {
            cur.push(c);
        }
    }
    if !cur.is_empty() {
        parts.push(cur);
    }
    parts
}

const BOX_SIDES: [&str; 4] = ["top", "right", "bottom", "left"];

/// Expands `margin`/`padding` (1 to 4 components) and `flex-flow`.
fn expand(property: &str, value: &str, important: bool) -> Result<Vec<Declaration>, String> {
    let decl = |p: String, v: String| Declaration {
        property: p,
        raw_value: v,
        important,
    };
    match property {
        "margin" | "padding" => {
            let c = split_components(value);
            let (t, r, b, l) = match c.len() {
                1 => (&c[0], &c[0], &c[0], &c[0]),
                2 => (&c[0], &c[1], &c[0], &c[1]),
                3 => (&c[0], &c[1], &c[2], &c[1]),
                4 => (&c[0], &c[1], &c[2], &c[3]),
                n => return Err(format!("{property} expects 1 to 4 values, got {n}")),
            };
            Ok([t, r, b, l]
                .iter()
                .zip(BOX_SIDES)
                .map(|(v, side)| decl(format!("{property}-{side}"), (*v).clone()))
                .collect())
        }
        "flex-flow" => {
            let mut out = Vec::new();
            for c in split_components(value) {
                match c.as_str() {
                    "row" | "row-reverse" | "column" | "column-reverse" => out.push(decl("flex-direction".into(), c)),
                    "wrap" | "nowrap" | "wrap-reverse" => out.push(decl("flex-wrap".into(), c)),
                    other => return Err(format!("unknown flex-flow component {other:?}")),
                }
            }
            Ok(out)
        }
        _ => Ok(vec![decl(property.to_string(), value.to_string())]),
    }
}

/// Parses a declaration block (rule body or inline `style` attribute).
pub fn parse_declarations(block: &str) -> (Vec<Declaration>, Vec<String>) {
    let mut decls = Vec::new();
    let mut warnings = Vec::new();
    for item in split_top_level(block, ';') {
        let item = item.trim();
        if item.is_empty() {
            continue;
        }
        let Some((prop, value)) = item.split_once(':') else {
            warnings.push(format!("skipped malformed declaration {item:?}"));
            continue;
        };
        let property = prop.trim().to_ascii_lowercase();
        let mut value = value.trim().to_string();
        let mut important = false;
        if let Some(pos) = value.to_ascii_lowercase().rfind("!important") {
            if value[pos + "!important".len()..].trim().is_empty() {
                important = true;
                value = value[..pos].trim().to_string();
            }
        }
        let valid_name = !property.is_empty()
            && property
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_');
        if !valid_name || value.is_empty() {
            warnings.push(format!("skipped malformed declaration {item:?}"));
            continue;
        }
        match expand(&property, &value, important) {
            Ok(mut d) => decls.append(&mut d),
            Err(e) => warnings.push(format!("skipped declaration {item:?}: {e}")),
        }
    }
    (decls, warnings)
}

struct Parser<'a> {
    sheet: usize,
    next_rule: usize,
    out: &'a mut ParsedSheet,
}

impl Parser<'_> {
    fn parse_block_list(&mut self, text: &str, media: Option<&MediaCondition>) {
        let mut rest = text;
        loop {
            rest = rest.trim_start();
            if rest.is_empty() {
                return;
            }
            if let Some(stray) = rest.strip_prefix('}') {
                self.out.warnings.push("skipped stray `}`".into());
                rest = stray;
                continue;
            }
            let brace = rest.find('{');
            let semi = rest.find(';');
            if rest.starts_with('@') {
                // statement at-rule (`@import ...;`) or block at-rule
                if let Some(s) = semi.filter(|&s| brace.is_none_or(|b| s < b)) {
                    let name = rest[..s].split_whitespace().next().unwrap_or("@");
                    self.out.warnings.push(format!("skipped at-rule {name}"));
                    rest = &rest[s + 1..];
                    continue;
                }
            }
            let Some(open) = brace else {
                self.out
                    .warnings
                    .push(format!("skipped trailing text {:?}", truncate(rest)));
                return;
            };
            let prelude = rest[..open].trim();
            let Some(close) = find_block_end(rest, open + 1) else {
                self.out
                    .warnings
                    .push(format!("skipped unterminated block after {:?}", truncate(prelude)));
                return;
            };
            let body = &rest[open + 1..close];
            rest = &rest[close + 1..];

            if let Some(at) = prelude.strip_prefix('@') {
                let name_end = at.find(|c: char| c.is_whitespace() || c == '(').unwrap_or(at.len());
                let name = at[..name_end].to_ascii_lowercase();
                if name == "media" {
                    match MediaCondition::parse(&at[name_end..]) {
                        Ok(cond) => {
                            let combined = match media {
                                Some(outer) => outer.and(&cond),
                                None => cond,
                            };
                            self.parse_block_list(body, Some(&combined));
                        }
                        Err(e) => self.out.warnings.push(format!("skipped @media block: {e}")),
                    }
                } else {
                    self.out.warnings.push(format!("skipped at-rule @{name}"));
                }
                continue;
            }
            self.style_rule(prelude, body, media);
        }
    }

    fn style_rule(&mut self, prelude: &str, body: &str, media: Option<&MediaCondition>) {
        let mut selectors = Vec::new();
        for part in split_top_level(prelude, ',') {
            match Selector::parse(part) {
                Ok(s) => selectors.push(s),
                Err(e) => self.out.warnings.push(format!("skipped selector: {e}")),
            }
        }
        if selectors.is_empty() {
            self.out
                .warnings
                .push(format!("skipped rule {:?}: no supported selector", truncate(prelude)));
            return;
        }
        let (declarations, mut warnings) = parse_declarations(body);
        self.out.warnings.append(&mut warnings);
        let source = RuleSource {
            sheet: self.sheet,
            rule: self.next_rule,
        };
        self.next_rule += 1;
        self.out.rules.push(StyleRule {
            selectors,
            declarations,
            media: media.cloned(),
            source,
        });
    }
}

fn truncate(s: &str) -> String {
    let t: String = s.chars().take(40).collect();
    if t.len() < s.len() {
        format!("{t}...")
    } else {
        t
    }
}

/// Parses one stylesheet. Rules keep source order; `source.rule` counts
/// accepted style rules in that order.
pub fn parse_stylesheet(text: &str, sheet_index: usize) -> ParsedSheet {
    let mut out = ParsedSheet::default();
    let cleaned = strip_comments(text);
    Parser {
        sheet: sheet_index,
        next_rule: 0,
        out: &mut out,
    }
    .parse_block_list(&cleaned, None);
    out
}
