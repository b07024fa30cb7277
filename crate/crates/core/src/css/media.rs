//! `@media` conditions restricted to viewport-width features.

use std::fmt;

/// Root font size used for `em`/`rem` in media features.
const MEDIA_EM_PX: f64 = 16.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WidthClause {
    Min(f64),
    Max(f64),
}

impl WidthClause {
    fn holds(&self, width: f64) -> bool {
        match *self {
            WidthClause::Min(v) => width >= v,
            WidthClause::Max(v) => width <= v,
        }
    }
}

/// One query of a comma-separated list: a media type plus width clauses,
/// all of which must hold.
#[derive(Debug, Clone, PartialEq)]
pub struct MediaQuery {
    /// False for media types that never apply to a screen capture (`print`).
    pub screen: bool,
    pub clauses: Vec<WidthClause>,
}

impl MediaQuery {
    pub fn matches(&self, width: f64) -> bool {
        self.screen && self.clauses.iter().all(|c| c.holds(width))
    }

    /// Closed interval of widths the query accepts, or `None` when empty.
    pub fn interval(&self) -> Option<(f64, f64)> {
        if !self.screen {
            return None;
        }
        let mut lo = f64::NEG_INFINITY;
        let mut hi = f64::INFINITY;
        for c in &self.clauses {
            match *c {
                WidthClause::Min(v) => lo = lo.max(v),
                WidthClause::Max(v) => hi = hi.min(v),
            }
        }
        (lo <= hi).then_some((lo, hi))
    }
}

/// A media query list; active when any query matches.
#[derive(Debug, Clone, PartialEq)]
pub struct MediaCondition {
    pub queries: Vec<MediaQuery>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unsupported media query {query:?}: {reason}")]
pub struct UnsupportedMedia {
    pub query: String,
    pub reason: String,
}

impl MediaCondition {
    pub fn parse(prelude: &str) -> Result<Self, UnsupportedMedia> {
        let fail = |reason: String| UnsupportedMedia {
            query: prelude.trim().to_string(),
            reason,
        };
        let mut queries = Vec::new();
        for part in prelude.split(',') {
            let part = part.trim().to_ascii_lowercase();
            if part.is_empty() {
                return Err(fail("empty query in list".into()));
            }
            let mut screen = true;
            let mut clauses = Vec::new();
            let mut rest = part.as_str();
            let mut expect_and = false;
            while !rest.is_empty() {
                rest = rest.trim_start();
                if rest.is_empty() {
                    break;
                }
                if expect_and {
                    rest = rest
                        .strip_prefix("and")
                        .ok_or_else(|| fail(format!("expected `and` in {part:?}")))?;
                    expect_and = false;
                    continue;
                }
                if let Some(after) = rest.strip_prefix('(') {
                    let close = after
                        .find(')')
                        .ok_or_else(|| fail("unbalanced parenthesis".into()))?;
                    clauses.push(parse_feature(&after[..close]).map_err(fail)?);
                    rest = &after[close + 1..];
                    expect_and = true;
                    continue;
                }
                let word_end = rest
                    .find(|c: char| c.is_whitespace() || c == '(')
                    .unwrap_or(rest.len());
                let word = &rest[..word_end];
                match word {
                    "only" => {}
                    "screen" | "all" => expect_and = true,
                    "print" | "speech" => {
                        screen = false;
                        expect_and = true;
                    }
                    "not" => return Err(fail("`not` queries are not supported".into())),
                    other => return Err(fail(format!("unknown media type {other:?}"))),
                }
                rest = &rest[word_end..];
            }
            queries.push(MediaQuery { screen, clauses });
        }
        Ok(MediaCondition { queries })
    }

    pub fn matches(&self, width: f64) -> bool {
        self.queries.iter().any(|q| q.matches(width))
    }

    /// Conjunction of two conditions (nested `@media` blocks).
    pub fn and(&self, inner: &MediaCondition) -> MediaCondition {
        let mut queries = Vec::new();
        for a in &self.queries {
            for b in &inner.queries {
                queries.push(MediaQuery {
                    screen: a.screen && b.screen,
                    clauses: a.clauses.iter().chain(&b.clauses).copied().collect(),
                });
            }
        }
        MediaCondition { queries }
    }

    /// Disjoint-or-not list of closed intervals where the condition holds.
    pub fn intervals(&self) -> Vec<(f64, f64)> {
        self.queries.iter().filter_map(MediaQuery::interval).collect()
    }
}

fn parse_feature(text: &str) -> Result<WidthClause, String> {
    let (name, value) = text
        .split_once(':')
        .ok_or_else(|| format!("feature {text:?} has no value"))?;
    let px = parse_media_length(value.trim()).ok_or_else(|| format!("unsupported length {:?}", value.trim()))?;
    match name.trim() {
        "min-width" => Ok(WidthClause::Min(px)),
        "max-width" => Ok(WidthClause::Max(px)),
        other => Err(format!("feature {other:?} is not supported")),
    }
}

fn parse_media_length(v: &str) -> Option<f64> {
    let split = v
        .find(|c: char| !(c.is_ascii_digit() || c == '.' || c == '-' || c == '+'))
        .unwrap_or(v.len());
    let n: f64 = v[..split].parse().ok()?;
    match &v[split..] {
        "px" => Some(n),
        "em" | "rem" => Some(n * MEDIA_EM_PX),
        "" if n == 0.0 => Some(0.0),
        _ => None,
    }
}

/// True iff `width` satisfies the condition.
pub fn media_active(condition: &MediaCondition, width: f64) -> bool {
    condition.matches(width)
}

fn fmt_px(v: f64) -> String {
    if v.fract() == 0.0 {
        format!("{}px", v as i64)
    } else {
        format!("{v}px")
    }
}

impl fmt::Display for MediaCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, q) in self.queries.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            let mut parts: Vec<String> = Vec::new();
            if !q.screen {
                parts.push("print".into());
            } else if q.clauses.is_empty() {
                parts.push("all".into());
            }
            for c in &q.clauses {
                parts.push(match c {
                    WidthClause::Min(v) => format!("(min-width: {})", fmt_px(*v)),
                    WidthClause::Max(v) => format!("(max-width: {})", fmt_px(*v)),
                });
            }
            f.write_str(&parts.join(" and "))?;
        }
        Ok(())
    }
}
