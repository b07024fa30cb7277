//! Selector subset: type, universal, class, id and attribute-presence
//! compounds joined by descendant or child combinators.

use std::fmt;

use crate::snapshot::DomTree;

/// (id count, class/attribute count, type count), compared lexicographically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, serde::Serialize, serde::Deserialize)]
pub struct Specificity {
    pub a: u32,
    pub b: u32,
    pub c: u32,
}

impl Specificity {
    pub const fn new(a: u32, b: u32, c: u32) -> Self {
        Self { a, b, c }
    }
}

impl fmt::Display for Specificity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.a, self.b, self.c)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Compound {
    /// `None` is the universal selector (or an implied one).
    pub tag: Option<String>,
    pub ids: Vec<String>,
    pub classes: Vec<String>,
    pub attributes: Vec<String>,
}

impl Compound {
    fn matches(&self, tree: &DomTree, idx: usize) -> bool {
        let node = tree.node(idx);
        if let Some(tag) = &self.tag {
            if *tag != node.tag {
                return false;
            }
        }
        self.ids.iter().all(|id| node.id.as_deref() == Some(id.as_str()))
            && self.classes.iter().all(|c| node.classes.iter().any(|nc| nc == c))
            && self.attributes.iter().all(|a| node.attributes.contains_key(a))
    }
}

impl fmt::Display for Compound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let bare = self.ids.is_empty() && self.classes.is_empty() && self.attributes.is_empty();
        match &self.tag {
            Some(t) => f.write_str(t)?,
            None if bare => f.write_str("*")?,
            None => {}
        }
        for id in &self.ids {
            write!(f, "#{id}")?;
        }
        for c in &self.classes {
            write!(f, ".{c}")?;
        }
        for a in &self.attributes {
            write!(f, "[{a}]")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Combinator {
    Descendant,
    Child,
}

/// A complex selector, stored left to right.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Selector {
    compounds: Vec<Compound>,
    /// `combinators[i]` joins `compounds[i]` and `compounds[i + 1]`.
    combinators: Vec<Combinator>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unsupported selector {selector:?}: {reason}")]
pub struct UnsupportedSelector {
    pub selector: String,
    pub reason: String,
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '-' || c == '_' || !c.is_ascii()
}

impl Selector {
    pub fn parse(text: &str) -> Result<Self, UnsupportedSelector> {
        let fail = |reason: &str| UnsupportedSelector {
            selector: text.trim().to_string(),
            reason: reason.to_string(),
        };
        let chars: Vec<char> = text.trim().chars().collect();
        if chars.is_empty() {
            return Err(fail("empty selector"));
        }
        let mut compounds = Vec::new();
        let mut combinators = Vec::new();
        let mut i = 0;
        let mut pending: Option<Combinator> = None;
        while i < chars.len() {
            let c = chars[i];
            if c.is_whitespace() {
                if !compounds.is_empty() && pending.is_none() {
                    pending = Some(Combinator::Descendant);
                }
                i += 1;
                continue;
            }
            if c == '>' {
                if compounds.is_empty() || pending == Some(Combinator::Child) {
                    return Err(fail("dangling child combinator"));
                }
                pending = Some(Combinator::Child);
                i += 1;
                continue;
            }
            match c {
                '+' | '~' => return Err(fail("sibling combinators are not supported")),
                ':' => return Err(fail("pseudo-classes and pseudo-elements are not supported")),
                _ => {}
            }
            // start of a compound
            if !compounds.is_empty() {
                match pending.take() {
                    Some(comb) => combinators.push(comb),
                    None => return Err(fail("missing combinator")),
                }
            }
            let mut compound = Compound::default();
            let mut first = true;
            while i < chars.len() {
                let c = chars[i];
                if c == '*' && first {
                    i += 1;
                } else if is_ident_char(c) && first {
                    let start = i;
                    while i < chars.len() && is_ident_char(chars[i]) {
                        i += 1;
                    }
                    compound.tag = Some(chars[start..i].iter().collect::<String>().to_ascii_lowercase());
                } else if c == '#' || c == '.' {
                    i += 1;
                    let start = i;
                    while i < chars.len() && is_ident_char(chars[i]) {
                        i += 1;
                    }
                    if start == i {
                        return Err(fail("empty id or class name"));
                    }
                    let name: String = chars[start..i].iter().collect();
                    if c == '#' {
                        compound.ids.push(name);
                    } else {
                        compound.classes.push(name);
                    }
                } else if c == '[' {
                    let close = chars[i..]
                        .iter()
                        .position(|&ch| ch == ']')
                        .ok_or_else(|| fail("unterminated attribute selector"))?;
                    let inner: String = chars[i + 1..i + close].iter().collect();
                    let inner = inner.trim();
                    if inner.is_empty() || !inner.chars().all(is_ident_char) {
                        return Err(fail("only attribute-presence selectors are supported"));
                    }
                    compound.attributes.push(inner.to_ascii_lowercase());
                    i += close + 1;
                } else if c == ':' {
                    return Err(fail("pseudo-classes and pseudo-elements are not supported"));
                } else {
                    break;
                }
                first = false;
            }
            if first {
                return Err(fail(&format!("unexpected character {:?}", chars[i])));
            }
            compounds.push(compound);
        }
        if pending == Some(Combinator::Child) {
            return Err(fail("dangling child combinator"));
        }
        Ok(Selector { compounds, combinators })
    }

    pub fn specificity(&self) -> Specificity {
        self.compounds.iter().fold(Specificity::default(), |acc, c| Specificity {
            a: acc.a + c.ids.len() as u32,
            b: acc.b + (c.classes.len() + c.attributes.len()) as u32,
            c: acc.c + c.tag.is_some() as u32,
        })
    }

    pub fn compounds(&self) -> &[Compound] {
        &self.compounds
    }

    pub fn combinators(&self) -> &[Combinator] {
        &self.combinators
    }

    /// Right-to-left match against node `idx`.
    pub fn matches(&self, tree: &DomTree, idx: usize) -> bool {
        let last = self.compounds.len() - 1;
        self.compounds[last].matches(tree, idx) && self.match_from(tree, last, idx)
    }

    /// `compounds[pos]` already matched `idx`; match the part to its left.
    fn match_from(&self, tree: &DomTree, pos: usize, idx: usize) -> bool {
        if pos == 0 {
            return true;
        }
        let target = &self.compounds[pos - 1];
        match self.combinators[pos - 1] {
            Combinator::Child => match tree.node(idx).parent {
                Some(p) => target.matches(tree, p) && self.match_from(tree, pos - 1, p),
                None => false,
            },
            Combinator::Descendant => {
                let mut cur = tree.node(idx).parent;
                while let Some(p) = cur {
                    if target.matches(tree, p) && self.match_from(tree, pos - 1, p) {
                        return true;
                    }
                    cur = tree.node(p).parent;
                }
                false
            }
        }
    }
}

impl fmt::Display for Selector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.compounds.iter().enumerate() {
            if i > 0 {
                match self.combinators[i - 1] {
                    Combinator::Descendant => f.write_str(" ")?,
                    Combinator::Child => f.write_str(" > ")?,
                }
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// Specificity of a parsed selector.
pub fn specificity(selector: &Selector) -> Specificity {
    selector.specificity()
}
