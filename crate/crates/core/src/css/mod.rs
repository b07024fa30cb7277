//! Author stylesheet handling: parsing, selector matching, media queries,
//! cascade resolution and length normalization.

mod cascade;
mod length;
mod media;
mod parser;
mod selector;

pub use cascade::{length_context, AuthoredValue, Origin, StyleIndex};
pub use length::{is_fixed_px, normalize_length, parse_dimension, Dimension, LengthContext};
pub use media::{media_active, MediaCondition, MediaQuery, UnsupportedMedia, WidthClause};
pub use parser::{parse_declarations, parse_stylesheet, to_css, Declaration, ParsedSheet, RuleSource, StyleRule};
pub use selector::{specificity, Combinator, Compound, Selector, Specificity, UnsupportedSelector};
