//! Ranked search sets of CSS properties per failure type.

use serde::{Deserialize, Serialize};

use crate::detection::RlfType;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Matcher {
    /// `position: absolute`.
    PositionAbsolute,
    /// Any authored `float` other than `none`.
    Float,
    /// `height` / `width` authored in px.
    FixedDimension,
    /// Any authored `display`.
    Display,
    /// `margin-*` and `padding-*` longhands.
    MarginPadding,
    FontSize,
    WhiteSpace,
    /// A `margin-*` longhand resolving below zero.
    NegativeMargin,
    /// Flex container without `flex-wrap: wrap`.
    MissingFlexWrap,
    /// Container that is not a flex container.
    MissingFlex,
    /// `max-height` / `max-width`.
    MaxDimension,
    /// The container's `width`.
    ParentWidth,
}

const MARGIN_PADDING: &[&str] = &[
    "margin-top",
    "margin-right",
    "margin-bottom",
    "margin-left",
    "padding-top",
    "padding-right",
    "padding-bottom",
    "padding-left",
];
const MARGINS: &[&str] = &["margin-top", "margin-right", "margin-bottom", "margin-left"];

impl Matcher {
    /// Longhand properties the matcher inspects.
    pub fn properties(self) -> &'static [&'static str] {
        match self {
            Matcher::PositionAbsolute => &["position"],
            Matcher::Float => &["float"],
            Matcher::FixedDimension => &["height", "width"],
            Matcher::Display | Matcher::MissingFlex => &["display"],
            Matcher::MarginPadding => MARGIN_PADDING,
            Matcher::FontSize => &["font-size"],
            Matcher::WhiteSpace => &["white-space"],
            Matcher::NegativeMargin => MARGINS,
            Matcher::MissingFlexWrap => &["flex-wrap"],
            Matcher::MaxDimension => &["max-height", "max-width"],
            Matcher::ParentWidth => &["width"],
        }
    }

    /// Value matchers sort by their px value; the rest are categorical.
    pub fn is_numeric(self) -> bool {
        matches!(
            self,
            Matcher::FixedDimension
                | Matcher::MarginPadding
                | Matcher::FontSize
                | Matcher::MaxDimension
                | Matcher::ParentWidth
        )
    }

    /// Evaluated on the container of the affected elements only.
    pub fn applies_to_parent(self) -> bool {
        matches!(self, Matcher::MissingFlexWrap | Matcher::MissingFlex | Matcher::ParentWidth)
    }

    pub fn label(self) -> &'static str {
        match self {
            Matcher::PositionAbsolute => "position: absolute",
            Matcher::Float => "float",
            Matcher::FixedDimension => "fixed height, width (px)",
            Matcher::Display => "display",
            Matcher::MarginPadding => "margin, padding",
            Matcher::FontSize => "font-size",
            Matcher::WhiteSpace => "white-space",
            Matcher::NegativeMargin => "negative margin",
            Matcher::MissingFlexWrap => "display:flex missing flex-wrap:wrap",
            Matcher::MissingFlex => "parent has no display:flex",
            Matcher::MaxDimension => "max-height, max-width",
            Matcher::ParentWidth => "parent width",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SetEntry {
    pub matcher: Matcher,
    pub rank: u32,
}

/// The ranked search set for one failure type. Rank order doubles as the
/// ranking criteria used for tie-breaking.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropertySet {
    pub rlf_type: RlfType,
    pub entries: Vec<SetEntry>,
}

fn ranked(rlf_type: RlfType, matchers: &[Matcher]) -> PropertySet {
    PropertySet {
        rlf_type,
        entries: matchers
            .iter()
            .enumerate()
            .map(|(i, &matcher)| SetEntry {
                matcher,
                rank: i as u32 + 1,
            })
            .collect(),
    }
}

impl PropertySet {
    /// `None` for small-range failures, which are localized through media
    /// rules instead.
    pub fn for_type(rlf_type: RlfType) -> Option<PropertySet> {
        use Matcher::*;
        let set = match rlf_type {
            RlfType::EP => ranked(
                rlf_type,
                &[PositionAbsolute, Float, FixedDimension, Display, MarginPadding, FontSize, WhiteSpace],
            ),
            RlfType::EC => ranked(
                rlf_type,
                &[
                    PositionAbsolute,
                    Float,
                    NegativeMargin,
                    FixedDimension,
                    MarginPadding,
                    MissingFlexWrap,
                    MaxDimension,
                ],
            ),
            RlfType::VP => ranked(
                rlf_type,
                &[PositionAbsolute, Float, FixedDimension, MarginPadding, FontSize, WhiteSpace],
            ),
            RlfType::WE => ranked(rlf_type, &[MissingFlex, Float, ParentWidth, MarginPadding, FontSize]),
            RlfType::SR => return None,
        };
        Some(set)
    }

    pub fn rank_of(&self, matcher: Matcher) -> Option<u32> {
        self.entries.iter().find(|e| e.matcher == matcher).map(|e| e.rank)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranks_are_contiguous() {
        for t in RlfType::ALL {
            let Some(set) = PropertySet::for_type(t) else {
                assert_eq!(t, RlfType::SR);
                continue;
            };
            let ranks: Vec<u32> = set.entries.iter().map(|e| e.rank).collect();
            assert_eq!(ranks, (1..=set.entries.len() as u32).collect::<Vec<_>>());
        }
    }

    #[test]
    fn table_positions() {
        let ec = PropertySet::for_type(RlfType::EC).unwrap();
        assert_eq!(ec.rank_of(Matcher::NegativeMargin), Some(3));
        assert_eq!(ec.rank_of(Matcher::MaxDimension), Some(7));
        let ep = PropertySet::for_type(RlfType::EP).unwrap();
        assert_eq!(ep.rank_of(Matcher::FixedDimension), Some(3));
        assert_eq!(ep.rank_of(Matcher::WhiteSpace), Some(7));
        let vp = PropertySet::for_type(RlfType::VP).unwrap();
        assert_eq!(vp.entries.len(), 6);
        assert_eq!(vp.rank_of(Matcher::Display), None);
        let we = PropertySet::for_type(RlfType::WE).unwrap();
        assert_eq!(we.rank_of(Matcher::MissingFlex), Some(1));
        assert_eq!(we.rank_of(Matcher::ParentWidth), Some(3));
    }
}
