//! Length normalization to CSS px.

/// Geometry needed to resolve relative units for one element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LengthContext {
    /// Font size that `em` resolves against (the parent's for `font-size` itself).
    pub font_size: f64,
    pub root_font_size: f64,
    /// Extent of the containing box along the axis `%` refers to.
    pub parent_extent: f64,
    pub viewport_width: f64,
    pub viewport_height: f64,
}

impl Default for LengthContext {
    fn default() -> Self {
        Self {
            font_size: 16.0,
            root_font_size: 16.0,
            parent_extent: 0.0,
            viewport_width: 1400.0,
            viewport_height: 1000.0,
        }
    }
}

/// A numeric CSS value split into number and (lowercase) unit.
#[derive(Debug, Clone, PartialEq)]
pub struct Dimension {
    pub value: f64,
    pub unit: String,
}

pub fn parse_dimension(raw: &str) -> Option<Dimension> {
    let s = raw.trim();
    let mut end = 0;
    let bytes = s.as_bytes();
    if end < bytes.len() && (bytes[end] == b'-' || bytes[end] == b'+') {
        end += 1;
    }
    let digits_start = end;
    while end < bytes.len() && (bytes[end].is_ascii_digit() || bytes[end] == b'.') {
        end += 1;
    }
    if end == digits_start {
        return None;
    }
    let value: f64 = s[..end].parse().ok()?;
    let unit = s[end..].to_ascii_lowercase();
    if !unit.chars().all(|c| c.is_ascii_alphabetic() || c == '%') {
        return None;
    }
    value.is_finite().then_some(Dimension { value, unit })
}

/// Resolves a length to px, or `None` for keywords, `auto`, functions and
/// unitless non-zero numbers.
pub fn normalize_length(raw: &str, ctx: &LengthContext) -> Option<f64> {
    let d = parse_dimension(raw)?;
    let v = d.value;
    let px = match d.unit.as_str() {
        "px" => v,
        "" if v == 0.0 => 0.0,
        "em" => v * ctx.font_size,
        "rem" => v * ctx.root_font_size,
        "%" => v * ctx.parent_extent / 100.0,
        "vw" => v * ctx.viewport_width / 100.0,
        "vh" => v * ctx.viewport_height / 100.0,
        "vmin" => v * ctx.viewport_width.min(ctx.viewport_height) / 100.0,
        "vmax" => v * ctx.viewport_width.max(ctx.viewport_height) / 100.0,
        "pt" => v * 96.0 / 72.0,
        "pc" => v * 16.0,
        "in" => v * 96.0,
        "cm" => v * 96.0 / 2.54,
        "mm" => v * 96.0 / 25.4,
        _ => return None,
    };
    Some(px)
}

/// True for values authored in absolute px (or a bare zero).
pub fn is_fixed_px(raw: &str) -> bool {
    matches!(parse_dimension(raw), Some(d) if d.unit == "px" || (d.unit.is_empty() && d.value == 0.0))
}
