//! Stage-1 layout sequence: document-type classification followed by the
//! reading-ordered list of layout anchors.
//!
//! Text form (one item per line, `\n` separated):
//!
//! ```text
//! digital document
//! [sec_0] 100,40,800,90
//! [para]{author,author_mail} 100,120,800,400
//! ```
//!
//! A photographed page is the single line `photographed document`. Reading
//! order is the line order; it is never written explicitly.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

macro_rules! token_enum {
    (
        $(#[$meta:meta])*
        $vis:vis enum $name:ident : $err:ident { $($variant:ident => $tok:literal),+ $(,)? }
    ) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        $vis enum $name {
            $($variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self {
                    $($name::$variant => $tok),+
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $name {
            type Err = LayoutError;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $($tok => Ok($name::$variant),)+
                    other => Err(LayoutError::$err(other.to_string())),
                }
            }
        }

        impl Serialize for $name {
            fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
                serializer.serialize_str(self.as_str())
            }
        }

        impl<'de> Deserialize<'de> for $name {
            fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
                let s = String::deserialize(deserializer)?;
                s.parse().map_err(serde::de::Error::custom)
            }
        }
    };
}

token_enum! {
    /// Semantic category of a layout element.
    pub enum SemanticLabel: UnknownLabel {
        Sec0 => "sec_0",
        Sec1 => "sec_1",
        Sec2 => "sec_2",
        Sec3 => "sec_3",
        Sec4 => "sec_4",
        Sec5 => "sec_5",
        Para => "para",
        HalfPara => "half_para",
        Header => "header",
        Foot => "foot",
        Fnote => "fnote",
        Watermark => "watermark",
        Fig => "fig",
        Tab => "tab",
        Cap => "cap",
        Anno => "anno",
        Equ => "equ",
        Code => "code",
        Catalogue => "catalogue",
        Reference => "reference",
        List => "list",
    }
}

token_enum! {
    /// Metadata attribute attached to a layout element.
    pub enum AttributeTag: UnknownAttribute {
        Author => "author",
        AuthorAffili => "author_affili",
        AuthorMail => "author_mail",
        AuthorIntroduction => "author_introduction",
        MetaPubDate => "meta_pub_date",
        MetaSubject => "meta_subject",
        MetaDoi => "meta_doi",
        MetaNum => "meta_num",
        PaperAbstract => "paper_abstract",
        PaperKeywords => "paper_keywords",
        PaperConclusion => "paper_conclusion",
        PageNum => "page_num",
    }
}

impl SemanticLabel {
    /// Section depth for `sec_0..sec_5`.
    pub fn section_depth(self) -> Option<u8> {
        match self {
            SemanticLabel::Sec0 => Some(0),
            SemanticLabel::Sec1 => Some(1),
            SemanticLabel::Sec2 => Some(2),
            SemanticLabel::Sec3 => Some(3),
            SemanticLabel::Sec4 => Some(4),
            SemanticLabel::Sec5 => Some(5),
            _ => None,
        }
    }

    /// Whether the element's content is produced by a model call.
    pub fn is_parseable(self) -> bool {
        !matches!(self, SemanticLabel::Fig | SemanticLabel::Watermark)
    }

    pub fn is_marginal(self) -> bool {
        matches!(
            self,
            SemanticLabel::Header | SemanticLabel::Foot | SemanticLabel::Watermark
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DocumentType {
    Digital,
    Photographed,
}

impl DocumentType {
    pub const fn phrase(self) -> &'static str {
        match self {
            DocumentType::Digital => "digital document",
            DocumentType::Photographed => "photographed document",
        }
    }
}

impl fmt::Display for DocumentType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.phrase())
    }
}

/// Axis-aligned box in absolute pixel coordinates, origin top-left.
///
/// Fields are public so that unchecked data can be inspected by
/// [`validate_layout`]; [`BBox::new`] and deserialization enforce
/// `x1 < x2` and `y1 < y2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BBox {
    pub x1: u32,
    pub y1: u32,
    pub x2: u32,
    pub y2: u32,
}

impl BBox {
    pub fn new(x1: u32, y1: u32, x2: u32, y2: u32) -> Result<Self, LayoutError> {
        let b = BBox { x1, y1, x2, y2 };
        if b.is_degenerate() {
            return Err(LayoutError::MalformedBBox {
                line: 0,
                text: b.to_string(),
            });
        }
        Ok(b)
    }

    pub fn is_degenerate(&self) -> bool {
        self.x1 >= self.x2 || self.y1 >= self.y2
    }

    pub fn width(&self) -> u32 {
        self.x2.saturating_sub(self.x1)
    }

    pub fn height(&self) -> u32 {
        self.y2.saturating_sub(self.y1)
    }

    pub fn area(&self) -> u64 {
        u64::from(self.width()) * u64::from(self.height())
    }

    pub fn fits_within(&self, page_w: u32, page_h: u32) -> bool {
        self.x2 <= page_w && self.y2 <= page_h
    }

    pub fn intersection_area(&self, other: &BBox) -> u64 {
        let w = self.x2.min(other.x2).saturating_sub(self.x1.max(other.x1));
        let h = self.y2.min(other.y2).saturating_sub(self.y1.max(other.y1));
        u64::from(w) * u64::from(h)
    }

    pub fn iou(&self, other: &BBox) -> f64 {
        let inter = self.intersection_area(other);
        let union = self.area() + other.area() - inter;
        if union == 0 {
            0.0
        } else {
            inter as f64 / union as f64
        }
    }

    pub fn overlaps(&self, other: &BBox) -> bool {
        self.intersection_area(other) > 0
    }
}

impl fmt::Display for BBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{},{}", self.x1, self.y1, self.x2, self.y2)
    }
}

impl Serialize for BBox {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        [self.x1, self.y1, self.x2, self.y2].serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for BBox {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let [x1, y1, x2, y2] = <[u32; 4]>::deserialize(deserializer)?;
        BBox::new(x1, y1, x2, y2).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayoutElement {
    pub label: SemanticLabel,
    pub bbox: BBox,
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    pub attrs: BTreeSet<AttributeTag>,
    pub order: usize,
}

impl LayoutElement {
    pub fn new(label: SemanticLabel, bbox: BBox, order: usize) -> Self {
        LayoutElement {
            label,
            bbox,
            attrs: BTreeSet::new(),
            order,
        }
    }

    pub fn with_attrs(mut self, attrs: impl IntoIterator<Item = AttributeTag>) -> Self {
        self.attrs.extend(attrs);
        self
    }

    /// Headers, footers, watermarks and anything tagged as a page number.
    pub fn is_marginal(&self) -> bool {
        self.label.is_marginal() || self.attrs.contains(&AttributeTag::PageNum)
    }
}

/// Output of the layout stage for one page.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageOneResult {
    pub doc_type: DocumentType,
    pub elements: Vec<LayoutElement>,
    pub page_w: u32,
    pub page_h: u32,
}

impl StageOneResult {
    pub fn photographed(page_w: u32, page_h: u32) -> Self {
        StageOneResult {
            doc_type: DocumentType::Photographed,
            elements: Vec::new(),
            page_w,
            page_h,
        }
    }

    pub fn digital(page_w: u32, page_h: u32, elements: Vec<LayoutElement>) -> Self {
        StageOneResult {
            doc_type: DocumentType::Digital,
            elements,
            page_w,
            page_h,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LayoutError {
    #[error("unknown document type {0:?}")]
    UnknownDocType(String),
    #[error("unknown semantic label {0:?}")]
    UnknownLabel(String),
    #[error("unknown attribute tag {0:?}")]
    UnknownAttribute(String),
    #[error("line {line}: malformed bounding box {text:?}")]
    MalformedBBox { line: usize, text: String },
    #[error("line {line}: {reason}")]
    MalformedLine { line: usize, reason: String },
    #[error("page dimensions must be positive, got {0}x{1}")]
    InvalidPage(u32, u32),
    #[error("layout input is not valid UTF-8")]
    InvalidUtf8,
    #[error("normalized coordinate {0} outside [0, 1]")]
    OutOfRange(f64),
    #[error("invalid layout result: {0:?}")]
    InvalidResult(Vec<Violation>),
}

/// A coordinate that overshot the page and was pulled back onto it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClampWarning {
    pub line: usize,
    pub original: [u32; 4],
    pub clamped: BBox,
}

impl fmt::Display for ClampWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [x1, y1, x2, y2] = self.original;
        write!(
            f,
            "line {}: box {x1},{y1},{x2},{y2} clamped to {}",
            self.line, self.clamped
        )
    }
}

/// Parses a Stage-1 emission, logging any clamped coordinates.
pub fn parse_layout_sequence(
    text: &str,
    page_w: u32,
    page_h: u32,
) -> Result<StageOneResult, LayoutError> {
    let (result, warnings) = parse_layout_sequence_with_warnings(text, page_w, page_h)?;
    for w in &warnings {
        tracing::warn!("{w}");
    }
    Ok(result)
}

pub fn parse_layout_bytes(
    bytes: &[u8],
    page_w: u32,
    page_h: u32,
) -> Result<StageOneResult, LayoutError> {
    let text = std::str::from_utf8(bytes).map_err(|_| LayoutError::InvalidUtf8)?;
    parse_layout_sequence(text, page_w, page_h)
}

pub fn parse_layout_sequence_with_warnings(
    text: &str,
    page_w: u32,
    page_h: u32,
) -> Result<(StageOneResult, Vec<ClampWarning>), LayoutError> {
    if page_w == 0 || page_h == 0 {
        return Err(LayoutError::InvalidPage(page_w, page_h));
    }
    let text = text.strip_suffix('\n').unwrap_or(text);
    let mut lines = text.split('\n');
    let head = lines.next().unwrap_or_default();
    let doc_type = match head {
        "digital document" => DocumentType::Digital,
        "photographed document" => DocumentType::Photographed,
        other => return Err(LayoutError::UnknownDocType(other.to_string())),
    };

    let mut elements = Vec::new();
    let mut warnings = Vec::new();
    for (idx, line) in lines.enumerate() {
        let line_no = idx + 2;
        if doc_type == DocumentType::Photographed {
            return Err(LayoutError::MalformedLine {
                line: line_no,
                reason: "element lines after photographed document".into(),
            });
        }
        let element = parse_element_line(line, line_no, elements.len(), page_w, page_h, &mut warnings)?;
        elements.push(element);
    }

    Ok((
        StageOneResult {
            doc_type,
            elements,
            page_w,
            page_h,
        },
        warnings,
    ))
}

fn parse_element_line(
    line: &str,
    line_no: usize,
    order: usize,
    page_w: u32,
    page_h: u32,
    warnings: &mut Vec<ClampWarning>,
) -> Result<LayoutElement, LayoutError> {
    let malformed = |reason: &str| LayoutError::MalformedLine {
        line: line_no,
        reason: reason.to_string(),
    };

    let rest = line.strip_prefix('[').ok_or_else(|| malformed("expected '['"))?;
    let close = rest.find(']').ok_or_else(|| malformed("unterminated label"))?;
    let label: SemanticLabel = rest[..close].parse()?;
    let mut rest = &rest[close + 1..];

    let mut attrs = BTreeSet::new();
    if let Some(after) = rest.strip_prefix('{') {
        let close = after.find('}').ok_or_else(|| malformed("unterminated attribute list"))?;
        for tag in after[..close].split(',') {
            attrs.insert(tag.parse::<AttributeTag>()?);
        }
        rest = &after[close + 1..];
    }

    let coords = rest
        .strip_prefix(' ')
        .ok_or_else(|| malformed("expected a single space before coordinates"))?;
    let bad_box = || LayoutError::MalformedBBox {
        line: line_no,
        text: coords.to_string(),
    };
    let mut parts = coords.split(',');
    let mut raw = [0u32; 4];
    for slot in raw.iter_mut() {
        let part = parts.next().ok_or_else(bad_box)?;
        if part.is_empty() || !part.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad_box());
        }
        *slot = part.parse().map_err(|_| bad_box())?;
    }
    if parts.next().is_some() {
        return Err(bad_box());
    }

    let clamped = BBox {
        x1: raw[0].min(page_w),
        y1: raw[1].min(page_h),
        x2: raw[2].min(page_w),
        y2: raw[3].min(page_h),
    };
    if clamped.is_degenerate() {
        return Err(bad_box());
    }
    if [clamped.x1, clamped.y1, clamped.x2, clamped.y2] != raw {
        warnings.push(ClampWarning {
            line: line_no,
            original: raw,
            clamped,
        });
    }

    Ok(LayoutElement {
        label,
        bbox: clamped,
        attrs,
        order,
    })
}

/// Renders the canonical text form. Fails if the result does not validate.
pub fn serialize_layout_sequence(result: &StageOneResult) -> Result<String, LayoutError> {
    let violations = validate_layout(result);
    if !violations.is_empty() {
        return Err(LayoutError::InvalidResult(violations));
    }
    let mut out = String::from(result.doc_type.phrase());
    for el in &result.elements {
        out.push('\n');
        out.push('[');
        out.push_str(el.label.as_str());
        out.push(']');
        if !el.attrs.is_empty() {
            out.push('{');
            let tags: Vec<&str> = el.attrs.iter().map(|a| a.as_str()).collect();
            out.push_str(&tags.join(","));
            out.push('}');
        }
        out.push(' ');
        out.push_str(&el.bbox.to_string());
    }
    Ok(out)
}

/// Converts a legacy normalized box (fractions of the page) to pixels.
pub fn convert_normalized_bbox(
    normalized: [f64; 4],
    page_w: u32,
    page_h: u32,
) -> Result<BBox, LayoutError> {
    if let Some(bad) = normalized
        .iter()
        .find(|v| !(0.0..=1.0).contains(*v) || v.is_nan())
    {
        return Err(LayoutError::OutOfRange(*bad));
    }
    let [nx1, ny1, nx2, ny2] = normalized;
    let scale = |v: f64, dim: u32| (v * f64::from(dim)).round() as u32;
    let b = BBox {
        x1: scale(nx1, page_w),
        y1: scale(ny1, page_h),
        x2: scale(nx2, page_w),
        y2: scale(ny2, page_h),
    };
    if b.is_degenerate() {
        return Err(LayoutError::MalformedBBox {
            line: 0,
            text: format!("{nx1},{ny1},{nx2},{ny2}"),
        });
    }
    Ok(b)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    EmptyPage { page_w: u32, page_h: u32 },
    ElementsOnPhotographed { count: usize },
    DegenerateBox { order: usize, bbox: [u32; 4] },
    OutOfBounds { order: usize, bbox: [u32; 4] },
    OrderDuplicate { order: usize },
    OrderGap { missing: usize },
    OrderNotAscending { position: usize },
}

/// Lists every invariant violation; an empty list means the result is valid.
pub fn validate_layout(result: &StageOneResult) -> Vec<Violation> {
    let mut out = Vec::new();
    if result.page_w == 0 || result.page_h == 0 {
        out.push(Violation::EmptyPage {
            page_w: result.page_w,
            page_h: result.page_h,
        });
    }
    if result.doc_type == DocumentType::Photographed && !result.elements.is_empty() {
        out.push(Violation::ElementsOnPhotographed {
            count: result.elements.len(),
        });
    }

    for el in &result.elements {
        let b = el.bbox;
        let coords = [b.x1, b.y1, b.x2, b.y2];
        if b.is_degenerate() {
            out.push(Violation::DegenerateBox {
                order: el.order,
                bbox: coords,
            });
        }
        if !b.fits_within(result.page_w, result.page_h) {
            out.push(Violation::OutOfBounds {
                order: el.order,
                bbox: coords,
            });
        }
    }

    let mut seen = BTreeSet::new();
    let mut reported = BTreeSet::new();
    for el in &result.elements {
        if !seen.insert(el.order) && reported.insert(el.order) {
            out.push(Violation::OrderDuplicate { order: el.order });
        }
    }
    if let Some(&max) = seen.iter().next_back() {
        out.extend(
            (0..max)
                .filter(|i| !seen.contains(i))
                .map(|missing| Violation::OrderGap { missing }),
        );
    }
    for (position, pair) in result.elements.windows(2).enumerate() {
        if pair[1].order < pair[0].order {
            out.push(Violation::OrderNotAscending {
                position: position + 1,
            });
        }
    }
    out
}
