//! Synthetic pages with exact ground truth: catalog pages, code pages,
//! mixed article pages, and geometric "photographed" warps of any digital
//! page.
//!
//! Every generator is a pure function of its parameters and seed and
//! returns a [`GeneratedPage`]: the [`PageSpec`] ground truth, an SVG
//! rendering, and a fixture table that makes the mock backend answer
//! exactly as a perfect model would.

mod article;
mod catalog;
mod code;
mod warp;

pub use article::gen_article;
pub use catalog::{gen_catalog, normalize_leaders, random_catalog};
pub use code::{gen_code_page, CodeLanguage};
pub use warp::{warp_photographed, CreaseAxis, WarpParams, WarpRecord, WarpedOutline};

use std::collections::BTreeMap;
use std::fmt::Write as _;

use image::{Rgb, RgbImage};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::backend::{FixtureTable, RegionId};
use crate::layout::{
    serialize_layout_sequence, validate_layout, DocumentType, LayoutElement, StageOneResult,
};
use crate::metrics::{reading_order_text, EvalElement, EvalPage};
use crate::pipeline::{select_prompt, Content, PromptTable};

pub const PAGE_W: u32 = 896;
pub const PAGE_H: u32 = 1280;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DatagenError {
    #[error("{name} = {value} outside {range}")]
    Range {
        name: &'static str,
        value: i64,
        range: &'static str,
    },
    #[error("warped page outline is not convex")]
    NonConvex,
    #[error("crease amplitude {amplitude} must stay below 10% of page height {page_h}")]
    AmplitudeTooLarge { amplitude: f64, page_h: u32 },
    #[error("invalid page spec: {0}")]
    InvalidSpec(String),
}

pub const FONT_FAMILIES: [&str; 5] = [
    "DejaVu Sans Mono",
    "Courier New",
    "Fira Code",
    "Source Code Pro",
    "Liberation Mono",
];

/// `(background, foreground, accent)`
pub const COLOR_SCHEMES: [(&str, &str, &str); 5] = [
    ("#ffffff", "#1f2328", "#0550ae"),
    ("#fdf6e3", "#586e75", "#b58900"),
    ("#282c34", "#abb2bf", "#c678dd"),
    ("#1e1e1e", "#d4d4d4", "#569cd6"),
    ("#f5f5f5", "#333333", "#a31515"),
];

/// One cell of the 5 x 5 font-family by color-scheme grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Style {
    pub id: u32,
    pub font_family: &'static str,
    pub background: &'static str,
    pub foreground: &'static str,
    pub accent: &'static str,
}

impl Style {
    pub fn from_id(id: u32) -> Style {
        let id = id % 25;
        let (background, foreground, accent) = COLOR_SCHEMES[(id % 5) as usize];
        Style {
            id,
            font_family: FONT_FAMILIES[(id / 5) as usize],
            background,
            foreground,
            accent,
        }
    }
}

/// Where a page came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub generator: String,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub style_id: Option<u32>,
    /// Generator-specific knobs (entry count, nesting depth, ...).
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warp: Option<WarpRecord>,
}

impl Provenance {
    fn new(generator: &str, seed: u64) -> Self {
        Provenance {
            generator: generator.to_string(),
            seed,
            style_id: None,
            params: BTreeMap::new(),
            base: None,
            warp: None,
        }
    }

    fn param(mut self, key: &str, value: impl Into<serde_json::Value>) -> Self {
        self.params.insert(key.to_string(), value.into());
        self
    }
}

/// Ground truth for one synthetic page.
///
/// Digital pages list their elements and the content of every parseable
/// element. Photographed pages carry only `holistic_text`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PageSpec {
    pub id: String,
    pub page_w: u32,
    pub page_h: u32,
    pub doc_type: DocumentType,
    #[serde(default)]
    pub elements: Vec<LayoutElement>,
    #[serde(default)]
    pub contents: BTreeMap<usize, Content>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub holistic_text: Option<String>,
    pub provenance: Provenance,
}

impl PageSpec {
    pub fn layout(&self) -> StageOneResult {
        StageOneResult {
            doc_type: self.doc_type,
            elements: self.elements.clone(),
            page_w: self.page_w,
            page_h: self.page_h,
        }
    }

    pub fn validate(&self) -> Result<(), DatagenError> {
        let violations = validate_layout(&self.layout());
        if !violations.is_empty() {
            return Err(DatagenError::InvalidSpec(format!("{violations:?}")));
        }
        let parseable: Vec<usize> = self
            .elements
            .iter()
            .filter(|e| e.label.is_parseable())
            .map(|e| e.order)
            .collect();
        let covered: Vec<usize> = self.contents.keys().copied().collect();
        if parseable != covered {
            return Err(DatagenError::InvalidSpec(format!(
                "contents cover {covered:?}, parseable elements are {parseable:?}"
            )));
        }
        for e in &self.elements {
            if let Some(c) = self.contents.get(&e.order) {
                if !c.is_compatible_with(e.label) {
                    return Err(DatagenError::InvalidSpec(format!(
                        "content of element {} does not fit label {}",
                        e.order, e.label
                    )));
                }
            }
        }
        match (self.doc_type, &self.holistic_text) {
            (DocumentType::Photographed, None) => Err(DatagenError::InvalidSpec(
                "photographed page without holistic text".into(),
            )),
            (DocumentType::Digital, Some(_)) => Err(DatagenError::InvalidSpec(
                "digital page with holistic text".into(),
            )),
            _ => Ok(()),
        }
    }

    /// Contents in reading order joined by newlines.
    pub fn reading_order_text(&self) -> String {
        match &self.holistic_text {
            Some(t) => t.clone(),
            None => reading_order_text(
                self.elements
                    .iter()
                    .filter_map(|e| self.contents.get(&e.order).map(Content::as_str)),
            ),
        }
    }

    pub fn eval_page(&self) -> EvalPage {
        EvalPage {
            id: self.id.clone(),
            doc_type: self.doc_type,
            page_w: self.page_w,
            page_h: self.page_h,
            elements: self
                .elements
                .iter()
                .map(|e| EvalElement {
                    element: e.clone(),
                    content: self.contents.get(&e.order).cloned(),
                })
                .collect(),
            holistic_text: self.holistic_text.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("page specs always serialize")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedPage {
    pub spec: PageSpec,
    pub svg: String,
    pub fixture: FixtureTable,
}

/// Fixture entries a perfect model would produce for `spec`: the layout
/// sequence plus one entry per parseable element (digital), or the
/// classification plus the holistic text (photographed).
pub fn emit_fixture(spec: &PageSpec, prompts: &PromptTable) -> FixtureTable {
    let mut table = FixtureTable::new();
    let layout_region = RegionId::layout(&spec.id);
    match spec.doc_type {
        DocumentType::Photographed => {
            table.insert(&layout_region, &prompts.layout, DocumentType::Photographed.phrase());
            table.insert(
                &RegionId::holistic(&spec.id),
                &prompts.holistic,
                spec.holistic_text.clone().unwrap_or_default(),
            );
        }
        DocumentType::Digital => {
            let sequence = serialize_layout_sequence(&spec.layout())
                .expect("generated layouts are valid");
            table.insert(&layout_region, &prompts.layout, sequence);
            for e in spec.elements.iter().filter(|e| e.label.is_parseable()) {
                let prompt = select_prompt(e.label, prompts).expect("label is parseable");
                let content = spec
                    .contents
                    .get(&e.order)
                    .map(|c| c.as_str().to_string())
                    .unwrap_or_default();
                table.insert(&RegionId::element(&spec.id, e.order), prompt, content);
            }
        }
    }
    table
}

fn finish(spec: PageSpec, svg: String) -> GeneratedPage {
    debug_assert_eq!(spec.validate(), Ok(()));
    let fixture = emit_fixture(&spec, &PromptTable::default());
    GeneratedPage { spec, svg, fixture }
}

pub(crate) fn rng_for(seed: u64, salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ salt.rotate_left(32))
}

pub(crate) const WORDS: [&str; 48] = [
    "document", "layout", "analysis", "parsing", "model", "element", "reading", "order",
    "table", "formula", "structure", "region", "anchor", "prompt", "visual", "encoder",
    "decoder", "sequence", "training", "dataset", "benchmark", "accuracy", "results", "method",
    "section", "figure", "caption", "paragraph", "content", "page", "image", "text",
    "evaluation", "robust", "efficient", "parallel", "hybrid", "stage", "detection", "output",
    "precise", "spatial", "category", "semantic", "catalog", "entry", "code", "system",
];

pub(crate) fn sentence(rng: &mut ChaCha8Rng, words: usize) -> String {
    use rand::seq::IndexedRandom;
    let mut out = Vec::with_capacity(words);
    for _ in 0..words {
        out.push(*WORDS.choose(rng).expect("non-empty"));
    }
    let mut s = out.join(" ");
    if let Some(first) = s.get(..1) {
        let upper = first.to_ascii_uppercase();
        s.replace_range(..1, &upper);
    }
    s
}

pub(crate) fn title_case(rng: &mut ChaCha8Rng, words: usize) -> String {
    use rand::seq::IndexedRandom;
    (0..words)
        .map(|_| {
            let w = WORDS.choose(rng).expect("non-empty");
            let mut c = w.chars();
            let first = c.next().unwrap().to_ascii_uppercase();
            format!("{first}{}", c.as_str())
        })
        .collect::<Vec<_>>()
        .join(" ")
}

pub(crate) fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

/// Minimal SVG 1.1 writer with one annotated group per element.
pub(crate) struct SvgWriter {
    out: String,
}

impl SvgWriter {
    pub(crate) fn new(w: u32, h: u32, style: &Style) -> Self {
        let mut out = String::new();
        let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="{}" fill="{}">"#,
            xml_escape(style.font_family),
            style.foreground
        );
        let _ = writeln!(out, r#"<rect x="0" y="0" width="{w}" height="{h}" fill="{}"/>"#, style.background);
        SvgWriter { out }
    }

    pub(crate) fn open_element(&mut self, e: &LayoutElement) {
        let b = e.bbox;
        let _ = writeln!(
            self.out,
            r#"<g data-label="{}" data-order="{}" data-bbox="{}">"#,
            e.label, e.order, b
        );
        let _ = writeln!(
            self.out,
            r#"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="none"/>"#,
            b.x1,
            b.y1,
            b.width(),
            b.height()
        );
    }

    pub(crate) fn raw(&mut self, s: &str) {
        self.out.push_str(s);
        self.out.push('\n');
    }

    pub(crate) fn text(&mut self, x: f64, y: f64, size: u32, anchor_end: bool, fill: Option<&str>, s: &str) {
        let _ = write!(self.out, r#"<text x="{x}" y="{y}" font-size="{size}" xml:space="preserve""#);
        if anchor_end {
            self.out.push_str(r#" text-anchor="end""#);
        }
        if let Some(fill) = fill {
            let _ = write!(self.out, r#" fill="{fill}""#);
        }
        let _ = writeln!(self.out, ">{}</text>", xml_escape(s));
    }

    /// Element group with its content drawn line by line from the top of
    /// the box.
    pub(crate) fn plain_element(&mut self, e: &LayoutElement, text: &str, size: u32) {
        self.open_element(e);
        let x = f64::from(e.bbox.x1) + 4.0;
        for (i, line) in text.lines().enumerate() {
            let y = f64::from(e.bbox.y1) + f64::from(size) * (1.2 * i as f64 + 1.0);
            if y > f64::from(e.bbox.y2) {
                break;
            }
            self.text(x, y, size, false, None, line);
        }
        self.close_element();
    }

    pub(crate) fn close_element(&mut self) {
        self.out.push_str("</g>\n");
    }

    pub(crate) fn finish(mut self) -> String {
        self.out.push_str("</svg>\n");
        self.out
    }
}

/// A photographed page warped from a base page picked by `seed`: an
/// article, a catalog or a code listing in turn.
pub fn random_warped(seed: u64) -> GeneratedPage {
    let base = match seed % 3 {
        0 => gen_article(seed),
        1 => random_catalog(seed),
        _ => gen_code_page(CodeLanguage::ALL[(seed / 3 % 4) as usize], seed),
    };
    let params = WarpParams::random(seed, base.spec.page_w, base.spec.page_h);
    warp_photographed(&base.spec, &params, seed).expect("random warp parameters are valid")
}

/// Renders page geometry to pixels: a white page with each element (or
/// each warped outline) filled in light gray. Enough for cropping and for
/// sending a page to a remote backend; no glyphs are drawn.
pub fn rasterize(spec: &PageSpec) -> RgbImage {
    let mut img = RgbImage::from_pixel(spec.page_w, spec.page_h, Rgb([255, 255, 255]));
    let shade = Rgb([225, 225, 225]);
    match spec.provenance.warp.as_ref() {
        Some(record) => {
            for outline in &record.outlines {
                fill_quad(&mut img, &outline.quad, shade);
            }
        }
        None => {
            for e in &spec.elements {
                let b = e.bbox;
                for y in b.y1..b.y2.min(spec.page_h) {
                    for x in b.x1..b.x2.min(spec.page_w) {
                        img.put_pixel(x, y, shade);
                    }
                }
            }
        }
    }
    img
}

fn fill_quad(img: &mut RgbImage, quad: &[[f64; 2]; 4], color: Rgb<u8>) {
    let (w, h) = img.dimensions();
    let min_x = quad.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min).max(0.0) as u32;
    let max_x = quad.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max).min(f64::from(w)) as u32;
    let min_y = quad.iter().map(|p| p[1]).fold(f64::INFINITY, f64::min).max(0.0) as u32;
    let max_y = quad.iter().map(|p| p[1]).fold(f64::NEG_INFINITY, f64::max).min(f64::from(h)) as u32;
    for y in min_y..max_y {
        for x in min_x..max_x {
            if warp::point_in_polygon(quad, [f64::from(x) + 0.5, f64::from(y) + 0.5]) {
                img.put_pixel(x, y, color);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layout::SemanticLabel;

    #[test]
    fn style_grid_has_25_cells() {
        let ids: std::collections::BTreeSet<_> = (0..25).map(|i| Style::from_id(i).id).collect();
        assert_eq!(ids.len(), 25);
        assert_eq!(Style::from_id(7).font_family, FONT_FAMILIES[1]);
        assert_eq!(Style::from_id(7).background, COLOR_SCHEMES[2].0);
    }

    #[test]
    fn fixture_counts() {
        let page = gen_catalog(10, 1, 3).unwrap();
        let parseable = page.spec.elements.iter().filter(|e| e.label.is_parseable()).count();
        assert_eq!(page.fixture.len(), parseable + 1);

        let article = gen_article(5);
        let parseable = article.spec.elements.iter().filter(|e| e.label.is_parseable()).count();
        assert!(article.spec.elements.iter().any(|e| e.label == SemanticLabel::Fig));
        assert_eq!(article.fixture.len(), parseable + 1);

        let warped = warp_photographed(&article.spec, &WarpParams::identity(), 1).unwrap();
        assert_eq!(warped.fixture.len(), 2);
    }

    #[test]
    fn three_parseable_elements_give_four_entries() {
        let mut spec = gen_catalog(10, 1, 1).unwrap().spec;
        spec.elements.truncate(3);
        spec.contents.retain(|k, _| *k < 3);
        assert_eq!(emit_fixture(&spec, &PromptTable::default()).len(), 4);
    }

    #[test]
    fn spec_json_round_trip() {
        let spec = gen_article(11).spec;
        let back: PageSpec = serde_json::from_str(&spec.to_json()).unwrap();
        assert_eq!(back, spec);
    }

    #[test]
    fn validation_catches_missing_contents() {
        let mut spec = gen_catalog(12, 2, 9).unwrap().spec;
        assert!(spec.validate().is_ok());
        spec.contents.remove(&3);
        assert!(spec.validate().is_err());
    }

    #[test]
    fn rasterized_page_matches_dimensions() {
        let spec = gen_code_page(CodeLanguage::Go, 4).spec;
        let img = rasterize(&spec);
        assert_eq!(img.dimensions(), (spec.page_w, spec.page_h));
        let b = spec.elements[0].bbox;
        assert_eq!(img.get_pixel(b.x1, b.y1), &Rgb([225, 225, 225]));
        assert_eq!(img.get_pixel(0, 0), &Rgb([255, 255, 255]));
    }
}
