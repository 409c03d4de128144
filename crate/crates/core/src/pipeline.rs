//! Two-stage orchestration: classify and lay out the page, then parse either
//! the whole page (photographed) or every element crop in parallel (digital).

use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::{Duration, Instant};

use image::DynamicImage;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::assemble::AssembleOptions;
use crate::backend::{BackendError, EncodedImage, ModelBackend, ModelRequest, RegionId};
use crate::layout::{
    parse_layout_sequence, BBox, DocumentType, LayoutElement, LayoutError, SemanticLabel,
    StageOneResult,
};

pub const LAYOUT_PROMPT: &str = "Parse the reading order of this document.";
pub const HOLISTIC_PROMPT: &str = "Read text in the image.";
pub const FORMULA_PROMPT: &str = "Read formula in the image.";
pub const CODE_PROMPT: &str = "Read code in the image.";
pub const TABLE_PROMPT: &str = "Parse the table in the image.";
pub const PARAGRAPH_PROMPT: &str = "Read text in the image.";
/// Alternative holistic phrasing, usable as a prompt override.
pub const HOLISTIC_PROMPT_PHOTOGRAPHED: &str = "Parse the content of this photographed document.";

/// The six task prompts. Fields missing from an override file keep their
/// defaults.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PromptTable {
    pub layout: String,
    pub holistic: String,
    pub formula: String,
    pub code: String,
    pub table: String,
    pub paragraph: String,
}

impl Default for PromptTable {
    fn default() -> Self {
        PromptTable {
            layout: LAYOUT_PROMPT.into(),
            holistic: HOLISTIC_PROMPT.into(),
            formula: FORMULA_PROMPT.into(),
            code: CODE_PROMPT.into(),
            table: TABLE_PROMPT.into(),
            paragraph: PARAGRAPH_PROMPT.into(),
        }
    }
}

impl PromptTable {
    pub fn validate(&self) -> Result<(), PipelineError> {
        let fields = [
            ("layout", &self.layout),
            ("holistic", &self.holistic),
            ("formula", &self.formula),
            ("code", &self.code),
            ("table", &self.table),
            ("paragraph", &self.paragraph),
        ];
        match fields.iter().find(|(_, v)| v.is_empty()) {
            Some((name, _)) => Err(PipelineError::InvalidConfig(format!(
                "prompt {name} is empty"
            ))),
            None => Ok(()),
        }
    }
}

/// Picks the content prompt for a layout label.
pub fn select_prompt(label: SemanticLabel, prompts: &PromptTable) -> Result<&str, PipelineError> {
    match label {
        SemanticLabel::Fig | SemanticLabel::Watermark => Err(PipelineError::NotParseable(label)),
        SemanticLabel::Tab => Ok(&prompts.table),
        SemanticLabel::Equ => Ok(&prompts.formula),
        SemanticLabel::Code => Ok(&prompts.code),
        _ => Ok(&prompts.paragraph),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "content_kind", content = "content", rename_all = "snake_case")]
pub enum Content {
    Text(String),
    TableHtml(String),
    FormulaLatex(String),
    /// Leading whitespace is significant and kept byte-for-byte.
    CodeBlock(String),
    /// Relative path of the saved crop.
    FigurePlaceholder(String),
}

impl Content {
    /// Wraps `text` in the content kind that `label` produces.
    pub fn for_label(label: SemanticLabel, text: String) -> Content {
        match label {
            SemanticLabel::Tab => Content::TableHtml(text),
            SemanticLabel::Equ => Content::FormulaLatex(text),
            SemanticLabel::Code => Content::CodeBlock(text),
            SemanticLabel::Fig => Content::FigurePlaceholder(text),
            _ => Content::Text(text),
        }
    }

    pub fn as_str(&self) -> &str {
        match self {
            Content::Text(s)
            | Content::TableHtml(s)
            | Content::FormulaLatex(s)
            | Content::CodeBlock(s)
            | Content::FigurePlaceholder(s) => s,
        }
    }

    pub fn is_compatible_with(&self, label: SemanticLabel) -> bool {
        std::mem::discriminant(self)
            == std::mem::discriminant(&Content::for_label(label, String::new()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContentSource {
    ModelCall,
    Synthesized,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParsedElement {
    #[serde(flatten)]
    pub element: LayoutElement,
    #[serde(flatten)]
    pub content: Content,
    pub source: ContentSource,
    /// Set when this element could not be parsed; content is then empty.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl ParsedElement {
    pub fn failed(&self) -> bool {
        self.error.is_some()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage1_ms: f64,
    pub stage2_ms: f64,
    pub total_ms: f64,
}

fn millis(d: Duration) -> f64 {
    d.as_secs_f64() * 1000.0
}

/// Parse result for one page. Digital pages carry `parsed`, photographed
/// pages carry `holistic_text`; never both.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocumentOutput {
    pub id: String,
    pub doc_type: DocumentType,
    pub page_w: u32,
    pub page_h: u32,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub parsed: Vec<ParsedElement>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub holistic_text: Option<String>,
    #[serde(default)]
    pub timing: StageTiming,
}

impl DocumentOutput {
    /// Layout anchors of the parsed elements.
    pub fn layout(&self) -> StageOneResult {
        StageOneResult {
            doc_type: self.doc_type,
            elements: self.parsed.iter().map(|p| p.element.clone()).collect(),
            page_w: self.page_w,
            page_h: self.page_h,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("document output always serializes")
    }
}

/// How Stage 2 is chosen. `Hybrid` follows the Stage-1 classification; the
/// forced modes exist for ablation runs.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DispatchMode {
    #[default]
    Hybrid,
    ForceDigital,
    ForceHolistic,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PipelineConfig {
    pub concurrency: usize,
    pub crop_padding: u32,
    pub include_marginalia: bool,
    pub prompts: PromptTable,
    pub dispatch: DispatchMode,
    /// Directory receiving figure crops; nothing is written when unset.
    pub crop_dir: Option<PathBuf>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            concurrency: 4,
            crop_padding: 0,
            include_marginalia: false,
            prompts: PromptTable::default(),
            dispatch: DispatchMode::Hybrid,
            crop_dir: None,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), PipelineError> {
        if self.concurrency == 0 {
            return Err(PipelineError::InvalidConfig("concurrency must be at least 1".into()));
        }
        self.prompts.validate()
    }

    pub fn assemble_options(&self) -> AssembleOptions {
        AssembleOptions {
            include_marginalia: self.include_marginalia,
            ..AssembleOptions::default()
        }
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{stage} backend call failed: {source}")]
    Backend {
        stage: &'static str,
        #[source]
        source: BackendError,
    },
    #[error("layout output could not be parsed: {source} (raw response: {raw:?})")]
    LayoutParse {
        #[source]
        source: LayoutError,
        raw: String,
    },
    #[error("label {0} is not sent to the model")]
    NotParseable(SemanticLabel),
    #[error("crop of {0} has no area inside the page")]
    DegenerateRegion(BBox),
    #[error("all {count} element requests failed; first error: {first}")]
    AllElementsFailed { count: usize, first: String },
    #[error("image error: {0}")]
    Image(String),
    #[error("invalid pipeline configuration: {0}")]
    InvalidConfig(String),
}

/// A decoded page image with the id used to address its regions.
#[derive(Debug, Clone)]
pub struct PageImage {
    pub id: String,
    pub image: DynamicImage,
}

impl PageImage {
    pub fn new(id: impl Into<String>, image: DynamicImage) -> Self {
        PageImage {
            id: id.into(),
            image,
        }
    }

    pub fn decode(id: impl Into<String>, bytes: &[u8]) -> Result<Self, PipelineError> {
        let image = image::load_from_memory(bytes).map_err(|e| PipelineError::Image(e.to_string()))?;
        Ok(PageImage::new(id, image))
    }

    pub fn width(&self) -> u32 {
        self.image.width()
    }

    pub fn height(&self) -> u32 {
        self.image.height()
    }

    fn encode(&self) -> Result<EncodedImage, PipelineError> {
        EncodedImage::png(&self.image).map_err(|e| PipelineError::Image(e.to_string()))
    }
}

#[derive(Debug, Clone)]
pub struct Crop {
    pub region: BBox,
    pub image: DynamicImage,
}

/// Cuts `bbox` grown by `padding` on every side, clipped to the page.
pub fn crop_region(page: &DynamicImage, bbox: BBox, padding: u32) -> Result<Crop, PipelineError> {
    let (w, h) = (page.width(), page.height());
    let region = BBox {
        x1: bbox.x1.saturating_sub(padding).min(w),
        y1: bbox.y1.saturating_sub(padding).min(h),
        x2: bbox.x2.saturating_add(padding).min(w),
        y2: bbox.y2.saturating_add(padding).min(h),
    };
    if region.is_degenerate() {
        return Err(PipelineError::DegenerateRegion(bbox));
    }
    let image = page.crop_imm(region.x1, region.y1, region.width(), region.height());
    Ok(Crop { region, image })
}

/// Relative reference written into figure placeholders.
pub fn figure_reference(page_id: &str, order: usize) -> String {
    format!("crops/{page_id}_{order}.png")
}

fn request(
    backend: &dyn ModelBackend,
    stage: &'static str,
    prompt: &str,
    image: EncodedImage,
    region: RegionId,
) -> Result<String, PipelineError> {
    let req = ModelRequest::new(prompt, image, region)
        .map_err(|source| PipelineError::Backend { stage, source })?;
    backend
        .request(&req)
        .map(|r| r.text)
        .map_err(|source| PipelineError::Backend { stage, source })
}

/// Stage 1: one request with the layout prompt over the full page.
pub fn run_stage1(
    page: &PageImage,
    backend: &dyn ModelBackend,
    config: &PipelineConfig,
) -> Result<StageOneResult, PipelineError> {
    stage1_with(page, &page.encode()?, backend, config)
}

fn stage1_with(
    page: &PageImage,
    encoded: &EncodedImage,
    backend: &dyn ModelBackend,
    config: &PipelineConfig,
) -> Result<StageOneResult, PipelineError> {
    let raw = request(
        backend,
        "layout",
        &config.prompts.layout,
        encoded.clone(),
        RegionId::layout(&page.id),
    )?;
    parse_layout_sequence(&raw, page.width(), page.height())
        .map_err(|source| PipelineError::LayoutParse { source, raw })
}

/// Stage 2 for photographed pages: one request over the full page.
pub fn run_stage2_holistic(
    page: &PageImage,
    backend: &dyn ModelBackend,
    config: &PipelineConfig,
) -> Result<String, PipelineError> {
    holistic_with(page, page.encode()?, backend, config)
}

fn holistic_with(
    page: &PageImage,
    encoded: EncodedImage,
    backend: &dyn ModelBackend,
    config: &PipelineConfig,
) -> Result<String, PipelineError> {
    request(
        backend,
        "holistic",
        &config.prompts.holistic,
        encoded,
        RegionId::holistic(&page.id),
    )
}

fn parse_one(
    page: &PageImage,
    element: &LayoutElement,
    backend: &dyn ModelBackend,
    config: &PipelineConfig,
) -> ParsedElement {
    let label = element.label;
    let done = |content: Content, source, error| ParsedElement {
        element: element.clone(),
        content,
        source,
        error,
    };
    let empty = || Content::for_label(label, String::new());

    match label {
        SemanticLabel::Watermark => done(empty(), ContentSource::Synthesized, None),
        SemanticLabel::Fig => {
            let reference = figure_reference(&page.id, element.order);
            let saved = crop_region(&page.image, element.bbox, config.crop_padding).and_then(|crop| {
                if let Some(dir) = &config.crop_dir {
                    let path = dir.join(format!("{}_{}.png", page.id, element.order));
                    crop.image
                        .save(&path)
                        .map_err(|e| PipelineError::Image(format!("{}: {e}", path.display())))?;
                }
                Ok(())
            });
            match saved {
                Ok(()) => done(Content::FigurePlaceholder(reference), ContentSource::Synthesized, None),
                Err(e) => done(empty(), ContentSource::Synthesized, Some(e.to_string())),
            }
        }
        _ => {
            let result = select_prompt(label, &config.prompts).and_then(|prompt| {
                let crop = crop_region(&page.image, element.bbox, config.crop_padding)?;
                let encoded =
                    EncodedImage::png(&crop.image).map_err(|e| PipelineError::Image(e.to_string()))?;
                request(
                    backend,
                    "element",
                    prompt,
                    encoded,
                    RegionId::element(&page.id, element.order),
                )
            });
            match result {
                Ok(text) => done(Content::for_label(label, text), ContentSource::ModelCall, None),
                Err(e) => {
                    tracing::warn!(page = %page.id, order = element.order, "element failed: {e}");
                    done(empty(), ContentSource::ModelCall, Some(e.to_string()))
                }
            }
        }
    }
}

/// Stage 2 for digital pages.
///
/// Elements are handed to a pool of `config.concurrency` workers; each
/// result lands in the slot of its input position, so the output order
/// never depends on completion order. Individual failures are recorded on
/// the element; an error is returned only when every model call failed.
pub fn run_stage2_elements(
    page: &PageImage,
    elements: &[LayoutElement],
    backend: &dyn ModelBackend,
    config: &PipelineConfig,
) -> Result<Vec<ParsedElement>, PipelineError> {
    config.validate()?;
    let next = AtomicUsize::new(0);
    let workers = config.concurrency.min(elements.len());

    let mut slots: Vec<Option<ParsedElement>> = vec![None; elements.len()];
    let batches: Vec<Vec<(usize, ParsedElement)>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|_| {
                scope.spawn(|| {
                    let mut done = Vec::new();
                    loop {
                        let idx = next.fetch_add(1, Ordering::Relaxed);
                        let Some(element) = elements.get(idx) else { break };
                        done.push((idx, parse_one(page, element, backend, config)));
                    }
                    done
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("element worker panicked"))
            .collect()
    });
    for (idx, parsed) in batches.into_iter().flatten() {
        slots[idx] = Some(parsed);
    }
    let mut parsed: Vec<ParsedElement> = slots
        .into_iter()
        .map(|s| s.expect("every element slot is filled"))
        .collect();
    parsed.sort_by_key(|p| p.element.order);

    let model_calls: Vec<&ParsedElement> = parsed
        .iter()
        .filter(|p| p.source == ContentSource::ModelCall)
        .collect();
    if !model_calls.is_empty() && model_calls.iter().all(|p| p.failed()) {
        return Err(PipelineError::AllElementsFailed {
            count: model_calls.len(),
            first: model_calls[0].error.clone().unwrap_or_default(),
        });
    }
    Ok(parsed)
}

/// Full two-stage parse of one page.
pub fn parse_document(
    page: &PageImage,
    backend: &dyn ModelBackend,
    config: &PipelineConfig,
) -> Result<DocumentOutput, PipelineError> {
    config.validate()?;
    let start = Instant::now();
    let encoded = page.encode()?;
    let layout = stage1_with(page, &encoded, backend, config)?;
    let stage1 = start.elapsed();

    let doc_type = match config.dispatch {
        DispatchMode::Hybrid => layout.doc_type,
        DispatchMode::ForceDigital => DocumentType::Digital,
        DispatchMode::ForceHolistic => DocumentType::Photographed,
    };
    let stage2_start = Instant::now();
    let (parsed, holistic_text) = match doc_type {
        DocumentType::Photographed => (Vec::new(), Some(holistic_with(page, encoded, backend, config)?)),
        DocumentType::Digital => (
            run_stage2_elements(page, &layout.elements, backend, config)?,
            None,
        ),
    };
    let stage2 = stage2_start.elapsed();
    let timing = StageTiming {
        stage1_ms: millis(stage1),
        stage2_ms: millis(stage2),
        total_ms: millis(start.elapsed()),
    };
    tracing::info!(
        page = %page.id,
        doc_type = ?doc_type,
        elements = parsed.len(),
        stage1_ms = timing.stage1_ms,
        stage2_ms = timing.stage2_ms,
        "page parsed"
    );

    Ok(DocumentOutput {
        id: page.id.clone(),
        doc_type,
        page_w: page.width(),
        page_h: page.height(),
        parsed,
        holistic_text,
        timing,
    })
}
