//! Evaluation metrics: normalized edit distance for text and reading order,
//! TEDS / TEDS-S for tables, a LaTeX token score for formulas, element
//! matching, and per-page / corpus reports.
//!
//! Edit distances are normalized by the longer input. The formula score is
//! a token-level proxy and is reported as `formula_score`, not as CDM.

mod edit;
mod formula;
mod matching;
mod table;
mod tree;

pub use edit::{levenshtein, normalized_edit_distance, normalized_sequence_distance};
pub use formula::{formula_token_score, tokenize_latex};
pub use matching::{match_elements, MatchedPair, Matching, IOU_THRESHOLD};
pub use table::{parse_table_html, teds, teds_s, TableNode, TableParseError, TableTag, TableTree};
pub use tree::{tree_edit_distance, unit_relabel, Tree};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::layout::{DocumentType, LayoutElement, SemanticLabel, StageOneResult};
use crate::pipeline::{Content, DocumentOutput};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricError {
    #[error("reading-order edit needs two digital layouts")]
    BothMustBeDigital,
    #[error("nothing to aggregate")]
    EmptyInput,
}

/// Normalized edit distance between the predicted order of matched ground
/// truth elements and the ground-truth order. Unmatched ground-truth
/// elements count as deletions.
pub fn reading_order_edit(pred: &StageOneResult, gt: &StageOneResult) -> Result<f64, MetricError> {
    if pred.doc_type != DocumentType::Digital || gt.doc_type != DocumentType::Digital {
        return Err(MetricError::BothMustBeDigital);
    }
    Ok(order_edit_sorted(&sorted(&pred.elements), &sorted(&gt.elements)))
}

fn sorted(elements: &[LayoutElement]) -> Vec<LayoutElement> {
    let mut v = elements.to_vec();
    v.sort_by_key(|e| e.order);
    v
}

fn order_edit_sorted(pred: &[LayoutElement], gt: &[LayoutElement]) -> f64 {
    let matching = match_elements(pred, gt);
    let predicted: Vec<usize> = (0..pred.len())
        .filter_map(|p| matching.gt_for_pred(p))
        .collect();
    let expected: Vec<usize> = (0..gt.len()).collect();
    normalized_sequence_distance(&predicted, &expected)
}

/// Joins non-empty contents with `\n`, the ground-truth form of a page read
/// end to end.
pub fn reading_order_text<'a>(contents: impl IntoIterator<Item = &'a str>) -> String {
    contents
        .into_iter()
        .filter(|c| !c.is_empty())
        .collect::<Vec<_>>()
        .join("\n")
}

/// Scores for one ground-truth element.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElementScore {
    pub gt_order: usize,
    pub pred_order: Option<usize>,
    pub label: SemanticLabel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text_edit: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub formula_score: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table_teds: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table_teds_s: Option<f64>,
}

/// Metric columns. A column is `None` when the page (or corpus) has no
/// element of that type. Text and order are edit distances in [0, 1];
/// formula, table and overall are scores in [0, 100].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub text_edit: Option<f64>,
    pub formula_score: Option<f64>,
    pub table_teds: Option<f64>,
    pub table_teds_s: Option<f64>,
    pub order_edit: Option<f64>,
    pub overall: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub per_element: Vec<ElementScore>,
}

impl EvalReport {
    /// Builds a report with `overall` derived from the other columns.
    pub fn from_components(
        text_edit: Option<f64>,
        formula_score: Option<f64>,
        table_teds: Option<f64>,
        table_teds_s: Option<f64>,
        order_edit: Option<f64>,
    ) -> Self {
        let mut r = EvalReport {
            text_edit,
            formula_score,
            table_teds,
            table_teds_s,
            order_edit,
            overall: None,
            per_element: Vec::new(),
        };
        r.overall = r.compute_overall();
        r
    }

    /// Mean of `100(1 - text_edit)`, `formula_score`, `table_teds` and
    /// `100(1 - order_edit)` over the columns present.
    pub fn compute_overall(&self) -> Option<f64> {
        let parts: Vec<f64> = [
            self.text_edit.map(|v| 100.0 * (1.0 - v)),
            self.formula_score,
            self.table_teds,
            self.order_edit.map(|v| 100.0 * (1.0 - v)),
        ]
        .into_iter()
        .flatten()
        .collect();
        (!parts.is_empty()).then(|| parts.iter().sum::<f64>() / parts.len() as f64)
    }

    /// One-line summary with two-decimal scores.
    pub fn summary_row(&self) -> String {
        let fmt = |v: Option<f64>, scale: f64| match v {
            Some(v) => format!("{:.2}", v * scale),
            None => "-".to_string(),
        };
        format!(
            "overall {} | text_edit {} | formula {} | teds {} | teds_s {} | order_edit {}",
            fmt(self.overall, 1.0),
            fmt(self.text_edit, 1.0),
            fmt(self.formula_score, 1.0),
            fmt(self.table_teds, 1.0),
            fmt(self.table_teds_s, 1.0),
            fmt(self.order_edit, 1.0),
        )
    }
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Per-column means over the documents that have the column, then overall
/// from those means.
pub fn aggregate(reports: &[EvalReport]) -> Result<EvalReport, MetricError> {
    if reports.is_empty() {
        return Err(MetricError::EmptyInput);
    }
    let col = |f: fn(&EvalReport) -> Option<f64>| mean(reports.iter().filter_map(f));
    Ok(EvalReport::from_components(
        col(|r| r.text_edit),
        col(|r| r.formula_score),
        col(|r| r.table_teds),
        col(|r| r.table_teds_s),
        col(|r| r.order_edit),
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalElement {
    pub element: LayoutElement,
    /// `None` for elements that carry no scorable content (figures,
    /// watermarks).
    pub content: Option<Content>,
}

/// Common view of a prediction or a ground-truth page.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalPage {
    pub id: String,
    pub doc_type: DocumentType,
    pub page_w: u32,
    pub page_h: u32,
    pub elements: Vec<EvalElement>,
    pub holistic_text: Option<String>,
}

impl EvalPage {
    pub fn from_output(doc: &DocumentOutput) -> Self {
        let mut elements: Vec<EvalElement> = doc
            .parsed
            .iter()
            .map(|p| EvalElement {
                element: p.element.clone(),
                content: p.element.label.is_parseable().then(|| p.content.clone()),
            })
            .collect();
        elements.sort_by_key(|e| e.element.order);
        EvalPage {
            id: doc.id.clone(),
            doc_type: doc.doc_type,
            page_w: doc.page_w,
            page_h: doc.page_h,
            elements,
            holistic_text: doc.holistic_text.clone(),
        }
    }

    /// Whole-page text: the holistic text, or element contents in reading
    /// order.
    pub fn text(&self) -> String {
        match &self.holistic_text {
            Some(t) => t.clone(),
            None => reading_order_text(
                self.elements
                    .iter()
                    .filter_map(|e| e.content.as_ref().map(Content::as_str)),
            ),
        }
    }

    pub fn layout(&self) -> Vec<LayoutElement> {
        self.elements.iter().map(|e| e.element.clone()).collect()
    }
}

enum Scored {
    Text,
    Formula,
    Table,
}

fn scored_as(label: SemanticLabel) -> Option<Scored> {
    match label {
        SemanticLabel::Fig | SemanticLabel::Watermark => None,
        SemanticLabel::Tab => Some(Scored::Table),
        SemanticLabel::Equ => Some(Scored::Formula),
        _ => Some(Scored::Text),
    }
}

/// Scores one predicted page against its ground truth.
///
/// Two digital pages are compared element by element through
/// [`match_elements`]; if either side is photographed, whole-page texts
/// are compared instead and only `text_edit` is reported.
pub fn evaluate_page(pred: &EvalPage, gt: &EvalPage) -> EvalReport {
    if pred.doc_type == DocumentType::Photographed || gt.doc_type == DocumentType::Photographed {
        return EvalReport::from_components(
            Some(normalized_edit_distance(&pred.text(), &gt.text())),
            None,
            None,
            None,
            None,
        );
    }

    let pred_layout = pred.layout();
    let gt_layout = gt.layout();
    let matching = match_elements(&pred_layout, &gt_layout);

    let mut per_element = Vec::new();
    for (gi, g) in gt.elements.iter().enumerate() {
        let (Some(kind), Some(gt_content)) = (scored_as(g.element.label), &g.content) else {
            continue;
        };
        let pred_idx = matching.pred_for_gt(gi);
        let pred_text = pred_idx
            .and_then(|p| pred.elements[p].content.as_ref())
            .map(Content::as_str)
            .unwrap_or("");
        let gt_text = gt_content.as_str();
        let mut score = ElementScore {
            gt_order: g.element.order,
            pred_order: pred_idx.map(|p| pred.elements[p].element.order),
            label: g.element.label,
            text_edit: None,
            formula_score: None,
            table_teds: None,
            table_teds_s: None,
        };
        match kind {
            Scored::Text => score.text_edit = Some(normalized_edit_distance(pred_text, gt_text)),
            Scored::Formula => score.formula_score = Some(formula_token_score(pred_text, gt_text)),
            Scored::Table => {
                score.table_teds = Some(100.0 * teds(pred_text, gt_text));
                score.table_teds_s = Some(100.0 * teds_s(pred_text, gt_text));
            }
        }
        per_element.push(score);
    }

    let col = |f: fn(&ElementScore) -> Option<f64>| mean(per_element.iter().filter_map(f));
    let order_edit = (!gt_layout.is_empty() || !pred_layout.is_empty())
        .then(|| order_edit_sorted(&pred_layout, &gt_layout));
    let mut report = EvalReport::from_components(
        col(|e| e.text_edit),
        col(|e| e.formula_score),
        col(|e| e.table_teds),
        col(|e| e.table_teds_s),
        order_edit,
    );
    report.per_element = per_element;
    report
}
