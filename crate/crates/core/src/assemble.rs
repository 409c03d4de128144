//! Markdown assembly of a parsed page in reading order.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::layout::{AttributeTag, DocumentType, SemanticLabel};
use crate::pipeline::{Content, DocumentOutput, ParsedElement};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AssembleOptions {
    /// Keep headers, footers, page numbers and watermarks.
    pub include_marginalia: bool,
    /// Join `experi-` + `ment` into `experiment` when merging fragments.
    pub dehyphenate: bool,
}

impl Default for AssembleOptions {
    fn default() -> Self {
        AssembleOptions {
            include_marginalia: false,
            dehyphenate: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockKind {
    Heading(u8),
    Paragraph,
    TableHtml,
    FormulaDisplay,
    CodeFence,
    Caption,
    Footnote,
    Marginalia,
    FigureRef,
    ListBlock,
    CatalogBlock,
    ReferenceBlock,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarkdownBlock {
    pub kind: BlockKind,
    /// Raw content; wrappers are added by [`MarkdownBlock::to_markdown`].
    pub body: String,
    pub label: SemanticLabel,
    pub attrs: BTreeSet<AttributeTag>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AssembleError {
    #[error("element {order} labeled {label} carries incompatible content")]
    IncompatibleContent { order: usize, label: SemanticLabel },
}

fn fence_for(body: &str) -> String {
    let mut longest = 0;
    let mut run = 0;
    for c in body.chars() {
        if c == '`' {
            run += 1;
            longest = longest.max(run);
        } else {
            run = 0;
        }
    }
    "`".repeat(longest.max(2) + 1)
}

impl MarkdownBlock {
    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        if !self.attrs.is_empty() {
            let tags: Vec<&str> = self.attrs.iter().map(|a| a.as_str()).collect();
            out.push_str("<!-- attrs: ");
            out.push_str(&tags.join(","));
            out.push_str(" -->\n");
        }
        match self.kind {
            BlockKind::Heading(level) => {
                out.push_str(&"#".repeat(usize::from(level)));
                out.push(' ');
                out.push_str(&self.body.split_whitespace().collect::<Vec<_>>().join(" "));
            }
            BlockKind::FormulaDisplay => {
                out.push_str("$$\n");
                out.push_str(self.body.trim_matches('\n'));
                out.push_str("\n$$");
            }
            BlockKind::CodeFence => {
                let fence = fence_for(&self.body);
                out.push_str(&fence);
                out.push('\n');
                out.push_str(&self.body);
                if !self.body.ends_with('\n') {
                    out.push('\n');
                }
                out.push_str(&fence);
            }
            BlockKind::FigureRef => {
                out.push_str("![fig](");
                out.push_str(&self.body);
                out.push(')');
            }
            _ => out.push_str(&self.body),
        }
        out
    }
}

/// Maps one parsed element to its Markdown block.
pub fn render_element(pe: &ParsedElement) -> Result<MarkdownBlock, AssembleError> {
    let label = pe.element.label;
    if !pe.content.is_compatible_with(label) {
        return Err(AssembleError::IncompatibleContent {
            order: pe.element.order,
            label,
        });
    }
    let kind = match (label, &pe.content) {
        (_, Content::TableHtml(_)) => BlockKind::TableHtml,
        (_, Content::FormulaLatex(_)) => BlockKind::FormulaDisplay,
        (_, Content::CodeBlock(_)) => BlockKind::CodeFence,
        (_, Content::FigurePlaceholder(_)) => BlockKind::FigureRef,
        (l, _) if l.section_depth().is_some() => {
            BlockKind::Heading((l.section_depth().unwrap() + 1).min(6))
        }
        (SemanticLabel::Cap, _) => BlockKind::Caption,
        (SemanticLabel::Fnote, _) => BlockKind::Footnote,
        (SemanticLabel::List, _) => BlockKind::ListBlock,
        (SemanticLabel::Catalogue, _) => BlockKind::CatalogBlock,
        (SemanticLabel::Reference, _) => BlockKind::ReferenceBlock,
        (SemanticLabel::Header | SemanticLabel::Foot | SemanticLabel::Watermark, _) => {
            BlockKind::Marginalia
        }
        _ => BlockKind::Paragraph,
    };
    Ok(MarkdownBlock {
        kind,
        body: pe.content.as_str().to_string(),
        label,
        attrs: pe.element.attrs.clone(),
    })
}

fn joins_with_hyphen(first: &str) -> bool {
    let mut rev = first.chars().rev();
    rev.next() == Some('-') && rev.next().is_some_and(char::is_alphabetic)
}

/// Joins each `half_para` fragment with the `half_para` or `para` block that
/// directly follows it.
pub fn merge_spanning_paragraphs(blocks: Vec<MarkdownBlock>, dehyphenate: bool) -> Vec<MarkdownBlock> {
    let mut out: Vec<MarkdownBlock> = Vec::with_capacity(blocks.len());
    for block in blocks {
        let continues = matches!(block.label, SemanticLabel::HalfPara | SemanticLabel::Para);
        match out.last_mut() {
            Some(prev) if prev.label == SemanticLabel::HalfPara && continues => {
                let head = prev.body.trim_end();
                let tail = block.body.trim_start();
                let body = if dehyphenate && joins_with_hyphen(head) {
                    format!("{}{}", &head[..head.len() - 1], tail)
                } else {
                    format!("{head} {tail}")
                };
                prev.body = body;
                prev.label = block.label;
                prev.attrs.extend(block.attrs);
            }
            _ => out.push(block),
        }
    }
    out
}

/// Renders a whole page. Photographed pages pass their holistic text
/// through untouched.
pub fn assemble(doc: &DocumentOutput, options: &AssembleOptions) -> Result<String, AssembleError> {
    if doc.doc_type == DocumentType::Photographed {
        return Ok(doc.holistic_text.clone().unwrap_or_default());
    }
    let mut elements: Vec<&ParsedElement> = doc.parsed.iter().collect();
    elements.sort_by_key(|p| p.element.order);

    let mut blocks = Vec::new();
    for pe in elements {
        if pe.failed() || (!options.include_marginalia && pe.element.is_marginal()) {
            continue;
        }
        let block = render_element(pe)?;
        if block.body.trim().is_empty() {
            continue;
        }
        blocks.push(block);
    }
    let blocks = merge_spanning_paragraphs(blocks, options.dehyphenate);
    Ok(blocks
        .iter()
        .map(MarkdownBlock::to_markdown)
        .collect::<Vec<_>>()
        .join("\n\n"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layout::{BBox, LayoutElement};
    use crate::pipeline::{ContentSource, StageTiming};

    fn pe(label: SemanticLabel, order: usize, text: &str) -> ParsedElement {
        let y = order as u32 * 10;
        ParsedElement {
            element: LayoutElement::new(label, BBox::new(0, y, 10, y + 10).unwrap(), order),
            content: Content::for_label(label, text.to_string()),
            source: ContentSource::ModelCall,
            error: None,
        }
    }

    fn block(label: SemanticLabel, text: &str) -> MarkdownBlock {
        render_element(&pe(label, 0, text)).unwrap()
    }

    fn digital(parsed: Vec<ParsedElement>) -> DocumentOutput {
        DocumentOutput {
            id: "p".into(),
            doc_type: DocumentType::Digital,
            page_w: 100,
            page_h: 1000,
            parsed,
            holistic_text: None,
            timing: StageTiming::default(),
        }
    }

    #[test]
    fn heading_levels() {
        let b = block(SemanticLabel::Sec0, "Dolphin-v2");
        assert_eq!(b.kind, BlockKind::Heading(1));
        assert_eq!(b.to_markdown(), "# Dolphin-v2");
        assert_eq!(block(SemanticLabel::Sec3, "x").kind, BlockKind::Heading(4));
        assert_eq!(block(SemanticLabel::Sec5, "x").kind, BlockKind::Heading(6));
    }

    #[test]
    fn formula_and_code_wrappers() {
        assert_eq!(block(SemanticLabel::Equ, "E = mc^2").to_markdown(), "$$\nE = mc^2\n$$");
        let md = block(SemanticLabel::Code, "def f():\n    return 1").to_markdown();
        assert_eq!(md, "```\ndef f():\n    return 1\n```");
        let second = md.lines().nth(2).unwrap();
        assert!(second.starts_with("    ") && !second.starts_with("     "));

        let tricky = block(SemanticLabel::Code, "s = \"```\"").to_markdown();
        assert!(tricky.starts_with("````\n"));
    }

    #[test]
    fn table_is_verbatim_and_figure_links_crop() {
        let html = "<table><tr><td rowspan=\"2\">A</td></tr></table>";
        assert_eq!(block(SemanticLabel::Tab, html).to_markdown(), html);
        assert_eq!(
            block(SemanticLabel::Fig, "crops/p_3.png").to_markdown(),
            "![fig](crops/p_3.png)"
        );
    }

    #[test]
    fn incompatible_content_rejected() {
        let mut bad = pe(SemanticLabel::Tab, 0, "x");
        bad.content = Content::Text("x".into());
        assert_eq!(
            render_element(&bad),
            Err(AssembleError::IncompatibleContent {
                order: 0,
                label: SemanticLabel::Tab
            })
        );
    }

    #[test]
    fn spanning_merges() {
        let merged = merge_spanning_paragraphs(
            vec![block(SemanticLabel::HalfPara, "the quick"), block(SemanticLabel::Para, "brown fox")],
            true,
        );
        assert_eq!(merged.len(), 1);
        assert_eq!(merged[0].body, "the quick brown fox");

        let merged = merge_spanning_paragraphs(
            vec![block(SemanticLabel::HalfPara, "experi-"), block(SemanticLabel::Para, "ment")],
            true,
        );
        assert_eq!(merged[0].body, "experiment");

        let kept = merge_spanning_paragraphs(
            vec![block(SemanticLabel::HalfPara, "experi-"), block(SemanticLabel::Para, "ment")],
            false,
        );
        assert_eq!(kept[0].body, "experi- ment");

        let dash = merge_spanning_paragraphs(
            vec![block(SemanticLabel::HalfPara, "range 3-"), block(SemanticLabel::Para, "5")],
            true,
        );
        assert_eq!(dash[0].body, "range 3- 5");

        let lone = merge_spanning_paragraphs(
            vec![block(SemanticLabel::Para, "a"), block(SemanticLabel::HalfPara, "tail")],
            true,
        );
        assert_eq!(lone.len(), 2);
        assert_eq!(lone[1].body, "tail");

        let chain = merge_spanning_paragraphs(
            vec![
                block(SemanticLabel::HalfPara, "a"),
                block(SemanticLabel::HalfPara, "b"),
                block(SemanticLabel::Para, "c"),
                block(SemanticLabel::Para, "d"),
            ],
            true,
        );
        let bodies: Vec<_> = chain.iter().map(|b| b.body.as_str()).collect();
        assert_eq!(bodies, ["a b c", "d"]);

        let blocked = merge_spanning_paragraphs(
            vec![block(SemanticLabel::HalfPara, "a"), block(SemanticLabel::Tab, "<table></table>")],
            true,
        );
        assert_eq!(blocked.len(), 2);
    }

    #[test]
    fn assembles_in_reading_order() {
        let doc = digital(vec![pe(SemanticLabel::Sec1, 0, "Intro"), pe(SemanticLabel::Para, 1, "Hello")]);
        assert_eq!(assemble(&doc, &AssembleOptions::default()).unwrap(), "## Intro\n\nHello");
    }

    #[test]
    fn photographed_passthrough() {
        let doc = DocumentOutput {
            doc_type: DocumentType::Photographed,
            parsed: Vec::new(),
            holistic_text: Some("abc".into()),
            ..digital(Vec::new())
        };
        assert_eq!(assemble(&doc, &AssembleOptions::default()).unwrap(), "abc");
    }

    #[test]
    fn marginalia_filtering() {
        let mut footer = pe(SemanticLabel::Para, 2, "7");
        footer.element.attrs.insert(AttributeTag::PageNum);
        let doc = digital(vec![
            pe(SemanticLabel::Header, 0, "RUNNING HEAD"),
            pe(SemanticLabel::Para, 1, "body"),
            footer,
        ]);
        let md = assemble(&doc, &AssembleOptions::default()).unwrap();
        assert_eq!(md, "body");
        let with = assemble(
            &doc,
            &AssembleOptions {
                include_marginalia: true,
                ..AssembleOptions::default()
            },
        )
        .unwrap();
        assert_eq!(with, "RUNNING HEAD\n\nbody\n\n<!-- attrs: page_num -->\n7");
    }

    #[test]
    fn attributes_become_comments() {
        let mut author = pe(SemanticLabel::Para, 0, "A. Person");
        author.element.attrs.insert(AttributeTag::Author);
        author.element.attrs.insert(AttributeTag::AuthorMail);
        let md = assemble(&digital(vec![author]), &AssembleOptions::default()).unwrap();
        assert_eq!(md, "<!-- attrs: author,author_mail -->\nA. Person");
    }

    #[test]
    fn failed_elements_are_skipped() {
        let mut failed = pe(SemanticLabel::Para, 1, "");
        failed.error = Some("boom".into());
        let doc = digital(vec![pe(SemanticLabel::Para, 0, "a"), failed, pe(SemanticLabel::Para, 2, "c")]);
        assert_eq!(assemble(&doc, &AssembleOptions::default()).unwrap(), "a\n\nc");
    }
}
