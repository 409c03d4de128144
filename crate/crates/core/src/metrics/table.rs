//! HTML table trees and the TEDS / TEDS-S similarity scores.

use std::fmt;

use super::tree::{tree_edit_distance, Tree};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableTag {
    Table,
    Thead,
    Tbody,
    Tr,
    Td,
    Th,
}

impl TableTag {
    fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "table" => TableTag::Table,
            "thead" => TableTag::Thead,
            "tbody" => TableTag::Tbody,
            "tr" => TableTag::Tr,
            "td" => TableTag::Td,
            "th" => TableTag::Th,
            _ => return None,
        })
    }

    fn is_cell(self) -> bool {
        matches!(self, TableTag::Td | TableTag::Th)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableNode {
    pub tag: TableTag,
    pub colspan: u32,
    pub rowspan: u32,
    /// Whitespace-normalized cell text; empty for non-cell nodes.
    pub text: String,
}

impl TableNode {
    fn new(tag: TableTag) -> Self {
        TableNode {
            tag,
            colspan: 1,
            rowspan: 1,
            text: String::new(),
        }
    }
}

pub type TableTree = Tree<TableNode>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableParseError(pub String);

impl fmt::Display for TableParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "table parse error: {}", self.0)
    }
}

impl std::error::Error for TableParseError {}

struct Tag<'a> {
    name: String,
    closing: bool,
    attrs: &'a str,
}

fn read_tag(src: &str) -> Option<(Tag<'_>, usize)> {
    let end = src.find('>')?;
    let inner = &src[1..end];
    let (closing, inner) = match inner.strip_prefix('/') {
        Some(rest) => (true, rest),
        None => (false, inner),
    };
    let inner = inner.trim_end_matches('/');
    let name_end = inner
        .find(|c: char| c.is_whitespace())
        .unwrap_or(inner.len());
    Some((
        Tag {
            name: inner[..name_end].to_ascii_lowercase(),
            closing,
            attrs: &inner[name_end..],
        },
        end + 1,
    ))
}

fn span_attr(attrs: &str, key: &str) -> u32 {
    let lower = attrs.to_ascii_lowercase();
    let Some(pos) = lower.find(key) else { return 1 };
    let rest = lower[pos + key.len()..].trim_start();
    let Some(rest) = rest.strip_prefix('=') else { return 1 };
    let rest = rest.trim_start().trim_start_matches(['"', '\'']);
    let digits: String = rest.chars().take_while(char::is_ascii_digit).collect();
    digits.parse().ok().filter(|&v| v >= 1).unwrap_or(1)
}

fn decode_entities(text: &str) -> String {
    text.replace("&nbsp;", " ")
        .replace("&lt;", "<")
        .replace("&gt;", ">")
        .replace("&quot;", "\"")
        .replace("&#39;", "'")
        .replace("&amp;", "&")
}

fn normalize_text(raw: &str) -> String {
    decode_entities(raw)
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
}

/// Builds the tree of the first `<table>` in `html`.
///
/// Only table, thead, tbody, tr, td and th become nodes. Markup inside a
/// cell contributes its text. Missing end tags are implied the way HTML
/// implies them (a new `<tr>` closes the open cell and row).
pub fn parse_table_html(html: &str) -> Result<TableTree, TableParseError> {
    let start = html
        .to_ascii_lowercase()
        .find("<table")
        .ok_or_else(|| TableParseError("no <table> element".into()))?;

    // stack of open nodes; children are attached on close
    let mut stack: Vec<TableTree> = Vec::new();
    let mut cell_text = String::new();
    let mut rest = &html[start..];

    fn close_top(stack: &mut Vec<TableTree>, cell_text: &mut String) -> Option<TableTree> {
        let mut node = stack.pop()?;
        if node.label.tag.is_cell() {
            node.label.text = normalize_text(cell_text);
            cell_text.clear();
        }
        match stack.last_mut() {
            Some(parent) => {
                parent.children.push(node);
                None
            }
            None => Some(node),
        }
    }

    while !rest.is_empty() {
        let Some(lt) = rest.find('<') else {
            if stack.last().is_some_and(|n| n.label.tag.is_cell()) {
                cell_text.push_str(rest);
            }
            break;
        };
        if stack.last().is_some_and(|n| n.label.tag.is_cell()) {
            cell_text.push_str(&rest[..lt]);
        }
        rest = &rest[lt..];
        let Some((tag, consumed)) = read_tag(rest) else {
            return Err(TableParseError("unterminated tag".into()));
        };
        rest = &rest[consumed..];

        let Some(kind) = TableTag::parse(&tag.name) else {
            if tag.name == "br" && stack.last().is_some_and(|n| n.label.tag.is_cell()) {
                cell_text.push(' ');
            }
            continue;
        };

        if tag.closing {
            if !stack.iter().any(|n| n.label.tag == kind) {
                continue;
            }
            while let Some(top) = stack.last() {
                let done = top.label.tag == kind;
                if let Some(root) = close_top(&mut stack, &mut cell_text) {
                    return Ok(root);
                }
                if done {
                    break;
                }
            }
            continue;
        }

        if stack.is_empty() && kind != TableTag::Table {
            continue;
        }
        // implied end tags
        let implied: &[TableTag] = match kind {
            TableTag::Td | TableTag::Th => &[TableTag::Td, TableTag::Th],
            TableTag::Tr => &[TableTag::Td, TableTag::Th, TableTag::Tr],
            TableTag::Thead | TableTag::Tbody => {
                &[TableTag::Td, TableTag::Th, TableTag::Tr, TableTag::Thead, TableTag::Tbody]
            }
            TableTag::Table => &[],
        };
        while stack.last().is_some_and(|n| implied.contains(&n.label.tag)) {
            close_top(&mut stack, &mut cell_text);
        }
        if kind == TableTag::Table && !stack.is_empty() {
            // nested tables are flattened into the enclosing cell's text
            continue;
        }
        let mut node = TableNode::new(kind);
        if kind.is_cell() {
            node.colspan = span_attr(tag.attrs, "colspan");
            node.rowspan = span_attr(tag.attrs, "rowspan");
        }
        stack.push(Tree::leaf(node));
    }

    let mut root = None;
    while !stack.is_empty() {
        root = close_top(&mut stack, &mut cell_text).or(root);
    }
    root.ok_or_else(|| TableParseError("empty table".into()))
}

fn relabel_cost(a: &TableNode, b: &TableNode, with_text: bool) -> f64 {
    if a.tag != b.tag || a.colspan != b.colspan || a.rowspan != b.rowspan {
        return 1.0;
    }
    if with_text && a.tag.is_cell() && a.text != b.text {
        return 1.0;
    }
    0.0
}

fn similarity(pred: &str, gt: &str, with_text: bool) -> f64 {
    match (parse_table_html(pred), parse_table_html(gt)) {
        (Ok(p), Ok(g)) => {
            let ted = tree_edit_distance(&p, &g, |a, b| relabel_cost(a, b, with_text));
            let denom = p.size().max(g.size()) as f64;
            1.0 - ted / denom
        }
        (Err(_), Err(_)) if pred.trim().is_empty() && gt.trim().is_empty() => 1.0,
        _ => 0.0,
    }
}

/// Tree-edit-distance similarity: `1 - TED / max(|T1|, |T2|)`, cell text
/// compared for equality.
pub fn teds(pred_html: &str, gt_html: &str) -> f64 {
    similarity(pred_html, gt_html, true)
}

/// Structure-only TEDS: tags and spans count, cell text does not.
pub fn teds_s(pred_html: &str, gt_html: &str) -> f64 {
    similarity(pred_html, gt_html, false)
}
