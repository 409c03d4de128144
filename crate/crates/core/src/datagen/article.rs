use std::collections::BTreeMap;

use rand::seq::IndexedRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{finish, rng_for, sentence, title_case, GeneratedPage, PageSpec, Provenance, Style, SvgWriter, PAGE_H, PAGE_W};
use crate::layout::{AttributeTag, BBox, DocumentType, LayoutElement, SemanticLabel};
use crate::pipeline::Content;

const FORMULAS: [&str; 6] = [
    r"\frac{{a}}{{b}} + {c}^{2}",
    r"\sum_{i=1}^{{n}} {a}_{i} {b}_{i}",
    r"E = \sqrt{{a}^{2} + {b}^{2}}",
    r"\int_{0}^{{n}} {a}(t) \, dt",
    r"{a} \leq \max \left( {b}, {c} \right)",
    r"\mathbf{{a}} = \alpha {b} + \beta {c}",
];
const SYMBOLS: [&str; 8] = ["x", "y", "z", "w", "u", "v", "p", "q"];
const AUTHORS: [&str; 8] = [
    "A. Moreau", "K. Tanaka", "L. Okafor", "M. Lindqvist", "R. Castillo", "S. Nair", "T. Becker", "Y. Chen",
];

fn formula(rng: &mut ChaCha8Rng) -> String {
    let template = *FORMULAS.choose(rng).expect("non-empty");
    let mut picks = SYMBOLS.choose_multiple(rng, 3);
    let (a, b, c) = (
        *picks.next().expect("three"),
        *picks.next().expect("three"),
        *picks.next().expect("three"),
    );
    template
        .replace("{a}", a)
        .replace("{b}", b)
        .replace("{c}", c)
        .replace("{n}", &rng.random_range(2..20).to_string())
}

fn table(rng: &mut ChaCha8Rng) -> String {
    let cols = rng.random_range(2..=4);
    let rows = rng.random_range(2..=4);
    let mut html = String::from("<table>");
    html.push_str("<tr>");
    for _ in 0..cols {
        html.push_str(&format!("<th>{}</th>", title_case(rng, 1)));
    }
    html.push_str("</tr>");
    let spanned_row = rng.random_range(0..rows);
    for r in 0..rows {
        html.push_str("<tr>");
        if r == spanned_row {
            html.push_str(&format!("<td colspan=\"{cols}\">{}</td>", sentence(rng, 2)));
        } else {
            for _ in 0..cols {
                html.push_str(&format!("<td>{:.2}</td>", rng.random_range(0.0..100.0)));
            }
        }
        html.push_str("</tr>");
    }
    html.push_str("</table>");
    html
}

/// A single-column article page mixing headings, paragraphs, a formula, a
/// table, a figure and marginalia. Used as the usual base page for warps
/// and to exercise the table and formula paths end to end.
pub fn gen_article(seed: u64) -> GeneratedPage {
    let mut rng = rng_for(seed, 0xa871);
    let style = Style::from_id(rng.random_range(0..5) * 5);
    let volume = rng.random_range(1..60);
    let page_no = rng.random_range(1..300);

    let mut authors: Vec<&str> = AUTHORS.choose_multiple(&mut rng, 2).copied().collect();
    authors.sort_unstable();
    let title_words = rng.random_range(3..7);
    let mut blocks: Vec<(SemanticLabel, [u32; 2], Option<String>)> = vec![
        (SemanticLabel::Header, [20, 44], Some(format!("Journal of Synthetic Documents, Vol. {volume}"))),
        (SemanticLabel::Sec0, [70, 112], Some(title_case(&mut rng, title_words))),
        (SemanticLabel::Para, [120, 144], Some(authors.join(", "))),
        (SemanticLabel::Sec1, [164, 194], Some("1 Introduction".to_string())),
    ];
    let half: Vec<String> = (0..3).map(|_| format!("{}.", sentence(&mut rng, 9))).collect();
    blocks.push((SemanticLabel::HalfPara, [204, 330], Some(half.join(" "))));
    let para: Vec<String> = (0..3).map(|_| format!("{}.", sentence(&mut rng, 8))).collect();
    blocks.push((SemanticLabel::Para, [340, 440], Some(para.join(" "))));
    blocks.push((SemanticLabel::Equ, [452, 500], Some(formula(&mut rng))));
    blocks.push((SemanticLabel::Tab, [512, 690], Some(table(&mut rng))));
    blocks.push((SemanticLabel::Cap, [700, 724], Some(format!("Table 1: {}", sentence(&mut rng, 5)))));
    blocks.push((SemanticLabel::Fig, [740, 980], None));
    blocks.push((SemanticLabel::Cap, [990, 1014], Some(format!("Figure 1: {}", sentence(&mut rng, 4)))));
    blocks.push((SemanticLabel::Fnote, [1100, 1140], Some(format!("1 {}.", sentence(&mut rng, 7)))));
    blocks.push((SemanticLabel::Watermark, [1150, 1200], None));
    blocks.push((SemanticLabel::Foot, [1220, 1248], Some(page_no.to_string())));

    let mut svg = SvgWriter::new(PAGE_W, PAGE_H, &style);
    let mut elements = Vec::with_capacity(blocks.len());
    let mut contents = BTreeMap::new();
    for (order, (label, [y1, y2], text)) in blocks.into_iter().enumerate() {
        let mut element = LayoutElement::new(label, BBox::new(60, y1, 836, y2).expect("static band"), order);
        match label {
            SemanticLabel::Para if order == 2 => element = element.with_attrs([AttributeTag::Author]),
            SemanticLabel::Foot => element = element.with_attrs([AttributeTag::PageNum]),
            _ => {}
        }
        match (&text, label) {
            (Some(t), _) => svg.plain_element(&element, t, if label == SemanticLabel::Sec0 { 28 } else { 14 }),
            (None, SemanticLabel::Fig) => {
                svg.open_element(&element);
                svg.raw(&format!(
                    r#"<rect x="120" y="{}" width="656" height="{}" fill="{}" opacity="0.3"/>"#,
                    y1 + 10,
                    y2 - y1 - 20,
                    style.accent
                ));
                svg.close_element();
            }
            (None, _) => {
                svg.open_element(&element);
                svg.text(448.0, f64::from(y2 - 12), 36, false, Some("#d0d0d0"), "DRAFT");
                svg.close_element();
            }
        }
        if let Some(t) = text {
            contents.insert(order, Content::for_label(label, t));
        }
        elements.push(element);
    }

    let mut provenance = Provenance::new("article", seed);
    provenance.style_id = Some(style.id);
    let spec = PageSpec {
        id: format!("article-{seed}"),
        page_w: PAGE_W,
        page_h: PAGE_H,
        doc_type: DocumentType::Digital,
        elements,
        contents,
        holistic_text: None,
        provenance,
    };
    finish(spec, svg.finish())
}
