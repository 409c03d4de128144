use std::collections::BTreeMap;

use rand::seq::IndexedRandom;
use rand::Rng;

use super::{finish, rng_for, title_case, DatagenError, GeneratedPage, PageSpec, Provenance, Style, SvgWriter, PAGE_H, PAGE_W};
use crate::layout::{BBox, DocumentType, LayoutElement, SemanticLabel};
use crate::pipeline::Content;

const CANONICAL_LEADER: &str = "......";
const RAW_LEADERS: [&str; 5] = [
    ". . . . . . . .",
    "..............",
    "\u{2026}\u{2026}\u{2026}",
    "\u{b7}\u{b7}\u{b7}\u{b7}\u{b7}\u{b7}\u{b7}\u{b7}",
    "\u{22ef}\u{22ef}\u{22ef}\u{22ef}",
];
const INDENT_PX: u32 = 24;
const MARGIN: u32 = 60;
const GUTTER: u32 = 20;
const TITLE_BOTTOM: u32 = 100;
const ENTRY_TOP: u32 = 120;
const ENTRY_BOTTOM: u32 = PAGE_H - 60;

fn is_leader_char(c: char) -> bool {
    matches!(c, '.' | '\u{b7}' | '\u{2026}' | '\u{22ef}' | '\u{2024}')
}

/// Collapses every dotted leader (runs of periods, middle dots or ellipsis
/// glyphs, optionally space separated) into a single `" ...... "`.
///
/// A lone period, as in "Fig. 3" or "2.1", is left alone.
pub fn normalize_leaders(line: &str) -> String {
    let chars: Vec<char> = line.chars().collect();
    let mut out = String::with_capacity(line.len());
    let mut i = 0;
    while i < chars.len() {
        if !is_leader_char(chars[i]) {
            out.push(chars[i]);
            i += 1;
            continue;
        }
        let start = i;
        let mut glyphs = 0;
        let mut end = i;
        let mut j = i;
        while j < chars.len() {
            if is_leader_char(chars[j]) {
                glyphs += if chars[j] == '.' { 1 } else { 3 };
                j += 1;
                end = j;
            } else if chars[j] == ' ' && j + 1 < chars.len() && is_leader_char(chars[j + 1]) {
                j += 1;
            } else {
                break;
            }
        }
        if glyphs < 3 {
            out.extend(&chars[start..end]);
        } else {
            while out.ends_with(' ') {
                out.pop();
            }
            if !out.is_empty() {
                out.push(' ');
            }
            out.push_str(CANONICAL_LEADER);
            while end < chars.len() && chars[end] == ' ' {
                end += 1;
            }
            if end < chars.len() {
                out.push(' ');
            }
        }
        i = end;
    }
    out
}

struct Entry {
    level: u32,
    number: String,
    title: String,
    page: u32,
    leader: &'static str,
}

impl Entry {
    fn raw_left(&self) -> String {
        format!("{} {}", self.number, self.title)
    }

    fn ground_truth(&self) -> String {
        normalize_leaders(&format!("{} {} {}", self.raw_left(), self.leader, self.page))
    }
}

/// A table-of-contents page with `entries` lines in one or two columns.
pub fn gen_catalog(entries: usize, columns: u32, seed: u64) -> Result<GeneratedPage, DatagenError> {
    if !(10..=60).contains(&entries) {
        return Err(DatagenError::Range {
            name: "entries",
            value: entries as i64,
            range: "[10, 60]",
        });
    }
    if !(1..=2).contains(&columns) {
        return Err(DatagenError::Range {
            name: "columns",
            value: i64::from(columns),
            range: "{1, 2}",
        });
    }
    let mut rng = rng_for(seed, 0xca7a);
    let style = Style::from_id(rng.random_range(0..25));

    let mut counters = [0u32; 4];
    let mut page = rng.random_range(1..20);
    let mut level = 0u32;
    let mut items = Vec::with_capacity(entries);
    for i in 0..entries {
        if i > 0 {
            level = rng.random_range(0..=(level + 1).min(3));
        }
        counters[level as usize] += 1;
        for c in counters.iter_mut().skip(level as usize + 1) {
            *c = 0;
        }
        let number = counters[..=level as usize]
            .iter()
            .map(|c| c.to_string())
            .collect::<Vec<_>>()
            .join(".");
        page += rng.random_range(0..6);
        let words = rng.random_range(2..5);
        items.push(Entry {
            level,
            number,
            title: title_case(&mut rng, words),
            page,
            leader: RAW_LEADERS.choose(&mut rng).expect("non-empty"),
        });
    }

    let bands: Vec<(u32, u32)> = if columns == 1 {
        vec![(MARGIN, PAGE_W - MARGIN)]
    } else {
        let mid = PAGE_W / 2;
        vec![(MARGIN, mid - GUTTER / 2), (mid + GUTTER / 2, PAGE_W - MARGIN)]
    };
    let rows = entries.div_ceil(columns as usize) as u32;
    let pitch = ((ENTRY_BOTTOM - ENTRY_TOP) / rows).min(28);
    let font = (pitch - 4).min(16);

    let id = format!("catalog-{columns}c{entries}-{seed}");
    let mut elements = Vec::with_capacity(entries + 1);
    let mut contents = BTreeMap::new();
    let title = "Contents".to_string();
    elements.push(LayoutElement::new(
        SemanticLabel::Sec1,
        BBox::new(MARGIN, MARGIN, PAGE_W - MARGIN, TITLE_BOTTOM).expect("static box"),
        0,
    ));
    contents.insert(0, Content::for_label(SemanticLabel::Sec1, title.clone()));

    let mut svg = SvgWriter::new(PAGE_W, PAGE_H, &style);
    svg.open_element(&elements[0]);
    svg.text(f64::from(MARGIN), f64::from(TITLE_BOTTOM - 8), 32, false, Some(style.accent), &title);
    svg.close_element();

    for (i, entry) in items.iter().enumerate() {
        let col = i / rows as usize;
        let row = (i % rows as usize) as u32;
        let (left, right) = bands[col];
        let y1 = ENTRY_TOP + row * pitch;
        let bbox = BBox::new(left + INDENT_PX * entry.level, y1, right, y1 + pitch - 4).expect("positive extent");
        let order = i + 1;
        let element = LayoutElement::new(SemanticLabel::Catalogue, bbox, order);
        contents.insert(order, Content::for_label(SemanticLabel::Catalogue, entry.ground_truth()));

        svg.open_element(&element);
        let baseline = f64::from(bbox.y2) - 3.0;
        svg.text(f64::from(bbox.x1), baseline, font, false, None, &entry.raw_left());
        svg.text(f64::from(right) - 40.0, baseline, font, true, None, entry.leader);
        svg.text(f64::from(right), baseline, font, true, None, &entry.page.to_string());
        svg.close_element();
        elements.push(element);
    }

    let levels: Vec<u32> = items.iter().map(|e| e.level).collect();
    let mut provenance = Provenance::new("catalog", seed)
        .param("entries", entries)
        .param("columns", columns)
        .param("levels", levels);
    provenance.style_id = Some(style.id);
    let spec = PageSpec {
        id,
        page_w: PAGE_W,
        page_h: PAGE_H,
        doc_type: DocumentType::Digital,
        elements,
        contents,
        holistic_text: None,
        provenance,
    };
    Ok(finish(spec, svg.finish()))
}

/// A catalog page with entry count and column layout drawn from `seed`.
pub fn random_catalog(seed: u64) -> GeneratedPage {
    let mut rng = rng_for(seed, 0x5eed);
    let entries = rng.random_range(10..=60);
    let columns = rng.random_range(1..=2);
    gen_catalog(entries, columns, seed).expect("parameters drawn in range")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn leader_variants_normalize_to_one_run() {
        for raw in RAW_LEADERS {
            assert_eq!(normalize_leaders(&format!("1.2 Intro {raw} 17")), "1.2 Intro ...... 17");
        }
        assert_eq!(normalize_leaders("Intro......17"), "Intro ...... 17");
        assert_eq!(normalize_leaders("Fig. 3 and 2.1"), "Fig. 3 and 2.1");
        assert_eq!(normalize_leaders("a .. b"), "a .. b");
    }

    #[test]
    fn range_errors() {
        assert!(matches!(gen_catalog(9, 1, 0), Err(DatagenError::Range { name: "entries", .. })));
        assert!(matches!(gen_catalog(61, 1, 0), Err(DatagenError::Range { .. })));
        assert!(matches!(gen_catalog(10, 3, 0), Err(DatagenError::Range { name: "columns", .. })));
        assert!(gen_catalog(10, 1, 0).is_ok());
        assert!(gen_catalog(60, 2, 0).is_ok());
    }

    #[test]
    fn deterministic_under_seed() {
        let a = gen_catalog(10, 1, 7).unwrap();
        let b = gen_catalog(10, 1, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.svg, b.svg);
        assert_ne!(a.spec, gen_catalog(10, 1, 8).unwrap().spec);
    }

    #[test]
    fn two_columns_form_disjoint_bands() {
        let page = gen_catalog(60, 2, 3).unwrap();
        let entries: Vec<_> = page
            .spec
            .elements
            .iter()
            .filter(|e| e.label == SemanticLabel::Catalogue)
            .collect();
        assert_eq!(entries.len(), 60);
        let mid = PAGE_W / 2;
        let left = entries.iter().filter(|e| e.bbox.x2 <= mid).count();
        let right = entries.iter().filter(|e| e.bbox.x1 >= mid).count();
        assert_eq!((left, right), (30, 30));
        for (i, a) in page.spec.elements.iter().enumerate() {
            for b in &page.spec.elements[i + 1..] {
                assert!(!a.bbox.overlaps(&b.bbox), "{} overlaps {}", a.bbox, b.bbox);
            }
        }
    }

    #[test]
    fn indentation_levels_bounded_and_reflected_in_geometry() {
        let page = gen_catalog(40, 1, 11).unwrap();
        let levels = page.spec.provenance.params["levels"].as_array().unwrap();
        for (lvl, e) in levels.iter().zip(&page.spec.elements[1..]) {
            let lvl = lvl.as_u64().unwrap() as u32;
            assert!(lvl <= 3);
            assert_eq!(e.bbox.x1, MARGIN + INDENT_PX * lvl);
        }
        for c in page.spec.contents.values().skip(1) {
            assert_eq!(c.as_str().matches("......").count(), 1, "{}", c.as_str());
        }
    }
}
