use anchordoc::layout::{
    parse_layout_sequence, parse_layout_sequence_with_warnings, serialize_layout_sequence, validate_layout,
    AttributeTag, BBox, DocumentType, LayoutElement, LayoutError, SemanticLabel, StageOneResult,
};
use proptest::prelude::*;

fn label() -> impl Strategy<Value = SemanticLabel> {
    prop::sample::select(SemanticLabel::ALL.to_vec())
}

fn attrs() -> impl Strategy<Value = Vec<AttributeTag>> {
    prop::collection::vec(prop::sample::select(AttributeTag::ALL.to_vec()), 0..3)
}

fn digital_page() -> impl Strategy<Value = StageOneResult> {
    (1u32..3000, 1u32..3000).prop_flat_map(|(w, h)| {
        let element = (label(), 0..w, 0..h, 1..=w, 1..=h, attrs()).prop_map(move |(l, x, y, dx, dy, a)| {
            let x2 = (x + dx).min(w).max(x + 1).min(w);
            let y2 = (y + dy).min(h).max(y + 1).min(h);
            (l, x, y, x2, y2, a)
        });
        prop::collection::vec(element, 1..25).prop_map(move |raw| {
            let elements = raw
                .into_iter()
                .filter(|(_, x1, y1, x2, y2, _)| x1 < x2 && y1 < y2)
                .enumerate()
                .map(|(i, (l, x1, y1, x2, y2, a))| {
                    LayoutElement::new(l, BBox::new(x1, y1, x2, y2).unwrap(), i).with_attrs(a)
                })
                .collect();
            StageOneResult::digital(w, h, elements)
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn valid_layouts_round_trip(page in digital_page()) {
        prop_assert!(validate_layout(&page).is_empty());
        let text = serialize_layout_sequence(&page).unwrap();
        let back = parse_layout_sequence(&text, page.page_w, page.page_h).unwrap();
        prop_assert_eq!(back, page);
    }

    #[test]
    fn parsing_arbitrary_text_never_panics(text in "\\PC{0,200}") {
        let _ = parse_layout_sequence(&text, 896, 1280);
    }

    #[test]
    fn parsing_line_shaped_noise_never_panics(
        lines in prop::collection::vec("\\[[a-z_0-9]{0,12}\\](\\{[a-z_,]{0,20}\\})? ?[0-9,x -]{0,24}", 0..8)
    ) {
        let text = format!("digital document\n{}", lines.join("\n"));
        if let Ok(page) = parse_layout_sequence(&text, 896, 1280) {
            prop_assert!(validate_layout(&page).is_empty());
        }
    }

    #[test]
    fn clamping_keeps_boxes_inside_the_page(
        x1 in 0u32..2000, y1 in 0u32..2000, dx in 1u32..2000, dy in 1u32..2000
    ) {
        let text = format!("digital document\n[para] {},{},{},{}", x1, y1, x1 + dx, y1 + dy);
        match parse_layout_sequence_with_warnings(&text, 896, 1280) {
            Ok((page, warnings)) => {
                let b = page.elements[0].bbox;
                prop_assert!(b.fits_within(896, 1280));
                prop_assert_eq!(warnings.is_empty(), x1 + dx <= 896 && y1 + dy <= 1280);
            }
            Err(e) => {
                prop_assert!(x1 >= 896 || y1 >= 1280, "{e}");
                let is_malformed_bbox = matches!(e, LayoutError::MalformedBBox { .. });
                prop_assert!(is_malformed_bbox);
            }
        }
    }
}

#[test]
fn photographed_round_trip() {
    let page = StageOneResult::photographed(896, 1280);
    let text = serialize_layout_sequence(&page).unwrap();
    assert_eq!(text, "photographed document");
    assert_eq!(parse_layout_sequence(&text, 896, 1280).unwrap(), page);
    assert_eq!(page.doc_type, DocumentType::Photographed);
}
