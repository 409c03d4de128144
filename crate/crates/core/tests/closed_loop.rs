use anchordoc::assemble::{assemble, AssembleOptions};
use anchordoc::backend::MockBackend;
use anchordoc::datagen::{
    gen_article, gen_catalog, gen_code_page, random_warped, rasterize, warp_photographed, CodeLanguage, GeneratedPage,
    WarpParams,
};
use anchordoc::layout::{DocumentType, SemanticLabel};
use anchordoc::metrics::{evaluate_page, EvalPage};
use anchordoc::pipeline::{parse_document, DocumentOutput, PageImage, PipelineConfig};
use image::DynamicImage;

fn run(page: &GeneratedPage) -> DocumentOutput {
    let image = PageImage::new(page.spec.id.clone(), DynamicImage::ImageRgb8(rasterize(&page.spec)));
    let backend = MockBackend::new(page.fixture.clone());
    parse_document(&image, &backend, &PipelineConfig::default()).unwrap()
}

#[test]
fn article_pages_score_perfectly_on_every_column() {
    for seed in 0..8 {
        let page = gen_article(seed);
        let doc = run(&page);
        let report = evaluate_page(&EvalPage::from_output(&doc), &page.spec.eval_page());
        assert_eq!(report.text_edit, Some(0.0), "seed {seed}");
        assert_eq!(report.order_edit, Some(0.0));
        assert_eq!(report.formula_score, Some(100.0));
        assert_eq!(report.table_teds, Some(100.0));
        assert_eq!(report.table_teds_s, Some(100.0));
        assert_eq!(report.overall, Some(100.0));
    }
}

#[test]
fn article_markdown_has_expected_blocks_in_order() {
    let page = gen_article(3);
    let md = assemble(&run(&page), &AssembleOptions::default()).unwrap();
    let spec = &page.spec;
    let find = |label: SemanticLabel| spec.elements.iter().find(|e| e.label == label).unwrap().order;
    let title = spec.contents[&find(SemanticLabel::Sec0)].as_str();
    let formula = spec.contents[&find(SemanticLabel::Equ)].as_str();
    let table = spec.contents[&find(SemanticLabel::Tab)].as_str();

    let title_at = md.find(&format!("# {title}\n")).expect("title heading");
    let intro_at = md.find("## 1 Introduction").expect("section heading");
    let formula_at = md.find(&format!("$$\n{formula}\n$$")).expect("display formula");
    let table_at = md.find(table).expect("table html verbatim");
    assert!(title_at < intro_at && intro_at < formula_at && formula_at < table_at);
    assert!(md.contains("<!-- attrs: author -->"));
    assert!(!md.contains("DRAFT"));
}

#[test]
fn spanning_paragraph_is_merged_with_its_continuation() {
    let page = gen_article(5);
    let md = assemble(&run(&page), &AssembleOptions::default()).unwrap();
    let spec = &page.spec;
    let half = spec.elements.iter().find(|e| e.label == SemanticLabel::HalfPara).unwrap();
    let first = spec.contents[&half.order].as_str();
    let second = spec.contents[&(half.order + 1)].as_str();
    assert!(md.contains(&format!("{first} {second}")), "{md}");
}

#[test]
fn code_blocks_survive_byte_for_byte() {
    for lang in CodeLanguage::ALL {
        for seed in 0..10 {
            let page = gen_code_page(lang, seed);
            let md = assemble(&run(&page), &AssembleOptions::default()).unwrap();
            let code = page.spec.contents[&1].as_str();
            assert!(md.contains(&format!("```\n{code}\n```")), "{lang} {seed}\n{md}");
        }
    }
}

#[test]
fn catalog_markdown_lists_every_entry_in_reading_order() {
    let page = gen_catalog(30, 2, 12).unwrap();
    let md = assemble(&run(&page), &AssembleOptions::default()).unwrap();
    let mut at = 0;
    for e in page.spec.elements.iter().skip(1) {
        let text = page.spec.contents[&e.order].as_str();
        let pos = md[at..].find(text).unwrap_or_else(|| panic!("missing {text}")) + at;
        at = pos + text.len();
    }
}

#[test]
fn warped_pages_go_through_the_holistic_path() {
    for seed in 0..6 {
        let page = random_warped(seed);
        let doc = run(&page);
        assert_eq!(doc.doc_type, DocumentType::Photographed);
        assert!(doc.parsed.is_empty());
        assert_eq!(doc.holistic_text, page.spec.holistic_text);
        let md = assemble(&doc, &AssembleOptions::default()).unwrap();
        assert_eq!(Some(md), page.spec.holistic_text);
    }
}

#[test]
fn identity_warp_text_equals_base_reading_order() {
    let base = gen_article(9);
    let warped = warp_photographed(&base.spec, &WarpParams::identity(), 0).unwrap();
    let doc = run(&warped);
    let report = evaluate_page(&EvalPage::from_output(&doc), &EvalPage::from_output(&run(&base)));
    assert_eq!(report.text_edit, Some(0.0));
}
