use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::IndexedRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{finish, rng_for, title_case, GeneratedPage, PageSpec, Provenance, Style, SvgWriter, PAGE_H, PAGE_W};
use crate::layout::{AttributeTag, BBox, DocumentType, LayoutElement, SemanticLabel};
use crate::pipeline::Content;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CodeLanguage {
    Cpp,
    Python,
    Go,
    JavaScript,
}

impl CodeLanguage {
    pub const ALL: [CodeLanguage; 4] = [
        CodeLanguage::Cpp,
        CodeLanguage::Python,
        CodeLanguage::Go,
        CodeLanguage::JavaScript,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CodeLanguage::Cpp => "cpp",
            CodeLanguage::Python => "python",
            CodeLanguage::Go => "go",
            CodeLanguage::JavaScript => "javascript",
        }
    }

    /// One level of indentation as it appears in the source text.
    pub fn indent_unit(self) -> &'static str {
        match self {
            CodeLanguage::Cpp | CodeLanguage::Python => "    ",
            CodeLanguage::Go => "\t",
            CodeLanguage::JavaScript => "  ",
        }
    }

    fn templates(self) -> &'static Templates {
        match self {
            CodeLanguage::Cpp => &CPP,
            CodeLanguage::Python => &PYTHON,
            CodeLanguage::Go => &GO,
            CodeLanguage::JavaScript => &JAVASCRIPT,
        }
    }
}

impl fmt::Display for CodeLanguage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CodeLanguage {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "cpp" | "c++" => Ok(CodeLanguage::Cpp),
            "python" | "py" => Ok(CodeLanguage::Python),
            "go" => Ok(CodeLanguage::Go),
            "javascript" | "js" => Ok(CodeLanguage::JavaScript),
            other => Err(format!("unknown language {other:?}")),
        }
    }
}

struct Templates {
    comment: &'static str,
    function: &'static str,
    blocks: &'static [&'static str],
    close: Option<&'static str>,
    statements: &'static [&'static str],
    ret: &'static str,
}

static PYTHON: Templates = Templates {
    comment: "# {t}",
    function: "def {f}({a}, {b}):",
    blocks: &[
        "for {v} in range({n}):",
        "if {a} > {n}:",
        "while {a} < {n}:",
        "for {v} in {b}:",
    ],
    close: None,
    statements: &[
        "{v} = {a} + {n}",
        "{a} += {n}",
        "print({a}, {b})",
        "{b} = {a} * {n}",
        "{v} = [{a}, {b}]",
        "{b}.append({a})",
    ],
    ret: "return {a}",
};

static CPP: Templates = Templates {
    comment: "// {t}",
    function: "int {f}(int {a}, int {b}) {",
    blocks: &[
        "for (int {v} = 0; {v} < {n}; ++{v}) {",
        "if ({a} > {n}) {",
        "while ({a} < {n}) {",
        "if ({a} == {b}) {",
    ],
    close: Some("}"),
    statements: &[
        "int {v} = {a} + {n};",
        "{a} += {n};",
        "std::cout << {a} << \" \" << {b} << std::endl;",
        "{b} = {a} * {n};",
        "{a} = std::max({a}, {b});",
        "++{b};",
    ],
    ret: "return {a};",
};

static GO: Templates = Templates {
    comment: "// {t}",
    function: "func {f}({a}, {b} int) int {",
    blocks: &[
        "for {v} := 0; {v} < {n}; {v}++ {",
        "if {a} > {n} {",
        "for {a} < {n} {",
        "if {a} == {b} {",
    ],
    close: Some("}"),
    statements: &[
        "{v} := {a} + {n}",
        "{a} += {n}",
        "fmt.Println({a}, {b})",
        "{b} = {a} * {n}",
        "_ = {v}",
        "{b}++",
    ],
    ret: "return {a}",
};

static JAVASCRIPT: Templates = Templates {
    comment: "// {t}",
    function: "function {f}({a}, {b}) {",
    blocks: &[
        "for (let {v} = 0; {v} < {n}; {v}++) {",
        "if ({a} > {n}) {",
        "while ({a} < {n}) {",
        "if ({a} === {b}) {",
    ],
    close: Some("}"),
    statements: &[
        "const {v} = {a} + {n};",
        "{a} += {n};",
        "console.log(`${{a}} ${{b}}`);",
        "{b} = {a} * {n};",
        "{a} = Math.max({a}, {b});",
        "{b}++;",
    ],
    ret: "return {a};",
};

const FUNCTIONS: [&str; 8] = [
    "process", "compute", "mergeItems", "parseLine", "update", "collect", "scan", "reduceAll",
];
const VARIABLES: [&str; 10] = [
    "count", "total", "items", "value", "index", "result", "buffer", "offset", "limit", "node",
];

struct Filler<'a> {
    rng: &'a mut ChaCha8Rng,
    a: &'static str,
    b: &'static str,
}

impl Filler<'_> {
    fn fill(&mut self, template: &str) -> String {
        let v = *VARIABLES.choose(self.rng).expect("non-empty");
        let n = self.rng.random_range(2..100).to_string();
        template
            .replace("${{a}}", &format!("${{{}}}", self.a))
            .replace("${{b}}", &format!("${{{}}}", self.b))
            .replace("{a}", self.a)
            .replace("{b}", self.b)
            .replace("{v}", v)
            .replace("{n}", &n)
    }
}

fn body(
    t: &Templates,
    filler: &mut Filler<'_>,
    level: usize,
    remaining: usize,
    out: &mut Vec<(usize, String)>,
) {
    let before = filler.rng.random_range(1..=2);
    for _ in 0..before {
        let s = *t.statements.choose(filler.rng).expect("non-empty");
        out.push((level, filler.fill(s)));
    }
    if remaining > 0 {
        let header = *t.blocks.choose(filler.rng).expect("non-empty");
        out.push((level, filler.fill(header)));
        body(t, filler, level + 1, remaining - 1, out);
        if let Some(close) = t.close {
            out.push((level, close.to_string()));
        }
        if filler.rng.random_bool(0.5) {
            let s = *t.statements.choose(filler.rng).expect("non-empty");
            out.push((level, filler.fill(s)));
        }
    }
}

/// Source text of one synthesized function, deepest indentation level
/// equal to `nesting`.
fn snippet(language: CodeLanguage, nesting: usize, rng: &mut ChaCha8Rng, title: &str) -> Vec<String> {
    let t = language.templates();
    let f = *FUNCTIONS.choose(rng).expect("non-empty");
    let mut names = VARIABLES.choose_multiple(rng, 2);
    let a = *names.next().expect("two names");
    let b = *names.next().expect("two names");
    let mut filler = Filler { rng, a, b };

    let mut lines = vec![(0, t.comment.replace("{t}", title))];
    lines.push((0, t.function.replace("{f}", f).replace("{a}", a).replace("{b}", b)));
    body(t, &mut filler, 1, nesting - 1, &mut lines);
    lines.push((1, filler.fill(t.ret)));
    if let Some(close) = t.close {
        lines.push((0, close.to_string()));
    }
    let unit = language.indent_unit();
    lines
        .into_iter()
        .map(|(level, text)| format!("{}{text}", unit.repeat(level)))
        .collect()
}

const LINE_HEIGHT: u32 = 22;
const CODE_TOP: u32 = 110;

/// A page holding a captioned code listing and a page number.
pub fn gen_code_page(language: CodeLanguage, seed: u64) -> GeneratedPage {
    let mut rng = rng_for(seed, 0xc0de ^ language as u64);
    let style = Style::from_id(rng.random_range(0..25));
    let nesting = rng.random_range(1..=3usize);
    let title = title_case(&mut rng, 3);
    let lines = snippet(language, nesting, &mut rng, &title);
    let listing = rng.random_range(1..40);
    let page_no = rng.random_range(1..400);

    let caption = format!("Listing {listing}: {title}");
    let code_bottom = CODE_TOP + LINE_HEIGHT * lines.len() as u32 + 16;
    let elements = vec![
        LayoutElement::new(SemanticLabel::Cap, BBox::new(60, 60, 836, 92).expect("static box"), 0),
        LayoutElement::new(SemanticLabel::Code, BBox::new(60, CODE_TOP, 836, code_bottom).expect("positive extent"), 1),
        LayoutElement::new(SemanticLabel::Foot, BBox::new(400, 1220, 496, 1248).expect("static box"), 2)
            .with_attrs([AttributeTag::PageNum]),
    ];
    let code_text = lines.join("\n");
    let mut contents = BTreeMap::new();
    contents.insert(0, Content::for_label(SemanticLabel::Cap, caption.clone()));
    contents.insert(1, Content::for_label(SemanticLabel::Code, code_text));
    contents.insert(2, Content::for_label(SemanticLabel::Foot, page_no.to_string()));

    let mut svg = SvgWriter::new(PAGE_W, PAGE_H, &style);
    svg.open_element(&elements[0]);
    svg.text(60.0, 84.0, 18, false, Some(style.accent), &caption);
    svg.close_element();
    svg.open_element(&elements[1]);
    for (i, line) in lines.iter().enumerate() {
        let y = CODE_TOP + 8 + LINE_HEIGHT * (i as u32 + 1) - 6;
        svg.text(68.0, f64::from(y), 16, false, None, line);
    }
    svg.close_element();
    svg.open_element(&elements[2]);
    svg.text(448.0, 1240.0, 14, false, None, &page_no.to_string());
    svg.close_element();

    let mut provenance = Provenance::new("code", seed)
        .param("language", language.as_str())
        .param("nesting", nesting)
        .param("indent_unit", language.indent_unit());
    provenance.style_id = Some(style.id);
    let spec = PageSpec {
        id: format!("code-{language}-{seed}"),
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

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn code_of(page: &GeneratedPage) -> String {
        page.spec.contents[&1].as_str().to_string()
    }

    fn leading(line: &str) -> &str {
        &line[..line.len() - line.trim_start().len()]
    }

    #[test]
    fn python_two_level_nesting_keeps_exact_indentation() {
        let page = (0..200)
            .map(|s| gen_code_page(CodeLanguage::Python, s))
            .find(|p| p.spec.provenance.params["nesting"] == 2)
            .expect("some seed nests twice");
        let code = code_of(&page);
        let depths: BTreeSet<&str> = code.lines().map(leading).collect();
        let expected: BTreeSet<&str> = ["", "    ", "        "].into_iter().collect();
        assert_eq!(depths, expected, "{code}");
    }

    #[test]
    fn deepest_level_matches_nesting_for_every_language() {
        for lang in CodeLanguage::ALL {
            for seed in 0..30 {
                let page = gen_code_page(lang, seed);
                let nesting = page.spec.provenance.params["nesting"].as_u64().unwrap() as usize;
                let unit = lang.indent_unit();
                let deepest = code_of(&page)
                    .lines()
                    .map(|l| leading(l).len() / unit.len())
                    .max()
                    .unwrap();
                assert_eq!(deepest, nesting, "{lang} seed {seed}");
                assert!(code_of(&page).lines().all(|l| leading(l).len() % unit.len() == 0));
            }
        }
    }

    #[test]
    fn all_25_styles_reachable() {
        let ids: BTreeSet<u32> = (0..400)
            .map(|s| gen_code_page(CodeLanguage::ALL[(s % 4) as usize], s).spec.provenance.style_id.unwrap())
            .collect();
        assert_eq!(ids.len(), 25);
    }

    #[test]
    fn deterministic() {
        assert_eq!(gen_code_page(CodeLanguage::Go, 5), gen_code_page(CodeLanguage::Go, 5));
    }

    #[test]
    fn javascript_template_literal_expands() {
        let code: String = (0..100)
            .map(|s| code_of(&gen_code_page(CodeLanguage::JavaScript, s)))
            .find(|c| c.contains("console.log"))
            .unwrap();
        assert!(!code.contains("{a}") && !code.contains("{b}"), "{code}");
    }

    #[test]
    fn language_names_parse() {
        for lang in CodeLanguage::ALL {
            assert_eq!(lang.as_str().parse::<CodeLanguage>().unwrap(), lang);
        }
        assert!("rust".parse::<CodeLanguage>().is_err());
    }
}
