use std::fs;
use std::path::Path;

use anchordoc::backend::FixtureTable;
use anchordoc::datagen::{gen_code_page, random_catalog, random_warped, rasterize, CodeLanguage, GeneratedPage};

use crate::{CliError, GenerateArgs, GenerateKind, EXIT_OK};

pub fn generate_page(kind: GenerateKind, seed: u64) -> GeneratedPage {
    match kind {
        GenerateKind::Catalog => random_catalog(seed),
        GenerateKind::Code => gen_code_page(CodeLanguage::ALL[(seed % 4) as usize], seed),
        GenerateKind::PageWarped => random_warped(seed),
    }
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::io(path.display(), e))
}

/// Writes `specs/`, `svg/`, `images/` and `fixtures/` (one file per page)
/// plus a combined `fixtures.json` for the whole corpus.
pub fn cmd_generate(args: &GenerateArgs) -> Result<i32, CliError> {
    let dirs = ["specs", "svg", "images", "fixtures"].map(|d| args.out.join(d));
    for d in &dirs {
        fs::create_dir_all(d).map_err(|e| CliError::io(d.display(), e))?;
    }
    let [specs, svg, images, fixtures] = &dirs;
    let mut combined = FixtureTable::new();
    for i in 0..u64::from(args.count) {
        let page = generate_page(args.kind, args.seed.wrapping_add(i));
        let id = &page.spec.id;
        write(&specs.join(format!("{id}.json")), page.spec.to_json())?;
        write(&svg.join(format!("{id}.svg")), &page.svg)?;
        let png = images.join(format!("{id}.png"));
        rasterize(&page.spec)
            .save(&png)
            .map_err(|e| CliError::io(png.display(), e))?;
        write(&fixtures.join(format!("{id}.json")), page.fixture.to_json())?;
        combined.merge(page.fixture);
    }
    write(&args.out.join("fixtures.json"), combined.to_json())?;
    println!("wrote {} page(s) to {}", args.count, args.out.display());
    Ok(EXIT_OK)
}
