use std::fs;
use std::path::{Path, PathBuf};

use anchordoc::backend::ModelBackend;
use anchordoc::pipeline::{parse_document, DocumentOutput, PageImage, PipelineConfig};
use anchordoc::assemble;

use crate::config::{self, EnvConfig};
use crate::{CliError, OutputFormat, ParseArgs, EXIT_OK, EXIT_PARTIAL};

const IMAGE_EXTENSIONS: [&str; 3] = ["png", "jpg", "jpeg"];

fn is_image(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| IMAGE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
}

/// The input file itself, or the images directly inside a directory in
/// name order.
pub fn collect_inputs(input: &Path) -> Result<Vec<PathBuf>, CliError> {
    let meta = fs::metadata(input).map_err(|e| CliError::io(input.display(), e))?;
    if meta.is_file() {
        return Ok(vec![input.to_path_buf()]);
    }
    let mut paths = Vec::new();
    for entry in fs::read_dir(input).map_err(|e| CliError::io(input.display(), e))? {
        let path = entry.map_err(|e| CliError::io(input.display(), e))?.path();
        if path.is_file() && is_image(&path) {
            paths.push(path);
        }
    }
    paths.sort();
    if paths.is_empty() {
        return Err(CliError::usage(format!("no .png or .jpg images in {}", input.display())));
    }
    Ok(paths)
}

pub fn page_id(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "page".to_string())
}

/// Decodes and parses one page.
pub fn parse_bytes(
    id: &str,
    bytes: &[u8],
    backend: &dyn ModelBackend,
    config: &PipelineConfig,
) -> Result<DocumentOutput, String> {
    let page = PageImage::decode(id, bytes).map_err(|e| e.to_string())?;
    parse_document(&page, backend, config).map_err(|e| e.to_string())
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::io(path.display(), e))
}

pub fn cmd_parse(args: &ParseArgs, env: &EnvConfig) -> Result<i32, CliError> {
    let mut resolved = config::resolve(&args.pipeline, args.format, env)?;
    let inputs = collect_inputs(&args.input)?;
    let backend = config::build_backend(&resolved)?;
    let crops = args.out.join("crops");
    fs::create_dir_all(&crops).map_err(|e| CliError::io(crops.display(), e))?;
    resolved.pipeline.crop_dir = Some(crops);
    let options = resolved.pipeline.assemble_options();

    let mut failures: Vec<(String, String)> = Vec::new();
    for path in &inputs {
        let id = page_id(path);
        let bytes = fs::read(path).map_err(|e| CliError::io(path.display(), e))?;
        let doc = match parse_bytes(&id, &bytes, backend.as_ref(), &resolved.pipeline) {
            Ok(doc) => doc,
            Err(e) => {
                tracing::error!(page = %id, error = %e, "page failed");
                failures.push((id, e));
                continue;
            }
        };
        let markdown = match assemble(&doc, &options) {
            Ok(md) => md,
            Err(e) => {
                failures.push((id, e.to_string()));
                continue;
            }
        };
        if matches!(resolved.format, OutputFormat::Json | OutputFormat::Both) {
            write(&args.out.join(format!("{id}.json")), &doc.to_json())?;
        }
        if matches!(resolved.format, OutputFormat::Md | OutputFormat::Both) {
            write(&args.out.join(format!("{id}.md")), &markdown)?;
        }
        let failed: Vec<&str> = doc.parsed.iter().filter_map(|p| p.error.as_deref()).collect();
        if !failed.is_empty() {
            failures.push((id, format!("{} element(s) failed; first: {}", failed.len(), failed[0])));
        }
    }

    if failures.is_empty() {
        return Ok(EXIT_OK);
    }
    eprintln!("{} of {} page(s) had failures:", failures.len(), inputs.len());
    for (id, err) in &failures {
        eprintln!("  {id}: {err}");
    }
    Ok(EXIT_PARTIAL)
}
