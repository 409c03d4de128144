use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anchordoc::datagen::PageSpec;
use anchordoc::metrics::{aggregate, evaluate_page, EvalPage, EvalReport, IOU_THRESHOLD};
use anchordoc::pipeline::DocumentOutput;
use serde_json::{json, Value};

use crate::{CliError, EvaluateArgs, EXIT_OK};

/// Reads a page JSON file written either by `generate` (a spec) or by
/// `parse` (a document output).
pub fn load_page(text: &str) -> Result<EvalPage, String> {
    let value: Value = serde_json::from_str(text).map_err(|e| e.to_string())?;
    if value.get("provenance").is_some() {
        let spec: PageSpec = serde_json::from_value(value).map_err(|e| e.to_string())?;
        Ok(spec.eval_page())
    } else {
        let doc: DocumentOutput = serde_json::from_value(value).map_err(|e| e.to_string())?;
        Ok(EvalPage::from_output(&doc))
    }
}

/// All page files in `dir` keyed by page id. Unreadable JSON files are
/// skipped with a warning.
pub fn load_dir(dir: &Path) -> Result<BTreeMap<String, EvalPage>, CliError> {
    let mut pages = BTreeMap::new();
    let entries = fs::read_dir(dir).map_err(|e| CliError::io(dir.display(), e))?;
    let mut paths: Vec<_> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    paths.sort();
    for path in paths {
        let text = fs::read_to_string(&path).map_err(|e| CliError::io(path.display(), e))?;
        match load_page(&text) {
            Ok(page) => {
                pages.insert(page.id.clone(), page);
            }
            Err(e) => tracing::warn!(file = %path.display(), error = %e, "skipping file"),
        }
    }
    Ok(pages)
}

fn report_row(id: &str, report: &EvalReport) -> Value {
    let mut row = serde_json::to_value(report).expect("reports serialize");
    row.as_object_mut()
        .expect("report is an object")
        .insert("id".to_string(), json!(id));
    row
}

pub fn cmd_evaluate(args: &EvaluateArgs) -> Result<i32, CliError> {
    let pred = load_dir(&args.pred)?;
    let gt = load_dir(&args.gt)?;

    let only_pred: Vec<&String> = pred.keys().filter(|k| !gt.contains_key(*k)).collect();
    let only_gt: Vec<&String> = gt.keys().filter(|k| !pred.contains_key(*k)).collect();
    if !only_pred.is_empty() || !only_gt.is_empty() {
        eprintln!(
            "warning: {} prediction(s) without ground truth, {} ground-truth page(s) without prediction",
            only_pred.len(),
            only_gt.len()
        );
        tracing::warn!(?only_pred, ?only_gt, "asymmetric page ids");
    }

    let mut ids = Vec::new();
    let mut reports = Vec::new();
    for (id, gt_page) in &gt {
        if let Some(pred_page) = pred.get(id) {
            ids.push(id.clone());
            reports.push(evaluate_page(pred_page, gt_page));
        }
    }
    let Ok(total) = aggregate(&reports) else {
        return Err(CliError::data(format!(
            "no page ids in common between {} and {}",
            args.pred.display(),
            args.gt.display()
        )));
    };

    let doc = json!({
        "per_document": ids.iter().zip(&reports).map(|(id, r)| report_row(id, r)).collect::<Vec<_>>(),
        "aggregate": total,
        "config": {
            "pred_dir": args.pred.display().to_string(),
            "gt_dir": args.gt.display().to_string(),
            "iou_threshold": IOU_THRESHOLD,
            "documents": reports.len(),
        },
    });
    let text = serde_json::to_string_pretty(&doc).expect("json values serialize");
    if let Some(parent) = args.report.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| CliError::io(parent.display(), e))?;
    }
    fs::write(&args.report, text).map_err(|e| CliError::io(args.report.display(), e))?;
    println!("{}", total.summary_row());
    Ok(EXIT_OK)
}
