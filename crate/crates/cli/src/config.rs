//! Resolution of pipeline settings from flags, a TOML config file and the
//! environment, in that order of precedence.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anchordoc::backend::{FixtureError, FixtureTable, MockBackend, ModelBackend, RemoteBackend, RemoteConfig};
use anchordoc::pipeline::{DispatchMode, PipelineConfig, PromptTable};
use serde::Deserialize;

use crate::{CliError, DispatchArg, OutputFormat, PipelineArgs};

pub const ENV_API_KEY: &str = "ANCHORDOC_API_KEY";
pub const ENV_ENDPOINT: &str = "ANCHORDOC_ENDPOINT";
pub const ENV_MODEL: &str = "ANCHORDOC_MODEL";
pub const DEFAULT_MODEL: &str = "anchordoc-vl";

/// Keys accepted in the `--config` TOML file.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub backend: Option<String>,
    pub endpoint: Option<String>,
    pub model: Option<String>,
    pub api_key: Option<String>,
    pub concurrency: Option<usize>,
    pub crop_padding: Option<u32>,
    pub include_marginalia: Option<bool>,
    pub format: Option<OutputFormat>,
    pub prompts: Option<PathBuf>,
    pub dispatch: Option<DispatchArg>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path.display(), e))?;
        toml::from_str(&text).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EnvConfig {
    pub endpoint: Option<String>,
    pub model: Option<String>,
    pub api_key: Option<String>,
}

impl EnvConfig {
    pub fn from_process() -> Self {
        let get = |k: &str| std::env::var(k).ok().filter(|v| !v.is_empty());
        EnvConfig {
            endpoint: get(ENV_ENDPOINT),
            model: get(ENV_MODEL),
            api_key: get(ENV_API_KEY),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BackendSpec {
    Mock(PathBuf),
    Http(String),
}

impl BackendSpec {
    /// Accepts `mock:<path>`, `http:<url>`, or a bare `http(s)://` URL.
    pub fn parse(spec: &str) -> Result<Self, CliError> {
        if let Some(path) = spec.strip_prefix("mock:") {
            if path.is_empty() {
                return Err(CliError::usage("mock backend needs a fixture path"));
            }
            return Ok(BackendSpec::Mock(PathBuf::from(path)));
        }
        let url = match spec.strip_prefix("http:") {
            Some(rest) if rest.starts_with("//") => spec.to_string(),
            Some(rest) => rest.to_string(),
            None if spec.starts_with("https://") => spec.to_string(),
            None => return Err(CliError::usage(format!("unknown backend {spec:?}; expected mock:<fixture.json> or http:<url>"))),
        };
        if !(url.starts_with("http://") || url.starts_with("https://")) || url.len() <= "https://".len() {
            return Err(CliError::usage(format!("invalid backend URL {url:?}")));
        }
        Ok(BackendSpec::Http(url))
    }
}

/// Everything `parse` and `serve` need after precedence is applied.
#[derive(Clone)]
pub struct Resolved {
    pub backend: BackendSpec,
    pub model: String,
    pub api_key: Option<String>,
    pub pipeline: PipelineConfig,
    pub format: OutputFormat,
}

impl std::fmt::Debug for Resolved {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Resolved")
            .field("backend", &self.backend)
            .field("model", &self.model)
            .field("api_key", &self.api_key.as_ref().map(|_| "<redacted>"))
            .field("pipeline", &self.pipeline)
            .field("format", &self.format)
            .finish()
    }
}

fn backend_from_file(file: &FileConfig) -> Result<Option<BackendSpec>, CliError> {
    let from_backend = file.backend.as_deref().map(BackendSpec::parse).transpose()?;
    let from_endpoint = file
        .endpoint
        .as_deref()
        .map(|e| BackendSpec::parse(&format!("http:{e}")))
        .transpose()?;
    match (from_backend, from_endpoint) {
        (Some(a), Some(b)) if a != b => Err(CliError::usage(format!(
            "config file sets conflicting backends: {a:?} and {b:?}"
        ))),
        (a, b) => Ok(a.or(b)),
    }
}

pub fn load_prompts(path: &Path) -> Result<PromptTable, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path.display(), e))?;
    let prompts: PromptTable =
        toml::from_str(&text).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    prompts
        .validate()
        .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    Ok(prompts)
}

pub fn resolve(args: &PipelineArgs, format: Option<OutputFormat>, env: &EnvConfig) -> Result<Resolved, CliError> {
    let file = match &args.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let file_backend = backend_from_file(&file)?;
    let backend = match &args.backend {
        Some(spec) => BackendSpec::parse(spec)?,
        None => match file_backend {
            Some(b) => b,
            None => match &env.endpoint {
                Some(e) => BackendSpec::parse(&format!("http:{e}"))?,
                None => {
                    return Err(CliError::usage(format!(
                        "no backend given; use --backend, a config file, or {ENV_ENDPOINT}"
                    )))
                }
            },
        },
    };

    let prompts = match args.prompts.as_ref().or(file.prompts.as_ref()) {
        Some(path) => load_prompts(path)?,
        None => PromptTable::default(),
    };
    let pipeline = PipelineConfig {
        concurrency: args.concurrency.or(file.concurrency).unwrap_or(4),
        crop_padding: args.crop_padding.or(file.crop_padding).unwrap_or(0),
        include_marginalia: args.include_marginalia || file.include_marginalia.unwrap_or(false),
        prompts,
        dispatch: args.dispatch.or(file.dispatch).map(DispatchMode::from).unwrap_or_default(),
        crop_dir: None,
    };
    pipeline.validate().map_err(|e| CliError::usage(e.to_string()))?;

    Ok(Resolved {
        backend,
        model: args
            .model
            .clone()
            .or(file.model)
            .or_else(|| env.model.clone())
            .unwrap_or_else(|| DEFAULT_MODEL.to_string()),
        api_key: file.api_key.or_else(|| env.api_key.clone()),
        pipeline,
        format: format.or(file.format).unwrap_or(OutputFormat::Both),
    })
}

pub fn build_backend(resolved: &Resolved) -> Result<Arc<dyn ModelBackend>, CliError> {
    match &resolved.backend {
        BackendSpec::Mock(path) => {
            let table = FixtureTable::load(path).map_err(|e| match e {
                FixtureError::Io(err) => CliError::io(path.display(), err),
                other => CliError::data(format!("{}: {other}", path.display())),
            })?;
            Ok(Arc::new(MockBackend::new(table)))
        }
        BackendSpec::Http(url) => {
            let mut config = RemoteConfig::new(url.clone(), resolved.model.clone());
            if let Some(key) = &resolved.api_key {
                config = config.with_api_key(key.clone());
            }
            tracing::info!(?config, "using remote backend");
            let backend = RemoteBackend::new(config).map_err(|e| CliError::usage(e.to_string()))?;
            Ok(Arc::new(backend))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn args(backend: Option<&str>) -> PipelineArgs {
        PipelineArgs {
            backend: backend.map(String::from),
            ..PipelineArgs::default()
        }
    }

    fn config_file(text: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(text.as_bytes()).unwrap();
        f
    }

    #[test]
    fn backend_spec_forms() {
        assert_eq!(BackendSpec::parse("mock:f.json").unwrap(), BackendSpec::Mock("f.json".into()));
        assert_eq!(
            BackendSpec::parse("http:http://localhost:8000").unwrap(),
            BackendSpec::Http("http://localhost:8000".into())
        );
        assert_eq!(
            BackendSpec::parse("http://localhost:8000").unwrap(),
            BackendSpec::Http("http://localhost:8000".into())
        );
        assert_eq!(BackendSpec::parse("ftp:x").unwrap_err().code, crate::EXIT_USAGE);
        assert_eq!(BackendSpec::parse("mock:").unwrap_err().code, crate::EXIT_USAGE);
        assert_eq!(BackendSpec::parse("http:localhost").unwrap_err().code, crate::EXIT_USAGE);
    }

    #[test]
    fn precedence_flag_over_file_over_env() {
        let env = EnvConfig {
            endpoint: Some("http://env:1".into()),
            model: Some("env-model".into()),
            api_key: Some("env-key".into()),
        };
        let r = resolve(&args(None), None, &env).unwrap();
        assert_eq!(r.backend, BackendSpec::Http("http://env:1".into()));
        assert_eq!(r.model, "env-model");
        assert_eq!(r.api_key.as_deref(), Some("env-key"));

        let f = config_file("endpoint = \"http://file:2\"\nmodel = \"file-model\"\nconcurrency = 9\n");
        let mut a = args(None);
        a.config = Some(f.path().to_path_buf());
        let r = resolve(&a, None, &env).unwrap();
        assert_eq!(r.backend, BackendSpec::Http("http://file:2".into()));
        assert_eq!(r.model, "file-model");
        assert_eq!(r.pipeline.concurrency, 9);

        a.backend = Some("mock:x.json".into());
        a.concurrency = Some(2);
        a.model = Some("flag-model".into());
        let r = resolve(&a, Some(OutputFormat::Md), &env).unwrap();
        assert_eq!(r.backend, BackendSpec::Mock("x.json".into()));
        assert_eq!(r.model, "flag-model");
        assert_eq!(r.pipeline.concurrency, 2);
        assert_eq!(r.format, OutputFormat::Md);
    }

    #[test]
    fn conflicting_backends_in_file_rejected() {
        let f = config_file("backend = \"mock:a.json\"\nendpoint = \"http://b:1\"\n");
        let mut a = args(None);
        a.config = Some(f.path().to_path_buf());
        assert_eq!(resolve(&a, None, &EnvConfig::default()).unwrap_err().code, crate::EXIT_USAGE);

        let f = config_file("backend = \"http:http://b:1\"\nendpoint = \"http://b:1\"\n");
        a.config = Some(f.path().to_path_buf());
        assert!(resolve(&a, None, &EnvConfig::default()).is_ok());
    }

    #[test]
    fn missing_backend_and_bad_config() {
        assert_eq!(resolve(&args(None), None, &EnvConfig::default()).unwrap_err().code, crate::EXIT_USAGE);
        let f = config_file("colour = 3\n");
        let mut a = args(Some("mock:x"));
        a.config = Some(f.path().to_path_buf());
        assert_eq!(resolve(&a, None, &EnvConfig::default()).unwrap_err().code, crate::EXIT_USAGE);
        a.config = Some("/nonexistent/config.toml".into());
        assert_eq!(resolve(&a, None, &EnvConfig::default()).unwrap_err().code, crate::EXIT_IO);
        let mut a = args(Some("mock:x"));
        a.concurrency = Some(0);
        assert_eq!(resolve(&a, None, &EnvConfig::default()).unwrap_err().code, crate::EXIT_USAGE);
    }

    #[test]
    fn prompt_file_overrides_selected_entries() {
        let f = config_file("holistic = \"Parse the content of this photographed document.\"\n");
        let mut a = args(Some("mock:x"));
        a.prompts = Some(f.path().to_path_buf());
        let r = resolve(&a, None, &EnvConfig::default()).unwrap();
        assert_eq!(r.pipeline.prompts.holistic, "Parse the content of this photographed document.");
        assert_eq!(r.pipeline.prompts.table, "Parse the table in the image.");

        let bad = config_file("code = \"\"\n");
        a.prompts = Some(bad.path().to_path_buf());
        assert_eq!(resolve(&a, None, &EnvConfig::default()).unwrap_err().code, crate::EXIT_USAGE);
    }
}
