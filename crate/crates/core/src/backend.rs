//! Model backends. A backend turns `(image region, prompt)` into generated
//! text; the pipeline never sees anything below that contract.
//!
//! Two implementations ship here: [`MockBackend`], answering from a
//! [`FixtureTable`], and [`RemoteBackend`], speaking the OpenAI-compatible
//! chat-completions protocol.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Cursor;
use std::path::Path;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use base64::Engine as _;
use image::{DynamicImage, ImageFormat};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BackendError {
    #[error("no fixture entry for region {region} with prompt {prompt:?}")]
    FixtureMiss { region: String, prompt: String },
    #[error("transport error: {0}")]
    Transport(String),
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error("rate limited (retry after {retry_after:?})")]
    RateLimited { retry_after: Option<Duration> },
    #[error("cannot encode request: {0}")]
    Encoding(String),
    #[error("invalid request: {0}")]
    InvalidRequest(String),
}

/// Which part of a page a request is about.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RegionScope {
    Layout,
    Holistic,
    Element(usize),
}

/// Opaque request identity: page id plus scope, written `page#layout`,
/// `page#holistic` or `page#<order>`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RegionId {
    pub page: String,
    pub scope: RegionScope,
}

impl RegionId {
    pub fn layout(page: impl Into<String>) -> Self {
        RegionId {
            page: page.into(),
            scope: RegionScope::Layout,
        }
    }

    pub fn holistic(page: impl Into<String>) -> Self {
        RegionId {
            page: page.into(),
            scope: RegionScope::Holistic,
        }
    }

    pub fn element(page: impl Into<String>, order: usize) -> Self {
        RegionId {
            page: page.into(),
            scope: RegionScope::Element(order),
        }
    }
}

impl fmt::Display for RegionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.scope {
            RegionScope::Layout => write!(f, "{}#layout", self.page),
            RegionScope::Holistic => write!(f, "{}#holistic", self.page),
            RegionScope::Element(order) => write!(f, "{}#{order}", self.page),
        }
    }
}

impl FromStr for RegionId {
    type Err = BackendError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (page, scope) = s
            .rsplit_once('#')
            .ok_or_else(|| BackendError::InvalidRequest(format!("bad region id {s:?}")))?;
        let scope = match scope {
            "layout" => RegionScope::Layout,
            "holistic" => RegionScope::Holistic,
            n => RegionScope::Element(
                n.parse()
                    .map_err(|_| BackendError::InvalidRequest(format!("bad region id {s:?}")))?,
            ),
        };
        Ok(RegionId {
            page: page.to_string(),
            scope,
        })
    }
}

/// Encoded raster (PNG or JPEG) with its pixel dimensions.
#[derive(Clone, PartialEq, Eq)]
pub struct EncodedImage {
    bytes: Arc<[u8]>,
    width: u32,
    height: u32,
}

impl fmt::Debug for EncodedImage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EncodedImage")
            .field("len", &self.bytes.len())
            .field("width", &self.width)
            .field("height", &self.height)
            .finish()
    }
}

impl EncodedImage {
    pub fn from_encoded(bytes: impl Into<Arc<[u8]>>, width: u32, height: u32) -> Self {
        EncodedImage {
            bytes: bytes.into(),
            width,
            height,
        }
    }

    pub fn png(image: &DynamicImage) -> Result<Self, BackendError> {
        let mut buf = Vec::new();
        image
            .write_to(&mut Cursor::new(&mut buf), ImageFormat::Png)
            .map_err(|e| BackendError::Encoding(e.to_string()))?;
        Ok(EncodedImage::from_encoded(buf, image.width(), image.height()))
    }

    pub fn bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    /// MIME type sniffed from the magic bytes.
    pub fn mime(&self) -> Option<&'static str> {
        match image::guess_format(&self.bytes).ok()? {
            ImageFormat::Png => Some("image/png"),
            ImageFormat::Jpeg => Some("image/jpeg"),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelRequest {
    prompt: String,
    image: EncodedImage,
    region: RegionId,
}

impl ModelRequest {
    pub fn new(
        prompt: impl Into<String>,
        image: EncodedImage,
        region: RegionId,
    ) -> Result<Self, BackendError> {
        let prompt = prompt.into();
        if prompt.is_empty() {
            return Err(BackendError::InvalidRequest("empty prompt".into()));
        }
        if image.width == 0 || image.height == 0 {
            return Err(BackendError::InvalidRequest(format!(
                "image has zero size {}x{}",
                image.width, image.height
            )));
        }
        Ok(ModelRequest {
            prompt,
            image,
            region,
        })
    }

    pub fn prompt(&self) -> &str {
        &self.prompt
    }

    pub fn image(&self) -> &EncodedImage {
        &self.image
    }

    pub fn region(&self) -> &RegionId {
        &self.region
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelResponse {
    pub text: String,
    pub latency: Duration,
    pub backend_tag: String,
}

/// A vision-language model behind a request/response contract.
///
/// Implementations are shared across worker threads and may block.
pub trait ModelBackend: Send + Sync {
    fn request(&self, req: &ModelRequest) -> Result<ModelResponse, BackendError>;

    fn tag(&self) -> &str;
}

impl<B: ModelBackend + ?Sized> ModelBackend for Arc<B> {
    fn request(&self, req: &ModelRequest) -> Result<ModelResponse, BackendError> {
        (**self).request(req)
    }

    fn tag(&self) -> &str {
        (**self).tag()
    }
}

// ---------------------------------------------------------------------------
// Fixture-driven mock

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixtureEntry {
    pub response: String,
    pub delay: Option<Duration>,
}

/// `(region_id, prompt) -> response` lookup table with simulated latency.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FixtureTable {
    entries: BTreeMap<(String, String), FixtureEntry>,
    default_delay: Duration,
}

#[derive(Serialize, Deserialize)]
struct FixtureFile {
    entries: Vec<FixtureFileEntry>,
    #[serde(default)]
    default_delay_ms: u64,
}

#[derive(Serialize, Deserialize)]
struct FixtureFileEntry {
    region_id: String,
    prompt: String,
    response: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    delay_ms: Option<u64>,
}

#[derive(Debug, Error)]
pub enum FixtureError {
    #[error("cannot read fixture file: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed fixture file: {0}")]
    Json(#[from] serde_json::Error),
}

impl FixtureTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_default_delay(mut self, delay: Duration) -> Self {
        self.default_delay = delay;
        self
    }

    pub fn default_delay(&self) -> Duration {
        self.default_delay
    }

    pub fn insert(&mut self, region: &RegionId, prompt: &str, response: impl Into<String>) {
        self.insert_entry(
            region,
            prompt,
            FixtureEntry {
                response: response.into(),
                delay: None,
            },
        );
    }

    pub fn insert_entry(&mut self, region: &RegionId, prompt: &str, entry: FixtureEntry) {
        self.entries
            .insert((region.to_string(), prompt.to_string()), entry);
    }

    pub fn get(&self, region: &RegionId, prompt: &str) -> Option<&FixtureEntry> {
        self.entries.get(&(region.to_string(), prompt.to_string()))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str, &FixtureEntry)> {
        self.entries
            .iter()
            .map(|((r, p), e)| (r.as_str(), p.as_str(), e))
    }

    /// Applies the same delay to every entry.
    pub fn set_all_delays(&mut self, delay: Duration) {
        for e in self.entries.values_mut() {
            e.delay = Some(delay);
        }
    }

    /// Adds every entry of `other`; entries already present are overwritten.
    pub fn merge(&mut self, other: FixtureTable) {
        self.entries.extend(other.entries);
    }

    pub fn to_json(&self) -> String {
        let file = FixtureFile {
            entries: self
                .entries
                .iter()
                .map(|((region_id, prompt), e)| FixtureFileEntry {
                    region_id: region_id.clone(),
                    prompt: prompt.clone(),
                    response: e.response.clone(),
                    delay_ms: e.delay.map(|d| d.as_millis() as u64),
                })
                .collect(),
            default_delay_ms: self.default_delay.as_millis() as u64,
        };
        serde_json::to_string_pretty(&file).expect("fixture tables always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, FixtureError> {
        let file: FixtureFile = serde_json::from_str(text)?;
        let mut table = FixtureTable::new()
            .with_default_delay(Duration::from_millis(file.default_delay_ms));
        for e in file.entries {
            table.entries.insert(
                (e.region_id, e.prompt),
                FixtureEntry {
                    response: e.response,
                    delay: e.delay_ms.map(Duration::from_millis),
                },
            );
        }
        Ok(table)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, FixtureError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Deterministic backend answering from a fixture table.
///
/// Keeps call statistics so tests can assert call counts and the peak
/// number of simultaneous requests.
#[derive(Debug, Default)]
pub struct MockBackend {
    table: FixtureTable,
    in_flight: AtomicUsize,
    high_water: AtomicUsize,
    calls: Mutex<Vec<RegionId>>,
}

impl MockBackend {
    pub fn new(table: FixtureTable) -> Self {
        MockBackend {
            table,
            ..Default::default()
        }
    }

    pub fn table(&self) -> &FixtureTable {
        &self.table
    }

    /// Regions requested so far, in arrival order.
    pub fn call_log(&self) -> Vec<RegionId> {
        self.calls.lock().unwrap().clone()
    }

    pub fn call_count(&self) -> usize {
        self.calls.lock().unwrap().len()
    }

    /// Calls for anything other than layout analysis.
    pub fn content_call_count(&self) -> usize {
        self.calls
            .lock()
            .unwrap()
            .iter()
            .filter(|r| r.scope != RegionScope::Layout)
            .count()
    }

    pub fn high_water_mark(&self) -> usize {
        self.high_water.load(Ordering::SeqCst)
    }

    pub fn reset_stats(&self) {
        self.calls.lock().unwrap().clear();
        self.high_water.store(0, Ordering::SeqCst);
    }
}

struct InFlight<'a>(&'a AtomicUsize);

impl Drop for InFlight<'_> {
    fn drop(&mut self) {
        self.0.fetch_sub(1, Ordering::SeqCst);
    }
}

impl ModelBackend for MockBackend {
    fn request(&self, req: &ModelRequest) -> Result<ModelResponse, BackendError> {
        let start = Instant::now();
        let now = self.in_flight.fetch_add(1, Ordering::SeqCst) + 1;
        let _guard = InFlight(&self.in_flight);
        self.high_water.fetch_max(now, Ordering::SeqCst);
        self.calls.lock().unwrap().push(req.region.clone());

        let entry = self
            .table
            .get(&req.region, &req.prompt)
            .ok_or_else(|| BackendError::FixtureMiss {
                region: req.region.to_string(),
                prompt: req.prompt.clone(),
            })?;
        let delay = entry.delay.unwrap_or(self.table.default_delay);
        if !delay.is_zero() {
            std::thread::sleep(delay);
        }
        Ok(ModelResponse {
            text: entry.response.clone(),
            latency: start.elapsed(),
            backend_tag: self.tag().to_string(),
        })
    }

    fn tag(&self) -> &str {
        "mock"
    }
}

// ---------------------------------------------------------------------------
// OpenAI-compatible remote client

pub const DEFAULT_MAX_TOKENS: u32 = 8192;

#[derive(Clone)]
pub struct RemoteConfig {
    pub base_url: String,
    pub model: String,
    pub api_key: Option<String>,
    pub max_tokens: u32,
    pub timeout: Duration,
    /// Extra attempts after a transport failure.
    pub retries: u32,
    pub backoff_base: Duration,
}

impl RemoteConfig {
    pub fn new(base_url: impl Into<String>, model: impl Into<String>) -> Self {
        RemoteConfig {
            base_url: base_url.into(),
            model: model.into(),
            api_key: None,
            max_tokens: DEFAULT_MAX_TOKENS,
            timeout: Duration::from_secs(120),
            retries: 2,
            backoff_base: Duration::from_millis(100),
        }
    }

    pub fn with_api_key(mut self, key: impl Into<String>) -> Self {
        self.api_key = Some(key.into());
        self
    }

    pub fn endpoint(&self) -> String {
        format!("{}/v1/chat/completions", self.base_url.trim_end_matches('/'))
    }
}

impl fmt::Debug for RemoteConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RemoteConfig")
            .field("base_url", &self.base_url)
            .field("model", &self.model)
            .field("api_key", &self.api_key.as_ref().map(|_| "<redacted>"))
            .field("max_tokens", &self.max_tokens)
            .field("timeout", &self.timeout)
            .field("retries", &self.retries)
            .finish()
    }
}

#[derive(Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    messages: [ChatMessage<'a>; 1],
    temperature: f64,
    max_tokens: u32,
}

#[derive(Serialize)]
struct ChatMessage<'a> {
    role: &'static str,
    content: [ContentPart<'a>; 2],
}

#[derive(Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum ContentPart<'a> {
    Text { text: &'a str },
    ImageUrl { image_url: ImageUrl },
}

#[derive(Serialize)]
struct ImageUrl {
    url: String,
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<ChatChoice>,
}

#[derive(Deserialize)]
struct ChatChoice {
    message: ChatResponseMessage,
}

#[derive(Deserialize)]
struct ChatResponseMessage {
    content: Option<String>,
}

/// Builds the chat-completions request body: one user message holding the
/// prompt text then the image as a base64 data URL, temperature 0.
pub fn encode_remote_request(
    req: &ModelRequest,
    config: &RemoteConfig,
) -> Result<Vec<u8>, BackendError> {
    if req.prompt.is_empty() {
        return Err(BackendError::Encoding("empty prompt".into()));
    }
    let mime = req
        .image
        .mime()
        .ok_or_else(|| BackendError::Encoding("image is neither PNG nor JPEG".into()))?;
    let data = base64::engine::general_purpose::STANDARD.encode(req.image.bytes());
    let body = ChatRequest {
        model: &config.model,
        messages: [ChatMessage {
            role: "user",
            content: [
                ContentPart::Text { text: &req.prompt },
                ContentPart::ImageUrl {
                    image_url: ImageUrl {
                        url: format!("data:{mime};base64,{data}"),
                    },
                },
            ],
        }],
        temperature: 0.0,
        max_tokens: config.max_tokens,
    };
    serde_json::to_vec(&body).map_err(|e| BackendError::Encoding(e.to_string()))
}

pub fn decode_remote_response(body: &[u8]) -> Result<String, BackendError> {
    let parsed: ChatResponse =
        serde_json::from_slice(body).map_err(|e| BackendError::Protocol(e.to_string()))?;
    parsed
        .choices
        .into_iter()
        .next()
        .and_then(|c| c.message.content)
        .ok_or_else(|| BackendError::Protocol("response has no message content".into()))
}

/// Chat-completions client. Transport failures (including 5xx) are retried
/// with exponential backoff; protocol errors and 429s are returned at once.
pub struct RemoteBackend {
    config: RemoteConfig,
    client: reqwest::blocking::Client,
}

impl fmt::Debug for RemoteBackend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RemoteBackend")
            .field("config", &self.config)
            .finish()
    }
}

impl RemoteBackend {
    pub fn new(config: RemoteConfig) -> Result<Self, BackendError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(config.timeout)
            .build()
            .map_err(|e| BackendError::Transport(e.to_string()))?;
        Ok(RemoteBackend { config, client })
    }

    pub fn config(&self) -> &RemoteConfig {
        &self.config
    }

    fn attempt(&self, body: &[u8]) -> Result<String, BackendError> {
        let mut builder = self
            .client
            .post(self.config.endpoint())
            .header(reqwest::header::CONTENT_TYPE, "application/json")
            .body(body.to_vec());
        if let Some(key) = &self.config.api_key {
            builder = builder.bearer_auth(key);
        }
        let resp = builder
            .send()
            .map_err(|e| BackendError::Transport(e.without_url().to_string()))?;
        let status = resp.status();
        if status == reqwest::StatusCode::TOO_MANY_REQUESTS {
            let retry_after = resp
                .headers()
                .get(reqwest::header::RETRY_AFTER)
                .and_then(|v| v.to_str().ok())
                .and_then(|v| v.trim().parse::<u64>().ok())
                .map(Duration::from_secs);
            return Err(BackendError::RateLimited { retry_after });
        }
        let bytes = resp
            .bytes()
            .map_err(|e| BackendError::Transport(e.without_url().to_string()))?;
        if status.is_server_error() {
            return Err(BackendError::Transport(format!("server returned {status}")));
        }
        if !status.is_success() {
            return Err(BackendError::Protocol(format!(
                "server returned {status}: {}",
                String::from_utf8_lossy(&bytes)
            )));
        }
        decode_remote_response(&bytes)
    }
}

impl ModelBackend for RemoteBackend {
    fn request(&self, req: &ModelRequest) -> Result<ModelResponse, BackendError> {
        let body = encode_remote_request(req, &self.config)?;
        let start = Instant::now();
        let mut attempt = 0;
        loop {
            match self.attempt(&body) {
                Ok(text) => {
                    return Ok(ModelResponse {
                        text,
                        latency: start.elapsed(),
                        backend_tag: self.tag().to_string(),
                    })
                }
                Err(BackendError::Transport(msg)) if attempt < self.config.retries => {
                    let wait = self.config.backoff_base * 2u32.pow(attempt);
                    tracing::warn!(region = %req.region, attempt, "transport error, retrying in {wait:?}: {msg}");
                    std::thread::sleep(wait);
                    attempt += 1;
                }
                Err(e) => return Err(e),
            }
        }
    }

    fn tag(&self) -> &str {
        "remote"
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_png() -> EncodedImage {
        EncodedImage::png(&DynamicImage::new_rgb8(1, 1)).unwrap()
    }

    fn req(region: RegionId, prompt: &str) -> ModelRequest {
        ModelRequest::new(prompt, tiny_png(), region).unwrap()
    }

    #[test]
    fn region_ids_round_trip() {
        for r in [
            RegionId::layout("p1"),
            RegionId::holistic("a#b"),
            RegionId::element("p1", 3),
        ] {
            assert_eq!(r.to_string().parse::<RegionId>().unwrap(), r);
        }
        assert_eq!(RegionId::element("p1", 3).to_string(), "p1#3");
        assert!("nohash".parse::<RegionId>().is_err());
        assert!("p#x".parse::<RegionId>().is_err());
    }

    #[test]
    fn request_preconditions() {
        assert!(ModelRequest::new("", tiny_png(), RegionId::layout("p")).is_err());
        let empty = EncodedImage::from_encoded(vec![], 0, 5);
        assert!(ModelRequest::new("x", empty, RegionId::layout("p")).is_err());
    }

    #[test]
    fn mock_returns_fixture_text() {
        let mut table = FixtureTable::new();
        let region = RegionId::element("p1", 3);
        table.insert(
            &region,
            "Parse the table in the image.",
            "<table><tr><td>A</td></tr></table>",
        );
        let mock = MockBackend::new(table);
        let resp = mock
            .request(&req(region, "Parse the table in the image."))
            .unwrap();
        assert_eq!(resp.text, "<table><tr><td>A</td></tr></table>");
        assert_eq!(resp.backend_tag, "mock");
    }

    #[test]
    fn mock_miss_names_the_key() {
        let mock = MockBackend::new(FixtureTable::new());
        let err = mock
            .request(&req(RegionId::element("p9", 0), "Read text in the image."))
            .unwrap_err();
        match err {
            BackendError::FixtureMiss { region, prompt } => {
                assert_eq!(region, "p9#0");
                assert_eq!(prompt, "Read text in the image.");
            }
            other => panic!("unexpected {other:?}"),
        }
        // misses are still counted as calls
        assert_eq!(mock.call_count(), 1);
    }

    #[test]
    fn mock_is_deterministic() {
        let mut table = FixtureTable::new();
        table.insert(&RegionId::layout("p"), "q", "answer \u{2603}");
        let mock = MockBackend::new(table);
        let r = req(RegionId::layout("p"), "q");
        let first = mock.request(&r).unwrap().text;
        for _ in 0..1000 {
            assert_eq!(mock.request(&r).unwrap().text.as_bytes(), first.as_bytes());
        }
    }

    #[test]
    fn fixture_json_round_trip() {
        let mut table = FixtureTable::new().with_default_delay(Duration::from_millis(5));
        table.insert(&RegionId::layout("p"), "a", "x");
        table.insert_entry(
            &RegionId::element("p", 1),
            "b",
            FixtureEntry {
                response: "y".into(),
                delay: Some(Duration::from_millis(50)),
            },
        );
        let json = table.to_json();
        assert!(json.contains("\"default_delay_ms\": 5"));
        assert_eq!(FixtureTable::from_json(&json).unwrap(), table);
        assert!(FixtureTable::from_json("{\"entries\": 3}").is_err());
    }

    #[test]
    fn remote_body_shape() {
        let config = RemoteConfig::new("http://localhost:1", "m");
        let body = encode_remote_request(
            &req(RegionId::layout("p"), "Read text in the image."),
            &config,
        )
        .unwrap();
        let v: serde_json::Value = serde_json::from_slice(&body).unwrap();
        let parts = v["messages"][0]["content"].as_array().unwrap();
        assert_eq!(v["messages"].as_array().unwrap().len(), 1);
        assert_eq!(v["messages"][0]["role"], "user");
        assert_eq!(parts.len(), 2);
        assert_eq!(parts[0]["type"], "text");
        assert_eq!(parts[0]["text"], "Read text in the image.");
        assert_eq!(parts[1]["type"], "image_url");
        assert!(parts[1]["image_url"]["url"]
            .as_str()
            .unwrap()
            .starts_with("data:image/png;base64,"));
        assert_eq!(v["temperature"], 0.0);
        assert_eq!(v["max_tokens"], 8192);
    }

    #[test]
    fn remote_encoding_errors() {
        let config = RemoteConfig::new("http://x", "m");
        let garbage = EncodedImage::from_encoded(vec![1, 2, 3], 1, 1);
        let r = ModelRequest::new("p", garbage, RegionId::layout("p")).unwrap();
        assert!(matches!(
            encode_remote_request(&r, &config),
            Err(BackendError::Encoding(_))
        ));
    }

    #[test]
    fn response_decoding() {
        let ok = br#"{"choices":[{"message":{"role":"assistant","content":"hi"}}]}"#;
        assert_eq!(decode_remote_response(ok).unwrap(), "hi");
        for bad in [&b"not json"[..], br#"{"choices":[]}"#, br#"{"choices":[{"message":{}}]}"#] {
            assert!(matches!(
                decode_remote_response(bad),
                Err(BackendError::Protocol(_))
            ));
        }
    }

    #[test]
    fn config_debug_redacts_key() {
        let cfg = RemoteConfig::new("http://x", "m").with_api_key("sk-secret-123");
        let dbg = format!("{cfg:?}");
        assert!(!dbg.contains("sk-secret-123"));
        assert!(dbg.contains("<redacted>"));
    }
}
