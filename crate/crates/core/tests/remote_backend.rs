use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::Duration;

use anchordoc::backend::{
    decode_remote_response, encode_remote_request, BackendError, EncodedImage, ModelBackend, ModelRequest, RegionId,
    RemoteBackend, RemoteConfig,
};
use base64::Engine;
use serde_json::{json, Value};

const FAKE_PNG: &[u8] = b"\x89PNG\r\n\x1a\nanchor-test-bytes";

#[derive(Debug, Clone)]
struct Recorded {
    request_line: String,
    headers: Vec<(String, String)>,
    body: Vec<u8>,
}

impl Recorded {
    fn header(&self, name: &str) -> Option<&str> {
        self.headers
            .iter()
            .find(|(k, _)| k.eq_ignore_ascii_case(name))
            .map(|(_, v)| v.as_str())
    }
}

/// One canned HTTP response per incoming connection, in order.
struct Script {
    base_url: String,
    seen: Arc<Mutex<Vec<Recorded>>>,
    handle: thread::JoinHandle<()>,
}

fn serve(responses: Vec<(u16, Vec<(&'static str, String)>, String)>) -> Script {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let base_url = format!("http://{}", listener.local_addr().unwrap());
    let seen = Arc::new(Mutex::new(Vec::new()));
    let log = Arc::clone(&seen);
    let handle = thread::spawn(move || {
        for (status, headers, body) in responses {
            let (stream, _) = listener.accept().unwrap();
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut request_line = String::new();
            reader.read_line(&mut request_line).unwrap();
            let mut got_headers = Vec::new();
            loop {
                let mut line = String::new();
                reader.read_line(&mut line).unwrap();
                let line = line.trim_end();
                if line.is_empty() {
                    break;
                }
                let (k, v) = line.split_once(':').unwrap();
                got_headers.push((k.trim().to_string(), v.trim().to_string()));
            }
            let len: usize = got_headers
                .iter()
                .find(|(k, _)| k.eq_ignore_ascii_case("content-length"))
                .map(|(_, v)| v.parse().unwrap())
                .unwrap_or(0);
            let mut got_body = vec![0; len];
            reader.read_exact(&mut got_body).unwrap();
            log.lock().unwrap().push(Recorded {
                request_line: request_line.trim_end().to_string(),
                headers: got_headers,
                body: got_body,
            });
            let mut out = stream;
            let mut head = format!(
                "HTTP/1.1 {status} X\r\ncontent-length: {}\r\nconnection: close\r\ncontent-type: application/json\r\n",
                body.len()
            );
            for (k, v) in headers {
                head.push_str(&format!("{k}: {v}\r\n"));
            }
            head.push_str("\r\n");
            out.write_all(head.as_bytes()).unwrap();
            out.write_all(body.as_bytes()).unwrap();
            out.flush().unwrap();
        }
    });
    Script { base_url, seen, handle }
}

fn ok_body(text: &str) -> String {
    json!({"choices": [{"message": {"role": "assistant", "content": text}}]}).to_string()
}

fn request() -> ModelRequest {
    ModelRequest::new(
        "Parse the table in the image.",
        EncodedImage::from_encoded(FAKE_PNG.to_vec(), 4, 3),
        RegionId::element("page-1", 2),
    )
    .unwrap()
}

fn config(base: &str) -> RemoteConfig {
    let mut c = RemoteConfig::new(base, "test-model");
    c.retries = 2;
    c.backoff_base = Duration::from_millis(5);
    c.timeout = Duration::from_secs(5);
    c
}

#[test]
fn request_body_matches_golden_file() {
    let body = encode_remote_request(&request(), &RemoteConfig::new("http://unused", "test-model")).unwrap();
    let golden = include_str!("golden/remote_request.json").trim_end();
    assert_eq!(String::from_utf8(body.clone()).unwrap(), golden);

    let data = base64::engine::general_purpose::STANDARD.encode(FAKE_PNG);
    let expected = json!({
        "model": "test-model",
        "messages": [{
            "role": "user",
            "content": [
                {"type": "text", "text": "Parse the table in the image."},
                {"type": "image_url", "image_url": {"url": format!("data:image/png;base64,{data}")}}
            ]
        }],
        "temperature": 0.0,
        "max_tokens": 8192
    });
    assert_eq!(serde_json::from_slice::<Value>(&body).unwrap(), expected);
}

#[test]
fn unknown_image_format_is_an_encoding_error() {
    let req = ModelRequest::new("p", EncodedImage::from_encoded(b"GIF89a".to_vec(), 1, 1), RegionId::layout("x")).unwrap();
    assert!(matches!(
        encode_remote_request(&req, &RemoteConfig::new("http://unused", "m")),
        Err(BackendError::Encoding(_))
    ));
}

#[test]
fn response_decoding() {
    assert_eq!(decode_remote_response(ok_body("hello").as_bytes()).unwrap(), "hello");
    for bad in [r#"{"choices": []}"#, r#"{"choices": [{"message": {}}]}"#, "not json"] {
        assert!(matches!(decode_remote_response(bad.as_bytes()), Err(BackendError::Protocol(_))), "{bad}");
    }
}

#[test]
fn posts_to_chat_completions_with_bearer_token() {
    let script = serve(vec![(200, vec![], ok_body("<table></table>"))]);
    let backend = RemoteBackend::new(config(&script.base_url).with_api_key("sekrit-token")).unwrap();
    let resp = backend.request(&request()).unwrap();
    assert_eq!(resp.text, "<table></table>");
    assert_eq!(resp.backend_tag, "remote");
    script.handle.join().unwrap();
    let seen = script.seen.lock().unwrap();
    assert_eq!(seen.len(), 1);
    assert_eq!(seen[0].request_line, "POST /v1/chat/completions HTTP/1.1");
    assert_eq!(seen[0].header("authorization"), Some("Bearer sekrit-token"));
    let body: Value = serde_json::from_slice(&seen[0].body).unwrap();
    assert_eq!(body["model"], "test-model");
    assert!(!format!("{backend:?}").contains("sekrit"));
}

#[test]
fn server_errors_are_retried_then_succeed() {
    let script = serve(vec![
        (500, vec![], "{}".into()),
        (503, vec![], "{}".into()),
        (200, vec![], ok_body("third time")),
    ]);
    let backend = RemoteBackend::new(config(&script.base_url)).unwrap();
    assert_eq!(backend.request(&request()).unwrap().text, "third time");
    script.handle.join().unwrap();
    assert_eq!(script.seen.lock().unwrap().len(), 3);
}

#[test]
fn retries_are_bounded() {
    let script = serve(vec![
        (502, vec![], "{}".into()),
        (502, vec![], "{}".into()),
        (502, vec![], "{}".into()),
    ]);
    let backend = RemoteBackend::new(config(&script.base_url)).unwrap();
    assert!(matches!(backend.request(&request()), Err(BackendError::Transport(_))));
    script.handle.join().unwrap();
    assert_eq!(script.seen.lock().unwrap().len(), 3);
}

#[test]
fn rate_limit_is_reported_with_retry_after() {
    let script = serve(vec![(429, vec![("retry-after", "7".into())], "{}".into())]);
    let backend = RemoteBackend::new(config(&script.base_url)).unwrap();
    match backend.request(&request()) {
        Err(BackendError::RateLimited { retry_after }) => assert_eq!(retry_after, Some(Duration::from_secs(7))),
        other => panic!("expected rate limit, got {other:?}"),
    }
    script.handle.join().unwrap();
}

#[test]
fn client_errors_and_bad_bodies_are_protocol_errors() {
    let script = serve(vec![(400, vec![], r#"{"error":"bad"}"#.into()), (200, vec![], "{}".into())]);
    let backend = RemoteBackend::new(config(&script.base_url)).unwrap();
    assert!(matches!(backend.request(&request()), Err(BackendError::Protocol(_))));
    assert!(matches!(backend.request(&request()), Err(BackendError::Protocol(_))));
    script.handle.join().unwrap();
    assert_eq!(script.seen.lock().unwrap().len(), 2);
}

#[test]
fn connection_refused_is_transport() {
    let port = {
        let l = TcpListener::bind("127.0.0.1:0").unwrap();
        l.local_addr().unwrap().port()
    };
    let mut c = config(&format!("http://127.0.0.1:{port}"));
    c.retries = 1;
    let backend = RemoteBackend::new(c).unwrap();
    assert!(matches!(backend.request(&request()), Err(BackendError::Transport(_))));
}
