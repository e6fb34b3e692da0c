use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::Duration;

use refinery_core::backend::{Backend, BackendError, CachedBackend, CompletionRequest, HttpBackend, HttpConfig, ResponseCache, RetryPolicy};
use refinery_core::engine::{refine_dataset, RefineInput, RefineOptions, RefinementTask, TaskKind};
use refinery_core::evaluation::{PerspectiveScorer, ToxicityScorer};
use serde_json::{json, Value};

#[derive(Debug, Clone)]
struct Seen {
    target: String,
    headers: Vec<(String, String)>,
    body: Value,
}

/// Serves the scripted `(status, body)` replies in order, then repeats the last one.
fn serve(script: Vec<(u16, String)>) -> (String, Arc<Mutex<Vec<Seen>>>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}", listener.local_addr().unwrap());
    let seen = Arc::new(Mutex::new(Vec::new()));
    let log = Arc::clone(&seen);
    thread::spawn(move || {
        for (i, stream) in listener.incoming().enumerate() {
            let Ok(mut stream) = stream else { break };
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut request_line = String::new();
            reader.read_line(&mut request_line).unwrap();
            let target = request_line.split_whitespace().nth(1).unwrap_or_default().to_string();
            let mut headers = Vec::new();
            let mut length = 0usize;
            loop {
                let mut line = String::new();
                reader.read_line(&mut line).unwrap();
                let line = line.trim_end();
                if line.is_empty() {
                    break;
                }
                if let Some((k, v)) = line.split_once(':') {
                    let (k, v) = (k.trim().to_ascii_lowercase(), v.trim().to_string());
                    if k == "content-length" {
                        length = v.parse().unwrap();
                    }
                    headers.push((k, v));
                }
            }
            let mut body = vec![0; length];
            reader.read_exact(&mut body).unwrap();
            log.lock().unwrap().push(Seen { target, headers, body: serde_json::from_slice(&body).unwrap_or(Value::Null) });
            let (status, reply) = script.get(i).or(script.last()).cloned().unwrap();
            let response =
                format!("HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{reply}", reply.len());
            stream.write_all(response.as_bytes()).unwrap();
        }
    });
    (url, seen)
}

fn chat(content: &str) -> String {
    json!({"choices": [{"message": {"role": "assistant", "content": content}}]}).to_string()
}

fn fast_retry(max_attempts: u32) -> RetryPolicy {
    RetryPolicy { max_attempts, base_delay: Duration::from_millis(1), factor: 1.0, jitter: 0.0 }
}

fn backend(url: &str, attempts: u32) -> HttpBackend {
    let mut config = HttpConfig::new(format!("{url}/v1/chat/completions"), "test-model");
    config.api_key = Some("secret".into());
    config.retry = fast_retry(attempts);
    config.timeout = Duration::from_secs(5);
    HttpBackend::new(config)
}

#[test]
fn retries_server_errors_then_succeeds() {
    let (url, seen) = serve(vec![(503, "busy".into()), (429, "slow down".into()), (200, chat("done"))]);
    let b = backend(&url, 5);
    let req = CompletionRequest::new("rewrite this", &b.descriptor().backend_id, 0.0, 100);
    assert_eq!(b.complete(&req).unwrap(), "done");
    assert_eq!(b.network_calls(), 3);
    let seen = seen.lock().unwrap();
    assert_eq!(seen.len(), 3);
    let last = &seen[2];
    assert_eq!(last.target, "/v1/chat/completions");
    assert!(last.headers.iter().any(|(k, v)| k == "authorization" && v == "Bearer secret"));
    assert_eq!(last.body["model"], "test-model");
    assert_eq!(last.body["messages"][0]["content"], "rewrite this");
}

#[test]
fn client_errors_are_not_retried() {
    let (url, _) = serve(vec![(400, "bad request".into())]);
    let b = backend(&url, 5);
    let req = CompletionRequest::new("x", "id", 0.0, 10);
    assert!(matches!(b.complete(&req), Err(BackendError::Status { status: 400, .. })));
    assert_eq!(b.network_calls(), 1);
}

#[test]
fn persistent_failure_exhausts_attempts() {
    let (url, _) = serve(vec![(500, "down".into())]);
    let b = backend(&url, 3);
    let req = CompletionRequest::new("x", "id", 0.0, 10);
    match b.complete(&req) {
        Err(BackendError::Exhausted { attempts: 3, last }) => assert!(matches!(*last, BackendError::Status { status: 500, .. })),
        other => panic!("{other:?}"),
    }
}

#[test]
fn malformed_body_is_reported() {
    let (url, _) = serve(vec![(200, "{\"choices\":[]}".into())]);
    let b = backend(&url, 2);
    let req = CompletionRequest::new("x", "id", 0.0, 10);
    assert!(matches!(b.complete(&req), Err(BackendError::Malformed(_))));
    assert_eq!(b.network_calls(), 1);
}

#[test]
fn output_is_truncated_to_budget() {
    let (url, _) = serve(vec![(200, chat("abcdefghij"))]);
    let b = backend(&url, 1);
    let req = CompletionRequest::new("x", "id", 0.0, 4);
    assert_eq!(b.complete(&req).unwrap(), "abcd");
}

#[test]
fn cached_rerun_makes_no_requests() {
    let (url, seen) = serve(vec![(200, chat("Card: 1234 5678 9012 3456"))]);
    let cache_dir = tempfile::tempdir().unwrap();
    let items = vec![RefineInput::new("a", "Card: 4111 1111 1111 1111"), RefineInput::new("b", "Card: 5500 0000 0000 0004")];
    let task = RefinementTask::new(TaskKind::PiiSentence);
    let opts = RefineOptions::default();

    let first = CachedBackend::new(backend(&url, 1), ResponseCache::open(cache_dir.path()).unwrap());
    let a = refine_dataset(&items, &task, &first, &opts).unwrap();
    assert!(a.failures.is_empty());
    assert_eq!(seen.lock().unwrap().len(), 2);

    let second = CachedBackend::new(backend(&url, 1), ResponseCache::open(cache_dir.path()).unwrap());
    let b = refine_dataset(&items, &task, &second, &opts).unwrap();
    assert_eq!(seen.lock().unwrap().len(), 2);
    assert_eq!(second.cache_hits(), 2);
    assert_eq!(second.network_calls(), 0);
    let outputs = |d: &refinery_core::RefinedDataset| d.records.iter().map(|r| r.output.clone()).collect::<Vec<_>>();
    assert_eq!(outputs(&a), outputs(&b));
}

#[test]
fn perspective_request_and_response() {
    let reply = json!({"attributeScores": {
        "TOXICITY": {"summaryScore": {"value": 0.8}},
        "SEVERE_TOXICITY": {"summaryScore": {"value": 0.1}},
        "IDENTITY_ATTACK": {"summaryScore": {"value": 0.0}},
        "INSULT": {"summaryScore": {"value": 0.7}},
        "PROFANITY": {"summaryScore": {"value": 0.2}},
        "THREAT": {"summaryScore": {"value": 0.05}},
    }})
    .to_string();
    let (url, seen) = serve(vec![(503, String::new()), (200, reply)]);
    let scorer = PerspectiveScorer::new(format!("{url}/v1alpha1/comments:analyze"), "k123", fast_retry(3));
    let scores = scorer.score("you idiot").unwrap();
    assert_eq!(scores.len(), 6);
    assert_eq!(scores["toxicity"], 0.8);
    assert_eq!(scorer.calls(), 2);
    let seen = seen.lock().unwrap();
    assert!(seen[1].target.ends_with("comments:analyze?key=k123"), "{}", seen[1].target);
    assert_eq!(seen[1].body["comment"]["text"], "you idiot");
    assert_eq!(seen[1].body["requestedAttributes"].as_object().unwrap().len(), 6);
}
