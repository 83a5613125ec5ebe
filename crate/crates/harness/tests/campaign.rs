use std::collections::BTreeSet;
use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::{Arc, Mutex};

use cogh_core::store::load_logs;
use cogh_core::{Corpus, Mechanism};
use cogh_harness::campaign::MatchStatus;
use cogh_harness::endpoint::{ChatEndpoint, ChatMessage, ChatRequest, Purpose};
use cogh_harness::{
    run_campaign, CampaignManifest, EndpointConfig, EndpointRegistry, HarnessConfig, HttpEndpoint, MockEndpoint,
};

fn collection_ids(corpus: &Corpus) -> Vec<String> {
    corpus.collection_games().map(|g| g.id().to_string()).collect()
}

fn mocks(names: &[&str]) -> EndpointRegistry {
    names
        .iter()
        .map(|n| (n.to_string(), Arc::new(MockEndpoint::constant(n, "1")) as Arc<dyn ChatEndpoint>))
        .collect()
}

#[test]
fn fifteen_games_one_pair_gives_600_rounds() {
    let corpus = Corpus::builtin();
    let games = collection_ids(&corpus);
    assert_eq!(games.len(), 15);
    let models = vec!["mock-a".to_string(), "mock-b".to_string()];
    let manifest = CampaignManifest::all_pairs(&games, &models, Mechanism::Baseline, 30, 0);
    let dir = tempfile::tempdir().unwrap();
    let result = run_campaign(&manifest, &corpus, &mocks(&["mock-a", "mock-b"]), &HarnessConfig::new(dir.path())).unwrap();
    let pairs: usize = result.logs.iter().map(|l| l.records.len()).sum();
    assert_eq!(pairs, 600);
    assert_eq!(result.logs.len(), 20);
    assert_eq!(result.report.completed, 20);
    for g in corpus.collection_games().filter(|g| !g.is_symmetric()) {
        let orders: BTreeSet<_> =
            result.logs.iter().filter(|l| l.game_id == g.id()).map(|l| (l.row_model.clone(), l.col_model.clone())).collect();
        assert_eq!(orders.len(), 2, "{}", g.id());
    }
    // logs on disk match the returned set
    let on_disk: usize = std::fs::read_dir(dir.path().join("logs"))
        .unwrap()
        .map(|e| load_logs(&e.unwrap().path(), &corpus).unwrap()[0].records.len())
        .sum();
    assert_eq!(on_disk, 600);
    assert!(dir.path().join("campaign.json").exists());
}

#[test]
fn campaigns_are_byte_identical() {
    let corpus = Corpus::builtin();
    let games = collection_ids(&corpus);
    let models = vec!["mock-a".to_string(), "mock-b".to_string(), "mock-c".to_string()];
    let manifest = CampaignManifest::all_pairs(&games, &models, Mechanism::MemoryPartial, 12, 4);
    let snapshot = || {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = HarnessConfig::new(dir.path());
        cfg.max_parallel = 3;
        run_campaign(&manifest, &corpus, &mocks(&["mock-a", "mock-b", "mock-c"]), &cfg).unwrap();
        let mut files: Vec<_> = std::fs::read_dir(dir.path().join("logs"))
            .unwrap()
            .map(|e| {
                let p = e.unwrap().path();
                (p.file_name().unwrap().to_owned(), std::fs::read(&p).unwrap())
            })
            .collect();
        files.sort();
        files.push(("campaign.json".into(), std::fs::read(dir.path().join("campaign.json")).unwrap()));
        files
    };
    assert_eq!(snapshot(), snapshot());
}

#[test]
fn unreachable_endpoint_is_flagged_not_fatal() {
    let key = "COGH_TEST_UNREACHABLE_KEY";
    std::env::set_var(key, "secret");
    let mut cfg = EndpointConfig::new("http://127.0.0.1:1/v1", "dead", key);
    cfg.max_retries = 0;
    cfg.timeout_secs = 2.0;
    let mut registry = mocks(&["mock-a"]);
    registry.insert("dead".into(), Arc::new(HttpEndpoint::new(cfg).unwrap()));
    let corpus = Corpus::builtin();
    let games = vec!["paper-01".to_string(), "paper-08".to_string()];
    let mut manifest = CampaignManifest::all_pairs(&games, &["mock-a".to_string()], Mechanism::Baseline, 5, 0);
    manifest.matches.extend(
        CampaignManifest::all_pairs(&games, &["mock-a".to_string(), "dead".to_string()], Mechanism::Baseline, 5, 0).matches,
    );
    let dir = tempfile::tempdir().unwrap();
    let result = run_campaign(&manifest, &corpus, &registry, &HarnessConfig::new(dir.path())).unwrap();
    let report = &result.report;
    // two self-play matches, plus paper-01 once and paper-08 in both role orders against the dead model
    assert_eq!(report.matches.len(), 5);
    assert_eq!(report.completed, 2);
    assert_eq!(report.failed, 3);
    for m in &report.matches {
        let involves_dead = m.spec.row_model == "dead" || m.spec.col_model == "dead";
        assert_eq!(m.status == MatchStatus::Failed, involves_dead);
        if involves_dead {
            assert!(m.error.as_deref().unwrap().contains("dead"));
            assert!(m.log_file.is_none());
        }
    }
    let text = std::fs::read_to_string(dir.path().join("campaign.json")).unwrap();
    assert!(text.contains("\"failed\": 3"));
}

#[test]
fn unknown_model_fails_fast() {
    let corpus = Corpus::builtin();
    let manifest =
        CampaignManifest::all_pairs(&["paper-01".to_string()], &["ghost".to_string()], Mechanism::Baseline, 5, 0);
    let dir = tempfile::tempdir().unwrap();
    assert!(run_campaign(&manifest, &corpus, &mocks(&["mock-a"]), &HarnessConfig::new(dir.path())).is_err());
}

/// Minimal one-shot HTTP server returning a fixed chat-completions body.
fn serve(reply: &'static str, seen: Arc<Mutex<Vec<(String, String)>>>) -> String {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    std::thread::spawn(move || {
        for stream in listener.incoming() {
            let mut stream = stream.unwrap();
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut auth = String::new();
            let mut length = 0;
            loop {
                let mut line = String::new();
                reader.read_line(&mut line).unwrap();
                let line = line.trim_end();
                if line.is_empty() {
                    break;
                }
                let lower = line.to_ascii_lowercase();
                if let Some(v) = lower.strip_prefix("content-length:") {
                    length = v.trim().parse().unwrap();
                }
                if lower.starts_with("authorization:") {
                    auth = line["authorization:".len()..].trim().to_string();
                }
            }
            let mut body = vec![0; length];
            reader.read_exact(&mut body).unwrap();
            seen.lock().unwrap().push((auth, String::from_utf8(body).unwrap()));
            let payload = serde_json::json!({ "choices": [{ "message": { "role": "assistant", "content": reply } }] }).to_string();
            write!(
                stream,
                "HTTP/1.1 200 OK\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{payload}",
                payload.len()
            )
            .unwrap();
        }
    });
    format!("http://{addr}/v1")
}

#[test]
fn http_endpoint_speaks_chat_completions() {
    let seen = Arc::new(Mutex::new(Vec::new()));
    let url = serve("After some thought: 2", seen.clone());
    let key = "COGH_TEST_HTTP_KEY";
    std::env::set_var(key, "tok-123");
    let mut cfg = EndpointConfig::new(url, "test-model", key);
    cfg.temperature = Some(0.7);
    let archive = tempfile::tempdir().unwrap();
    let ep = HttpEndpoint::new(cfg).unwrap().with_archive(archive.path()).unwrap();
    let request = ChatRequest {
        purpose: Purpose::Decision,
        round: 1,
        role: cogh_core::PlayerRole::Row,
        attempt: 0,
        seed: 0,
        messages: vec![ChatMessage::user("pick one")],
    };
    assert_eq!(ep.complete(&request).unwrap(), "After some thought: 2");
    let seen = seen.lock().unwrap();
    let (auth, body) = &seen[0];
    assert_eq!(auth, "Bearer tok-123");
    let body: serde_json::Value = serde_json::from_str(body).unwrap();
    assert_eq!(body["model"], "test-model");
    assert_eq!(body["temperature"], 0.7);
    assert_eq!(body["messages"][0]["content"], "pick one");
    let archived = std::fs::read_to_string(archive.path().join("test-model.jsonl")).unwrap();
    assert!(archived.contains("After some thought"));
    assert!(!archived.contains("tok-123"));
}
