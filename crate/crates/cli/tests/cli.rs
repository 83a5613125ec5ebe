use std::path::Path;
use std::process::{Command, Output};

fn cogh(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cogh")).current_dir(dir).args(args).output().unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = cogh(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn header(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap().lines().next().unwrap().to_string()
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(cogh(d, &["games", "show", "nope"]).status.code(), Some(2));
    assert_eq!(cogh(d, &["simulate"]).status.code(), Some(64));
    assert_eq!(cogh(d, &["frobnicate"]).status.code(), Some(64));
    assert_eq!(cogh(d, &["fit", "--logs", "missing.jsonl"]).status.code(), Some(2));
    assert_eq!(cogh(d, &["--help"]).status.code(), Some(0));

    std::fs::write(d.join("bad.jsonl"), "{not json\n").unwrap();
    assert_eq!(cogh(d, &["fit", "--logs", "bad.jsonl"]).status.code(), Some(65));

    ok(d, &["simulate", "--game", "paper-01", "--rounds", "20"]);
    let out = cogh(d, &["select-k", "--logs", "out/logs", "--k-hats", "3"]);
    assert_eq!(out.status.code(), Some(64));
    let out = cogh(d, &["simulate", "--game", "paper-01", "--row", "poisson:-1"]);
    assert_eq!(out.status.code(), Some(64));
}

#[test]
fn missing_api_key_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("endpoints.toml");
    std::fs::write(
        &cfg,
        "[[endpoints]]\nbase_url = \"http://127.0.0.1:1/v1\"\nmodel_name = \"m\"\napi_key_env = \"COGH_TEST_UNSET_KEY\"\n",
    )
    .unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_cogh"))
        .current_dir(dir.path())
        .env_remove("COGH_TEST_UNSET_KEY")
        .args(["collect", "--endpoints", cfg.to_str().unwrap(), "--games", "paper-01"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(64));
    assert!(String::from_utf8_lossy(&out.stderr).contains("COGH_TEST_UNSET_KEY"));
}

#[test]
fn games_list_covers_the_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(dir.path(), &["games", "list"]);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("id,size,symmetric"));
    let rows: Vec<_> = lines.collect();
    assert_eq!(rows.len(), 16);
    assert!(rows.iter().any(|r| r.starts_with("example-1,")));
    let json = ok(dir.path(), &["--format", "json", "games", "show", "paper-06"]);
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["id"], "paper-06");
}

#[test]
fn level_zero_fit_is_uniform_likelihood() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["simulate", "--game", "paper-01", "--row", "poisson:1", "--rounds", "50", "--output", "a.jsonl"]);
    ok(d, &["--k-hat", "1", "fit", "--logs", "a.jsonl"]);
    let mut r = csv::Reader::from_path(d.join("out/reports/fit_summary.csv")).unwrap();
    let idx = r.headers().unwrap().iter().position(|h| h == "nll").unwrap();
    let expect = 50.0 * (2f64.ln() + 2f64.ln());
    let mut seen = 0;
    for rec in r.records() {
        let nll: f64 = rec.unwrap()[idx].parse().unwrap();
        assert!((nll - expect).abs() < 1e-9, "{nll} vs {expect}");
        seen += 1;
    }
    assert_eq!(seen, 4);
}

#[test]
fn pipeline_is_deterministic_and_writes_expected_tables() {
    let run = |d: &Path| {
        ok(d, &["--seed", "5", "simulate", "--game", "paper-13", "--row", "poisson:1.2", "--col", "uniform", "--rounds", "200"]);
        ok(d, &["--seed", "6", "simulate", "--game", "paper-13", "--row", "poisson:1.2", "--col", "fixed:1,0,0", "--rounds", "200"]);
        ok(d, &["--k-hat", "5", "fit", "--logs", "out/logs"]);
        ok(d, &["select-k", "--logs", "out/logs"]);
        ok(d, &["report"]);
        let mut files: Vec<_> = std::fs::read_dir(d.join("out/reports"))
            .unwrap()
            .map(|e| e.unwrap().path())
            .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
            .collect();
        files.sort();
        files
    };
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let first = run(a.path());
    assert_eq!(first, run(b.path()));

    let reports = a.path().join("out/reports");
    assert_eq!(
        header(&reports.join("fit_summary.csv")),
        "pair,game,mechanism,model_kind,k_hat,nll,agent,agent_model,mean_level,dist_variance"
    );
    assert_eq!(header(&reports.join("k_selection.csv")), "model_kind,model,transition,nll_from,nll_to,ratio");
    assert_eq!(header(&reports.join("levels_baseline.csv")), "model_kind,model,mean_level,dist_variance,cross_variance,fits");
    assert_eq!(
        header(&reports.join("robustness.csv")),
        "model_kind,mechanism,game,model,role,opponents,cross_mean,cross_variance"
    );
    assert_eq!(header(&reports.join("kl.csv")), "model_kind,mechanism,game,model,role,opponent,kl");
    assert_eq!(header(&reports.join("utility_variance.csv")), "mechanism,game,model,role,opponents,utility_variance");
    assert!(header(&reports.join("utility_baseline.csv")).starts_with("model,"));
    assert!(std::fs::read_dir(a.path().join("out/fits")).unwrap().count() >= 4);
}
