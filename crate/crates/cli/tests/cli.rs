use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::process::{Child, Command, Output, Stdio};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_netrca");
const GRC: &str = "vista-hybrid-multicloud/gateway-resource-contention.json";

fn netrca(args: &[&str], cwd: &Path) -> Output {
    Command::new(BIN)
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("spawn netrca")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// A temp dir holding all eight scenarios (seed 1) and a corpus built from them.
fn workspace() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    let o = netrca(
        &[
            "simulate",
            "--scenario",
            "all",
            "--seed",
            "1",
            "--out",
            "store",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let o = netrca(
        &["corpus-add", "--corpus", "corpus.json", "--store", "store"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    dir
}

fn grc(dir: &Path) -> PathBuf {
    dir.join("store").join(GRC)
}

#[test]
fn simulate_writes_snapshot_and_truth() {
    let dir = tempfile::tempdir().unwrap();
    let o = netrca(
        &["simulate", "--scenario", "tgw-blackhole", "--seed", "4"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().map(str::trim).collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].ends_with("tgw-blackhole.json"));
    assert!(lines[1].ends_with("tgw-blackhole.truth.json"));
    for l in lines {
        assert!(dir.path().join(l).is_file());
    }
}

#[test]
fn simulate_unknown_scenario_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = netrca(&["simulate", "--scenario", "bogus"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    for slug in [
        "high-app-bandwidth",
        "high-app-latency",
        "gpu-over-utilization",
        "nic-ack-timeout-error",
        "tgw-blackhole",
        "gateway-packet-loss",
        "gateway-resource-contention",
        "switch-congestion",
    ] {
        assert!(err.contains(slug), "{err}");
    }
}

#[test]
fn simulate_is_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let o = netrca(
            &["simulate", "--scenario", "switch-congestion", "--seed", "9"],
            d.path(),
        );
        assert!(o.status.success());
    }
    let rel = "store/aiml-datacenter/switch-congestion.json";
    assert_eq!(
        std::fs::read(a.path().join(rel)).unwrap(),
        std::fs::read(b.path().join(rel)).unwrap()
    );
}

#[test]
fn analyze_ranks_gateway_cpu_first() {
    let dir = workspace();
    let o = netrca(&["analyze", grc(dir.path()).to_str().unwrap()], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let report: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let top = &report["ranked_causes"][0];
    assert_eq!(top["layer"], "Gateways");
    assert_eq!(top["node"], "VistaDev-aws-us-west-2");
    assert_eq!(top["metric"], "total_cpu_utilization");
}

#[test]
fn analyze_constant_snapshot_is_empty_not_error() {
    let dir = workspace();
    let mut snap: Value = serde_json::from_slice(&std::fs::read(grc(dir.path())).unwrap()).unwrap();
    for node in snap["nodes"].as_array_mut().unwrap() {
        for (_, series) in node["metrics"].as_object_mut().unwrap() {
            for v in series["values"].as_array_mut().unwrap() {
                *v = Value::from(1.0);
            }
            series.as_object_mut().unwrap().remove("anomalous");
        }
    }
    let path = dir.path().join("flat.json");
    std::fs::write(&path, serde_json::to_vec(&snap).unwrap()).unwrap();
    let o = netrca(&["analyze", "flat.json"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let report: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["ranked_causes"].as_array().unwrap().len(), 0);
    assert!(stderr(&o).contains("no anomalous series"));
}

#[test]
fn analyze_missing_file_names_path() {
    let dir = tempfile::tempdir().unwrap();
    let o = netrca(&["analyze", "missing.json"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("missing.json"));
}

#[test]
fn diagnose_few_shot_with_echo_contains_gold_exemplars() {
    let dir = workspace();
    let o = netrca(
        &[
            "diagnose",
            GRC,
            "--corpus",
            "../corpus.json",
            "--stub-mode",
            "echo",
            "--agents",
            "1",
        ],
        &dir.path().join("store"),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let result: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(result["mode"], "few_shot");
    assert_eq!(
        result["retrieval_hits"]["hits"].as_array().unwrap().len(),
        3
    );
    let prompt = result["prompt"].as_str().unwrap();
    assert!(prompt.contains("## Similar past incidents"));
    assert!(prompt.contains("Root cause hypothesis:"));
}

#[test]
fn diagnose_zero_shot_has_no_exemplars() {
    let dir = workspace();
    let o = netrca(
        &[
            "diagnose",
            grc(dir.path()).to_str().unwrap(),
            "--mode",
            "zero-shot",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let result: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(!result["prompt"]
        .as_str()
        .unwrap()
        .contains("Similar past incidents"));
    assert!(result["retrieval_hits"].is_null());
    let hyp = result["diagnosis"]["hypotheses"][0]["hypothesis"]
        .as_str()
        .unwrap();
    assert!(hyp.contains("high CPU utilization"), "{hyp}");
}

#[test]
fn diagnose_few_shot_without_corpus_fails() {
    let dir = workspace();
    let o = netrca(&["diagnose", grc(dir.path()).to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("corpus"), "{}", stderr(&o));
}

#[test]
fn diagnose_backend_down_returns_partial_result() {
    let dir = workspace();
    let o = Command::new(BIN)
        .args([
            "diagnose",
            grc(dir.path()).to_str().unwrap(),
            "--mode",
            "zero-shot",
            "--backend",
            "http",
        ])
        .args(["--llm-url", "http://127.0.0.1:9/generate"])
        .env_remove("RCA_LLM_API_KEY")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    let result: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(result["partial"], true);
    assert!(result["diagnosis"].is_null());
    assert_eq!(
        result["health_report"]["ranked_causes"][0]["metric"],
        "total_cpu_utilization"
    );
}

#[test]
fn diagnose_record_then_replay_is_stable() {
    let dir = workspace();
    let g = grc(dir.path());
    let g = g.to_str().unwrap();
    let rec = netrca(
        &[
            "diagnose",
            g,
            "--corpus",
            "corpus.json",
            "--backend",
            "record",
            "--cassette",
            "c.json",
            "--stable-output",
        ],
        dir.path(),
    );
    assert!(rec.status.success(), "{}", stderr(&rec));
    let args = [
        "diagnose",
        g,
        "--corpus",
        "corpus.json",
        "--backend",
        "replay",
        "--cassette",
        "c.json",
        "--stable-output",
    ];
    let first = netrca(&args, dir.path());
    let second = netrca(&args, dir.path());
    assert!(first.status.success(), "{}", stderr(&first));
    assert_eq!(first.stdout, second.stdout);
    assert_eq!(first.stdout, rec.stdout);
}

#[test]
fn eval_prints_table_and_writes_json() {
    let dir = tempfile::tempdir().unwrap();
    let cases = serde_json::json!([
        {"usecase": "Gateway Resource Contention", "predicted": "high CPU on the gateway", "gold": "high CPU on the gateway"},
        {"usecase": "Empty", "predicted": "", "gold": "something"},
    ]);
    std::fs::write(dir.path().join("cases.json"), cases.to_string()).unwrap();
    let o = netrca(
        &[
            "eval",
            "cases.json",
            "--json",
            "out/results.json",
            "--table",
            "out/table.md",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let table = stdout(&o);
    assert!(table.lines().next().unwrap().contains("S-Bert Score"));
    assert!(table.contains("1.00"));
    assert!(table.contains("failed"));
    let suite: Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("out/results.json")).unwrap())
            .unwrap();
    assert_eq!(suite["rows"].as_array().unwrap().len(), 2);
    assert!(dir.path().join("out/table.md").is_file());
}

struct Server {
    child: Child,
    base: String,
}

impl Drop for Server {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

fn start_server(dir: &Path) -> Server {
    let mut child = Command::new(BIN)
        .args(["serve", "--bind", "127.0.0.1:0", "--corpus", "corpus.json"])
        .current_dir(dir)
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .unwrap();
    let mut line = String::new();
    BufReader::new(child.stdout.take().unwrap())
        .read_line(&mut line)
        .unwrap();
    let base = line
        .trim()
        .strip_prefix("listening on ")
        .expect("address line")
        .to_string();
    Server { child, base }
}

#[test]
fn serve_handles_requests() {
    let dir = workspace();
    let server = start_server(dir.path());
    let client = reqwest::blocking::Client::new();

    let health = client
        .get(format!("{}/health", server.base))
        .send()
        .unwrap();
    assert_eq!(health.status().as_u16(), 200);

    let bad = client
        .post(format!("{}/diagnose", server.base))
        .body("{not json")
        .send()
        .unwrap();
    assert_eq!(bad.status().as_u16(), 400);
    let body: Value = bad.json().unwrap();
    assert!(body["error"].as_str().unwrap().contains("malformed"));

    let snapshot = std::fs::read(grc(dir.path())).unwrap();
    let handles: Vec<_> = ["few_shot", "zero_shot"]
        .into_iter()
        .map(|mode| {
            let url = format!("{}/diagnose?mode={mode}", server.base);
            let body = snapshot.clone();
            let client = client.clone();
            std::thread::spawn(move || client.post(url).body(body).send().unwrap())
        })
        .collect();
    for (h, mode) in handles.into_iter().zip(["few_shot", "zero_shot"]) {
        let resp = h.join().unwrap();
        assert_eq!(resp.status().as_u16(), 200);
        let result: Value = resp.json().unwrap();
        assert_eq!(result["mode"], mode);
        assert_eq!(
            result["health_report"]["ranked_causes"][0]["node"],
            "VistaDev-aws-us-west-2"
        );
    }

    let bad_mode = client
        .post(format!("{}/diagnose?mode=nine-shot", server.base))
        .body(snapshot)
        .send()
        .unwrap();
    assert_eq!(bad_mode.status().as_u16(), 400);
}
