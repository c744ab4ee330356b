use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use talentmine_core::eval::Comparison;
use talentmine_core::tablemodel::{tables_from_manifest, MoneyValue};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_talentmine"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn json(args: &[&str]) -> Value {
    let mut full = vec!["--format", "json"];
    full.extend_from_slice(args);
    serde_json::from_str(&ok(&full)).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn fixture(dir: &Path, extra: &[&str]) -> PathBuf {
    let mut args = vec!["gen-fixtures", "--out", s(dir)];
    args.extend_from_slice(extra);
    ok(&args);
    dir.join("benefits-guide.bundle.json")
}

#[test]
fn fixtures_are_byte_identical_for_a_seed() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    fixture(a.path(), &["--seed", "42"]);
    fixture(b.path(), &["--seed", "42"]);
    let mut names: Vec<_> = std::fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert_eq!(names.len(), 7);
    for n in names {
        assert_eq!(std::fs::read(a.path().join(&n)).unwrap(), std::fs::read(b.path().join(&n)).unwrap(), "{n:?}");
    }
    let c = tempfile::tempdir().unwrap();
    fixture(c.path(), &["--seed", "43"]);
    assert_ne!(std::fs::read(a.path().join("gold.tsv")).unwrap(), std::fs::read(c.path().join("gold.tsv")).unwrap());
}

#[test]
fn default_fixture_shape() {
    let dir = tempfile::tempdir().unwrap();
    let v = json(&["gen-fixtures", "--out", s(dir.path())]);
    assert_eq!(v["tables"], 3);
    assert_eq!(v["data_cells"], 180);
    assert!(v["gold"].as_u64().unwrap() >= 50);
    let grids = tables_from_manifest(&std::fs::read_to_string(dir.path().join("tables.manifest")).unwrap()).unwrap();
    assert!(grids.iter().all(|g| g.n_rows == 13 && g.n_cols == 6 && g.data_cell_count() == 60));
}

#[test]
fn minimal_fixture_is_consistent() {
    let dir = tempfile::tempdir().unwrap();
    let bundle = fixture(dir.path(), &["--categories", "1", "--tiers", "1", "--no-render"]);
    let gold = dir.path().join("gold.tsv");
    let v = json(&["eval", "--gold", s(&gold), "--docs", s(&bundle), "--methods", "semantic"]);
    assert_eq!(v["rows"][3]["scores"][0]["accuracy"], 1.0);
    assert!(!dir.path().join("page-0.pgm").exists());
}

/// Finds the cell by its month row and tier column, independently of the library's oracle.
fn lookup(manifest: &str, table: &str, month: &str, tier: &str) -> MoneyValue {
    let grids = tables_from_manifest(manifest).unwrap();
    let g = grids.iter().find(|g| g.table_id == table).unwrap();
    let row = g.cells.iter().find(|c| c.col == 0 && c.raw_text == month).unwrap().row;
    let col = g.cells.iter().find(|c| c.row == 0 && c.raw_text == tier).unwrap().col;
    g.cell_at(row, col).unwrap().raw_text.parse().unwrap()
}

#[test]
fn ask_prints_the_table_value() {
    let dir = tempfile::tempdir().unwrap();
    let bundle = fixture(dir.path(), &[]);
    let kb = dir.path().join("fixture.kb");
    ok(&["index", s(&bundle), "--kb", s(&kb)]);
    let expected = lookup(&std::fs::read_to_string(dir.path().join("tables.manifest")).unwrap(), "out-of-pocket-max", "February", "You + spouse");
    let q = "What is February's out-of-pocket max for you and your spouse?";
    let text = ok(&["ask", q, "--kb", s(&kb)]);
    assert!(text.lines().next().unwrap().contains(&expected.to_string()), "{text}");
    let v = json(&["ask", q, "--kb", s(&kb)]);
    assert_eq!(v["value_cents"], expected.amount_cents);
    assert_eq!(v["status"], "answered");
    let v = json(&["ask", q, "--kb", s(&kb), "--answerer", "mock"]);
    assert_eq!(v["value_cents"], expected.amount_cents);
}

#[test]
fn eval_without_a_knowledge_base_fails() {
    let dir = tempfile::tempdir().unwrap();
    fixture(dir.path(), &["--no-render"]);
    let out = run(&["eval", "--gold", s(&dir.path().join("gold.tsv"))]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no knowledge base"));
    let out = run(&["eval", "--gold", s(&dir.path().join("gold.tsv")), "--kb", s(&dir.path().join("missing.kb"))]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["ask"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["index", "x.json", "--kb", "k", "--linearizer", "magic"]).status.code(), Some(2));
}

#[test]
fn linearize_counts_follow_the_grid() {
    let dir = tempfile::tempdir().unwrap();
    fixture(dir.path(), &["--no-render"]);
    let manifest = dir.path().join("tables.manifest");
    let grids = tables_from_manifest(&std::fs::read_to_string(&manifest).unwrap()).unwrap();
    let csv = json(&["linearize", s(&manifest), "--linearizer", "csv"]);
    let reference = json(&["linearize", s(&manifest), "--linearizer", "reference"]);
    for (i, g) in grids.iter().enumerate() {
        assert_eq!(csv["tables"][i]["lines"], g.n_rows);
        assert_eq!(reference["tables"][i]["sentences"], g.data_cell_count());
    }
    let text = ok(&["linearize", s(&manifest)]);
    assert_eq!(text.lines().filter(|l| l.starts_with("# table:")).count(), 180);
    assert!(text.contains("For January, the company HRA contribution for You only is $"));
}

#[test]
fn provider_linearizer_needs_an_endpoint() {
    let dir = tempfile::tempdir().unwrap();
    fixture(dir.path(), &["--no-render"]);
    let out = run(&["linearize", s(&dir.path().join("tables.manifest")), "--linearizer", "provider"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--provider-endpoint"));
}

#[test]
fn eval_json_matches_the_comparison_schema() {
    let dir = tempfile::tempdir().unwrap();
    let bundle = fixture(dir.path(), &[]);
    let reports = dir.path().join("reports");
    let out = ok(&[
        "--format", "json", "eval", "--gold", s(&dir.path().join("gold.tsv")), "--docs", s(&bundle), "--methods", "semantic,csv", "--out",
        s(&reports),
    ]);
    let c: Comparison = serde_json::from_str(&out).unwrap();
    assert_eq!(c.methods.len(), 2);
    assert_eq!(serde_json::to_string_pretty(&c).unwrap() + "\n", out);
    for f in ["comparison.txt", "comparison.json", "semantic.json", "csv.json", "semantic.txt"] {
        assert!(reports.join(f).exists(), "{f}");
    }
    let unknown = run(&["eval", "--gold", s(&dir.path().join("gold.tsv")), "--docs", s(&bundle), "--methods", "magic"]);
    assert_eq!(unknown.status.code(), Some(1));
}

#[test]
fn eval_an_existing_kb() {
    let dir = tempfile::tempdir().unwrap();
    let bundle = fixture(dir.path(), &["--no-render"]);
    let kb = dir.path().join("f.kb");
    ok(&["index", s(&bundle), "--kb", s(&kb)]);
    let v = json(&["eval", "--gold", s(&dir.path().join("gold.tsv")), "--kb", s(&kb)]);
    assert_eq!(v["methods"][0]["method"], "kb");
    assert_eq!(v["methods"][0]["accuracy"], 1.0);
}

#[test]
fn ingest_and_render_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let bundle = fixture(dir.path(), &[]);
    let tables = dir.path().join("ingested.manifest");
    let v = json(&["ingest", s(&bundle), "--tables-out", s(&tables)]);
    let regions = v["documents"][0]["regions"].as_array().unwrap();
    assert_eq!(regions.len(), 3);
    assert_eq!(v["documents"][0]["prose_blocks"], 6);
    assert_eq!(
        tables_from_manifest(&std::fs::read_to_string(&tables).unwrap()).unwrap().len(),
        3
    );

    let rendered = dir.path().join("rendered");
    let r = json(&["render", s(&dir.path().join("tables.manifest")), "--out", s(&rendered)]);
    assert_eq!(r["pages"], 3);
    let rebundle = rendered.join("tables.bundle.json");
    let kb = dir.path().join("r.kb");
    let idx = json(&["index", s(&rebundle), "--kb", s(&kb)]);
    assert_eq!(idx["summary"]["table_chunks"], 180);
    let inline = dir.path().join("inline");
    ok(&["render", s(&dir.path().join("tables.manifest")), "--out", s(&inline), "--inline"]);
    assert!(!inline.join("page-0.pgm").exists());
    ok(&["ingest", s(&inline.join("tables.bundle.json"))]);
}

#[test]
fn index_options() {
    let dir = tempfile::tempdir().unwrap();
    let bundle = fixture(dir.path(), &["--no-render"]);
    let kb = dir.path().join("t.kb");
    let per_table = json(&["index", s(&bundle), "--kb", s(&kb), "--granularity", "per-table", "--no-prose"]);
    assert_eq!(per_table["summary"]["chunk_count"], 3);
    let csv = json(&["index", s(&bundle), "--kb", s(&kb), "--linearizer", "csv"]);
    assert_eq!(csv["summary"]["table_chunks"], 39);
}

#[test]
fn serve_answers_health_checks() {
    use std::io::{Read, Write};
    let port = std::net::TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let mut child = bin().args(["serve", "--port", &port.to_string()]).env_remove("TALENTMINE_PORT").spawn().unwrap();
    let mut reply = String::new();
    for _ in 0..100 {
        if let Ok(mut stream) = std::net::TcpStream::connect(("127.0.0.1", port)) {
            stream.write_all(b"GET /health HTTP/1.1\r\nHost: localhost\r\nConnection: close\r\n\r\n").unwrap();
            stream.read_to_string(&mut reply).unwrap();
            break;
        }
        std::thread::sleep(std::time::Duration::from_millis(50));
    }
    child.kill().unwrap();
    child.wait().unwrap();
    assert!(reply.starts_with("HTTP/1.1 200"), "{reply}");
    assert!(reply.contains("\"status\":\"ok\""));
}

#[test]
fn serve_rejects_bad_configuration() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("service.conf");
    std::fs::write(&config, "qa.answerer = provider\n").unwrap();
    let out = run(&["serve", "--config", s(&config)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("provider.endpoint"));
}
