//! Command-level behavior: exit codes, engine agreement, CSV ingestion,
//! gadget emission, JSON shapes against the shipped schemas, and selftest
//! harness behavior.

use std::path::Path;
use std::process::Command;

use tempfile::TempDir;

fn folio(args: &[&str]) -> (String, String, i32) {
    let out = Command::new(env!("CARGO_BIN_EXE_folio"))
        .args(args)
        .output()
        .expect("binary runs");
    (
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
        out.status.code().unwrap_or(-1),
    )
}

fn write(dir: &TempDir, name: &str, content: &str) -> String {
    let path = dir.path().join(name);
    std::fs::write(&path, content).unwrap();
    path.to_str().unwrap().to_owned()
}

const DB_CYCLE: &str = r#"{
  "sorts": ["U"],
  "universes": { "U": ["1", "2"] },
  "relations": { "E": { "arity": ["U", "U"], "tuples": [["1","2"],["2","1"]] } }
}"#;

#[test]
fn eval_exit_codes_are_stable_across_engines() {
    let dir = TempDir::new().unwrap();
    let db = write(&dir, "db.json", DB_CYCLE);
    let q_true = write(&dir, "t.fol", "forall y. exists x. E(y,x)");
    let q_false = write(&dir, "f.fol", "exists x. E(x,x)");
    for engine in ["naive", "bounded", "fpt"] {
        let (_, _, code) = folio(&["eval", "--engine", engine, "--db", &db, "--query", &q_true]);
        assert_eq!(code, 0, "true case with {engine}");
        let (_, _, code) =
            folio(&["eval", "--engine", engine, "--db", &db, "--query", &q_false]);
        assert_eq!(code, 1, "false case with {engine}");
    }
}

#[test]
fn eval_rejects_schema_mismatch() {
    let dir = TempDir::new().unwrap();
    let db = write(&dir, "db.json", DB_CYCLE);
    let q = write(&dir, "q.fol", "exists x. Missing(x)");
    let (_, stderr, code) = folio(&["eval", "--db", &db, "--query", &q]);
    assert_eq!(code, 2);
    assert!(stderr.contains("Missing"), "stderr: {stderr}");
}

#[test]
fn eval_verify_cross_checks_the_oracle() {
    let dir = TempDir::new().unwrap();
    let db = write(&dir, "db.json", DB_CYCLE);
    let q = write(&dir, "q.fol", "forall y. exists x. E(y,x)");
    let (stdout, _, code) = folio(&[
        "eval", "--engine", "fpt", "--db", &db, "--query", &q, "--verify", "--stats",
    ]);
    assert_eq!(code, 0);
    let mut lines = stdout.lines();
    assert_eq!(lines.next(), Some("true"));
    let stats: serde_json::Value = serde_json::from_str(lines.next().unwrap()).unwrap();
    check_against_schema(&stats, "eval_stats.schema.json");
}

#[test]
fn csv_directory_ingestion() {
    let dir = TempDir::new().unwrap();
    std::fs::create_dir(dir.path().join("db")).unwrap();
    std::fs::write(dir.path().join("db/E.csv"), "U,U\n1,2\n2,1\n").unwrap();
    let q = write(&dir, "q.fol", "forall y. exists x. E(y,x)");
    let db = dir.path().join("db");
    let (stdout, _, code) = folio(&["eval", "--db", db.to_str().unwrap(), "--query", &q]);
    assert_eq!(code, 0, "stdout: {stdout}");
    assert_eq!(stdout.trim(), "true");
}

#[test]
fn thickness_json_matches_schema() {
    let dir = TempDir::new().unwrap();
    let q = write(&dir, "q.fol", "forall y. exists x. exists x2. (E(y,x) & E(x,x2))");
    let (stdout, _, code) = folio(&["thickness", "--query", &q, "--json"]);
    assert_eq!(code, 0);
    let report: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    check_against_schema(&report, "analysis_report.schema.json");
    assert_eq!(report["thickness"], 2);
}

#[test]
fn gadget_clique_emits_schema_valid_structure() {
    let dir = TempDir::new().unwrap();
    let q = write(
        &dir,
        "q.fol",
        "exists x1 x2 x3. (F1(x1,x2) & F2(x1,x3) & F3(x2,x3))",
    );
    let g = write(&dir, "g.txt", "a b\nb c\na c\n");
    let (stdout, _, code) = folio(&["gadget", "clique", "--k", "3", "--query", &q, "--graph", &g]);
    assert_eq!(code, 0);
    let value: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    check_against_schema(&value, "structure.schema.json");

    // the emitted structure satisfies the query (triangle present)
    let db = write(&dir, "db.json", &stdout);
    let (out, _, code) = folio(&["eval", "--engine", "naive", "--db", &db, "--query", &q]);
    assert_eq!(code, 0, "eval says {out}");
}

#[test]
fn gadget_accordion_end_to_end() {
    let dir = TempDir::new().unwrap();
    // fully sorted: phi = forall w1. forall w2. exists v. (R(w1,v) & S(w2,v))
    let phi = write(
        &dir,
        "phi.fol",
        "forall w1:w1. forall w2:w2. exists v:v. (R(w1,v) & S(w2,v))",
    );
    let psi = write(&dir, "psi.fol", "forall w1:w1. forall w2:w2. __acc_E1(w1,w2)");
    let phi_sig = write(
        &dir,
        "phi.sig.json",
        r#"{ "sorts": ["w1", "w2", "v"],
             "relations": { "R": ["w1", "v"], "S": ["w2", "v"] } }"#,
    );
    let db = write(
        &dir,
        "a.json",
        r#"{ "sorts": ["w1", "w2"],
             "universes": { "w1": ["a1"], "w2": ["a2"] },
             "relations": { "__acc_E1": { "arity": ["w1", "w2"], "tuples": [["a1","a2"]] } } }"#,
    );
    let out_path = dir.path().join("b.json");
    let (_, stderr, code) = folio(&[
        "gadget",
        "accordion",
        "--psi",
        &psi,
        "--phi",
        &phi,
        "--db",
        &db,
        "--sig",
        &phi_sig,
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "stderr: {stderr}");
    let emitted: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    check_against_schema(&emitted, "structure.schema.json");

    // the transformed structure satisfies phi, matching psi on the input
    let (out, _, code) = folio(&[
        "eval",
        "--engine",
        "naive",
        "--db",
        out_path.to_str().unwrap(),
        "--query",
        &phi,
    ]);
    assert_eq!(code, 0, "eval says {out}");
}

#[test]
fn selftest_reports_and_exit_codes() {
    let (stdout, _, code) = folio(&["selftest", "--cases", "15", "--seed", "7"]);
    assert_eq!(code, 0, "stdout: {stdout}");
    assert!(stdout.contains("selftest passed"));

    let (stdout, _, code) = folio(&["selftest", "--cases", "0"]);
    assert_eq!(code, 0);
    assert!(stdout.contains("warning"), "stdout: {stdout}");

    let (_, stderr, code) = folio(&["selftest", "--cases", "10", "--inject-mutant"]);
    assert_eq!(code, 4);
    assert!(stderr.contains("counterexample"), "stderr: {stderr}");
}

#[test]
fn parse_failures_exit_2_and_limits_exit_3() {
    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "bad.fol", "E(x");
    let (_, _, code) = folio(&["normalize", "--query", &bad]);
    assert_eq!(code, 2);

    let q = write(&dir, "q.fol", "forall y. exists x. exists x2. (E(y,x) & E(x,x2))");
    let (_, _, code) = folio(&["normalize", "--query", &q, "--max-nodes", "3"]);
    assert_eq!(code, 3);
}

#[test]
fn normalize_trace_emits_json_steps() {
    let dir = TempDir::new().unwrap();
    let q = write(&dir, "q.fol", "!(exists x. (E(x,x) | E(x,x)))");
    let (_, stderr, code) = folio(&["normalize", "--query", &q, "--form", "org", "--trace"]);
    assert_eq!(code, 0);
    let mut saw_step = false;
    for line in stderr.lines() {
        if line.trim_start().starts_with('{') {
            let step: serde_json::Value = serde_json::from_str(line).unwrap();
            assert!(step.get("rule").is_some());
            assert!(step.get("path").is_some());
            assert!(step.get("direction").is_some());
            saw_step = true;
        }
    }
    assert!(saw_step, "no trace lines on stderr: {stderr}");
}

/// Minimal structural validation against the shipped draft-07 schemas:
/// checks required keys, additionalProperties, and primitive types. Enough
/// to keep the documented schemas and the outputs in lockstep.
fn check_against_schema(value: &serde_json::Value, schema_file: &str) {
    let schema_path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../docs")
        .join(schema_file);
    let schema: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(schema_path).unwrap()).unwrap();
    validate(value, &schema, &schema, schema_file);
}

fn validate(
    value: &serde_json::Value,
    schema: &serde_json::Value,
    _root: &serde_json::Value,
    ctx: &str,
) {
    if let Some(ty) = schema.get("type").and_then(|t| t.as_str()) {
        let ok = match ty {
            "object" => value.is_object(),
            "array" => value.is_array(),
            "string" => value.is_string(),
            "integer" => value.is_i64() || value.is_u64(),
            "number" => value.is_number(),
            "boolean" => value.is_boolean(),
            _ => true,
        };
        assert!(ok, "{ctx}: expected {ty}, got {value}");
    }
    if let Some(required) = schema.get("required").and_then(|r| r.as_array()) {
        for key in required {
            let key = key.as_str().unwrap();
            assert!(
                value.get(key).is_some(),
                "{ctx}: missing required key `{key}` in {value}"
            );
        }
    }
    if let Some(props) = schema.get("properties").and_then(|p| p.as_object()) {
        if schema.get("additionalProperties") == Some(&serde_json::Value::Bool(false)) {
            if let Some(obj) = value.as_object() {
                for key in obj.keys() {
                    assert!(props.contains_key(key), "{ctx}: unexpected key `{key}`");
                }
            }
        }
        for (key, sub) in props {
            if let Some(v) = value.get(key) {
                validate(v, sub, _root, &format!("{ctx}.{key}"));
            }
        }
    }
    if let Some(additional) = schema.get("additionalProperties") {
        if additional.is_object() {
            if let Some(obj) = value.as_object() {
                for (key, v) in obj {
                    validate(v, additional, _root, &format!("{ctx}.{key}"));
                }
            }
        }
    }
    if let Some(items) = schema.get("items") {
        if let Some(arr) = value.as_array() {
            for (i, v) in arr.iter().enumerate() {
                validate(v, items, _root, &format!("{ctx}[{i}]"));
            }
        }
    }
}

#[test]
fn thickness_of_a_bare_atom() {
    let dir = TempDir::new().unwrap();
    let q = write(&dir, "q.fol", "E(x,y)");
    let (stdout, _, code) = folio(&["thickness", "--query", &q]);
    assert_eq!(code, 0);
    assert_eq!(stdout.lines().next(), Some("thickness: 2"));
}

#[test]
fn selftest_seed_comes_from_the_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_folio"))
        .args(["selftest", "--cases", "5"])
        .env("FOLIO_SEED", "99")
        .output()
        .expect("binary runs");
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("seed 99"), "stdout: {stdout}");
}

#[test]
fn tw_limit_guards_variable_count() {
    let dir = TempDir::new().unwrap();
    let q = write(&dir, "q.fol", "forall y. exists x. exists x2. (E(y,x) & E(x,x2))");
    let (_, _, code) = folio(&["thickness", "--query", &q, "--tw-limit", "2"]);
    assert_eq!(code, 3); // 3 variables > limit 2
    let (stdout, _, code) = folio(&["thickness", "--query", &q, "--tw-limit", "3"]);
    assert_eq!(code, 0);
    assert!(stdout.starts_with("thickness: 2"));
}

#[test]
fn query_files_may_contain_comments() {
    let dir = TempDir::new().unwrap();
    let q = write(
        &dir,
        "q.fol",
        "# every element starts an edge\nforall y. exists x. E(y,x)\n",
    );
    let db = write(&dir, "db.json", DB_CYCLE);
    let (stdout, _, code) = folio(&["eval", "--engine", "bounded", "--db", &db, "--query", &q]);
    assert_eq!(code, 0, "stdout: {stdout}");
}
