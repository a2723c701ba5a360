//! Byte-stable outputs for the fixture set: the chain family `F1..F5`, the
//! two-walk chain sentence, and five mixed-connective sentences.

use std::path::{Path, PathBuf};
use std::process::Command;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn golden(name: &str) -> String {
    std::fs::read_to_string(
        Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("tests/golden")
            .join(name),
    )
    .unwrap_or_else(|_| panic!("missing golden file {name}"))
}

fn run(args: &[&str]) -> (String, i32) {
    let out = Command::new(env!("CARGO_BIN_EXE_folio"))
        .args(args)
        .output()
        .expect("binary runs");
    (
        String::from_utf8(out.stdout).expect("utf8 output"),
        out.status.code().unwrap_or(-1),
    )
}

const FIXTURES: [&str; 11] = [
    "f1", "f2", "f3", "f4", "f5", "chain", "mix1", "mix2", "mix3", "mix4", "mix5",
];

#[test]
fn normalize_org_outputs_are_stable() {
    for name in FIXTURES {
        let q = fixture(&format!("{name}.fol"));
        let (got, code) = run(&["normalize", "--query", q.to_str().unwrap(), "--form", "org"]);
        assert_eq!(code, 0, "{name}");
        assert_eq!(got, golden(&format!("{name}.org.txt")), "org of {name}");
    }
}

#[test]
fn normalize_lay_outputs_are_stable() {
    for name in FIXTURES {
        let q = fixture(&format!("{name}.fol"));
        let (got, code) = run(&[
            "normalize",
            "--query",
            q.to_str().unwrap(),
            "--form",
            "lay",
        ]);
        assert_eq!(code, 0, "{name}");
        assert_eq!(got, golden(&format!("{name}.lay.txt")), "lay of {name}");
    }
}

#[test]
fn thickness_outputs_are_stable() {
    for name in FIXTURES {
        let q = fixture(&format!("{name}.fol"));
        let (got, code) = run(&["thickness", "--query", q.to_str().unwrap()]);
        assert_eq!(code, 0, "{name}");
        assert_eq!(
            got,
            golden(&format!("{name}.thickness.txt")),
            "thickness of {name}"
        );
    }
}

#[test]
fn chain_family_thickness_lines() {
    // first line of the report pins the headline number
    for (k, expect) in [(1, 2usize), (2, 3), (3, 4), (4, 5), (5, 6)] {
        let q = fixture(&format!("f{k}.fol"));
        let (got, _) = run(&["thickness", "--query", q.to_str().unwrap()]);
        let first = got.lines().next().unwrap();
        assert_eq!(first, format!("thickness: {expect}"));
    }
}

#[test]
fn normalized_leaves_pass_their_grammar_checks() {
    for name in FIXTURES {
        let q = fixture(&format!("{name}.fol"));
        for form in ["org", "lay"] {
            let (got, code) = run(&[
                "normalize",
                "--query",
                q.to_str().unwrap(),
                "--form",
                form,
                "--check",
            ]);
            assert_eq!(code, 0, "{name} {form}");
            assert!(got.contains("check: all leaves"), "{name} {form}: {got}");
        }
    }
}
