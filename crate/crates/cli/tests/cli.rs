use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn graceful(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_graceful")).args(args).output().expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn labels_verify_and_replay_identically() {
    let dir = tempfile::tempdir().unwrap();
    for expr in ["((1),(1),(1))", "((2,1,1),(1),(1))", "(2,1,3)", "(1,(1),(1))", "((2,2,1),(3),(1,1,1))"] {
        let json = dir.path().join("label.json");
        let trace = dir.path().join("label.ts");
        let out = graceful(&["label", expr, "--trace", path(&trace), "--json", path(&json)]);
        assert!(out.status.success(), "{expr}: {}", String::from_utf8_lossy(&out.stderr));

        let checked = graceful(&["verify", "--json", path(&json)]);
        assert_eq!(checked.status.code(), Some(0), "{expr}");

        let replayed = graceful(&["replay", "--script", path(&trace)]);
        assert!(replayed.status.success());
        assert_eq!(String::from_utf8(replayed.stdout).unwrap().trim_end(), fs::read_to_string(&json).unwrap(), "{expr}");
    }
}

/// Label of the vertex with a null parent, read straight from the export text.
fn root_label(text: &str) -> Option<u32> {
    let vertex = text.split("},{").find(|v| v.contains("\"parent\":null"))?;
    vertex.split("\"label\":").nth(1)?.split([',', '}']).next()?.parse().ok()
}

#[test]
fn labeled_root_is_zero() {
    let out = graceful(&["label", "((1),(1),(1))", "--class", "auto"]);
    assert!(out.status.success());
    assert_eq!(root_label(&String::from_utf8(out.stdout).unwrap()), Some(0));
}

#[test]
fn star_has_no_class() {
    let out = graceful(&["label", "(3)"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("diameter 2"));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(graceful(&["label"]).status.code(), Some(2));
    assert_eq!(graceful(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(graceful(&["label", "((1"]).status.code(), Some(2));
    assert_eq!(graceful(&["verify", "--json", "/nonexistent/x.json"]).status.code(), Some(2));
}

#[test]
fn figure_one_script() {
    let dir = tempfile::tempdir().unwrap();
    let script = dir.path().join("fig1.ts");
    fs::write(&script, "# four type-1 transfers from K_1,12\n0->12: 2..10\n12->1: 3..10\n1->11: 4..8\n11->2: 5..8\n").unwrap();
    let json = dir.path().join("fig1.json");
    let out = graceful(&["replay", "--star", "12", "--script", path(&script), "--json", path(&json)]);
    assert!(out.status.success());
    assert_eq!(graceful(&["verify", "--json", path(&json)]).status.code(), Some(0));
    let text = fs::read_to_string(&json).unwrap();
    // 2 ends up holding leaves 5..8
    for leaf in 5..=8 {
        assert!(text.contains(&format!("{{\"id\":{leaf},\"label\":{leaf},\"parent\":2}}")), "{text}");
    }
}

#[test]
fn broken_labelings_fail_verification() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("bad.json");
    fs::write(
        &json,
        r#"{"vertices":[{"id":0,"label":0,"parent":null},{"id":1,"label":1,"parent":0},{"id":2,"label":2,"parent":1}]}"#,
    )
    .unwrap();
    let out = graceful(&["verify", "--json", path(&json)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty());
}

#[test]
fn sweep_reports_pass() {
    let out = graceful(&["sweep", "--class", "e", "--max-n", "12", "--jobs", "2"]);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(stdout.lines().last(), Some("PASS"));
    assert!(stdout.contains("8 trees"), "{stdout}");
}
