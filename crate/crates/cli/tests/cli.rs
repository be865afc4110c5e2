use std::path::PathBuf;
use std::process::{Command, Output};

fn hfx(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hfx"))
        .args(args)
        .output()
        .expect("spawn hfx")
}

fn fixture(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "fixtures", name]
        .iter()
        .collect();
    p.to_string_lossy().into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn list_json_is_an_array_of_name_and_section() {
    let out = hfx(&["list", "--json"]);
    assert!(out.status.success());
    let rows: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let rows = rows.as_array().unwrap();
    assert!(rows.len() >= 12);
    assert!(rows.iter().all(|r| r.as_object().unwrap().len() == 2));
    assert!(rows
        .iter()
        .any(|r| r["name"] == "lazy" && r["section"] == "§4.5"));
}

#[test]
fn list_is_stable() {
    assert_eq!(stdout(&hfx(&["list"])), stdout(&hfx(&["list"])));
}

#[test]
fn every_example_checks_against_its_golden() {
    let rows: serde_json::Value = serde_json::from_str(&stdout(&hfx(&["list", "--json"]))).unwrap();
    for row in rows.as_array().unwrap() {
        let name = row["name"].as_str().unwrap();
        let fx = fixture(if name == "bracket-eof" {
            "foo-h.json"
        } else {
            "foo-hello.json"
        });
        let out = hfx(&["run", name, "--check", "--fixture", &fx]);
        assert!(
            out.status.success(),
            "{name}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
}

#[test]
fn printed_output_is_the_transcript() {
    assert_eq!(stdout(&hfx(&["run", "state-incr"])), "(5,1)\n");
    let eof = hfx(&["run", "bracket-eof", "--fixture", &fixture("foo-h.json")]);
    assert_eq!(
        stdout(&eof),
        "H\nreleased\n***Exception: foo.txt hGetChar end of file\n"
    );
}

#[test]
fn unknown_example_exits_two() {
    assert_eq!(hfx(&["run", "nope"]).status.code(), Some(2));
}

#[test]
fn bracket_without_fixture_exits_two() {
    let out = hfx(&["run", "bracket-ok"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--fixture"));
}

#[test]
fn unreadable_fixture_exits_two() {
    let out = hfx(&[
        "run",
        "bracket-ok",
        "--fixture",
        "/nonexistent/fixture.json",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn golden_mismatch_exits_one_with_a_diff() {
    // The short file makes bracket-ok raise instead.
    let out = hfx(&[
        "run",
        "bracket-ok",
        "--check",
        "--fixture",
        &fixture("foo-h.json"),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("- ('H','E')"), "{err}");
    assert!(
        err.contains("+ ***Exception: foo.txt hGetChar end of file"),
        "{err}"
    );
}

#[test]
fn laws_json_is_reproducible() {
    let args = ["laws", "--seed", "7", "--n", "10", "--json"];
    let a = hfx(&args);
    assert!(a.status.success());
    assert_eq!(stdout(&a), stdout(&hfx(&args)));
    let summary: serde_json::Value = serde_json::from_str(&stdout(&a)).unwrap();
    assert_eq!(summary["seed"], 7);
    assert_eq!(summary["passed"], true);
    assert!(summary["suites"].as_array().unwrap().len() >= 10);
}

#[test]
fn laws_fail_under_a_mutation() {
    let out = hfx(&["laws", "--n", "50", "--json", "--mutation", "flip-tell"]);
    assert_eq!(out.status.code(), Some(1));
    let summary: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(summary["mutation"], "flip-tell");
    assert_eq!(summary["passed"], false);
}

#[test]
fn unknown_mutation_is_a_usage_error() {
    assert_eq!(hfx(&["laws", "--mutation", "nope"]).status.code(), Some(2));
}
