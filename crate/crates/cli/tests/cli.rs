use std::process::Command;

fn u21(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_u21")).args(args).output().expect("binary runs")
}

fn stdout(o: &std::process::Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn theta_index_at_p5() {
    let o = u21(&["verify", "--p", "5", "--n", "0..2", "--suite", "lemma-3.3"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).contains("index 6"));
}

#[test]
fn self_test_fails() {
    let o = u21(&["verify", "--suite", "unitarity", "--self-test"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL"));
    let o = u21(&["verify", "--suite", "unitarity"]);
    assert!(o.status.success());
}

#[test]
fn reports_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for d in [&a, &b] {
        let o = u21(&[
            "verify", "--suite", "dimensions,s-criterion,eq-d", "--n", "0..3",
            "--out", d.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", stdout(&o));
    }
    let ja = std::fs::read(a.join("report.json")).unwrap();
    assert_eq!(ja, std::fs::read(b.join("report.json")).unwrap());
    assert_eq!(std::fs::read(a.join("report.txt")).unwrap(), std::fs::read(b.join("report.txt")).unwrap());
    let v: serde_json::Value = serde_json::from_slice(&ja).unwrap();
    assert_eq!(v["schema"], "u21-report");
    assert_eq!(v["version"], 1);
    assert_eq!(v["suites"].as_array().unwrap().len(), 3);
    assert_eq!(v["pass"], true);
}

#[test]
fn dimensions_for_ramified_character() {
    let o = u21(&["dimensions", "--chi", "e1", "--n", "0..3"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).contains("dims [0, 1, 1, 2]"));
}

#[test]
fn config_file_then_flags() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("run.cfg");
    std::fs::write(&f, "p = 5\nsuites = lemma-3.3\nn = 0..1\n").unwrap();
    let o = u21(&["verify", "--config", f.to_str().unwrap()]);
    assert!(stdout(&o).contains("index 6"));
    let o = u21(&["verify", "--config", f.to_str().unwrap(), "--p", "3"]);
    assert!(stdout(&o).contains("index 4"));
}

#[test]
fn bad_input_is_rejected() {
    assert_eq!(u21(&["verify", "--suite", "nope"]).status.code(), Some(2));
    assert_eq!(u21(&["verify", "--p", "4"]).status.code(), Some(2));
}

#[test]
fn small_p3_run() {
    let o = u21(&["verify", "--n", "0..2", "--suite", "unitarity,lemma-2.1,lemma-3.3,prop-3.4,lemma-3.7,basis"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).contains("overall: PASS"));
}

#[test]
fn full_p3_run() {
    let o = u21(&["verify", "--p", "3", "--n", "0..3"]);
    let out = stdout(&o);
    assert!(o.status.success(), "{out}");
    assert!(out.contains("dims [1, 1, 2, 2]"));
    assert!(!out.contains("DIFF"));
}
