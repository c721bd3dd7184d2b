use std::process::{Command, Output};

fn commlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_commlab")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn temp_file(name: &str, text: &str) -> String {
    let dir = std::env::temp_dir().join(format!("commlab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn exhaustive_f2_row() {
    let o = commlab(&["sketch", "f2", "--n", "4", "--stream", "1,1,2", "--exhaustive"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("E[X],5/1,true"), "{text}");
    assert!(text.contains("E[X2]<=3F2^2,true,true"), "{text}");
}

#[test]
fn equality_cover_is_four() {
    let m = temp_file("eq2.txt", "2 4 4\n1000\n0100\n0010\n0001\n");
    let o = commlab(&["analyze", "cover", "--matrix", &m, "--value", "1"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("min_cover,4,true"));
}

#[test]
fn same_config_same_bytes() {
    let args = ["sketch", "f2", "--n", "16", "--length", "64", "--seed", "9", "--trials", "50", "--copies", "16"];
    let a = commlab(&args);
    let b = commlab(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let json = commlab(&["--format", "json", "test", "mono", "--n", "3", "--seed", "4", "--trials", "20"]);
    let v: serde_json::Value = serde_json::from_slice(&json.stdout).unwrap();
    assert_eq!(v["header"]["seed"], "4");
    assert_eq!(commlab(&["--format", "json", "test", "mono", "--n", "3", "--seed", "4", "--trials", "20"]).stdout, json.stdout);
}

#[test]
fn exit_codes() {
    assert_eq!(commlab(&["suite", "lecture9"]).status.code(), Some(2));
    assert_eq!(commlab(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(commlab(&["sketch", "morris", "--count", "5"]).status.code(), Some(2));
    let m = temp_file("eq1.txt", "2 2 2\n10\n01\n");
    assert_eq!(commlab(&["analyze", "fool", "--matrix", &m, "--pairs", "0:0,5:1"]).status.code(), Some(2));
    let pts = temp_file("pts.txt", "0000\n1111\n");
    assert_eq!(commlab(&["ann", "query", "--points", &pts, "--query", "000", "--seed", "1"]).status.code(), Some(2));
}

#[test]
fn verification_failure_exits_three() {
    let m = temp_file("ones.txt", "2 2 2\n11\n11\n");
    let o = commlab(&["analyze", "fool", "--matrix", &m, "--pairs", "0:0,1:1"]);
    assert_eq!(o.status.code(), Some(3));
    let good = commlab(&["analyze", "fool", "--matrix", &m, "--pairs", "0:0"]);
    assert!(good.status.success());
}

#[test]
fn quick_suite_passes() {
    let o = commlab(&["suite", "lecture8", "--quick"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert_eq!(text.matches(",PASS,").count(), 3, "{text}");
}

#[test]
fn tester_and_protocol_commands() {
    let f = temp_file("f.txt", "2 2\n1 1 1 0\n");
    let o = commlab(&["test", "mono", "--n", "2", "--function", &f, "--seed", "1", "--trials", "10"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("trial_rejection_probability,1/2,true"), "{text}");
    let o = commlab(&["protocol", "eq", "--x", "101", "--y", "100", "--exhaustive"]);
    assert!(stdout(&o).contains("accept_probability,1/4,true"));
    let o = commlab(&["protocol", "cis", "--n", "3", "--graph", "7", "--clique", "110", "--indep", "001"]);
    assert!(stdout(&o).contains("disjoint,true,true"));
}
