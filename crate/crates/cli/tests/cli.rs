use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn sfaith(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sfaith"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = sfaith(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn gen_is_deterministic_and_round_trips() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    for name in ["a", "b"] {
        ok(p, &["gen", "--family", "random", "--p", "9", "--en", "2", "--seed", "11",
                "--out", &format!("{name}.dag"), "--weights-out", &format!("{name}.w")]);
    }
    assert_eq!(read(p, "a.dag"), read(p, "b.dag"));
    assert_eq!(read(p, "a.w"), read(p, "b.w"));

    let g = sfaith::format::parse_dag(&read(p, "a.dag")).unwrap();
    assert_eq!(sfaith::format::write_dag(&g), read(p, "a.dag"));
    let w = sfaith::format::parse_weights_for(&g, &read(p, "a.w"), 1.0).unwrap();
    assert_eq!(sfaith::format::write_weights(&w), read(p, "a.w"));

    ok(p, &["gen", "--family", "random", "--p", "9", "--en", "2", "--seed", "12", "--out", "c.dag"]);
    assert_ne!(read(p, "a.dag"), read(p, "c.dag"));
}

#[test]
fn gen_families() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    ok(p, &["gen", "--family", "cycle", "--p", "3", "--out", "c3.dag"]);
    assert_eq!(read(p, "c3.dag"), "p 3\n1 2\n1 3\n2 3\n");
    ok(p, &["gen", "--family", "bipartite", "--p", "6", "--out", "b6.dag"]);
    let text = read(p, "b6.dag");
    assert!(text.starts_with("p 6\n"));
    assert_eq!(text.lines().count(), 9);
    ok(p, &["gen", "--family", "tree", "--p", "10", "--seed", "4", "--out", "t.dag"]);
    assert_eq!(read(p, "t.dag").lines().count(), 10);
}

#[test]
fn restricted_weights_from_gen() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    ok(p, &["gen", "--family", "cycle", "--p", "8", "--seed", "2", "--c", "0.75",
            "--out", "g.dag", "--weights-out", "g.w"]);
    for line in read(p, "g.w").lines().skip(1) {
        let v: f64 = line.split_whitespace().nth(2).unwrap().parse().unwrap();
        assert!((0.75..=1.0).contains(&v.abs()), "{v}");
    }
}

#[test]
fn bounds_table() {
    let d = tempfile::tempdir().unwrap();
    let out = ok(d.path(), &["bounds", "--family", "tree", "--p-list", "4", "--lambda-list", "0.1", "--classes", "M"]);
    let mut lines = out.lines();
    assert!(lines.next().unwrap().starts_with("family,p,density_or_en,lambda,c,class"));
    let row = lines.next().unwrap();
    assert!(row.starts_with("tree,4,"), "{row}");
    assert!(row.ends_with(",0.271000"), "{row}");
    let out = ok(d.path(), &["bounds", "--family", "tree", "--p-list", "10", "--lambda-list", "0.1", "--classes", "M"]);
    assert!(out.lines().nth(1).unwrap().ends_with(",0.612580"));
}

#[test]
fn audit_reports_each_class_and_lambda() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    fs::write(p.join("g.dag"), "# chain\np 3\n1 2\n2 3\n").unwrap();
    fs::write(p.join("g.w"), "p 3\n1 2 0.9\n2 3 0.9\n").unwrap();
    let out = ok(p, &["audit", "--dag", "g.dag", "--weights", "g.w", "--lambda", "0.5,0.01"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 6);
    let m = rows.iter().find(|r| r["class"] == "M" && r["lambda"] == 0.5).unwrap();
    assert!((m["min_parcorr"].as_f64().unwrap() - 0.9 / 1.81).abs() < 1e-12);
    assert_eq!(m["verdict"], "unfaithful");
    let m = rows.iter().find(|r| r["class"] == "M" && r["lambda"] == 0.01).unwrap();
    assert_eq!(m["verdict"], "faithful");
}

#[test]
fn input_errors_exit_two_with_line_numbers() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    fs::write(p.join("bad.dag"), "p 3\n1 2\n2 x\n").unwrap();
    fs::write(p.join("cyc.dag"), "p 3\n1 2\n2 3\n3 1\n").unwrap();
    fs::write(p.join("ok.dag"), "p 3\n1 2\n2 3\n").unwrap();
    fs::write(p.join("big.w"), "p 3\n1 2 1.5\n2 3 0.1\n").unwrap();
    let out = sfaith(p, &["audit", "--dag", "bad.dag", "--weights", "ok.dag"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
    let out = sfaith(p, &["audit", "--dag", "cyc.dag", "--weights", "ok.dag"]);
    assert_eq!(out.status.code(), Some(2));
    let out = sfaith(p, &["audit", "--dag", "ok.dag", "--weights", "big.w"]);
    assert_eq!(out.status.code(), Some(2));
    let out = sfaith(p, &["audit", "--dag", "missing.dag", "--weights", "ok.dag"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_one() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(sfaith(d.path(), &["frobnicate"]).status.code(), Some(1));
    assert_eq!(sfaith(d.path(), &["gen", "--p", "3"]).status.code(), Some(1));
    assert_eq!(sfaith(d.path(), &["--help"]).status.code(), Some(0));
}

#[test]
fn verify_passes_and_detects_corruption() {
    let d = tempfile::tempdir().unwrap();
    let out = sfaith(d.path(), &["verify", "--p-max", "4", "--random-dags", "20", "--points", "10"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let out = sfaith(d.path(), &["verify", "--p-max", "3", "--random-dags", "0", "--corrupt-k"]);
    assert_eq!(out.status.code(), Some(4));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("FAILED") && err.contains("Σ·K = I"), "{err}");
}

#[test]
fn single_sample_sweep_is_degenerate() {
    let d = tempfile::tempdir().unwrap();
    let out = ok(d.path(), &["sweep", "--family", "random", "--p", "6", "--en-list", "1,2",
                             "--samples", "1", "--seed", "5"]);
    let mut lines = out.lines();
    assert_eq!(lines.next().unwrap(), sfaith::format::CSV_HEADER);
    let mut n = 0;
    for line in lines {
        let f: Vec<&str> = line.split(',').collect();
        assert!(f[7] == "0" || f[7] == "1.00000", "{line}");
        assert_eq!(f[8], "0");
        n += 1;
    }
    assert_eq!(n, 2 * 3 * 4 * 3);
}

#[test]
fn sweep_with_bounds_column() {
    let d = tempfile::tempdir().unwrap();
    let out = ok(d.path(), &["sweep", "--family", "tree", "--p", "6", "--samples", "200",
                             "--c-list", "0,0.5", "--lambda-list", "0.1", "--bounds"]);
    let lines: Vec<&str> = out.lines().collect();
    assert!(lines[0].ends_with(",bound"));
    for line in &lines[1..] {
        let f: Vec<&str> = line.split(',').collect();
        if f[4] == "0" {
            assert_ne!(f[10], "NA");
        } else {
            assert_eq!(f[10], "NA");
        }
    }
}

#[test]
fn manifest_replay_reproduces_output() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    ok(p, &["sweep", "--family", "cycle", "--p", "5", "--samples", "300", "--seed", "9",
            "--threads", "2", "--out", "run.csv"]);
    let manifest: serde_json::Value = serde_json::from_str(&read(p, "run.csv.manifest.json")).unwrap();
    assert_eq!(manifest["command"], "sweep");
    assert_eq!(manifest["seed"], 9);
    ok(p, &["replay", "--manifest", "run.csv.manifest.json", "--out", "again.csv"]);
    assert_eq!(read(p, "run.csv"), read(p, "again.csv"));
}

#[test]
fn degree_term_for_a_file() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    fs::write(p.join("g.dag"), "p 3\n1 2\n2 3\n").unwrap();
    let out = ok(p, &["degree", "--dag", "g.dag", "--class", "M"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["num_edges"], 2);
    assert!(v["degree_sum"].as_u64().unwrap() > 0);
}
