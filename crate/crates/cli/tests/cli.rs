use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn ftspan(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ftspan")).args(args).current_dir(dir).output().expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn gen_writes_metadata_and_edges() {
    let dir = tempfile::tempdir().unwrap();
    let o = ftspan(&["gen", "--generator", "cycle", "--n", "6", "--out", "c6.txt"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(dir.path().join("c6.txt")).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().contains("\"prng\""));
    assert_eq!(lines.next(), Some("6 6"));
    assert_eq!(lines.count(), 6);

    let o = ftspan(&["gen", "--generator", "random_regular", "--n", "5", "--degree", "3"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("error"));
}

#[test]
fn build_then_verify_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(ftspan(
        &["gen", "--generator", "gnp", "--n", "30", "--prob", "0.2", "--connected", "--seed", "3", "--out", "g.txt"],
        d
    )
    .status
    .success());
    let o = ftspan(&["build", "--graph", "g.txt", "--pipeline", "alg1-2additive", "--out", "h.json"], d);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("beta=4"));
    let o = ftspan(&["verify", "--graph", "g.txt", "--spanner", "h.json", "--out", "r.json"], d);
    assert!(o.status.success(), "{}", stderr(&o));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.join("r.json")).unwrap()).unwrap();
    assert_eq!(report["pass"], true);
    assert!(report["max_additive"].as_i64().unwrap() <= 4);
    assert!(report["counts"]["fault_sets"].as_u64().unwrap() > 1);
}

#[test]
fn verify_flags_a_broken_claim() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(ftspan(&["gen", "--generator", "cycle", "--n", "8", "--out", "c8.txt"], d).status.success());
    // A spanning tree, then claimed to survive one edge fault.
    let o = ftspan(&["build", "--graph", "c8.txt", "--pipeline", "greedy", "--k", "100", "--out", "tree.json"], d);
    assert!(o.status.success(), "{}", stderr(&o));
    let mut tree: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.join("tree.json")).unwrap()).unwrap();
    assert_eq!(tree["edges"].as_array().unwrap().len(), 7);
    tree["claim"] = serde_json::json!({"alpha": 1, "beta": 2, "f": 1, "kind": "edge"});
    fs::write(d.join("tree.json"), tree.to_string()).unwrap();
    let o = ftspan(&["verify", "--graph", "c8.txt", "--spanner", "tree.json"], d);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert!(stderr(&o).starts_with("FAIL: observed inf"));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["witness"]["d_h"], serde_json::Value::Null);
}

#[test]
fn budget_refusal_and_sampling() {
    let dir = tempfile::tempdir().unwrap();
    let base = ["verify", "--generator", "gnp", "--n", "30", "--prob", "0.3", "--pipeline", "union-f", "--faults", "3"];
    let o = ftspan(&base, dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("budget"));
    let mut sampled = base.to_vec();
    sampled.extend(["--sample", "20", "--sample-seed", "5"]);
    let a = ftspan(&sampled, dir.path());
    let b = ftspan(&sampled, dir.path());
    assert!(a.status.success(), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    let report: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(report["counts"]["fault_sets"], 21);
}

#[test]
fn experiment_is_byte_identical_and_reportable() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let args = |out: &'static str| {
        vec![
            "experiment",
            "--generator",
            "gnp",
            "--n",
            "30",
            "--prob",
            "0.2",
            "--connected",
            "--seeds",
            "1-2",
            "--preset",
            "comparison",
            "--pipeline",
            "greedy",
            "--out",
            out,
        ]
    };
    let o = ftspan(&args("a.csv"), d);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).ends_with("10/10 pass\n"), "{}", stderr(&o));
    assert!(ftspan(&args("b.csv"), d).status.success());
    let a = fs::read(d.join("a.csv")).unwrap();
    assert_eq!(a, fs::read(d.join("b.csv")).unwrap());
    let header = String::from_utf8(a).unwrap().lines().next().unwrap().to_string();
    assert_eq!(header, "n,m,construction,params,spanner_edges,claimed_beta,observed_max_additive,pass,wall_time");

    let o = ftspan(&["report", "a.csv", "--construction", "alg2-bkmp6"], d);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("alg2-bkmp6") && text.ends_with("2/2 pass\n"), "{text}");

    let o = ftspan(&["report", "a.csv", "--construction", "missing"], d);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("no rows"));
}

#[test]
fn report_lists_failures_first_with_witness() {
    let dir = tempfile::tempdir().unwrap();
    let rows = r#"[
      {"n":5,"m":5,"construction":"greedy","params":"seed=1","spanner_edges":5,"claimed_beta":0,
       "observed_max_additive":0,"unbounded":false,"pass":true,"wall_time":0,"witness":null},
      {"n":5,"m":5,"construction":"tree","params":"seed=1","spanner_edges":4,"claimed_beta":2,
       "observed_max_additive":null,"unbounded":true,"pass":false,"wall_time":0,
       "witness":{"s":0,"t":1,"faults":[0],"d_g":4,"d_h":null}}
    ]"#;
    fs::write(dir.path().join("rows.json"), rows).unwrap();
    let o = ftspan(&["report", "rows.json"], dir.path());
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let first = text.lines().next().unwrap();
    assert!(first.starts_with("FAIL tree") && first.contains("d_H=inf"), "{text}");
    assert!(text.ends_with("1/2 pass\n"));
}

#[test]
fn decompose_prints_checked_blocks() {
    let dir = tempfile::tempdir().unwrap();
    let o =
        ftspan(&["decompose", "--generator", "cycle", "--n", "6", "--fail", "0-1", "--s", "0", "--t", "1"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let dec: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(dec["path"], serde_json::json!([0, 5, 4, 3, 2, 1]));
    assert_eq!(dec["blocks"].as_array().unwrap().len(), 1);
}
