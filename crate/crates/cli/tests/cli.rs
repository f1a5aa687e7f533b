use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_fasi"));
    c.env_remove("FASI_SEED");
    c
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("binary runs")
}

fn table(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    let mut rows = vec![r.headers().unwrap().iter().map(String::from).collect()];
    rows.extend(r.records().map(|x| x.unwrap().iter().map(String::from).collect()));
    rows
}

const CAL: &str = "id,group,label,score_1,score_2\nc1,F,2,0.1,0.9\nc2,F,1,0.3,0.7\nc3,F,1,0.6,0.4\n";
const TEST: &str = "id,group,label,score_1,score_2\nt1,F,,0.2,0.8\nt2,F,,0.5,0.5\n";

fn fixture() -> (TempDir, PathBuf, PathBuf) {
    let dir = TempDir::new().unwrap();
    let cal = write(dir.path(), "cal.csv", CAL);
    let test = write(dir.path(), "test.csv", TEST);
    (dir, cal, test)
}

fn rvalue(cal: &Path, test: &Path, out: &Path, extra: &[&str]) -> Output {
    run(bin()
        .args(["rvalue", "--cal"])
        .arg(cal)
        .arg("--test")
        .arg(test)
        .arg("--out")
        .arg(out)
        .args(extra))
}

#[test]
fn rvalue_fixture_standard_and_plus() {
    let (dir, cal, test) = fixture();
    let out = dir.path().join("r.csv");
    let o = rvalue(&cal, &test, &out, &["--class", "2", "--alpha", "0.5", "--variant", "standard"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let t = table(&out);
    assert_eq!(t[0], ["id", "group", "score", "raw_r", "mono_r", "decision"]);
    assert_eq!(t[1], ["t1", "F", "0.8", "0.5", "0.5", "2"]);
    assert_eq!(t[2], ["t2", "F", "0.5", "0.5", "0.5", "2"]);

    let o = rvalue(&cal, &test, &out, &["--class", "2", "--alpha", "0.5"]);
    assert_eq!(o.status.code(), Some(0));
    let t = table(&out);
    assert_eq!(&t[1][3..], ["0.5", "0.5", "2"]);
    assert_eq!(&t[2][3..], ["0.6", "0.6", "indecision"]);
}

#[test]
fn missing_score_column_is_a_format_error() {
    let (dir, cal, _) = fixture();
    let test = write(dir.path(), "bad.csv", "id,group,label,score_1\nt1,F,,0.2\n");
    let o = rvalue(&cal, &test, &dir.path().join("r.csv"), &["--class", "2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!String::from_utf8_lossy(&o.stderr).is_empty());
}

#[test]
fn out_of_range_score_is_a_validation_error() {
    let (dir, cal, _) = fixture();
    let test = write(dir.path(), "bad.csv", "id,group,label,score_1,score_2\nt1,F,,0.2,1.2\n");
    let o = rvalue(&cal, &test, &dir.path().join("r.csv"), &["--class", "2"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("score out of range"));
}

#[test]
fn alpha_one_decides_every_row() {
    let (dir, cal, test) = fixture();
    let out = dir.path().join("r.csv");
    let o = rvalue(&cal, &test, &out, &["--alpha", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let t = table(&out);
    assert!(t[1..].iter().all(|r| r[2] != "indecision"));
}

#[test]
fn selections_feed_evaluate() {
    let (dir, cal, test) = fixture();
    let sel = dir.path().join("sel.csv");
    assert_eq!(rvalue(&cal, &test, &sel, &["--alpha", "0.3"]).status.code(), Some(0));
    let truth = write(dir.path(), "truth.csv", "id,label\nt1,2\nt2,1\n");
    let out = dir.path().join("m.json");
    let o = run(bin()
        .args(["evaluate", "--selections"])
        .arg(&sel)
        .arg("--truth")
        .arg(&truth)
        .arg("--out")
        .arg(&out));
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(doc["m"], 2);
}

fn evaluate(dir: &Path, sel: &str, truth: &str) -> serde_json::Value {
    let s = write(dir, "sel.csv", sel);
    let t = write(dir, "truth.csv", truth);
    let out = dir.join("m.json");
    let o = run(bin().args(["evaluate", "--selections"]).arg(s).arg("--truth").arg(t).arg("--out").arg(&out));
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_str(&fs::read_to_string(out).unwrap()).unwrap()
}

fn cell<'a>(doc: &'a serde_json::Value, class: &str, group: &str) -> &'a serde_json::Value {
    doc["cells"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["class"] == class && c["group"] == group)
        .unwrap()
}

#[test]
fn evaluate_known_fsp() {
    let dir = TempDir::new().unwrap();
    let doc = evaluate(
        dir.path(),
        "id,group,decision\na,F,1\nb,F,1\nc,M,1\nd,M,1\ne,M,indecision\n",
        "id,label\na,1\nb,1\nc,1\nd,2\ne,2\n",
    );
    assert_eq!(cell(&doc, "1", "all")["fsp"], 0.25);
    assert_eq!(cell(&doc, "all", "all")["fsp_star"], 0.2);
    assert_eq!(cell(&doc, "1", "M")["fsp"], 0.5);
    assert_eq!(cell(&doc, "1", "F")["fsp"], 0.0);
    assert_eq!(doc["epi"], 0.2);
    for g in ["F", "M", "all"] {
        for c in ["1", "2", "all"] {
            cell(&doc, c, g);
        }
    }
}

#[test]
fn evaluate_empty_selection() {
    let dir = TempDir::new().unwrap();
    let doc = evaluate(
        dir.path(),
        "id,group,decision\na,F,indecision\nb,M,indecision\n",
        "id,label\na,1\nb,2\n",
    );
    assert_eq!(doc["epi"], 1.0);
    assert!(doc["cells"].as_array().unwrap().iter().all(|c| c["fsp"] == 0.0));
}

#[test]
fn evaluate_selected_without_truth_fails() {
    let dir = TempDir::new().unwrap();
    let s = write(dir.path(), "sel.csv", "id,group,decision\na,F,1\n");
    let t = write(dir.path(), "truth.csv", "id,label\nb,1\n");
    let o = run(bin().args(["evaluate", "--selections"]).arg(s).arg("--truth").arg(t));
    assert_eq!(o.status.code(), Some(3));
}

fn conformal(cal: &Path, test: &Path, out: &Path, alpha: &str) -> Vec<Vec<String>> {
    let o = run(bin()
        .args(["conformal", "--class", "2", "--alpha", alpha, "--cal"])
        .arg(cal)
        .arg("--test")
        .arg(test)
        .arg("--out")
        .arg(out));
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    table(out)
}

#[test]
fn conformal_fixture() {
    // Calibration null pool for class 2 is {0.9, 0.7, 0.4}.
    let dir = TempDir::new().unwrap();
    let cal = write(
        dir.path(),
        "cal.csv",
        "id,group,label,score_1,score_2\nc1,F,1,0.1,0.9\nc2,F,1,0.3,0.7\nc3,F,1,0.6,0.4\nc4,F,2,0,1\n",
    );
    let test = write(dir.path(), "test.csv", TEST);
    let t = conformal(&cal, &test, &dir.path().join("c.csv"), "0.75");
    assert_eq!(t[0], ["id", "group", "score", "p_value", "q_raw", "q_value", "reject"]);
    assert_eq!(&t[1][3..], ["0.5", "1", "0.75", "true"]);
    assert_eq!(&t[2][3..], ["0.75", "0.75", "0.75", "true"]);
    let t = conformal(&cal, &test, &dir.path().join("c.csv"), "0");
    assert!(t[1..].iter().all(|r| r[6] == "false"));
}

#[test]
fn conformal_matches_standard_rvalue_on_one_class() {
    let dir = TempDir::new().unwrap();
    let mut cal = String::from("id,group,label,score_1,score_2\n");
    let mut test = String::from("id,group,label,score_1,score_2\n");
    for i in 0..40 {
        let s = ((i * 37) % 101) as f64 / 101.0;
        cal.push_str(&format!("c{i},A,1,{},{s}\n", 1.0 - s));
    }
    for i in 0..25 {
        let s = ((i * 53 + 7) % 97) as f64 / 97.0;
        test.push_str(&format!("t{i},A,,{},{s}\n", 1.0 - s));
    }
    let cal = write(dir.path(), "cal.csv", &cal);
    let test = write(dir.path(), "test.csv", &test);
    for alpha in ["0.05", "0.2", "0.5", "0.9"] {
        let c = conformal(&cal, &test, &dir.path().join("c.csv"), alpha);
        let out = dir.path().join("r.csv");
        let o = rvalue(&cal, &test, &out, &["--class", "2", "--alpha", alpha, "--variant", "standard"]);
        assert_eq!(o.status.code(), Some(0));
        let r = table(&out);
        for (cr, rr) in c[1..].iter().zip(&r[1..]) {
            assert_eq!(cr[5], rr[4], "q-value vs monotone R-value");
            assert_eq!(cr[6] == "true", rr[5] == "2");
        }
    }
}

fn simulate(out: &Path, extra: &[&str], seed_env: Option<&str>) -> Output {
    let mut c = bin();
    c.args(["simulate", "--reps", "2", "--pi2f", "0.3,0.6", "--out"]).arg(out).args(extra);
    if let Some(s) = seed_env {
        c.env("FASI_SEED", s);
    }
    run(&mut c)
}

#[test]
fn simulate_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    assert_eq!(simulate(&a, &["--seed", "5"], None).status.code(), Some(0));
    assert_eq!(simulate(&b, &["--seed", "5", "--threads", "1"], None).status.code(), Some(0));
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let t = table(&a);
    assert_eq!(
        t[0],
        ["scenario", "method", "pi2f", "class", "group", "metric", "mean", "sd", "q05", "q95"]
    );
    let epi = t.iter().filter(|r| r[5] == "epi").count();
    assert_eq!(epi, 2 * 3);
}

#[test]
fn seed_environment_overrides_flag() {
    let dir = TempDir::new().unwrap();
    let (a, b, c) = (dir.path().join("a.csv"), dir.path().join("b.csv"), dir.path().join("c.csv"));
    simulate(&a, &["--seed", "9"], None);
    simulate(&b, &["--seed", "1"], Some("9"));
    simulate(&c, &["--seed", "1"], None);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_ne!(fs::read(&a).unwrap(), fs::read(&c).unwrap());
}

#[test]
fn simulate_single_replication_smoke() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("s.csv");
    let start = std::time::Instant::now();
    let o = run(bin()
        .args(["simulate", "--scenario", "2", "--reps", "1", "--pi2f", "0.5", "--methods", "fasi,fcc,rcc,oracle", "--out"])
        .arg(&out));
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(start.elapsed().as_secs_f64() < 5.0 * if cfg!(debug_assertions) { 6.0 } else { 1.0 });
    assert!(String::from_utf8_lossy(&o.stderr).contains("pi2f"));
}

#[test]
fn bad_arguments_exit_two() {
    let o = run(bin().args(["rvalue", "--cal"]));
    assert_eq!(o.status.code(), Some(2));
    let o = run(bin().args(["simulate", "--methods", "magic"]));
    assert_eq!(o.status.code(), Some(2));
}
