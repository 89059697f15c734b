use std::path::Path;
use std::process::{Command, Output};

use fhg_core::io::read_instance;
use fhg_core::oracles::optimal_partition;
use fhg_core::rational::ratio;
use fhg_core::sqrt2::{cmp_rational, dissolution_floor};
use fhg_core::Rational;
use serde_json::Value;

fn fhg(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fhg")).args(args).current_dir(dir).output().expect("binary runs")
}

fn ok(out: &Output) -> String {
    assert!(out.status.success(), "exit {:?}\n{}", out.status.code(), String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn weight(inst: &Value, i: u64, j: u64) -> Option<String> {
    inst["weights"]
        .as_array()?
        .iter()
        .find(|e| e["i"] == i && e["j"] == j)
        .map(|e| e["w"].as_str().unwrap().to_string())
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = r.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header.join(","), "instance_id,alg,mode,arrival,welfare,opt,ratio,samples,stderr,seed");
    r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect()
}

#[test]
fn gen_star_and_bistar() {
    let dir = tempfile::tempdir().unwrap();
    let star: Value = serde_json::from_str(&ok(&fhg(&["gen", "star", "--I", "1,2", "--eps", "1/2", "--x", "5"], dir.path()))).unwrap();
    assert_eq!(star["n"], 4);
    assert_eq!(weight(&star, 0, 2).as_deref(), Some("2/1"));
    assert_eq!(weight(&star, 0, 3).as_deref(), Some("4/1"));
    for (i, j) in [(0, 1), (1, 2), (1, 3), (2, 3)] {
        assert_eq!(weight(&star, i, j).as_deref(), Some("-32/1"));
    }
    let bi: Value = serde_json::from_str(&ok(&fhg(
        &["gen", "bistar", "--I", "1", "--J", "2", "--eps", "1/2", "--x", "5"],
        dir.path(),
    )))
    .unwrap();
    assert_eq!(weight(&bi, 0, 1).as_deref(), Some("8/1"));
    let spec: Value =
        serde_json::from_str(&ok(&fhg(&["gen", "bistar", "--I", "1", "--J", "2", "--eps", "1/2", "--spec"], dir.path())))
            .unwrap();
    assert_eq!(spec["kind"], "bistar");
    assert_eq!(spec["x"], 5);
}

#[test]
fn gen_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["a.json", "b.json"] {
        ok(&fhg(&["gen", "tree", "--n", "5", "--seed", "7", "--out", name], dir.path()));
    }
    let a = std::fs::read(dir.path().join("a.json")).unwrap();
    assert_eq!(a, std::fs::read(dir.path().join("b.json")).unwrap());
    ok(&fhg(&["gen", "tree", "--n", "5", "--seed", "8", "--out", "c.json"], dir.path()));
    assert_ne!(a, std::fs::read(dir.path().join("c.json")).unwrap());
}

#[test]
fn gen_errors() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&fhg(&["gen", "star", "--I", "1", "--eps", "2/3"], dir.path())), 2);
    assert_eq!(code(&fhg(&["gen", "random", "--n", "3", "--range", "5:1"], dir.path())), 2);
    assert_eq!(code(&fhg(&["gen", "random"], dir.path())), 2);
    assert_eq!(code(&fhg(&["gen", "random", "--n", "3", "--out", "no/such/dir/x.json"], dir.path())), 3);
}

#[test]
fn run_pair() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("pair.json"), r#"{"n": 2, "weights": [{"i": 0, "j": 1, "w": "5"}]}"#).unwrap();
    for arrival in ["order:0,1", "order:1,0", "random", "worst"] {
        let rows = csv_rows(&ok(&fhg(&["run", "pair.json", "--alg", "greedy", "--arrival", arrival], dir.path())));
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0][0], "pair");
        assert_eq!(rows[0][6], "1/1", "{arrival}");
    }
    assert_eq!(code(&fhg(&["run", "pair.json", "--alg", "greedy", "--arrival", "order:0,0"], dir.path())), 2);
    assert_eq!(code(&fhg(&["run", "pair.json", "--alg", "nope"], dir.path())), 2);
    assert_eq!(code(&fhg(&["run", "missing.json", "--alg", "greedy"], dir.path())), 3);
}

#[test]
fn run_efgt_sample_phase_warning() {
    let dir = tempfile::tempdir().unwrap();
    ok(&fhg(&["gen", "random", "--n", "3", "--seed", "1", "--out", "r3.json"], dir.path()));
    let out = fhg(&["run", "r3.json", "--alg", "efgt:k=3", "--expect", "exact"], dir.path());
    let rows = csv_rows(&ok(&out));
    assert_eq!(rows[0][4], "0/1");
    assert!(String::from_utf8_lossy(&out.stderr).contains("sample phase"));
}

#[test]
fn run_lifted_threshold_against_brute_force() {
    let dir = tempfile::tempdir().unwrap();
    ok(&fhg(&["gen", "random", "--n", "7", "--seed", "2", "--out", "r7.json"], dir.path()));
    let out = fhg(
        &["run", "r7.json", "--alg", "lift:dissolve-threshold", "--mode", "dissolve", "--format", "json"],
        dir.path(),
    );
    let report: Value = serde_json::from_str(&ok(&out)).unwrap();
    let row = &report["rows"][0];
    let g = read_instance(&dir.path().join("r7.json")).unwrap().into_symmetric();
    let (_, opt) = optimal_partition(&g).unwrap();
    assert_eq!(row["opt"].as_str().unwrap(), opt.to_string());
    let welfare: Rational = row["welfare"].as_str().unwrap().parse().unwrap();
    let r: Rational = row["ratio"].as_str().unwrap().parse().unwrap();
    assert_eq!(r, &welfare / &opt);
    let above = cmp_rational(&r, &dissolution_floor()).is_ge();
    assert_eq!(row["above_dissolution_floor"], above);
    assert!(above);
    assert_eq!(report["flags"][0], "run");
    assert!(String::from_utf8_lossy(&out.stderr).contains("(exact)"));
}

#[test]
fn exact_refuses_large_instances() {
    let dir = tempfile::tempdir().unwrap();
    ok(&fhg(&["gen", "random", "--n", "9", "--out", "r9.json"], dir.path()));
    let out = fhg(&["run", "r9.json", "--alg", "greedy"], dir.path());
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("cap 8"));
    let rows = csv_rows(&ok(&fhg(
        &["run", "r9.json", "--alg", "greedy", "--expect", "mc", "--samples", "200", "--seed", "5"],
        dir.path(),
    )));
    assert_eq!(rows[0][7], "200");
    assert_eq!(rows[0][9], "5");
}

#[test]
fn config_overrides_warn() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.toml"), "seed = 3\n[caps]\nexact = 9\n").unwrap();
    std::fs::write(dir.path().join("bad.toml"), "speed = 3\n").unwrap();
    ok(&fhg(&["gen", "random", "--n", "9", "--out", "r9.json"], dir.path()));
    let out = fhg(&["--config", "c.toml", "run", "r9.json", "--alg", "greedy", "--expect", "mc", "--samples", "50"], dir.path());
    let rows = csv_rows(&ok(&out));
    assert_eq!(rows[0][9], "3");
    assert!(String::from_utf8_lossy(&out.stderr).contains("cap exact overridden to 9"));
    assert_eq!(code(&fhg(&["--config", "bad.toml", "verify", "vara"], dir.path())), 2);
    assert_eq!(code(&fhg(&["--config", "none.toml", "verify", "vara"], dir.path())), 3);
}

#[test]
fn sweep_is_sorted_and_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::create_dir(dir.path().join("inst")).unwrap();
    for (n, seed) in [("4", "1"), ("5", "2")] {
        ok(&fhg(&["gen", "random", "--n", n, "--seed", seed, "--out", &format!("inst/g{n}.json")], dir.path()));
    }
    let args = ["sweep", "inst", "--random", "3", "--n", "5", "--algs", "greedy,efgt:k=2,lift:greedy", "--seed", "9"];
    let first = ok(&fhg(&args, dir.path()));
    assert_eq!(first, ok(&fhg(&args, dir.path())));
    let rows = csv_rows(&first);
    assert_eq!(rows.len(), 15);
    let keys: Vec<(String, String)> = rows.iter().map(|r| (r[0].clone(), r[1].clone())).collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
    assert_eq!(rows[0][0], "g4");
    assert_eq!(code(&fhg(&["sweep", "--algs", "greedy"], dir.path())), 2);
}

#[test]
fn adversary_command() {
    let dir = tempfile::tempdir().unwrap();
    let out = fhg(&["adversary", "--alg", "dissolve-threshold", "--gamma", "1/5", "--out", "t.json"], dir.path());
    let summary: Value = serde_json::from_str(&ok(&out)).unwrap();
    let bound: Rational = summary["ratio_upper_bound"].as_str().unwrap().parse().unwrap();
    assert!(bound < ratio(1, 5));
    let bundle: Value = serde_json::from_slice(&std::fs::read(dir.path().join("t.json")).unwrap()).unwrap();
    assert_eq!(bundle["ratio_upper_bound"], summary["ratio_upper_bound"]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("ratio upper bound"));

    let out = fhg(&["adversary", "--alg", "greedy", "--waves", "50", "--out", "g.json"], dir.path());
    let summary: Value = serde_json::from_str(&ok(&out)).unwrap();
    assert_eq!(summary["outcome"]["kind"], "policy_never_dissolves");

    assert_eq!(code(&fhg(&["adversary", "--alg", "greedy", "--gamma", "1/12"], dir.path())), 2);
    assert_eq!(code(&fhg(&["adversary", "--alg", "greedy", "--waves", "0"], dir.path())), 2);
}

#[test]
fn verify_suites() {
    let dir = tempfile::tempdir().unwrap();
    let out: Value = serde_json::from_str(&ok(&fhg(&["verify", "vara", "--beta", "18/100"], dir.path()))).unwrap();
    assert_eq!(out["passed"], true);
    assert!(out["suites"][0]["details"]["results"][0]["horizon"]["finite"].is_u64());
    let out: Value = serde_json::from_str(&ok(&fhg(&["verify", "hr", "--f", "one", "--maxI", "6"], dir.path()))).unwrap();
    assert_eq!(out["suites"][0]["checked"], 63);
    ok(&fhg(&["verify", "thm4.1", "--n", "7", "--cases", "500"], dir.path()));
    ok(&fhg(&["verify", "prefix", "star-welfare", "--out", "summary.json"], dir.path()));
    assert!(dir.path().join("summary.json").exists());

    // too few steps to see the horizon: reported as a failure
    let out = fhg(&["verify", "vara", "--beta", "18/100", "--max-steps", "5"], dir.path());
    assert_eq!(code(&out), 1);
    let summary: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(summary["passed"], false);
    assert!(!summary["suites"][0]["failures"].as_array().unwrap().is_empty());

    assert_eq!(code(&fhg(&["verify", "nope"], dir.path())), 2);
}

#[test]
fn star_prob_command() {
    let dir = tempfile::tempdir().unwrap();
    let out: Value = serde_json::from_str(&ok(&fhg(
        &["star-prob", "--I", "1,2", "--eps", "1/2", "--f", "one", "--check", "greedy,star:f=one"],
        dir.path(),
    )))
    .unwrap();
    assert_eq!(out["h"], "1/1");
    assert_eq!(out["r"], "2/3");
    assert_eq!(out["h_minus_r"], "1/3");
    for c in out["conversion"].as_array().unwrap() {
        let slack: Rational = c["check"]["slack"].as_str().unwrap().parse().unwrap();
        assert!(!slack.is_negative());
    }
    let out: Value = serde_json::from_str(&ok(&fhg(
        &["star-prob", "--I", "1", "--J", "2", "--eps", "1/4", "--kind", "bistar", "--check", "efgt:k=3"],
        dir.path(),
    )))
    .unwrap();
    assert_eq!(out["spec"]["kind"], "bistar");
    assert_eq!(code(&fhg(&["star-prob", "--I", "1,2,3,4,5,6,7,8,9", "--eps", "1/2"], dir.path())), 2);
}
