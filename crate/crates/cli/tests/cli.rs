use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_c2knn"))
        .args(args)
        .env("RUST_LOG", "error")
        .output()
        .expect("spawn c2knn")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

/// 60 users in three taste groups, 25 positive ratings each.
fn ratings(dir: &TempDir) -> PathBuf {
    let mut text = String::from("user,item,rating,timestamp\n");
    for u in 0..60 {
        let base = (u % 3) * 40;
        for j in 0..25 {
            let item = base + (u * 7 + j * 3) % 40;
            writeln!(text, "u{u},i{item},{},{}", 4 + (j % 2), 1000 + j).unwrap();
        }
        writeln!(text, "u{u},junk{u},1,0").unwrap();
    }
    let path = dir.path().join("ratings.csv");
    std::fs::write(&path, text).unwrap();
    path
}

fn json(o: &Output) -> serde_json::Value {
    assert!(
        o.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    serde_json::from_slice(&o.stdout).expect("json report")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn zero_functions_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let input = ratings(&dir);
    assert_eq!(code(&run(&["build", "--input", s(&input), "--t", "0"])), 2);
    assert_eq!(code(&run(&["build", "--input", s(&input), "--k", "0"])), 2);
    assert_eq!(code(&run(&["build", "--bogus"])), 2);
}

#[test]
fn missing_input_is_a_usage_error() {
    let o = run(&["build", "--input", "/nonexistent/ratings.csv"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("does not exist"));
}

#[test]
fn malformed_input_is_a_runtime_error() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("bad.csv");
    std::fs::write(&path, "1,2,3\n1,2,notanumber\n").unwrap();
    assert_eq!(code(&run(&["build", "--input", s(&path)])), 1);
}

#[test]
fn exact_bruteforce_evaluates_every_pair_once() {
    let dir = TempDir::new().unwrap();
    let input = ratings(&dir);
    let r = json(&run(&[
        "build",
        "--input",
        s(&input),
        "--algo",
        "bruteforce",
        "--exact-sim",
        "--k",
        "5",
    ]));
    let n = r["dataset"]["users"].as_u64().unwrap();
    assert_eq!(n, 60);
    assert_eq!(r["oracle_invocations"].as_u64().unwrap(), n * (n - 1) / 2);
    assert_eq!(r["edges"].as_u64().unwrap(), n * 5);
}

#[test]
fn build_writes_graph_report_and_clusters() {
    let dir = TempDir::new().unwrap();
    let input = ratings(&dir);
    let graph = dir.path().join("g.txt");
    let report = dir.path().join("r.json");
    let clusters = dir.path().join("clusters.txt");
    let o = run(&[
        "build",
        "--k",
        "4",
        "--b",
        "16",
        "--N",
        "15",
        "--audit",
        "--input",
        s(&input),
        "-o",
        s(&graph),
        "--report",
        s(&report),
        "--dump-clusters",
        s(&clusters),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(r["algorithm"], "c2");
    assert_eq!(r["params"]["N"], 15);
    assert!(!r["audit"].as_array().unwrap().is_empty());
    let text = std::fs::read_to_string(&graph).unwrap();
    assert_eq!(text.lines().count(), 60);
    let dump = std::fs::read_to_string(&clusters).unwrap();
    let covered: usize = dump
        .lines()
        .map(|l| {
            l.split_whitespace()
                .nth(3)
                .unwrap()
                .parse::<usize>()
                .unwrap()
        })
        .sum();
    assert_eq!(covered, 60 * 8);
}

#[test]
fn dump_clusters_needs_c2() {
    let dir = TempDir::new().unwrap();
    let input = ratings(&dir);
    let o = run(&[
        "build",
        "--algo",
        "hyrec",
        "--input",
        s(&input),
        "--dump-clusters",
        "x.txt",
    ]);
    assert_eq!(code(&o), 2);
}

#[test]
fn flags_override_config_which_overrides_defaults() {
    let dir = TempDir::new().unwrap();
    let input = ratings(&dir);
    let cfg = dir.path().join("c2.conf");
    std::fs::write(&cfg, "# tuned\nk = 6\nmax-iters = 4\nseed=9\n").unwrap();
    let r = json(&run(&[
        "build",
        "--input",
        s(&input),
        "--config",
        s(&cfg),
        "--k",
        "3",
    ]));
    assert_eq!(r["params"]["k"], 3);
    assert_eq!(r["params"]["max_iters"], 4);
    assert_eq!(r["params"]["seed"], 9);
    assert_eq!(r["params"]["t"], 8);
}

#[test]
fn unknown_config_key_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let input = ratings(&dir);
    let cfg = dir.path().join("c2.conf");
    std::fs::write(&cfg, "colour = blue\n").unwrap();
    assert_eq!(
        code(&run(&["build", "--input", s(&input), "--config", s(&cfg)])),
        2
    );
}

#[test]
fn snapshot_and_ratings_give_the_same_graph() {
    let dir = TempDir::new().unwrap();
    let input = ratings(&dir);
    let snap = dir.path().join("data.snapshot");
    assert!(
        run(&["dataset", "prepare", "--input", s(&input), "-o", s(&snap)])
            .status
            .success()
    );
    let a = dir.path().join("a.bin");
    let b = dir.path().join("b.bin");
    assert!(
        run(&["build", "--input", s(&input), "--k", "5", "-o", s(&a)])
            .status
            .success()
    );
    assert!(
        run(&["build", "--input", s(&snap), "--k", "5", "-o", s(&b)])
            .status
            .success()
    );
    assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
}

#[test]
fn recommend_lists_unseen_items() {
    let dir = TempDir::new().unwrap();
    let input = ratings(&dir);
    let graph = dir.path().join("g.txt");
    assert!(run(&[
        "build",
        "--input",
        s(&input),
        "--k",
        "5",
        "--exact-sim",
        "-o",
        s(&graph)
    ])
    .status
    .success());
    let o = run(&[
        "recommend",
        "--input",
        s(&input),
        "--graph",
        s(&graph),
        "--user",
        "u0",
        "-n",
        "3",
        "--k",
        "5",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = String::from_utf8(o.stdout).unwrap();
    assert_eq!(out.lines().count(), 3);
    for line in out.lines() {
        let item = line.split('\t').next().unwrap();
        assert!(item.starts_with('i'));
    }
    let o = run(&[
        "recommend",
        "--input",
        s(&input),
        "--graph",
        s(&graph),
        "--user",
        "nobody",
        "--k",
        "5",
    ]);
    assert_eq!(code(&o), 2);
}

#[test]
fn eval_reports_quality_and_recall() {
    let dir = TempDir::new().unwrap();
    let input = ratings(&dir);
    let r = json(&run(&[
        "eval",
        "--input",
        s(&input),
        "--k",
        "5",
        "--folds",
        "3",
        "--n-rec",
        "10",
    ]));
    let q = r["quality"].as_f64().unwrap();
    assert!((0.0..=1.0 + 1e-12).contains(&q));
    let recall = r["recall"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&recall));
    let exact = json(&run(&[
        "eval",
        "--input",
        s(&input),
        "--algo",
        "bruteforce",
        "--exact-sim",
        "--k",
        "5",
        "--folds",
        "0",
    ]));
    assert!((exact["quality"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn sweep_emits_one_row_per_point() {
    let dir = TempDir::new().unwrap();
    let input = ratings(&dir);
    let o = run(&[
        "sweep",
        "--input",
        s(&input),
        "--k",
        "4",
        "--t-grid",
        "1,2,4",
        "--b-grid",
        "8,32",
        "--N-grid",
        "20",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = String::from_utf8(o.stdout).unwrap();
    let mut lines = out.lines();
    assert_eq!(
        lines.next().unwrap(),
        "t,b,N,seconds,quality,oracle_invocations,clusters"
    );
    assert_eq!(lines.count(), 6);
}

#[test]
fn verify_theorems_outputs() {
    let r = json(&run(&["verify-theorems", "--trials", "500"]));
    assert_eq!(r["theorem1"].as_array().unwrap().len(), 3);
    assert_eq!(r["theorem2"][0]["ell_union"], 256);
    let o = run(&["verify-theorems", "--trials", "200", "--format", "markdown"]);
    assert!(String::from_utf8(o.stdout)
        .unwrap()
        .contains("| 256 | 4096 | 0.5 |"));
    assert_eq!(code(&run(&["verify-theorems", "--trials", "0"])), 2);
}

#[test]
fn every_algorithm_builds_a_full_graph() {
    let dir = TempDir::new().unwrap();
    let input = ratings(&dir);
    for algo in ["c2", "bruteforce", "hyrec", "nndescent", "lsh"] {
        let r = json(&run(&["bench", algo, "--input", s(&input), "--k", "5"]));
        assert_eq!(r["algorithm"], algo);
        assert!(
            r["quality"].as_f64().unwrap() > 0.5,
            "{algo}: {}",
            r["quality"]
        );
    }
}
