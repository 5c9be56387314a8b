use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use rcl::experiment::{ExperimentConfig, MetricsTable};

fn rcl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rcl")).args(args).output().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn gen_small(dir: &Path, name: &str, homo: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    let out = rcl(&["gen", "--homo", homo, "--nodes", "200", "--classes", "5", "--avg-degree", "6", "--seed", "7", "--out", s(&path)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    path
}

#[test]
fn gen_is_reproducible_and_validates_arguments() {
    let dir = tempfile::tempdir().unwrap();
    let out = rcl(&["gen", "--homo", "0.5", "--nodes", "2000", "--seed", "7", "--out", s(&dir.path().join("a.graph"))]);
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    let h: f64 = stdout
        .lines()
        .find_map(|l| l.strip_prefix("empirical homophily "))
        .unwrap()
        .parse()
        .unwrap();
    assert!((h - 0.5).abs() <= 0.03);
    rcl(&["gen", "--homo", "0.5", "--nodes", "2000", "--seed", "7", "--out", s(&dir.path().join("b.graph"))]);
    for ext in ["graph", "difficulty"] {
        let a = fs::read(dir.path().join(format!("a.{ext}"))).unwrap();
        let b = fs::read(dir.path().join(format!("b.{ext}"))).unwrap();
        assert_eq!(a, b);
    }
    let bad = rcl(&["gen", "--homo", "1.5", "--out", s(&dir.path().join("c.graph"))]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(!dir.path().join("c.graph").exists());
}

#[test]
fn train_writes_rows_traces_and_config() {
    let dir = tempfile::tempdir().unwrap();
    let data = gen_small(dir.path(), "g.graph", "0.5");
    let cfg_file = dir.path().join("base.cfg");
    fs::write(&cfg_file, "# base\nepochs=25\ngamma=0.25\nmethods=vanilla\n").unwrap();
    let out_dir = dir.path().join("run");
    let out = rcl(&[
        "train", "--dataset", s(&data), "--config", s(&cfg_file), "--method", "rcl,vanilla", "--seeds", "0-2",
        "--gamma", "0.5", "--out", s(&out_dir),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("rcl-g: test") && stdout.contains(" ± "));

    let table = MetricsTable::from_csv(&fs::read_to_string(out_dir.join("metrics.csv")).unwrap()).unwrap();
    assert_eq!(table.rows.len(), 6);
    assert!(table.rows.iter().all(|r| (0.0..=1.0).contains(&r.test_acc) && r.noise_ratio == 0.0));
    let mut traces: Vec<_> = fs::read_dir(out_dir.join("traces"))
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    traces.sort();
    assert_eq!(traces, ["rcl-g-s0.csv", "rcl-g-s1.csv", "rcl-g-s2.csv"]);

    let effective = ExperimentConfig::load(out_dir.join("config.txt")).unwrap();
    assert_eq!(effective.rcl.epochs, 25);
    assert_eq!(effective.rcl.gamma, 0.5);
    assert_eq!(effective.seeds, vec![0, 1, 2]);
    assert_eq!(effective.methods.len(), 2);

    let plot = dir.path().join("plot.csv");
    let out = rcl(&["trace-plot", "--traces", s(&out_dir.join("traces")), "--out", s(&plot)]);
    assert!(out.status.success());
    let text = fs::read_to_string(plot).unwrap();
    assert!(text.starts_with("run_id,iter,series,value\n"));
    assert!(text.contains("rcl-g-s1,25,frac_hard,"));
}

#[test]
fn attack_writes_one_file_per_ratio() {
    let dir = tempfile::tempdir().unwrap();
    let data = gen_small(dir.path(), "g.graph", "0.6");
    let base = rcl::graph::load_graph(&data).unwrap();
    let run = |name: &str| {
        let out_dir = dir.path().join(name);
        let out = rcl(&["attack", "--dataset", s(&data), "--ratios", "0.1:1.0:0.1", "--seed", "4", "--out", s(&out_dir)]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        out_dir
    };
    let a = run("a");
    let b = run("b");
    let graphs: Vec<_> = fs::read_dir(&a)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "graph"))
        .collect();
    assert_eq!(graphs.len(), 10);
    let half = rcl::graph::load_graph(a.join("g.r0.5.graph")).unwrap();
    assert_eq!(half.num_edges(), base.num_edges() * 3 / 2);
    for g in graphs {
        let name = g.file_name().unwrap();
        assert_eq!(fs::read(&g).unwrap(), fs::read(b.join(name)).unwrap());
    }
}

#[test]
fn sweeps_cover_the_cross_product() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("homo");
    let out = rcl(&[
        "sweep", "--axis", "homo", "--values", "0.3,0.6,0.9", "--nodes", "200", "--classes", "5", "--avg-degree", "6",
        "--method", "rcl,vanilla", "--seeds", "0,1", "--epochs", "20", "--out", s(&out_dir),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let table = MetricsTable::from_csv(&fs::read_to_string(out_dir.join("metrics.csv")).unwrap()).unwrap();
    assert_eq!(table.rows.len(), 12);
    let summary = fs::read_to_string(out_dir.join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 1 + 6);

    let out_dir = dir.path().join("pace");
    let out = rcl(&[
        "sweep", "--axis", "pace", "--values", "1:5:1", "--nodes", "200", "--classes", "5", "--avg-degree", "6",
        "--seeds", "0,1", "--epochs", "20", "--out", s(&out_dir),
    ]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("std of per-pace mean test accuracy"));
    let table = MetricsTable::from_csv(&fs::read_to_string(out_dir.join("metrics.csv")).unwrap()).unwrap();
    assert_eq!(table.rows.len(), 10);

    let data = gen_small(dir.path(), "g.graph", "0.6");
    let out_dir = dir.path().join("ratio");
    let out = rcl(&[
        "sweep", "--axis", "ratio", "--values", "0,1", "--dataset", s(&data), "--method", "vanilla", "--seeds", "3",
        "--epochs", "20", "--out", s(&out_dir),
    ]);
    assert!(out.status.success());
    let table = MetricsTable::from_csv(&fs::read_to_string(out_dir.join("metrics.csv")).unwrap()).unwrap();
    let ratios: Vec<f64> = table.rows.iter().map(|r| r.noise_ratio).collect();
    assert_eq!(ratios, [0.0, 1.0]);
    assert!(table.rows[1].homo.unwrap() < table.rows[0].homo.unwrap());
}

#[test]
fn failed_runs_are_recorded_and_set_the_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let data = gen_small(dir.path(), "g.graph", "0.5");
    let out_dir = dir.path().join("run");
    // A learning rate this large overflows the weights within a few steps.
    let out = rcl(&[
        "train", "--dataset", s(&data), "--method", "vanilla", "--seeds", "0,1", "--lr", "1e300", "--epochs", "20",
        "--out", s(&out_dir),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let failures = fs::read_to_string(out_dir.join("failures.csv")).unwrap();
    assert_eq!(failures.lines().count(), 3);
    assert!(failures.contains("vanilla-g-s1,"));
    let table = MetricsTable::from_csv(&fs::read_to_string(out_dir.join("metrics.csv")).unwrap()).unwrap();
    assert!(table.rows.is_empty());

    let out = rcl(&["train", "--dataset", s(&dir.path().join("missing.graph")), "--out", s(&out_dir)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.graph"));
}
