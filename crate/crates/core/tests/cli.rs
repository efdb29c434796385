//! End-to-end checks of the command-line interface: flag validation, file
//! formats, exit codes, and byte determinism.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::tempdir;

fn spatnet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spatnet"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn gen_uniform(dir: &Path, n: usize, seed: u64) -> String {
    let path = dir.join(format!("p{n}_{seed}.csv"));
    let out = spatnet(&[
        "gen-points",
        "--n",
        &n.to_string(),
        "--dim",
        "2",
        "--mode",
        "uniform",
        "--seed",
        &seed.to_string(),
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    path.to_str().unwrap().to_string()
}

#[test]
fn gen_points_uniform_writes_deterministic_csv() {
    let dir = tempdir().unwrap();
    let a = gen_uniform(dir.path(), 50, 7);
    let text = fs::read_to_string(&a).unwrap();
    assert!(text.starts_with("id,x0,x1\n"));
    assert_eq!(text.lines().count(), 51);
    for line in text.lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields.len(), 3);
        for c in &fields[1..] {
            let v: f64 = c.parse().unwrap();
            assert!((0.0..1.0).contains(&v));
        }
    }
    let b = dir.path().join("again.csv");
    let out = spatnet(&[
        "gen-points",
        "--n",
        "50",
        "--dim",
        "2",
        "--mode",
        "uniform",
        "--seed",
        "7",
        "--out",
        b.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn gen_points_poisson_disk_keeps_min_distance() {
    let dir = tempdir().unwrap();
    let path = dir.path().join("pd.csv");
    let out = spatnet(&[
        "gen-points",
        "--dim",
        "2",
        "--mode",
        "poisson-disk",
        "--radius",
        "0.2",
        "--seed",
        "1",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let cloud = spatnet::io::read_points_csv(&path).unwrap();
    assert!(cloud.n() >= 2);
    for i in 0..cloud.n() {
        for j in i + 1..cloud.n() {
            assert!(cloud.distance(i, j) >= 0.2);
        }
    }
}

#[test]
fn gen_points_flag_validation() {
    let dir = tempdir().unwrap();
    let out_arg = dir.path().join("x.csv");
    let out_arg = out_arg.to_str().unwrap();
    let bad = spatnet(&[
        "gen-points",
        "--dim",
        "2",
        "--mode",
        "poisson-disk",
        "--radius",
        "0.6",
        "--seed",
        "1",
        "--out",
        out_arg,
    ]);
    assert_eq!(code(&bad), 2);
    assert!(stderr(&bad).contains("radius"), "{}", stderr(&bad));

    let bad = spatnet(&[
        "gen-points",
        "--n",
        "10",
        "--dim",
        "2",
        "--mode",
        "uniform",
        "--radius",
        "0.1",
        "--seed",
        "1",
        "--out",
        out_arg,
    ]);
    assert_eq!(code(&bad), 2);
    assert!(stderr(&bad).contains("radius"));

    let bad = spatnet(&[
        "gen-points",
        "--dim",
        "2",
        "--mode",
        "poisson-disk",
        "--seed",
        "1",
        "--out",
        out_arg,
    ]);
    assert_eq!(code(&bad), 2);

    let bad = spatnet(&[
        "gen-points",
        "--dim",
        "2",
        "--mode",
        "uniform",
        "--seed",
        "1",
        "--out",
        out_arg,
    ]);
    assert_eq!(code(&bad), 2);
}

#[test]
fn sample_completes_and_reruns_byte_identically() {
    let dir = tempdir().unwrap();
    let points = gen_uniform(dir.path(), 60, 9);
    let run = |tag: &str| -> (String, String, String) {
        let e = dir.path().join(format!("e{tag}.tsv"));
        let t = dir.path().join(format!("t{tag}.csv"));
        let m = dir.path().join(format!("m{tag}.json"));
        let out = spatnet(&[
            "sample",
            "--degrees",
            "regular:3",
            "--points",
            &points,
            "--target",
            "normal:mu=0.2,sigma=0.03,lo=0.05,hi=0.35",
            "--seed",
            "12345",
            "--out-edges",
            e.to_str().unwrap(),
            "--out-trace",
            t.to_str().unwrap(),
            "--out-meta",
            m.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        assert_eq!(stdout(&out), "status complete\n");
        (
            fs::read_to_string(e).unwrap(),
            fs::read_to_string(t).unwrap(),
            fs::read_to_string(m).unwrap(),
        )
    };
    let (e1, t1, m1) = run("a");
    assert_eq!(e1.lines().count(), 90);
    for line in e1.lines() {
        let f: Vec<&str> = line.split('\t').collect();
        assert_eq!(f.len(), 3);
        let i: usize = f[0].parse().unwrap();
        let j: usize = f[1].parse().unwrap();
        assert!((1..=60).contains(&i) && (1..=60).contains(&j) && i != j);
        let r: f64 = f[2].parse().unwrap();
        assert!(r > 0.0);
    }
    assert_eq!(t1.lines().count(), 91);
    assert!(t1.starts_with("k,alpha,r,Z\n"));

    let meta: serde_json::Value = serde_json::from_str(&m1).unwrap();
    assert_eq!(meta["schema"], 1);
    assert_eq!(meta["status"], "complete");
    assert_eq!(meta["n"], 60);
    assert_eq!(meta["m"], 90);
    assert_eq!(meta["edges_placed"], 90);
    assert_eq!(meta["gamma"], 1.0);
    assert_eq!(meta["seed"], 12345);
    assert!(meta["C_estimate"].as_f64().unwrap() > 1.0);
    assert!(meta["d_K"].as_f64().unwrap() >= 0.0);
    assert!(meta["wall_time_ms"].is_null());

    let (e2, t2, m2) = run("b");
    assert_eq!(e1, e2);
    assert_eq!(t1, t2);
    assert_eq!(m1, m2);
}

#[test]
fn sample_gamma_early_stop() {
    let dir = tempdir().unwrap();
    let points = gen_uniform(dir.path(), 60, 9);
    let e = dir.path().join("e.tsv");
    let m = dir.path().join("m.json");
    let out = spatnet(&[
        "sample",
        "--degrees",
        "regular:3",
        "--points",
        &points,
        "--target",
        "normal:mu=0.2,sigma=0.03,lo=0.05,hi=0.35",
        "--gamma",
        "0.5",
        "--seed",
        "4",
        "--out-edges",
        e.to_str().unwrap(),
        "--out-trace",
        dir.path().join("t.csv").to_str().unwrap(),
        "--out-meta",
        m.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(stdout(&out), "status early_stop\n");
    let meta: serde_json::Value = serde_json::from_str(&fs::read_to_string(&m).unwrap()).unwrap();
    assert_eq!(meta["status"], "early_stop");
    assert_eq!(meta["edges_placed"], 45);
    assert!(meta["d_K"].as_f64().unwrap() >= 0.0);
    assert_eq!(fs::read_to_string(&e).unwrap().lines().count(), 45);
}

#[test]
fn sample_rejects_non_graphical_degrees() {
    let dir = tempdir().unwrap();
    let points = gen_uniform(dir.path(), 4, 3);
    let degrees = dir.path().join("d.txt");
    fs::write(&degrees, "3\n3\n3\n1\n").unwrap();
    let out = spatnet(&[
        "sample",
        "--degrees",
        degrees.to_str().unwrap(),
        "--points",
        &points,
        "--target",
        "uniform:a=0,b=0.5",
        "--seed",
        "1",
        "--out-edges",
        dir.path().join("e").to_str().unwrap(),
        "--out-trace",
        dir.path().join("t").to_str().unwrap(),
        "--out-meta",
        dir.path().join("m").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("not graphical"), "{}", stderr(&out));
}

#[test]
fn sample_failure_exits_3_with_partial_outputs() {
    let dir = tempdir().unwrap();
    let points = gen_uniform(dir.path(), 20, 3);
    let e = dir.path().join("e.tsv");
    let t = dir.path().join("t.csv");
    let m = dir.path().join("m.json");
    // Target support is disjoint from every torus distance, so a strict run
    // exhausts immediately.
    let out = spatnet(&[
        "sample",
        "--degrees",
        "regular:3",
        "--points",
        &points,
        "--target",
        "uniform:a=0.8,b=0.9",
        "--strict",
        "--seed",
        "5",
        "--out-edges",
        e.to_str().unwrap(),
        "--out-trace",
        t.to_str().unwrap(),
        "--out-meta",
        m.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 3, "{}", stderr(&out));
    assert_eq!(stdout(&out), "status failure\n");
    assert_eq!(fs::read_to_string(&e).unwrap(), "");
    assert_eq!(fs::read_to_string(&t).unwrap(), "k,alpha,r,Z\n");
    let meta: serde_json::Value = serde_json::from_str(&fs::read_to_string(&m).unwrap()).unwrap();
    assert_eq!(meta["status"], "failure");
    assert!(meta["d_K"].is_null());
    assert_eq!(meta["edges_placed"], 0);
}

#[test]
fn sample_runs_from_explicit_weights() {
    let dir = tempdir().unwrap();
    let weights = dir.path().join("w.tsv");
    fs::write(
        &weights,
        "1\t2\t0.15\n1\t3\t0.2\n1\t4\t0.18\n2\t3\t0.12\n2\t4\t0.2\n3\t4\t0.16\n",
    )
    .unwrap();
    let degrees = dir.path().join("d.txt");
    fs::write(&degrees, "1\n1\n1\n1\n").unwrap();
    let m = dir.path().join("m.json");
    let out = spatnet(&[
        "sample",
        "--degrees",
        degrees.to_str().unwrap(),
        "--weights",
        weights.to_str().unwrap(),
        "--target",
        "uniform:a=0.1,b=0.2",
        "--seed",
        "2",
        "--out-edges",
        dir.path().join("e").to_str().unwrap(),
        "--out-trace",
        dir.path().join("t").to_str().unwrap(),
        "--out-meta",
        m.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let meta: serde_json::Value = serde_json::from_str(&fs::read_to_string(&m).unwrap()).unwrap();
    assert_eq!(meta["status"], "complete");
    assert_eq!(meta["edges_placed"], 2);
}

#[test]
fn sample_requires_exactly_one_weight_source() {
    let dir = tempdir().unwrap();
    let out = spatnet(&[
        "sample",
        "--degrees",
        "regular:3",
        "--target",
        "uniform:a=0,b=0.5",
        "--seed",
        "1",
        "--out-edges",
        dir.path().join("e").to_str().unwrap(),
        "--out-trace",
        dir.path().join("t").to_str().unwrap(),
        "--out-meta",
        dir.path().join("m").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("--points or --weights"));
}

#[test]
fn distance_prints_nine_significant_digits() {
    let dir = tempdir().unwrap();
    let edges = dir.path().join("e.tsv");
    fs::write(&edges, "1\t2\t0.5\n").unwrap();
    let out = spatnet(&[
        "distance",
        "--edges",
        edges.to_str().unwrap(),
        "--target",
        "uniform:a=0,b=1",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(stdout(&out), "0.250000000\n");

    let missing = spatnet(&[
        "distance",
        "--edges",
        dir.path().join("nope.tsv").to_str().unwrap(),
        "--target",
        "uniform:a=0,b=1",
    ]);
    assert_eq!(code(&missing), 2);
}

#[test]
fn check_degrees_exit_codes() {
    let dir = tempdir().unwrap();
    let path = dir.path().join("d.txt");
    fs::write(&path, "3\n3\n3\n3\n").unwrap();
    let ok = spatnet(&["check-degrees", path.to_str().unwrap()]);
    assert_eq!(code(&ok), 0);
    assert_eq!(stdout(&ok), "graphical\n");

    fs::write(&path, "3\n2\n").unwrap();
    let no = spatnet(&["check-degrees", path.to_str().unwrap()]);
    assert_eq!(code(&no), 1);
    assert_eq!(stdout(&no), "not graphical\n");
}

#[test]
fn experiment_convergence_writes_deterministic_report() {
    let dir = tempdir().unwrap();
    let run = |sub: &str| -> String {
        let out_dir = dir.path().join(sub);
        let out = spatnet(&[
            "experiment",
            "convergence",
            "--n-list",
            "16,24",
            "--degree",
            "3",
            "--target",
            "normal:mu=0.2,sigma=0.03,lo=0.05,hi=0.35",
            "--reps",
            "2",
            "--master-seed",
            "5",
            "--out-dir",
            out_dir.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        assert!(stdout(&out).contains("completion_rate"));
        fs::read_to_string(out_dir.join("report.csv")).unwrap()
    };
    let a = run("a");
    assert!(a.starts_with("n,seed,status,d_K,C_estimate\n"));
    assert_eq!(a.lines().count(), 5);
    let b = run("b");
    assert_eq!(a, b);
}

#[test]
fn experiment_boundary_writes_traces() {
    let dir = tempdir().unwrap();
    let run = |sub: &str| -> (String, String) {
        let out_dir = dir.path().join(sub);
        let out = spatnet(&[
            "experiment",
            "boundary",
            "--n",
            "24",
            "--degree",
            "3",
            "--means",
            "0.2",
            "--rel-sd",
            "0.15",
            "--reps",
            "2",
            "--master-seed",
            "5",
            "--out-dir",
            out_dir.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        (
            fs::read_to_string(out_dir.join("report.csv")).unwrap(),
            fs::read_to_string(out_dir.join("traces/0.2_0.csv")).unwrap(),
        )
    };
    let (rep1, tr1) = run("a");
    assert!(rep1.starts_with("mean,rep,status,final_alpha\n"));
    assert_eq!(rep1.lines().count(), 3);
    assert!(tr1.starts_with("k,alpha,r,Z\n"));
    let (rep2, tr2) = run("b");
    assert_eq!(rep1, rep2);
    assert_eq!(tr1, tr2);
}

#[test]
fn seed_is_mandatory_for_sample_and_experiment() {
    let dir = tempdir().unwrap();
    let out = spatnet(&[
        "sample",
        "--degrees",
        "regular:3",
        "--target",
        "uniform:a=0,b=0.5",
        "--out-edges",
        dir.path().join("e").to_str().unwrap(),
        "--out-trace",
        dir.path().join("t").to_str().unwrap(),
        "--out-meta",
        dir.path().join("m").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);

    let out = spatnet(&[
        "experiment",
        "convergence",
        "--n-list",
        "16",
        "--degree",
        "3",
        "--target",
        "uniform:a=0,b=0.5",
        "--reps",
        "1",
        "--out-dir",
        dir.path().join("x").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);
}
