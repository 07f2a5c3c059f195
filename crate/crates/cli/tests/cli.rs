use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn fraxterp() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fraxterp"))
}

fn run(args: &[&str]) -> Output {
    fraxterp().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

/// Writes the three figure scenarios (`fig1_left.toml`, ...) into a tempdir.
fn scenarios(points: usize) -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["figures", "--outdir", dir.path().to_str().unwrap(), "--points", &points.to_string(), "--dump-config"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    dir
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

#[test]
fn validate_and_evaluate_example() {
    let dir = scenarios(64);
    let cfg = path(dir.path(), "fig1_left.toml");
    let o = run(&["validate", &cfg]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("partition conditions satisfied"));
    let o = run(&["evaluate", &cfg, "--x", "0.25", "--tol", "1e-10"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "0.6500000000 ± 1e-10");
}

#[test]
fn evaluate_accepts_infinity_on_the_half_line() {
    let dir = scenarios(64);
    let o = run(&["evaluate", &path(dir.path(), "fig1_right.toml"), "--x", "inf"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("0.0"), "{}", stdout(&o));
}

#[test]
fn lpcheck_exit_codes() {
    let dir = scenarios(64);
    let e1 = path(dir.path(), "fig1_left.toml");
    let o = run(&["lpcheck", &e1, "--p", "1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("2.8"));
    assert_eq!(run(&["lpcheck", &e1, "--p", "inf"]).status.code(), Some(0));
    let o = run(&["lpcheck", &path(dir.path(), "fig2.toml"), "--p", "2"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("UNBOUNDED"));
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(run(&["evaluate"]).status.code(), Some(2));
    assert_eq!(run(&["validate", "/nonexistent/scenario.toml"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    let text = fs::read_to_string(scenarios(64).path().join("fig1_left.toml")).unwrap();
    fs::write(&cfg, format!("colour = \"red\"\n{text}")).unwrap();
    let o = run(&["validate", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("colour"));
}

#[test]
fn figures_are_deterministic_and_configs_round_trip() {
    let a = scenarios(256);
    let b = scenarios(256);
    for name in ["fig1_left", "fig1_right", "fig2"] {
        for ext in ["csv", "svg", "toml"] {
            let file = format!("{name}.{ext}");
            assert_eq!(fs::read(a.path().join(&file)).unwrap(), fs::read(b.path().join(&file)).unwrap(), "{file}");
        }
        let out = a.path().join(format!("{name}-resampled.csv"));
        let o = run(&[
            "sample",
            &path(a.path(), &format!("{name}.toml")),
            "--out",
            out.to_str().unwrap(),
            "--points",
            "256",
        ]);
        assert!(o.status.success());
        assert_eq!(fs::read(&out).unwrap(), fs::read(a.path().join(format!("{name}.csv"))).unwrap(), "{name}");
    }
}

#[test]
fn thread_count_does_not_change_output() {
    let dir = scenarios(64);
    let cfg = path(dir.path(), "fig2.toml");
    let outputs: Vec<PathBuf> = ["1", "3"]
        .iter()
        .map(|t| {
            let out = dir.path().join(format!("t{t}.csv"));
            let o = fraxterp()
                .env("FRAXTERP_THREADS", t)
                .args(["sample", &cfg, "--out", out.to_str().unwrap(), "--points", "512"])
                .output()
                .unwrap();
            assert!(o.status.success());
            out
        })
        .collect();
    assert_eq!(fs::read(&outputs[0]).unwrap(), fs::read(&outputs[1]).unwrap());
    let o = fraxterp().env("FRAXTERP_THREADS", "0").args(["validate", &cfg]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn basis_and_tensor_outputs() {
    let dir = scenarios(64);
    let e1 = path(dir.path(), "fig1_left.toml");
    let out = dir.path().join("basis.csv");
    let o = run(&["basis", &e1, "--orders", "2,2", "--nodes", "0,1;0,1", "--out", out.to_str().unwrap(), "--points", "32"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(&out).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "x,L1,L2,L3,L4");
    assert_eq!(csv.lines().count(), 34);
    let out = dir.path().join("tensor.csv");
    let o = run(&["tensor-sample", &e1, &path(dir.path(), "fig2.toml"), "--out", out.to_str().unwrap(), "--points", "8"]);
    assert!(o.status.success());
    let csv = fs::read_to_string(&out).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "x,xt,f");
    assert_eq!(csv.lines().count(), 1 + 9 * 9);
}

#[test]
fn attractor_writes_a_pgm() {
    let dir = scenarios(64);
    let out = dir.path().join("a.pgm");
    let o = run(&[
        "attractor",
        &path(dir.path(), "fig1_left.toml"),
        "--res",
        "64",
        "48",
        "--iters",
        "10",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let pgm = fs::read_to_string(&out).unwrap();
    assert!(pgm.starts_with("P2\n64 48\n1\n"));
}

#[test]
fn verify_passes_on_the_example() {
    let dir = scenarios(64);
    let o = run(&["verify", &path(dir.path(), "fig1_left.toml")]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(!stdout(&o).contains("FAIL"));
}

#[test]
fn shipped_scenarios_validate() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios");
    for name in ["example1", "example1_pullback", "halfline"] {
        let cfg = root.join(format!("{name}.toml"));
        let o = run(&["validate", cfg.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{name}: {}", String::from_utf8_lossy(&o.stderr));
    }
}
