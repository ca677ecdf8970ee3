use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn mc2(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mc2")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn enumerate_cycle6_candidates() {
    let tmp = tempfile::tempdir().unwrap();
    let o = mc2(&["enumerate", "--code", "3,17,17,30,1", "--g", "3", "-o", tmp.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("candidates=4080"), "{}", stdout(&o));
    assert_eq!(read(tmp.path(), "candidates_g3.csv").lines().count(), 4080);
}

#[test]
fn construct_reports_length_and_rate() {
    let tmp = tempfile::tempdir().unwrap();
    let o = mc2(&["construct", "--code", "3,7,11,30,5", "-o", tmp.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("length=2310 rate=0.50"), "{}", stdout(&o));
}

#[test]
fn config_file_and_overrides() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.cfg");
    fs::write(&cfg, "[code]\ngamma = 4\nkappa = 29\nz = 29\nL = 20\nm = 19\n[run]\nseed = 1\n").unwrap();
    let out = tmp.path().join("o");
    let o = mc2(&["construct", "-c", cfg.to_str().unwrap(), "-o", out.to_str().unwrap()]);
    assert!(stdout(&o).contains("length=16820 rate=0.73"), "{}", stdout(&o));
    let o = mc2(&["construct", "-c", cfg.to_str().unwrap(), "--set", "code.L=30", "-o", out.to_str().unwrap()]);
    assert!(stdout(&o).contains("length=25230"), "{}", stdout(&o));
}

#[test]
fn validate_matches_oracle() {
    let tmp = tempfile::tempdir().unwrap();
    let o = mc2(&["validate", "--seed", "11", "-o", tmp.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("validate: match"), "{}", stdout(&o));
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().to_str().unwrap();
    assert_eq!(mc2(&["construct", "--bogus"]).status.code(), Some(1));
    assert_eq!(mc2(&["frobnicate"]).status.code(), Some(1));
    let bad = tmp.path().join("bad.cfg");
    fs::write(&bad, "[code]\ngamma 3\n").unwrap();
    assert_eq!(mc2(&["construct", "-c", bad.to_str().unwrap(), "-o", dir]).status.code(), Some(1));
    assert_eq!(mc2(&["construct", "--set", "code.nope=1", "-o", dir]).status.code(), Some(1));
    assert_eq!(mc2(&["construct", "--code", "3,3,5,5,1", "-o", dir]).status.code(), Some(2));
    // an entry outside 0..=m is infeasible
    let part = tmp.path().join("p.txt");
    fs::write(&part, "0 0 0 0 5\n0 0 0 0 0\n0 0 0 0 0\n").unwrap();
    let o = mc2(&["construct", "--code", "3,5,5,4,1", "--set", &format!("lift.partition={}", part.display()), "-o", dir]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(mc2(&["--help"]).status.code(), Some(0));
}

/// Runs `optimize-partition`, `optimize-lift` and `simulate-bec` inside `dir`
/// with relative paths, so the configs of two runs are identical.
fn pipeline(dir: &Path, threads: &str) {
    let run = |extra: &[&str]| {
        let mut args: Vec<&str> = extra.to_vec();
        args.extend_from_slice(&["--code", "3,5,7,6,2", "--seed", "5", "--threads", threads]);
        let o = Command::new(env!("CARGO_BIN_EXE_mc2")).current_dir(dir).args(&args).output().unwrap();
        assert_eq!(o.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    };
    run(&["optimize-partition", "-o", "p"]);
    run(&["optimize-lift", "--set", "lift.partition=p/partition.txt", "-o", "l"]);
    run(&[
        "simulate-bec",
        "--set",
        "lift.partition=p/partition.txt",
        "--set",
        "lift.lifting=l/lifting.txt",
        "--set",
        "simulate.rates=0.3,0.45,0.55",
        "--set",
        "simulate.frames=300",
        "-o",
        "s",
    ]);
}

#[test]
fn reproducible_across_runs_and_threads() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    pipeline(a.path(), "1");
    pipeline(b.path(), "4");
    for sub in ["p", "l", "s"] {
        let mut names: Vec<String> = fs::read_dir(a.path().join(sub))
            .unwrap()
            .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
            .collect();
        names.sort();
        assert!(names.len() >= 3, "{sub}: {names:?}");
        for f in &names {
            assert_eq!(read(&a.path().join(sub), f), read(&b.path().join(sub), f), "{sub}/{f}");
        }
    }
    let manifest = read(&a.path().join("l"), "manifest.txt");
    assert!(manifest.contains("config_sha256="));
    assert!(manifest.lines().any(|l| l.starts_with("output lifting.txt sha256=")));
}

#[test]
fn estimate_writes_report() {
    let tmp = tempfile::tempdir().unwrap();
    let o = mc2(&[
        "estimate",
        "--code",
        "3,5,7,6,1",
        "--set",
        "estimate.problem=partition",
        "--set",
        "estimate.samples=1500",
        "-o",
        tmp.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("min_estimate="));
    assert!(read(tmp.path(), "report.txt").contains("estimated minimum count"));
    assert!(read(tmp.path(), "stats.csv").lines().count() >= 4);
}
