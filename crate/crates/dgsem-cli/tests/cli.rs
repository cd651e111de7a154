use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn dgsem(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dgsem")).args(args).output().expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("dgsem-cli-{}-{}", name, std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn bounds_prints_the_table() {
    let out = dgsem(&["bounds", "--p-max", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text, "quantity,p=1,p=2,p=3\nlambda_min,0,0.25,0.195137\nd_min,1,3,9.7082\n");
}

#[test]
fn missing_spec_is_an_error() {
    let out = dgsem(&["run", "--spec", "/nonexistent/spec"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn bad_spec_is_an_error() {
    let dir = scratch("bad");
    let spec = write(&dir, "bad.spec", "problem = nowhere\n");
    assert_eq!(dgsem(&["scan", "--spec", &spec]).status.code(), Some(1));
    fs::remove_dir_all(dir).ok();
}

#[test]
fn failed_check_exits_with_two() {
    let dir = scratch("check");
    let spec = write(
        &dir,
        "bisect.spec",
        "problem = zs-profile-1d\np = 2\nN = 100\nstop = steps:1\nlambda_lo = 0\nlambda_hi = 0.3\nresolution = 0.01\nexpect.lambda.2 = 0.1\n",
    );
    let out_path = dir.join("b.csv");
    let out = dgsem(&["bisect", "--spec", &spec, "--out", out_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("p=2"));
    let csv = fs::read_to_string(out_path).unwrap();
    assert_eq!(csv.lines().nth(1), Some("2,0.25,0.24,0.25"));
    fs::remove_dir_all(dir).ok();
}

#[test]
fn reports_are_deterministic() {
    let dir = scratch("det");
    let spec = write(
        &dir,
        "pulse.spec",
        "problem = pulse-2d\np = 1, 2\nN = 6\nlambda = 1\nstop = steps:2\nlimiters = none, fct\nruntime = false\n",
    );
    let run = |name: &str| {
        let base = dir.join(name);
        let out = dgsem(&["--threads", "1", "scan", "--spec", &spec, "--out", base.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        (fs::read(dir.join(name.replace(".csv", "-none.csv"))).unwrap(), fs::read(dir.join(name.replace(".csv", "-fct.csv"))).unwrap())
    };
    let a = run("a.csv");
    let b = run("b.csv");
    assert_eq!(a, b);
    let text = String::from_utf8(a.1).unwrap();
    assert!(text.starts_with("p,lambda,N,minavg,maxavg,mindof,maxdof,steps,stop,runtime\n"));
    for line in text.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols[9], "0");
        for c in &cols[3..7] {
            let mantissa: String = c.split('e').next().unwrap().chars().filter(char::is_ascii_digit).collect();
            assert!(mantissa.trim_start_matches('0').len() <= 6, "{}", c);
        }
    }
    fs::remove_dir_all(dir).ok();
}

#[test]
fn run_rejects_problems_without_an_exact_solution() {
    let dir = scratch("exact");
    let spec = write(&dir, "box.spec", "problem = box-3d\np = 1\nN = 2\nlambda = 1\nstop = steps:1\n");
    let out = dgsem(&["run", "--spec", &spec, "--out", dir.join("x.csv").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("scan"));
    fs::remove_dir_all(dir).ok();
}
