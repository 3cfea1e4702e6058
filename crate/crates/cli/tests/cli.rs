use std::fs::{self, File};
use std::path::Path;
use std::process::{Command, Output};

use deconv_core::experiments::worst_case_instance;
use deconv_core::io::{write_measure, write_samples, write_values};
use deconv_core::KernelFamily;

fn deconv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_deconv")).args(args).output().expect("run deconv")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn certify_exit_codes() {
    let ok = deconv(&["certify", "--delta", "3.5", "--gamma", "0.3", "--kappa", "0.05", "--coarsen", "4"]);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));
    let out = stdout(&ok);
    assert!(out.lines().next().unwrap().starts_with("# config_sha256="));
    assert!(out.lines().nth(1).unwrap().starts_with("delta,"));

    let no = deconv(&["certify", "--delta=2", "--gamma=1", "--coarsen=4"]);
    assert_eq!(no.status.code(), Some(1));
}

#[test]
fn sparse_defaults_echo_constants() {
    let o = deconv(&["certify", "--mode", "sparse", "--coarsen", "4"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    let line = out.lines().find(|l| l.starts_with("# alpha_inf=")).expect("constants line");
    assert!(line.contains("contradiction=") && line.contains("lambda=2"));
}

#[test]
fn usage_and_config_errors_exit_2() {
    let o = deconv(&["certify", "--no_such_key", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("no_such_key"));
    assert_eq!(deconv(&["certify", "--config", "/nonexistent/cfg"]).status.code(), Some(2));
    assert_eq!(deconv(&["bogus"]).status.code(), Some(2));
}

#[test]
fn malformed_csv_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let s = dir.path().join("s.csv");
    let v = dir.path().join("v.csv");
    fs::write(&s, "location\n0.1\nabc\n").unwrap();
    fs::write(&v, "value\n1\n2\n").unwrap();
    let o = deconv(&["solve", "--samples", path(&s), "--values", path(&v), "--sigma", "0.01"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("not a number"));
}

#[test]
fn zero_measurements_give_zero_solution() {
    let dir = tempfile::tempdir().unwrap();
    let s = dir.path().join("s.csv");
    let v = dir.path().join("v.csv");
    fs::write(&s, "location\n0.2\n0.5\n0.8\n").unwrap();
    fs::write(&v, "value\n0\n0\n0\n").unwrap();
    let o = deconv(&["solve", "--samples", path(&s), "--values", path(&v), "--sigma", "0.05", "--grid_n", "101"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    let rows: Vec<&str> = out.lines().filter(|l| !l.starts_with('#')).skip(1).collect();
    assert_eq!(rows.len(), 101);
    for r in rows {
        let c: f64 = r.split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(c, 0.0);
    }
}

fn write_instance(dir: &Path) -> (String, String, String) {
    let inst = worst_case_instance(KernelFamily::Gaussian, 0.01, 2000, 10, 4.0, 0.3, 0.01, 1).unwrap();
    let (s, v, t) = (dir.join("samples.csv"), dir.join("values.csv"), dir.join("truth.csv"));
    write_samples(File::create(&s).unwrap(), &inst.samples).unwrap();
    write_values(File::create(&v).unwrap(), &inst.y).unwrap();
    write_measure(File::create(&t).unwrap(), &inst.mu).unwrap();
    (path(&s).to_owned(), path(&v).to_owned(), path(&t).to_owned())
}

#[test]
fn solve_flags_exact_recovery() {
    let dir = tempfile::tempdir().unwrap();
    let (s, v, t) = write_instance(dir.path());
    let cfg = dir.path().join("solve.cfg");
    fs::write(&cfg, format!("# acceptance instance\nsigma = 0.01\nsamples = {s}\nvalues = {v}\ntruth = {t}\n")).unwrap();
    let o = deconv(&["solve", "--config", path(&cfg)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    assert!(out.contains("exact_recovery=true"), "{}", out.lines().take(3).collect::<Vec<_>>().join("\n"));
    assert!(out.lines().any(|l| l.starts_with("# kkt ")));
    assert!(out.lines().any(|l| l == "grid_location,coefficient"));
}

#[test]
fn identical_config_gives_identical_output() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["phase", "--deltas", "5,6", "--gammas", "0.2", "--trials", "2", "--grid_n", "1000", "--seed", "7"];
    let a = deconv(&args);
    let b = deconv(&args);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let out = stdout(&a);
    assert!(out.starts_with("# config_sha256="));
    assert!(out.lines().next().unwrap().ends_with("seed=7"));
    assert_eq!(out.lines().nth(1), Some("delta,gamma,fraction,fraction_monotonized"));

    // same run through a config file: same hash and rows
    let cfg = dir.path().join("phase.cfg");
    fs::write(&cfg, "deltas = 5,6\ngammas = 0.2\ntrials = 2\ngrid_n = 1000\nseed = 7\n").unwrap();
    let c = deconv(&["phase", "--config", path(&cfg)]);
    assert_eq!(a.stdout, c.stdout);
    // a different seed changes the hash line
    let d = deconv(&["phase", "--config", path(&cfg), "--seed", "8"]);
    assert_ne!(stdout(&d).lines().next(), out.lines().next());
}

#[test]
fn conditioning_and_uniform_phase_csv() {
    let o = deconv(&["conditioning", "--m", "10", "--delta0s", "0.5,1,2", "--trials", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[1], "m,delta0,sv_min,sv_mid");
    assert_eq!(lines.len(), 5);

    let o = deconv(&["uniform-phase", "--deltas", "3", "--widths", "1,2", "--trials", "1", "--grid_n", "500"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    assert!(out.lines().nth(1).unwrap().starts_with("delta,grid_width,"));
    // width 2 > Δ/2 is omitted
    assert_eq!(out.lines().count(), 3);
}

#[test]
fn sparse_phase_writes_three_files() {
    let dir = tempfile::tempdir().unwrap();
    let o = deconv(&[
        "sparse-phase",
        "--out",
        path(dir.path()),
        "--lambdas",
        "2",
        "--corruptions",
        "0",
        "--spike_counts",
        "2",
        "--deltas",
        "8",
        "--trials",
        "1",
        "--grid_n",
        "500",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["lambda_noise.csv", "delta_spikes.csv", "delta_noise.csv"] {
        let text = fs::read_to_string(dir.path().join(f)).unwrap();
        assert!(text.starts_with("# config_sha256="), "{f}");
        assert!(text.lines().count() >= 3, "{f}: {text}");
    }
}
