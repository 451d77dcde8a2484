use std::process::{Command, Output};

fn nhqc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nhqc")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn run_prints_both_fidelities_and_writes_the_trace() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("trace.csv");
    let o = nhqc(&[
        "run",
        "--gate",
        "not",
        "--steps",
        "2000",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("fidelity_sim    0.99999"), "{text}");
    assert!(text.contains("fidelity_oracle 1.000000000000"));
    let trace = std::fs::read_to_string(&out).unwrap();
    assert_eq!(trace.lines().next(), Some("t_us,p0,p1,pe,fidelity"));
    assert_eq!(trace.lines().count(), 2 * 2000 / 100 + 2);
}

#[test]
fn unequal_slopes_have_no_oracle() {
    let o = nhqc(&["run", "--a", "1", "--b", "3", "--no-cp", "--steps", "2000"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("fidelity_oracle n/a"));
}

#[test]
fn sweep_to_stdout_and_file_agree() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.csv");
    let args = ["sweep-delta", "--delta-mhz", "-2:2:5", "--steps", "2000"];
    let a = nhqc(&args);
    let mut with_out = args.to_vec();
    with_out.extend(["--out", out.to_str().unwrap()]);
    let b = nhqc(&with_out);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(b.status.code(), Some(0));
    assert_eq!(stdout(&a), std::fs::read_to_string(&out).unwrap());
    let rows = stdout(&a).lines().filter(|l| !l.starts_with('#')).count();
    assert_eq!(rows, 6);
}

#[test]
fn grid_row_count() {
    let o = nhqc(&[
        "grid",
        "--eps",
        "-0.1:0.1:3",
        "--delta-mhz",
        "-1:1:4",
        "--steps",
        "1000",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("# sweep=grid\n"));
    assert_eq!(stdout(&o).lines().filter(|l| !l.starts_with('#')).count(), 13);
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.cfg");
    std::fs::write(&cfg, "gate = s\ncp = false\neps = 0:0.1:3\nsteps = 2000\n").unwrap();
    let o = nhqc(&["sweep-eps", "--config", cfg.to_str().unwrap(), "--gate", "t"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("# gate=t\n"));
    assert!(text.contains("# cp=false\n"));
    assert!(text.contains("# points=3\n"));
}

#[test]
fn tables_lists_every_gate() {
    let o = nhqc(&["tables"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    for g in ["not", "hadamard", "s", "t"] {
        assert_eq!(text.lines().filter(|l| l.starts_with(&format!("{g} "))).count(), 2);
    }
    // pi^2/2 for NOT on the plain loop
    assert!(text.contains("4.934802e0"));
}

#[test]
fn usage_errors_exit_with_one() {
    for args in [
        vec!["frobnicate"],
        vec!["run", "--gate", "cnot"],
        vec!["run", "--steps", "1001"],
        vec!["run", "--eps", "0:0.1:3"],
        vec!["sweep-eps", "--eps", "0.1:0:3"],
        vec!["run", "--steps", "many"],
    ] {
        assert_eq!(nhqc(&args).status.code(), Some(1), "{args:?}");
    }
}

#[test]
fn unknown_config_key_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "colour = red\n").unwrap();
    assert_eq!(nhqc(&["run", "--config", cfg.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn io_errors_exit_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope").join("x.csv");
    let o = nhqc(&[
        "sweep-eps",
        "--eps",
        "0",
        "--steps",
        "1000",
        "--out",
        missing.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3));
    let o = nhqc(&["run", "--config", dir.path().join("absent.cfg").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
}
