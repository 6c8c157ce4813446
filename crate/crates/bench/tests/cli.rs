use std::fs;
use std::process::Command;

fn bench() -> Command {
    Command::new(env!("CARGO_BIN_EXE_grp-bench"))
}

#[test]
fn single_run_writes_csv_and_script() {
    let dir = tempfile::tempdir().unwrap();
    let out = bench()
        .args(["--problem", "sod", "--scheme", "grp-nonlinear", "--cells", "50", "--output-dir"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("sod_grp-nonlinear_50.csv").exists());
    assert!(dir.path().join("sod_grp-nonlinear_50.gp").exists());
}

#[test]
fn bad_input_exits_with_one() {
    let out = bench().args(["--problem", "sod", "--cfl", "1.5", "--no-plot"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cfl"));

    let out = bench().args(["--problem", "nope"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));

    let out = bench().args(["--problem", "sod", "--cells", "10,20"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "[problem]\nproblem = sod\nbogus = 3\n").unwrap();
    let out = bench().arg("--config").arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bad.cfg:3"));
}

#[test]
fn sweep_from_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.cfg");
    fs::write(
        &cfg,
        format!(
            "[problem]\nproblem = sod\ncells = 40, 80\n[scheme]\nscheme = godunov, hllc, grp-acoustic\n[output]\noutput_dir = {}\n",
            dir.path().display()
        ),
    )
    .unwrap();
    let out = bench().arg("--config").arg(&cfg).arg("--sweep").output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = fs::read_to_string(dir.path().join("sod_summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 7);
    assert!(dir.path().join("sod_sweep.gp").exists());
}
