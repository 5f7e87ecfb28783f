//! Black-box tests of the installed binary: exit codes, config layering,
//! artifact headers and run-to-run determinism.

use std::io::Write;
use std::path::Path;
use std::process::{Command, Output};

fn skyrmion(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_skyrmion"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(skyrmion(&["--help"]).status.code(), Some(0));
    assert_eq!(skyrmion(&["--version"]).status.code(), Some(0));
    assert_eq!(skyrmion(&["texture", "--help"]).status.code(), Some(0));
}

#[test]
fn bad_arguments_exit_one() {
    assert_eq!(skyrmion(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(skyrmion(&["texture", "--bogus"]).status.code(), Some(1));
    assert_eq!(
        skyrmion(&["sweep-flip", "--axis", "x"]).status.code(),
        Some(1),
        "only y and z flips are exposed"
    );
    assert_eq!(skyrmion(&[]).status.code(), Some(1));
}

#[test]
fn invalid_physics_is_rejected_with_a_message() {
    let dir = tempfile::tempdir().unwrap();
    let out = skyrmion(&["texture", "--l", "0", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("error"), "{}", stderr(&out));

    let bad_grid = skyrmion(&["texture", "--grid", "4", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(bad_grid.status.code(), Some(1));
}

#[test]
fn config_file_is_layered_and_typos_fail_fast() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("run.cfg");
    let mut file = std::fs::File::create(&config_path).unwrap();
    writeln!(file, "# small deterministic run\ngrid = 32\nl = 1\nxi0 = 0.2").unwrap();
    drop(file);

    // flag overrides the config's grid, config overrides the default l
    let out = skyrmion(&[
        "texture",
        "--config",
        config_path.to_str().unwrap(),
        "--grid",
        "48",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let stokes = read(&dir.path().join("stokes.csv"));
    assert_eq!(stokes.lines().count(), 48 * 48 + 1);
    assert!(stokes.starts_with("x,y,Sx,Sy,Sz,intensity\n"));
    let summary = read(&dir.path().join("texture_summary.txt"));
    assert!(summary.contains("l = 1"), "{summary}");

    let typo_path = dir.path().join("typo.cfg");
    std::fs::write(&typo_path, "grdi = 32\n").unwrap();
    let bad = skyrmion(&["texture", "--config", typo_path.to_str().unwrap()]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(stderr(&bad).contains("unknown config key"), "{}", stderr(&bad));
}

#[test]
fn transfer_reports_all_four_outcomes() {
    let out = skyrmion(&["transfer", "--grid", "64"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    for label in ["Phi+", "Phi-", "Psi+", "Psi-"] {
        assert!(text.contains(label), "missing {label} in:\n{text}");
    }
    assert_eq!(text.matches("probability = 0.250000000").count(), 4, "{text}");
    assert_eq!(text.matches("fidelity = 1.000000000").count(), 4, "{text}");
}

#[test]
fn sweeps_are_deterministic_and_pin_their_header() {
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    for dir in [&dir_a, &dir_b] {
        let out = skyrmion(&[
            "sweep-flip",
            "--axis",
            "z",
            "--grid",
            "48",
            "--seed",
            "3",
            "--out",
            dir.path().to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    }
    let a = read(&dir_a.path().join("sweep_flip_z.csv"));
    let b = read(&dir_b.path().join("sweep_flip_z.csv"));
    assert_eq!(a, b, "same config + seed must reproduce identical bytes");
    assert!(a.starts_with(
        "knob,value,F_sim,F_analytic,purity,concurrence,discord,nsk,degenerate\n"
    ));
    // 21 even points plus the injected 0.5 threshold, deduplicated
    assert_eq!(a.lines().count(), 22);
    let threshold = a.lines().find(|l| l.starts_with("p,5.00000000e-1")).unwrap();
    assert!(threshold.ends_with(",1"), "p=0.5 row must be degenerate: {threshold}");
}

#[test]
fn tomo_writes_counts_and_density_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("run.cfg");
    std::fs::write(&config_path, "tomo_shots = 2000\ngrid = 48\n").unwrap();
    let out = skyrmion(&[
        "tomo",
        "--config",
        config_path.to_str().unwrap(),
        "--seed",
        "9",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let counts = read(&dir.path().join("counts.csv"));
    assert!(counts.starts_with("basisA,eigA,basisB,eigB,counts,exposure\n"));
    assert_eq!(counts.lines().count(), 37);
    for name in ["density_linear.csv", "density_mle.csv"] {
        let density = read(&dir.path().join(name));
        assert!(density.starts_with("row,col,re,im\n"), "{name}");
        assert_eq!(density.lines().count(), 17, "{name}");
    }
    assert!(stdout(&out).contains("fidelity to ideal target"));
}
