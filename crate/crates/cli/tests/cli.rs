use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use gphdae_cli::{load_system, SystemFile};

fn gphdae(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gphdae"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

const OSCILLATOR: &str = r#"{
  "n": 2,
  "K": [[1, 0], [0, 1]],
  "L": [[0, 1], [-1, 0]],
  "P": [[1, 0], [0, 1]],
  "S": [[1, 0], [0, 1]]
}"#;

#[test]
fn oscillator_file_validates() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "osc.json", OSCILLATOR);
    let out = gphdae(dir.path(), &["validate", "osc.json"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).contains("Dirac structure: regular"));
    assert!(stdout(&out).contains("Lagrangian subspace: regular"));
}

#[test]
fn axiom_violation_names_the_axiom() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "bad.json",
        r#"{"n": 2, "K": [[1, 0], [0, 1]], "L": [[1, 0], [0, 1]], "P": [[1, 0], [0, 1]], "S": [[1, 0], [0, 1]]}"#,
    );
    let out = gphdae(dir.path(), &["validate", "bad.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("KL^T + LK^T = 0"), "{}", stderr(&out));
}

#[test]
fn parse_errors_report_position() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "broken.json",
        "{\n  \"n\": 2,\n  \"K\": [[1, 0],\n}",
    );
    let out = gphdae(dir.path(), &["analyze", "broken.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("line 4"), "{}", stderr(&out));
}

#[test]
fn missing_matrix_is_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "short.json",
        r#"{"n": 1, "K": [[1]], "L": [[0]], "P": [[1]]}"#,
    );
    let out = gphdae(dir.path(), &["validate", "short.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("S"), "{}", stderr(&out));
}

#[test]
fn oscillator_simulation_conserves_energy() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "osc.json", OSCILLATOR);
    let out = gphdae(
        dir.path(),
        &[
            "simulate", "osc.json", "--z0", "1,0", "--dt", "0.01", "--steps", "10000", "--scheme",
            "midpoint", "-o", "osc.csv",
        ],
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let csv = fs::read_to_string(dir.path().join("osc.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,z_1,z_2,H,residual"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 10001);
    let (lo, hi) = rows
        .iter()
        .map(|r| r[3])
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), h| {
            (lo.min(h), hi.max(h))
        });
    assert!(hi - lo < 1e-10, "H varies by {}", hi - lo);
    for (k, r) in rows.iter().enumerate() {
        assert_eq!(r[0], k as f64 * 0.01);
    }
}

#[test]
fn negative_initial_values_are_accepted() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "osc.json", OSCILLATOR);
    let out = gphdae(
        dir.path(),
        &[
            "simulate", "osc.json", "--z0", "-1,-0.5", "--dt", "0.1", "--steps", "3", "--scheme",
            "euler", "-o", "e.csv",
        ],
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let csv = fs::read_to_string(dir.path().join("e.csv")).unwrap();
    assert!(csv.lines().nth(1).unwrap().starts_with("0,-1,-0.5,"));
}

#[test]
fn irregular_pencil_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "irr.json",
        r#"{"n": 2, "K": [[1, 0], [0, 1]], "L": [[0, 0], [0, 0]], "P": [[1, 0], [0, 0]], "S": [[0, 0], [0, 1]]}"#,
    );
    let out = gphdae(
        dir.path(),
        &[
            "simulate", "irr.json", "--z0", "1,1", "--dt", "0.1", "--steps", "2", "-o", "x.csv",
        ],
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("irregular pencil"));
    let out = gphdae(dir.path(), &["analyze", "irr.json"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("Pencil: singular"));
}

#[test]
fn usage_errors_list_commands() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["frobnicate"][..],
        &[][..],
        &["extend", "x.json", "--mode", "sideways", "-o", "y.json"][..],
    ] {
        let out = gphdae(dir.path(), args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(stderr(&out).contains("validate, analyze, extend, simulate, example"));
    }
    let out = gphdae(dir.path(), &["example", "pendulum", "-o", "p.json"]);
    assert_eq!(out.status.code(), Some(2));
    let out = gphdae(
        dir.path(),
        &[
            "example",
            "mass-spring-zero-mass",
            "--param",
            "k",
            "-o",
            "p.json",
        ],
    );
    assert_eq!(out.status.code(), Some(2));
    let out = gphdae(
        dir.path(),
        &["example", "mass-spring-zero-mass", "-o", "p.json"],
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn invalid_parameter_values_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = gphdae(
        dir.path(),
        &[
            "example",
            "mass-spring-zero-mass",
            "--param",
            "k=-1",
            "-o",
            "p.json",
        ],
    );
    assert_eq!(out.status.code(), Some(1), "{}", stderr(&out));
}

#[test]
fn zero_mass_analysis() {
    let dir = tempfile::tempdir().unwrap();
    let out = gphdae(
        dir.path(),
        &[
            "example",
            "mass-spring-zero-mass",
            "--param",
            "k=1",
            "-o",
            "zero_mass.json",
        ],
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let out = gphdae(dir.path(), &["analyze", "zero_mass.json"]);
    let report = stdout(&out);
    assert!(report.contains("Dirac structure: regular"));
    assert!(report.contains("Lagrangian subspace: singular"));
    assert!(
        report.contains("Lagrange constraints: 1\n  x_2 = 0\n"),
        "{report}"
    );
    assert!(report.contains("Dirac constraints: 0"));
    assert!(report.contains("Consistent space dimension: 0"));
}

#[test]
fn constrained_mass_reports_dirac_constraint() {
    let dir = tempfile::tempdir().unwrap();
    let out = gphdae(
        dir.path(),
        &[
            "example",
            "constrained-mechanical",
            "--param",
            "m=2",
            "--param",
            "k=3",
            "--param",
            "a=1",
            "-o",
            "c.json",
        ],
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let report = stdout(&gphdae(dir.path(), &["analyze", "c.json"]));
    assert!(report.contains("Dirac structure: singular"));
    assert!(
        report.contains("Dirac constraints: 1\n  e_2 = 0\n"),
        "{report}"
    );
}

#[test]
fn saved_examples_round_trip_bit_for_bit() {
    let dir = tempfile::tempdir().unwrap();
    let out = gphdae(
        dir.path(),
        &[
            "example",
            "two-mass-finite-spring",
            "--param",
            "k1=0.3",
            "--param",
            "k12=7",
            "--param",
            "m1=0.1",
            "--param",
            "m2=3",
            "-o",
            "a.json",
        ],
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let first = fs::read_to_string(dir.path().join("a.json")).unwrap();
    let loaded = load_system(&dir.path().join("a.json")).unwrap();
    gphdae_cli::save_system(&loaded.system, loaded.overrides, &dir.path().join("b.json")).unwrap();
    let second = fs::read_to_string(dir.path().join("b.json")).unwrap();
    assert_eq!(first, second);
    let file = SystemFile::parse(&first, Path::new("a.json")).unwrap();
    assert_eq!(file.p[1][1], 1.0 / 7.0);
    assert_eq!(file.s[2][2], 1.0 / 0.1);
}

#[test]
fn tolerance_overrides_survive_extension() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "z.json",
        r#"{"n": 2, "K": [[1, 0], [0, 1]], "L": [[0, 1], [-1, 0]], "P": [[1, 0], [0, 0]], "S": [[1, 0], [0, 1]],
            "labels": ["q", "e_p"], "tolerances": {"axiom_abs_tol": 1e-7}}"#,
    );
    let out = gphdae(
        dir.path(),
        &["extend", "z.json", "--mode", "lagrange", "-o", "zl.json"],
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let ext = SystemFile::parse(
        &fs::read_to_string(dir.path().join("zl.json")).unwrap(),
        Path::new("zl.json"),
    )
    .unwrap();
    assert_eq!(ext.n, 3);
    assert_eq!(ext.labels.as_deref().unwrap(), ["q", "e_p", "mu_1"]);
    assert_eq!(ext.tolerances.unwrap().axiom_abs_tol, Some(1e-7));

    // the Dirac extension needs Dirac constraints to work with
    let out = gphdae(
        dir.path(),
        &["extend", "z.json", "--mode", "dirac", "-o", "zd.json"],
    );
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn merged_extension_of_worked_example_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = gphdae(
        dir.path(),
        &[
            "example",
            "merged-worked-example",
            "--param",
            "k1=2",
            "--param",
            "m1=4",
            "--param",
            "m2=8",
            "-o",
            "w.json",
        ],
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let file = SystemFile::parse(
        &fs::read_to_string(dir.path().join("w.json")).unwrap(),
        Path::new("w.json"),
    )
    .unwrap();
    let s_expected = [
        [2.0, -1.0, 0.0, 0.0, 0.0, 1.0],
        [-1.0, 0.0, 0.0, 0.0, 0.0, -1.0],
        [0.0, 0.0, 0.25, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 0.125, 0.0, 0.0],
        [0.0, 0.0, 0.0, 0.0, 1.0, 0.0],
        [1.0, -1.0, 0.0, 0.0, 0.0, 0.0],
    ];
    assert_eq!(file.s, s_expected.map(|r| r.to_vec()).to_vec());
    let report = stdout(&gphdae(dir.path(), &["analyze", "w.json"]));
    assert!(report.contains("Dirac structure: singular"));
    assert!(report.contains("Lagrangian subspace: singular"));
}

#[test]
fn simulate_extended_file_uses_multiplier_labels() {
    let dir = tempfile::tempdir().unwrap();
    gphdae(
        dir.path(),
        &[
            "example",
            "two-mass-rigid-rod",
            "--param",
            "k1=1",
            "--param",
            "m1=1",
            "--param",
            "m2=2",
            "-o",
            "r.json",
        ],
    );
    let out = gphdae(
        dir.path(),
        &["extend", "r.json", "--mode", "lagrange", "-o", "rl.json"],
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let out = gphdae(
        dir.path(),
        &[
            "simulate",
            "rl.json",
            "--z0",
            "1,1,0.5,1,0",
            "--dt",
            "0.01",
            "--steps",
            "5",
            "-o",
            "rl.csv",
        ],
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let csv = fs::read_to_string(dir.path().join("rl.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("t,q1,F12,p1,p2,mu_1,H,residual"));
    assert_eq!(csv.lines().count(), 7);
}
