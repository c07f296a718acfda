// Copyright 2026 The capacitary Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! End-to-end runs of the `capacitary` binary.

use std::f64::consts::PI;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_capacitary"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env("SOURCE_DATE_EPOCH", "0")
        .output()
        .expect("binary runs")
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn column(csv: &str, name: &str) -> Vec<f64> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let i = header.iter().position(|h| *h == name).unwrap_or_else(|| panic!("no column {name}"));
    lines.map(|l| l.split(',').nth(i).unwrap().parse().unwrap()).collect()
}

fn header(csv: &str) -> &str {
    csv.lines().next().unwrap()
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("config.toml");
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn monotone_on_schwarzschild_is_constant_four_pi() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["monotone", "--n", "3", "--m", "1", "--beta", "1"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = read(&dir.path().join("monotone.csv"));
    assert_eq!(header(&csv), "beta,tau,t,F,dF_analytic,dF_fd,flags");
    let f = column(&csv, "F");
    assert_eq!(f.len(), 200);
    for v in f {
        assert!((v - 4.0 * PI).abs() <= 1e-6, "{v}");
    }
}

#[test]
fn numbers_carry_seventeen_significant_digits() {
    let dir = tempfile::tempdir().unwrap();
    run(&["monotone", "--beta", "1"], dir.path());
    let csv = read(&dir.path().join("monotone.csv"));
    let first = csv.lines().nth(1).unwrap();
    for cell in first.split(',').take(6) {
        let mantissa = cell.trim_start_matches('-').split('e').next().unwrap();
        assert_eq!(mantissa.replace('.', "").len(), 17, "{cell}");
    }
}

#[test]
fn reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for cmd in ["monotone", "conformal-check"] {
        let args = [cmd, "--beta", "0.5,1,2", "--seed", "11"];
        assert_eq!(run(&args, a.path()).status.code(), Some(0));
        assert_eq!(run(&args, b.path()).status.code(), Some(0));
    }
    for file in ["monotone.csv", "conformal.csv", "phi.csv", "summary.txt"] {
        assert_eq!(read(&a.path().join(file)), read(&b.path().join(file)), "{file}");
    }
}

#[test]
fn seed_changes_the_sample_points() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run(&["conformal-check", "--seed", "1"], a.path());
    run(&["conformal-check", "--seed", "2"], b.path());
    assert_ne!(read(&a.path().join("conformal.csv")), read(&b.path().join("conformal.csv")));
}

#[test]
fn penrose_on_flat_exterior_has_margin_one_half() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "[triple]\nkind = \"flat\"\nr0 = 1.0\n");
    let out = run(&["penrose", "--config", &config], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let csv = read(&dir.path().join("penrose.csv"));
    assert_eq!(header(&csv), "capacity,area,rhs,margin");
    assert!((column(&csv, "margin")[0] - 0.5).abs() < 1e-6);
}

#[test]
fn identity_tables_follow_the_schema() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["identity", "--beta", "1,2"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for beta in ["1", "2"] {
        for kind in ["integral", "x"] {
            let csv = read(&dir.path().join(format!("identity_{kind}_beta{beta}.csv")));
            assert_eq!(header(&csv), "s_low,s_high,lhs,rhs,residual,relative_residual");
            assert_eq!(csv.lines().count(), 3);
        }
    }
}

#[test]
fn adm_reports_both_masses() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["adm"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let csv = read(&dir.path().join("adm.csv"));
    assert_eq!(header(&csv), "radius,m_flux,m_ricci,flux_error,ricci_error");
    for m in column(&csv, "m_ricci") {
        assert!((m - 1.0).abs() < 1e-10);
    }
}

#[test]
fn summary_carries_provenance_and_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    run(&["schwarzschild"], dir.path());
    let summary = read(&dir.path().join("summary.txt"));
    for key in ["[provenance]", "config_sha256 = ", "version = ", "timestamp_unix = 0", "[verdicts]", "exit_code = 0"] {
        assert!(summary.contains(key), "missing {key}");
    }
    assert!(summary.contains("schwarzschild: sub-static = PASS"));
}

#[test]
fn unknown_config_keys_are_rejected_with_their_location() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "seed = 3\n[triple]\nkind = \"flat\"\nmass = 2.0\n");
    let out = run(&["radial", "--config", &config], dir.path());
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("mass") && err.contains("line 4"), "{err}");
    assert!(!dir.path().join("summary.txt").exists());
}

#[test]
fn invalid_parameters_fail_before_computing() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["monotone", "--n", "2"], dir.path());
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("triple.n"));
    let out = run(&["monotone", "--beta", "-1"], dir.path());
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn usage_errors_exit_three_and_help_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["frobnicate"], dir.path()).status.code(), Some(3));
    assert_eq!(run(&["--help"], dir.path()).status.code(), Some(0));
    assert_eq!(run(&["--version"], dir.path()).status.code(), Some(0));
}

#[test]
fn field3d_writes_levels_critical_points_and_snapshot() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "[field]\nkind = \"single-center\"\nnodes = 49\nhalf_extent = 4.0\nlevels = [0.5]\nsnapshot = true\n",
    );
    let out = run(&["field3d", "--config", &config], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let levels = read(&dir.path().join("levels.csv"));
    assert_eq!(header(&levels), "t,beta,F,area,components,euler,du_margin,flags");
    assert!((column(&levels, "F")[0] - 4.0 * PI).abs() < 0.05 * 4.0 * PI);
    let critical = read(&dir.path().join("critical.csv"));
    assert_eq!(critical.lines().count(), 1);
    let snap = capacitary::field3d::read_snapshot(&dir.path().join("field.snap")).unwrap();
    assert_eq!(snap.grid.n, 49);
}

#[test]
fn selftest_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["selftest"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = read(&dir.path().join("selftest.csv"));
    assert_eq!(header(&csv), "module,name,value,tolerance,passed,theorem_backed");
    assert!(csv.lines().count() > 100);
}
