use std::fs;
use std::process::Command;

use bemalg_cli::{num, run, Command as Cmd, RunConfig, Table};

fn bemalg(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_bemalg")).args(args).output().unwrap()
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(bemalg(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(bemalg(&["fig1", "--shape", "sphere"]).status.code(), Some(2));
    assert_eq!(bemalg(&["fig1", "--h", "0"]).status.code(), Some(2));
    assert_eq!(bemalg(&["dirichlet", "--h", "0.5", "--tol", "2"]).status.code(), Some(2));
}

#[test]
fn fig1_writes_deterministic_reports() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        let status = bemalg(&["fig1", "--shape", "cube", "--h", "0.5", "--out", out.to_str().unwrap()]).status;
        assert_eq!(status.code(), Some(0));
        let report = fs::read_to_string(out.join("report.txt")).unwrap();
        assert!(report.contains("[pass]") && !report.contains("FAIL"));
        outputs.push(fs::read_to_string(out.join("single_layer_cube_h_0.5.csv")).unwrap());
        outputs.push(fs::read_to_string(out.join("hypersingular_cube_h_0.5.csv")).unwrap());
    }
    assert_eq!(outputs[0], outputs[2]);
    assert_eq!(outputs[1], outputs[3]);
    let header = outputs[0].lines().next().unwrap();
    assert_eq!(header, "vertex,x,y,z,value");
    // 27 vertices on the h = 0.5 cube surface minus the hidden centre: 26.
    assert_eq!(outputs[0].lines().count(), 27);
}

#[test]
fn failed_runs_still_write_a_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t");
    // Transmission needs a positive wavenumber.
    let status = bemalg(&["transmission", "--h", "1", "--k", "0", "--out", out.to_str().unwrap()]).status;
    assert_ne!(status.code(), Some(0));
    let missing = dir.path().join("missing.msh");
    let status = bemalg(&["fig1", "--shape", "file", "--mesh", missing.to_str().unwrap(), "--out", out.to_str().unwrap()]).status;
    assert_eq!(status.code(), Some(1));
    assert!(fs::read_to_string(out.join("report.txt")).unwrap().contains("FAIL"));
}

#[test]
fn dirichlet_table_has_a_row_per_level() {
    let config = RunConfig { tol: Some(1e-8), ..RunConfig::sphere(&[0, 1]) };
    let report = run(Cmd::Dirichlet, &config).unwrap();
    let (name, table) = &report.tables[0];
    assert_eq!(name, "iterations.csv");
    assert_eq!(table.rows.len(), 2);
    assert_eq!(table.header[3], "iterations_plain");
    let converged: Vec<_> = report.checks.iter().filter(|c| c.name.ends_with("converged")).collect();
    assert_eq!(converged.len(), 2);
    assert!(converged.iter().all(|c| c.passed), "{}", report.render());
}

#[test]
fn csv_numbers_round_trip() {
    for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23] {
        assert_eq!(num(x).parse::<f64>().unwrap(), x);
    }
    let mut t = Table::new(&["a", "b"]);
    t.push(vec!["1".into(), num(0.5)]);
    assert_eq!(t.to_csv(), "a,b\n1,0.5\n");
}
