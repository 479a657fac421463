use std::io::Write;
use std::process::{Command, Output};

use clap::Parser;
use serde_json::Value;

use metaward_cli::{run, RunConfig, EXIT_FAIL, EXIT_PASS, EXIT_USAGE};

fn metaward(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_metaward"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_args(args: &[&str]) -> metaward_cli::Outcome {
    let mut full = vec!["metaward"];
    full.extend_from_slice(args);
    run(&RunConfig::try_parse_from(full).expect("arguments parse"))
}

#[test]
fn algebra_check_json_reports_all_zero() {
    let out = run_args(&["algebra-check", "--family", "meta", "--nmax", "3", "--format", "json"]);
    assert_eq!(out.code, EXIT_PASS);
    let v: Value = serde_json::from_str(&out.output).unwrap();
    assert_eq!(v["report"]["all_zero"], Value::Bool(true));
    assert_eq!(v["tool"], "metaward");
    assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(v["parameters"]["nmax"], 3);
    assert_eq!(v["parameters"]["gamma"], "formal");
}

#[test]
fn numeric_parameters_are_substituted_exactly() {
    let out = run_args(&["algebra-check", "--family", "meta", "--nmax", "2", "--x", "0.5", "--gamma", "-1.25"]);
    assert_eq!(out.code, EXIT_PASS, "{}", out.output);
    let out = run_args(&["n-check", "--nmax", "2", "--nu1", "0.75", "--nu2", "0.75", "--c", "2"]);
    assert_eq!(out.code, EXIT_PASS, "{}", out.output);
    assert_eq!(run_args(&["n-check", "--nu1", "1", "--nu2", "2"]).code, EXIT_USAGE);
    assert_eq!(run_args(&["algebra-check", "--mu", "1"]).code, EXIT_USAGE);
}

#[test]
fn mutated_y0_fails_with_exit_one() {
    let out = metaward(&["algebra-check", "--family", "meta", "--nmax", "3", "--mutate"]);
    assert_eq!(out.status.code(), Some(EXIT_FAIL));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("FAIL"), "{text}");
}

#[test]
fn singularity_demo_emits_csv_and_flags_divergence() {
    let out = metaward(&["singularity-demo", "--mu", "1", "--gamma", "1"]);
    assert_eq!(out.status.code(), Some(EXIT_PASS));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("eps,r_over_t,value,status"));
    let rows: Vec<&str> = lines.collect();
    assert!(rows.iter().any(|r| r.ends_with(",divergent")));
    assert!(rows.last().unwrap().starts_with("0.0000000000000000e0,"));
}

#[test]
fn commutator_of_translation_and_dilatation() {
    let out = metaward(&["commutator", "-dr", "-t*dt-r*dr-x"]);
    assert_eq!(out.status.code(), Some(EXIT_PASS));
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "dr\n");
    let out = metaward(&["commutator", "-t*dt-r*dr-x", "-dr"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "-dr\n");
}

#[test]
fn syntax_errors_exit_two_with_position() {
    let out = metaward(&["commutator", "-t*dt + + r", "dr"]);
    assert_eq!(out.status.code(), Some(EXIT_USAGE));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("1:9"), "{err}");
    assert_eq!(metaward(&["no-such-command"]).status.code(), Some(EXIT_USAGE));
    assert_eq!(metaward(&["hardy-m2", "--nu-sum", "0.4"]).status.code(), Some(EXIT_USAGE));
    assert_eq!(metaward(&["hardy-spectrum", "--lambda", "0"]).status.code(), Some(EXIT_USAGE));
}

#[test]
fn final_form_fails_off_its_half_plane() {
    let ok = run_args(&["ward-residual", "--family", "meta-final"]);
    assert_eq!(ok.code, EXIT_PASS, "{}", ok.output);
    let bad = run_args(&["ward-residual", "--family", "meta-final", "--region", "negative-ratio"]);
    assert_eq!(bad.code, EXIT_FAIL);
    assert_eq!(run_args(&["ward-residual", "--family", "ortho"]).code, EXIT_USAGE);
}

#[test]
fn grid_files_and_output_paths() {
    let dir = tempfile::tempdir().unwrap();
    let grid = dir.path().join("grid.csv");
    let mut f = std::fs::File::create(&grid).unwrap();
    writeln!(f, "t,r,zeta1,zeta2\n1.0,0.5,0,0\n2.0,1.0,0.5,-1\n-1.0,-0.5,0,0").unwrap();
    drop(f);
    let out_path = dir.path().join("table.csv");
    let out = metaward(&[
        "correlator-table",
        "--family",
        "meta-final",
        "--grid",
        grid.to_str().unwrap(),
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(EXIT_PASS));
    assert!(out.stdout.is_empty());
    let table = std::fs::read_to_string(&out_path).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines[0], "family,x1,gamma1,mu,t,r,re,im");
    assert_eq!(lines.len(), 4);
    // exchange symmetry: rows 1 and 3 are mirror images
    let value = |line: &str| line.split(',').nth(6).unwrap().to_string();
    assert_eq!(value(lines[1]), value(lines[3]));

    let missing = metaward(&["correlator-table", "--grid", "/nonexistent/grid.csv"]);
    assert_eq!(missing.status.code(), Some(EXIT_USAGE));
}

#[test]
fn identical_configs_give_identical_bytes_across_thread_counts() {
    let configs: [&[&str]; 4] = [
        &["algebra-check", "--family", "meta-dual", "--nmax", "3", "--format", "json"],
        &["ward-residual", "--format", "json"],
        &["correlator-table", "--family", "dual"],
        &["hardy-m2", "--format", "csv"],
    ];
    for args in configs {
        let runs: Vec<Vec<u8>> = ["1", "4", "1"]
            .iter()
            .map(|threads| {
                let out = Command::new(env!("CARGO_BIN_EXE_metaward"))
                    .args(args)
                    .env("METAWARD_THREADS", threads)
                    .output()
                    .unwrap();
                assert_eq!(out.status.code(), Some(EXIT_PASS), "{args:?}");
                out.stdout
            })
            .collect();
        assert!(runs.windows(2).all(|w| w[0] == w[1]), "{args:?}");
    }
}

#[test]
fn bad_thread_count_is_a_usage_error() {
    let out = Command::new(env!("CARGO_BIN_EXE_metaward"))
        .arg("n-check")
        .env("METAWARD_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(EXIT_USAGE));
}

#[test]
fn every_check_command_passes_on_defaults() {
    for cmd in [
        "n-check",
        "dynsym-check",
        "chiral-check",
        "contract",
        "reduced-system",
        "w-collapse",
        "properties",
        "hardy-spectrum",
    ] {
        let out = run_args(&[cmd]);
        assert_eq!(out.code, EXIT_PASS, "{cmd}: {}", out.output);
        let json = run_args(&[cmd, "--format", "json"]);
        let v: Value = serde_json::from_str(&json.output).unwrap();
        assert_eq!(v["pass"], Value::Bool(true), "{cmd}");
    }
}
