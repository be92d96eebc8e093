//! CLI behavior: exit codes, CSV dialect, round-tripping.

use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_modelock"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn tongue_q1_closed_form() {
    let o = run(&[
        "tongue",
        "--map",
        "standard a=1/(4*pi)",
        "--frac",
        "0/1",
        "--tol",
        "1e-14",
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    let data = text
        .lines()
        .find(|l| !l.starts_with('#') && !l.starts_with("p,"))
        .unwrap();
    let width: f64 = data.split(',').nth(4).unwrap().parse().unwrap();
    assert!((width - 1.0 / (2.0 * std::f64::consts::PI)).abs() < 1e-12);
}

#[test]
fn staircase_csv_shape() {
    let o = run(&[
        "staircase",
        "--map",
        "rotation theta=0",
        "--range",
        "0",
        "1",
        "--samples",
        "11",
        "--q",
        "3",
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("# modelock staircase"));
    assert!(!text.contains('\r'), "CRLF leaked into output");
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "t,trans_lo,trans_hi");
    assert_eq!(rows.len(), 12);
    // Trans(R_0 + t) = t: first and last samples are exact.
    assert!(rows[1].starts_with("0,0,0"));
    assert!(rows[11].starts_with("1,1,1"));
}

#[test]
fn convergents_golden() {
    let o = run(&["convergents", "--theta", "golden", "--n-max", "6"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let rows: Vec<&str> = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("n,"))
        .collect();
    assert_eq!(rows.len(), 7);
    assert!(rows[6].starts_with("6,8,13,"));
}

#[test]
fn modulus_key_value_block() {
    let o = run(&[
        "modulus",
        "--map",
        "conjrot theta=golden eps=0.1",
        "--theta",
        "golden",
        "--depth",
        "13",
        "--k-max",
        "8",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.contains("tau_hat="));
    assert!(text.contains("residual="));
    assert!(text.lines().any(|l| l == "k,re_ck,im_ck,log_abs_ck"));
}

#[test]
fn config_errors_exit_2() {
    for args in [
        vec!["tongue", "--frac", "1/2"], // missing --map
        vec!["tongue", "--map", "standard a=1/(4*pi)", "--frac", "2/4"],
        vec!["tongue", "--map", "mystery x=1", "--frac", "1/2"],
        vec!["tongue", "--map", "standard a=0.2", "--frac", "1/2"], // not a diffeo
        vec![
            "staircase",
            "--map",
            "rotation theta=0",
            "--tol",
            "-1",
        ],
    ] {
        let o = run(&args);
        assert_eq!(o.status.code(), Some(2), "args {args:?}");
    }
}

#[test]
fn map_file_matches_inline() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("map.txt");
    std::fs::write(&path, "kind=conjrot\ntheta=golden\nepsilon=0.1\n").unwrap();
    let inline = run(&[
        "tongue",
        "--map",
        "conjrot theta=golden eps=0.1",
        "--frac",
        "1/2",
        "--tol",
        "1e-10",
    ]);
    let from_file = run(&[
        "tongue",
        "--map-file",
        path.to_str().unwrap(),
        "--frac",
        "1/2",
        "--tol",
        "1e-10",
    ]);
    assert!(inline.status.success());
    assert!(from_file.status.success());
    assert_eq!(stdout(&inline), stdout(&from_file));
}

#[test]
fn plot_script_written() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("stairs.csv");
    let o = run(&[
        "staircase",
        "--map",
        "rotation theta=0",
        "--samples",
        "5",
        "--q",
        "2",
        "--plot",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let gp = std::fs::read_to_string(dir.path().join("stairs.gp")).unwrap();
    assert!(gp.contains("stairs.csv"));
    assert!(gp.contains("plot"));
}

#[test]
fn emitted_numbers_round_trip() {
    // Shortest-string serialization must re-parse to the same value at
    // the run's precision; spot-check by re-parsing and re-serializing.
    let o = run(&[
        "staircase",
        "--map",
        "standard a=1/(4*pi)",
        "--samples",
        "7",
        "--q",
        "3",
        "--precision-bits",
        "128",
    ]);
    assert!(o.status.success());
    for line in stdout(&o).lines().filter(|l| !l.starts_with('#')).skip(1) {
        for field in line.split(',') {
            let x = modelock::precision::parse_float(128, field).unwrap();
            assert_eq!(modelock::precision::shortest_string(&x), field);
        }
    }
}
