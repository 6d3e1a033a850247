use std::io::Write;
use std::process::Command;

use tempfile::NamedTempFile;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_darboux"))
}

fn config_file(json: &str) -> NamedTempFile {
    let mut f = NamedTempFile::new().unwrap();
    f.write_all(json.as_bytes()).unwrap();
    f
}

fn figure1() -> NamedTempFile {
    config_file(
        r#"{"family": "figure1", "space_form": {"kind": "kappa", "kappa": 1.0}, "polarisation": "arc"}"#,
    )
}

fn figure2() -> NamedTempFile {
    config_file(
        r#"{"family": "figure2", "space_form": {"kind": "euclidean"}, "polarisation": "arc"}"#,
    )
}

fn run(args: &[&str]) -> (i32, String, String) {
    let out = bin().args(args).output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

#[test]
fn sweep_emits_csv_with_identity_row_at_mu_zero() {
    let cfg = figure1();
    let path = cfg.path().to_str().unwrap();
    let (code, stdout, _) = run(&[
        "sweep", "--curve", path, "--mu-min", "-0.2", "--mu-max", "0.2", "--grid", "5",
        "--steps", "256",
    ]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(
        lines[0],
        "mu,trace,defect,branch,theta_unwrapped,re_lambda,im_lambda"
    );
    assert_eq!(lines.len(), 6);
    // the middle grid point is mu = 0
    let row: Vec<&str> = lines[3].split(',').collect();
    assert_eq!(row[0].parse::<f64>().unwrap(), 0.0);
    assert!((row[1].parse::<f64>().unwrap() - 4.0).abs() < 1e-12);
    assert_eq!(row[3], "IDENTITY");
    assert_eq!(row[4].parse::<f64>().unwrap(), 0.0);
}

#[test]
fn sweep_is_deterministic_and_converged() {
    let cfg = figure1();
    let path = cfg.path().to_str().unwrap();
    // grid chosen so no sample lands next to the resonance at mu = 0.943,
    // where the rotation eigenvalue is ill-conditioned
    let args = [
        "sweep", "--curve", path, "--mu-min", "-0.3", "--mu-max", "1.2", "--grid", "11",
        "--steps", "8192",
    ];
    let (c1, out1, _) = run(&args);
    let (c2, out2, _) = run(&args);
    assert_eq!((c1, c2), (0, 0));
    assert_eq!(out1, out2, "identical config must give byte-identical CSV");

    // doubling the steps moves every lambda by less than 1e-6
    let (c3, out3, _) = run(&[
        "sweep", "--curve", path, "--mu-min", "-0.3", "--mu-max", "1.2", "--grid", "11",
        "--steps", "16384",
    ]);
    assert_eq!(c3, 0);
    for (a, b) in out1.lines().skip(1).zip(out3.lines().skip(1)) {
        let ra: Vec<f64> = a.split(',').enumerate().filter(|(i, _)| *i != 3)
            .map(|(_, v)| v.parse().unwrap()).collect();
        let rb: Vec<f64> = b.split(',').enumerate().filter(|(i, _)| *i != 3)
            .map(|(_, v)| v.parse().unwrap()).collect();
        let d_re = (ra[4] - rb[4]).abs();
        let d_im = (ra[5] - rb[5]).abs();
        assert!(d_re < 1e-6 && d_im < 1e-6, "lambda moved by ({d_re:e}, {d_im:e})");
    }
}

#[test]
fn resonance_locates_figure1_point() {
    let cfg = figure1();
    let path = cfg.path().to_str().unwrap();
    let (code, stdout, _) = run(&[
        "resonance", "--curve", path, "--mu-min", "-0.4", "--mu-max", "3.0", "--grid",
        "200", "--steps", "1024",
    ]);
    assert_eq!(code, 0);
    let entries: Vec<serde_json::Value> = serde_json::from_str(&stdout).unwrap();
    assert!(entries
        .iter()
        .any(|e| (e["mu_star"].as_f64().unwrap() - 0.94298625).abs() < 1e-3));
    for e in &entries {
        assert!(e["mu_star"].as_f64().unwrap() > -0.5, "mu_star must exceed -kappa/2");
        assert!(e["residual"].as_f64().unwrap() <= 1e-5);
    }
}

#[test]
fn transform_eigen_seeds_close_and_random_seed_does_not() {
    let cfg = figure2();
    let path = cfg.path().to_str().unwrap();
    let (code, stdout, _) = run(&[
        "transform", "--curve", path, "--mu", "1.0", "--steps", "512", "--eigen",
    ]);
    assert_eq!(code, 0);
    let mut seen = [false; 2];
    for line in stdout.lines().skip(1) {
        let row: Vec<&str> = line.split(',').collect();
        let idx: usize = row[0].parse().unwrap();
        let closure: f64 = row[9].parse().unwrap();
        assert!(closure < 1e-6, "eigenvector seed {idx} must close");
        seen[idx] = true;
    }
    assert_eq!(seen, [true, true], "expected two closed transforms");

    let (code, stdout, _) = run(&[
        "transform", "--curve", path, "--mu", "1.0", "--steps", "256", "--num-seeds", "1",
    ]);
    assert_eq!(code, 0);
    let last = stdout.lines().last().unwrap();
    let closure: f64 = last.split(',').nth(9).unwrap().parse().unwrap();
    assert!(closure > 1e-2, "a random non-eigenvector seed must stay open");
}

#[test]
fn verify_passes_for_figure2_and_for_neg_arc() {
    let cfg = figure2();
    let path = cfg.path().to_str().unwrap();
    let (code, stdout, _) = run(&["verify", "--curve", path]);
    assert_eq!(code, 0, "default figure2 config must pass: {stdout}");
    let report: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert!(report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .all(|c| c["pass"].as_bool().unwrap()));

    let neg = config_file(
        r#"{"family": "figure2", "space_form": {"kind": "euclidean"}, "polarisation": "neg_arc"}"#,
    );
    let (code, _, _) = run(&["verify", "--curve", neg.path().to_str().unwrap()]);
    assert_eq!(code, 0, "neg-arc variant must pass the sign-adjusted check");
}

#[test]
fn verify_flags_corrupted_polarisation() {
    // constant m = 2 is not the arc-length polarisation, so the linear
    // candidate is not conserved
    let cfg = config_file(
        r#"{"family": "figure2", "space_form": {"kind": "euclidean"},
            "polarisation": {"explicit_m": [2.0, 2.0, 2.0, 2.0]}}"#,
    );
    let (code, stdout, stderr) = run(&["verify", "--curve", cfg.path().to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(stderr.contains("linear_conserved_quantity"));
    let report: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    let pcq = report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == "linear_conserved_quantity")
        .unwrap();
    assert_eq!(pcq["pass"], false);
}

#[test]
fn config_errors_exit_with_code_1() {
    let (code, _, _) = run(&["sweep", "--curve", "/nonexistent.json", "--mu-min", "0.0",
        "--mu-max", "1.0"]);
    assert_eq!(code, 1);

    let bad = config_file(r#"{"family": "heart", "space_form": {"kind": "euclidean"}, "polarisation": "arc"}"#);
    let (code, _, stderr) = run(&["sweep", "--curve", bad.path().to_str().unwrap(),
        "--mu-min", "0.0", "--mu-max", "1.0"]);
    assert_eq!(code, 1);
    assert!(stderr.contains("unknown curve family"));

    // an open curve is a config error, not a numeric one
    let open = config_file(
        r#"{"family": "circle", "params": {"r": 1.0}, "period": 3.0,
            "space_form": {"kind": "euclidean"}, "polarisation": "arc"}"#,
    );
    let (code, _, _) = run(&["sweep", "--curve", open.path().to_str().unwrap(),
        "--mu-min", "0.0", "--mu-max", "1.0"]);
    assert_eq!(code, 1);

    // usage errors too
    let (code, _, _) = run(&["sweep"]);
    assert_eq!(code, 1);
}

#[test]
fn lift_roundtrips_the_projection() {
    let cfg = figure2();
    let path = cfg.path().to_str().unwrap();
    let (code, stdout, _) = run(&["lift", "--curve", path, "--grid", "16"]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines[0], "s,x1,x2,X0,X1,X2,X3,px1,px2");
    assert_eq!(lines.len(), 17);
    for line in &lines[1..] {
        let row: Vec<f64> = line.split(',').map(|v| v.parse().unwrap()).collect();
        assert!((row[1] - row[7]).abs() < 1e-12);
        assert!((row[2] - row[8]).abs() < 1e-12);
    }
}
