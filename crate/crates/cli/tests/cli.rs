use std::path::Path;
use std::process::{Command, Output};

fn npch(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_npch"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn npch_env(args: &[&str], threads: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_npch"))
        .args(args)
        .env("NPCH_THREADS", threads)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn read(p: &Path) -> Vec<u8> {
    std::fs::read(p).unwrap()
}

const SMALL: &[&str] = &[
    "--T0", "4", "--doublings", "1", "--ntheta", "16", "--cauchy-tol", "1",
];

fn solve_into(dir: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["solve", "cylinder", "--out", dir.to_str().unwrap()];
    args.extend_from_slice(extra);
    npch(&args)
}

#[test]
fn help_and_bad_flags() {
    assert_eq!(code(&npch(&["--help"])), 0);
    assert_eq!(code(&npch(&["solve", "cylinder", "--bogus"])), 2);
    assert_eq!(code(&npch(&["accept", "13"])), 2);
}

#[test]
fn unknown_config_key_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"nthета": 64}"#).unwrap();
    let o = npch(&["solve", "cylinder", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("nthета"));
}

#[test]
fn config_file_matches_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(
        &cfg,
        r#"{"T0": 4, "doublings": 1, "ntheta": 16, "cauchy-tol": 1}"#,
    )
    .unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert_eq!(code(&solve_into(&a, SMALL)), 0);
    assert_eq!(
        code(&solve_into(&b, &["--config", cfg.to_str().unwrap()])),
        0
    );
    for f in ["report.json", "profile.csv", "F_of_t.csv", "section.bin"] {
        assert_eq!(read(&a.join(f)), read(&b.join(f)), "{f}");
    }
}

#[test]
fn solve_is_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert_eq!(code(&solve_into(&a, SMALL)), 0);
    assert_eq!(code(&solve_into(&b, SMALL)), 0);
    let ma: serde_json::Value = serde_json::from_slice(&read(&a.join("manifest.json"))).unwrap();
    let mb: serde_json::Value = serde_json::from_slice(&read(&b.join("manifest.json"))).unwrap();
    assert_eq!(ma["artifacts"], mb["artifacts"]);
    assert_eq!(ma["artifacts"].as_array().unwrap().len(), 4);
    assert_eq!(ma["config"]["doublings"], 1);
    assert_eq!(ma["seed"], 0);

    // one profile row per unit window
    let report: serde_json::Value = serde_json::from_slice(&read(&a.join("report.json"))).unwrap();
    let t_max = report["levels"].as_array().unwrap().last().unwrap()["t_max"]
        .as_f64()
        .unwrap();
    let profile = String::from_utf8(read(&a.join("profile.csv"))).unwrap();
    assert_eq!(profile.lines().count() - 1, t_max.round() as usize);
    let bin = read(&a.join("section.bin"));
    assert_eq!(&bin[..5], b"NPCH1");
}

#[test]
fn uniqueness_ignores_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    let mut outs = Vec::new();
    for threads in ["1", "3"] {
        let out = dir.path().join(threads);
        let mut args = vec!["uniqueness", "--out", out.to_str().unwrap()];
        args.extend_from_slice(SMALL);
        let o = npch_env(&args, threads);
        assert_ne!(code(&o), 2, "{}", String::from_utf8_lossy(&o.stderr));
        outs.push(out);
    }
    assert_eq!(read(&outs[0].join("report.json")), read(&outs[1].join("report.json")));
}

#[test]
fn exit_code_three_on_numerical_failure() {
    let dir = tempfile::tempdir().unwrap();
    let o = solve_into(
        &dir.path().join("x"),
        &[
            "--T0", "4", "--doublings", "1", "--ntheta", "16", "--max-sweeps", "2",
        ],
    );
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn isometry_report_has_series_and_fit() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("iso.json");
    let o = npch(&[
        "isometry",
        "analyze",
        "--space",
        "spd",
        "--matrix",
        "[[1,1],[0,1]]",
        "--tmax",
        "40",
        "--steps",
        "400",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let r: serde_json::Value = serde_json::from_slice(&read(&out)).unwrap();
    assert_eq!(r["analysis"]["classification"], "parabolic");
    assert_eq!(r["series"].as_array().unwrap().len(), 401);
    let a = r["fit"]["a"].as_f64().unwrap();
    assert!((a - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-3);
}

#[test]
fn space_check_and_calculus() {
    assert_eq!(code(&npch(&["space", "check", "--space", "h2", "--kappa", "1", "--samples", "200"])), 0);
    assert_eq!(code(&npch(&["space", "check", "--space", "nowhere"])), 2);
    assert_eq!(code(&npch(&["calculus", "check", "--psi", "linear"])), 0);
    assert_eq!(code(&npch(&["calculus", "check", "--c", "-1"])), 2);
}

#[test]
fn bochner_generator_file() {
    let dir = tempfile::tempdir().unwrap();
    let gen = dir.path().join("poly.json");
    // z¹ z̄² + (z¹)² (z̄²)²: harmonic, degree 4
    std::fs::write(
        &gen,
        r#"{"terms": [
            {"powers": [1, 0, 0, 1], "coeff": [[1, 0]]},
            {"powers": [2, 0, 0, 2], "coeff": [[1, 0]]}
        ]}"#,
    )
    .unwrap();
    let out = dir.path().join("residuals.json");
    let o = npch(&[
        "bochner",
        "verify",
        "--generator",
        gen.to_str().unwrap(),
        "--mesh",
        "16",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let r: serde_json::Value = serde_json::from_slice(&read(&out)).unwrap();
    assert_eq!(r["generators"][0]["harmonic"], true);
    std::fs::write(&gen, r#"{"terms": [{"powers": [1, 0, 0, 1], "coef": [[1, 0]]}]}"#).unwrap();
    let o = npch(&["bochner", "verify", "--generator", gen.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
}

#[test]
fn accept_single_criterion() {
    let dir = tempfile::tempdir().unwrap();
    let o = npch(&["accept", "2", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("criterion  2") && stdout.contains("PASS"));
    let r: serde_json::Value = serde_json::from_slice(&read(&dir.path().join("report.json"))).unwrap();
    assert_eq!(r[0]["passed"], true);
    assert!(dir.path().join("manifest.json").exists());
}
