use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn cecode(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cecode"))
        .args(args)
        .env_remove("CE_SEED")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}\nstderr: {}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn path_arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn build_reports_parameters() {
    let out = cecode(&["build", "--r", "2"]);
    assert!(out.status.success());
    assert_eq!(json(&out), serde_json::json!({"n": 8, "k": 1, "generators": 7}));

    let out = cecode(&["build", "--r", "3"]);
    assert_eq!(json(&out), serde_json::json!({"n": 16, "k": 4, "generators": 12}));
}

#[test]
fn build_rejects_small_r_without_writing() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("code.txt");
    let out = cecode(&["build", "--r", "1", "--out", path_arg(&file)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    assert!(!file.exists());
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn build_writes_code_file() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("code.txt");
    assert!(cecode(&["build", "--r", "2", "--out", path_arg(&file)]).status.success());
    let text = fs::read_to_string(&file).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "8 1 2");
    assert_eq!(lines[1], "ZZXXIIXX");
    assert_eq!(lines[7], "-IIIZIIIZ");
    assert_eq!(lines.len(), 1 + 7 + 2);
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn verify_family_codes() {
    let out = cecode(&["verify", "--r", "2", "--wmax", "3"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["distance"], 3);
    assert_eq!(v["excitation"], 4);
    assert_eq!(v["commutation_ok"], true);
    assert_eq!(v["passed"], true);
    assert_eq!(v["witness"].as_str().unwrap().chars().filter(|&c| c != 'I').count(), 3);

    let out = cecode(&["verify", "--r", "4", "--wmax", "3"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["distance"], 3);
    assert_eq!(v["excitation"], 16);
    assert_eq!(v["code"], "[[32,11,3]]");
}

#[test]
fn verify_below_distance_fails() {
    let out = cecode(&["verify", "--r", "2", "--wmax", "2"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["distance"], "greater than 2");
}

#[test]
fn verify_code_file_and_tampering() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("code.txt");
    assert!(cecode(&["build", "--r", "2", "--out", path_arg(&file)]).status.success());
    let out = cecode(&["verify", "--code", path_arg(&file)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    // flip one letter of g_0: breaks commutation
    let text = fs::read_to_string(&file).unwrap().replacen("ZZXXIIXX", "ZZXXIIXZ", 1);
    fs::write(&file, text).unwrap();
    let out = cecode(&["verify", "--code", path_arg(&file)]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["passed"], false);

    // sign flip keeps a valid code but not this one
    let text = fs::read_to_string(&file)
        .unwrap()
        .replacen("ZZXXIIXZ", "ZZXXIIXX", 1)
        .replacen("-IZIIIZII", "IZIIIZII", 1);
    fs::write(&file, text).unwrap();
    assert_eq!(cecode(&["verify", "--code", path_arg(&file)]).status.code(), Some(1));

    fs::write(&file, "8 1 2\nZZXXQIXX\n").unwrap();
    assert_eq!(cecode(&["verify", "--code", path_arg(&file)]).status.code(), Some(1));
}

#[test]
fn help_and_unknown_flags() {
    let out = cecode(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("sweep"));
    assert_eq!(cecode(&["sweep", "--help"]).status.code(), Some(0));
    let out = cecode(&["build", "--r", "2", "--bogus"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    assert_eq!(cecode(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn encode_matches_oracle() {
    let out = cecode(&[
        "encode", "--alpha-re", "0.6", "--beta-im", "0.8", "--theta", "0.9",
    ]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["gate_order"], "S*H*Tdg");
    assert_eq!(v["codespace_probability"], 1.0);
    assert_eq!(v["oracle_fidelity"], 1.0);
    assert_eq!(v["collective_z_fidelity"], 1.0);
    assert_eq!(v["excitation_spectrum"], serde_json::json!({"4": 1.0}));
    assert_eq!(v["logical_expectations"]["Z"], -0.28);
    assert_eq!(v["logical_expectations"]["Y"], 0.96);
    for e in v["syndrome_expectations"].as_array().unwrap() {
        assert_eq!(e, 1.0);
    }

    let out = cecode(&["encode", "--alpha-re", "0", "--beta-re", "0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn decode_single_errors() {
    let v = json(&cecode(&["decode", "--error", "IIIXIIII"]));
    assert_eq!(v["syndrome"], "0110001");
    assert_eq!(v["correction"], "IIIXIIII");
    assert_eq!(v["residual"], "stabilizer");

    let v = json(&cecode(&["decode", "--error", "IZZIIIII"]));
    assert_eq!(v["syndrome"], "1110000");
    assert_eq!(v["residual"], "heralded");
    assert!(v["correction"].is_null());

    assert_eq!(cecode(&["decode", "--error", "XX"]).status.code(), Some(2));
    assert_eq!(cecode(&["decode", "--error", "XXQ"]).status.code(), Some(2));
}

#[test]
fn sweep_report_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let args = |csv: &Path| {
        vec![
            "sweep".to_string(),
            "--p".into(),
            "0,0.02".into(),
            "--trials".into(),
            "3000".into(),
            "--seed".into(),
            "11".into(),
            "--jobs".into(),
            "2".into(),
            "--csv".into(),
            csv.to_str().unwrap().into(),
        ]
    };
    let run = |csv: &Path| {
        let owned = args(csv);
        let refs: Vec<&str> = owned.iter().map(String::as_str).collect();
        cecode(&refs)
    };
    let out = run(&a);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["points"][0]["failures"], 0);
    assert_eq!(v["points"][0]["trials"], 3000);
    assert!(v["points"][1]["failures"].as_u64().unwrap() > 0);
    assert!(v["thresholds"]["pseudo_threshold"].is_number());
    let q = &v["quadratic_coefficients"];
    assert_eq!(q["published"], 48.0);
    assert_eq!(q["without_weight2"], 28.0);
    assert!(q["exact"].is_number());
    assert_eq!(v["analysis"]["counts"], serde_json::json!([1, 24, 20]));

    assert!(run(&b).status.success());
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert!(fs::read_to_string(&a)
        .unwrap()
        .starts_with("p,trials,failures,heralded,fidelity,stderr\n0,3000,0,0,1,0\n"));
}

#[test]
fn sweep_seed_from_environment() {
    let run = |env: Option<&str>, seed: &str| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_cecode"));
        cmd.args(["sweep", "--p", "0.05", "--trials", "2000", "--seed", seed]);
        match env {
            Some(s) => cmd.env("CE_SEED", s),
            None => cmd.env_remove("CE_SEED"),
        };
        let out = cmd.output().unwrap();
        assert!(out.status.success());
        json(&out)
    };
    let a = run(Some("5"), "1");
    let b = run(None, "5");
    assert_eq!(a["metadata"]["seed"], 5);
    assert_eq!(a["points"], b["points"]);
}

#[test]
fn sweep_rejects_bad_arguments() {
    assert_eq!(cecode(&["sweep", "--p", "1.5", "--trials", "10"]).status.code(), Some(2));
    assert_eq!(cecode(&["sweep", "--p", "0.1", "--trials", "0"]).status.code(), Some(2));
    assert_eq!(cecode(&["sweep", "--dt", "soon", "--trials", "10"]).status.code(), Some(2));
    assert_eq!(cecode(&["sweep", "--order", "sideways"]).status.code(), Some(2));
    let out = cecode(&[
        "sweep", "--p", "0.05", "--trials", "500", "--dt", "0", "--order", "pauli-after-cc",
    ]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["delta_t"], 0.0);
    assert_eq!(v["ordering"], "pauli-after-cc");
}
