use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn recon(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_recon"))
        .args(args)
        .env("RECON_LOG", "error")
        .output()
        .expect("spawn recon")
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

const SMALL: [&str; 4] = ["--n", "1200", "--rate", "0.5,0.6,0.7"];

fn reconcile(extra: &[&str]) -> Output {
    let mut args = vec!["reconcile"];
    args.extend_from_slice(&SMALL);
    args.extend_from_slice(extra);
    recon(&args)
}

#[test]
fn construct_writes_files_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("m");
    let out = out_dir.to_str().unwrap();
    let run = recon(&["construct", "--n", "600", "--rate", "0.7", "--N", "3", "--seed", "1", "--out", out]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let manifest = json(&run);
    let files = manifest["files"].as_array().unwrap();
    assert_eq!(files.len(), 3);
    assert_eq!(manifest["m"], 180);
    let on_disk: Value = serde_json::from_str(&std::fs::read_to_string(out_dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(on_disk, manifest);

    let snapshot: Vec<Vec<u8>> = files
        .iter()
        .map(|f| std::fs::read(out_dir.join(f["file"].as_str().unwrap())).unwrap())
        .collect();
    assert!(recon(&["construct", "--n", "600", "--rate", "0.7", "--N", "3", "--seed", "1", "--out", out]).status.success());
    for (f, before) in files.iter().zip(&snapshot) {
        assert_eq!(&std::fs::read(out_dir.join(f["file"].as_str().unwrap())).unwrap(), before);
    }
}

#[test]
fn construct_rate_bounds() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert!(recon(&["construct", "--n", "600", "--rate", "0.95", "--out", out]).status.success());
    assert_eq!(recon(&["construct", "--n", "600", "--rate", "1.0", "--out", out]).status.code(), Some(3));
    // 600 * 0.333 is not a whole number of checks
    assert_eq!(recon(&["construct", "--n", "600", "--rate", "0.333", "--out", out]).status.code(), Some(3));
}

#[test]
fn identical_keys_reconcile_in_one_round() {
    let out = reconcile(&["--scheme", "MRCR", "--e", "0.03", "--flip-rate", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["result"]["success"], true);
    assert_eq!(v["result"]["rounds"], 1);
    assert_eq!(v["result"]["final_s"], 0);
    assert_eq!(v["keys_match"], true);
    assert_eq!(v["replay"]["args"]["seed"], 1);
}

#[test]
fn forced_failure_exits_with_decode_code() {
    let out = reconcile(&["--scheme", "MRCR", "--e", "0.03", "--flip-rate", "0.2", "--delta", "0.3"]);
    assert_eq!(out.status.code(), Some(2));
    let v = json(&out);
    assert_eq!(v["result"]["success"], false);
    assert_eq!(v["result"]["final_p"], 0);
    let sr = reconcile(&["--scheme", "SR", "--e", "0.03", "--flip-rate", "0.2"]);
    assert_eq!(sr.status.code(), Some(2));
    assert_eq!(json(&sr)["result"]["rounds"], 1);
}

#[test]
fn snr_flag_matches_error_rate_flag() {
    // Q(sqrt(10^0.351)) by direct quadrature of the Gaussian tail
    let x = 10f64.powf(0.351).sqrt();
    let steps = 200_000;
    let upper = x + 12.0;
    let h = (upper - x) / steps as f64;
    let pdf = |t: f64| (-t * t / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let mut q = pdf(x) + pdf(upper);
    for i in 1..steps {
        q += pdf(x + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    q *= h / 3.0;
    assert!((q - 0.0670).abs() < 1e-3);

    let by_snr = json(&reconcile(&["--snr", "3.51"]));
    let e = by_snr["replay"]["e"].as_f64().unwrap();
    assert!((e - q).abs() < 1e-9, "{e} vs {q}");
    let by_e = json(&reconcile(&["--e", &format!("{e:?}")]));
    assert_eq!(by_snr["result"], by_e["result"]);
    assert_eq!(by_snr["alice"], by_e["alice"]);
}

#[test]
fn out_of_range_error_rate_is_a_config_error() {
    let out = reconcile(&["--e", "0.3"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("out of supported range"));
    assert!(out.stdout.is_empty());
}

#[test]
fn mismatched_matrix_files_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert!(recon(&["construct", "--n", "600", "--rate", "0.5", "--N", "2", "--out", a.to_str().unwrap()]).status.success());
    assert!(recon(&["construct", "--n", "800", "--rate", "0.5", "--N", "1", "--out", b.to_str().unwrap()]).status.success());
    let files = |d: &Path| -> Vec<String> {
        let mut v: Vec<String> = std::fs::read_dir(d)
            .unwrap()
            .map(|e| e.unwrap().path())
            .filter(|p| p.extension().is_some_and(|x| x == "alist"))
            .map(|p| p.to_str().unwrap().to_owned())
            .collect();
        v.sort();
        v
    };
    let mut args = vec!["reconcile", "--scheme", "MR", "--N", "2", "--e", "0.02", "--matrix"];
    let fa = files(&a);
    let fb = files(&b);
    args.extend(fa.iter().map(String::as_str));
    let ok = recon(&args);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));
    args.push(fb[0].as_str());
    let bad = recon(&args);
    assert_eq!(bad.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("columns"));
}

#[test]
fn two_process_session_over_tcp() {
    let port = std::net::TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let addr = format!("127.0.0.1:{port}");
    let dir = tempfile::tempdir().unwrap();
    let ta = dir.path().join("alice.jsonl");
    let tb = dir.path().join("bob.jsonl");
    let spawn = |mode: &str, transcript: &Path| {
        let mut args: Vec<String> = vec!["reconcile".into()];
        args.extend(SMALL.iter().map(|s| s.to_string()));
        args.extend(["--e", "0.03", mode, &addr, "--transcript", transcript.to_str().unwrap()].map(String::from));
        Command::new(env!("CARGO_BIN_EXE_recon"))
            .args(args)
            .stdout(std::process::Stdio::piped())
            .spawn()
            .unwrap()
    };
    let alice = spawn("--listen", &ta);
    let bob = spawn("--connect", &tb);
    let ra = alice.wait_with_output().unwrap();
    let rb = bob.wait_with_output().unwrap();
    assert_eq!(ra.status.code(), Some(0));
    assert_eq!(rb.status.code(), Some(0));
    let (va, vb) = (json(&ra), json(&rb));
    assert_eq!(va["role"], "alice");
    assert_eq!(vb["role"], "bob");
    assert_eq!(va["result"]["key"], vb["result"]["key"]);
    assert_eq!(std::fs::read(&ta).unwrap(), std::fs::read(&tb).unwrap());

    // the same session in one process gives the same outcome
    let local = json(&reconcile(&["--e", "0.03"]));
    assert_eq!(local["result"]["key"], vb["result"]["key"]);
    assert_eq!(local["result"]["rounds"], vb["result"]["rounds"]);
}

#[test]
fn unreachable_peer_is_a_transport_error() {
    let port = std::net::TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let addr = format!("127.0.0.1:{port}");
    let out = reconcile(&["--e", "0.03", "--connect", &addr, "--connect-timeout", "0.3"]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn puncture_prints_a_plan() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let run = recon(&["construct", "--n", "600", "--rate", "0.5", "--N", "1", "--out", d]);
    let file = dir.path().join(json(&run)["files"][0]["file"].as_str().unwrap());
    let out = recon(&["puncture", "--matrix", file.to_str().unwrap(), "--p0", "25"]);
    assert!(out.status.success());
    let plan = json(&out);
    assert_eq!(plan["p0"], 25);
    assert_eq!(plan["order"].as_array().unwrap().len(), 25);
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("sweep.json");
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_owned()
}

const TINY: &str = r#"{"schemes": ["MRCR"], "n": [600], "rates": [0.5, 0.7], "snr": [6.0],
    "trials": 3, "ul": 50, "seed": 4}"#;

#[test]
fn tiny_sweep_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), TINY);
    let out_dir = dir.path().join("out");
    let out = recon(&["sweep", "--config", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["records"], 3);
    assert_eq!(v["points"].as_array().unwrap().len(), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("trials 3/3"));
    let trials = std::fs::read_to_string(out_dir.join("trials.csv")).unwrap();
    assert_eq!(trials.lines().count(), 4);
    assert!(trials.starts_with("point,trial,scheme"));
    assert_eq!(std::fs::read_to_string(out_dir.join("points.csv")).unwrap().lines().count(), 2);
    let summary: Value = serde_json::from_str(&std::fs::read_to_string(out_dir.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["digest"], v["digest"]);
    assert_eq!(summary["config"]["seed"], 4);
}

#[test]
fn sweep_overrides_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), TINY);
    let a = json(&recon(&["sweep", "--config", &cfg, "-q"]));
    let b = json(&recon(&["sweep", "--config", &cfg, "-q"]));
    assert_eq!(a["digest"], b["digest"]);
    let c = json(&recon(&["sweep", "--config", &cfg, "-q", "--seed", "5", "--trials", "2"]));
    assert_eq!(c["records"], 2);
    assert_eq!(c["config"]["seed"], 5);
    assert_ne!(c["digest"], a["digest"]);
}

#[test]
fn sweep_rejects_unknown_keys() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &TINY.replace("\"ul\"", "\"fd_\": [1.1], \"ul\""));
    let out = recon(&["sweep", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("fd_"));
    assert!(out.stdout.is_empty());
}
