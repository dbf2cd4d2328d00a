use std::path::PathBuf;
use std::process::Command;

use nhssh::cli::{manifest_path, parse_config, render, run, CliError, ResultManifest};

fn args(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

fn read_manifest(out: &std::path::Path) -> ResultManifest {
    let text = std::fs::read_to_string(manifest_path(out)).unwrap();
    serde_json::from_str(&text).unwrap()
}

fn sha256_hex(bytes: &[u8]) -> String {
    use sha2::Digest;
    let mut h = sha2::Sha256::new();
    h.update(bytes);
    format!("{:x}", h.finalize())
}

#[test]
fn same_config_twice_is_bitwise_identical() {
    let dir = tempfile::tempdir().unwrap();
    let mut digests = Vec::new();
    for pass in 0..2 {
        let out = dir.path().join(format!("quench{pass}.csv"));
        let cfg = parse_config(&args(&[
            "quench",
            "--q", "0.5", "--eta", "0.4", "--qf", "2", "--etaf", "0.4",
            "--kpoints", "200", "--tpoints", "200", "--tmax", "6",
            "--out", out.to_str().unwrap(),
        ]))
        .unwrap();
        let manifest = run(&cfg).unwrap();
        assert_eq!(manifest.outputs.len(), 2); // data file + the manifest itself
        digests.push(manifest.outputs[0].sha256.clone());
    }
    assert_eq!(digests[0], digests[1]);
}

#[test]
fn render_round_trips_through_parse() {
    let cfg = parse_config(&args(&[
        "fisher-zeros",
        "--q", "0.5", "--eta", "2", "--etaf", "0.2",
        "--kpoints", "64", "--branch", "1",
        "--format", "json",
    ]))
    .unwrap();
    let rendered = render(&cfg);
    let reparsed = parse_config(&rendered).unwrap();
    assert_eq!(cfg, reparsed);
}

#[test]
fn csv_output_and_manifest_digest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("spectrum.csv");
    let cfg = parse_config(&args(&[
        "spectrum",
        "--q", "2", "--eta", "0.4",
        "--kpoints", "32",
        "--out", out.to_str().unwrap(),
    ]))
    .unwrap();
    run(&cfg).unwrap();

    let bytes = std::fs::read(&out).unwrap();
    let text = std::str::from_utf8(&bytes).unwrap();
    assert!(!text.contains('\r'), "CSV must use LF line endings");
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("k,"));
    for line in lines.clone() {
        for cell in line.split(',').skip(1) {
            // 17 significant digits: mantissa d.dddddddddddddddd e exponent
            assert!(
                cell.contains('e') && cell.split('e').next().unwrap().trim_start_matches('-').len() == 18,
                "cell `{cell}` is not full-precision scientific notation"
            );
        }
    }
    assert!(lines.count() == 32);

    let manifest = read_manifest(&out);
    assert_eq!(manifest.command, "spectrum");
    assert_eq!(manifest.outputs[0].sha256, sha256_hex(&bytes));
    assert!(PathBuf::from(&manifest.outputs[0].path).ends_with("spectrum.csv"));
}

#[test]
fn json_and_svg_formats_emit() {
    let dir = tempfile::tempdir().unwrap();
    for (fmt, probe) in [("json", "\"columns\""), ("svg", "<svg")] {
        let out = dir.path().join(format!("winding.{fmt}"));
        let cfg = parse_config(&args(&[
            "winding",
            "--q", "1", "--qf", "2",
            "--kpoints", "128", "--tpoints", "64", "--tmax", "4",
            "--format", fmt,
            "--out", out.to_str().unwrap(),
        ]))
        .unwrap();
        run(&cfg).unwrap();
        let text = std::fs::read_to_string(&out).unwrap();
        assert!(text.contains(probe), "{fmt} output missing `{probe}`");
    }
}

#[test]
fn config_file_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("exp.conf");
    std::fs::write(&path, "q = 1.5\n# comment\ntmax = 3\nkpoints = 48\n").unwrap();
    let cfg = parse_config(&args(&[
        "quench",
        "--config", path.to_str().unwrap(),
        "--tmax", "7",
    ]))
    .unwrap();
    assert_eq!(cfg.q, 1.5); // from file
    assert_eq!(cfg.tmax, 7.0); // flag wins
    assert_eq!(cfg.kpoints, 48);
    assert_eq!(cfg.eta, 0.0); // default

    std::fs::write(&path, "bogus = 1\n").unwrap();
    match parse_config(&args(&["quench", "--config", path.to_str().unwrap()])) {
        Err(CliError::Parse(_)) => {}
        other => panic!("expected parse error, got {other:?}"),
    }
}

#[test]
fn imaginary_quench_zeros_stay_on_axis() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("zeros.csv");
    let cfg = parse_config(&args(&[
        "fisher-zeros",
        "--q", "0.5", "--eta", "2", "--qf", "0.5", "--etaf", "0.2",
        "--kpoints", "500",
        "--out", out.to_str().unwrap(),
    ]))
    .unwrap();
    run(&cfg).unwrap();
    let text = std::fs::read_to_string(&out).unwrap();
    let mut max_re = 0.0f64;
    for line in text.lines().skip(1) {
        let re: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        max_re = max_re.max(re.abs());
    }
    assert!(max_re <= 1e-10, "max |Re z| = {max_re:e}");
}

#[test]
fn binary_reports_errors_on_one_line() {
    let out = Command::new(env!("CARGO_BIN_EXE_nhssh"))
        .args(["quench", "--tmax", "-1"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert_eq!(stderr.trim_end().lines().count(), 1, "stderr: {stderr}");
    assert!(stderr.starts_with("nhssh: "), "stderr: {stderr}");
}

#[test]
fn binary_happy_path_prints_digests() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("critical.csv");
    let res = Command::new(env!("CARGO_BIN_EXE_nhssh"))
        .args([
            "critical",
            "--q", "0.5", "--eta", "0.4", "--qf", "2", "--etaf", "0.4",
            "--kpoints", "400",
            "--out", out.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(res.status.success(), "stderr: {}", String::from_utf8_lossy(&res.stderr));
    let stdout = String::from_utf8(res.stdout).unwrap();
    assert!(stdout.lines().any(|l| l.contains("critical.csv")));
    assert!(out.exists() && manifest_path(&out).exists());
}
