use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

fn zb(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zb"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_to(spec: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![
        "run",
        spec.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    zb(&args)
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

fn checks_with_prefix<'a>(r: &'a Value, prefix: &str) -> Vec<&'a Value> {
    r["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["name"].as_str().unwrap().starts_with(prefix))
        .collect()
}

#[test]
fn bad_spec_exits_nonzero() {
    let out = zb(&["run", fixture("bad.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bad.json"));
    let out = zb(&["validate", "/nonexistent.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn validate_loads_two_generators() {
    let out = zb(&["validate", fixture("hecke-free-λ2.json").to_str().unwrap()]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("2 generators"));
}

#[test]
fn aux_stage_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_to(
        &fixture("hecke-free-λ2.json"),
        dir.path(),
        &["--stage", "aux"],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let r = report(dir.path());
    let aux = checks_with_prefix(&r, "aux.");
    assert!(aux.len() >= 4);
    assert!(aux.iter().all(|c| c["pass"] == true));
    assert!(r.get("branches").is_none());
    assert!(!dir.path().join("zeta.csv").exists());
}

#[test]
fn zeta_stage_writes_csv_row() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_to(
        &fixture("cyclic-λ2.json"),
        dir.path(),
        &["--stage", "zeta", "--s", "2.0"],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = fs::read_to_string(dir.path().join("zeta.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(
        lines[0],
        "re_s,im_s,det_re,det_im,zeta_re,zeta_im,rel_err,tail_bound"
    );
    assert_eq!(lines.len(), 2);
    let row: Vec<f64> = lines[1].split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(row[0], 2.0);
    assert!(row[6] < 1e-6, "rel_err {}", row[6]);
    // Π_k (1 − 2^{−(2+k)})², two classes of length log 2
    let oracle: f64 = (0..=40)
        .map(|k| (1.0 - 2f64.powi(-(2 + k))).powi(2))
        .product();
    assert!((row[4] - oracle).abs() < 1e-12);
}

#[test]
fn reports_are_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        let out = run_to(&fixture("hecke-free-λ2.json"), d.path(), &[]);
        assert!(out.status.success());
    }
    for name in ["report.json", "domain.svg", "branches.svg", "zeta.csv"] {
        assert_eq!(
            fs::read(a.path().join(name)).unwrap(),
            fs::read(b.path().join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn figures_for_the_example() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_to(
        &fixture("hecke-free-λ2.json"),
        dir.path(),
        &["--stage", "branches"],
    );
    assert!(out.status.success());
    let branches = fs::read_to_string(dir.path().join("branches.svg")).unwrap();
    assert_eq!(branches.matches(r#"class="base""#).count(), 7);
    assert_eq!(branches.matches(r#"class="stripe""#).count(), 11);
    for label in ["C₁<", "C₄<", "C₁₁<"] {
        assert!(branches.contains(label), "{label}");
    }

    let out = run_to(
        &fixture("hecke-free-λ2.json"),
        dir.path(),
        &["--stage", "ford"],
    );
    assert!(out.status.success());
    let domain = fs::read_to_string(dir.path().join("domain.svg")).unwrap();
    assert_eq!(domain.matches(r#"class="side""#).count(), 3);
    assert!(domain.contains(r#"class="exterior""#));
}

#[test]
fn saved_branch_system_verifies_identically() {
    let dir = tempfile::tempdir().unwrap();
    let spec_path = fixture("cyclic-λ2.json");
    assert!(run_to(&spec_path, dir.path(), &["--stage", "verify"])
        .status
        .success());
    let first = report(dir.path());

    let mut spec: Value = serde_json::from_str(&fs::read_to_string(&spec_path).unwrap()).unwrap();
    spec["branch_system"] = first["branches"]["system"].clone();
    let reloaded = dir.path().join("reloaded.json");
    fs::write(&reloaded, serde_json::to_string(&spec).unwrap()).unwrap();
    let out_dir = dir.path().join("second");
    let out = run_to(&reloaded, &out_dir, &["--stage", "verify"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let second = report(&out_dir);
    assert_eq!(first["verify"], second["verify"]);
    assert_eq!(second["branches"]["provenance"], "UserSupplied");
}

#[test]
fn waivers_control_the_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let spec = fixture("schottky.json");
    let base = ["--stage", "zeta", "--s", "2", "--order", "8"];
    let out = run_to(&spec, dir.path(), &base);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(
        report(dir.path())["failures"],
        serde_json::json!(["zeta.contraction"])
    );

    let mut waived = base.to_vec();
    waived.extend(["--waive", "contraction"]);
    let out = run_to(&spec, dir.path(), &waived);
    assert!(out.status.success());
    assert_eq!(report(dir.path())["pass"], true);
}
