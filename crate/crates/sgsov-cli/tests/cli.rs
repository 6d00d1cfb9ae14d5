use std::path::PathBuf;
use std::process::{Command, Output};

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn sgsov(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sgsov")).args(args).current_dir(root()).output().expect("binary runs")
}

fn rows(out: &Output) -> Vec<serde_json::Value> {
    String::from_utf8_lossy(&out.stdout).lines().map(|l| serde_json::from_str(l).expect("json line")).collect()
}

fn tmp(name: &str, body: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("sgsov-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

#[test]
fn check_algebra_cfg_a() {
    let out = sgsov(&["--config", "configs/cfg-a.json", "check-algebra"]);
    assert_eq!(out.status.code(), Some(0));
    let r = rows(&out);
    assert!(!r.is_empty() && r.iter().all(|x| x["pass"] == true && x["criterion"] == 1));
}

#[test]
fn even_p_is_rejected() {
    let p = tmp("even.json", r#"{"model": {"p": 4, "kappa": [[0, 1.1]], "xi": [[1, 0]]}}"#);
    let out = sgsov(&["--config", p.to_str().unwrap(), "check-algebra"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("p must be odd"));
    let p = tmp("typo.json", r#"{"model": {"p": 3, "kappa": [[0, 1.1]], "xi": [[1, 0]]}, "sed": 3}"#);
    assert_eq!(sgsov(&["--config", p.to_str().unwrap(), "check-algebra"]).status.code(), Some(2));
    assert_eq!(sgsov(&["check-algebra"]).status.code(), Some(2));
    assert_eq!(sgsov(&["--preset", "cfg-a", "--tol", "-1", "check-algebra"]).status.code(), Some(2));
}

#[test]
fn degenerate_kappa_exits_3() {
    let p = tmp("kappa.json", r#"{"model": {"p": 3, "kappa": [[1, 0], [0, 1.3]], "xi": [[1, 0], [1.2, 0]]}}"#);
    let p = p.to_str().unwrap();
    assert_eq!(sgsov(&["--config", p, "check-algebra"]).status.code(), Some(0));
    assert_eq!(sgsov(&["--config", p, "check-algebra", "--reconstruct"]).status.code(), Some(3));
}

#[test]
fn colliding_xi_exits_3() {
    let out = sgsov(&["--config", "configs/colliding-xi.json", "verify-all"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(rows(&out).iter().any(|r| r["label"] == "sov basis construction"));
}

#[test]
fn spectrum_rows() {
    let out = sgsov(&["--config", "configs/cfg-a.json", "spectrum"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(rows(&out).len(), 27);
    let out = sgsov(&["--preset", "single-site", "spectrum"]);
    let r = rows(&out);
    assert_eq!(r.len(), 3);
    for x in &r {
        assert_eq!(x["t_min_degree"], 0);
        assert_eq!(x["t_coefficients"].as_array().unwrap().len(), 1);
    }
}

#[test]
fn csv_header_is_stable() {
    let a = std::env::temp_dir().join(format!("sgsov-spec-a-{}.csv", std::process::id()));
    let b = std::env::temp_dir().join(format!("sgsov-spec-b-{}.csv", std::process::id()));
    sgsov(&["--preset", "cfg-b", "--csv", a.to_str().unwrap(), "spectrum"]);
    sgsov(&["--preset", "cfg-b", "--seed", "99", "--csv", b.to_str().unwrap(), "spectrum"]);
    let ha = std::fs::read_to_string(&a).unwrap().lines().next().unwrap().to_string();
    let hb = std::fs::read_to_string(&b).unwrap().lines().next().unwrap().to_string();
    assert_eq!(ha, hb);
    assert_eq!(ha, "index,sector,t_min_degree,t_coefficients,q_coefficients,baxter_residual,functional_equation_residual,pass");
}

#[test]
fn ff_u_all_pairs_cfg_a() {
    let out = sgsov(&["--config", "configs/cfg-a.json", "ff", "u", "--site", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let r = rows(&out);
    assert_eq!(r.len(), 729);
    assert!(r.iter().all(|x| x["pass"] == true));
}

#[test]
fn ff_selection_zeros_are_flagged() {
    let r = rows(&sgsov(&["--preset", "cfg-b", "ff", "u"]));
    let zeros: Vec<_> = r.iter().filter(|x| x["selection_rule_applied"] == true).collect();
    assert!(!zeros.is_empty());
    assert!(zeros.iter().all(|x| x["determinant"] == serde_json::json!([0.0, 0.0])));
}

#[test]
fn ff_npoint_and_elementary() {
    let out = sgsov(&["--preset", "cfg-a", "ff", "npoint", "--ops", "u1,u1"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(rows(&out).len(), 27);
    let out = sgsov(&["--preset", "cfg-b", "ff", "elementary", "--element", "h=1,h0=1,o=0/1/1", "--stride", "2,2"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(rows(&out).len(), 25);
    let out = sgsov(&["--preset", "cfg-a", "ff", "elementary", "--element", "h=1,o=0/1/1"]);
    assert_eq!(out.status.code(), Some(2));
    let out = sgsov(&["--preset", "cfg-a", "ff", "elementary", "--element", "o=5/1/1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_all_is_reproducible() {
    let a = sgsov(&["--preset", "cfg-b", "--seed", "5", "verify-all"]);
    let b = sgsov(&["--preset", "cfg-b", "--seed", "5", "--threads", "2", "verify-all"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn json_output_file_mirrors_stdout() {
    let path = std::env::temp_dir().join(format!("sgsov-scalar-{}.jsonl", std::process::id()));
    let out = sgsov(&["--preset", "cfg-b", "--json", path.to_str().unwrap(), "scalar"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(std::fs::read(&path).unwrap(), out.stdout);
}
