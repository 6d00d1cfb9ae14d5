use sgsov::config::ModelConfig;
use sgsov::oracle::*;
use sgsov::scalar::c;
use sgsov::sov_basis::SovBasis;
use sgsov::spectrum::diagonalize_transfer;
use sgsov::{CMat64, CVec64, Model64};

fn run(cfg: ModelConfig) -> Vec<ComparisonReport> {
    let m: Model64 = cfg.build().unwrap();
    let t = std::time::Instant::now();
    let reps = verify_suite(&m, 7, &Tolerances::default());
    println!("suite {:.1}s, {} reports", t.elapsed().as_secs_f64(), reps.len());
    for r in reps.iter().filter(|r| !r.pass) {
        println!("FAIL {}", r.to_json_line());
    }
    reps
}

#[test]
fn suite_cfg_a() {
    let reps = run(ModelConfig::cfg_a());
    assert!(reps.iter().all(|r| r.pass));
    for k in 1..=8 {
        assert!(reps.iter().any(|r| r.criterion == k), "criterion {k} missing");
    }
}

#[test]
fn suite_cfg_b() {
    assert!(run(ModelConfig::cfg_b()).iter().all(|r| r.pass));
}

#[test]
fn suite_single_site() {
    assert!(run(ModelConfig::single_site()).iter().all(|r| r.pass));
}

#[test]
fn suite_is_deterministic() {
    let m: Model64 = ModelConfig::cfg_b().build().unwrap();
    let a: Vec<String> = verify_suite(&m, 11, &Tolerances::default()).iter().map(|r| r.to_json_line()).collect();
    let b: Vec<String> = verify_suite(&m, 11, &Tolerances::default()).iter().map(|r| r.to_json_line()).collect();
    assert_eq!(a, b);
}

#[test]
fn report_pass_rule() {
    let r = ComparisonReport::compare(0, "x", c(1.0 + 1e-9, 0.0), c(1.0, 0.0), 1.0, 1e-8);
    assert!(r.pass);
    let r = ComparisonReport::compare(0, "x", c(1e-14, 0.0), c(0.0, 0.0), 1.0, 1e-8);
    assert!(r.pass && r.rel_err.is_infinite());
    let r = ComparisonReport::compare(0, "x", c(1e-6, 0.0), c(1e-13, 0.0), 1.0, 1e-8);
    assert!(!r.pass);
    let r = ComparisonReport::compare(0, "x", c(2.0, 0.0), c(1.0, 0.0), 1.0, 1e-8);
    assert!(!r.pass);
}

#[test]
fn direct_matrix_element_checks() {
    let m: Model64 = ModelConfig::cfg_a().build().unwrap();
    let b = SovBasis::build(&m).unwrap();
    let st = diagonalize_transfer(&b).unwrap();
    let l = sgsov::separate_states::SeparateState::from_eigenstate(&st[2], sgsov::separate_states::Side::Left).materialize(&b);
    let r = sgsov::separate_states::SeparateState::from_eigenstate(&st[2], sgsov::separate_states::Side::Right).materialize(&b);
    let id = CMat64::identity(27, 27);
    assert_eq!(direct_matrix_element(&l, &id, &r).unwrap(), l.dot(&r));
    let lam = c(0.77, -0.31);
    let tm = b.mono.transfer(lam);
    let lhs = direct_matrix_element(&l, &tm, &r).unwrap();
    let rhs = st[2].state.t_at(lam) * l.dot(&r);
    assert!((lhs - rhs).norm() < 1e-8 * rhs.norm());
    let short = CVec64::zeros(5);
    assert!(matches!(direct_matrix_element(&l, &id, &short), Err(sgsov::SgError::DimensionMismatch(_))));
}

#[test]
fn sampler_avoids_special_points() {
    let m: Model64 = ModelConfig::cfg_a().build().unwrap();
    let mut s = LambdaSampler::for_model(3, &m, None);
    let pts = s.take(200);
    for z in &pts {
        assert!(z.norm() >= 0.5 && z.norm() < 2.0);
        for n in 1..=3 {
            assert!((z - m.mu_plus(n)).norm() >= 1e-3 && (z - m.mu_minus(n)).norm() >= 1e-3);
        }
    }
    assert_eq!(pts, LambdaSampler::for_model(3, &m, None).take(200));
}
