use sgsov::config::ModelConfig;
use sgsov::linalg::{eye, fro};
use sgsov::scalar::c;
use sgsov::sov_basis::{average_b_poly, b_zeros, inverse_kappa, kappa_index, SovBasis};
use sgsov::Model64;

fn basis(cfg: ModelConfig) -> SovBasis<f64> {
    let m: Model64 = cfg.build().unwrap();
    SovBasis::build(&m).unwrap()
}

fn probes() -> Vec<sgsov::C64> {
    vec![c(0.7, 0.3), c(-1.1, 0.45), c(0.2, -1.6)]
}

fn check(cfg: ModelConfig) {
    let b = basis(cfg);
    let d = b.dim();
    println!(
        "left {:.2e} right {:.2e} biorth {:.2e} measure {:.2e} cycle {:.2e} A {:.2e} D {:.2e}",
        b.left_eigen_residual(&probes()),
        b.right_eigen_residual(&probes()),
        b.biorthogonality(),
        b.measure_error(),
        b.cycle_error,
        b.a_action_residual(),
        b.d_right_action_residual()
    );
    assert!(b.left_eigen_residual(&probes()) < 1e-8);
    assert!(b.right_eigen_residual(&probes()) < 1e-8);
    assert!(b.biorthogonality() < 1e-9);
    assert!(b.measure_error() < 1e-8);
    assert!(b.a_action_residual() < 1e-8);
    assert!(b.d_right_action_residual() < 1e-8);
    assert!(b.cycle_error < 1e-7);
    let id = eye::<f64>(d);
    assert!(fro(&(b.identity_resolution() - &id)) < 1e-8 * d as f64);
    assert!(fro(&(b.identity_resolution_formula() - &id)) < 1e-8 * d as f64);
}

#[test]
fn cfg_a_basis() {
    check(ModelConfig::cfg_a());
}

#[test]
fn cfg_b_basis() {
    check(ModelConfig::cfg_b());
}

#[test]
fn single_site_basis() {
    check(ModelConfig::single_site());
}

#[test]
fn homogeneous_basis() {
    check(ModelConfig::homogeneous());
}

#[test]
fn stretch_basis() {
    check(ModelConfig::stretch());
}

#[test]
fn single_site_zero_and_roots() {
    let m: Model64 = ModelConfig::single_site().build().unwrap();
    let g = b_zeros(&m, 1e-6).unwrap();
    assert_eq!(g.z.len(), 1);
    for k in 0..3 {
        assert!((g.eta(0, k).powi(3) - g.z[0]).norm() < 1e-12);
    }
    let avg = average_b_poly(&m);
    let lam: sgsov::C64 = c(0.8, 0.35);
    let z = g.z[0];
    let ratio = avg.eval(lam) / (lam / z - z / lam);
    let lam2: sgsov::C64 = c(-1.3, 0.2);
    let ratio2 = avg.eval(lam2) / (lam2 / z - z / lam2);
    assert!((ratio - ratio2).norm() < 1e-12 * ratio.norm());
}

#[test]
fn cfg_a_zeros() {
    let m: Model64 = ModelConfig::cfg_a().build().unwrap();
    let g = b_zeros(&m, 1e-6).unwrap();
    let avg = average_b_poly(&m);
    let scale = avg.coeffs.iter().map(|x| x.norm()).fold(0.0, f64::max);
    for z in &g.z {
        assert!(avg.eval(*z).norm() <= 1e-9 * scale * z.norm().powi(3).max(z.norm().powi(-3)));
    }
    let z2: Vec<_> = g.z.iter().map(|z| z * z).collect();
    for w in &z2 {
        assert!(z2.iter().any(|x| (x - w.conj()).norm() < 1e-9 * w.norm()));
    }
    for a in 0..3 {
        let e0 = g.eta0[a] * g.eta0[a];
        let paired = (0..3).any(|b| (g.eta0[b] * g.eta0[b] - e0.conj()).norm() < 1e-9 * e0.norm());
        assert!(e0.im.abs() < 1e-12 * e0.norm() || paired);
        for k in 0..3 {
            assert!((g.eta(a, k).powi(3) - g.z[a]).norm() < 1e-12 * g.z[a].norm());
        }
    }
}

#[test]
fn kappa_index_roundtrip() {
    assert_eq!(kappa_index(&[1, 1, 1], 3).unwrap(), 1);
    assert_eq!(kappa_index(&[3, 3, 3], 3).unwrap(), 27);
    for j in 1..=27 {
        let h = inverse_kappa(j, 3, 3).unwrap();
        assert_eq!(kappa_index(&h, 3).unwrap(), j);
    }
    assert!(kappa_index(&[0, 1, 1], 3).is_err());
    assert!(inverse_kappa(28, 3, 3).is_err());
}

#[test]
fn rescaled_basis_keeps_measure_formula() {
    let b = basis(ModelConfig::cfg_b());
    let r = b.rescaled(c(0.3, 1.7));
    assert!(r.measure_error() < 1e-10);
}
