use sgsov::config::ModelConfig;
use sgsov::linalg::{commutator, eye, fro, matpow};
use sgsov::model_core::*;
use sgsov::scalar::c;
use sgsov::{Model64, C64};

fn model(cfg: ModelConfig) -> Model64 {
    cfg.build().unwrap()
}

fn points() -> Vec<(C64, C64)> {
    vec![(c(0.7, 0.2), c(1.4, -0.3)), (c(-0.9, 0.6), c(0.55, 1.1)), (c(1.3, 0.9), c(-0.6, -0.8)), (c(0.4, -1.2), c(1.9, 0.1)), (c(-1.5, -0.2), c(0.8, 0.75))]
}

fn all_configs() -> Vec<Model64> {
    [ModelConfig::cfg_a(), ModelConfig::cfg_b(), ModelConfig::single_site(), ModelConfig::homogeneous(), ModelConfig::stretch()]
        .into_iter()
        .map(model)
        .collect()
}

#[test]
fn weyl_relations() {
    for p in [3usize, 5] {
        let m: Model64 = ModelParams::new(p, 2, vec![c(0.0, 1.1)], vec![c(1.0, 0.0)], None, None).unwrap();
        let (u, v) = m.weyl(1);
        assert!(fro(&(&u * &v - &v * &u * m.q())) < 1e-14);
        assert!(fro(&(matpow(&u, p as i64).unwrap() - eye::<f64>(p))) < 1e-13);
        assert!(fro(&(matpow(&v, p as i64).unwrap() - eye::<f64>(p))) < 1e-13);
    }
}

#[test]
fn embeddings_commute() {
    let m = model(ModelConfig::cfg_b());
    let (_, v) = m.weyl(1);
    let (u, _) = m.weyl(2);
    let a = m.site_embed(1, &v).unwrap();
    let b = m.site_embed(2, &u).unwrap();
    assert_eq!(fro(&commutator(&a, &b)), 0.0);
    assert!(m.site_embed(3, &u).is_err());
    let m3 = model(ModelConfig::cfg_a());
    let (u3, _) = m3.weyl(2);
    let e = m3.site_embed(2, &u3).unwrap();
    assert!(fro(&(matpow(&e, 3).unwrap() - eye::<f64>(27))) < 1e-13);
}

#[test]
fn invalid_parameters() {
    let bad = |p, pp| ModelParams::<f64>::new(p, pp, vec![c(0.0, 1.1)], vec![c(1.0, 0.0)], None, None).is_err();
    assert!(bad(4, 2));
    assert!(bad(3, 3));
    assert!(bad(3, 6));
    assert!(ModelParams::<f64>::new(3, 2, vec![c(0.0, 1.1)], vec![], None, None).is_err());
    assert!(ModelParams::<f64>::new(3, 2, vec![c(0.0, 1.1)], vec![c(1.0, 0.0)], Some(vec![c(2.0, 0.0)]), None).is_err());
}

#[test]
fn lax_diagonal_entry_single_site() {
    let m = model(ModelConfig::single_site());
    let l = m.lax_matrix(1).unwrap();
    let k = m.kappa[0];
    let qh = m.q_half();
    let (u, v) = m.weyl(1);
    let vi = v.adjoint();
    let expect = &u * (&v * (k / qh) + &vi * (qh / k)) * k;
    let x = l[0][0].eval(c(0.7, 0.3));
    assert!(fro(&(&x - expect)) < 1e-13);
    assert!(fro(&(l[0][0].eval(c(-2.0, 1.0)) - &x)) < 1e-13);
}

#[test]
fn lax_factorization() {
    for m in all_configs() {
        for n in 1..=m.n {
            assert!(lax_factorization_residual(&m, n, true).unwrap() < 1e-10);
            assert!(lax_factorization_residual(&m, n, false).unwrap() < 1e-10);
        }
    }
}

#[test]
fn yang_baxter() {
    for m in all_configs().into_iter().take(3) {
        let mono = m.monodromy();
        for (l, mu) in points() {
            let r = yang_baxter_residual(&m, &mono, l, mu);
            assert!(r < 1e-10, "YB {r:.2e}");
        }
    }
}

#[test]
fn yang_baxter_detects_wrong_q() {
    let m = model(ModelConfig::cfg_b());
    let other = model(ModelConfig { p_prime: 4, ..ModelConfig::cfg_b() });
    let (l, mu) = points()[0];
    assert!(yang_baxter_residual(&other, &m.monodromy(), l, mu) > 1e-3);
}

#[test]
fn quantum_determinant() {
    for m in all_configs() {
        let mono = m.monodromy();
        for (l, _) in points() {
            assert!(qdet_residual(&m, &mono, l) < 1e-10);
            assert!(qdet_ad_residual(&m, l) < 1e-12);
        }
        assert!(m.quantum_determinant(m.mu_plus(1)).norm() < 1e-12);
    }
}

#[test]
fn theta_commutation() {
    let m = model(ModelConfig::cfg_b());
    let mono = m.monodromy();
    for (l, _) in points() {
        assert!(theta_residual(&m, &mono, l).unwrap() < 1e-10);
    }
    let th = m.theta_charge().unwrap();
    assert!(fro(&(matpow(&th, 3).unwrap() - eye::<f64>(9))) < 1e-12);
    for i in 0..9 {
        assert!((0..3).any(|k| (th[(i, i)] - m.qp(k)).norm() < 1e-12));
    }
    let odd = model(ModelConfig::cfg_a());
    assert!(matches!(theta_residual(&odd, &odd.monodromy(), c(1.0, 0.1)), Err(sgsov::SgError::OddChain)));
}

#[test]
fn hermiticity() {
    for m in all_configs() {
        let mono = m.monodromy();
        for (l, _) in points() {
            assert!(hermiticity_residual(&m, &mono, l).unwrap() < 1e-10);
        }
        assert!(transfer_hermiticity_residual(&mono, 0.83) < 1e-10);
    }
    let m = model(ModelConfig { kappa: vec![[0.3, 1.1]], ..ModelConfig::single_site() });
    assert!(hermiticity_residual(&m, &m.monodromy(), c(1.0, 0.2)).is_none());
}

#[test]
fn transfer_commutes() {
    for m in all_configs() {
        let mono = m.monodromy();
        for (l, mu) in points() {
            assert!(transfer_commutator_residual(&mono, l, mu) < 1e-10);
        }
    }
}

#[test]
fn averages() {
    for m in all_configs().into_iter().take(4) {
        let mono = m.monodromy();
        for (l, mu) in points() {
            for e in Entry::all() {
                assert!(average_residual(&m, &mono, e, l, 1e-9).unwrap() < 1e-10);
                assert!(centrality_residual(&m, &mono, e, l, mu) < 1e-9);
            }
            let big = l.powi(3);
            let b = m.average_value(Entry::B, big);
            assert!((m.average_value(Entry::C, big) - b).norm() < 1e-10 * b.norm());
            let a = m.average_value(Entry::A, big);
            assert!((a.conj() - m.average_value(Entry::D, big.conj())).norm() < 1e-10 * a.norm());
        }
    }
}

#[test]
fn single_site_transfer_constant() {
    let m = model(ModelConfig::single_site());
    let mono = m.monodromy();
    assert!(fro(&(mono.transfer(c(0.5, 0.1)) - mono.transfer(c(-1.7, 0.9)))) < 1e-13);
}
