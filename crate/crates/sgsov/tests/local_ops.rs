use sgsov::config::ModelConfig;
use sgsov::linalg::{commutator, eye, fro, inverse, matpow};
use sgsov::local_ops::*;
use sgsov::scalar::c;
use sgsov::sov_basis::SovBasis;
use sgsov::{Model64, C64};

fn model(cfg: ModelConfig) -> Model64 {
    cfg.build().unwrap()
}

fn lams() -> Vec<C64> {
    vec![c(0.83, 0.41), c(-1.21, 0.33), c(0.57, -1.4)]
}

fn reconstruction(cfg: ModelConfig) {
    let m = model(cfg);
    for n in 1..=m.n {
        let (u, _) = m.local_uv(n);
        let x = reconstruct_u(&m, n, 1).unwrap();
        let eu = rel_err(&x, &u);
        let edc = rel_err(&reconstruct_u_dc(&m, n).unwrap(), &u);
        let (ab, cd) = reconstruct_alpha(&m, n).unwrap();
        let ae = alpha_expected(&m, n);
        let ea = rel_err(&ab, &ae).max(rel_err(&cd, &ae));
        let mut eb: f64 = 0.0;
        for k in 0..m.p as i64 {
            eb = eb.max(rel_err(&reconstruct_beta(&m, n, k).unwrap(), &beta_expected(&m, n, k)));
        }
        let mut ev: f64 = 0.0;
        for j in 1..m.p as i64 {
            ev = ev.max(rel_err(&reconstruct_v_power(&m, n, j).unwrap(), &local_monomial(&m, n, 0, j)));
        }
        let rule = beta_sum_rule(&m, n).unwrap();
        let es = rule.derived_error();
        println!("n={n} u {eu:.2e} dc {edc:.2e} alpha {ea:.2e} beta {eb:.2e} v {ev:.2e} sum rule {es:.2e} printed {:.2e}", rule.printed_error());
        assert!(eu < 1e-8 && edc < 1e-8 && ea < 1e-8 && eb < 1e-8 && ev < 1e-8 && es < 1e-9);
        assert!(rule.printed_error() > 1e-3);
        assert_eq!(spanning_rank(&m, n).unwrap(), m.p * m.p);
        for j in 1..m.p as i64 {
            assert!(rel_err(&reconstruct_u(&m, n, j).unwrap(), &matpow(&u, j).unwrap()) < 1e-8);
        }
    }
}

#[test]
fn reconstruction_cfg_a() {
    reconstruction(ModelConfig::cfg_a());
}

#[test]
fn reconstruction_cfg_b() {
    reconstruction(ModelConfig::cfg_b());
}

#[test]
fn reconstruction_single_site() {
    reconstruction(ModelConfig::single_site());
}

#[test]
fn reconstruction_stretch() {
    reconstruction(ModelConfig::stretch());
}

#[test]
fn degenerate_kappa_is_reported() {
    let mut cfg = ModelConfig::single_site();
    cfg.kappa = vec![[1.0, 0.0]];
    let m = model(cfg);
    assert!(matches!(reconstruct_v2k(&m, 1, 1), Err(sgsov::SgError::DegenerateKappa(1))));
}

#[test]
fn shifted_monodromy_range() {
    let m = model(ModelConfig::cfg_a());
    assert!(shifted_monodromy(&m, 0).is_err());
    assert!(shifted_monodromy(&m, 4).is_err());
    assert!(shifted_monodromy(&m, 3).is_ok());
}

#[test]
fn q_combinatorics() {
    let q: C64 = c(0.0, -2.0 * std::f64::consts::PI / 3.0).exp();
    let qg: C64 = c(0.3, 0.7).exp();
    for n in 0..6 {
        for m in 0..=n {
            let pascal = q_binomial(qg, n, m);
            let fact = q_factorial(qg, n) / (q_factorial(qg, m) * q_factorial(qg, n - m));
            assert!((pascal - fact).norm() < 1e-10 * fact.norm().max(1.0));
        }
    }
    for m in 1..3 {
        assert!(q_binomial(q, 3, m).norm() < 1e-12);
    }
    assert!((q_binomial(q, 3, 0) - 1.0).norm() < 1e-12);
    let eta = [c(0.8, 0.2), c(-0.5, 1.1), c(1.3, -0.4)];
    for al in compositions(3, 3) {
        let (l, r) = q_sum_identity(qg, &al, &eta);
        assert!((l - r).norm() < 1e-10 * r.norm().max(1.0));
    }
    assert_eq!(compositions(2, 3).len(), 6);
}

fn power_check(cfg: ModelConfig) {
    let m = model(cfg);
    let b = SovBasis::build(&m).unwrap();
    for &l in &lams() {
        for k in 1..=m.p as i64 {
            let g = binv_a_power_sov(&b, k, l).unwrap();
            let d = binv_a_power_dense_sov(&b, k, l).unwrap();
            let e = rel_err(&g, &d);
            println!("k={k} power {e:.2e}");
            assert!(e < 1e-8);
        }
        let xp = matpow(&binv_a(&b.mono, l).unwrap(), m.p as i64).unwrap();
        let cen = binv_a_central(&m, l);
        assert!(rel_err(&xp, &(eye::<f64>(m.dim()) * cen)) < 1e-8);
    }
    for k in 1..m.p as i64 {
        let g = v2k_sov(&b, k).unwrap();
        let d = b.sov_matrix(&local_monomial(&m, 1, 0, 2 * k));
        let e = rel_err(&g, &d);
        println!("v2k k={k} {e:.2e}");
        assert!(e < 1e-8);
    }
}

#[test]
fn power_cfg_a() {
    power_check(ModelConfig::cfg_a());
}

#[test]
fn power_single_site() {
    power_check(ModelConfig::single_site());
}

#[test]
fn power_stretch() {
    power_check(ModelConfig::stretch());
}

#[test]
fn power_rejects_even_chain() {
    let m = model(ModelConfig::cfg_b());
    let b = SovBasis::build(&m).unwrap();
    assert!(matches!(binv_a_power_sov(&b, 1, c(0.8, 0.1)), Err(sgsov::SgError::EvenChain)));
}

fn elementary(cfg: ModelConfig) {
    let m = model(cfg);
    let b = SovBasis::build(&m).unwrap();
    let ops = ElementaryOps::build(&b);
    let nn = m.nn();
    let p = m.p as i64;
    for a in 0..nn {
        for h in 0..m.p {
            let s = b.sov_matrix(ops.op(a, h as i64));
            let e = rel_err(&s, &o_action_expected(&b, a, h));
            println!("O-action a={a} h={h} {e:.2e}");
            assert!(e < 1e-8);
        }
        let scale = fro(ops.op(a, 0)).powi(2);
        for k in 0..p {
            for h in 0..p {
                if h != (k - 1).rem_euclid(p) {
                    let z = fro(&(ops.op(a, k) * ops.op(a, h)));
                    assert!(z < 1e-8 * scale.max(1.0), "prod zero {a} {k} {h}: {z:.2e}");
                }
            }
            let cyc = ops.power(a, k, m.p + 1);
            let mv = o_mean_value(&b, a);
            let e = rel_err(&cyc, &(ops.op(a, k) * mv));
            println!("mean value a={a} k={k} {e:.2e}");
            assert!(e < 1e-8);
        }
    }
    for a in 0..nn {
        for bb in 0..nn {
            if a == bb {
                continue;
            }
            for k in 0..p {
                for h in 0..p {
                    let r = com_o_ratio(&b, a, k, bb, h);
                    let lhs = ops.op(a, k) * ops.op(bb, h);
                    let rhs = ops.op(bb, h) * ops.op(a, k) * r;
                    let e = rel_err(&lhs, &rhs);
                    assert!(e < 1e-8, "com-O {a} {k} {bb} {h}: {e:.2e}");
                }
            }
        }
    }
    let q = m.q();
    for a in 0..nn {
        let o = ops.op(a, 1);
        let lhs = &ops.eta_a * o;
        let rhs = o * &ops.eta_a / q;
        let e = rel_err(&lhs, &rhs);
        println!("etaA O {e:.2e}");
        assert!(e < 1e-8);
        assert!(fro(&commutator(&ops.eta_n, o)) < 1e-8 * fro(o) * fro(&ops.eta_n));
        if let Some(th) = &ops.theta {
            assert!(fro(&commutator(th, o)) < 1e-8 * fro(o) * fro(th));
        }
    }
    for &l in &lams() {
        let x = binv_a_interpolation(&b, &ops, l);
        let y = binv_a(&b.mono, l).unwrap();
        let e = rel_err(&x, &y);
        println!("interp {e:.2e}");
        assert!(e < 1e-8);
    }
    if nn >= 2 {
        let mono = [(1usize, 2i64), (0, 1), (1, 1), (0, 0)];
        match reduce_o_monomial(&b, &mono) {
            Reduced::Term { scalar, factors } => {
                let lhs = monomial_matrix(&ops, &mono);
                let rhs = monomial_matrix(&ops, &factors) * scalar;
                assert!(rel_err(&lhs, &rhs) < 1e-8);
            }
            Reduced::Zero => panic!("expected term"),
        }
        assert_eq!(reduce_o_monomial(&b, &[(0, 1), (1, 0), (0, 1)]), Reduced::Zero);
    }
    let long: Vec<(usize, i64)> = (0..=p).map(|j| (0usize, 2 - j)).collect();
    match reduce_o_monomial(&b, &long) {
        Reduced::Term { scalar, factors } => {
            assert_eq!(factors.len(), 1);
            assert!(rel_err(&monomial_matrix(&ops, &long), &(monomial_matrix(&ops, &factors) * scalar)) < 1e-8);
        }
        Reduced::Zero => panic!("expected term"),
    }
}

#[test]
fn elementary_cfg_a() {
    elementary(ModelConfig::cfg_a());
}

#[test]
fn elementary_cfg_b() {
    elementary(ModelConfig::cfg_b());
}

#[test]
fn elementary_single_site() {
    elementary(ModelConfig::single_site());
}

#[test]
fn elementary_stretch() {
    elementary(ModelConfig::stretch());
}

#[test]
fn leg_permutation_shifts_monodromy() {
    let m = model(ModelConfig::homogeneous());
    for n in 1..=3 {
        let w = leg_permutation(&m, n);
        let winv = inverse(&w).unwrap();
        let sm = shifted_monodromy(&m, n).unwrap();
        let l = c(0.7, 0.4);
        let lhs = &w * m.monodromy().b.eval(l) * &winv;
        assert!(rel_err(&lhs, &sm.mono.b.eval(l)) < 1e-12);
    }
    assert!(shift_operator(&model(ModelConfig::cfg_a()), 2).is_err());
}
