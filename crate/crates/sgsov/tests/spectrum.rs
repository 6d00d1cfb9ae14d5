use sgsov::config::ModelConfig;
use sgsov::linalg::{eye, fro};
use sgsov::scalar::c;
use sgsov::sov_basis::SovBasis;
use sgsov::spectrum::*;
use sgsov::{Model64, C64};

fn pts() -> Vec<C64> {
    (0..10)
        .map(|j| {
            let th = 0.37 + 0.61 * j as f64;
            c((0.6 + 0.11 * j as f64) * th.cos(), (0.6 + 0.11 * j as f64) * th.sin())
        })
        .collect()
}

fn run(cfg: ModelConfig) {
    let m: Model64 = cfg.build().unwrap();
    let b = SovBasis::build(&m).unwrap();
    let states = diagonalize_transfer(&b).unwrap();
    assert_eq!(states.len(), m.dim());
    let d = m.dim();
    let mut id = nalgebra::DMatrix::<C64>::zeros(d, d);
    let (mut fe, mut fe_bad, mut bax, mut fac, mut lfac, mut two, mut rem4, mut real) = (0f64, f64::INFINITY, 0f64, 0f64, 0f64, 0f64, 0f64, 0f64);
    for st in &states {
        id += &st.state.right * st.state.left.transpose();
        fe = fe.max(check_functional_equation(&m, &st.state.t, &pts()));
        let bad = st.state.t.plus_constant(c(0.1, 0.0));
        fe_bad = fe_bad.min(check_functional_equation(&m, &bad, &pts()));
        bax = bax.max(st.baxter_grid_residual(&b));
        fac = fac.max(st.factorization_residual(&b));
        lfac = lfac.max(st.left_factorization_residual(&b));
        let qf = fit_q_polynomial(&m, &st.state.t, false).unwrap();
        two = two.max(two_route_agreement(&b, &st.q_grid, st.anchor, &qf));
        let qb = qbar_poly(&m, &qf);
        rem4 = rem4.max(baxter_residual(&m, &st.state.t, &qb, true, &pts()));
        two = two.max(two_route_agreement(&b, &st.qbar_grid, st.anchor_left, &qb));
        for z in &st.state.t.coeffs {
            real = real.max(z.im.abs() / z.norm().max(1e-300));
        }
        if m.e_n() == 1 {
            let (k, _) = st.state.theta_index(m.p);
            let q = m.q();
            let pref: C64 = m.kappa.iter().zip(m.xi.iter()).fold(c(1.0, 0.0), |acc, (kk, x)| acc * kk / (x * c(0.0, 1.0)));
            let expect = pref * (q.powi(k as i32) + q.powi(-(k as i32)));
            let top = st.state.t.coeff(m.n as i64);
            assert!((top - expect).norm() < 1e-8 * expect.norm().max(1.0), "{top} {expect}");
        }
    }
    println!("fe {fe:.2e} bad {fe_bad:.2e} bax {bax:.2e} fac {fac:.2e} lfac {lfac:.2e} two {two:.2e} rem4 {rem4:.2e} real {real:.2e}");
    assert!(fro(&(id - eye::<f64>(d))) < 1e-8 * d as f64);
    assert!(fe < 1e-8 && fe_bad > 1e5 * fe.max(1e-16));
    if m.p == 3 {
        assert!(fe_bad > 1e-3);
    }
    assert!(bax < 1e-8 && fac < 1e-7 && lfac < 1e-7);
    assert!(two < 1e-6 && rem4 < 1e-8);
    assert!(real < 1e-8);
}

#[test]
fn cfg_a_spectrum() {
    run(ModelConfig::cfg_a());
}
#[test]
fn cfg_b_spectrum() {
    run(ModelConfig::cfg_b());
}
#[test]
fn single_site_spectrum() {
    run(ModelConfig::single_site());
}
#[test]
fn homogeneous_spectrum() {
    run(ModelConfig::homogeneous());
}
#[test]
fn stretch_spectrum() {
    run(ModelConfig::stretch());
}
