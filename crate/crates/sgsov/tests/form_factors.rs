use sgsov::config::ModelConfig;
use sgsov::form_factors::*;
use sgsov::linalg::{fro, vnorm};
use sgsov::local_ops::ElementaryOps;
use sgsov::oracle::{direct_matrix_element, elementary_cases, ff_u_sweep, ComparisonReport};
use sgsov::separate_states::{SeparateState, Side};
use sgsov::sov_basis::SovBasis;
use sgsov::spectrum::{diagonalize_transfer, SovEigenstate};
use sgsov::{CVec64, Model64, C64};

struct Setup {
    basis: SovBasis<f64>,
    states: Vec<SovEigenstate<f64>>,
    left: Vec<CVec64>,
    right: Vec<CVec64>,
}

fn setup(cfg: ModelConfig) -> Setup {
    let m: Model64 = cfg.build().unwrap();
    let basis = SovBasis::build(&m).unwrap();
    let states = diagonalize_transfer(&basis).unwrap();
    let left = states.iter().map(|s| SeparateState::from_eigenstate(s, Side::Left).materialize(&basis)).collect();
    let right = states.iter().map(|s| SeparateState::from_eigenstate(s, Side::Right).materialize(&basis)).collect();
    Setup { basis, states, left, right }
}

fn u_sweep(cfg: ModelConfig, site: usize) {
    let s = setup(cfg);
    let rows = ff_u_sweep(&s.basis, &s.states, &s.left, &s.right, site, 1e-7).unwrap();
    assert_eq!(rows.len(), s.states.len().pow(2));
    for r in &rows {
        assert!(r.pass, "pair {} {}: rel {:.2e} abs {:.2e}", r.left, r.right, r.rel_err, r.abs_err);
    }
    assert!(rows.iter().any(|r| r.selection_rule_applied) || s.basis.params.e_n() == 0);
}

#[test]
fn ff_u_cfg_a() {
    u_sweep(ModelConfig::cfg_a(), 1);
}

#[test]
fn ff_u_cfg_b() {
    u_sweep(ModelConfig::cfg_b(), 1);
}

#[test]
fn ff_u_single_site() {
    u_sweep(ModelConfig::single_site(), 1);
}

#[test]
fn ff_u_homogeneous_shifted() {
    for n in 1..=3 {
        u_sweep(ModelConfig::homogeneous(), n);
    }
}

#[test]
fn ff_u_shift_needs_homogeneous() {
    let s = setup(ModelConfig::cfg_b());
    assert!(matches!(ff_u(&s.basis, &s.states[0], &s.states[1], 2), Err(sgsov::SgError::ShiftUnavailable(_))));
}

fn elementary_sweep(cfg: ModelConfig, conv: ElementaryConvention) -> (usize, usize) {
    let s = setup(cfg);
    let ops = ElementaryOps::build(&s.basis);
    let (mut total, mut failed) = (0, 0);
    for e in elementary_cases(s.basis.params.nn(), s.basis.params.e_n() == 1) {
        let x = e.matrix(&ops);
        let xn = fro(&x);
        for i in (0..s.states.len()).step_by(5) {
            for j in (0..s.states.len()).step_by(4) {
                let r = ff_elementary_with(&s.basis, &s.states[i], &s.states[j], &e, conv).unwrap();
                let o = direct_matrix_element(&s.left[i], &x, &s.right[j]).unwrap();
                let sc = vnorm(&s.left[i]) * xn * vnorm(&s.right[j]);
                total += 1;
                if !ComparisonReport::compare(8, "", r.value, o, sc, 1e-6).pass {
                    failed += 1;
                }
            }
        }
    }
    (total, failed)
}

#[test]
fn elementary_cfg_a() {
    assert_eq!(elementary_sweep(ModelConfig::cfg_a(), ElementaryConvention::Derived).1, 0);
    assert!(elementary_sweep(ModelConfig::cfg_a(), ElementaryConvention::Literal).1 > 0);
}

#[test]
fn elementary_cfg_b() {
    assert_eq!(elementary_sweep(ModelConfig::cfg_b(), ElementaryConvention::Derived).1, 0);
}

#[test]
fn elementary_single_site() {
    assert_eq!(elementary_sweep(ModelConfig::single_site(), ElementaryConvention::Derived).1, 0);
}

#[test]
fn ff_u_matrix_replaces_one_column() {
    let s = setup(ModelConfig::cfg_a());
    let (tl, tr) = (&s.states[3], &s.states[7]);
    let u = ff_u_matrix(&s.basis, tl, tr, s.basis.params.mu_plus(1));
    let phi = sgsov::separate_states::phi_matrix_shifted(&s.basis, &tl.qbar_grid, &tr.q_grid, 1);
    let nn = u.ncols();
    for b in 0..nn - 1 {
        assert_eq!(u.column(b), phi.column(b));
    }
    assert!((u.column(nn - 1) - phi.column(nn - 1)).norm() > 1e-6 * phi.norm());
}

fn npoint_check(cfg: ModelConfig, ops: &[&str]) {
    let s = setup(cfg);
    let lops: Vec<LocalOperator> = ops.iter().map(|o| LocalOperator::parse(o).unwrap()).collect();
    let dense_ops: Vec<_> = lops.iter().map(|o| dense_operator(&s.basis, o).unwrap()).collect();
    for t in (0..s.states.len()).step_by(4) {
        let v = npoint(&s.basis, &s.states, t, &lops).unwrap();
        let d = npoint_dense(&s.basis, &s.states[t], &dense_ops).unwrap();
        let sc = vnorm(&s.left[t]) * vnorm(&s.right[t]) / s.left[t].dot(&s.right[t]).norm();
        let rep = ComparisonReport::compare(8, "npoint", v, d, sc, 1e-6);
        assert!(rep.pass, "{ops:?} state {t}: rel {:.2e} abs {:.2e}", rep.rel_err, rep.abs_err);
    }
}

#[test]
fn npoint_u1_u1_cfg_a() {
    npoint_check(ModelConfig::cfg_a(), &["u1", "u1"]);
    npoint_check(ModelConfig::cfg_a(), &["u1"]);
}

#[test]
fn npoint_u1_v1sq_cfg_b() {
    npoint_check(ModelConfig::cfg_b(), &["u1", "v1^2"]);
}

#[test]
fn gauge_independence() {
    let s = setup(ModelConfig::cfg_a());
    let rb = s.basis.rescaled(C64::new(0.4, 1.9));
    let rs = diagonalize_transfer(&rb).unwrap();
    for (i, j) in [(0, 1), (4, 9), (13, 13)] {
        let a = ff_u(&s.basis, &s.states[i], &s.states[j], 1).unwrap().value * ff_u(&s.basis, &s.states[j], &s.states[i], 1).unwrap().value
            / (sgsov::separate_states::eigen_pairing(&s.basis, &s.states[i], &s.states[i])
                * sgsov::separate_states::eigen_pairing(&s.basis, &s.states[j], &s.states[j]));
        let b = ff_u(&rb, &rs[i], &rs[j], 1).unwrap().value * ff_u(&rb, &rs[j], &rs[i], 1).unwrap().value
            / (sgsov::separate_states::eigen_pairing(&rb, &rs[i], &rs[i]) * sgsov::separate_states::eigen_pairing(&rb, &rs[j], &rs[j]));
        assert!((a - b).norm() < 1e-7 * a.norm().max(1e-12), "{a} {b}");
    }
}
