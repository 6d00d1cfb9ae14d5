use sgsov::config::ModelConfig;
use sgsov::form_factors::ff_u;
use sgsov::model_core::*;
use sgsov::scalar::{c, Cx};
use sgsov::separate_states::{SeparateState, Side};
use sgsov::sov_basis::SovBasis;
use sgsov::spectrum::diagonalize_transfer;

#[test]
fn f32_pipeline_smoke() {
    let m: ModelParams<f32> = ModelConfig::cfg_b().build().unwrap();
    let mono = m.monodromy();
    let (l, mu): (Cx<f32>, Cx<f32>) = (c(0.7, 0.2), c(1.4, -0.3));
    let yb = yang_baxter_residual(&m, &mono, l, mu);
    let qd = qdet_residual(&m, &mono, l);
    eprintln!("f32 yb {yb:e} qdet {qd:e}");
    assert!(yb < 1e-5 && qd < 1e-5);
    let b = SovBasis::build(&m).unwrap();
    let bo = b.biorthogonality();
    eprintln!("f32 biorth {bo:e}");
    assert!(bo < 1e-4);
    let st = diagonalize_transfer(&b).unwrap();
    assert_eq!(st.len(), 9);
    let (u, _) = m.local_uv(1);
    let mut worst: f64 = 0.0;
    for i in 0..9 {
        for j in 0..9 {
            let r = ff_u(&b, &st[i], &st[j], 1).unwrap();
            let vl = SeparateState::from_eigenstate(&st[i], Side::Left).materialize(&b);
            let vr = SeparateState::from_eigenstate(&st[j], Side::Right).materialize(&b);
            let o = vl.dot(&(&u * &vr));
            let sc = (vl.norm() * vr.norm()) as f64;
            worst = worst.max((r.value - o).norm() as f64 / sc);
        }
    }
    eprintln!("f32 ff_u {worst:e}");
    assert!(worst < 1e-3);
}
