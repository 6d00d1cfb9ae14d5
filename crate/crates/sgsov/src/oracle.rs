//! Dense ground truth, structured comparison reports and the full verification suite.

use crate::form_factors::{dense_operator, ff_elementary, ff_u, npoint, npoint_dense, LocalOperator};
use crate::linalg::{eye, fro, matpow, vnorm};
use crate::local_ops::{self as lo, ElementaryBasisElement, ElementaryOps, OFactor, Reduced};
use crate::model_core::{self as mc, Entry};
use crate::scalar::{c, Cx, Mat, Real, Vect};
use crate::separate_states::{self as ss, SeparateState, Side};
use crate::sov_basis::SovBasis;
use crate::spectrum::{self as sp, SovEigenstate};
use crate::{Model64, Result, SgError, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

/// Reference magnitude below which a comparison falls back to the absolute error.
pub const ABS_FALLBACK: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub criterion: u8,
    pub label: String,
    pub lhs: [f64; 2],
    pub rhs: [f64; 2],
    pub abs_err: f64,
    pub rel_err: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub context: Map<String, Value>,
}

impl ComparisonReport {
    /// lhs against reference rhs, both divided by `scale` first.
    pub fn compare(criterion: u8, label: &str, lhs: C64, rhs: C64, scale: f64, tol: f64) -> Self {
        let s = if scale > 0.0 { scale } else { 1.0 };
        let (x, y) = (lhs / s, rhs / s);
        let abs_err = (x - y).norm();
        let rel_err = if y.norm() > 0.0 { abs_err / y.norm() } else { f64::INFINITY };
        let pass = rel_err <= tol || (y.norm() < ABS_FALLBACK && abs_err <= tol);
        Self { criterion, label: label.into(), lhs: [lhs.re, lhs.im], rhs: [rhs.re, rhs.im], abs_err, rel_err, tolerance: tol, pass, context: Map::new() }
    }

    /// A residual that is already normalized; passes when it is at most tol.
    pub fn residual(criterion: u8, label: &str, r: f64, tol: f64) -> Self {
        Self {
            criterion,
            label: label.into(),
            lhs: [r, 0.0],
            rhs: [0.0, 0.0],
            abs_err: r,
            rel_err: r,
            tolerance: tol,
            pass: r.is_finite() && r <= tol,
            context: Map::new(),
        }
    }

    /// A quantity that must exceed a threshold (discrimination checks).
    pub fn exceeds(criterion: u8, label: &str, r: f64, threshold: f64) -> Self {
        let mut rep = Self::residual(criterion, label, r, threshold);
        rep.pass = r.is_finite() && r > threshold;
        rep
    }

    /// Integer equality (counts, ranks).
    pub fn count(criterion: u8, label: &str, found: usize, expected: usize) -> Self {
        let diff = (found as f64 - expected as f64).abs();
        Self {
            criterion,
            label: label.into(),
            lhs: [found as f64, 0.0],
            rhs: [expected as f64, 0.0],
            abs_err: diff,
            rel_err: diff / (expected as f64).max(1.0),
            tolerance: 0.0,
            pass: found == expected,
            context: Map::new(),
        }
    }

    pub fn failure(criterion: u8, label: &str, err: &SgError) -> Self {
        let mut r = Self::residual(criterion, label, f64::INFINITY, 0.0);
        r.context.insert("error".into(), Value::String(err.to_string()));
        r.context.insert("exit_code".into(), json!(err.exit_code()));
        r
    }

    pub fn with(mut self, key: &str, value: Value) -> Self {
        self.context.insert(key.into(), value);
        self
    }

    /// Exit code carried by a report built from an error, if any.
    pub fn error_exit_code(&self) -> Option<i32> {
        self.context.get("exit_code").and_then(Value::as_i64).map(|c| c as i32)
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

/// Default tolerances; every field can be overridden, missing JSON fields keep their defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub algebra: f64,
    pub centrality: f64,
    pub basis: f64,
    pub biorthogonality: f64,
    pub cycle: f64,
    pub identity: f64,
    pub spectrum: f64,
    pub perturbed: f64,
    pub factorization: f64,
    pub scalar: f64,
    pub identity_t: f64,
    pub reconstruction: f64,
    pub sum_rule: f64,
    pub combinatorics: f64,
    pub ff_u: f64,
    pub ff_elementary: f64,
    pub npoint: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            algebra: 1e-10,
            centrality: 1e-10,
            basis: 1e-8,
            biorthogonality: 1e-9,
            cycle: 1e-7,
            identity: 1e-8,
            spectrum: 1e-8,
            perturbed: 1e-3,
            factorization: 1e-7,
            scalar: 1e-8,
            identity_t: 1e-7,
            reconstruction: 1e-8,
            sum_rule: 1e-9,
            combinatorics: 1e-10,
            ff_u: 1e-7,
            ff_elementary: 1e-6,
            npoint: 1e-6,
        }
    }
}

impl Tolerances {
    /// Every pass threshold set to t (the discrimination threshold is kept).
    pub fn uniform(t: f64) -> Self {
        Self {
            algebra: t,
            centrality: t,
            basis: t,
            biorthogonality: t,
            cycle: t,
            identity: t,
            spectrum: t,
            factorization: t,
            scalar: t,
            identity_t: t,
            reconstruction: t,
            sum_rule: t,
            combinatorics: t,
            ff_u: t,
            ff_elementary: t,
            npoint: t,
            ..Self::default()
        }
    }
}

/// covector . X . vector.
pub fn direct_matrix_element<R: Real>(left: &Vect<R>, op: &Mat<R>, right: &Vect<R>) -> Result<Cx<R>> {
    if op.nrows() != left.len() || op.ncols() != right.len() {
        return Err(SgError::DimensionMismatch(format!("covector {} x operator {}x{} x vector {}", left.len(), op.nrows(), op.ncols(), right.len())));
    }
    Ok(left.dot(&(op * right)))
}

/// Seeded spectral-parameter sampler: modulus in [0.5, 2], uniform argument,
/// rejection within 1e-3 of the avoided points.
pub struct LambdaSampler {
    rng: ChaCha8Rng,
    avoid: Vec<C64>,
}

impl LambdaSampler {
    pub const REJECT: f64 = 1e-3;

    pub fn new(seed: u64, avoid: Vec<C64>) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed), avoid }
    }

    /// Avoids every mu_{n,+-} and, when a basis is given, the eta grid.
    pub fn for_model(seed: u64, params: &Model64, basis: Option<&SovBasis<f64>>) -> Self {
        let mut avoid: Vec<C64> = (1..=params.n).flat_map(|n| [params.mu_plus(n), params.mu_minus(n)]).collect();
        if let Some(b) = basis {
            for a in 0..b.grid.eta0.len() {
                for k in 0..params.p as i64 {
                    avoid.push(b.eta(a, k));
                }
            }
        }
        Self::new(seed, avoid)
    }

    pub fn sample(&mut self) -> C64 {
        loop {
            let r = self.rng.gen_range(0.5..2.0);
            let th = self.rng.gen_range(0.0..std::f64::consts::TAU);
            let z = C64::from_polar(r, th);
            if self.avoid.iter().all(|a| (z - a).norm() >= Self::REJECT) {
                return z;
            }
        }
    }

    pub fn take(&mut self, n: usize) -> Vec<C64> {
        (0..n).map(|_| self.sample()).collect()
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }
}

fn worst<T, F: Fn(&T) -> f64 + Sync + Send>(items: &[T], f: F) -> (f64, usize)
where
    T: Sync,
{
    items
        .par_iter()
        .map(&f)
        .enumerate()
        .fold(|| (0.0f64, 0usize), |acc, (i, v)| if v > acc.0 || v.is_nan() { (v, i) } else { acc })
        .reduce(|| (0.0, 0), |a, b| if b.0 > a.0 || (b.0.is_nan() && !a.0.is_nan()) { b } else { a })
}

/// Number of random spectral points per algebraic identity.
pub const ALGEBRA_POINTS: usize = 10;
/// Random separate-state pairs for the scalar-product check.
pub const SCALAR_PAIRS: usize = 20;

/// Basis, eigenstates and their dense vectors, shared by the later sections.
pub struct Prepared {
    pub basis: SovBasis<f64>,
    pub states: Vec<SovEigenstate<f64>>,
    pub left: Vec<Vect<f64>>,
    pub right: Vec<Vect<f64>>,
}

impl Prepared {
    pub fn new(basis: SovBasis<f64>, states: Vec<SovEigenstate<f64>>) -> Self {
        let left = states.par_iter().map(|s| SeparateState::from_eigenstate(s, Side::Left).materialize(&basis)).collect();
        let right = states.par_iter().map(|s| SeparateState::from_eigenstate(s, Side::Right).materialize(&basis)).collect();
        Self { basis, states, left, right }
    }

    pub fn build(params: &Model64) -> Result<Self> {
        let basis = SovBasis::build(params)?;
        let states = sp::diagonalize_transfer(&basis)?;
        Ok(Self::new(basis, states))
    }
}

/// Runs criteria 1-8 in dependency order. Deterministic for a given (params, seed).
pub fn verify_suite(params: &Model64, seed: u64, tol: &Tolerances) -> Vec<ComparisonReport> {
    let mut out = vec![];
    verify_suite_with(params, seed, tol, &mut |r| out.push(r));
    out
}

/// As [`verify_suite`], handing each section's reports to `emit` as soon as it completes.
pub fn verify_suite_with(params: &Model64, seed: u64, tol: &Tolerances, emit: &mut dyn FnMut(ComparisonReport)) {
    let mut flush = |v: Vec<ComparisonReport>| v.into_iter().for_each(&mut *emit);
    flush(algebra_reports(params, seed, tol));
    let basis = match SovBasis::build(params) {
        Ok(b) => b,
        Err(e) => {
            flush(vec![ComparisonReport::failure(2, "sov basis construction", &e)]);
            flush(reconstruction_reports(params, tol));
            return;
        }
    };
    flush(basis_reports(&basis, tol));
    let states = match sp::diagonalize_transfer(&basis) {
        Ok(s) => s,
        Err(e) => {
            flush(vec![ComparisonReport::failure(3, "transfer diagonalization", &e)]);
            flush(reconstruction_reports(params, tol));
            return;
        }
    };
    let st = Prepared::new(basis, states);
    flush(spectrum_reports(&st, seed, tol));
    flush(scalar_reports(&st, seed, tol));
    flush(reconstruction_reports(params, tol));
    flush(monomial_reports(&st.basis, seed, tol));
    flush(elementary_reports(&st.basis, seed, tol));
    flush(form_factor_reports(&st, tol));
}

pub fn algebra_reports(params: &Model64, seed: u64, tol: &Tolerances) -> Vec<ComparisonReport> {
    let mut out = vec![];
    let mono = params.monodromy();
    let mut smp = LambdaSampler::for_model(seed, params, None);
    let pts: Vec<(C64, C64)> = (0..ALGEBRA_POINTS).map(|_| (smp.sample(), smp.sample())).collect();
    let ctx = |r: ComparisonReport, i: usize| r.with("lambda", json!([pts[i].0.re, pts[i].0.im])).with("mu", json!([pts[i].1.re, pts[i].1.im]));
    let (yb, i) = worst(&pts, |(l, m)| mc::yang_baxter_residual(params, &mono, *l, *m));
    out.push(ctx(ComparisonReport::residual(1, "yang-baxter", yb, tol.algebra), i));
    let (qd, i) = worst(&pts, |(l, _)| mc::qdet_residual(params, &mono, *l));
    out.push(ctx(ComparisonReport::residual(1, "quantum determinant operator identity", qd, tol.algebra), i));
    let (qa, i) = worst(&pts, |(l, _)| mc::qdet_ad_residual(params, *l));
    out.push(ctx(ComparisonReport::residual(1, "quantum determinant = a(l) d(l/q)", qa, tol.algebra), i));
    let (tc, i) = worst(&pts, |(l, m)| mc::transfer_commutator_residual(&mono, *l, *m));
    out.push(ctx(ComparisonReport::residual(1, "[T(l), T(m)] = 0", tc, tol.algebra), i));
    if params.e_n() == 1 {
        let (th, i) = worst(&pts, |(l, _)| mc::theta_residual(params, &mono, *l).unwrap_or(f64::INFINITY));
        out.push(ctx(ComparisonReport::residual(1, "theta commutation", th, tol.algebra), i));
    }
    if params.self_adjoint_epsilon().is_some() {
        let (h, i) = worst(&pts, |(l, _)| mc::hermiticity_residual(params, &mono, *l).unwrap_or(f64::INFINITY));
        out.push(ctx(ComparisonReport::residual(1, "hermitian conjugation of the monodromy", h, tol.algebra), i));
        let reals: Vec<f64> = pts.iter().map(|(l, _)| l.norm()).collect();
        let (th, _) = worst(&reals, |x| mc::transfer_hermiticity_residual(&mono, *x));
        out.push(ComparisonReport::residual(1, "T(l) self-adjoint for real l", th, tol.algebra));
    }
    for e in Entry::all() {
        let (av, i) = worst(&pts, |(l, _)| mc::average_residual(params, &mono, e, *l, tol.centrality).unwrap_or(f64::INFINITY));
        out.push(ctx(ComparisonReport::residual(1, &format!("average {e:?}: dense product vs 2x2 formula"), av, tol.algebra), i));
        let (ce, i) = worst(&pts, |(l, m)| mc::centrality_residual(params, &mono, e, *l, *m));
        out.push(ctx(ComparisonReport::residual(1, &format!("average {e:?} central"), ce, tol.centrality), i));
    }
    for n in 1..=params.n {
        for plus in [true, false] {
            let r = mc::lax_factorization_residual(params, n, plus).unwrap_or(f64::INFINITY);
            out.push(
                ComparisonReport::residual(1, "lax projector factorization", r, tol.algebra)
                    .with("site", json!(n))
                    .with("sign", json!(if plus { "+" } else { "-" })),
            );
        }
    }
    out
}

pub fn basis_reports(b: &SovBasis<f64>, tol: &Tolerances) -> Vec<ComparisonReport> {
    let mut out = vec![];
    let probes = [c(0.7, 0.3), c(-1.1, 0.45), c(0.2, -1.6)];
    let d = b.dim();
    let id = eye::<f64>(d);
    out.push(ComparisonReport::residual(2, "B-eigenvalue pattern match", b.label_error, tol.basis));
    out.push(ComparisonReport::residual(2, "left B-eigen residual", b.left_eigen_residual(&probes), tol.basis));
    out.push(ComparisonReport::residual(2, "right B-eigen residual", b.right_eigen_residual(&probes), tol.basis));
    out.push(ComparisonReport::residual(2, "biorthogonality", b.biorthogonality(), tol.biorthogonality));
    out.push(ComparisonReport::residual(2, "measure M_jj", b.measure_error(), tol.basis));
    out.push(ComparisonReport::residual(2, "p-cycle closure", b.cycle_error, tol.cycle));
    out.push(ComparisonReport::residual(2, "left A action", b.a_action_residual(), tol.basis));
    out.push(ComparisonReport::residual(2, "right D action", b.d_right_action_residual(), tol.basis));
    out.push(
        ComparisonReport::residual(2, "SOV identity resolution (dense pairing)", fro(&(b.identity_resolution() - &id)), tol.identity * d as f64)
            .with("dim", json!(d)),
    );
    out.push(
        ComparisonReport::residual(2, "SOV identity resolution (measure formula)", fro(&(b.identity_resolution_formula() - &id)), tol.identity * d as f64)
            .with("dim", json!(d)),
    );
    out
}

pub fn spectrum_reports(st: &Prepared, seed: u64, tol: &Tolerances) -> Vec<ComparisonReport> {
    let mut out = vec![];
    let b = &st.basis;
    let pr = &b.params;
    let d = b.dim();
    out.push(ComparisonReport::count(3, "eigenstates found", st.states.len(), d));
    let mut labels: Vec<(usize, [i64; 2])> = st
        .states
        .iter()
        .map(|s| {
            let z = s.state.t_at(c(0.83, 0.41));
            (s.state.sector, [(z.re * 1e7).round() as i64, (z.im * 1e7).round() as i64])
        })
        .collect();
    labels.sort();
    labels.dedup();
    out.push(ComparisonReport::count(3, "distinct joint (T, Theta) labels", labels.len(), d));
    let pts = LambdaSampler::for_model(seed ^ 0x5eed, pr, Some(b)).take(ALGEBRA_POINTS);
    let (fe, i) = worst(&st.states, |s| sp::check_functional_equation(pr, &s.state.t, &pts));
    out.push(ComparisonReport::residual(3, "functional equation, true eigenvalues", fe, tol.spectrum).with("state", json!(i)));
    let (least, i) = st
        .states
        .iter()
        .map(|s| sp::check_functional_equation(pr, &s.state.t.plus_constant(c(0.1, 0.0)), &pts))
        .enumerate()
        .fold((f64::INFINITY, 0), |acc, (i, v)| if v < acc.0 || v.is_nan() { (v, i) } else { acc });
    out.push(ComparisonReport::exceeds(3, "functional equation, perturbed eigenvalues (t + 0.1)", least, tol.perturbed).with("state", json!(i)));
    let (bx, i) = worst(&st.states, |s| s.baxter_grid_residual(b));
    out.push(ComparisonReport::residual(3, "discrete Baxter relations on the grid", bx, tol.spectrum).with("state", json!(i)));
    let (f, i) = worst(&st.states, |s| s.factorization_residual(b));
    out.push(ComparisonReport::residual(3, "right wavefunction factorization", f, tol.factorization).with("state", json!(i)));
    let (f, i) = worst(&st.states, |s| s.left_factorization_residual(b));
    out.push(ComparisonReport::residual(3, "left wavefunction factorization", f, tol.factorization).with("state", json!(i)));
    let (q, i) = worst(&st.states, |s| match sp::fit_q_polynomial(pr, &s.state.t, false) {
        Ok(qf) => sp::baxter_residual(pr, &s.state.t, &qf, false, &pts),
        Err(_) => f64::INFINITY,
    });
    out.push(ComparisonReport::residual(3, "polynomial Baxter equation", q, tol.spectrum).with("state", json!(i)));
    out
}

pub fn scalar_reports(st: &Prepared, seed: u64, tol: &Tolerances) -> Vec<ComparisonReport> {
    let mut out = vec![];
    let b = &st.basis;
    let pr = &b.params;
    let (nn, p) = (pr.nn(), pr.p);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5ca1a);
    let pairs: Vec<(SeparateState<f64>, SeparateState<f64>)> = (0..SCALAR_PAIRS)
        .map(|_| {
            let s = if pr.e_n() == 1 { rng.gen_range(0..p) } else { 0 };
            (SeparateState::random(&mut rng, Side::Left, nn, p, s), SeparateState::random(&mut rng, Side::Right, nn, p, s))
        })
        .collect();
    let reps: Vec<ComparisonReport> = pairs
        .par_iter()
        .enumerate()
        .map(|(i, (l, r))| {
            let (vl, vr) = (l.materialize(b), r.materialize(b));
            let dense = vl.dot(&vr);
            match ss::scalar_product_det(l, r, b) {
                Ok(det) => {
                    ComparisonReport::compare(4, "separate-state scalar product", det, dense, vnorm(&vl) * vnorm(&vr), tol.scalar).with("pair", json!(i))
                }
                Err(e) => ComparisonReport::failure(4, "separate-state scalar product", &e),
            }
        })
        .collect();
    out.extend(reps);
    if pr.e_n() == 1 {
        let l = SeparateState::random(&mut rng, Side::Left, nn, p, 0);
        let r = SeparateState::random(&mut rng, Side::Right, nn, p, 1);
        let det = ss::scalar_product_det(&l, &r, b).unwrap_or(c(f64::NAN, 0.0));
        let (vl, vr) = (l.materialize(b), r.materialize(b));
        let dense = vl.dot(&vr);
        let sc = vnorm(&vl) * vnorm(&vr);
        out.push(ComparisonReport::residual(4, "sector mismatch gives exact zero", det.norm(), 0.0));
        out.push(ComparisonReport::residual(4, "sector mismatch, dense inner product", dense.norm() / sc, 1e-9));
    }
    let n = st.states.len();
    let idx: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..n).filter(move |j| *j != i).map(move |j| (i, j))).collect();
    let same: Vec<(usize, usize)> = idx.into_iter().filter(|(i, j)| ss::sector_delta(b, st.states[*i].state.sector, st.states[*j].state.sector)).collect();
    let (o, _) = worst(&same, |(i, j)| ss::orthogonality_measure(b, &st.states[*i], &st.states[*j]));
    out.push(ComparisonReport::residual(4, "eigenstate orthogonality (normalized det)", o, tol.scalar));
    let (nv, _) = worst(&same, |(i, j)| ss::null_vector_residual(b, &st.states[*i], &st.states[*j]));
    out.push(ComparisonReport::residual(4, "null vector V_b = c'_b - c_b", nv, tol.scalar));
    let (nr, i) = worst(&st.states, |s| {
        let k = st.states.iter().position(|x| std::ptr::eq(x, s)).unwrap();
        let det = ss::eigen_pairing(b, s, s);
        let dense = st.left[k].dot(&st.right[k]);
        (det - dense).norm() / dense.norm()
    });
    out.push(ComparisonReport::residual(4, "eigenstate norm by determinant", nr, tol.scalar).with("state", json!(i)));
    let mats = ss::materialize_eigenstates(b, &st.states);
    match ss::identity_resolution_t(b, &mats) {
        Ok(id) => {
            let d = b.dim();
            out.push(
                ComparisonReport::residual(4, "T-eigenbasis identity resolution", fro(&(id - eye::<f64>(d))), tol.identity_t * d as f64).with("dim", json!(d)),
            );
        }
        Err(e) => out.push(ComparisonReport::failure(4, "T-eigenbasis identity resolution", &e)),
    }
    out
}

pub fn reconstruction_reports(params: &Model64, tol: &Tolerances) -> Vec<ComparisonReport> {
    let mut out = vec![];
    let p = params.p as i64;
    let sites: Vec<usize> = (1..=params.n).collect();
    let per_site: Vec<Vec<ComparisonReport>> = sites
        .par_iter()
        .map(|&n| {
            let mut o = vec![];
            let t = tol.reconstruction;
            let r = |label: &str, v: Result<f64>| match v {
                Ok(x) => ComparisonReport::residual(5, label, x, t).with("site", json!(n)),
                Err(e) => ComparisonReport::failure(5, label, &e).with("site", json!(n)),
            };
            let (u, _) = params.local_uv(n);
            o.push(r("u_n = B^-1 A(mu+)", lo::reconstruct_u(params, n, 1).map(|x| lo::rel_err(&x, &u))));
            o.push(r("u_n = D^-1 C(mu+)", lo::reconstruct_u_dc(params, n).map(|x| lo::rel_err(&x, &u))));
            o.push(r("u_n^k, k = 2..p-1", (2..p).try_fold(0.0f64, |acc, k| Ok(acc.max(lo::rel_err(&lo::reconstruct_u(params, n, k)?, &matpow(&u, k)?))))));
            let ae = lo::alpha_expected(params, n);
            o.push(r("alpha = A^-1 B(mu-) = C^-1 D(mu-)", lo::reconstruct_alpha(params, n).map(|(x, y)| lo::rel_err(&x, &ae).max(lo::rel_err(&y, &ae)))));
            o.push(r(
                "beta_k = X^k alpha X^(1-k)",
                (0..p).try_fold(0.0f64, |acc, k| Ok(acc.max(lo::rel_err(&lo::reconstruct_beta(params, n, k)?, &lo::beta_expected(params, n, k))))),
            ));
            o.push(r(
                "v_n^j from the beta Fourier sum, j = 1..p-1",
                (1..p).try_fold(0.0f64, |acc, j| Ok(acc.max(lo::rel_err(&lo::reconstruct_v_power(params, n, j)?, &lo::local_monomial(params, n, 0, j))))),
            ));
            match lo::beta_sum_rule(params, n) {
                Ok(rule) => o.push(
                    ComparisonReport::residual(5, "beta sum rule", rule.derived_error(), tol.sum_rule)
                        .with("site", json!(n))
                        .with("scalar", json!("p (v^2p kappa^2(p-1) + kappa^2)/(v^2p kappa^2p + 1)"))
                        .with("printed_scalar_rel_err", json!(rule.printed_error())),
                ),
                Err(e) => o.push(ComparisonReport::failure(5, "beta sum rule", &e)),
            }
            o
        })
        .collect();
    out.extend(per_site.into_iter().flatten());
    out
}

fn q_combinatorics_reports(q: C64, tol: f64) -> Vec<ComparisonReport> {
    let qg = c(0.3, 0.7).exp();
    let mut pascal: f64 = 0.0;
    for n in 0..7 {
        for m in 0..=n {
            let a: C64 = lo::q_binomial(qg, n, m);
            let b = lo::q_factorial(qg, n) / (lo::q_factorial(qg, m) * lo::q_factorial(qg, n - m));
            pascal = pascal.max((a - b).norm() / b.norm().max(1.0));
        }
    }
    let mut root: f64 = 0.0;
    let p = (1..20).find(|k| (q.powi(*k) - 1.0).norm() < 1e-9).unwrap_or(1) as i64;
    for m in 1..p {
        root = root.max(lo::q_binomial(q, p, m).norm());
    }
    let eta = [c(0.8, 0.2), c(-0.5, 1.1), c(1.3, -0.4)];
    let mut sum: f64 = 0.0;
    for k in 1..=4 {
        for al in lo::compositions(k, 3) {
            let (l, r) = lo::q_sum_identity(qg, &al, &eta);
            sum = sum.max((l - r).norm() / r.norm().max(1.0));
            let (l, r) = lo::q_sum_identity(q, &al, &eta);
            sum = sum.max((l - r).norm() / r.norm().max(1.0));
        }
    }
    vec![
        ComparisonReport::residual(6, "q-binomial Pascal recursion = factorial form", pascal, tol),
        ComparisonReport::residual(6, "q-binomial [p; m] = 0 at the root of unity", root, tol),
        ComparisonReport::residual(6, "q-number sum identity", sum, tol),
    ]
}

pub fn monomial_reports(b: &SovBasis<f64>, seed: u64, tol: &Tolerances) -> Vec<ComparisonReport> {
    let mut out = vec![];
    let pr = &b.params;
    out.extend(q_combinatorics_reports(pr.q(), tol.combinatorics));
    let pts = LambdaSampler::for_model(seed ^ 0xb1a, pr, Some(b)).take(3);
    let p = pr.p as i64;
    for &l in &pts {
        let x = match lo::binv_a(&b.mono, l) {
            Ok(x) => x,
            Err(e) => {
                out.push(ComparisonReport::failure(6, "B^-1 A", &e));
                continue;
            }
        };
        let xp = matpow(&x, p).expect("invertible");
        let cen = lo::binv_a_central(pr, l);
        out.push(
            ComparisonReport::residual(6, "(B^-1 A)^p = avg A / avg B", lo::rel_err(&xp, &(eye::<f64>(b.dim()) * cen)), tol.reconstruction)
                .with("lambda", json!([l.re, l.im])),
        );
        if pr.e_n() == 1 {
            continue;
        }
        let ks: Vec<i64> = (1..=p).collect();
        let errs: Vec<Result<f64>> = ks.par_iter().map(|&k| Ok(lo::rel_err(&lo::binv_a_power_sov(b, k, l)?, &lo::binv_a_power_dense_sov(b, k, l)?))).collect();
        for (k, e) in ks.iter().zip(errs) {
            out.push(
                match e {
                    Ok(r) => ComparisonReport::residual(6, "(B^-1 A)^k shift sum vs dense power", r, tol.reconstruction),
                    Err(e) => ComparisonReport::failure(6, "(B^-1 A)^k shift sum vs dense power", &e),
                }
                .with("k", json!(k))
                .with("lambda", json!([l.re, l.im])),
            );
        }
    }
    if pr.e_n() == 0 {
        for k in 1..p {
            let r = lo::v2k_sov(b, k).map(|g| lo::rel_err(&g, &b.sov_matrix(&lo::local_monomial(pr, 1, 0, 2 * k))));
            out.push(match r {
                Ok(r) => ComparisonReport::residual(6, "v_1^2k shift sum vs dense", r, tol.reconstruction).with("k", json!(k)),
                Err(e) => ComparisonReport::failure(6, "v_1^2k shift sum vs dense", &e),
            });
        }
    }
    out
}

pub fn elementary_reports(b: &SovBasis<f64>, seed: u64, tol: &Tolerances) -> Vec<ComparisonReport> {
    let mut out = vec![];
    let pr = &b.params;
    let ops = ElementaryOps::build(b);
    let (nn, p) = (pr.nn(), pr.p as i64);
    let t = tol.reconstruction;
    let mut act: f64 = 0.0;
    let mut zero: f64 = 0.0;
    let mut mean: f64 = 0.0;
    let mut com: f64 = 0.0;
    let mut eta_a: f64 = 0.0;
    let mut central: f64 = 0.0;
    let q = pr.q();
    for a in 0..nn {
        let sc = fro(ops.op(a, 0)).powi(2).max(1.0);
        for k in 0..p {
            act = act.max(lo::rel_err(&b.sov_matrix(ops.op(a, k)), &lo::o_action_expected(b, a, k as usize)));
            for h in 0..p {
                if h != (k - 1).rem_euclid(p) {
                    zero = zero.max(fro(&(ops.op(a, k) * ops.op(a, h))) / sc);
                }
            }
            mean = mean.max(lo::rel_err(&ops.power(a, k, pr.p + 1), &(ops.op(a, k) * lo::o_mean_value(b, a))));
            let o = ops.op(a, k);
            eta_a = eta_a.max(lo::rel_err(&(&ops.eta_a * o), &(o * &ops.eta_a / q)));
            let mut cm = fro(&(&ops.eta_n * o - o * &ops.eta_n)) / (fro(o) * fro(&ops.eta_n));
            if let Some(th) = &ops.theta {
                cm = cm.max(fro(&(th * o - o * th)) / (fro(o) * fro(th)));
            }
            central = central.max(cm);
            for bb in 0..nn {
                if bb == a {
                    continue;
                }
                for h in 0..p {
                    let r = lo::com_o_ratio(b, a, k, bb, h);
                    com = com.max(lo::rel_err(&(ops.op(a, k) * ops.op(bb, h)), &(ops.op(bb, h) * ops.op(a, k) * r)));
                }
            }
        }
    }
    out.push(ComparisonReport::residual(7, "O-action on the left SOV basis", act, t));
    out.push(ComparisonReport::residual(7, "O_{a,k} O_{a,h} = 0 for h != k-1", zero, t));
    out.push(ComparisonReport::residual(7, "O mean value (p+1 cycle)", mean, t));
    out.push(ComparisonReport::residual(7, "O exchange relation (Com-O)", com, t));
    out.push(ComparisonReport::residual(7, "eta_A O = q^-1 O eta_A", eta_a, t));
    out.push(ComparisonReport::residual(7, "eta_N and Theta commute with O", central, t));
    let pts = LambdaSampler::for_model(seed ^ 0x1e7e, pr, Some(b)).take(3);
    let (ip, i) = worst(&pts, |l| match lo::binv_a(&b.mono, *l) {
        Ok(y) => lo::rel_err(&lo::binv_a_interpolation(b, &ops, *l), &y),
        Err(_) => f64::INFINITY,
    });
    out.push(ComparisonReport::residual(7, "B^-1 A interpolation formula", ip, t).with("lambda", json!([pts[i].re, pts[i].im])));
    if nn >= 2 {
        let mono = [(1usize, 2i64), (0, 1), (1, 1), (0, 0)];
        let r = match lo::reduce_o_monomial(b, &mono) {
            Reduced::Term { scalar, factors } => lo::rel_err(&lo::monomial_matrix(&ops, &mono), &(lo::monomial_matrix(&ops, &factors) * scalar)),
            Reduced::Zero => f64::INFINITY,
        };
        out.push(ComparisonReport::residual(7, "monomial reduction to normal order", r, t));
    }
    for n in 1..=pr.n {
        match lo::spanning_rank(pr, n) {
            Ok(r) => out.push(ComparisonReport::count(7, "spanning rank of u^j v^2k", r, pr.p * pr.p).with("site", json!(n))),
            Err(e) => out.push(ComparisonReport::failure(7, "spanning rank of u^j v^2k", &e).with("site", json!(n))),
        }
    }
    out
}

/// Elementary basis elements exercised by the form-factor checks (r = 0, 1, 2).
pub fn elementary_cases(nn: usize, even: bool) -> Vec<ElementaryBasisElement> {
    let el = |h: usize, h0: usize, f: &[(usize, i64, usize)]| ElementaryBasisElement {
        h,
        h0,
        factors: f.iter().map(|&(a, k, alpha)| OFactor { a, k, alpha }).collect(),
    };
    let mut out = vec![];
    if even {
        out.extend([el(1, 0, &[]), el(0, 1, &[]), el(2, 2, &[]), el(1, 1, &[(0, 1, 1)]), el(0, 2, &[(0, 2, 2)])]);
    }
    out.extend([el(0, 0, &[(0, 0, 1)]), el(0, 0, &[(0, 2, 2)]), el(0, 0, &[(0, 1, 3)])]);
    if nn >= 2 {
        out.extend([el(0, 0, &[(0, 1, 1), (1, 2, 1)]), el(0, 0, &[(0, 1, 2), (1, 0, 1)])]);
    }
    if nn >= 3 {
        out.extend([el(0, 0, &[(0, 2, 1), (2, 1, 2)]), el(0, 0, &[(1, 1, 1), (2, 0, 1)])]);
    }
    out
}

/// Row of per-pair results from a form-factor sweep.
#[derive(Clone, Debug, Serialize)]
pub struct PairResult {
    pub left: usize,
    pub right: usize,
    pub determinant: [f64; 2],
    pub oracle: [f64; 2],
    pub scale: f64,
    pub selection_rule_applied: bool,
    pub pass: bool,
    pub rel_err: f64,
    pub abs_err: f64,
}

/// <t_i|u_n|t_j> by determinant and by dense contraction for all pairs.
pub fn ff_u_sweep(
    basis: &SovBasis<f64>,
    states: &[SovEigenstate<f64>],
    left: &[Vect<f64>],
    right: &[Vect<f64>],
    site: usize,
    tol: f64,
) -> Result<Vec<PairResult>> {
    let (u, _) = basis.params.local_uv(site);
    let n = states.len();
    let idx: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
    idx.par_iter()
        .map(|&(i, j)| {
            let r = ff_u(basis, &states[i], &states[j], site)?;
            let o = direct_matrix_element(&left[i], &u, &right[j])?;
            Ok(pair_result(i, j, r.value, o, vnorm(&left[i]) * vnorm(&right[j]), r.selection_rule_applied, tol))
        })
        .collect()
}

fn pair_result(i: usize, j: usize, det: C64, o: C64, sc: f64, sel: bool, tol: f64) -> PairResult {
    let rep = ComparisonReport::compare(8, "", det, o, sc, tol);
    let pass = if sel { det == c(0.0, 0.0) && o.norm() <= 1e-9 * sc } else { rep.pass };
    PairResult {
        left: i,
        right: j,
        determinant: [det.re, det.im],
        oracle: [o.re, o.im],
        scale: sc,
        selection_rule_applied: sel,
        pass,
        rel_err: rep.rel_err,
        abs_err: rep.abs_err,
    }
}

/// Elementary form factors on a strided subset of pairs.
pub fn ff_elementary_sweep(
    basis: &SovBasis<f64>,
    states: &[SovEigenstate<f64>],
    left: &[Vect<f64>],
    right: &[Vect<f64>],
    el: &ElementaryBasisElement,
    stride: (usize, usize),
    tol: f64,
) -> Result<Vec<PairResult>> {
    let ops = ElementaryOps::build(basis);
    let x = el.matrix(&ops);
    let xn = fro(&x);
    let n = states.len();
    let idx: Vec<(usize, usize)> = (0..n).step_by(stride.0).flat_map(|i| (0..n).step_by(stride.1).map(move |j| (i, j))).collect();
    idx.par_iter()
        .map(|&(i, j)| {
            let r = ff_elementary(basis, &states[i], &states[j], el)?;
            let o = direct_matrix_element(&left[i], &x, &right[j])?;
            Ok(pair_result(i, j, r.value, o, vnorm(&left[i]) * xn * vnorm(&right[j]), r.selection_rule_applied, tol))
        })
        .collect()
}

fn summarize(label: &str, rows: Result<Vec<PairResult>>, tol: f64) -> ComparisonReport {
    match rows {
        Ok(rows) => {
            let total = rows.len();
            let zeros = rows.iter().filter(|r| r.selection_rule_applied).count();
            let failed = rows.iter().filter(|r| !r.pass).count();
            let w = rows
                .iter()
                .filter(|r| !r.selection_rule_applied)
                .map(|r| {
                    let small = r.oracle[0].hypot(r.oracle[1]) < ABS_FALLBACK * r.scale;
                    if small {
                        r.abs_err.min(r.rel_err)
                    } else {
                        r.rel_err
                    }
                })
                .fold(0.0f64, f64::max);
            let mut rep = ComparisonReport::residual(8, label, w, tol);
            rep.pass = failed == 0;
            rep.with("pairs", json!(total)).with("selection_zeros", json!(zeros)).with("failed", json!(failed))
        }
        Err(e) => ComparisonReport::failure(8, label, &e),
    }
}

pub fn form_factor_reports(st: &Prepared, tol: &Tolerances) -> Vec<ComparisonReport> {
    let mut out = vec![];
    let b = &st.basis;
    let pr = &b.params;
    out.push(summarize("ff_u determinant vs oracle, all pairs, site 1", ff_u_sweep(b, &st.states, &st.left, &st.right, 1, tol.ff_u), tol.ff_u));
    if pr.is_homogeneous() && pr.n > 1 {
        out.push(
            summarize("ff_u determinant vs oracle, all pairs, site 2", ff_u_sweep(b, &st.states, &st.left, &st.right, 2, tol.ff_u), tol.ff_u)
                .with("site", json!(2)),
        );
    }
    let stride = if b.dim() > 50 { (9, 7) } else { (5, 4) };
    for el in elementary_cases(pr.nn(), pr.e_n() == 1) {
        let rows = ff_elementary_sweep(b, &st.states, &st.left, &st.right, &el, stride, tol.ff_elementary);
        out.push(summarize("elementary form factor vs oracle", rows, tol.ff_elementary).with("element", json!(el.to_string())));
    }
    let mut lists: Vec<Vec<&str>> = vec![vec!["u1"], vec!["u1", "u1"]];
    if pr.e_n() == 1 {
        lists.push(vec!["u1", "v1^2"]);
    }
    for names in lists {
        let ops: Vec<LocalOperator> = names.iter().map(|s| LocalOperator::parse(s).expect("static operator name")).collect();
        let dense: Result<Vec<Mat<f64>>> = ops.iter().map(|o| dense_operator(b, o)).collect();
        let dense = match dense {
            Ok(d) => d,
            Err(e) => {
                out.push(ComparisonReport::failure(8, "m-point expansion", &e));
                continue;
            }
        };
        let ts: Vec<usize> = (0..st.states.len()).step_by(if b.dim() > 50 { 25 } else { 4 }).collect();
        let reps: Vec<ComparisonReport> = ts
            .par_iter()
            .map(|&t| {
                let sc = vnorm(&st.left[t]) * vnorm(&st.right[t]) / st.left[t].dot(&st.right[t]).norm();
                match (npoint(b, &st.states, t, &ops), npoint_dense(b, &st.states[t], &dense)) {
                    (Ok(v), Ok(d)) => ComparisonReport::compare(8, "m-point expansion vs dense product", v, d, sc, tol.npoint),
                    (Err(e), _) | (_, Err(e)) => ComparisonReport::failure(8, "m-point expansion vs dense product", &e),
                }
                .with("ops", json!(names.join(",")))
                .with("state", json!(t))
            })
            .collect();
        out.extend(reps);
    }
    out
}
