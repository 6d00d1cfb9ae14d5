//! Determinant formulas for form factors of u_n and of elementary operators,
//! and the m-point expansion over intermediate transfer-matrix eigenstates.

use crate::linalg::det;
use crate::local_ops::{leg_permutation, reconstruct_v_power, ElementaryBasisElement};
use crate::scalar::{dd, one, pow, zero, Cx, Mat, Real, Vect};
use crate::separate_states::{eigen_pairing, phi_general, SeparateState, Side};
use crate::sov_basis::SovBasis;
use crate::spectrum::SovEigenstate;
use crate::{Result, SgError};
use nalgebra::DMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Determinant,
    Oracle,
    /// Dense contraction with a reconstructed operator.
    Reconstruction,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Determinant => "determinant",
            Method::Oracle => "oracle",
            Method::Reconstruction => "reconstruction",
        }
    }
}

#[derive(Clone, Debug)]
pub struct FormFactorResult<R: Real> {
    pub value: Cx<R>,
    pub method: Method,
    pub selection_rule_applied: bool,
    pub matrix_dump: Option<Mat<R>>,
}

impl<R: Real> FormFactorResult<R> {
    fn zero_by_selection() -> Self {
        Self { value: zero(), method: Method::Determinant, selection_rule_applied: true, matrix_dump: None }
    }

    fn determinant(value: Cx<R>, m: Mat<R>) -> Self {
        Self { value, method: Method::Determinant, selection_rule_applied: false, matrix_dump: Some(m) }
    }
}

fn phi<R: Real>(basis: &SovBasis<R>, tl: &SovEigenstate<R>, tr: &SovEigenstate<R>, a: usize, m: i64) -> Cx<R> {
    phi_general(basis, &tl.qbar_grid[a], &tr.q_grid[a], a, m)
}

fn eta_n0<R: Real>(basis: &SovBasis<R>) -> Cx<R> {
    let pr = &basis.params;
    if pr.e_n() == 1 {
        basis.grid.eta0[pr.n - 1]
    } else {
        one()
    }
}

/// The [N] x [N] matrix U^{(t,t')}(lambda): columns PhiGeneral(a, 2b+1), b < [N]-1, and the modified last column.
pub fn ff_u_matrix<R: Real>(basis: &SovBasis<R>, tl: &SovEigenstate<R>, tr: &SovEigenstate<R>, lambda: Cx<R>) -> Mat<R> {
    let pr = &basis.params;
    let nn = pr.nn();
    let p = pr.p as i64;
    let q = pr.q();
    let en = eta_n0(basis);
    DMatrix::from_fn(nn, nn, |a, b| {
        if b + 1 < nn {
            return phi(basis, tl, tr, a, 2 * b as i64 + 1);
        }
        let mut s = zero::<R>();
        for h in 0..p {
            let e = basis.eta(a, h);
            let e1 = basis.eta(a, h + 1);
            s += pow(q, (nn as i64 - 1) * h) * tr.q_grid[a][h as usize] * tl.qbar_grid[a][((h + 1) % p) as usize] * pr.coeff_a(q * e)
                / (pow(e, nn as i64 - 1) * dd(lambda, e1));
        }
        pow(basis.grid.eta0[a], nn as i64 - 1) / (pr.k_const() * en) * s
    })
}

/// <t|u_1|t'> by the determinant formula.
fn ff_u1<R: Real>(basis: &SovBasis<R>, tl: &SovEigenstate<R>, tr: &SovEigenstate<R>) -> FormFactorResult<R> {
    let pr = &basis.params;
    let p = pr.p;
    if pr.e_n() == 1 && tl.state.sector % p != (tr.state.sector + 1) % p {
        return FormFactorResult::zero_by_selection();
    }
    let lambda = pr.mu_plus(1);
    let u = ff_u_matrix(basis, tl, tr, lambda);
    let mut val = det(&u);
    if pr.e_n() == 1 {
        let nn = pr.nn();
        let en = eta_n0(basis);
        let xi = pr.xi_product();
        let s = tr.state.sector as i64;
        let x = DMatrix::from_fn(nn, nn, |a, b| phi(basis, tl, tr, a, 2 * b as i64 + 1));
        let y = DMatrix::from_fn(nn, nn, |a, b| phi(basis, tl, tr, a, 2 * b as i64 - 1));
        val += lambda * pr.qp(s) / (en * xi) * det(&x) - xi * pr.qp(-s) / (lambda * en) * det(&y);
    }
    FormFactorResult::determinant(val * basis.c_n, u)
}

/// phi_t = <t|U_n|t>/<t|t> for the permutation-realized shift operator.
pub fn shift_eigenvalue<R: Real>(basis: &SovBasis<R>, st: &SovEigenstate<R>, n: usize) -> Cx<R> {
    let w = leg_permutation(&basis.params, n);
    let l = SeparateState::from_eigenstate(st, Side::Left).materialize(basis);
    let r = SeparateState::from_eigenstate(st, Side::Right).materialize(basis);
    l.dot(&(w * &r)) / l.dot(&r)
}

/// <t|u_n|t'>: determinant at n = 1, times phi_t/phi_t' on homogeneous chains for n > 1.
pub fn ff_u<R: Real>(basis: &SovBasis<R>, tl: &SovEigenstate<R>, tr: &SovEigenstate<R>, n: usize) -> Result<FormFactorResult<R>> {
    let pr = &basis.params;
    if n == 0 || n > pr.n {
        return Err(SgError::IndexOutOfRange(format!("site {n} not in 1..={}", pr.n)));
    }
    if n > 1 && !pr.is_homogeneous() {
        return Err(SgError::ShiftUnavailable("u_n with n > 1 needs a homogeneous chain".into()));
    }
    let mut r = ff_u1(basis, tl, tr);
    if n > 1 && !r.selection_rule_applied {
        r.value *= shift_eigenvalue(basis, tl, n) / shift_eigenvalue(basis, tr, n);
    }
    Ok(r)
}

fn vandermonde<R: Real>(xs: &[Cx<R>]) -> Cx<R> {
    let mut v = one::<R>();
    for i in 0..xs.len() {
        for j in 0..i {
            v *= xs[i] - xs[j];
        }
    }
    v
}

/// Column-power convention of the elementary form-factor matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ElementaryConvention {
    /// Vandermonde in eta^2 with the oracle-fixed sign and cross factors.
    Derived,
    /// Literal transcription: eta^{4 row} columns, no extra sign, the printed cross factors.
    Literal,
}

/// <t|E|t'> for an elementary basis element by the determinant formula.
pub fn ff_elementary<R: Real>(basis: &SovBasis<R>, tl: &SovEigenstate<R>, tr: &SovEigenstate<R>, el: &ElementaryBasisElement) -> Result<FormFactorResult<R>> {
    ff_elementary_with(basis, tl, tr, el, ElementaryConvention::Derived)
}

pub fn ff_elementary_with<R: Real>(
    basis: &SovBasis<R>,
    tl: &SovEigenstate<R>,
    tr: &SovEigenstate<R>,
    el: &ElementaryBasisElement,
    conv: ElementaryConvention,
) -> Result<FormFactorResult<R>> {
    let pr = &basis.params;
    let p = pr.p as i64;
    let nn = pr.nn();
    el.validate(nn, pr.p)?;
    let e = pr.e_n() as i64;
    let (h, h0) = if e == 1 { (el.h as i64, el.h0 as i64) } else { (0, 0) };
    if e == 1 && tl.state.sector as i64 % p != (tr.state.sector as i64 + h) % p {
        return Ok(FormFactorResult::zero_by_selection());
    }
    let literal = conv == ElementaryConvention::Literal;
    let q = pr.q();
    let fs: Vec<(usize, i64, i64)> = el.factors.iter().map(|f| (f.a, f.k, f.alpha as i64)).collect();
    let r = fs.len() as i64;
    let g: i64 = fs.iter().map(|f| f.2).sum();
    let ss = nn as i64 - r;
    let rest: Vec<usize> = (0..nn).filter(|b| !fs.iter().any(|f| f.0 == *b)).collect();
    let size = (nn as i64 + r * p - g) as usize;
    let mut cols: Vec<Vec<Cx<R>>> = vec![];
    let mut ys = vec![];
    for &(a, hi, al) in &fs {
        for j in 0..=(p - al) {
            let x = basis.eta(a, hi + j);
            ys.push(x * x);
            cols.push((0..size as i64).map(|row| if literal { pow(x, 4 * row) } else { pow(x * x, row) }).collect());
        }
    }
    for &b in &rest {
        cols.push((0..size as i64).map(|row| phi(basis, tl, tr, b, 2 * row + g + e * h0)).collect());
    }
    let m = DMatrix::from_fn(size, size, |i, j| cols[j][i]);
    let heads: Vec<Cx<R>> = fs.iter().map(|&(a, hi, _)| pow(basis.eta(a, hi), 2)).collect();
    let mut f = vandermonde(&heads) / vandermonde(&ys);
    let mut sgn: i64 = fs.iter().enumerate().map(|(i, x)| x.0 as i64 - i as i64).sum();
    if !literal {
        sgn += ss * (r + ys.len() as i64);
    }
    if sgn % 2 != 0 {
        f = -f;
    }
    for (i, &(a, hi, al)) in fs.iter().enumerate() {
        let et = basis.eta(a, hi);
        f *= tl.qbar_grid[a][hi.rem_euclid(p) as usize] * tr.q_grid[a][(hi - al).rem_euclid(p) as usize] * pow(et, e * h0 + al * ss) / pow(et, nn as i64 - 1)
            * pow(q, -ss * al * (al - 1) / 2);
        for hh in 0..al {
            f *= pr.coeff_a(basis.eta(a, hi - hh));
        }
        for &b in &rest {
            f /= pow(basis.grid.z[a], 2) - pow(basis.grid.z[b], 2);
        }
        for hh in 0..al {
            for (l, &(a2, h2, al2)) in fs.iter().enumerate() {
                if literal {
                    if l < i {
                        f /= dd(basis.eta(a, hi + al - hh), basis.eta(a2, h2));
                    }
                    if l > i {
                        f /= dd(basis.eta(a, hi), basis.eta(a2, h2 + hh));
                    }
                } else {
                    if l > i {
                        f /= dd(basis.eta(a, hi - hh), basis.eta(a2, h2));
                    }
                    if l < i {
                        f /= dd(basis.eta(a, hi - hh), basis.eta(a2, h2 - al2));
                    }
                }
            }
        }
    }
    let mut val = f * det(&m) * basis.c_n;
    if e == 1 {
        val *= pr.qp(h0 * tr.state.sector as i64) / (pow(eta_n0(basis), h) * pow(pr.xi_product(), h0));
    }
    Ok(FormFactorResult::determinant(val, m))
}

/// Local operators accepted by the m-point expansion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LocalOperator {
    U {
        site: usize,
    },
    /// v_site^power, 1 <= power < p, by dense contraction with the reconstruction.
    VPower {
        site: usize,
        power: i64,
    },
    Elementary(ElementaryBasisElement),
}

impl LocalOperator {
    /// Parses "u1", "v2^2", ... (site 1-based).
    pub fn parse(s: &str) -> Result<Self> {
        let bad = || SgError::InvalidParams(format!("cannot parse local operator '{s}'"));
        let (head, power) = match s.split_once('^') {
            Some((h, k)) => (h, k.parse::<i64>().map_err(|_| bad())?),
            None => (s, 1),
        };
        let site: usize = head.get(1..).ok_or_else(bad)?.parse().map_err(|_| bad())?;
        match head.chars().next() {
            Some('u') if power == 1 => Ok(LocalOperator::U { site }),
            Some('v') => Ok(LocalOperator::VPower { site, power }),
            _ => Err(bad()),
        }
    }
}

/// Dense materialized eigenvectors of the spectrum, used by reconstruction-based form factors.
pub struct EigenVectors<R: Real> {
    pub left: Vec<Vect<R>>,
    pub right: Vec<Vect<R>>,
}

impl<R: Real> EigenVectors<R> {
    pub fn new(basis: &SovBasis<R>, states: &[SovEigenstate<R>]) -> Self {
        Self {
            left: states.iter().map(|st| SeparateState::from_eigenstate(st, Side::Left).materialize(basis)).collect(),
            right: states.iter().map(|st| SeparateState::from_eigenstate(st, Side::Right).materialize(basis)).collect(),
        }
    }
}

/// Two-point form factor table F[i][j] = <t_i|O|t_j>.
pub fn form_factor_table<R: Real>(basis: &SovBasis<R>, states: &[SovEigenstate<R>], vecs: &EigenVectors<R>, op: &LocalOperator) -> Result<Mat<R>> {
    let d = states.len();
    let mut out = DMatrix::zeros(d, d);
    match op {
        LocalOperator::VPower { site, power } => {
            if *site == 0 || *site > basis.params.n {
                return Err(SgError::IndexOutOfRange(format!("site {site}")));
            }
            let x = reconstruct_v_power(&basis.params, *site, *power)?;
            for j in 0..d {
                let xr = &x * &vecs.right[j];
                for i in 0..d {
                    out[(i, j)] = vecs.left[i].dot(&xr);
                }
            }
        }
        LocalOperator::U { site } => {
            for i in 0..d {
                for j in 0..d {
                    out[(i, j)] = ff_u(basis, &states[i], &states[j], *site)?.value;
                }
            }
        }
        LocalOperator::Elementary(el) => {
            for i in 0..d {
                for j in 0..d {
                    out[(i, j)] = ff_elementary(basis, &states[i], &states[j], el)?.value;
                }
            }
        }
    }
    Ok(out)
}

/// <t|O_1 ... O_m|t>/<t|t> by inserting the T-eigenbasis resolution of the identity m-1 times.
pub fn npoint<R: Real>(basis: &SovBasis<R>, states: &[SovEigenstate<R>], t: usize, ops: &[LocalOperator]) -> Result<Cx<R>> {
    let d = basis.dim();
    if states.len() < d {
        return Err(SgError::IncompleteSpectrum { found: states.len(), expected: d });
    }
    if t >= states.len() {
        return Err(SgError::IndexOutOfRange(format!("state {t}")));
    }
    if ops.is_empty() {
        return Ok(one());
    }
    let norms: Vec<Cx<R>> = states.iter().map(|st| eigen_pairing(basis, st, st)).collect();
    let vecs = if ops.iter().any(|o| matches!(o, LocalOperator::VPower { .. })) {
        EigenVectors::new(basis, states)
    } else {
        EigenVectors { left: vec![], right: vec![] }
    };
    let mut w = DMatrix::<Cx<R>>::zeros(1, states.len());
    w[(0, t)] = one();
    for op in ops {
        let tab = form_factor_table(basis, states, &vecs, op)?;
        w *= tab;
        for j in 0..states.len() {
            w[(0, j)] /= norms[j];
        }
    }
    Ok(w[(0, t)])
}

/// Dense <t|O_1 ... O_m|t>/<t|t> with the embedded local operators.
pub fn npoint_dense<R: Real>(basis: &SovBasis<R>, st: &SovEigenstate<R>, ops: &[Mat<R>]) -> Result<Cx<R>> {
    let l = SeparateState::from_eigenstate(st, Side::Left).materialize(basis);
    let r = SeparateState::from_eigenstate(st, Side::Right).materialize(basis);
    let mut x = r.clone();
    for op in ops.iter().rev() {
        x = op * x;
    }
    Ok(l.dot(&x) / l.dot(&r))
}

/// Dense matrix of a local operator (embedded u_n^j v_n^k or elementary element).
pub fn dense_operator<R: Real>(basis: &SovBasis<R>, op: &LocalOperator) -> Result<Mat<R>> {
    let pr = &basis.params;
    match op {
        LocalOperator::U { site } | LocalOperator::VPower { site, .. } if *site == 0 || *site > pr.n => Err(SgError::IndexOutOfRange(format!("site {site}"))),
        LocalOperator::U { site } => Ok(pr.local_uv(*site).0),
        LocalOperator::VPower { site, power } => Ok(crate::local_ops::local_monomial(pr, *site, 0, *power)),
        LocalOperator::Elementary(el) => {
            let ops = crate::local_ops::ElementaryOps::build(basis);
            Ok(el.matrix(&ops))
        }
    }
}
