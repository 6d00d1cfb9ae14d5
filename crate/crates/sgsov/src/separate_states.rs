//! Separate states, the scalar-product determinant, the Phi-matrix and the
//! transfer-matrix eigenbasis resolution of the identity.

use crate::linalg::{det, fro, pair, vnorm};
use crate::scalar::{abs, c, csqrt, one, pow, zero, Cx, Mat, Real, Vect};
use crate::sov_basis::SovBasis;
use crate::spectrum::SovEigenstate;
use crate::{Result, SgError};
use nalgebra::{DMatrix, DVector};
use rand::Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

#[derive(Clone, Debug)]
pub struct SeparateState<R: Real> {
    pub side: Side,
    /// coeff[a][h] = alpha_a(eta_a^{(h)}), a < [N], h < p.
    pub coeff: Vec<Vec<Cx<R>>>,
    /// Theta-sector s (even chains only; 0 otherwise).
    pub sector: usize,
}

impl<R: Real> SeparateState<R> {
    pub fn new(side: Side, coeff: Vec<Vec<Cx<R>>>, sector: usize) -> Self {
        Self { side, coeff, sector }
    }

    /// Coefficients with real and imaginary parts uniform in [-1, 1].
    pub fn random<G: Rng>(rng: &mut G, side: Side, nn: usize, p: usize, sector: usize) -> Self {
        let coeff = (0..nn).map(|_| (0..p).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect()).collect();
        Self { side, coeff, sector }
    }

    /// Right state with coefficients Q_t, left state with Qbar_t.
    pub fn from_eigenstate(st: &SovEigenstate<R>, side: Side) -> Self {
        let coeff = match side {
            Side::Right => st.q_grid.clone(),
            Side::Left => st.qbar_grid.clone(),
        };
        Self { side, coeff, sector: st.state.sector }
    }

    /// Dense vector (right) or covector stored as a column (left).
    pub fn materialize(&self, basis: &SovBasis<R>) -> Vect<R> {
        let pr = &basis.params;
        let nn = pr.nn();
        let mut out = DVector::zeros(basis.dim());
        let sp = csqrt(c::<R>(pr.p as f64, 0.0));
        for (i, k) in basis.labels().enumerate() {
            let mut w = one::<R>();
            if pr.e_n() == 1 {
                let sign = if self.side == Side::Left { 1 } else { -1 };
                w *= pr.qp(sign * (self.sector * k[pr.n - 1]) as i64) / sp;
            }
            for a in 0..nn {
                let ea = basis.eta(a, k[a] as i64);
                w *= self.coeff[a][k[a]] / basis.omega(ea);
                for b in 0..a {
                    let eb = basis.eta(b, k[b] as i64);
                    w *= ea * ea - eb * eb;
                }
            }
            let v = match self.side {
                Side::Left => &basis.left[i],
                Side::Right => &basis.right[i],
            };
            out += v * w;
        }
        out
    }
}

/// PhiGeneral(a, m) = (eta_a^{(0)})^m sum_h alpha_a(h) beta_a(h) q^{m h} / omega_a(eta_a^{(h)}).
pub fn phi_general<R: Real>(basis: &SovBasis<R>, alpha: &[Cx<R>], beta: &[Cx<R>], a: usize, m: i64) -> Cx<R> {
    let pr = &basis.params;
    let mut s = zero::<R>();
    for h in 0..pr.p {
        s += alpha[h] * beta[h] * pr.qp(m * h as i64) / basis.omega(basis.eta(a, h as i64));
    }
    pow(basis.eta(a, 0), m) * s
}

/// [N] x [N] matrix with entries PhiGeneral(a, 2b + shift), b = 0..[N)-1.
pub fn phi_matrix_shifted<R: Real>(basis: &SovBasis<R>, alpha: &[Vec<Cx<R>>], beta: &[Vec<Cx<R>>], shift: i64) -> Mat<R> {
    let nn = basis.params.nn();
    DMatrix::from_fn(nn, nn, |a, b| phi_general(basis, &alpha[a], &beta[a], a, 2 * b as i64 + shift))
}

pub fn scalar_matrix<R: Real>(alpha: &SeparateState<R>, beta: &SeparateState<R>, basis: &SovBasis<R>) -> Mat<R> {
    phi_matrix_shifted(basis, &alpha.coeff, &beta.coeff, 0)
}

/// Sector selection factor of an even chain (1 for odd chains).
pub fn sector_delta<R: Real>(basis: &SovBasis<R>, s_left: usize, s_right: usize) -> bool {
    basis.params.e_n() == 0 || s_left % basis.params.p == s_right % basis.params.p
}

/// <alpha|beta> = C_N delta det M.
pub fn scalar_product_det<R: Real>(alpha: &SeparateState<R>, beta: &SeparateState<R>, basis: &SovBasis<R>) -> Result<Cx<R>> {
    if alpha.side != Side::Left || beta.side != Side::Right {
        return Err(SgError::InvalidParams("scalar product takes a left and a right state".into()));
    }
    let nn = basis.params.nn();
    if alpha.coeff.len() != nn || beta.coeff.len() != nn {
        return Err(SgError::DimensionMismatch(format!("expected {nn} coefficient rows")));
    }
    if !sector_delta(basis, alpha.sector, beta.sector) {
        return Ok(zero());
    }
    Ok(basis.c_n * det(&scalar_matrix(alpha, beta, basis)))
}

/// Phi^{(t, t')} with Qbar_t on the left and Q_t' on the right.
pub fn phi_matrix<R: Real>(basis: &SovBasis<R>, tl: &SovEigenstate<R>, tr: &SovEigenstate<R>) -> Mat<R> {
    phi_matrix_shifted(basis, &tl.qbar_grid, &tr.q_grid, 0)
}

/// <t|t'> between materialized eigenstates, by determinant.
pub fn eigen_pairing<R: Real>(basis: &SovBasis<R>, tl: &SovEigenstate<R>, tr: &SovEigenstate<R>) -> Cx<R> {
    if !sector_delta(basis, tl.state.sector, tr.state.sector) {
        return zero();
    }
    basis.c_n * det(&phi_matrix(basis, tl, tr))
}

/// |det| / prod of row 2-norms.
pub fn normalized_det<R: Real>(m: &Mat<R>) -> f64 {
    let rows: f64 = (0..m.nrows()).map(|i| vnorm(&m.row(i).transpose())).product();
    abs(det(m)) / rows.max(1e-300)
}

/// Entrywise sums of |terms| of PhiGeneral(a, 2b): the scale against which
/// cancellations in Phi are judged.
pub fn phi_abs_matrix<R: Real>(basis: &SovBasis<R>, alpha: &[Vec<Cx<R>>], beta: &[Vec<Cx<R>>]) -> DMatrix<f64> {
    let pr = &basis.params;
    let nn = pr.nn();
    DMatrix::from_fn(nn, nn, |a, b| {
        let e0 = abs(basis.eta(a, 0)).powi(2 * b as i32);
        (0..pr.p).map(|h| abs(alpha[a][h] * beta[a][h] / basis.omega(basis.eta(a, h as i64)))).sum::<f64>() * e0
    })
}

/// |det Phi| / prod_a ||row_a of the absolute-term matrix||.
pub fn orthogonality_measure<R: Real>(basis: &SovBasis<R>, tl: &SovEigenstate<R>, tr: &SovEigenstate<R>) -> f64 {
    let phi = phi_matrix(basis, tl, tr);
    let sc = phi_abs_matrix(basis, &tl.qbar_grid, &tr.q_grid);
    let rows: f64 = (0..sc.nrows()).map(|i| sc.row(i).norm()).product();
    abs(det(&phi)) / rows.max(1e-300)
}

/// V_b = c'_b - c_b with c_b the coefficient of lambda^{-[N]-1+2b}, b = 1..[N].
pub fn null_vector<R: Real>(basis: &SovBasis<R>, tl: &SovEigenstate<R>, tr: &SovEigenstate<R>) -> Vect<R> {
    let nn = basis.params.nn() as i64;
    DVector::from_iterator(nn as usize, (1..=nn).map(|b| tr.state.t.coeff(-nn - 1 + 2 * b) - tl.state.t.coeff(-nn - 1 + 2 * b)))
}

/// ||Phi V|| / (||Phi|| ||V||), with ||Phi|| taken from the absolute-term matrix.
pub fn null_vector_residual<R: Real>(basis: &SovBasis<R>, tl: &SovEigenstate<R>, tr: &SovEigenstate<R>) -> f64 {
    let phi = phi_matrix(basis, tl, tr);
    let sc = phi_abs_matrix(basis, &tl.qbar_grid, &tr.q_grid).norm();
    let v = null_vector(basis, tl, tr);
    vnorm(&(&phi * &v)) / (sc.max(fro(&phi)) * vnorm(&v)).max(1e-300)
}

/// Materialized left and right eigenstates together with det-formula norms.
#[derive(Clone, Debug)]
pub struct MaterializedEigenstate<R: Real> {
    pub left: Vect<R>,
    pub right: Vect<R>,
    pub norm: Cx<R>,
    pub sector: usize,
}

pub fn materialize_eigenstates<R: Real>(basis: &SovBasis<R>, states: &[SovEigenstate<R>]) -> Vec<MaterializedEigenstate<R>> {
    states
        .iter()
        .map(|st| MaterializedEigenstate {
            left: SeparateState::from_eigenstate(st, Side::Left).materialize(basis),
            right: SeparateState::from_eigenstate(st, Side::Right).materialize(basis),
            norm: eigen_pairing(basis, st, st),
            sector: st.state.sector,
        })
        .collect()
}

/// Sum_t |t><t| / <t|t> with the determinant norms.
pub fn identity_resolution_t<R: Real>(basis: &SovBasis<R>, states: &[MaterializedEigenstate<R>]) -> Result<Mat<R>> {
    let d = basis.dim();
    if states.len() < d {
        return Err(SgError::IncompleteSpectrum { found: states.len(), expected: d });
    }
    let mut out = DMatrix::zeros(d, d);
    for st in states {
        out += &st.right * st.left.transpose() / st.norm;
    }
    Ok(out)
}

/// Hermitian-dual diagnostic for self-adjoint parameters: returns the collinearity
/// defect of (|t>)^dagger with <t| and the relative mismatch of the proportionality
/// constant against ||t||^2 / <t|t>.
pub fn hermitian_dual<R: Real>(left: &Vect<R>, right: &Vect<R>) -> (f64, f64) {
    let rc = right.map(|z| z.conj());
    let defect = crate::spectrum::collinearity_defect(&rc, left);
    let i = (0..left.len()).max_by(|a, b| abs(left[*a]).partial_cmp(&abs(left[*b])).unwrap()).unwrap();
    let alpha = rc[i] / left[i];
    let nr = vnorm(right);
    let formula = c::<R>(nr * nr, 0.0) / pair(left, right);
    (defect, abs(alpha - formula) / abs(formula))
}
