//! Transfer-matrix spectrum, Theta-sectors, the p x p functional equation,
//! Baxter Q-polynomials and SOV wavefunctions.

use crate::laurent::LaurentPoly;
use crate::linalg::{det, eig, inverse, pair, poly_eval, smallest_right_singular, vnorm};
use crate::model_core::{ModelParams, Monodromy};
use crate::scalar::{abs, c, floor_tol, one, pow, zero, Cx, Mat, Real, Vect};
use crate::sov_basis::{index_of, label_of, SovBasis};
use crate::{Result, SgError};
use nalgebra::{DMatrix, DVector};

/// Relative eigenvalue gap below which the spectrum counts as degenerate.
pub const SPECTRAL_GAP: f64 = 1e-9;
/// Nullspace threshold on singular values, relative to the largest.
pub const NULL_TOL: f64 = 1e-9;

const PROBE0: (f64, f64) = (0.83, 0.41);
const PROBE1: (f64, f64) = (1.21, -0.33);

#[derive(Clone, Debug)]
pub struct TransferEigenstate<R: Real> {
    /// Even Laurent polynomial of degree N-bar.
    pub t: LaurentPoly<R>,
    /// Theta|t> = q^s |t> (0 for odd chains).
    pub sector: usize,
    pub right: Vect<R>,
    /// Left eigenvector, normalized so that <t|t> = 1 for the raw pair.
    pub left: Vect<R>,
}

impl<R: Real> TransferEigenstate<R> {
    pub fn t_at(&self, lambda: Cx<R>) -> Cx<R> {
        self.t.eval(lambda)
    }

    /// Sector label (k, sign) with k in 0..=(p-1)/2 and Theta eigenvalue q^{sign k}.
    pub fn theta_index(&self, p: usize) -> (usize, i8) {
        theta_index(self.sector, p)
    }
}

pub fn theta_index(s: usize, p: usize) -> (usize, i8) {
    if s == 0 {
        (0, 1)
    } else if s <= (p - 1) / 2 {
        (s, 1)
    } else {
        (p - s, -1)
    }
}

/// Eigenstate data expressed in the SOV basis.
#[derive(Clone, Debug)]
pub struct SovEigenstate<R: Real> {
    pub state: TransferEigenstate<R>,
    /// Psi(k) = <k|t> by linear label index.
    pub psi: Vec<Cx<R>>,
    /// Phi(k) = <t|k>.
    pub phi: Vec<Cx<R>>,
    /// Q(eta_a^{(h)}) up to one constant per a.
    pub q_grid: Vec<Vec<Cx<R>>>,
    pub qbar_grid: Vec<Vec<Cx<R>>>,
    pub anchor: usize,
    pub anchor_left: usize,
}

/// Eigen-decomposition of the transfer matrix; Theta-blocks first for even chains.
pub fn transfer_eigenstates<R: Real>(params: &ModelParams<R>, mono: &Monodromy<R>) -> Result<Vec<TransferEigenstate<R>>> {
    let d = params.dim();
    let x = mono.transfer(c(PROBE0.0, PROBE0.1)) + mono.transfer(c(PROBE1.0, PROBE1.1)) * c::<R>(0.31, 0.0);
    let mut blocks: Vec<(usize, Vec<usize>)> = vec![];
    if params.e_n() == 1 {
        let th = params.theta_unchecked();
        let base = (0..params.n).fold(one::<R>(), |acc, n| if n % 2 == 0 { acc * params.v[n].conj() } else { acc * params.v[n] });
        let mut groups = vec![vec![]; params.p];
        for i in 0..d {
            let z = th[(i, i)] / base;
            let s = (0..params.p).min_by(|a, b| abs(z - params.qp(*a as i64)).partial_cmp(&abs(z - params.qp(*b as i64))).unwrap()).unwrap();
            groups[s].push(i);
        }
        for (s, g) in groups.into_iter().enumerate() {
            if !g.is_empty() {
                blocks.push((s, g));
            }
        }
    } else {
        blocks.push((0, (0..d).collect()));
    }
    let tp = mono.transfer_poly();
    let nbar = params.nbar() as i64;
    let coeff_mats: Vec<Option<Mat<R>>> = (0..=params.nbar()).map(|j| tp.coeff(-nbar + 2 * j as i64).cloned()).collect();
    let xscale = x.iter().map(|z| abs(*z)).fold(0.0, f64::max).max(1e-300);
    let mut out = vec![];
    for (s, idx) in blocks {
        let m = idx.len();
        let xb = DMatrix::from_fn(m, m, |i, j| x[(idx[i], idx[j])]);
        let (vals, vr) = eig(&xb);
        for i in 0..m {
            for j in 0..i {
                let gap = abs(vals[i] - vals[j]) / xscale;
                if gap < floor_tol::<R>(SPECTRAL_GAP) {
                    return Err(SgError::DegenerateSpectrum(format!("transfer eigenvalue gap {gap:.3e} in sector {s}")));
                }
            }
        }
        let vl = inverse(&vr).map_err(|e| SgError::DegenerateSpectrum(format!("eigenvector matrix: {e}")))?;
        for j in 0..m {
            let mut r = DVector::zeros(d);
            let mut l = DVector::zeros(d);
            for (i, &gi) in idx.iter().enumerate() {
                r[gi] = vr[(i, j)];
                l[gi] = vl[(j, i)];
            }
            let nrm = pair(&l, &r);
            l /= nrm;
            let coeffs: Vec<Cx<R>> = coeff_mats
                .iter()
                .map(|cm| match cm {
                    Some(mat) => pair(&l, &(mat * &r)),
                    None => zero(),
                })
                .collect();
            out.push(TransferEigenstate { t: LaurentPoly { min_deg: -nbar, coeffs }, sector: s, right: r, left: l });
        }
    }
    let key = |st: &TransferEigenstate<R>| {
        let z = st.t.eval(c(PROBE0.0, PROBE0.1));
        (st.sector, z.re.to_f64(), z.im.to_f64())
    };
    out.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
    if out.len() != d {
        return Err(SgError::IncompleteSpectrum { found: out.len(), expected: d });
    }
    Ok(out)
}

/// Full spectrum with SOV wavefunctions and Q grids.
pub fn diagonalize_transfer<R: Real>(basis: &SovBasis<R>) -> Result<Vec<SovEigenstate<R>>> {
    let states = transfer_eigenstates(&basis.params, &basis.mono)?;
    states.into_iter().map(|st| sov_data(basis, st)).collect()
}

fn grid_from<R: Real>(vals: &[Cx<R>], anchor: usize, n: usize, nn: usize, p: usize) -> Vec<Vec<Cx<R>>> {
    let k0 = label_of(anchor, n, p);
    (0..nn)
        .map(|a| {
            (0..p)
                .map(|h| {
                    let mut k = k0.clone();
                    k[a] = h;
                    vals[index_of(&k, p)] / vals[anchor]
                })
                .collect()
        })
        .collect()
}

fn argmax<R: Real>(v: &[Cx<R>]) -> usize {
    (0..v.len()).max_by(|i, j| abs(v[*i]).partial_cmp(&abs(v[*j])).unwrap()).unwrap()
}

pub fn sov_data<R: Real>(basis: &SovBasis<R>, state: TransferEigenstate<R>) -> Result<SovEigenstate<R>> {
    let pr = &basis.params;
    let psi: Vec<Cx<R>> = basis.left.iter().map(|l| pair(l, &state.right)).collect();
    let phi: Vec<Cx<R>> = basis.right.iter().map(|r| pair(&state.left, r)).collect();
    let anchor = argmax(&psi);
    let anchor_left = argmax(&phi);
    if abs(psi[anchor]) == 0.0 || abs(phi[anchor_left]) == 0.0 {
        return Err(SgError::ZeroReference);
    }
    let q_grid = grid_from(&psi, anchor, pr.n, pr.nn(), pr.p);
    let qbar_grid = grid_from(&phi, anchor_left, pr.n, pr.nn(), pr.p);
    Ok(SovEigenstate { state, psi, phi, q_grid, qbar_grid, anchor, anchor_left })
}

impl<R: Real> SovEigenstate<R> {
    /// max_k |Psi(k) - Psi(k*) prod_a Q_a(k_a) q^{-s (k_N - k*_N)}| / max |Psi|.
    pub fn factorization_residual(&self, basis: &SovBasis<R>) -> f64 {
        let pr = &basis.params;
        let k0 = label_of(self.anchor, pr.n, pr.p);
        let scale = abs(self.psi[self.anchor]);
        let mut worst = 0.0f64;
        for (i, k) in basis.labels().enumerate() {
            let mut v = self.psi[self.anchor];
            for a in 0..pr.nn() {
                v *= self.q_grid[a][k[a]];
            }
            if pr.e_n() == 1 {
                let dk = k[pr.n - 1] as i64 - k0[pr.n - 1] as i64;
                v *= pr.qp(-(self.state.sector as i64) * dk);
            }
            worst = worst.max(abs(self.psi[i] - v) / scale);
        }
        worst
    }

    /// Left-side analogue with Qbar and q^{+s}.
    pub fn left_factorization_residual(&self, basis: &SovBasis<R>) -> f64 {
        let pr = &basis.params;
        let k0 = label_of(self.anchor_left, pr.n, pr.p);
        let scale = abs(self.phi[self.anchor_left]);
        let mut worst = 0.0f64;
        for (i, k) in basis.labels().enumerate() {
            let mut v = self.phi[self.anchor_left];
            for a in 0..pr.nn() {
                v *= self.qbar_grid[a][k[a]];
            }
            if pr.e_n() == 1 {
                let dk = k[pr.n - 1] as i64 - k0[pr.n - 1] as i64;
                v *= pr.qp(self.state.sector as i64 * dk);
            }
            worst = worst.max(abs(self.phi[i] - v) / scale);
        }
        worst
    }

    /// Discrete Baxter system on the full grid:
    /// t(eta) Psi(k) = a(eta) Psi(k - e_a) + d(eta) Psi(k + e_a), eta = eta_a^{(k_a)},
    /// relative to (|t| + |a| + |d|) max |Psi|.
    pub fn baxter_grid_residual(&self, basis: &SovBasis<R>) -> f64 {
        let pr = &basis.params;
        let p = pr.p;
        let pmax = self.psi.iter().map(|z| abs(*z)).fold(0.0, f64::max);
        let mut worst = 0.0f64;
        for (i, k) in basis.labels().enumerate() {
            for a in 0..pr.nn() {
                let e = basis.eta(a, k[a] as i64);
                let mut km = k.clone();
                km[a] = (k[a] + p - 1) % p;
                let mut kp = k.clone();
                kp[a] = (k[a] + 1) % p;
                let (tv, av, dv) = (self.state.t_at(e), pr.coeff_a(e), pr.coeff_d(e));
                let lhs = tv * self.psi[i];
                let t1 = av * self.psi[index_of(&km, p)];
                let t2 = dv * self.psi[index_of(&kp, p)];
                let scale = (abs(tv) + abs(av) + abs(dv)) * pmax;
                worst = worst.max(abs(lhs - t1 - t2) / scale.max(1e-300));
            }
        }
        worst
    }
}

/// The p x p matrix D(lambda) of the functional equation.
pub fn d_matrix<R: Real>(params: &ModelParams<R>, t: &LaurentPoly<R>, lambda: Cx<R>) -> Mat<R> {
    let p = params.p;
    let mut m = DMatrix::zeros(p, p);
    for i in 0..p {
        let l = params.qp(i as i64) * lambda;
        m[(i, i)] = t.eval(l);
        m[(i, (i + 1) % p)] -= params.coeff_d(l);
        m[(i, (i + p - 1) % p)] -= params.coeff_a(l);
    }
    m
}

/// max over lambdas of |det D(lambda)| / prod(row norms).
pub fn check_functional_equation<R: Real>(params: &ModelParams<R>, t: &LaurentPoly<R>, lambdas: &[Cx<R>]) -> f64 {
    lambdas
        .iter()
        .map(|l| {
            let m = d_matrix(params, t, *l);
            let rows: f64 = (0..m.nrows()).map(|i| vnorm(&m.row(i).transpose())).product();
            abs(det(&m)) / rows.max(1e-300)
        })
        .fold(0.0, f64::max)
}

#[derive(Clone, Debug)]
pub struct QFit<R: Real> {
    /// Coefficients, lowest degree first, leading coefficient 1.
    pub coeffs: Vec<Cx<R>>,
    /// Smallest singular value ratio at the returned degree.
    pub ratio: f64,
    /// Nullspace dimension at the maximal degree (p-1)N.
    pub null_dim: usize,
}

impl<R: Real> QFit<R> {
    pub fn eval(&self, x: Cx<R>) -> Cx<R> {
        poly_eval(&self.coeffs, x)
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Smallest power with a nonzero coefficient.
    pub fn low_order(&self) -> usize {
        let mx = self.coeffs.iter().map(|z| abs(*z)).fold(0.0, f64::max);
        self.coeffs.iter().position(|z| abs(*z) > floor_tol::<R>(1e-9) * mx).unwrap_or(0)
    }
}

fn q_samples<R: Real>(params: &ModelParams<R>) -> Vec<Cx<R>> {
    let deg = (params.p - 1) * params.n;
    let m = 2 * (deg + params.n) + 1;
    (0..m)
        .map(|j| {
            let th = 0.1 + 6.0 * j as f64 / (m as f64 - 1.0).max(1.0);
            c(1.3 * th.cos(), 1.3 * th.sin())
        })
        .collect()
}

/// Minimal-degree polynomial solution of the right (or left) Baxter equation.
/// Right: t Q = a Q(l/q) + d Q(l q). Left: t Q = a-bar Q(l q) + d-bar Q(l/q).
pub fn fit_q_polynomial<R: Real>(params: &ModelParams<R>, t: &LaurentPoly<R>, left: bool) -> Result<QFit<R>> {
    let deg = (params.p - 1) * params.n;
    let pts = q_samples(params);
    let q = params.q();
    let mut full = DMatrix::zeros(pts.len(), deg + 1);
    for (i, l) in pts.iter().enumerate() {
        let tv = t.eval(*l);
        let (c1, x1, c2, x2) =
            if left { (params.coeff_a_bar(*l), *l * q, params.coeff_d_bar(*l), *l / q) } else { (params.coeff_a(*l), *l / q, params.coeff_d(*l), *l * q) };
        for j in 0..=deg {
            full[(i, j)] = tv * pow(*l, j as i64) - c1 * pow(x1, j as i64) - c2 * pow(x2, j as i64);
        }
    }
    let (sv_full, _) = smallest_right_singular(&full);
    let null_dim = sv_full.iter().filter(|s| **s <= floor_tol::<R>(NULL_TOL) * sv_full[0]).count();
    let mut best = f64::INFINITY;
    for d in 0..=deg {
        let sub = full.columns(0, d + 1).into_owned();
        let (sv, v) = smallest_right_singular(&sub);
        let ratio = sv[sv.len() - 1] / sv[0].max(1e-300);
        best = best.min(ratio);
        if ratio <= floor_tol::<R>(NULL_TOL) {
            let lead = v[d];
            let coeffs = v.iter().map(|z| *z / lead).collect();
            return Ok(QFit { coeffs, ratio, null_dim });
        }
    }
    Err(SgError::EmptyNullspace(best))
}

/// Qbar(lambda) = lambda^{N mod p} Q(-lambda).
pub fn qbar_poly<R: Real>(params: &ModelParams<R>, q: &QFit<R>) -> QFit<R> {
    let chi = params.n % params.p;
    let mut coeffs = vec![zero::<R>(); chi + q.coeffs.len()];
    for (j, z) in q.coeffs.iter().enumerate() {
        coeffs[j + chi] = if j % 2 == 0 { *z } else { -*z };
    }
    QFit { coeffs, ratio: q.ratio, null_dim: q.null_dim }
}

/// Relative Baxter residual of a polynomial at the given points.
pub fn baxter_residual<R: Real>(params: &ModelParams<R>, t: &LaurentPoly<R>, q: &QFit<R>, left: bool, lambdas: &[Cx<R>]) -> f64 {
    let qq = params.q();
    lambdas
        .iter()
        .map(|l| {
            let lhs = t.eval(*l) * q.eval(*l);
            let (r1, r2) = if left {
                (params.coeff_a_bar(*l) * q.eval(*l * qq), params.coeff_d_bar(*l) * q.eval(*l / qq))
            } else {
                (params.coeff_a(*l) * q.eval(*l / qq), params.coeff_d(*l) * q.eval(*l * qq))
            };
            abs(lhs - r1 - r2) / (abs(lhs) + abs(r1) + abs(r2)).max(1e-300)
        })
        .fold(0.0, f64::max)
}

/// max |Qpoly(eta_a^{(h)})/Qpoly(eta_a^{(h*)}) - Qgrid[a][h]/Qgrid[a][h*]| relative to the grid row.
pub fn two_route_agreement<R: Real>(basis: &SovBasis<R>, grid: &[Vec<Cx<R>>], anchor: usize, q: &QFit<R>) -> f64 {
    let pr = &basis.params;
    let k0 = label_of(anchor, pr.n, pr.p);
    let mut worst = 0.0f64;
    for (a, row) in grid.iter().enumerate() {
        let base = q.eval(basis.eta(a, k0[a] as i64));
        let scale = row.iter().map(|z| abs(*z)).fold(0.0, f64::max);
        for (h, g) in row.iter().enumerate() {
            let r = q.eval(basis.eta(a, h as i64)) / base;
            worst = worst.max(abs(r - *g) / scale);
        }
    }
    worst
}

/// Residual of the left eigen-relation <t|T(lambda) = t(lambda)<t| for a given covector.
pub fn left_eigen_residual<R: Real>(mono: &Monodromy<R>, t: &LaurentPoly<R>, l: &Vect<R>, lambdas: &[Cx<R>]) -> f64 {
    lambdas
        .iter()
        .map(|lam| {
            let tm = mono.transfer(*lam);
            let lhs = tm.tr_mul(l);
            let rhs = l * t.eval(*lam);
            vnorm(&(lhs - rhs)) / (vnorm(l) * crate::linalg::fro(&tm))
        })
        .fold(0.0, f64::max)
}

/// 1 - |<a, b>| / (|a| |b|) with the Hermitian inner product.
pub fn collinearity_defect<R: Real>(a: &Vect<R>, b: &Vect<R>) -> f64 {
    let ip = a.dotc(b);
    1.0 - abs(ip) / (vnorm(a) * vnorm(b))
}
