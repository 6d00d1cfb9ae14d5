//! Dense complex linear algebra on top of nalgebra.

use crate::scalar::{abs, one, zero, Cx, Mat, Real, Vect};
use crate::{Result, SgError};
use nalgebra::{ComplexField, DMatrix, DVector};

/// Condition number above which an inverse is refused.
pub const COND_LIMIT: f64 = 1e10;

pub fn eye<R: Real>(n: usize) -> Mat<R> {
    DMatrix::identity(n, n)
}

pub fn fro<R: Real>(m: &Mat<R>) -> f64 {
    m.iter().map(|z| abs(*z).powi(2)).sum::<f64>().sqrt()
}

pub fn vnorm<R: Real>(v: &Vect<R>) -> f64 {
    v.iter().map(|z| abs(*z).powi(2)).sum::<f64>().sqrt()
}

pub fn kron<R: Real>(a: &Mat<R>, b: &Mat<R>) -> Mat<R> {
    a.kronecker(b)
}

pub fn commutator<R: Real>(a: &Mat<R>, b: &Mat<R>) -> Mat<R> {
    a * b - b * a
}

/// Bilinear pairing of a covector (stored as a column) with a vector.
pub fn pair<R: Real>(l: &Vect<R>, r: &Vect<R>) -> Cx<R> {
    l.iter().zip(r.iter()).fold(zero(), |acc, (x, y)| acc + *x * *y)
}

/// Covector times matrix: (l^T M)^T.
pub fn covec_mul<R: Real>(l: &Vect<R>, m: &Mat<R>) -> Vect<R> {
    m.tr_mul(l)
}

pub fn inverse<R: Real>(m: &Mat<R>) -> Result<Mat<R>> {
    let n = m.nrows();
    let lu = m.clone().lu();
    let inv = lu.try_inverse().ok_or_else(|| SgError::SingularMatrix("LU pivot vanished".into()))?;
    let cond = fro(m) * fro(&inv) / n as f64;
    if !cond.is_finite() || cond > COND_LIMIT {
        return Err(SgError::SingularMatrix(format!("condition {cond:.3e}")));
    }
    Ok(inv)
}

/// B^{-1} A by LU solve.
pub fn solve_left<R: Real>(b: &Mat<R>, a: &Mat<R>) -> Result<Mat<R>> {
    let binv = inverse(b)?;
    Ok(binv * a)
}

pub fn det<R: Real>(m: &Mat<R>) -> Cx<R> {
    if m.nrows() == 0 {
        return one();
    }
    m.clone().lu().determinant()
}

/// Integer matrix power; negative powers go through the inverse.
pub fn matpow<R: Real>(m: &Mat<R>, k: i64) -> Result<Mat<R>> {
    let base = if k < 0 { inverse(m)? } else { m.clone() };
    let mut acc = eye::<R>(m.nrows());
    for _ in 0..k.unsigned_abs() {
        acc = &acc * &base;
    }
    Ok(acc)
}

/// Eigenpairs of a general complex matrix: eigenvalues and the matrix of
/// right eigenvectors (columns, unit norm). Requires a simple spectrum.
pub fn eig<R: Real>(m: &Mat<R>) -> (Vec<Cx<R>>, Mat<R>) {
    let n = m.nrows();
    let (q, t) = m.clone().schur().unpack();
    let scale = R::lit(fro(m).max(1e-300) * R::eps());
    let mut y = DMatrix::<Cx<R>>::zeros(n, n);
    let mut vals = Vec::with_capacity(n);
    for i in 0..n {
        let li = t[(i, i)];
        vals.push(li);
        y[(i, i)] = one();
        for j in (0..i).rev() {
            let mut s = zero::<R>();
            for l in (j + 1)..=i {
                s += t[(j, l)] * y[(l, i)];
            }
            let mut den = t[(j, j)] - li;
            if ComplexField::modulus(den) < scale {
                den = Cx::new(scale, R::zero());
            }
            y[(j, i)] = -s / den;
        }
    }
    let mut v = q * y;
    for i in 0..n {
        let nrm = v.column(i).iter().map(|z| abs(*z).powi(2)).sum::<f64>().sqrt();
        let s = Cx::new(R::lit(1.0 / nrm), R::zero());
        for r in 0..n {
            v[(r, i)] *= s;
        }
    }
    (vals, v)
}

/// Roots of a polynomial given by coefficients, lowest degree first.
pub fn poly_roots<R: Real>(coeffs: &[Cx<R>]) -> Vec<Cx<R>> {
    let deg = coeffs.len() - 1;
    if deg == 0 {
        return vec![];
    }
    let lead = coeffs[deg];
    let mut comp = DMatrix::<Cx<R>>::zeros(deg, deg);
    for i in 1..deg {
        comp[(i, i - 1)] = one();
    }
    for i in 0..deg {
        comp[(i, deg - 1)] = -coeffs[i] / lead;
    }
    comp.schur().eigenvalues().map(|e| e.iter().cloned().collect()).unwrap_or_default()
}

pub fn poly_eval<R: Real>(coeffs: &[Cx<R>], x: Cx<R>) -> Cx<R> {
    coeffs.iter().rev().fold(zero(), |acc, c| acc * x + *c)
}

/// Singular values (descending) and the right singular vector of the
/// smallest one. The matrix must have at least as many rows as columns.
pub fn smallest_right_singular<R: Real>(m: &Mat<R>) -> (Vec<f64>, Vect<R>) {
    let svd = m.clone().svd(false, true);
    let vt = svd.v_t.expect("requested v_t");
    let mut idx: Vec<usize> = (0..svd.singular_values.len()).collect();
    let sv: Vec<f64> = svd.singular_values.iter().map(|s| s.to_f64()).collect();
    idx.sort_by(|a, b| sv[*b].partial_cmp(&sv[*a]).unwrap());
    let last = *idx.last().unwrap();
    let v = DVector::from_iterator(vt.ncols(), vt.row(last).iter().map(|z| z.conj()));
    (idx.iter().map(|i| sv[*i]).collect(), v)
}

/// Numerical rank with relative threshold on singular values.
pub fn rank<R: Real>(m: &Mat<R>, rel: f64) -> usize {
    let svd = m.clone().svd(false, false);
    let sv: Vec<f64> = svd.singular_values.iter().map(|s| s.to_f64()).collect();
    let mx = sv.iter().cloned().fold(0.0, f64::max);
    sv.iter().filter(|s| **s > rel * mx).count()
}

/// Frobenius norm of A - B relative to `scale`, guarding zero scales.
pub fn rel_residual<R: Real>(a: &Mat<R>, b: &Mat<R>, scale: f64) -> f64 {
    fro(&(a - b)) / scale.max(1e-300)
}
